//! One function per subcommand.  Each takes the parsed configuration and an
//! output directory, writes its artifacts (CSV traces, a key/value report,
//! SVG plots), and returns the list of files it produced.

use std::fs;
use std::path::{Path, PathBuf};

use vrudder::airframe::{
    assemble_plant, damage_derivatives, dimensionalize, golden_plant,
};
use vrudder::engine::{delay_approximation, engine_state_space, thrust_step};
use vrudder::lti::{
    append_diagonal, modal_analysis, series, singular_values, StateSpaceModel,
};
use vrudder::robustness::{run_campaign, worst_case_summary, MetricSummary};
use vrudder::sim::SimTrace;
use vrudder::sim::{simulate_closed_loop, simulate_open_loop};
use vrudder::synthesis::{
    disk_margin, ncf_synthesis, pilot_prefilter, shape_plant, DiskMarginRecord,
    SynthesisResult,
};
use vrudder::thrustmap::{rudder_to_thrust, split_engines, MappingParams};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::plot::{line_plot, scatter_plot, Series};
use crate::report::{columns_to_rows, write_csv, Report};

/// Fixed column schema of every state/effort trace.
pub const TRACE_HEADER: &str =
    "t,phi_deg,p_dps,beta_deg,r_dps,da_cmd_deg,da_deg,dT_cmd_lbf,dT_lbf";

/// The design plant selected by the configuration.
fn build_plant(cfg: &Config) -> Result<StateSpaceModel> {
    if cfg.plant.use_published {
        Ok(golden_plant())
    } else {
        assembled_plant(cfg)
    }
}

/// The plant assembled from the data tables, with the configured entry pins.
fn assembled_plant(cfg: &Config) -> Result<StateSpaceModel> {
    let cond = cfg.flight_condition()?;
    let geom = cfg.geometry()?;
    let inertia = cfg.inertia_damaged()?;
    let damaged = damage_derivatives(&cfg.derivatives()?, &cond, &geom, &inertia)
        .map_err(CliError::numerical)?;
    let dim =
        dimensionalize(&damaged, &cond, &geom, &inertia).map_err(CliError::numerical)?;
    assemble_plant(&dim, &cond, &cfg.trim()?, &inertia, &geom, &cfg.overrides()?)
        .map_err(CliError::numerical)
}

/// Everything the closed-loop commands share: plant, synthesis result,
/// pilot prefilter, and thrust mapping.
struct Design {
    plant: StateSpaceModel,
    result: SynthesisResult,
    prefilter: StateSpaceModel,
    mapping: MappingParams,
}

fn design(cfg: &Config) -> Result<Design> {
    let plant = build_plant(cfg)?;
    let weights = cfg.loop_weights()?;
    let gs = shape_plant(&plant, &weights).map_err(CliError::numerical)?;
    let result =
        ncf_synthesis(&gs, &weights, cfg.gamma_backoff()?).map_err(CliError::numerical)?;
    let prefilter = pilot_prefilter(&weights, &cfg.synthesis.prefilter_gearing_deg)
        .map_err(CliError::numerical)?;
    let mapping = cfg.mapping()?;
    Ok(Design { plant, result, prefilter, mapping })
}

fn write_svg(path: &Path, svg: &str) -> Result<()> {
    fs::write(path, svg)?;
    Ok(())
}

fn trace_rows(trace: &SimTrace) -> Vec<Vec<f64>> {
    columns_to_rows(&[
        &trace.time,
        &trace.phi_deg,
        &trace.p_dps,
        &trace.beta_deg,
        &trace.r_dps,
        &trace.da_cmd_deg,
        &trace.da_deg,
        &trace.dt_cmd_lbf,
        &trace.dt_lbf,
    ])
}

fn state_series(trace: &SimTrace) -> Vec<Series> {
    vec![
        Series::new("phi (deg)", trace.time.clone(), trace.phi_deg.clone()),
        Series::new("p (deg/s)", trace.time.clone(), trace.p_dps.clone()),
        Series::new("beta (deg)", trace.time.clone(), trace.beta_deg.clone()),
        Series::new("r (deg/s)", trace.time.clone(), trace.r_dps.clone()),
    ]
}

fn key_name(label: &str) -> String {
    label.replace(' ', "_")
}

fn push_option(r: &mut Report, key: &str, value: Option<f64>) {
    match value {
        Some(v) => r.push_f64(key, v),
        None => r.push(key, "none"),
    }
}

fn push_matrix(r: &mut Report, prefix: &str, m: &nalgebra::DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            r.push_f64(&format!("{prefix}.{}.{}", i + 1, j + 1), m[(i, j)]);
        }
    }
}

/// `model`: the published matrices, the table-derived assembly, and their
/// entrywise deviations.
pub fn cmd_model(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let golden = golden_plant();
    let assembled = assembled_plant(cfg)?;
    let mut r = Report::new();
    r.push("plant.source", if cfg.plant.use_published { "published" } else { "assembled" });
    r.push_usize("plant.states", golden.order());
    r.push_usize("plant.inputs", golden.num_inputs());
    r.push_usize("plant.outputs", golden.num_outputs());
    push_matrix(&mut r, "published.a", &golden.a);
    push_matrix(&mut r, "published.b", &golden.b);
    push_matrix(&mut r, "assembled.a", &assembled.a);
    push_matrix(&mut r, "assembled.b", &assembled.b);
    push_matrix(&mut r, "deviation.a", &(&assembled.a - &golden.a));
    push_matrix(&mut r, "deviation.b", &(&assembled.b - &golden.b));
    let path = out.join("model_report.txt");
    r.write(&path)?;
    Ok(vec![path])
}

/// `modes`: the dynamic modes of the design plant.
pub fn cmd_modes(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let plant = build_plant(cfg)?;
    let modes = modal_analysis(&plant).map_err(CliError::numerical)?;
    let mut r = Report::new();
    r.push_usize("mode.count", modes.len());
    for m in &modes {
        let key = key_name(&m.name);
        r.push_f64(&format!("mode.{key}.pole_re"), m.pole.re);
        r.push_f64(&format!("mode.{key}.pole_im"), m.pole.im);
        push_option(&mut r, &format!("mode.{key}.damping"), m.damping);
        r.push_f64(&format!("mode.{key}.natural_frequency_rps"), m.natural_frequency);
        push_option(&mut r, &format!("mode.{key}.period_s"), m.period_s);
    }
    let path = out.join("modes_report.txt");
    r.write(&path)?;
    Ok(vec![path])
}

/// `engine`: full-throttle step response of the delayed engine.
pub fn cmd_engine(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.engine_params()?;
    let dt = cfg.sim.dt_s;
    let trace = thrust_step(&p, p.t_max, cfg.engine.step_duration_s, dt)
        .map_err(CliError::numerical)?;

    let csv_path = out.join("engine_step.csv");
    write_csv(
        &csv_path,
        "t,commanded_lbf,delivered_lbf",
        &columns_to_rows(&[&trace.time, &trace.commanded, &trace.delivered]),
    )?;

    let svg_path = out.join("engine_step.svg");
    write_svg(
        &svg_path,
        &line_plot(
            "engine step response",
            "t (s)",
            "thrust (lbf)",
            &[
                Series::new("commanded", trace.time.clone(), trace.commanded.clone()),
                Series::new("delivered", trace.time.clone(), trace.delivered.clone()),
            ],
        ),
    )?;

    let rise_target = p.t_trim + 0.98 * (p.t_max - p.t_trim);
    let t98 = trace
        .time
        .iter()
        .zip(&trace.delivered)
        .find(|(_, &d)| d >= rise_target)
        .map(|(&t, _)| t);
    let peak_slope = trace
        .delivered
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / dt)
        .fold(0.0_f64, f64::max);

    let mut r = Report::new();
    r.push_f64("command_lbf", p.t_max);
    r.push_f64("trim_lbf", p.t_trim);
    push_option(&mut r, "rise_98pct_s", t98);
    r.push_f64("peak_slope_lbf_s", peak_slope);
    r.push_f64("final_lbf", *trace.delivered.last().unwrap_or(&0.0));
    let report_path = out.join("engine_report.txt");
    r.write(&report_path)?;
    Ok(vec![csv_path, svg_path, report_path])
}

/// `map`: rudder-command sweep through the thrust mapping, with the
/// symmetric engine split where the envelope admits it.
pub fn cmd_map(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let m = cfg.mapping()?;
    let mut rows = Vec::with_capacity(101);
    for i in 0..=100 {
        let dr_deg = (i as f64 - 50.0) / 10.0;
        let dt_lbf = rudder_to_thrust(dr_deg.to_radians(), m.k_map);
        let (t1, t4) = match split_engines(dt_lbf, m.engine.t_trim, m.engine.t_max) {
            Ok((t1, _, _, t4)) => (t1, t4),
            Err(_) => (f64::NAN, f64::NAN),
        };
        rows.push(vec![dr_deg, dt_lbf, t1, t4]);
    }

    let csv_path = out.join("thrust_map.csv");
    write_csv(&csv_path, "delta_r_deg,delta_t_lbf,t1_lbf,t4_lbf", &rows)?;

    let dr: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let svg_path = out.join("thrust_map.svg");
    write_svg(
        &svg_path,
        &line_plot(
            "rudder-equivalent command to differential thrust",
            "rudder command (deg)",
            "thrust (lbf)",
            &[
                Series::new("delta T", dr.clone(), rows.iter().map(|r| r[1]).collect()),
                Series::new("T1", dr.clone(), rows.iter().map(|r| r[2]).collect()),
                Series::new("T4", dr, rows.iter().map(|r| r[3]).collect()),
            ],
        ),
    )?;

    let mut r = Report::new();
    r.push_f64("k_map_lbf_per_rad", m.k_map);
    r.push_f64("thrust_at_1deg_lbf", rudder_to_thrust(1.0_f64.to_radians(), m.k_map));
    r.push_f64(
        "symmetric_split_limit_lbf",
        2.0 * m.engine.t_trim.min(m.engine.t_max - m.engine.t_trim),
    );
    r.push_f64("saturation_lbf", m.saturation);
    let report_path = out.join("map_report.txt");
    r.write(&report_path)?;
    Ok(vec![csv_path, svg_path, report_path])
}

/// `openloop`: unassisted response of the damaged aircraft to the pilot
/// steps.
pub fn cmd_openloop(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let plant = build_plant(cfg)?;
    let mapping = cfg.mapping()?;
    let mut sim = cfg.sim_config()?;
    sim.duration = cfg.openloop.duration_s;
    let trace = simulate_open_loop(&plant, &mapping, &sim).map_err(CliError::numerical)?;

    let csv_path = out.join("openloop_trace.csv");
    write_csv(&csv_path, TRACE_HEADER, &trace_rows(&trace))?;

    let svg_path = out.join("openloop_states.svg");
    write_svg(
        &svg_path,
        &line_plot("open-loop response", "t (s)", "state", &state_series(&trace)),
    )?;

    let mut r = Report::new();
    r.push("settled", trace.settled.to_string());
    let first_window = ((1.0 / sim.dt).round() as usize + 1).min(trace.len());
    for (name, series) in [
        ("phi_deg", &trace.phi_deg),
        ("p_dps", &trace.p_dps),
        ("beta_deg", &trace.beta_deg),
        ("r_dps", &trace.r_dps),
    ] {
        let early = series[..first_window]
            .iter()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        let overall = series.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        r.push_f64(&format!("peak.{name}"), overall);
        r.push_f64(&format!("growth_ratio.{name}"), overall / early.max(1e-12));
    }
    let report_path = out.join("openloop_report.txt");
    r.write(&report_path)?;
    Ok(vec![csv_path, svg_path, report_path])
}

/// `synth`: loop-shaping synthesis summary plus the shaped-plant singular
/// values.
pub fn cmd_synth(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let d = design(cfg)?;
    let mut r = Report::new();
    r.push_f64("gamma_min", d.result.gamma_min);
    r.push_f64("gamma", d.result.gamma);
    r.push_f64("e_max", d.result.e_max);
    r.push_f64("verification_norm", d.result.verification_norm);
    r.push_usize("shaped_plant_order", d.result.gs.order());
    r.push_usize("controller_order", d.result.k.order());
    push_matrix(&mut r, "prefilter", &d.result.prefilter);
    let report_path = out.join("synth_report.txt");
    r.write(&report_path)?;

    // Shaped-plant singular values on a log grid, plotted in log10 axes.
    let grid: Vec<f64> =
        (0..=120).map(|i| 10.0_f64.powf(-2.0 + 4.0 * i as f64 / 120.0)).collect();
    let sv = singular_values(&d.result.gs, &grid).map_err(CliError::numerical)?;
    let logw: Vec<f64> = grid.iter().map(|w| w.log10()).collect();
    let top: Vec<f64> = sv.iter().map(|s| s[0].max(1e-12).log10()).collect();
    let bottom: Vec<f64> =
        sv.iter().map(|s| s.last().copied().unwrap_or(0.0).max(1e-12).log10()).collect();
    let svg_path = out.join("synth_loopshape.svg");
    write_svg(
        &svg_path,
        &line_plot(
            "shaped plant singular values",
            "log10 omega (rad/s)",
            "log10 sigma",
            &[
                Series::new("sigma max", logw.clone(), top),
                Series::new("sigma min", logw, bottom),
            ],
        ),
    )?;
    Ok(vec![report_path, svg_path])
}

fn push_margin(r: &mut Report, prefix: &str, rec: &DiskMarginRecord) {
    let key = key_name(&rec.label);
    r.push_f64(&format!("{prefix}.{key}.alpha_max"), rec.alpha_max);
    r.push_f64(&format!("{prefix}.{key}.gain_low"), rec.gain_low);
    r.push_f64(&format!("{prefix}.{key}.gain_high"), rec.gain_high);
    r.push_f64(&format!("{prefix}.{key}.phase_margin_deg"), rec.phase_margin_deg);
}

/// `margins`: disk margins at the plant input and output, optionally with
/// the engine lag and delay approximation inside the loop.
pub fn cmd_margins(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let d = design(cfg)?;
    let (g_eff, loop_tag) = if cfg.margins.include_engine_lag {
        let lag = engine_state_space(&d.mapping.engine).map_err(CliError::numerical)?;
        let delay = delay_approximation(&d.mapping.engine).map_err(CliError::numerical)?;
        let thrust_path = series(&lag, &delay).map_err(CliError::numerical)?;
        let chain = append_diagonal(&StateSpaceModel::identity(1), &thrust_path)
            .map_err(CliError::numerical)?;
        (series(&chain, &d.plant).map_err(CliError::numerical)?, "with_engine_lag")
    } else {
        (d.plant.clone(), "design_loop")
    };
    let l_in = series(&g_eff, &d.result.k).map_err(CliError::numerical)?;
    let l_out = series(&d.result.k, &g_eff).map_err(CliError::numerical)?;
    let input = disk_margin(&l_in).map_err(CliError::numerical)?;
    let output = disk_margin(&l_out).map_err(CliError::numerical)?;

    let mut r = Report::new();
    r.push("loop", loop_tag);
    push_margin(&mut r, "input", &input.multiloop);
    for rec in &input.channels {
        push_margin(&mut r, "input", rec);
    }
    push_margin(&mut r, "output", &output.multiloop);
    for rec in &output.channels {
        push_margin(&mut r, "output", rec);
    }
    let path = out.join("margins_report.txt");
    r.write(&path)?;
    Ok(vec![path])
}

/// `sim`: nominal closed-loop run with all actuator constraints active.
pub fn cmd_sim(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let d = design(cfg)?;
    let sim = cfg.sim_config()?;
    let trace = simulate_closed_loop(&d.plant, &d.result.k, &d.prefilter, &d.mapping, &sim)
        .map_err(CliError::numerical)?;

    let csv_path = out.join("sim_trace.csv");
    write_csv(&csv_path, TRACE_HEADER, &trace_rows(&trace))?;

    let states_path = out.join("sim_states.svg");
    write_svg(
        &states_path,
        &line_plot("closed-loop states", "t (s)", "state", &state_series(&trace)),
    )?;
    let aileron_path = out.join("sim_aileron.svg");
    write_svg(
        &aileron_path,
        &line_plot(
            "aileron command and deflection",
            "t (s)",
            "aileron (deg)",
            &[
                Series::new("commanded", trace.time.clone(), trace.da_cmd_deg.clone()),
                Series::new("delivered", trace.time.clone(), trace.da_deg.clone()),
            ],
        ),
    )?;
    let thrust_path = out.join("sim_thrust.svg");
    write_svg(
        &thrust_path,
        &line_plot(
            "differential thrust command and delivery",
            "t (s)",
            "thrust (lbf)",
            &[
                Series::new("commanded", trace.time.clone(), trace.dt_cmd_lbf.clone()),
                Series::new("delivered", trace.time.clone(), trace.dt_lbf.clone()),
            ],
        ),
    )?;

    let mut r = Report::new();
    r.push("settled", trace.settled.to_string());
    push_option(&mut r, "settling_time_s", trace.settling_time_s);
    r.push_f64("peak_aileron_deg", trace.peak_aileron_deg());
    r.push_f64("peak_thrust_lbf", trace.peak_thrust_lbf());
    r.push_f64("steady_thrust_lbf", trace.steady_state_thrust_lbf());
    r.push_usize("rate_limiter_hits", trace.rate_limiter_hits);
    r.push_f64("final_phi_deg", *trace.phi_deg.last().unwrap_or(&0.0));
    r.push_f64("final_beta_deg", *trace.beta_deg.last().unwrap_or(&0.0));
    r.push("integrator", trace.integrator.name());
    let report_path = out.join("sim_report.txt");
    r.write(&report_path)?;
    Ok(vec![csv_path, states_path, aileron_path, thrust_path, report_path])
}

fn push_summary(r: &mut Report, prefix: &str, s: &MetricSummary) {
    r.push_f64(&format!("{prefix}.min"), s.min);
    r.push_f64(&format!("{prefix}.mean"), s.mean);
    r.push_f64(&format!("{prefix}.max"), s.max);
}

/// `monte`: seeded Monte-Carlo robustness campaign.
pub fn cmd_monte(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let d = design(cfg)?;
    let spec = cfg.uncertainty_spec()?;
    let sim = cfg.sim_config()?;
    let report = run_campaign(&d.plant, &d.result.k, &d.prefilter, &d.mapping, &spec, &sim)
        .map_err(CliError::numerical)?;

    let rows: Vec<Vec<f64>> = report
        .runs
        .iter()
        .map(|run| {
            vec![
                run.run_index as f64,
                if run.stable { 1.0 } else { 0.0 },
                run.settling_time_s.unwrap_or(f64::NAN),
                run.peak_aileron_deg,
                run.peak_thrust_lbf,
                run.steady_thrust_lbf,
                run.rate_limiter_hits as f64,
                run.sigma_delta,
            ]
        })
        .collect();
    let csv_path = out.join("monte_runs.csv");
    write_csv(
        &csv_path,
        "run_index,stable,settling_time_s,peak_aileron_deg,peak_thrust_lbf,steady_thrust_lbf,rate_limiter_hits,sigma_delta",
        &rows,
    )?;

    let mut r = Report::new();
    r.push_f64("level", report.spec.level);
    r.push("seed", report.spec.seed.to_string());
    r.push_usize("runs", report.spec.count);
    r.push_f64("grid_log10_start", report.spec.grid_log10_start);
    r.push_f64("grid_log10_end", report.spec.grid_log10_end);
    r.push_usize("grid_points", report.spec.grid_points);
    r.push_f64("gain_reference", report.gain_reference);
    r.push_f64("gain_reference_frequency_rps", report.gain_reference_frequency_rps);
    r.push_f64("stable_fraction", report.stable_fraction);
    match &report.settling {
        Some(s) => push_summary(&mut r, "settling_s", s),
        None => r.push("settling_s", "none"),
    }
    push_summary(&mut r, "peak_aileron_deg", &report.peak_aileron);
    push_summary(&mut r, "peak_thrust_lbf", &report.peak_thrust);
    push_summary(&mut r, "steady_thrust_lbf", &report.steady_thrust);
    r.push_usize("runs_with_rate_limiter_hits", report.runs_with_rate_limiter_hits);
    for (rank, idx) in worst_case_summary(&report).into_iter().take(10).enumerate() {
        r.push_usize(&format!("worst.{rank}"), idx);
    }
    let report_path = out.join("monte_report.txt");
    r.write(&report_path)?;

    let sigma: Vec<f64> = report.runs.iter().map(|run| run.sigma_delta).collect();
    let settling_path = out.join("monte_settling.svg");
    write_svg(
        &settling_path,
        &scatter_plot(
            "settling time vs perturbation size",
            "sigma(delta)",
            "settling time (s)",
            &[Series::new(
                "stable runs",
                sigma.clone(),
                report
                    .runs
                    .iter()
                    .map(|run| run.settling_time_s.unwrap_or(f64::NAN))
                    .collect(),
            )],
        ),
    )?;
    let thrust_svg_path = out.join("monte_thrust.svg");
    write_svg(
        &thrust_svg_path,
        &scatter_plot(
            "peak differential thrust vs perturbation size",
            "sigma(delta)",
            "peak thrust (lbf)",
            &[Series::new(
                "runs",
                sigma,
                report.runs.iter().map(|run| run.peak_thrust_lbf).collect(),
            )],
        ),
    )?;
    Ok(vec![csv_path, report_path, settling_path, thrust_svg_path])
}
