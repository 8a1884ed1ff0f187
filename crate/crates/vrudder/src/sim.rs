//! Time-domain simulation of the lateral-directional loop.
//!
//! Two entry points cover the study's time-domain artifacts: an open-loop
//! integration of the bare airframe under step inputs (demonstrating the
//! divergence of the damaged aircraft), and a constrained closed-loop run in
//! which pilot steps pass through the reference prefilter while the
//! controller acts in the negative feedback path.  The closed-loop harness
//! applies the aileron position limit, converts the rudder-equivalent
//! feedforward command to a thrust command, and pushes that command through
//! the engine chain: magnitude saturation, transport delay, second-order
//! spool-up lag, and the thrust rate limiter.  Delivered thrust is converted
//! back to equivalent radians before entering the plant.
//!
//! Integration is classical fixed-step RK4.  Within each step the plant
//! input is held constant (zero-order hold), matching how the discrete
//! actuator chain updates once per sample; the engine lag is integrated with
//! the same scheme and step.  When every limit is disabled and the engine
//! lag is bypassed, the loop is pure LTI and the harness switches to
//! evaluating the feedback law inside the integrator stages, which
//! reproduces the analytic closed-loop step response to integrator accuracy.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::engine::step_lag;
use crate::error::{Error, Result};
use crate::lti::StateSpaceModel;
use crate::thrustmap::MappingParams;

type Mat = DMatrix<f64>;

/// State-norm guard: integration aborts once any plant state magnitude
/// exceeds this bound (or turns non-finite).
pub const STATE_GUARD: f64 = 1e9;

/// Default settling band: fraction of the reference amplitude a state must
/// stay within, measured against its final-second mean.
pub const DEFAULT_SETTLING_BAND: f64 = 0.02;

/// One pilot step command on a single channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotInput {
    /// Step magnitude in degrees (aileron deg, or rudder-equivalent deg).
    pub magnitude_deg: f64,
    /// Step onset time in seconds.
    pub start_time_s: f64,
}

impl PilotInput {
    /// A step of the given magnitude applied from t = 0.
    pub fn step(magnitude_deg: f64) -> Self {
        Self { magnitude_deg, start_time_s: 0.0 }
    }

    fn value_at(&self, t: f64) -> f64 {
        if t >= self.start_time_s - 1e-12 {
            self.magnitude_deg
        } else {
            0.0
        }
    }
}

/// Integration scheme tag, recorded in every trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classical fixed-step fourth-order Runge-Kutta.
    #[default]
    Rk4,
}

impl Integrator {
    /// Stable lowercase name for reports.
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Rk4 => "rk4",
        }
    }
}

/// Time-domain run configuration.
///
/// Thrust-side limits (saturation, rate, engine lag parameters) live in
/// [`MappingParams`]; this struct carries the grid, the pilot commands, and
/// the aileron-side limits.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Run length (s).
    pub duration: f64,
    /// Pilot steps: `[aileron channel, rudder-equivalent channel]`, degrees.
    pub pilot: [PilotInput; 2],
    /// Aileron position limit (deg); `f64::INFINITY` disables it.
    pub aileron_limit_deg: f64,
    /// Optional aileron rate limit (deg/s); ailerons are otherwise
    /// instantaneous.
    pub aileron_rate_limit_dps: Option<f64>,
    /// Route the thrust feedforward command through the engine lag and
    /// transport delay (disable for pure-LTI checks).
    pub engine_lag_enabled: bool,
    /// Integration scheme.
    pub integrator: Integrator,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            duration: 30.0,
            pilot: [PilotInput::step(1.0), PilotInput::step(1.0)],
            aileron_limit_deg: 26.0,
            aileron_rate_limit_dps: None,
            engine_lag_enabled: true,
            integrator: Integrator::Rk4,
        }
    }
}

impl SimConfig {
    /// Check grid, limit, and pilot-input sanity.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sim dt must be positive and finite, got {}",
                self.dt
            )));
        }
        if !(self.duration >= self.dt) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sim duration must be at least one step, got {}",
                self.duration
            )));
        }
        if !(self.aileron_limit_deg > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "aileron limit must be positive, got {}",
                self.aileron_limit_deg
            )));
        }
        if let Some(r) = self.aileron_rate_limit_dps {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "aileron rate limit must be positive, got {r}"
                )));
            }
        }
        for (i, p) in self.pilot.iter().enumerate() {
            if !p.magnitude_deg.is_finite() || !p.start_time_s.is_finite() || p.start_time_s < 0.0
            {
                return Err(Error::InvalidParameter(format!(
                    "pilot input {i} has invalid magnitude/start ({}, {})",
                    p.magnitude_deg, p.start_time_s
                )));
            }
        }
        Ok(())
    }
}

/// Sampled run history plus derived settling metrics.
///
/// All series share one length; states are logged before each integration
/// step, actuator channels after the limiter updates of the same sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Sample instants (s).
    pub time: Vec<f64>,
    /// Bank angle (deg).
    pub phi_deg: Vec<f64>,
    /// Roll rate (deg/s).
    pub p_dps: Vec<f64>,
    /// Sideslip angle (deg).
    pub beta_deg: Vec<f64>,
    /// Yaw rate (deg/s).
    pub r_dps: Vec<f64>,
    /// Commanded aileron before the position limit (deg).
    pub da_cmd_deg: Vec<f64>,
    /// Delivered aileron (deg).
    pub da_deg: Vec<f64>,
    /// Commanded differential thrust before saturation/rate limiting (lbf).
    pub dt_cmd_lbf: Vec<f64>,
    /// Delivered differential thrust (lbf).
    pub dt_lbf: Vec<f64>,
    /// True when every state settles within the run.
    pub settled: bool,
    /// Slowest per-state settling time, when all states settle (s).
    pub settling_time_s: Option<f64>,
    /// Number of samples at which the thrust command outran the rate limiter.
    pub rate_limiter_hits: usize,
    /// Scheme that produced the trace.
    pub integrator: Integrator,
}

impl SimTrace {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.time.len()
    }

    /// True for a trace with no samples.
    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Largest delivered aileron magnitude (deg).
    pub fn peak_aileron_deg(&self) -> f64 {
        max_abs(&self.da_deg)
    }

    /// Largest delivered differential-thrust magnitude (lbf).
    pub fn peak_thrust_lbf(&self) -> f64 {
        max_abs(&self.dt_lbf)
    }

    /// Mean delivered differential thrust over the final second (lbf).
    pub fn steady_state_thrust_lbf(&self) -> f64 {
        let n = self.dt_lbf.len();
        if n == 0 {
            return 0.0;
        }
        let w = averaging_window(n, self.sample_dt());
        self.dt_lbf[n - w..].iter().sum::<f64>() / w as f64
    }

    fn sample_dt(&self) -> f64 {
        if self.time.len() >= 2 {
            self.time[1] - self.time[0]
        } else {
            0.0
        }
    }

    fn state_series(&self) -> [&[f64]; 4] {
        [&self.phi_deg, &self.p_dps, &self.beta_deg, &self.r_dps]
    }
}

fn max_abs(series: &[f64]) -> f64 {
    series.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
}

/// Number of trailing samples spanning one second (at least one sample).
fn averaging_window(len: usize, dt: f64) -> usize {
    if !(dt > 0.0) || len == 0 {
        return len.max(1);
    }
    ((1.0 / dt).round() as usize).clamp(1, len)
}

/// Settling time of one series: the first time after which it stays within
/// `band_fraction` of its reference amplitude around the final-second mean.
///
/// The band is `band_fraction * max(|final mean|, peak magnitude, 1e-12)`,
/// so traces settling toward zero still receive a meaningful band.  Returns
/// `Some(0.0)` when the series never leaves the band, and `None` when the
/// last sample is still outside it (divergent or unsettled).
pub(crate) fn settle_series(series: &[f64], dt: f64, band_fraction: f64) -> Option<f64> {
    let n = series.len();
    if n == 0 || !(dt > 0.0) || !(band_fraction > 0.0) {
        return None;
    }
    let w = averaging_window(n, dt);
    let fin = series[n - w..].iter().sum::<f64>() / w as f64;
    let peak = max_abs(series);
    if !fin.is_finite() || !peak.is_finite() {
        return None;
    }
    let band = band_fraction * fin.abs().max(peak).max(1e-12);
    match series.iter().rposition(|&v| (v - fin).abs() > band) {
        None => Some(0.0),
        Some(i) if i + 1 == n => None,
        Some(i) => Some((i + 1) as f64 * dt),
    }
}

/// Per-state settling times of a trace: `[phi, p, beta, r]`, `None` for a
/// state that never settles.
pub fn settling_metrics(trace: &SimTrace, band_fraction: f64) -> Result<[Option<f64>; 4]> {
    if trace.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "settling metrics need at least two samples, got {}",
            trace.len()
        )));
    }
    if !(band_fraction > 0.0) || !band_fraction.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "settling band fraction must be positive, got {band_fraction}"
        )));
    }
    let dt = trace.sample_dt();
    let series = trace.state_series();
    Ok([
        settle_series(series[0], dt, band_fraction),
        settle_series(series[1], dt, band_fraction),
        settle_series(series[2], dt, band_fraction),
        settle_series(series[3], dt, band_fraction),
    ])
}

fn settle_summary(trace: &mut SimTrace) {
    let metrics = match settling_metrics(trace, DEFAULT_SETTLING_BAND) {
        Ok(m) => m,
        Err(_) => {
            trace.settled = false;
            trace.settling_time_s = None;
            return;
        }
    };
    if metrics.iter().all(|m| m.is_some()) {
        let worst = metrics.iter().map(|m| m.unwrap()).fold(0.0_f64, f64::max);
        trace.settled = true;
        trace.settling_time_s = Some(worst);
    } else {
        trace.settled = false;
        trace.settling_time_s = None;
    }
}

// ---------------------------------------------------------------------------
// dense kernels
// ---------------------------------------------------------------------------

/// `y += M x` with column-major traversal; skips zero entries of `x`.
fn mv_acc(m: &Mat, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(m.nrows(), y.len());
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += m[(i, j)] * xj;
            }
        }
    }
}

/// `y = M x`.
fn mv(m: &Mat, x: &[f64], y: &mut [f64]) {
    y.fill(0.0);
    mv_acc(m, x, y);
}

fn rk4_step<F>(z: &mut [f64], dt: f64, ws: &mut Rk4Workspace, mut f: F)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = z.len();
    f(z, &mut ws.k1);
    for i in 0..n {
        ws.stage[i] = z[i] + 0.5 * dt * ws.k1[i];
    }
    f(&ws.stage, &mut ws.k2);
    for i in 0..n {
        ws.stage[i] = z[i] + 0.5 * dt * ws.k2[i];
    }
    f(&ws.stage, &mut ws.k3);
    for i in 0..n {
        ws.stage[i] = z[i] + dt * ws.k3[i];
    }
    f(&ws.stage, &mut ws.k4);
    for (i, zi) in z.iter_mut().enumerate() {
        *zi += dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

struct Rk4Workspace {
    stage: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self {
            stage: vec![0.0; n],
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
        }
    }
}

/// Block matrices of the joint plant/controller/prefilter state, with the
/// plant feedthrough already including any additive output perturbation.
struct LoopBlocks<'a> {
    a: &'a Mat,
    b: &'a Mat,
    c: &'a Mat,
    d_total: &'a Mat,
    ak: &'a Mat,
    bk: &'a Mat,
    ck: &'a Mat,
    dk: &'a Mat,
    aw: &'a Mat,
    bw: &'a Mat,
    cw: &'a Mat,
    dw: &'a Mat,
    n: usize,
    nk: usize,
}

impl LoopBlocks<'_> {
    /// Measured output `y = C x + (D + Delta) u`.
    fn output(&self, z: &[f64], u: &[f64; 2], y: &mut [f64]) {
        mv(self.c, &z[..self.n], y);
        mv_acc(self.d_total, u, y);
    }

    /// Feedforward command `u_ff = Cw xw + Dw pilot` (shaped-input units).
    fn feedforward(&self, z: &[f64], pilot: &[f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        mv_acc(self.cw, &z[self.n + self.nk..], &mut out);
        mv_acc(self.dw, pilot, &mut out);
        out
    }

    /// Feedback command `u_fb = Ck xk + Dk y`.
    fn feedback(&self, z: &[f64], y: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        mv_acc(self.ck, &z[self.n..self.n + self.nk], &mut out);
        mv_acc(self.dk, y, &mut out);
        out
    }

    /// Stage derivative with the plant input held over the step.
    fn deriv_held(
        &self,
        z: &[f64],
        u: &[f64; 2],
        pilot: &[f64; 2],
        y: &mut [f64],
        out: &mut [f64],
    ) {
        let (n, nk) = (self.n, self.nk);
        mv(self.a, &z[..n], &mut out[..n]);
        mv_acc(self.b, u, &mut out[..n]);
        self.output(z, u, y);
        mv(self.ak, &z[n..n + nk], &mut out[n..n + nk]);
        mv_acc(self.bk, y, &mut out[n..n + nk]);
        mv(self.aw, &z[n + nk..], &mut out[n + nk..]);
        mv_acc(self.bw, pilot, &mut out[n + nk..]);
    }

    /// Stage derivative of the unconstrained loop: the feedback law is
    /// evaluated on the stage state itself (pure LTI closed loop).
    fn deriv_continuous(&self, z: &[f64], pilot: &[f64; 2], y: &mut [f64], out: &mut [f64]) {
        let (n, nk) = (self.n, self.nk);
        mv(self.c, &z[..n], y);
        let uff = self.feedforward(z, pilot);
        let ufb = self.feedback(z, y);
        let u = [uff[0] - ufb[0], uff[1] - ufb[1]];
        mv(self.a, &z[..n], &mut out[..n]);
        mv_acc(self.b, &u, &mut out[..n]);
        mv(self.ak, &z[n..n + nk], &mut out[n..n + nk]);
        mv_acc(self.bk, y, &mut out[n..n + nk]);
        mv(self.aw, &z[n + nk..], &mut out[n + nk..]);
        mv_acc(self.bw, pilot, &mut out[n + nk..]);
    }
}

fn guard_states(x: &[f64], t: f64) -> Result<()> {
    let norm = max_abs(x);
    if !norm.is_finite() || norm > STATE_GUARD {
        return Err(Error::SimulationDiverged { time: t, norm, guard: STATE_GUARD });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// open loop
// ---------------------------------------------------------------------------

/// Integrate the bare plant under the configured pilot steps with no
/// feedback or limits.
///
/// Channel 0 drives the aileron input, channel 1 the rudder-equivalent
/// input; both commands are specified in degrees.  The mapping converts the
/// second channel to pound-force for the trace's thrust columns.  No
/// divergence guard applies: an unstable plant simply produces an unsettled,
/// growing trace.
pub fn simulate_open_loop(
    plant: &StateSpaceModel,
    mapping: &MappingParams,
    config: &SimConfig,
) -> Result<SimTrace> {
    config.validate()?;
    mapping.validate()?;
    check_plant_shape(plant)?;

    let n = plant.order();
    let dt = config.dt;
    let steps = (config.duration / dt).round() as usize;
    let mut x = vec![0.0; n];
    let mut ws = Rk4Workspace::new(n);
    let mut trace = empty_trace(steps + 1, config.integrator);

    for k in 0..=steps {
        let t = k as f64 * dt;
        let cmd_deg = [config.pilot[0].value_at(t), config.pilot[1].value_at(t)];
        let u = [cmd_deg[0].to_radians(), cmd_deg[1].to_radians()];
        let thrust = mapping.k_map * u[1];
        record_sample(&mut trace, t, &x, cmd_deg[0], cmd_deg[0], thrust, thrust);
        if k == steps {
            break;
        }
        rk4_step(&mut x, dt, &mut ws, |s, out| {
            mv(&plant.a, s, out);
            mv_acc(&plant.b, &u, out);
        });
    }

    settle_summary(&mut trace);
    Ok(trace)
}

// ---------------------------------------------------------------------------
// closed loop
// ---------------------------------------------------------------------------

/// Closed-loop run of the full constrained loop.
///
/// Pilot steps (degrees) pass through `prefilter`; the aileron channel is
/// position-limited, the rudder-equivalent channel is converted to a thrust
/// command and routed through saturation, transport delay, engine lag, and
/// the rate limiter before re-entering the plant as equivalent radians.  The
/// controller `k` closes the loop in the negative feedback path.  Fails when
/// `k` does not stabilize the nominal plant.
pub fn simulate_closed_loop(
    plant: &StateSpaceModel,
    k: &StateSpaceModel,
    prefilter: &StateSpaceModel,
    mapping: &MappingParams,
    config: &SimConfig,
) -> Result<SimTrace> {
    let closed = crate::synthesis::closed_loop_system(plant, k)?;
    let abscissa = closed.spectral_abscissa()?;
    if abscissa >= 0.0 {
        return Err(Error::UnstableSystem(format!(
            "controller does not stabilize the plant: closed-loop abscissa {abscissa:.6e}"
        )));
    }
    run_closed_loop(plant, k, prefilter, mapping, config, None)
}

/// Closed-loop integration core, optionally with a constant additive output
/// perturbation `delta` entering as `y = C x + (D + delta) u`.
pub(crate) fn run_closed_loop(
    plant: &StateSpaceModel,
    k: &StateSpaceModel,
    prefilter: &StateSpaceModel,
    mapping: &MappingParams,
    config: &SimConfig,
    delta: Option<&Mat>,
) -> Result<SimTrace> {
    config.validate()?;
    mapping.validate()?;
    check_plant_shape(plant)?;
    let p = plant.num_outputs();
    if k.num_inputs() != p || k.num_outputs() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "controller must map {p} measurements to 2 commands, got {}x{}",
            k.num_outputs(),
            k.num_inputs()
        )));
    }
    if prefilter.num_inputs() != 2 || prefilter.num_outputs() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "prefilter must be 2x2, got {}x{}",
            prefilter.num_outputs(),
            prefilter.num_inputs()
        )));
    }
    if let Some(dm) = delta {
        if dm.nrows() != p || dm.ncols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "perturbation must be {p}x2, got {}x{}",
                dm.nrows(),
                dm.ncols()
            )));
        }
    }

    let n = plant.order();
    let nk = k.order();
    let nw = prefilter.order();
    let nz = n + nk + nw;
    let dt = config.dt;
    let steps = (config.duration / dt).round() as usize;

    let d_total = match delta {
        Some(dm) => &plant.d + dm,
        None => plant.d.clone(),
    };
    let blocks = LoopBlocks {
        a: &plant.a,
        b: &plant.b,
        c: &plant.c,
        d_total: &d_total,
        ak: &k.a,
        bk: &k.b,
        ck: &k.c,
        dk: &k.d,
        aw: &prefilter.a,
        bw: &prefilter.b,
        cw: &prefilter.c,
        dw: &prefilter.d,
        n,
        nk,
    };

    let kmap = mapping.k_map;
    let ail_limit = config.aileron_limit_deg.to_radians();
    let ail_rate = config.aileron_rate_limit_dps.map(f64::to_radians);
    let sat = mapping.saturation;
    let rate = mapping.rate_limit;
    let engine_on = config.engine_lag_enabled;
    let engine_params = &mapping.engine;
    let delay_len = if engine_on {
        (engine_params.t_d / dt).round() as usize
    } else {
        0
    };

    // With every limit disabled, no perturbation, and the engine bypassed,
    // the loop is linear: evaluate the feedback law inside the integrator
    // stages instead of holding the input over each step.
    let continuous = !engine_on
        && delta.is_none()
        && ail_limit.is_infinite()
        && ail_rate.map_or(true, f64::is_infinite)
        && sat.is_infinite()
        && rate.is_infinite()
        && plant.d.iter().all(|&v| v == 0.0);

    let mut z = vec![0.0; nz];
    let mut ws = Rk4Workspace::new(nz);
    let mut ybuf = vec![0.0; p];
    let mut delay: VecDeque<f64> = std::iter::repeat(0.0).take(delay_len).collect();
    let (mut eng0, mut eng1) = (0.0_f64, 0.0_f64);
    let mut rate_limited = 0.0_f64;
    let mut ail_held = 0.0_f64;
    let mut u_plant = [0.0_f64; 2];
    let mut hits = 0usize;
    let mut trace = empty_trace(steps + 1, config.integrator);

    for step_idx in 0..=steps {
        let t = step_idx as f64 * dt;
        let pilot = [config.pilot[0].value_at(t), config.pilot[1].value_at(t)];
        let uff = blocks.feedforward(&z, &pilot);

        if continuous {
            mv(blocks.c, &z[..n], &mut ybuf);
            let ufb = blocks.feedback(&z, &ybuf);
            let da = uff[0] - ufb[0];
            let thrust = kmap * (uff[1] - ufb[1]);
            record_sample(&mut trace, t, &z[..n], da, da, thrust, thrust);
            guard_states(&z[..n], t)?;
            if step_idx == steps {
                break;
            }
            rk4_step(&mut z, dt, &mut ws, |s, out| {
                blocks.deriv_continuous(s, &pilot, &mut ybuf, out)
            });
            continue;
        }

        blocks.output(&z, &u_plant, &mut ybuf);
        let ufb = blocks.feedback(&z, &ybuf);

        // Thrust feedforward: convert, saturate, delay, lag.
        let new_cmd = (kmap * uff[1]).clamp(-sat, sat);
        let delayed_cmd = if delay_len == 0 {
            new_cmd
        } else {
            let front = delay.pop_front().unwrap_or(new_cmd);
            delay.push_back(new_cmd);
            front
        };
        let ff_thrust = if engine_on { eng0 } else { new_cmd };

        let da_cmd = uff[0].clamp(-ail_limit, ail_limit) - ufb[0];
        let dt_cmd = ff_thrust - kmap * ufb[1];

        let mut da = da_cmd.clamp(-ail_limit, ail_limit);
        if let Some(r) = ail_rate {
            let max_step = r * dt;
            ail_held += (da - ail_held).clamp(-max_step, max_step);
            da = ail_held;
        }
        let dt_c = dt_cmd.clamp(-sat, sat);
        let max_step = rate * dt;
        if (dt_c - rate_limited).abs() > max_step + 1e-12 {
            hits += 1;
        }
        rate_limited += (dt_c - rate_limited).clamp(-max_step, max_step);
        u_plant = [da, rate_limited / kmap];

        record_sample(
            &mut trace,
            t,
            &z[..n],
            da_cmd,
            da,
            dt_cmd,
            rate_limited,
        );
        guard_states(&z[..n], t)?;
        if step_idx == steps {
            break;
        }

        if engine_on {
            step_lag(&mut eng0, &mut eng1, delayed_cmd, engine_params, dt);
        }
        rk4_step(&mut z, dt, &mut ws, |s, out| {
            blocks.deriv_held(s, &u_plant, &pilot, &mut ybuf, out)
        });
    }

    trace.rate_limiter_hits = hits;
    settle_summary(&mut trace);
    Ok(trace)
}

fn check_plant_shape(plant: &StateSpaceModel) -> Result<()> {
    if plant.order() != 4 || plant.num_inputs() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "simulation expects a 4-state, 2-input lateral model, got {} states, {} inputs",
            plant.order(),
            plant.num_inputs()
        )));
    }
    Ok(())
}

fn empty_trace(capacity: usize, integrator: Integrator) -> SimTrace {
    SimTrace {
        time: Vec::with_capacity(capacity),
        phi_deg: Vec::with_capacity(capacity),
        p_dps: Vec::with_capacity(capacity),
        beta_deg: Vec::with_capacity(capacity),
        r_dps: Vec::with_capacity(capacity),
        da_cmd_deg: Vec::with_capacity(capacity),
        da_deg: Vec::with_capacity(capacity),
        dt_cmd_lbf: Vec::with_capacity(capacity),
        dt_lbf: Vec::with_capacity(capacity),
        settled: false,
        settling_time_s: None,
        rate_limiter_hits: 0,
        integrator,
    }
}

fn record_sample(
    trace: &mut SimTrace,
    t: f64,
    x: &[f64],
    da_cmd_rad: f64,
    da_rad: f64,
    dt_cmd_lbf: f64,
    dt_lbf: f64,
) {
    trace.time.push(t);
    trace.phi_deg.push(x[0].to_degrees());
    trace.p_dps.push(x[1].to_degrees());
    trace.beta_deg.push(x[2].to_degrees());
    trace.r_dps.push(x[3].to_degrees());
    trace.da_cmd_deg.push(da_cmd_rad.to_degrees());
    trace.da_deg.push(da_rad.to_degrees());
    trace.dt_cmd_lbf.push(dt_cmd_lbf);
    trace.dt_lbf.push(dt_lbf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airframe::golden_plant;
    use crate::lti::{series, step_response};
    use crate::synthesis::{
        build_weights, closed_loop_system, ncf_synthesis, pilot_prefilter, shape_plant,
        DEFAULT_GAMMA_BACKOFF, DEFAULT_PREFILTER_GEARING,
    };
    use crate::thrustmap::fixtures::map_747;
    use approx::assert_relative_eq;

    fn design() -> (StateSpaceModel, StateSpaceModel, StateSpaceModel, MappingParams) {
        let g = golden_plant();
        let w = build_weights();
        let gs = shape_plant(&g, &w).unwrap();
        let result = ncf_synthesis(&gs, &w, DEFAULT_GAMMA_BACKOFF).unwrap();
        let prefilter = pilot_prefilter(&w, &DEFAULT_PREFILTER_GEARING).unwrap();
        (g, result.k, prefilter, map_747())
    }

    #[test]
    fn settle_series_constant_is_zero() {
        let series: Vec<f64> = vec![2.5; 500];
        assert_eq!(settle_series(&series, 0.01, 0.02), Some(0.0));
    }

    #[test]
    fn settle_series_first_order_rise() {
        let dt = 0.01;
        let series: Vec<f64> =
            (0..1501).map(|k| 1.0 - (-(k as f64) * dt).exp()).collect();
        let t = settle_series(&series, dt, 0.02).unwrap();
        // 2% band around a unit final value is left for good at t = ln(50).
        assert_relative_eq!(t, 50.0_f64.ln(), epsilon = 2.0 * dt);
    }

    #[test]
    fn settle_series_divergent_is_none() {
        let dt = 0.01;
        let series: Vec<f64> = (0..3001).map(|k| (0.3 * k as f64 * dt).exp()).collect();
        assert_eq!(settle_series(&series, dt, 0.02), None);
    }

    #[test]
    fn open_loop_zero_input_stays_zero() {
        let mut config = SimConfig::default();
        config.pilot = [PilotInput::step(0.0), PilotInput::step(0.0)];
        config.duration = 5.0;
        let trace = simulate_open_loop(&golden_plant(), &map_747(), &config).unwrap();
        assert!(trace.phi_deg.iter().all(|&v| v == 0.0));
        assert!(trace.dt_lbf.iter().all(|&v| v == 0.0));
        assert!(trace.settled);
        assert_eq!(trace.settling_time_s, Some(0.0));
    }

    #[test]
    fn open_loop_damaged_plant_diverges() {
        let mut config = SimConfig::default();
        config.duration = 100.0;
        let trace = simulate_open_loop(&golden_plant(), &map_747(), &config).unwrap();
        let at = |t: f64| {
            let idx = (t / config.dt).round() as usize;
            trace.phi_deg[idx].abs()
        };
        assert!(
            at(100.0) > 10.0 * at(20.0),
            "expected unbounded growth, |phi| went {} -> {}",
            at(20.0),
            at(100.0)
        );
        assert!(!trace.settled);
    }

    #[test]
    fn open_loop_stable_plant_settles_to_dc_gain() {
        // x' = -x + B u settles to x = B u.
        let a = -Mat::identity(4, 4);
        let b = Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.2, 0.0, 0.0, 1.0, 0.0, 0.3]);
        let plant =
            StateSpaceModel::new(a, b.clone(), Mat::identity(4, 4), Mat::zeros(4, 2)).unwrap();
        let mut config = SimConfig::default();
        config.duration = 15.0;
        let trace = simulate_open_loop(&plant, &map_747(), &config).unwrap();
        assert!(trace.settled);
        let u = [1.0_f64.to_radians(), 1.0_f64.to_radians()];
        let expect_phi = (b[(0, 0)] * u[0] + b[(0, 1)] * u[1]).to_degrees();
        assert_relative_eq!(*trace.phi_deg.last().unwrap(), expect_phi, epsilon = 1e-6);
    }

    #[test]
    fn closed_loop_nominal_run_matches_study_metrics() {
        let (g, k, prefilter, mapping) = design();
        let config = SimConfig::default();
        let trace = simulate_closed_loop(&g, &k, &prefilter, &mapping, &config).unwrap();

        assert!(trace.settled, "nominal run must settle");
        let settle = trace.settling_time_s.unwrap();
        assert!(
            (12.0..=12.5).contains(&settle),
            "settling time {settle} outside the pinned window"
        );

        let peak_da = trace.peak_aileron_deg();
        assert!(
            (2.0..=2.8).contains(&peak_da),
            "peak aileron {peak_da} deg outside [2.0, 2.8]"
        );
        assert_relative_eq!(peak_da, 2.40, epsilon = 0.05);

        let peak_dt = trace.peak_thrust_lbf();
        assert!(
            (3000.0..=3700.0).contains(&peak_dt),
            "peak thrust {peak_dt} lbf outside [3000, 3700]"
        );
        assert_relative_eq!(peak_dt, 3520.5, epsilon = 40.0);

        let ss = trace.steady_state_thrust_lbf();
        assert!(
            (5.0..=30.0).contains(&ss),
            "steady thrust {ss} lbf outside [5, 30]"
        );

        assert!(
            (8..=30).contains(&trace.rate_limiter_hits),
            "rate limiter hits {} outside the expected range",
            trace.rate_limiter_hits
        );

        // Hard actuator bounds hold at every sample.
        let limit = config.aileron_limit_deg + 1e-9;
        assert!(trace.da_deg.iter().all(|v| v.abs() <= limit));
        let max_step = mapping.rate_limit * config.dt * (1.0 + 1e-9);
        for w in trace.dt_lbf.windows(2) {
            assert!((w[1] - w[0]).abs() <= max_step);
        }
        assert!(trace
            .dt_lbf
            .iter()
            .all(|v| v.abs() <= mapping.saturation + 1e-9));
    }

    #[test]
    fn closed_loop_settling_metrics_consistent() {
        let (g, k, prefilter, mapping) = design();
        let trace =
            simulate_closed_loop(&g, &k, &prefilter, &mapping, &SimConfig::default()).unwrap();
        let per_state = settling_metrics(&trace, DEFAULT_SETTLING_BAND).unwrap();
        assert!(per_state.iter().all(|m| m.is_some()));
        let worst = per_state.iter().map(|m| m.unwrap()).fold(0.0_f64, f64::max);
        assert_eq!(trace.settling_time_s, Some(worst));
    }

    #[test]
    fn unconstrained_loop_matches_analytic_step_response() {
        let (g, k, prefilter, mapping) = design();
        let mut config = SimConfig::default();
        config.aileron_limit_deg = f64::INFINITY;
        config.engine_lag_enabled = false;
        let mut free_map = mapping.clone();
        free_map.saturation = f64::INFINITY;
        free_map.rate_limit = f64::INFINITY;

        let trace = simulate_closed_loop(&g, &k, &prefilter, &free_map, &config).unwrap();

        let closed = closed_loop_system(&g, &k).unwrap();
        let combined = series(&prefilter, &closed).unwrap();
        let resp = step_response(&combined, config.duration, config.dt).unwrap();
        let peak = trace.phi_deg.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let mut worst = 0.0_f64;
        for (idx, &phi) in trace.phi_deg.iter().enumerate() {
            let analytic = (resp.outputs[0][(0, idx)] * config.pilot[0].magnitude_deg
                + resp.outputs[1][(0, idx)] * config.pilot[1].magnitude_deg)
                .to_degrees();
            worst = worst.max((phi - analytic).abs());
        }
        assert!(
            worst <= 1e-3 * peak,
            "bank-angle deviation {worst} exceeds 0.1% of peak {peak}"
        );
        // The two integrations follow the same linear recursion, so the
        // agreement should be at rounding level, far inside the contract.
        assert!(worst <= 1e-8 * peak.max(1.0));
    }

    #[test]
    fn refining_dt_leaves_metrics_stable() {
        let (g, k, prefilter, mapping) = design();
        let coarse =
            simulate_closed_loop(&g, &k, &prefilter, &mapping, &SimConfig::default()).unwrap();
        let mut fine_cfg = SimConfig::default();
        fine_cfg.dt = 0.005;
        let fine = simulate_closed_loop(&g, &k, &prefilter, &mapping, &fine_cfg).unwrap();

        let ds = (coarse.settling_time_s.unwrap() - fine.settling_time_s.unwrap()).abs();
        assert!(ds < 0.1, "settling moved {ds} s under dt refinement");
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-12);
        assert!(rel(coarse.peak_aileron_deg(), fine.peak_aileron_deg()) < 0.02);
        assert!(rel(coarse.peak_thrust_lbf(), fine.peak_thrust_lbf()) < 0.02);
    }

    #[test]
    fn aileron_limit_is_enforced() {
        let (g, k, prefilter, mapping) = design();
        let mut config = SimConfig::default();
        config.aileron_limit_deg = 1.5;
        let trace = simulate_closed_loop(&g, &k, &prefilter, &mapping, &config).unwrap();
        let peak = trace.peak_aileron_deg();
        assert!(peak <= 1.5 + 1e-9, "aileron exceeded the limit: {peak}");
        assert!(peak > 1.49, "limit never became active: {peak}");
    }

    #[test]
    fn non_stabilizing_controller_is_rejected() {
        let g = golden_plant();
        let zero_k = StateSpaceModel::static_gain(Mat::zeros(2, 4));
        let prefilter = StateSpaceModel::static_gain(Mat::identity(2, 2));
        let err =
            simulate_closed_loop(&g, &zero_k, &prefilter, &map_747(), &SimConfig::default())
                .unwrap_err();
        assert!(matches!(err, Error::UnstableSystem(_)));
    }

    #[test]
    fn runaway_states_trip_the_guard() {
        // Strongly unstable plant with no stabilizing feedback: the state
        // norm crosses the guard within the run.
        let a = Mat::identity(4, 4) * 5.0;
        let b = Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let plant =
            StateSpaceModel::new(a, b, Mat::identity(4, 4), Mat::zeros(4, 2)).unwrap();
        let zero_k = StateSpaceModel::static_gain(Mat::zeros(2, 4));
        let prefilter =
            StateSpaceModel::static_gain(Mat::identity(2, 2) * 1.0_f64.to_radians());
        let err = run_closed_loop(
            &plant,
            &zero_k,
            &prefilter,
            &map_747(),
            &SimConfig::default(),
            None,
        )
        .unwrap_err();
        match err {
            Error::SimulationDiverged { norm, guard, .. } => {
                assert!(norm > guard || !norm.is_finite());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn perturbed_run_differs_from_nominal() {
        let (g, k, prefilter, mapping) = design();
        let config = SimConfig::default();
        let nominal =
            run_closed_loop(&g, &k, &prefilter, &mapping, &config, None).unwrap();
        let delta = Mat::from_row_slice(
            4,
            2,
            &[0.02, 0.0, 0.0, 0.01, -0.015, 0.0, 0.0, 0.02],
        );
        let perturbed =
            run_closed_loop(&g, &k, &prefilter, &mapping, &config, Some(&delta)).unwrap();
        assert!(perturbed.settled);
        let diff: f64 = nominal
            .phi_deg
            .iter()
            .zip(&perturbed.phi_deg)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff > 1e-6, "perturbation left the trajectory unchanged");
    }
}
