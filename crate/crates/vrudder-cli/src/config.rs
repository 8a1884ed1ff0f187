//! Configuration: a single TOML document mirroring the published data
//! tables plus limits, weights, and run settings.  The bundled default
//! reproduces the published results without edits; every section converts
//! into the corresponding library type with validation up front.

use std::path::Path;

use serde::Deserialize;

use vrudder::airframe::{
    DerivativeSet, EntryOverride, FlightCondition, GeometryConfig, InertiaConfig,
    OverrideTarget, TrimState,
};
use vrudder::engine::EngineParams;
use vrudder::lti::{SisoTransfer, TransferMatrix};
use vrudder::robustness::UncertaintySpec;
use vrudder::sim::{PilotInput, SimConfig};
use vrudder::synthesis::LoopShapingWeights;
use vrudder::thrustmap::{conversion_factor, MappingParams};

use crate::error::{CliError, Result};

/// The bundled default configuration, byte-for-byte.
pub const DEFAULT_CONFIG: &str = include_str!("../default.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub flight: FlightSection,
    pub geometry: GeometrySection,
    pub inertia: InertiaSection,
    pub derivatives: DerivativesSection,
    pub trim: TrimSection,
    pub engine: EngineSection,
    pub limits: LimitsSection,
    pub plant: PlantSection,
    pub weights: WeightsSection,
    pub synthesis: SynthesisSection,
    pub sim: SimSection,
    pub openloop: OpenLoopSection,
    pub margins: MarginsSection,
    pub uncertainty: UncertaintySection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightSection {
    pub altitude_ft: f64,
    pub rho_slug_ft3: f64,
    pub airspeed_fps: f64,
    pub mach: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub wing_area_ft2: f64,
    pub wing_span_ft: f64,
    pub mean_chord_ft: f64,
    pub engine_arm_ft: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaSection {
    pub nominal: InertiaBlock,
    pub damaged: InertiaBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaBlock {
    pub weight_lbf: f64,
    pub mass_slug: f64,
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    pub ixz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativesSection {
    pub cl_beta: f64,
    pub cl_p: f64,
    pub cl_r: f64,
    pub cl_da: f64,
    pub cl_dr: f64,
    pub cn_beta: f64,
    pub cn_p: f64,
    pub cn_r: f64,
    pub cn_da: f64,
    pub cn_dr: f64,
    pub cy_beta: f64,
    pub cy_p: f64,
    pub cy_r: f64,
    pub cy_da: f64,
    pub cy_dr: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimSection {
    pub theta_rad: f64,
    pub gamma_rad: f64,
    pub engine_thrust_lbf: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub tau_s: f64,
    pub zeta: f64,
    pub delay_s: f64,
    pub max_thrust_lbf: f64,
    pub trim_thrust_lbf: f64,
    pub rate_limit_lbf_s: f64,
    pub saturation_lbf: f64,
    pub step_duration_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub aileron_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub use_published: bool,
    pub a_overrides: Vec<(usize, usize, f64)>,
    pub b_overrides: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub w1_num: Vec<Vec<f64>>,
    pub w1_den: Vec<Vec<f64>>,
    pub w2_num: Vec<Vec<f64>>,
    pub w2_den: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    pub gamma_backoff: f64,
    pub prefilter_gearing_deg: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt_s: f64,
    pub duration_s: f64,
    pub pilot_aileron_deg: f64,
    pub pilot_rudder_deg: f64,
    pub pilot_start_s: f64,
    pub engine_lag: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenLoopSection {
    pub duration_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsSection {
    pub include_engine_lag: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    pub level: f64,
    pub seed: u64,
    pub runs: usize,
    pub grid_log10_start: f64,
    pub grid_log10_end: f64,
    pub grid_points: usize,
}

/// Global flag overrides applied on top of the parsed configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub uncertainty: Option<f64>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

impl Config {
    /// Parse a configuration document.
    pub fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("configuration: {e}")))
    }

    /// Read and parse a configuration file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_str(&text)
    }

    /// The bundled default configuration.
    pub fn bundled() -> Self {
        Self::from_str(DEFAULT_CONFIG).expect("bundled default config is valid")
    }

    /// Apply command-line overrides; `--duration` moves every horizon
    /// (closed-loop, open-loop, engine step) so each subcommand honors it.
    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.uncertainty.seed = seed;
        }
        if let Some(runs) = ov.runs {
            self.uncertainty.runs = runs;
        }
        if let Some(level) = ov.uncertainty {
            self.uncertainty.level = level;
        }
        if let Some(dt) = ov.dt {
            self.sim.dt_s = dt;
        }
        if let Some(duration) = ov.duration {
            self.sim.duration_s = duration;
            self.openloop.duration_s = duration;
            self.engine.step_duration_s = duration;
        }
    }

    pub fn flight_condition(&self) -> Result<FlightCondition> {
        FlightCondition::new(
            self.flight.altitude_ft,
            self.flight.rho_slug_ft3,
            self.flight.airspeed_fps,
            self.flight.mach,
        )
        .map_err(CliError::config)
    }

    pub fn geometry(&self) -> Result<GeometryConfig> {
        let g = GeometryConfig {
            s: self.geometry.wing_area_ft2,
            b: self.geometry.wing_span_ft,
            cbar: self.geometry.mean_chord_ft,
            y_e: self.geometry.engine_arm_ft,
            tail: None,
        };
        g.validate().map_err(CliError::config)?;
        Ok(g)
    }

    fn inertia_from(block: &InertiaBlock) -> Result<InertiaConfig> {
        let i = InertiaConfig {
            weight: block.weight_lbf,
            mass: block.mass_slug,
            ixx: block.ixx,
            iyy: block.iyy,
            izz: block.izz,
            ixz: block.ixz,
        };
        i.validate().map_err(CliError::config)?;
        Ok(i)
    }

    pub fn inertia_nominal(&self) -> Result<InertiaConfig> {
        Self::inertia_from(&self.inertia.nominal)
    }

    pub fn inertia_damaged(&self) -> Result<InertiaConfig> {
        Self::inertia_from(&self.inertia.damaged)
    }

    pub fn derivatives(&self) -> Result<DerivativeSet> {
        let d = &self.derivatives;
        let set = DerivativeSet {
            cl_beta: d.cl_beta,
            cl_p: d.cl_p,
            cl_r: d.cl_r,
            cl_da: d.cl_da,
            cl_dr: d.cl_dr,
            cn_beta: d.cn_beta,
            cn_p: d.cn_p,
            cn_r: d.cn_r,
            cn_da: d.cn_da,
            cn_dr: d.cn_dr,
            cy_beta: d.cy_beta,
            cy_p: d.cy_p,
            cy_r: d.cy_r,
            cy_da: d.cy_da,
            cy_dr: d.cy_dr,
            c_lift: 0.0,
        };
        set.validate().map_err(CliError::config)?;
        Ok(set)
    }

    pub fn trim(&self) -> Result<TrimState> {
        let t = TrimState {
            theta: self.trim.theta_rad,
            gamma: self.trim.gamma_rad,
            beta: 0.0,
            engine_trim_thrust: self.trim.engine_thrust_lbf,
        };
        t.validate().map_err(CliError::config)?;
        Ok(t)
    }

    pub fn engine_params(&self) -> Result<EngineParams> {
        let e = &self.engine;
        let p = EngineParams {
            tau: e.tau_s,
            zeta: e.zeta,
            t_d: e.delay_s,
            t_max: e.max_thrust_lbf,
            t_trim: e.trim_thrust_lbf,
            rate_limit: e.rate_limit_lbf_s,
            saturation: e.saturation_lbf,
        };
        p.validate().map_err(CliError::config)?;
        Ok(p)
    }

    /// Thrust mapping with the conversion factor derived from the tables.
    pub fn mapping(&self) -> Result<MappingParams> {
        let k_map =
            conversion_factor(&self.flight_condition()?, &self.geometry()?, self.derivatives.cn_dr)
                .map_err(CliError::config)?;
        let engine = self.engine_params()?;
        let m = MappingParams {
            k_map,
            saturation: engine.saturation,
            rate_limit: engine.rate_limit,
            engine,
        };
        m.validate().map_err(CliError::config)?;
        Ok(m)
    }

    /// Matrix-entry pins, converted from the config's 1-based indexing.
    pub fn overrides(&self) -> Result<Vec<EntryOverride>> {
        let mut out = Vec::new();
        for (target, list) in [
            (OverrideTarget::A, &self.plant.a_overrides),
            (OverrideTarget::B, &self.plant.b_overrides),
        ] {
            for &(row, col, value) in list {
                if row == 0 || col == 0 {
                    return Err(CliError::config(
                        "plant override indices are 1-based; 0 is out of range",
                    ));
                }
                out.push(EntryOverride { target, row: row - 1, col: col - 1, value });
            }
        }
        Ok(out)
    }

    pub fn loop_weights(&self) -> Result<LoopShapingWeights> {
        let build = |nums: &[Vec<f64>], dens: &[Vec<f64>], label: &str| -> Result<TransferMatrix> {
            if nums.len() != dens.len() || nums.is_empty() {
                return Err(CliError::config(format!(
                    "weight {label}: numerator and denominator channel counts must match"
                )));
            }
            let mut diag = Vec::with_capacity(nums.len());
            for (num, den) in nums.iter().zip(dens) {
                diag.push(
                    SisoTransfer::new(num.clone(), den.clone()).map_err(CliError::config)?,
                );
            }
            TransferMatrix::diagonal(diag).map_err(CliError::config)
        };
        let w1 = build(&self.weights.w1_num, &self.weights.w1_den, "W1")?;
        let w2 = build(&self.weights.w2_num, &self.weights.w2_den, "W2")?;
        if w1.num_inputs() != 2 || w2.num_inputs() != 4 {
            return Err(CliError::config(format!(
                "weights must shape a 4x2 plant: W1 is {0}x{0}, W2 is {1}x{1}",
                w1.num_inputs(),
                w2.num_inputs()
            )));
        }
        Ok(LoopShapingWeights { w1, w2 })
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let c = SimConfig {
            dt: s.dt_s,
            duration: s.duration_s,
            pilot: [
                PilotInput { magnitude_deg: s.pilot_aileron_deg, start_time_s: s.pilot_start_s },
                PilotInput { magnitude_deg: s.pilot_rudder_deg, start_time_s: s.pilot_start_s },
            ],
            aileron_limit_deg: self.limits.aileron_deg,
            aileron_rate_limit_dps: None,
            engine_lag_enabled: s.engine_lag,
            integrator: Default::default(),
        };
        c.validate().map_err(CliError::config)?;
        Ok(c)
    }

    pub fn uncertainty_spec(&self) -> Result<UncertaintySpec> {
        let u = &self.uncertainty;
        let spec = UncertaintySpec {
            level: u.level,
            seed: u.seed,
            count: u.runs,
            grid_log10_start: u.grid_log10_start,
            grid_log10_end: u.grid_log10_end,
            grid_points: u.grid_points,
            ..UncertaintySpec::default()
        };
        spec.validate().map_err(CliError::config)?;
        Ok(spec)
    }

    pub fn gamma_backoff(&self) -> Result<f64> {
        let b = self.synthesis.gamma_backoff;
        if !(b > 0.0) || !b.is_finite() {
            return Err(CliError::config(format!(
                "synthesis gamma_backoff must be positive, got {b}"
            )));
        }
        Ok(b)
    }
}
