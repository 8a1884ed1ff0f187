//! The differential-thrust control mapping: converts rudder-pedal commands
//! to outboard-engine thrust differences, applies the engine envelope
//! (saturation, lag, delay, rate limit), and converts delivered thrust back
//! to the rudder-equivalent radians the plant model expects.

use crate::engine::{step_lag, EngineParams};
use crate::error::{Error, Result};
use crate::airframe::{FlightCondition, GeometryConfig};

/// Parameters of the rudder-to-thrust mapping and its envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingParams {
    /// Conversion factor, lbf of differential thrust per radian of
    /// rudder-equivalent command (positive by convention).
    pub k_map: f64,
    /// Differential-thrust saturation, lbf.
    pub saturation: f64,
    /// Delivered-thrust slope limit, lbf/s.
    pub rate_limit: f64,
    /// Engine dynamics applied to the thrust command.
    pub engine: EngineParams,
}

impl MappingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_map > 0.0) || !self.k_map.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "conversion factor must be positive, got {}",
                self.k_map
            )));
        }
        if !(self.saturation > 0.0) || !(self.rate_limit > 0.0) {
            return Err(Error::InvalidParameter(
                "saturation and rate limit must be positive".into(),
            ));
        }
        self.engine.validate()
    }
}

/// Conversion factor from rudder-equivalent radians to differential thrust.
///
/// Equates the yawing moment of a rudder deflection, `qbar*S*b*C_N_dr`, to
/// the moment `y_e * dT` of the outboard engine pair; the rudder
/// coefficient's sign is folded away so the factor is positive.
pub fn conversion_factor(
    cond: &FlightCondition,
    geom: &GeometryConfig,
    cn_dr: f64,
) -> Result<f64> {
    cond.validate()?;
    geom.validate()?;
    if !cn_dr.is_finite() {
        return Err(Error::NonFinite("rudder coefficient must be finite".into()));
    }
    Ok((cond.qbar() * geom.s * geom.b * cn_dr / geom.y_e).abs())
}

/// Maps a rudder command (rad) to differential thrust (lbf).
pub fn rudder_to_thrust(delta_r: f64, k_map: f64) -> f64 {
    k_map * delta_r
}

/// Maps differential thrust (lbf) back to rudder-equivalent radians.
pub fn thrust_to_equivalent_radians(delta_t: f64, k_map: f64) -> Result<f64> {
    if !(k_map > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "conversion factor must be positive, got {k_map}"
        )));
    }
    Ok(delta_t / k_map)
}

/// Delivered differential thrust for a commanded series.
///
/// Each command sample is clipped to the saturation, passed through the
/// delayed engine lag, and the resulting output is slope-limited at
/// `rate_limit`.  The series is zero-based (differential thrust is measured
/// about the symmetric trim condition), and the engine starts at rest.
pub fn available_thrust(commanded: &[f64], p: &MappingParams, dt: f64) -> Result<Vec<f64>> {
    p.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if commanded.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("commanded series contains NaN or infinity".into()));
    }
    let delay_samples = (p.engine.t_d / dt).round() as usize;
    let mut buffer = std::collections::VecDeque::from(vec![0.0; delay_samples]);
    let (mut s0, mut s1) = (0.0_f64, 0.0_f64);
    let mut rl = 0.0_f64;
    let max_step = p.rate_limit * dt;
    let mut delivered = Vec::with_capacity(commanded.len());
    for (k, &raw) in commanded.iter().enumerate() {
        if k == 0 {
            rl = s0;
        } else {
            rl += (s0 - rl).clamp(-max_step, max_step);
        }
        delivered.push(rl);
        let cmd = raw.clamp(-p.saturation, p.saturation);
        let u = if delay_samples == 0 {
            cmd
        } else {
            let head = buffer.pop_front().expect("buffer holds delay_samples entries");
            buffer.push_back(cmd);
            head
        };
        step_lag(&mut s0, &mut s1, u, &p.engine, dt);
    }
    Ok(delivered)
}

/// Allocates a differential-thrust demand symmetrically across the outboard
/// engines: `T1 = trim + dT/2`, `T4 = trim - dT/2`, inboard engines held at
/// trim, so total thrust is preserved and the collective channel stays
/// inert.
pub fn split_engines(
    delta_t: f64,
    trim: f64,
    t_max: f64,
) -> Result<(f64, f64, f64, f64)> {
    let t1 = trim + 0.5 * delta_t;
    let t4 = trim - 0.5 * delta_t;
    for (name, t) in [("T1", t1), ("T4", t4)] {
        if !(0.0..=t_max).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "engine {name} demand {t:.1} lbf outside the envelope [0, {t_max}]"
            )));
        }
    }
    Ok((t1, trim, trim, t4))
}
