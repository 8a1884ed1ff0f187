//! Second-order, time-delayed engine thrust dynamics for a JT9D-7A-class
//! turbofan.
//!
//! The delivered-thrust response to a command is a critically-damped
//! second-order lag (bandwidth `1/tau`) behind a pure transport delay.  For
//! time-domain work the delay is realized exactly as a discrete input buffer;
//! for frequency-domain work [`delay_approximation`] provides a second-order
//! rational stand-in.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::{SisoTransfer, StateSpaceModel};

type Mat = DMatrix<f64>;

/// Engine model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineParams {
    /// Time constant (inverse bandwidth), s.
    pub tau: f64,
    /// Damping ratio.
    pub zeta: f64,
    /// Transport delay, s.
    pub t_d: f64,
    /// Maximum thrust, lbf.
    pub t_max: f64,
    /// Trim thrust, lbf.
    pub t_trim: f64,
    /// Delivered-thrust slope limit, lbf/s.
    pub rate_limit: f64,
    /// Differential-thrust saturation, lbf.
    pub saturation: f64,
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "engine time constant must be positive, got {}",
                self.tau
            )));
        }
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "engine damping ratio must be positive, got {}",
                self.zeta
            )));
        }
        if !(self.t_d >= 0.0) || !self.t_d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "engine delay must be non-negative, got {}",
                self.t_d
            )));
        }
        if !(self.t_trim >= 0.0 && self.t_trim < self.t_max) {
            return Err(Error::InvalidParameter(format!(
                "trim thrust must satisfy 0 <= T_trim < T_max, got trim {} max {}",
                self.t_trim, self.t_max
            )));
        }
        if !(self.rate_limit > 0.0) || !(self.saturation > 0.0) {
            return Err(Error::InvalidParameter(
                "rate limit and saturation must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Commanded and delivered thrust on a uniform grid.
#[derive(Debug, Clone)]
pub struct ThrustTrace {
    /// Sample instants, s.
    pub time: Vec<f64>,
    /// Commanded thrust, lbf.
    pub commanded: Vec<f64>,
    /// Delivered thrust, lbf, within `[0, T_max]`.
    pub delivered: Vec<f64>,
}

/// Two-state realization of the lag `1/(tau^2 s^2 + 2 zeta tau s + 1)`
/// from commanded to delivered thrust (unit DC gain).  The transport delay
/// is handled separately at simulation time.
pub fn engine_state_space(p: &EngineParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let t2 = p.tau * p.tau;
    let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0 / t2, -2.0 * p.zeta / p.tau]);
    let b = Mat::from_row_slice(2, 1, &[0.0, 1.0 / t2]);
    let c = Mat::from_row_slice(1, 2, &[1.0, 0.0]);
    StateSpaceModel::new(a, b, c, Mat::zeros(1, 1))?.with_labels(
        &["thrust", "thrust_rate"],
        &["cmd"],
        &["thrust"],
    )
}

/// Second-order all-pass rational approximation of the transport delay,
/// for use where a pure LTI model is required (e.g. margin analysis with the
/// engine in the loop).  A zero delay collapses to a unit gain.
pub fn delay_approximation(p: &EngineParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let t = p.t_d;
    if t == 0.0 {
        return Ok(StateSpaceModel::identity(1));
    }
    let q = t * t / 12.0;
    SisoTransfer::new(vec![q, -t / 2.0, 1.0], vec![q, t / 2.0, 1.0])?.to_state_space()
}

/// Fixed-step response of the delayed engine to a constant thrust command.
///
/// The state starts at the trim equilibrium and the delay is an input buffer
/// of `round(t_d/dt)` samples, so delivered thrust holds exactly at trim
/// until the delay expires.  Delivered values are clipped to `[0, T_max]`.
pub fn thrust_step(
    p: &EngineParams,
    command: f64,
    duration: f64,
    dt: f64,
) -> Result<ThrustTrace> {
    p.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(duration >= dt) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be at least dt, got {duration}"
        )));
    }
    if !(0.0..=p.t_max).contains(&command) {
        return Err(Error::InvalidParameter(format!(
            "command {} outside the engine envelope [0, {}]",
            command, p.t_max
        )));
    }
    let steps = (duration / dt).round() as usize;
    let delay_samples = (p.t_d / dt).round() as usize;
    let cmd_rel = command - p.t_trim;
    let mut buffer = std::collections::VecDeque::from(vec![0.0; delay_samples]);
    let (mut s0, mut s1) = (0.0_f64, 0.0_f64);
    let mut time = Vec::with_capacity(steps + 1);
    let mut commanded = Vec::with_capacity(steps + 1);
    let mut delivered = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        time.push(k as f64 * dt);
        commanded.push(command);
        delivered.push((p.t_trim + s0).clamp(0.0, p.t_max));
        if k == steps {
            break;
        }
        let u = if delay_samples == 0 {
            cmd_rel
        } else {
            let head = buffer.pop_front().expect("buffer holds delay_samples entries");
            buffer.push_back(cmd_rel);
            head
        };
        step_lag(&mut s0, &mut s1, u, p, dt);
    }
    Ok(ThrustTrace { time, commanded, delivered })
}

/// Advances the two-state lag one RK4 step under a held input.
pub(crate) fn step_lag(s0: &mut f64, s1: &mut f64, u: f64, p: &EngineParams, dt: f64) {
    let t2 = p.tau * p.tau;
    let f = |x0: f64, x1: f64| (x1, (u - x0 - 2.0 * p.zeta * p.tau * x1) / t2);
    let (k1a, k1b) = f(*s0, *s1);
    let (k2a, k2b) = f(*s0 + 0.5 * dt * k1a, *s1 + 0.5 * dt * k1b);
    let (k3a, k3b) = f(*s0 + 0.5 * dt * k2a, *s1 + 0.5 * dt * k2b);
    let (k4a, k4b) = f(*s0 + dt * k3a, *s1 + dt * k3b);
    *s0 += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    *s1 += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
}
