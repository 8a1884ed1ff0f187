//! Robust lateral-directional control of a transport aircraft that has lost
//! its vertical stabilizer, using differential engine thrust as a substitute
//! rudder.
//!
//! The crate builds the full engineering pipeline:
//!
//! * [`lti`] — state-space and transfer-function modeling, a complex Schur
//!   kernel, algebraic Riccati solutions, H-infinity norms, frequency and
//!   step responses, interconnections, and minimal realizations;
//! * [`airframe`] — lateral-directional aerodynamic model assembly for the
//!   damaged airframe, including the stabilizer-loss derivative rules and
//!   modal analysis;
//! * [`engine`] — spool-up lag, transport delay, and thrust step responses;
//! * [`thrustmap`] — the rudder-to-differential-thrust equivalence and the
//!   thrust availability chain (saturation, delay, lag, rate limit);
//! * [`synthesis`] — loop-shaping weights, normalized-coprime-factor robust
//!   stabilization, the final controller and reference prefilter, and disk
//!   stability margins;
//! * [`sim`] — open- and closed-loop time-domain simulation under actuator
//!   constraints;
//! * [`robustness`] — seeded Monte-Carlo campaigns under full-block additive
//!   uncertainty.

pub mod airframe;
pub mod engine;
pub mod error;
pub mod lti;
pub mod robustness;
pub mod sim;
pub mod synthesis;
pub mod thrustmap;

pub use error::{Error, Result};
