//! H-infinity norm of a stable system by Hamiltonian bisection.
//!
//! A candidate level `gamma` exceeds the norm exactly when the associated
//! Hamiltonian matrix has no eigenvalue on the imaginary axis, which turns
//! the norm computation into a bisection over that yes/no test.  Frequency
//! sampling provides the initial lower bound; the upper bound starts a
//! decade higher and doubles until the test passes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::StateSpaceModel;

use super::{complexify, eigenvalues, freq_response, sigma_complex};

type Mat = DMatrix<f64>;

/// Relative width at which the bisection bracket is accepted.
const BISECTION_TOL: f64 = 1e-6;
/// Threshold (relative to the spectral scale) for calling an eigenvalue
/// purely imaginary.
const IMAG_AXIS_TOL: f64 = 1e-10;
/// Upper-bound doublings allowed before giving up.
const MAX_DOUBLINGS: usize = 60;

/// Largest singular value of the real matrix `m`.
fn sigma_max_real(m: &Mat) -> Result<f64> {
    Ok(sigma_complex(&complexify(m))?.first().copied().unwrap_or(0.0))
}

/// True when the level-`gamma` Hamiltonian has an imaginary-axis eigenvalue,
/// i.e. when `gamma` does not exceed the system norm.
fn gamma_too_small(sys: &StateSpaceModel, gamma: f64) -> Result<bool> {
    let n = sys.order();
    let m = sys.num_inputs();
    let r = Mat::identity(m, m) * (gamma * gamma) - sys.d.transpose() * &sys.d;
    let lu = r.lu();
    let rinv_dt_c = match lu.solve(&(sys.d.transpose() * &sys.c)) {
        Some(x) => x,
        // gamma below the feedthrough gain: certainly too small.
        None => return Ok(true),
    };
    let rinv_bt = match lu.solve(&sys.b.transpose()) {
        Some(x) => x,
        None => return Ok(true),
    };
    let m11 = &sys.a + &sys.b * &rinv_dt_c;
    let m12 = &sys.b * rinv_bt;
    let m21 = -sys.c.transpose() * (&sys.c + &sys.d * &rinv_dt_c);
    let mut ham = Mat::zeros(2 * n, 2 * n);
    ham.view_mut((0, 0), (n, n)).copy_from(&m11);
    ham.view_mut((0, n), (n, n)).copy_from(&m12);
    ham.view_mut((n, 0), (n, n)).copy_from(&m21);
    ham.view_mut((n, n), (n, n)).copy_from(&(-m11.transpose()));
    let evs = eigenvalues(&ham)?;
    let scale = evs.iter().map(|e| e.norm()).fold(0.0_f64, f64::max).max(1.0);
    Ok(evs.iter().any(|e| e.re.abs() <= IMAG_AXIS_TOL * scale))
}

/// Peak gain `sup_w sigma_max(G(jw))` of a stable system.
///
/// Static systems reduce to the largest singular value of `D`.  Dynamic
/// systems must be strictly stable; the result carries the relative
/// accuracy of the bisection tolerance (1e-6).
pub fn hinf_norm(sys: &StateSpaceModel) -> Result<f64> {
    if sys.order() == 0 {
        return sigma_max_real(&sys.d);
    }
    let poles = eigenvalues(&sys.a)?;
    let abscissa = poles.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::UnstableSystem(format!(
            "peak gain is unbounded: spectral abscissa {abscissa:.3e} >= 0"
        )));
    }

    // Lower bound from frequency samples keyed to the pole magnitudes.
    let mut samples = vec![0.0];
    for p in &poles {
        let w = p.norm();
        if w > 0.0 {
            samples.extend([0.3 * w, w, 3.0 * w]);
        }
    }
    let mut lower = sigma_max_real(&sys.d)?;
    for &w in &samples {
        let g = freq_response(sys, w)?;
        let s = sigma_complex(&g)?.first().copied().unwrap_or(0.0);
        lower = lower.max(s);
    }
    lower = lower.max(1e-12);

    let mut upper = 10.0 * lower;
    let mut doublings = 0;
    while gamma_too_small(sys, upper)? {
        upper *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::ConvergenceFailure(
                "upper bound for peak gain did not close after 60 doublings".into(),
            ));
        }
    }

    while upper - lower > BISECTION_TOL * lower {
        let mid = 0.5 * (lower + upper);
        if gamma_too_small(sys, mid)? {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    Ok(0.5 * (lower + upper))
}

/// Convenience: peak gain of a pure gain matrix (largest singular value),
/// exposed for callers that already hold a complex response sample.
pub fn sigma_max(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(sigma_complex(m)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::SisoTransfer;
    use approx::assert_relative_eq;

    #[test]
    fn static_gain_norm_is_sigma_max() {
        let sys = StateSpaceModel::static_gain(Mat::from_row_slice(
            2,
            2,
            &[3.0, 0.0, 0.0, 4.0],
        ));
        assert_relative_eq!(hinf_norm(&sys).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn first_order_lag_peaks_at_dc() {
        let sys = SisoTransfer::new(vec![1.0], vec![1.0, 1.0])
            .unwrap()
            .to_state_space()
            .unwrap();
        assert_relative_eq!(hinf_norm(&sys).unwrap(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn resonant_second_order_peak() {
        // wn^2/(s^2 + 2 z wn s + wn^2): analytic peak 1/(2 z sqrt(1-z^2)).
        let (wn, z) = (2.0, 0.1);
        let sys = SisoTransfer::new(
            vec![wn * wn],
            vec![1.0, 2.0 * z * wn, wn * wn],
        )
        .unwrap()
        .to_state_space()
        .unwrap();
        let expected = 1.0 / (2.0 * z * (1.0 - z * z).sqrt());
        assert_relative_eq!(hinf_norm(&sys).unwrap(), expected, max_relative = 1e-5);
    }

    #[test]
    fn all_pass_has_unit_norm() {
        // (s-1)/(s+1) has magnitude one at every frequency.
        let sys = SisoTransfer::new(vec![1.0, -1.0], vec![1.0, 1.0])
            .unwrap()
            .to_state_space()
            .unwrap();
        assert_relative_eq!(hinf_norm(&sys).unwrap(), 1.0, max_relative = 1e-6);
    }

    #[test]
    fn unstable_system_is_rejected() {
        let sys = StateSpaceModel::new(
            Mat::from_element(1, 1, 0.5),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(hinf_norm(&sys), Err(Error::UnstableSystem(_))));
    }

    #[test]
    fn zero_system_has_zero_norm() {
        let sys = StateSpaceModel::new(
            Mat::from_element(1, 1, -1.0),
            Mat::zeros(1, 1),
            Mat::zeros(1, 1),
            Mat::zeros(1, 1),
        )
        .unwrap();
        assert!(hinf_norm(&sys).unwrap() < 1e-9);
    }
}
