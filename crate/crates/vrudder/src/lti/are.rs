//! Continuous-time algebraic Riccati equation via the Hamiltonian
//! Schur method.
//!
//! The stabilizing solution of
//!
//! ```text
//! A' X + X A - X B R^{-1} B' X + Q = 0
//! ```
//!
//! is read off the stable invariant subspace of the 2n-by-2n Hamiltonian
//! matrix.  The subspace is produced by the in-crate complex Schur
//! reduction followed by a stable-first reordering, so the whole path is
//! self-contained and deterministic.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::schur::{schur_complex, schur_order_stable_first};
use super::{complexify, eigenvalues, hcat, vcat};

type Mat = DMatrix<f64>;

/// Relative residual accepted for a Riccati solution.
const RESIDUAL_TOL: f64 = 1e-8;

/// Solves `A'X + XA - XBR^{-1}B'X + Q = 0` for the stabilizing `X`.
///
/// `Q` must be symmetric positive semidefinite and `R` symmetric positive
/// definite for the textbook guarantees to hold; the routine itself only
/// requires `R` invertible and verifies the outcome a posteriori: the
/// solution must be symmetric, satisfy the equation to a relative residual
/// of 1e-8, and render `A - BR^{-1}B'X` stable.
pub fn solve_are(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("A must be square".into()));
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "B must have {} rows, got {}",
            n,
            b.nrows()
        )));
    }
    let m = b.ncols();
    if q.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Q must match the order of A".into()));
    }
    if r.shape() != (m, m) {
        return Err(Error::DimensionMismatch("R must match the input count".into()));
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }

    let rinv_bt = r
        .clone()
        .lu()
        .solve(&b.transpose())
        .ok_or_else(|| Error::InvalidParameter("R must be invertible".into()))?;
    let brb = b * &rinv_bt; // B R^{-1} B'

    let top = hcat(a, &(-&brb));
    let bot = hcat(&(-q), &(-a.transpose()));
    let ham = vcat(&top, &bot);

    let (mut t, mut u) = schur_complex(&complexify(&ham))?;
    let stable = schur_order_stable_first(&mut t, &mut u);
    if stable != n {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian has {stable} stable eigenvalues, expected {n}"
        )));
    }

    // X = U2 U1^{-1} from the leading n columns of the Schur vectors.
    let u1 = u.view((0, 0), (n, n)).into_owned();
    let u2 = u.view((n, 0), (n, n)).into_owned();
    let xt = u1
        .transpose()
        .lu()
        .solve(&u2.transpose())
        .ok_or_else(|| {
            Error::NoStabilizingSolution(
                "stable subspace basis is singular in its first block".into(),
            )
        })?;
    let mut x = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Transpose back while discarding the (numerically tiny)
            // imaginary part of the complex solve.
            x[(i, j)] = xt[(j, i)].re;
        }
    }
    let x = 0.5 * (&x + &x.transpose());

    let residual = a.transpose() * &x + &x * a - &x * &brb * &x + q;
    let rel = residual.norm() / x.norm().max(1.0);
    if !rel.is_finite() || rel > RESIDUAL_TOL {
        return Err(Error::ConvergenceFailure(format!(
            "Riccati residual {rel:.3e} exceeds tolerance {RESIDUAL_TOL:.0e}"
        )));
    }

    let a_closed = a - &brb * &x;
    let abscissa = eigenvalues(&a_closed)?
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::NoStabilizingSolution(format!(
            "candidate solution leaves a closed-loop eigenvalue at Re = {abscissa:.3e}"
        )));
    }

    Ok(x)
}
