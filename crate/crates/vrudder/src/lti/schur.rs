//! Dense complex Schur decomposition, written from scratch.
//!
//! The reduction runs in two stages: a Householder similarity transform to
//! upper Hessenberg form, followed by an implicit single-shift QR iteration
//! with Wilkinson shifts and Givens rotations.  Subdiagonal entries are
//! declared converged once they fall below `DEFLATION_TOL` relative to the
//! neighbouring diagonal magnitudes.  An exceptional (randomized-phase) shift
//! is injected every 20 stagnant sweeps to break symmetry-induced cycling.
//!
//! The module also provides eigenvalue reordering via adjacent swaps, which
//! the Riccati solver uses to bring the stable spectrum to the leading
//! diagonal of the Hamiltonian Schur form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative subdiagonal tolerance below which an entry is deflated to zero.
pub const DEFLATION_TOL: f64 = 1e-12;

/// QR sweep budget per eigenvalue before convergence failure is reported.
const MAX_ITER_PER_EIG: usize = 60;

type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex Givens rotation: returns `(c, s, r)` with real `c` such that
/// `G = [[c, s], [-conj(s), c]]` maps `[f, g]` to `[r, 0]` and is unitary.
pub(crate) fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    let af = f.norm();
    let ag = g.norm();
    if ag == 0.0 {
        return (1.0, ZERO, f);
    }
    if af == 0.0 {
        return (0.0, g.conj() / ag, Complex64::new(ag, 0.0));
    }
    let r = af.hypot(ag);
    let c = af / r;
    let fs = f / af;
    let s = fs * g.conj() / r;
    (c, s, fs * r)
}

/// Applies `G` to rows `i`, `j` of `t` in place, over columns `col_from..`.
pub(crate) fn apply_givens_left(
    t: &mut CMat,
    c: f64,
    s: Complex64,
    i: usize,
    j: usize,
    col_from: usize,
) {
    let n = t.ncols();
    for k in col_from..n {
        let t1 = t[(i, k)];
        let t2 = t[(j, k)];
        t[(i, k)] = t1 * c + s * t2;
        t[(j, k)] = -s.conj() * t1 + t2 * c;
    }
}

/// Applies `G^H` to columns `i`, `j` of `t` in place, over rows `0..row_to`.
pub(crate) fn apply_givens_right(
    t: &mut CMat,
    c: f64,
    s: Complex64,
    i: usize,
    j: usize,
    row_to: usize,
) {
    for k in 0..row_to {
        let t1 = t[(k, i)];
        let t2 = t[(k, j)];
        t[(k, i)] = t1 * c + s.conj() * t2;
        t[(k, j)] = -s * t1 + t2 * c;
    }
}

/// Householder reduction to upper Hessenberg form.
///
/// Returns `(H, Q)` with `Q` unitary and `Q^H A Q = H`.
pub(crate) fn house_hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = CMat::identity(n, n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let nx2: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum();
        let nx = nx2.sqrt();
        if nx < 1e-300 {
            continue;
        }
        let alpha = h[(k + 1, k)];
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { ONE };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * nx;
        let nv2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if nv2 < 1e-300 {
            continue;
        }
        let scale = 2.0 / nv2;
        // Left reflection: rows k+1.., all columns.
        for col in 0..n {
            let mut w = ZERO;
            for (idx, row) in (k + 1..n).enumerate() {
                w += v[idx].conj() * h[(row, col)];
            }
            w *= scale;
            for (idx, row) in (k + 1..n).enumerate() {
                let upd = v[idx] * w;
                h[(row, col)] -= upd;
            }
        }
        // Right reflection: all rows, columns k+1.. (same for the accumulated Q).
        for row in 0..n {
            let mut w = ZERO;
            for (idx, col) in (k + 1..n).enumerate() {
                w += h[(row, col)] * v[idx];
            }
            w *= scale;
            for (idx, col) in (k + 1..n).enumerate() {
                let upd = w * v[idx].conj();
                h[(row, col)] -= upd;
            }
        }
        for row in 0..n {
            let mut w = ZERO;
            for (idx, col) in (k + 1..n).enumerate() {
                w += q[(row, col)] * v[idx];
            }
            w *= scale;
            for (idx, col) in (k + 1..n).enumerate() {
                let upd = w * v[idx].conj();
                q[(row, col)] -= upd;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Complex Schur decomposition `A = Q T Q^H` with `T` upper triangular.
pub fn schur_complex(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Schur decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((a.clone(), a.clone()));
    }
    let (mut t, mut q) = house_hessenberg(a);
    let mut hi = n - 1;
    let mut total_iter = 0usize;
    let budget = MAX_ITER_PER_EIG * n;
    let mut stagnation = 0usize;
    while hi > 0 {
        // Locate the active unreduced block [lo..=hi].
        let mut lo = hi;
        while lo > 0 {
            let h = t[(lo, lo - 1)].norm();
            if h <= DEFLATION_TOL * (t[(lo - 1, lo - 1)].norm() + t[(lo, lo)].norm()) {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stagnation = 0;
            continue;
        }
        total_iter += 1;
        stagnation += 1;
        if total_iter > budget {
            return Err(Error::ConvergenceFailure(format!(
                "QR iteration exceeded {budget} sweeps on a {n}x{n} matrix"
            )));
        }
        // Wilkinson shift from the trailing 2x2 of the active block.
        let a2 = t[(hi - 1, hi - 1)];
        let b2 = t[(hi - 1, hi)];
        let c2 = t[(hi, hi - 1)];
        let d2 = t[(hi, hi)];
        let mu = if stagnation % 20 == 0 {
            // Exceptional shift with a rotating phase to escape cycling.
            d2 + (b2.norm() + c2.norm()) * Complex64::new(0.0, total_iter as f64).exp()
        } else {
            let tr2 = (a2 + d2) * 0.5;
            let half = (a2 - d2) * 0.5;
            let disc = (half * half + b2 * c2).sqrt();
            let e1 = tr2 + disc;
            let e2 = tr2 - disc;
            if (e1 - d2).norm() <= (e2 - d2).norm() {
                e1
            } else {
                e2
            }
        };
        // Implicit single-shift QR sweep via bulge chasing.
        let mut f = t[(lo, lo)] - mu;
        let mut g = t[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s, _) = givens(f, g);
            apply_givens_left(&mut t, c, s, k, k + 1, k.saturating_sub(1));
            apply_givens_right(&mut t, c, s, k, k + 1, (k + 2).min(hi) + 1);
            apply_givens_right(&mut q, c, s, k, k + 1, n);
            if k + 1 < hi {
                f = t[(k + 1, k)];
                g = t[(k + 2, k)];
            }
        }
        // Post-sweep cleanup of negligible subdiagonals in the active block.
        for k in lo..hi {
            if t[(k + 1, k)].norm() <= DEFLATION_TOL * (t[(k, k)].norm() + t[(k + 1, k + 1)].norm())
            {
                t[(k + 1, k)] = ZERO;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    Ok((t, q))
}

/// Swaps the adjacent diagonal entries `k`, `k+1` of a Schur pair in place.
pub(crate) fn schur_swap(t: &mut CMat, q: &mut CMat, k: usize) {
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let c = t[(k + 1, k + 1)];
    // The eigenvector of [[a, b], [0, c]] for eigenvalue c is [b, c - a];
    // rotate it into the leading basis direction.
    let f = b;
    let g = c - a;
    if g.norm() <= DEFLATION_TOL * (a.norm() + c.norm()) {
        return; // equal eigenvalues: the swap is semantically a no-op
    }
    let (cg, sg, _) = givens(f, g);
    let nt = t.nrows();
    apply_givens_right(t, cg, sg, k, k + 1, nt);
    apply_givens_left(t, cg, sg, k, k + 1, 0);
    let nq = q.nrows();
    apply_givens_right(q, cg, sg, k, k + 1, nq);
    t[(k + 1, k)] = ZERO;
}

/// Reorders a Schur pair so eigenvalues with negative real part lead.
///
/// Returns the number of stable eigenvalues moved to the front.
pub fn schur_order_stable_first(t: &mut CMat, q: &mut CMat) -> usize {
    let n = t.nrows();
    let mut target = 0usize;
    for _ in 0..n {
        let mut found = None;
        for i in target..n {
            if t[(i, i)].re < 0.0 {
                found = Some(i);
                break;
            }
        }
        let Some(mut j) = found else { break };
        while j > target {
            schur_swap(t, q, j - 1);
            j -= 1;
        }
        target += 1;
    }
    target
}

/// Eigenvalues of a complex square matrix via the Schur diagonal.
pub fn complex_eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let (t, _) = schur_complex(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robustness::rng::SplitMix64;

    fn random_cmat(rng: &mut SplitMix64, n: usize) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.standard_normal(), rng.standard_normal())
        })
    }

    fn max_abs(m: &CMat) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn givens_annihilates_second_entry() {
        let mut rng = SplitMix64::new(7);
        for trial in 0..200 {
            let mut f = Complex64::new(rng.standard_normal(), rng.standard_normal());
            let mut g = Complex64::new(rng.standard_normal(), rng.standard_normal());
            if trial % 10 == 0 {
                f = ZERO;
            }
            if trial % 13 == 0 {
                g = ZERO;
            }
            let (c, s, r) = givens(f, g);
            let scale = (f.norm() + g.norm()).max(1.0);
            let out0 = f * c + s * g;
            let out1 = -s.conj() * f + g * c;
            assert!(out1.norm() < 1e-12 * scale, "residual {out1} for ({f}, {g})");
            assert!((out0 - r).norm() < 1e-12 * scale);
            // Unitarity: c^2 + |s|^2 = 1.
            assert!((c * c + s.norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hessenberg_is_similarity() {
        let mut rng = SplitMix64::new(11);
        for n in [1usize, 2, 3, 5, 9] {
            let a = random_cmat(&mut rng, n);
            let (h, q) = house_hessenberg(&a);
            let resid = &q * &h * q.adjoint() - &a;
            assert!(max_abs(&resid) < 1e-12 * max_abs(&a).max(1.0));
            for i in 0..n {
                for j in 0..i.saturating_sub(1) {
                    assert_eq!(h[(i, j)], ZERO);
                }
            }
            let orth = q.adjoint() * &q - CMat::identity(n, n);
            assert!(max_abs(&orth) < 1e-13);
        }
    }

    #[test]
    fn schur_reconstructs_random_matrices() {
        let mut rng = SplitMix64::new(3);
        let mut worst = 0.0_f64;
        for trial in 0..50 {
            let n = 1 + (rng.next_u64() % 12) as usize;
            let mut a = random_cmat(&mut rng, n);
            if trial % 3 == 0 {
                // Real entries exercise the conjugate-pair path.
                a = a.map(|z| Complex64::new(z.re, 0.0));
            }
            if trial % 7 == 0 && n >= 4 {
                // Near-defective: duplicate a row.
                for j in 0..n {
                    let v = a[(1, j)];
                    a[(2, j)] = v;
                }
            }
            let (t, q) = schur_complex(&a).expect("schur");
            let resid = &q * &t * q.adjoint() - &a;
            let err1 = max_abs(&resid) / max_abs(&a).max(1.0);
            let orth = q.adjoint() * &q - CMat::identity(n, n);
            let err2 = max_abs(&orth);
            worst = worst.max(err1).max(err2);
            assert!(err1 < 1e-10, "trial {trial} n {n}: residual {err1:.2e}");
            assert!(err2 < 1e-12, "trial {trial} n {n}: orthogonality {err2:.2e}");
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(t[(i, j)], ZERO);
                }
            }
        }
        assert!(worst < 1e-10);
    }

    #[test]
    fn schur_eigenvalues_match_characteristic_roots() {
        // Companion matrix of s^2 + 3s + 2 = (s+1)(s+2).
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-2.0, 0.0),
                Complex64::new(-3.0, 0.0),
            ],
        );
        let mut evs = complex_eigenvalues(&a).unwrap();
        evs.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((evs[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((evs[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ordering_moves_stable_eigenvalues_first() {
        let mut rng = SplitMix64::new(19);
        for _ in 0..30 {
            let n = 2 + (rng.next_u64() % 10) as usize;
            let a = random_cmat(&mut rng, n);
            let (mut t, mut q) = schur_complex(&a).expect("schur");
            let ns = schur_order_stable_first(&mut t, &mut q);
            let resid = &q * &t * q.adjoint() - &a;
            assert!(max_abs(&resid) < 1e-9 * max_abs(&a).max(1.0));
            for i in 0..n {
                if i < ns {
                    assert!(t[(i, i)].re < 0.0);
                } else {
                    assert!(t[(i, i)].re >= 0.0);
                }
            }
        }
    }
}
