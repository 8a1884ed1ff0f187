//! Linear time-invariant systems: state-space and transfer-function models,
//! interconnections, and frequency/time-domain analysis.
//!
//! `StateSpaceModel` is the universal currency passed between modules.  All
//! matrices carry radians and radians/second internally; degrees appear only
//! at external interfaces.  Every operation is a pure function over immutable
//! values, so the whole module is trivially thread-safe.

pub mod are;
pub mod hinf;
pub mod schur;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use are::solve_are;
pub use hinf::{hinf_norm, sigma_max};

type Mat = DMatrix<f64>;
type CMat = DMatrix<Complex64>;

// ---------------------------------------------------------------------------
// small dense helpers shared across the crate
// ---------------------------------------------------------------------------

pub(crate) fn complexify(m: &Mat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

pub(crate) fn hcat(a: &Mat, b: &Mat) -> Mat {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub(crate) fn vcat(a: &Mat, b: &Mat) -> Mat {
    debug_assert_eq!(a.ncols(), b.ncols());
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub(crate) fn blkdiag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

fn all_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn concat_labels(a: &[String], b: &[String]) -> Vec<String> {
    a.iter().chain(b.iter()).cloned().collect()
}

// ---------------------------------------------------------------------------
// StateSpaceModel
// ---------------------------------------------------------------------------

/// Continuous-time state-space model `(A, B, C, D)` with signal labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
}

impl StateSpaceModel {
    /// Builds a model from its matrix quadruple with default labels.
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                n,
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B must have {} rows, got {}",
                n,
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "C must have {} columns, got {}",
                n,
                c.ncols()
            )));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "D must be {}x{}, got {}x{}",
                c.nrows(),
                b.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !all_finite(m) {
                return Err(Error::NonFinite(format!("matrix {name} contains NaN or infinity")));
            }
        }
        let (p, m) = d.shape();
        Ok(Self {
            state_labels: default_labels("x", n),
            input_labels: default_labels("u", m),
            output_labels: default_labels("y", p),
            a,
            b,
            c,
            d,
        })
    }

    /// Replaces the default labels; lengths must match the matrix dimensions.
    pub fn with_labels(
        mut self,
        states: &[&str],
        inputs: &[&str],
        outputs: &[&str],
    ) -> Result<Self> {
        if states.len() != self.order()
            || inputs.len() != self.num_inputs()
            || outputs.len() != self.num_outputs()
        {
            return Err(Error::DimensionMismatch(
                "label arrays must match matrix dimensions".into(),
            ));
        }
        self.state_labels = states.iter().map(|s| s.to_string()).collect();
        self.input_labels = inputs.iter().map(|s| s.to_string()).collect();
        self.output_labels = outputs.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    /// A memoryless (zero-state) system realizing the static gain `d`.
    pub fn static_gain(d: Mat) -> Self {
        let (p, m) = d.shape();
        Self {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, m),
            c: Mat::zeros(p, 0),
            d,
            state_labels: Vec::new(),
            input_labels: default_labels("u", m),
            output_labels: default_labels("y", p),
        }
    }

    /// The p-by-p identity as a static system.
    pub fn identity(p: usize) -> Self {
        Self::static_gain(Mat::identity(p, p))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Steady-state gain `D - C A^{-1} B`; fails when A is singular.
    pub fn dc_gain(&self) -> Result<Mat> {
        if self.order() == 0 {
            return Ok(self.d.clone());
        }
        let lu = self.a.clone().lu();
        let x = lu.solve(&self.b).ok_or_else(|| {
            Error::SingularSystem("system has a pole at s = 0; DC gain undefined".into())
        })?;
        Ok(&self.d - &self.c * x)
    }

    /// Largest real part over the spectrum of A (`-inf` for static systems).
    pub fn spectral_abscissa(&self) -> Result<f64> {
        if self.order() == 0 {
            return Ok(f64::NEG_INFINITY);
        }
        let evs = eigenvalues(&self.a)?;
        Ok(evs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max))
    }

    /// True when every pole lies strictly in the open left half plane.
    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.spectral_abscissa()? < 0.0)
    }
}

// ---------------------------------------------------------------------------
// eigenvalues and modal analysis
// ---------------------------------------------------------------------------

/// Eigenvalues of a square real matrix.
///
/// Computed from the complex Schur form; for real input the result is forced
/// conjugate-symmetric by averaging near-conjugate pairs.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !all_finite(m) {
        return Err(Error::NonFinite("eigenvalue input contains NaN or infinity".into()));
    }
    let mut evs = schur::complex_eigenvalues(&complexify(m))?;
    symmetrize_conjugates(&mut evs);
    Ok(evs)
}

/// Snaps near-real eigenvalues to the real axis and averages conjugate pairs.
fn symmetrize_conjugates(evs: &mut [Complex64]) {
    let scale = evs.iter().map(|e| e.norm()).fold(0.0_f64, f64::max).max(1e-300);
    for e in evs.iter_mut() {
        if e.im.abs() <= 1e-8 * scale {
            e.im = 0.0;
        }
    }
    let n = evs.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || evs[i].im <= 0.0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if used[j] || j == i || evs[j].im >= 0.0 {
                continue;
            }
            let dist = (evs[i] - evs[j].conj()).norm();
            if best.map(|(_, d)| dist < d).unwrap_or(true) {
                best = Some((j, dist));
            }
        }
        if let Some((j, dist)) = best {
            if dist <= 1e-6 * scale {
                let re = 0.5 * (evs[i].re + evs[j].re);
                let im = 0.5 * (evs[i].im - evs[j].im);
                evs[i] = Complex64::new(re, im);
                evs[j] = Complex64::new(re, -im);
                used[i] = true;
                used[j] = true;
            }
        }
    }
}

/// One dynamic mode: a real pole or a collapsed conjugate pair.
#[derive(Debug, Clone)]
pub struct ModeRecord {
    /// Classification tag ("dutch roll", "roll", "spiral", or generic).
    pub name: String,
    /// Representative pole (non-negative imaginary part).
    pub pole: Complex64,
    /// Damping ratio `-Re(pole)/|pole|`; absent for a pole at the origin.
    pub damping: Option<f64>,
    /// Natural frequency `|pole|` in rad/s.
    pub natural_frequency: f64,
    /// Period `2*pi / natural frequency` in seconds; absent at the origin.
    pub period_s: Option<f64>,
}

/// Collapses the spectrum of a model into per-mode records.
///
/// Conjugate pairs yield one oscillatory record.  For the classic four-state
/// lateral/directional pattern (one oscillatory pair plus two aperiodic
/// poles) the records receive the conventional names: "dutch roll" for the
/// pair, "roll" for the faster real pole, "spiral" for the slower one.
/// Poles within machine resolution of the origin (relative to the fastest
/// mode) are reported as the origin, with damping and period absent.
pub fn modal_analysis(sys: &StateSpaceModel) -> Result<Vec<ModeRecord>> {
    let mut evs = eigenvalues(&sys.a)?;
    let scale = evs.iter().map(|e| e.norm()).fold(0.0_f64, f64::max);
    for e in evs.iter_mut() {
        if e.norm() <= 1e-12 * scale {
            *e = Complex64::new(0.0, 0.0);
        }
    }
    let n = evs.len();
    let mut used = vec![false; n];
    let mut records: Vec<ModeRecord> = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let e = evs[i];
        if e.im == 0.0 {
            records.push(mode_record("aperiodic", e));
            used[i] = true;
            continue;
        }
        // Find the conjugate partner and keep the upper-half representative.
        let mut partner = None;
        for j in 0..n {
            if j != i && !used[j] && evs[j] == e.conj() {
                partner = Some(j);
                break;
            }
        }
        used[i] = true;
        if let Some(j) = partner {
            used[j] = true;
        }
        let rep = Complex64::new(e.re, e.im.abs());
        records.push(mode_record("oscillatory", rep));
    }
    // Deterministic order: fastest mode first.
    records.sort_by(|a, b| b.natural_frequency.partial_cmp(&a.natural_frequency).unwrap());
    let oscillatory = records.iter().filter(|r| r.pole.im > 0.0).count();
    let aperiodic = records.len() - oscillatory;
    if sys.order() == 4 && oscillatory == 1 && aperiodic == 2 {
        let mut real_named = 0;
        for r in records.iter_mut() {
            if r.pole.im > 0.0 {
                r.name = "dutch roll".into();
            } else {
                // Sorted fastest-first, so the first real pole is the roll mode.
                r.name = if real_named == 0 { "roll".into() } else { "spiral".into() };
                real_named += 1;
            }
        }
    } else {
        let mut osc_idx = 0;
        let mut ap_idx = 0;
        for r in records.iter_mut() {
            if r.pole.im > 0.0 {
                osc_idx += 1;
                r.name = format!("oscillatory {osc_idx}");
            } else {
                ap_idx += 1;
                r.name = format!("aperiodic {ap_idx}");
            }
        }
    }
    Ok(records)
}

fn mode_record(name: &str, pole: Complex64) -> ModeRecord {
    let freq = pole.norm();
    let (damping, period) = if freq > 0.0 {
        (Some(-pole.re / freq), Some(2.0 * std::f64::consts::PI / freq))
    } else {
        (None, None)
    };
    ModeRecord {
        name: name.to_string(),
        pole,
        damping,
        natural_frequency: freq,
        period_s: period,
    }
}

// ---------------------------------------------------------------------------
// frequency-domain analysis
// ---------------------------------------------------------------------------

/// Frequency response `C (jwI - A)^{-1} B + D` at a single frequency (rad/s).
pub fn freq_response(sys: &StateSpaceModel, omega: f64) -> Result<CMat> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency must be finite and non-negative, got {omega}"
        )));
    }
    let n = sys.order();
    let dc = complexify(&sys.d);
    if n == 0 {
        return Ok(dc);
    }
    let mut m = complexify(&sys.a);
    m.neg_mut();
    for i in 0..n {
        m[(i, i)] += Complex64::new(0.0, omega);
    }
    let rhs = complexify(&sys.b);
    let x = m.lu().solve(&rhs).ok_or_else(|| {
        Error::SingularSystem(format!(
            "frequency response is singular at omega = {omega} rad/s (undamped pole)"
        ))
    })?;
    Ok(complexify(&sys.c) * x + dc)
}

/// Singular values of a complex matrix, descending.
///
/// Computed as square roots of the Hermitian Gram-matrix spectrum, reusing
/// the in-crate Schur reduction.
pub(crate) fn sigma_complex(m: &CMat) -> Result<Vec<f64>> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let gram = if m.ncols() <= m.nrows() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let evs = schur::complex_eigenvalues(&gram)?;
    let mut sv: Vec<f64> = evs.iter().map(|e| e.re.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv.truncate(k);
    Ok(sv)
}

/// Per-frequency singular values of the response matrix, descending per row.
pub fn singular_values(sys: &StateSpaceModel, omega_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    if omega_grid.is_empty() {
        return Err(Error::InvalidParameter("frequency grid is empty".into()));
    }
    for w in omega_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "frequency grid must be strictly increasing".into(),
            ));
        }
    }
    if omega_grid[0] < 0.0 {
        return Err(Error::InvalidParameter("frequency grid must be non-negative".into()));
    }
    omega_grid
        .iter()
        .map(|&w| sigma_complex(&freq_response(sys, w)?))
        .collect()
}

// ---------------------------------------------------------------------------
// interconnections
// ---------------------------------------------------------------------------

/// Series interconnection: the signal flows through `first`, then `second`
/// (transfer matrix `second(s) * first(s)`).
pub fn series(first: &StateSpaceModel, second: &StateSpaceModel) -> Result<StateSpaceModel> {
    if second.num_inputs() != first.num_outputs() {
        return Err(Error::DimensionMismatch(format!(
            "series: second system expects {} inputs but first produces {} outputs",
            second.num_inputs(),
            first.num_outputs()
        )));
    }
    let a = {
        let top = hcat(&first.a, &Mat::zeros(first.order(), second.order()));
        let bot = hcat(&(&second.b * &first.c), &second.a);
        vcat(&top, &bot)
    };
    let b = vcat(&first.b, &(&second.b * &first.d));
    let c = hcat(&(&second.d * &first.c), &second.c);
    let d = &second.d * &first.d;
    let mut sys = StateSpaceModel::new(a, b, c, d)?;
    sys.state_labels = concat_labels(&first.state_labels, &second.state_labels);
    sys.input_labels = first.input_labels.clone();
    sys.output_labels = second.output_labels.clone();
    Ok(sys)
}

/// Parallel interconnection: shared input, summed outputs.
pub fn parallel(g1: &StateSpaceModel, g2: &StateSpaceModel) -> Result<StateSpaceModel> {
    if g1.num_inputs() != g2.num_inputs() || g1.num_outputs() != g2.num_outputs() {
        return Err(Error::DimensionMismatch(
            "parallel: systems must share input and output dimensions".into(),
        ));
    }
    let a = blkdiag(&g1.a, &g2.a);
    let b = vcat(&g1.b, &g2.b);
    let c = hcat(&g1.c, &g2.c);
    let d = &g1.d + &g2.d;
    let mut sys = StateSpaceModel::new(a, b, c, d)?;
    sys.state_labels = concat_labels(&g1.state_labels, &g2.state_labels);
    sys.input_labels = g1.input_labels.clone();
    sys.output_labels = g1.output_labels.clone();
    Ok(sys)
}

/// Block-diagonal (appended) interconnection: stacked inputs and outputs.
pub fn append_diagonal(g1: &StateSpaceModel, g2: &StateSpaceModel) -> Result<StateSpaceModel> {
    let a = blkdiag(&g1.a, &g2.a);
    let b = blkdiag(&g1.b, &g2.b);
    let c = blkdiag(&g1.c, &g2.c);
    let d = blkdiag(&g1.d, &g2.d);
    let mut sys = StateSpaceModel::new(a, b, c, d)?;
    sys.state_labels = concat_labels(&g1.state_labels, &g2.state_labels);
    sys.input_labels = concat_labels(&g1.input_labels, &g2.input_labels);
    sys.output_labels = concat_labels(&g1.output_labels, &g2.output_labels);
    Ok(sys)
}

/// Feedback sign convention for [`feedback`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackSign {
    /// `y = L (r - y)` — the usual stabilizing convention.
    Negative,
    /// `y = L (r + y)`.
    Positive,
}

impl FeedbackSign {
    fn value(self) -> f64 {
        match self {
            FeedbackSign::Negative => -1.0,
            FeedbackSign::Positive => 1.0,
        }
    }
}

/// Unity feedback around a square loop `L`: returns the map from the
/// reference injected at the loop input to the loop output,
/// `T = L (I - sign*L)^{-1}` … realized without inflating the state count.
pub fn feedback(l: &StateSpaceModel, sign: FeedbackSign) -> Result<StateSpaceModel> {
    let p = l.num_outputs();
    if l.num_inputs() != p {
        return Err(Error::DimensionMismatch(format!(
            "feedback needs a square loop, got {}x{}",
            p,
            l.num_inputs()
        )));
    }
    let s = sign.value();
    let e_inv = Mat::identity(p, p) - &l.d * s;
    let lu = e_inv.lu();
    if !lu.is_invertible() {
        return Err(Error::SingularSystem(
            "algebraic loop: I - sign*D is singular".into(),
        ));
    }
    let e = lu.try_inverse().ok_or_else(|| {
        Error::SingularSystem("algebraic loop: I - sign*D is singular".into())
    })?;
    let ec = &e * &l.c;
    let a = &l.a + (&l.b * &ec) * s;
    let b = &l.b * &e;
    let d = &e * &l.d;
    let mut sys = StateSpaceModel::new(a, b, ec, d)?;
    sys.state_labels = l.state_labels.clone();
    sys.input_labels = l.input_labels.clone();
    sys.output_labels = l.output_labels.clone();
    Ok(sys)
}

// ---------------------------------------------------------------------------
// minimal realization
// ---------------------------------------------------------------------------

/// Staircase projection onto the controllable subspace of `(A, B)`.
///
/// Grows an orthonormal basis block-Arnoldi style, re-orthogonalizing twice
/// per stage; directions whose residual falls below `tol` relative to the
/// scale of `[A B]` are treated as unreachable and dropped.
fn controllable_projection(a: &Mat, b: &Mat, c: &Mat, tol: f64) -> (Mat, Mat, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (a.clone(), b.clone(), c.clone());
    }
    let scale = (a.norm() + b.norm()).max(1.0);
    let thresh = tol * scale;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut w = b.clone();
    while basis.len() < n && w.ncols() > 0 {
        // Re-orthogonalize against the accumulated basis (twice for safety).
        for _ in 0..2 {
            for v in &basis {
                let proj = v.transpose() * &w;
                w -= v * proj;
            }
        }
        let svd = w.clone().svd(true, false);
        let u = svd.u.as_ref().expect("svd with u requested");
        let mut fresh: Vec<DVector<f64>> = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > thresh {
                fresh.push(u.column(i).into_owned());
            }
        }
        if fresh.is_empty() {
            break;
        }
        let mut next = Mat::zeros(n, fresh.len());
        for (j, v) in fresh.iter().enumerate() {
            next.set_column(j, v);
            basis.push(v.clone());
        }
        w = a * next;
    }
    let r = basis.len();
    let mut v = Mat::zeros(n, r);
    for (j, col) in basis.iter().enumerate() {
        v.set_column(j, col);
    }
    let ar = v.transpose() * a * &v;
    let br = v.transpose() * b;
    let cr = c * &v;
    (ar, br, cr)
}

/// Removes uncontrollable and unobservable state directions.
///
/// Two staircase passes (controllability, then observability on the
/// transposed data) with truncation tolerance `tol` relative to the system
/// scale.  Exact pole/zero cancellations introduced by interconnections are
/// eliminated; the input/output behavior is preserved.
pub fn minimal_realization(sys: &StateSpaceModel, tol: f64) -> Result<StateSpaceModel> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("truncation tolerance must be positive".into()));
    }
    let (a1, b1, c1) = controllable_projection(&sys.a, &sys.b, &sys.c, tol);
    let (a2t, c2t, b2t) =
        controllable_projection(&a1.transpose(), &c1.transpose(), &b1.transpose(), tol);
    let mut out = StateSpaceModel::new(
        a2t.transpose(),
        b2t.transpose(),
        c2t.transpose(),
        sys.d.clone(),
    )?;
    out.input_labels = sys.input_labels.clone();
    out.output_labels = sys.output_labels.clone();
    Ok(out)
}

// ---------------------------------------------------------------------------
// time-domain analysis
// ---------------------------------------------------------------------------

/// Unit-step responses on a uniform grid, one experiment per input channel.
#[derive(Debug, Clone)]
pub struct StepResponse {
    /// Sample instants, starting at zero.
    pub time: Vec<f64>,
    /// `outputs[j]` holds the response to a unit step on input `j`:
    /// one row per output, one column per sample.
    pub outputs: Vec<Mat>,
}

/// Zero-initial-state response to unit steps applied at t = 0, integrated
/// with classical fixed-step RK4.
pub fn step_response(sys: &StateSpaceModel, duration: f64, dt: f64) -> Result<StepResponse> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(duration >= dt) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be at least dt, got {duration}"
        )));
    }
    let steps = (duration / dt).round() as usize;
    let time: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let n = sys.order();
    let p = sys.num_outputs();
    let mut outputs = Vec::with_capacity(sys.num_inputs());
    for j in 0..sys.num_inputs() {
        let bj: DVector<f64> = sys.b.column(j).into_owned();
        let dj: DVector<f64> = sys.d.column(j).into_owned();
        let mut x = DVector::<f64>::zeros(n);
        let mut y = Mat::zeros(p, steps + 1);
        for k in 0..=steps {
            let out = &sys.c * &x + &dj;
            y.set_column(k, &out);
            if k == steps {
                break;
            }
            let f = |v: &DVector<f64>| &sys.a * v + &bj;
            let k1 = f(&x);
            let k2 = f(&(&x + &k1 * (0.5 * dt)));
            let k3 = f(&(&x + &k2 * (0.5 * dt)));
            let k4 = f(&(&x + &k3 * dt));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        outputs.push(y);
    }
    Ok(StepResponse { time, outputs })
}

// ---------------------------------------------------------------------------
// transfer matrices
// ---------------------------------------------------------------------------

/// Single-channel rational transfer function with coefficients in
/// descending powers of the Laplace variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoTransfer {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl SisoTransfer {
    /// Validates properness (deg num <= deg den) and a nonzero leading
    /// denominator coefficient.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if den.is_empty() || den[0] == 0.0 {
            return Err(Error::InvalidParameter(
                "denominator must have a nonzero leading coefficient".into(),
            ));
        }
        if num.len() > den.len() {
            return Err(Error::InvalidParameter(
                "improper channel: numerator degree exceeds denominator degree".into(),
            ));
        }
        if num.iter().chain(den.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("transfer coefficients must be finite".into()));
        }
        Ok(Self { num, den })
    }

    /// The identically-zero channel.
    pub fn zero() -> Self {
        Self { num: vec![0.0], den: vec![1.0] }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    /// Evaluates the channel at a complex frequency point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let horner = |coeffs: &[f64]| {
            coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
        };
        let num = horner(&self.num);
        let den = horner(&self.den);
        num / den
    }

    /// Controllable-canonical (companion-form) realization of the channel.
    pub fn to_state_space(&self) -> Result<StateSpaceModel> {
        let d0 = self.den[0];
        let den: Vec<f64> = self.den.iter().map(|v| v / d0).collect();
        let mut num: Vec<f64> = self.num.iter().map(|v| v / d0).collect();
        while num.len() < den.len() {
            num.insert(0, 0.0);
        }
        let n = den.len() - 1;
        let d = num[0];
        if n == 0 {
            return Ok(StateSpaceModel::static_gain(Mat::from_element(1, 1, d)));
        }
        let rem: Vec<f64> = (1..=n).map(|i| num[i] - d * den[i]).collect();
        let mut a = Mat::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -den[n - j];
        }
        let mut b = Mat::zeros(n, 1);
        b[(n - 1, 0)] = 1.0;
        let mut c = Mat::zeros(1, n);
        for j in 0..n {
            c[(0, j)] = rem[n - 1 - j];
        }
        StateSpaceModel::new(a, b, c, Mat::from_element(1, 1, d))
    }
}

/// Matrix of rational channels, row-major by (output, input).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    channels: Vec<SisoTransfer>,
}

impl TransferMatrix {
    /// Builds from a rectangular grid of channels.
    pub fn new(channels: Vec<Vec<SisoTransfer>>) -> Result<Self> {
        let rows = channels.len();
        if rows == 0 {
            return Err(Error::InvalidParameter("transfer matrix must be non-empty".into()));
        }
        let cols = channels[0].len();
        if cols == 0 || channels.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(
                "transfer matrix rows must share a common nonzero length".into(),
            ));
        }
        Ok(Self { rows, cols, channels: channels.into_iter().flatten().collect() })
    }

    /// Square diagonal transfer matrix with zero off-diagonal channels.
    pub fn diagonal(diag: Vec<SisoTransfer>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("diagonal transfer matrix must be non-empty".into()));
        }
        let mut channels = vec![SisoTransfer::zero(); n * n];
        for (i, ch) in diag.into_iter().enumerate() {
            channels[i * n + i] = ch;
        }
        Ok(Self { rows: n, cols: n, channels })
    }

    pub fn num_outputs(&self) -> usize {
        self.rows
    }

    pub fn num_inputs(&self) -> usize {
        self.cols
    }

    pub fn channel(&self, output: usize, input: usize) -> &SisoTransfer {
        &self.channels[output * self.cols + input]
    }

    /// Evaluates the full matrix at a complex frequency point.
    pub fn eval(&self, s: Complex64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.channel(i, j).eval(s))
    }

    /// State-space realization: controllable-canonical form per channel,
    /// aggregated block-diagonally.
    pub fn to_state_space(&self) -> Result<StateSpaceModel> {
        let mut total_states = 0usize;
        let mut blocks = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let ss = self.channel(i, j).to_state_space()?;
                total_states += ss.order();
                blocks.push((i, j, ss));
            }
        }
        let mut a = Mat::zeros(total_states, total_states);
        let mut b = Mat::zeros(total_states, self.cols);
        let mut c = Mat::zeros(self.rows, total_states);
        let mut d = Mat::zeros(self.rows, self.cols);
        let mut offset = 0usize;
        for (i, j, ss) in &blocks {
            let n = ss.order();
            a.view_mut((offset, offset), (n, n)).copy_from(&ss.a);
            b.view_mut((offset, *j), (n, 1)).copy_from(&ss.b);
            c.view_mut((*i, offset), (1, n)).copy_from(&ss.c);
            d[(*i, *j)] += ss.d[(0, 0)];
            offset += n;
        }
        StateSpaceModel::new(a, b, c, d)
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
