//! Aircraft configuration data, vertical-stabilizer damage rules, stability
//! derivative dimensionalization, and lateral/directional plant assembly.
//!
//! The pipeline is: a nominal dimensionless derivative set is transformed by
//! [`damage_derivatives`] (zeroing everything the fin provided), converted to
//! dimensional form by [`dimensionalize`], and assembled into the four-state
//! `[phi, p, beta, r]` plant by [`assemble_plant`].  [`golden_plant`] returns
//! the published reference matrices used as the authoritative model for
//! synthesis and simulation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::StateSpaceModel;

type Mat = DMatrix<f64>;

/// Standard gravitational acceleration, ft/s^2.
pub const STANDARD_GRAVITY: f64 = 32.174;

/// Steady flight condition; dynamic pressure is always derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightCondition {
    /// Pressure altitude, ft.
    pub altitude: f64,
    /// Air density, slug/ft^3.
    pub rho: f64,
    /// True airspeed, ft/s.
    pub airspeed: f64,
    /// Mach number.
    pub mach: f64,
    /// Gravitational acceleration, ft/s^2.
    pub g: f64,
}

impl FlightCondition {
    pub fn new(altitude: f64, rho: f64, airspeed: f64, mach: f64) -> Result<Self> {
        let cond = Self { altitude, rho, airspeed, mach, g: STANDARD_GRAVITY };
        cond.validate()?;
        Ok(cond)
    }

    /// Dynamic pressure `0.5 * rho * V^2`, lbf/ft^2.
    pub fn qbar(&self) -> f64 {
        0.5 * self.rho * self.airspeed * self.airspeed
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "air density must be positive, got {}",
                self.rho
            )));
        }
        if !(self.airspeed > 0.0) || !self.airspeed.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "airspeed must be positive, got {}",
                self.airspeed
            )));
        }
        if !(self.g > 0.0) {
            return Err(Error::InvalidParameter("gravity must be positive".into()));
        }
        Ok(())
    }
}

/// Vertical-tail geometry; present only while the fin is intact.
#[derive(Debug, Clone, PartialEq)]
pub struct TailGeometry {
    /// Vertical tail area, ft^2.
    pub s_v: f64,
    /// Tail moment arm, ft.
    pub l_v: f64,
    /// Tail height above the roll axis, ft.
    pub z_v: f64,
    /// Vertical tail volume ratio.
    pub v_v: f64,
    /// Tail efficiency factor.
    pub eta: f64,
    /// Tail volume efficiency factor.
    pub eta_v: f64,
    /// Sidewash gradient d(sigma)/d(beta).
    pub dsigma_dbeta: f64,
    /// Tail lift-curve slope, 1/rad.
    pub cl_alpha_v: f64,
}

/// Fixed airframe geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Wing reference area, ft^2.
    pub s: f64,
    /// Wing span, ft.
    pub b: f64,
    /// Mean aerodynamic chord, ft.
    pub cbar: f64,
    /// Outboard engine moment arm, ft.
    pub y_e: f64,
    /// Vertical tail description, absent once the fin is lost.
    pub tail: Option<TailGeometry>,
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("S", self.s), ("b", self.b), ("y_e", self.y_e)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "geometry {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Mass and inertia data.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaConfig {
    /// Weight, lbs.
    pub weight: f64,
    /// Mass, slugs.
    pub mass: f64,
    /// Roll inertia, slug*ft^2.
    pub ixx: f64,
    /// Pitch inertia, slug*ft^2.
    pub iyy: f64,
    /// Yaw inertia, slug*ft^2.
    pub izz: f64,
    /// Roll/yaw product of inertia, slug*ft^2 (sign-free).
    pub ixz: f64,
}

impl InertiaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("W", self.weight),
            ("m", self.mass),
            ("Ixx", self.ixx),
            ("Iyy", self.iyy),
            ("Izz", self.izz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "inertia {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.ixx * self.izz - self.ixz * self.ixz > 0.0) {
            return Err(Error::InvalidParameter(
                "inertia tensor is not positive definite: Ixx*Izz - Ixz^2 <= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Dimensionless lateral/directional stability and control derivatives.
///
/// `cl_*` are rolling-moment coefficients, `cn_*` yawing-moment, `cy_*`
/// side-force; `c_lift` is the trim lift coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSet {
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
    /// Trim lift coefficient.
    pub c_lift: f64,
}

impl DerivativeSet {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.cl_beta, self.cl_p, self.cl_r, self.cl_da, self.cl_dr,
            self.cn_beta, self.cn_p, self.cn_r, self.cn_da, self.cn_dr,
            self.cy_beta, self.cy_p, self.cy_r, self.cy_da, self.cy_dr,
            self.c_lift,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("derivative set contains NaN or infinity".into()));
        }
        if self.c_lift < 0.0 {
            return Err(Error::InvalidParameter(
                "trim lift coefficient must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Trim reference for the linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimState {
    /// Trim pitch attitude, rad.
    pub theta: f64,
    /// Trim flight path angle, rad.
    pub gamma: f64,
    /// Trim sideslip, rad.
    pub beta: f64,
    /// Per-engine trim thrust, lbf.
    pub engine_trim_thrust: f64,
}

impl TrimState {
    /// Steady level cruise: zero attitude/path/sideslip angles.
    pub fn steady_level(engine_trim_thrust: f64) -> Self {
        Self { theta: 0.0, gamma: 0.0, beta: 0.0, engine_trim_thrust }
    }

    pub fn validate(&self) -> Result<()> {
        use std::f64::consts::FRAC_PI_2;
        for (name, v) in [("theta", self.theta), ("gamma", self.gamma), ("beta", self.beta)] {
            if !(v.abs() < FRAC_PI_2) {
                return Err(Error::InvalidParameter(format!(
                    "trim angle {name} must satisfy |{name}| < pi/2, got {v}"
                )));
            }
        }
        if !(self.engine_trim_thrust >= 0.0) {
            return Err(Error::InvalidParameter("trim thrust must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dimensional stability and control derivatives (1/s, 1/s^2 or ft/s^2
/// scales as appropriate).
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionalDerivatives {
    pub l_beta: f64,
    pub l_p: f64,
    pub l_r: f64,
    pub l_da: f64,
    pub n_beta: f64,
    pub n_p: f64,
    pub n_r: f64,
    pub n_da: f64,
    /// Yaw acceleration per rudder-equivalent radian of differential thrust.
    pub n_dt: f64,
    pub y_beta: f64,
    pub y_p: f64,
    pub y_r: f64,
    pub y_da: f64,
}

/// Which plant matrix an [`EntryOverride`] pins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverrideTarget {
    A,
    B,
}

/// Pins a single assembled matrix entry to a prescribed value (used to match
/// the published plant where its entries deviate from the derivation).
#[derive(Debug, Clone, PartialEq)]
pub struct EntryOverride {
    pub target: OverrideTarget,
    /// Zero-based row index.
    pub row: usize,
    /// Zero-based column index.
    pub col: usize,
    pub value: f64,
}

/// Applies the fin-loss rules to a nominal derivative set.
///
/// The side-force and weathercock terms supplied by the vertical tail vanish
/// (`C_Y_beta`, `C_Y_r`, `C_N_r`, `C_N_beta` all zero) and the roll-due-to-yaw
/// derivative collapses to its wing contribution `C_L/4`, with the trim lift
/// coefficient recomputed from the damaged weight.  Rudder coefficients are
/// retained: they no longer act on the airframe but still calibrate the
/// differential-thrust conversion factor.
pub fn damage_derivatives(
    nominal: &DerivativeSet,
    cond: &FlightCondition,
    geom: &GeometryConfig,
    inertia_damaged: &InertiaConfig,
) -> Result<DerivativeSet> {
    nominal.validate()?;
    cond.validate()?;
    geom.validate()?;
    inertia_damaged.validate()?;
    let qs = cond.qbar() * geom.s;
    if qs <= 0.0 {
        return Err(Error::InvalidParameter(
            "dynamic pressure times wing area must be positive".into(),
        ));
    }
    let c_lift = inertia_damaged.weight / qs;
    let mut out = nominal.clone();
    out.cy_beta = 0.0;
    out.cy_r = 0.0;
    out.cn_r = 0.0;
    out.cn_beta = 0.0;
    out.c_lift = c_lift;
    out.cl_r = c_lift / 4.0;
    Ok(out)
}

/// Converts dimensionless derivatives to dimensional ones.
///
/// Moment derivatives scale by `qbar*S*b/I` (rate derivatives carry an extra
/// `b/(2*V)`); side-force derivatives scale by `qbar*S/m`.  The
/// differential-thrust derivative `n_dt` takes the yaw-effectiveness
/// magnitude of the lost rudder, `qbar*S*b*|C_N_dr|/Izz`, so the plant's
/// second input is measured in rudder-equivalent radians with positive
/// command producing positive yaw moment.
pub fn dimensionalize(
    derivs: &DerivativeSet,
    cond: &FlightCondition,
    geom: &GeometryConfig,
    inertia: &InertiaConfig,
) -> Result<DimensionalDerivatives> {
    derivs.validate()?;
    cond.validate()?;
    geom.validate()?;
    inertia.validate()?;
    let qsb = cond.qbar() * geom.s * geom.b;
    let v = cond.airspeed;
    let rate = geom.b / (2.0 * v);
    Ok(DimensionalDerivatives {
        l_beta: qsb * derivs.cl_beta / inertia.ixx,
        l_p: qsb * rate * derivs.cl_p / inertia.ixx,
        l_r: qsb * rate * derivs.cl_r / inertia.ixx,
        l_da: qsb * derivs.cl_da / inertia.ixx,
        n_beta: qsb * derivs.cn_beta / inertia.izz,
        n_p: qsb * rate * derivs.cn_p / inertia.izz,
        n_r: qsb * rate * derivs.cn_r / inertia.izz,
        n_da: qsb * derivs.cn_da / inertia.izz,
        n_dt: qsb * derivs.cn_dr.abs() / inertia.izz,
        y_beta: cond.qbar() * geom.s * derivs.cy_beta / inertia.mass,
        y_p: cond.qbar() * geom.s * rate * derivs.cy_p / inertia.mass,
        y_r: cond.qbar() * geom.s * rate * derivs.cy_r / inertia.mass,
        y_da: cond.qbar() * geom.s * derivs.cy_da / inertia.mass,
    })
}

/// Assembles the four-state lateral/directional plant.
///
/// States `[phi, p, beta, r]`, inputs `[da, dT]` (aileron rad,
/// differential thrust in rudder-equivalent rad), outputs all four states
/// (`C = I`, `D = 0`).  The differential-thrust column inherits the
/// roll/yaw inertia coupling `Ixz/Ixx`.  `overrides` pin individual entries
/// afterwards; out-of-range indices are rejected.
pub fn assemble_plant(
    dim: &DimensionalDerivatives,
    cond: &FlightCondition,
    trim: &TrimState,
    inertia: &InertiaConfig,
    geom: &GeometryConfig,
    overrides: &[EntryOverride],
) -> Result<StateSpaceModel> {
    cond.validate()?;
    trim.validate()?;
    inertia.validate()?;
    geom.validate()?;
    let v = cond.airspeed;
    let g = cond.g;
    let mut a = Mat::zeros(4, 4);
    a[(0, 1)] = 1.0;
    a[(0, 3)] = trim.theta;
    a[(1, 1)] = dim.l_p;
    a[(1, 2)] = dim.l_beta;
    a[(1, 3)] = dim.l_r;
    a[(2, 0)] = g / v;
    a[(2, 1)] = dim.y_p / v;
    a[(2, 2)] = (dim.y_beta + g * trim.gamma) / v;
    a[(2, 3)] = dim.y_r / v - 1.0;
    a[(3, 1)] = dim.n_p;
    a[(3, 2)] = dim.n_beta;
    a[(3, 3)] = dim.n_r;

    let mut b = Mat::zeros(4, 2);
    b[(1, 0)] = dim.l_da;
    b[(2, 0)] = dim.y_da / v;
    b[(3, 0)] = dim.n_da;
    b[(1, 1)] = dim.n_dt * inertia.ixz / inertia.ixx;
    b[(3, 1)] = dim.n_dt;

    for ov in overrides {
        let m = match ov.target {
            OverrideTarget::A => &mut a,
            OverrideTarget::B => &mut b,
        };
        if ov.row >= m.nrows() || ov.col >= m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "override index ({}, {}) out of range for a {}x{} matrix",
                ov.row,
                ov.col,
                m.nrows(),
                m.ncols()
            )));
        }
        m[(ov.row, ov.col)] = ov.value;
    }

    StateSpaceModel::new(a, b, Mat::identity(4, 4), Mat::zeros(4, 2))?
        .with_labels(&["phi", "p", "beta", "r"], &["da", "dT"], &["phi", "p", "beta", "r"])
}

/// The default override set pinning the assembled plant to the published
/// matrices where the derivation deviates beyond rounding: the
/// roll-due-to-yaw entry A(2,4) and both differential-thrust effectiveness
/// entries of B.
pub fn default_overrides() -> Vec<EntryOverride> {
    vec![
        EntryOverride { target: OverrideTarget::A, row: 1, col: 3, value: 0.1008 },
        EntryOverride { target: OverrideTarget::B, row: 1, col: 1, value: 0.0142 },
        EntryOverride { target: OverrideTarget::B, row: 3, col: 1, value: 0.6784 },
    ]
}

/// The published damaged-aircraft state-space matrices, verbatim.
///
/// This is the authoritative plant for controller synthesis, simulation,
/// and regression testing.
pub fn golden_plant() -> StateSpaceModel {
    let a = Mat::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            0.0, -0.8566, -2.7681, 0.1008, //
            0.0478, 0.0, 0.0, -1.0, //
            0.0, -0.0248, 0.0, 0.0,
        ],
    );
    let b = Mat::from_row_slice(
        4,
        2,
        &[
            0.0, 0.0, //
            0.2249, 0.0142, //
            0.0, 0.0, //
            0.0118, 0.6784,
        ],
    );
    StateSpaceModel::new(a, b, Mat::identity(4, 4), Mat::zeros(4, 2))
        .expect("literal matrices are well-formed")
        .with_labels(&["phi", "p", "beta", "r"], &["da", "dT"], &["phi", "p", "beta", "r"])
        .expect("label counts match")
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn cond_747() -> FlightCondition {
        FlightCondition::new(20_000.0, 0.001268, 673.0, 0.65).unwrap()
    }

    pub fn geom_747() -> GeometryConfig {
        GeometryConfig { s: 5500.0, b: 196.0, cbar: 27.3, y_e: 69.83, tail: None }
    }

    pub fn inertia_nominal() -> InertiaConfig {
        InertiaConfig {
            weight: 6.3663e5,
            mass: 19_786.46,
            ixx: 18.2e6,
            iyy: 33.1e6,
            izz: 49.7e6,
            ixz: 0.97e6,
        }
    }

    pub fn inertia_damaged() -> InertiaConfig {
        InertiaConfig {
            weight: 6.2954e5,
            mass: 19_566.10,
            ixx: 17.893e6,
            iyy: 30.925e6,
            izz: 47.352e6,
            ixz: 0.3736e6,
        }
    }

    pub fn nominal_derivatives() -> DerivativeSet {
        DerivativeSet {
            cl_beta: -0.160,
            cl_p: -0.340,
            cl_r: 0.130,
            cl_da: 0.013,
            cl_dr: 0.008,
            cn_beta: 0.160,
            cn_p: -0.026,
            cn_r: -0.28,
            cn_da: 0.0018,
            cn_dr: -0.100,
            cy_beta: -0.90,
            cy_p: 0.0,
            cy_r: 0.0,
            cy_da: 0.0,
            cy_dr: 0.120,
            c_lift: 0.0,
        }
    }

    /// Damaged plant assembled from the tables with the default overrides.
    pub fn assembled_damaged_plant() -> StateSpaceModel {
        let cond = cond_747();
        let geom = geom_747();
        let inertia = inertia_damaged();
        let damaged =
            damage_derivatives(&nominal_derivatives(), &cond, &geom, &inertia).unwrap();
        let dim = dimensionalize(&damaged, &cond, &geom, &inertia).unwrap();
        assemble_plant(
            &dim,
            &cond,
            &TrimState::steady_level(3221.0),
            &inertia,
            &geom,
            &default_overrides(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::lti::eigenvalues;
    use approx::assert_relative_eq;

    #[test]
    fn dynamic_pressure_is_derived() {
        let cond = cond_747();
        assert_relative_eq!(cond.qbar(), 0.5 * 0.001268 * 673.0 * 673.0);
        assert_relative_eq!(cond.qbar(), 287.157, epsilon = 1e-3);
    }

    #[test]
    fn condition_validation() {
        assert!(FlightCondition::new(0.0, -1.0, 673.0, 0.65).is_err());
        assert!(FlightCondition::new(0.0, 0.001268, 0.0, 0.65).is_err());
    }

    #[test]
    fn inertia_validation_rejects_indefinite_tensor() {
        let mut bad = inertia_damaged();
        bad.ixz = 1e9;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn damage_zeroes_tail_terms() {
        let damaged = damage_derivatives(
            &nominal_derivatives(),
            &cond_747(),
            &geom_747(),
            &inertia_damaged(),
        )
        .unwrap();
        assert_eq!(damaged.cn_r, 0.0);
        assert_eq!(damaged.cy_beta, 0.0);
        assert_eq!(damaged.cy_r, 0.0);
        assert_eq!(damaged.cn_beta, 0.0);
        // Wing-only terms survive untouched.
        assert_eq!(damaged.cl_beta, -0.160);
        assert_eq!(damaged.cn_dr, -0.100);
        // Trim lift from the damaged weight: 629540/(287.157*5500).
        assert_relative_eq!(damaged.c_lift, 0.3987, epsilon = 1e-3);
        assert_relative_eq!(damaged.cl_r, 0.0997, epsilon = 1e-3);
    }

    #[test]
    fn damage_is_idempotent() {
        let once = damage_derivatives(
            &nominal_derivatives(),
            &cond_747(),
            &geom_747(),
            &inertia_damaged(),
        )
        .unwrap();
        let twice =
            damage_derivatives(&once, &cond_747(), &geom_747(), &inertia_damaged()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn dimensional_derivatives_match_published_entries() {
        let damaged = damage_derivatives(
            &nominal_derivatives(),
            &cond_747(),
            &geom_747(),
            &inertia_damaged(),
        )
        .unwrap();
        let dim =
            dimensionalize(&damaged, &cond_747(), &geom_747(), &inertia_damaged()).unwrap();
        assert_relative_eq!(dim.l_p, -0.8566, max_relative = 0.01);
        assert_relative_eq!(dim.l_beta, -2.7681, max_relative = 0.01);
        assert_relative_eq!(dim.n_p, -0.0248, max_relative = 0.01);
    }

    #[test]
    fn assembled_plant_matches_published_within_one_percent() {
        let sys = assembled_damaged_plant();
        let golden = golden_plant();
        // The four derivation-sensitive A entries.
        for (i, j) in [(1, 1), (1, 2), (2, 0), (3, 1)] {
            assert_relative_eq!(sys.a[(i, j)], golden.a[(i, j)], max_relative = 0.01);
        }
        assert_relative_eq!(sys.b[(1, 0)], 0.2249, max_relative = 0.01);
        assert_relative_eq!(sys.a[(2, 0)], 32.174 / 673.0, epsilon = 1e-12);
        assert_eq!(sys.d, Mat::zeros(4, 2));
        // Pinned entries agree exactly.
        assert_eq!(sys.a[(1, 3)], 0.1008);
        assert_eq!(sys.b[(1, 1)], 0.0142);
        assert_eq!(sys.b[(3, 1)], 0.6784);
    }

    #[test]
    fn unpinned_thrust_column_close_to_published() {
        let damaged = damage_derivatives(
            &nominal_derivatives(),
            &cond_747(),
            &geom_747(),
            &inertia_damaged(),
        )
        .unwrap();
        let dim =
            dimensionalize(&damaged, &cond_747(), &geom_747(), &inertia_damaged()).unwrap();
        // qbar*S*b*|C_N_dr|/Izz and its Ixz/Ixx coupling.
        assert_relative_eq!(dim.n_dt, 0.6537, epsilon = 1e-3);
        let sys = assemble_plant(
            &dim,
            &cond_747(),
            &TrimState::steady_level(3221.0),
            &inertia_damaged(),
            &geom_747(),
            &[],
        )
        .unwrap();
        assert_relative_eq!(sys.b[(1, 1)], 0.01365, epsilon = 1e-4);
        assert_relative_eq!(sys.b[(3, 1)], 0.6537, epsilon = 1e-3);
    }

    #[test]
    fn zero_derivatives_leave_only_kinematic_entries() {
        let dim = DimensionalDerivatives {
            l_beta: 0.0,
            l_p: 0.0,
            l_r: 0.0,
            l_da: 0.0,
            n_beta: 0.0,
            n_p: 0.0,
            n_r: 0.0,
            n_da: 0.0,
            n_dt: 0.0,
            y_beta: 0.0,
            y_p: 0.0,
            y_r: 0.0,
            y_da: 0.0,
        };
        let sys = assemble_plant(
            &dim,
            &cond_747(),
            &TrimState::steady_level(0.0),
            &inertia_damaged(),
            &geom_747(),
            &[],
        )
        .unwrap();
        let mut expected = Mat::zeros(4, 4);
        expected[(0, 1)] = 1.0;
        expected[(2, 0)] = 32.174 / 673.0;
        expected[(2, 3)] = -1.0;
        assert_eq!(sys.a, expected);
        assert_eq!(sys.b, Mat::zeros(4, 2));
    }

    #[test]
    fn override_out_of_range_is_rejected() {
        let dim =
            dimensionalize(&nominal_derivatives(), &cond_747(), &geom_747(), &inertia_damaged())
                .unwrap();
        let bad = EntryOverride { target: OverrideTarget::B, row: 0, col: 5, value: 1.0 };
        assert!(assemble_plant(
            &dim,
            &cond_747(),
            &TrimState::steady_level(0.0),
            &inertia_damaged(),
            &geom_747(),
            &[bad],
        )
        .is_err());
    }

    #[test]
    fn golden_plant_mode_pattern() {
        let evs = eigenvalues(&golden_plant().a).unwrap();
        // One unstable oscillatory pair, one fast stable real pole, one pole
        // at the origin.
        let dutch: Vec<_> = evs.iter().filter(|e| e.im.abs() > 1e-6).collect();
        assert_eq!(dutch.len(), 2);
        assert_relative_eq!(dutch[0].re, 0.0917, epsilon = 2e-2);
        assert_relative_eq!(dutch[0].im.abs(), 0.43, epsilon = 2e-2);
        let reals: Vec<f64> =
            evs.iter().filter(|e| e.im.abs() <= 1e-6).map(|e| e.re).collect();
        assert_eq!(reals.len(), 2);
        let roll = reals.iter().cloned().fold(f64::INFINITY, f64::min);
        let spiral = reals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(roll, -1.04, epsilon = 2e-2);
        assert!(spiral.abs() < 1e-6);
    }

    #[test]
    fn golden_plant_modal_names_and_metrics() {
        let modes = crate::lti::modal_analysis(&golden_plant()).unwrap();
        assert_eq!(modes.len(), 3);
        let dutch = modes.iter().find(|m| m.name == "dutch roll").unwrap();
        assert_relative_eq!(dutch.damping.unwrap(), -0.209, epsilon = 0.01);
        assert_relative_eq!(dutch.period_s.unwrap(), 14.2969, max_relative = 0.01);
        let roll = modes.iter().find(|m| m.name == "roll").unwrap();
        assert_relative_eq!(roll.pole.re, -1.04, epsilon = 2e-2);
        let spiral = modes.iter().find(|m| m.name == "spiral").unwrap();
        assert!(spiral.pole.norm() < 1e-6);
    }

    #[test]
    fn stabilizer_loss_reduces_weight_and_inertias() {
        // Removing tail mass must shrink every inertia entry and the weight;
        // the products of inertia drop the most in relative terms because
        // the fin sits high and aft.
        let nominal = fixtures::inertia_nominal();
        let damaged = fixtures::inertia_damaged();
        nominal.validate().unwrap();
        damaged.validate().unwrap();
        assert!(damaged.weight < nominal.weight);
        assert!(damaged.mass < nominal.mass);
        assert!(damaged.ixx < nominal.ixx);
        assert!(damaged.iyy < nominal.iyy);
        assert!(damaged.izz < nominal.izz);
        assert!(damaged.ixz < nominal.ixz);
        let weight_ratio = damaged.weight / nominal.weight;
        assert!((0.985..1.0).contains(&weight_ratio));
    }
}
