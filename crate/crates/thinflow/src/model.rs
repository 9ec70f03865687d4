//! Constitutive laws, dimensionless parameters and the inflow/initial data of the
//! displacement experiment.
//!
//! The invading phase carries the quadratic Corey mobility `M*S^2`, the defending
//! phase `(1-S)^2`. The fractional flow `f` and the total mobility `lambda_tot`
//! are the consistent pair of that choice, so `f(S) * lambda_tot(S) = M*S^2`
//! holds identically and `lambda_tot >= M/(1+M) > 0`.

use crate::error::{Result, SimError};

/// Physical description of the rectangular flow cell before rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSetup {
    /// Domain length in m.
    pub length_l: f64,
    /// Domain width in m; the thin direction.
    pub width_h: f64,
    /// Inflow speed in m/s.
    pub inflow_speed_q: f64,
    /// Dynamic viscosity of the defending phase in Pa s.
    pub viscosity_defending_mud: f64,
    /// Viscosity ratio of the phases.
    pub viscosity_ratio_m: f64,
    /// Effective viscosity scale entering the regularization coefficients.
    pub effective_viscosity_mue: f64,
    /// Mean permeability in the horizontal direction, m^2.
    pub mean_perm_kx: f64,
    /// Mean permeability in the vertical direction, m^2.
    pub mean_perm_kz: f64,
}

impl PhysicalSetup {
    pub fn new(
        length_l: f64,
        width_h: f64,
        inflow_speed_q: f64,
        viscosity_defending_mud: f64,
        viscosity_ratio_m: f64,
        effective_viscosity_mue: f64,
        mean_perm_kx: f64,
        mean_perm_kz: f64,
    ) -> Result<Self> {
        let fields = [
            ("length_l", length_l),
            ("width_h", width_h),
            ("inflow_speed_q", inflow_speed_q),
            ("viscosity_defending_mud", viscosity_defending_mud),
            ("viscosity_ratio_m", viscosity_ratio_m),
            ("effective_viscosity_mue", effective_viscosity_mue),
            ("mean_perm_kx", mean_perm_kx),
            ("mean_perm_kz", mean_perm_kz),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(SimError::Parameter(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if width_h > length_l {
            return Err(SimError::Validation(format!(
                "width_h ({width_h}) must not exceed length_l ({length_l})"
            )));
        }
        Ok(Self {
            length_l,
            width_h,
            inflow_speed_q,
            viscosity_defending_mud,
            viscosity_ratio_m,
            effective_viscosity_mue,
            mean_perm_kx,
            mean_perm_kz,
        })
    }
}

/// Parameters of the rescaled problem on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    /// Width-to-length ratio H/L in (0, 1].
    pub gamma: f64,
    /// Horizontal regularization coefficient mu_e / L^2.
    pub beta1: f64,
    /// Vertical regularization coefficient mu_e / H^2.
    pub beta2: f64,
    pub viscosity_ratio_m: f64,
    /// Vertically averaged horizontal velocity at the inflow boundary.
    pub u_hat_inflow: f64,
    pub end_time_t: f64,
}

impl DimensionlessParams {
    pub fn new(
        gamma: f64,
        beta1: f64,
        beta2: f64,
        viscosity_ratio_m: f64,
        u_hat_inflow: f64,
        end_time_t: f64,
    ) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 || gamma > 1.0 {
            return Err(SimError::Parameter(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if !beta1.is_finite() || beta1 < 0.0 || !beta2.is_finite() || beta2 < 0.0 {
            return Err(SimError::Parameter(format!(
                "beta1, beta2 must be finite and nonnegative, got {beta1}, {beta2}"
            )));
        }
        if beta1 > beta2 {
            return Err(SimError::Parameter(format!(
                "beta1 ({beta1}) must not exceed beta2 ({beta2})"
            )));
        }
        if !viscosity_ratio_m.is_finite() || viscosity_ratio_m <= 0.0 {
            return Err(SimError::Parameter(format!(
                "viscosity_ratio_m must be strictly positive, got {viscosity_ratio_m}"
            )));
        }
        if !u_hat_inflow.is_finite() || u_hat_inflow <= 0.0 {
            return Err(SimError::Parameter(format!(
                "u_hat_inflow must be strictly positive, got {u_hat_inflow}"
            )));
        }
        if !end_time_t.is_finite() || end_time_t < 0.0 {
            return Err(SimError::Parameter(format!(
                "end_time_t must be finite and nonnegative, got {end_time_t}"
            )));
        }
        Ok(Self {
            gamma,
            beta1,
            beta2,
            viscosity_ratio_m,
            u_hat_inflow,
            end_time_t,
        })
    }

    /// Parameters for one member of the fixed-length geometry family: the length
    /// stays at `length_l` while the width shrinks as `gamma * length_l`, so
    /// `beta1` is shared across a sweep and `beta2` grows as `gamma` drops.
    pub fn from_gamma_family(
        gamma: f64,
        mu_e: f64,
        length_l: f64,
        viscosity_ratio_m: f64,
        u_hat_inflow: f64,
        end_time_t: f64,
    ) -> Result<Self> {
        if !mu_e.is_finite() || mu_e < 0.0 {
            return Err(SimError::Parameter(format!(
                "mu_e must be finite and nonnegative, got {mu_e}"
            )));
        }
        if !length_l.is_finite() || length_l <= 0.0 {
            return Err(SimError::Parameter(format!(
                "length_l must be strictly positive, got {length_l}"
            )));
        }
        if !gamma.is_finite() || gamma <= 0.0 || gamma > 1.0 {
            return Err(SimError::Parameter(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        let width_h = gamma * length_l;
        Self::new(
            gamma,
            mu_e / (length_l * length_l),
            mu_e / (width_h * width_h),
            viscosity_ratio_m,
            u_hat_inflow,
            end_time_t,
        )
    }
}

/// Rescale a physical setup to the unit square.
///
/// The inflow speed is the velocity scale, so the averaged dimensionless inflow
/// velocity comes out as 1. The end time defaults to 0.3 and can be replaced
/// on the returned value.
pub fn nondimensionalize(setup: &PhysicalSetup) -> Result<DimensionlessParams> {
    let gamma = setup.width_h / setup.length_l;
    let beta1 = setup.effective_viscosity_mue / (setup.length_l * setup.length_l);
    let beta2 = setup.effective_viscosity_mue / (setup.width_h * setup.width_h);
    DimensionlessParams::new(gamma, beta1, beta2, setup.viscosity_ratio_m, 1.0, 0.3)
}

/// Saturation prescribed on the inflow boundary, as a function of height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InflowProfile {
    /// `value` on `lo < z <= hi`, zero elsewhere.
    Band { lo: f64, hi: f64, value: f64 },
    Constant(f64),
}

impl InflowProfile {
    /// The band used by the displacement experiment: 0.9 on 3/10 < z <= 7/10.
    pub fn experiment_band() -> Self {
        InflowProfile::Band { lo: 0.3, hi: 0.7, value: 0.9 }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            InflowProfile::Band { lo, hi, value } => {
                if z > lo && z <= hi {
                    value
                } else {
                    0.0
                }
            }
            InflowProfile::Constant(value) => value,
        }
    }

    /// Supremum of the profile over [0, 1].
    pub fn sup(&self) -> f64 {
        match *self {
            InflowProfile::Band { value, .. } => value.max(0.0),
            InflowProfile::Constant(value) => value,
        }
    }
}

/// Boundary data of the displacement problem: inflow saturation profile and the
/// two constant pressures driving the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub inflow_saturation: InflowProfile,
    pub pressure_inflow: f64,
    pub pressure_outflow: f64,
}

impl BoundaryData {
    pub fn new(inflow_saturation: InflowProfile, pressure_inflow: f64, pressure_outflow: f64) -> Result<Self> {
        let sup = inflow_saturation.sup();
        let inf = match inflow_saturation {
            InflowProfile::Band { value, .. } => value.min(0.0),
            InflowProfile::Constant(value) => value,
        };
        if !(0.0..=1.0).contains(&sup) || !(0.0..=1.0).contains(&inf) {
            return Err(SimError::Validation(
                "inflow saturation profile must take values in [0, 1]".to_string(),
            ));
        }
        if !pressure_inflow.is_finite() || !pressure_outflow.is_finite() {
            return Err(SimError::Parameter("boundary pressures must be finite".to_string()));
        }
        Ok(Self {
            inflow_saturation,
            pressure_inflow,
            pressure_outflow,
        })
    }

    /// Data of the displacement experiment: band profile, pressure 1 -> 0.
    pub fn experiment() -> Self {
        Self {
            inflow_saturation: InflowProfile::experiment_band(),
            pressure_inflow: 1.0,
            pressure_outflow: 0.0,
        }
    }

    /// Initial saturation `g(x) * S_inflow(z)`; compatible with the inflow
    /// profile at x = 0 since g(0) = 1.
    pub fn initial_saturation(&self, x: f64, z: f64) -> f64 {
        initial_envelope(x) * self.inflow_saturation.eval(z)
    }
}

/// Horizontal envelope of the initial condition, `(1-x)^2 / (1e5 x^2 + (1-x)^2)`.
/// Equals 1 at x = 0 and decays to 0 within a few percent of the domain length.
pub fn initial_envelope(x: f64) -> f64 {
    let a = (1.0 - x) * (1.0 - x);
    a / (1.0e5 * x * x + a)
}

fn check_constitutive_args(s: f64, m: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(SimError::Parameter(format!("saturation must be finite, got {s}")));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(SimError::Parameter(format!(
            "viscosity ratio must be finite and strictly positive, got {m}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn frac_flow_unchecked(s: f64, m: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let num = m * s * s;
    num / (num + (1.0 - s) * (1.0 - s))
}

#[inline]
pub(crate) fn total_mobility_unchecked(s: f64, m: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    m * s * s + (1.0 - s) * (1.0 - s)
}

/// Fractional flow of the invading phase, `M S^2 / (M S^2 + (1-S)^2)`.
///
/// Saturation is clamped to [0, 1] before evaluation so regularization
/// overshoot cannot push the flux fraction outside [0, 1].
pub fn frac_flow(s: f64, m: f64) -> Result<f64> {
    check_constitutive_args(s, m)?;
    Ok(frac_flow_unchecked(s, m))
}

/// Total mobility `M S^2 + (1-S)^2`, bounded below by `M / (1 + M)`.
pub fn total_mobility(s: f64, m: f64) -> Result<f64> {
    check_constitutive_args(s, m)?;
    Ok(total_mobility_unchecked(s, m))
}

/// Derivative of the fractional flow, `2 M S (1-S) / (M S^2 + (1-S)^2)^2`.
pub fn frac_flow_deriv(s: f64, m: f64) -> Result<f64> {
    check_constitutive_args(s, m)?;
    let s = s.clamp(0.0, 1.0);
    let d = m * s * s + (1.0 - s) * (1.0 - s);
    Ok(2.0 * m * s * (1.0 - s) / (d * d))
}

/// Lipschitz bound of the fractional flow, sampled on a step-1e-3 grid.
pub fn frac_flow_lipschitz(m: f64) -> Result<f64> {
    check_constitutive_args(0.0, m)?;
    let mut max = 0.0f64;
    for k in 0..=1000 {
        let s = k as f64 * 1.0e-3;
        max = max.max(frac_flow_deriv(s, m)?);
    }
    Ok(max)
}

/// Primitive of the fractional flow, `F(S) = int_0^S f`, by composite Simpson
/// quadrature with 4096 panels over the full range (scaled to [0, S]).
pub fn frac_flow_primitive(s: f64, m: f64) -> Result<f64> {
    check_constitutive_args(s, m)?;
    let s = s.clamp(0.0, 1.0);
    if s == 0.0 {
        return Ok(0.0);
    }
    let panels = 4096usize;
    let h = s / panels as f64;
    let mut acc = frac_flow_unchecked(0.0, m) + frac_flow_unchecked(s, m);
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let value = frac_flow_unchecked(k as f64 * h, m);
        if k % 2 == 1 {
            odd += value;
        } else {
            even += value;
        }
    }
    acc += 4.0 * odd + 2.0 * even;
    Ok(acc * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frac_flow_endpoints_and_midpoint() {
        assert_eq!(frac_flow(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(frac_flow(1.0, 2.0).unwrap(), 1.0);
        let mid = frac_flow(0.5, 2.0).unwrap();
        assert!((mid - 2.0 / 3.0).abs() < 1e-15, "f(0.5, 2) = {mid}");
    }

    #[test]
    fn frac_flow_rejects_bad_arguments() {
        assert!(frac_flow(f64::NAN, 2.0).is_err());
        assert!(frac_flow(0.5, 0.0).is_err());
        assert!(frac_flow(0.5, -1.0).is_err());
    }

    #[test]
    fn frac_flow_clamps_overshoot() {
        assert_eq!(frac_flow(-0.2, 2.0).unwrap(), 0.0);
        assert_eq!(frac_flow(1.3, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn total_mobility_endpoints_and_minimum() {
        assert_eq!(total_mobility(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(total_mobility(1.0, 2.0).unwrap(), 2.0);
        // minimum of M S^2 + (1-S)^2 sits at S = 1/(1+M) with value M/(1+M)
        let min = total_mobility(1.0 / 3.0, 2.0).unwrap();
        assert!((min - 2.0 / 3.0).abs() < 1e-15, "lambda(1/3, 2) = {min}");
    }

    #[test]
    fn primitive_trivial_and_symmetric_cases() {
        assert_eq!(frac_flow_primitive(0.0, 2.0).unwrap(), 0.0);
        // for M = 1 the flux satisfies f(S) + f(1-S) = 1, so the full integral is 1/2
        let full = frac_flow_primitive(1.0, 1.0).unwrap();
        assert!((full - 0.5).abs() < 1e-12, "F(1, 1) = {full}");
    }

    #[test]
    fn primitive_matches_high_resolution_trapezoid() {
        // independent quadrature oracle: 1e6-panel trapezoid
        for &(s, m) in &[(0.5, 2.0), (0.8, 2.0), (1.0, 2.0), (0.3, 5.0)] {
            let n = 1_000_000usize;
            let h = s / n as f64;
            let mut acc = 0.5 * (frac_flow_unchecked(0.0, m) + frac_flow_unchecked(s, m));
            for k in 1..n {
                acc += frac_flow_unchecked(k as f64 * h, m);
            }
            let oracle = acc * h;
            let got = frac_flow_primitive(s, m).unwrap();
            assert!(
                (got - oracle).abs() < 1e-10,
                "F({s}, {m}) = {got}, oracle {oracle}"
            );
        }
    }

    #[test]
    fn initial_saturation_examples() {
        let bc = BoundaryData::experiment();
        assert_eq!(bc.initial_saturation(0.0, 0.5), 0.9);
        let v = bc.initial_saturation(0.5, 0.5);
        let expect = 0.9 / (1.0e5 + 1.0);
        assert!((v - expect).abs() < 1e-18, "S0(0.5, 0.5) = {v}");
        assert_eq!(bc.initial_saturation(0.2, 0.1), 0.0);
        // band boundary is half open: zero at z = 0.3, full at z = 0.7
        assert_eq!(bc.initial_saturation(0.0, 0.3), 0.0);
        assert_eq!(bc.initial_saturation(0.0, 0.7), 0.9);
    }

    #[test]
    fn nondimensionalize_examples() {
        let setup = PhysicalSetup::new(5.0, 1.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).unwrap();
        let p = nondimensionalize(&setup).unwrap();
        assert!((p.gamma - 0.2).abs() < 1e-15);
        assert!((p.beta1 - 4.0e-4).abs() < 1e-18);
        assert!((p.beta2 - 1.0e-2).abs() < 1e-16);
        assert_eq!(p.u_hat_inflow, 1.0);

        let square = PhysicalSetup::new(3.0, 3.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).unwrap();
        let q = nondimensionalize(&square).unwrap();
        assert_eq!(q.gamma, 1.0);
        assert_eq!(q.beta1, q.beta2);

        let thin = PhysicalSetup::new(5.0, 1.0 / 25.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).unwrap();
        let r = nondimensionalize(&thin).unwrap();
        assert!((r.gamma - 1.0 / 125.0).abs() < 1e-17);
        assert!((r.beta2 - 6.25).abs() < 1e-12);
    }

    #[test]
    fn nondimensionalize_rejects_wide_domain() {
        assert!(PhysicalSetup::new(1.0, 5.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).is_err());
        assert!(PhysicalSetup::new(0.0, 0.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).is_err());
    }

    #[test]
    fn nondimensionalize_scale_invariance() {
        let a = PhysicalSetup::new(5.0, 1.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).unwrap();
        let b = PhysicalSetup::new(10.0, 2.0, 1.0, 1.0, 2.0, 1.0e-2, 1.0, 1.0).unwrap();
        let pa = nondimensionalize(&a).unwrap();
        let pb = nondimensionalize(&b).unwrap();
        assert_eq!(pa.gamma, pb.gamma);
        assert_eq!(pb.beta1, pa.beta1 / 4.0);
        assert_eq!(pb.beta2, pa.beta2 / 4.0);
    }

    #[test]
    fn gamma_family_member() {
        let p = DimensionlessParams::from_gamma_family(1.0 / 125.0, 1.0e-2, 5.0, 2.0, 1.0, 0.3).unwrap();
        assert!((p.beta2 - 6.25).abs() < 1e-12);
        assert!((p.beta1 - 4.0e-4).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn flux_monotone_and_bounded(a in 0.0f64..=1.0, b in 0.0f64..=1.0, m in 0.05f64..20.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let fl = frac_flow(lo, m).unwrap();
            let fh = frac_flow(hi, m).unwrap();
            prop_assert!(fl <= fh);
            prop_assert!((0.0..=1.0).contains(&fl));
        }

        #[test]
        fn constitutive_pair_identity(s in 0.0f64..=1.0, m in 0.05f64..20.0) {
            let f = frac_flow(s, m).unwrap();
            let lam = total_mobility(s, m).unwrap();
            let target = m * s * s;
            prop_assert!((f * lam - target).abs() <= 1e-14 * target.max(1.0));
            prop_assert!(lam >= m / (1.0 + m) * (1.0 - 1e-14));
        }

        #[test]
        fn inflow_compatibility(z in 0.0f64..=1.0) {
            let bc = BoundaryData::experiment();
            prop_assert_eq!(bc.initial_saturation(0.0, z), bc.inflow_saturation.eval(z));
        }
    }
}
