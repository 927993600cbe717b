//! Integral forms of the limiting variance and the kernel integrals of the
//! `T1 + 2 T2` split.
//!
//! For `q ≠ 1/2`,
//!
//! ```text
//! E[Z̃∞²] = 1/(2q−1) ∫₀¹ (u^{1−2q} − 1)/(1 − u) · ((1 − u/2)^{q−1} − 1)/u du
//! ```
//!
//! and at `q = 1/2` the first factor becomes `−ln u / (1 − u)`. The limit
//! of `Z = S − Ξ` has variance `q² E[Z̃∞²]`.
//!
//! Both difference quotients are evaluated with `expm1`/`log1p` and switch
//! to three-term Taylor series within `1e−6` of their removable
//! singularities.

use alloc::vec::Vec;

use crate::params::check_q;
use crate::quadrature::{integrate_unit, QuadratureResult, Tolerance};
use crate::{Error, Result};

const SERIES_RADIUS: f64 = 1e-6;

/// `ln u`, using the complement near 1.
fn ln_u(u: f64, uc: f64) -> f64 {
    if u > 0.5 {
        libm::log1p(-uc)
    } else {
        libm::log(u)
    }
}

/// `(u^m − 1) / (1 − u)`.
fn power_quotient(m: f64, u: f64, uc: f64) -> f64 {
    if uc < SERIES_RADIUS {
        let v = uc;
        -m + m * (m - 1.0) / 2.0 * v - m * (m - 1.0) * (m - 2.0) / 6.0 * v * v
    } else {
        libm::expm1(m * ln_u(u, uc)) / uc
    }
}

/// `((1 − u/2)^c − 1) / u`.
fn half_quotient(c: f64, u: f64) -> f64 {
    if u < SERIES_RADIUS {
        -c / 2.0 + c * (c - 1.0) / 8.0 * u - c * (c - 1.0) * (c - 2.0) / 48.0 * u * u
    } else {
        libm::expm1(c * libm::log1p(-u / 2.0)) / u
    }
}

/// `−ln u / (1 − u)`.
fn log_quotient(u: f64, uc: f64) -> f64 {
    if uc < SERIES_RADIUS {
        1.0 + uc / 2.0 + uc * uc / 3.0
    } else {
        -ln_u(u, uc) / uc
    }
}

fn phi_general(q: f64, u: f64, uc: f64) -> f64 {
    power_quotient(1.0 - 2.0 * q, u, uc) * half_quotient(q - 1.0, u) / (2.0 * q - 1.0)
}

fn phi_half(u: f64, uc: f64) -> f64 {
    log_quotient(u, uc) * half_quotient(-0.5, u)
}

/// `u^α (1−u)^β / (1+u)`, with `ln u` taken from the complement near 1 so
/// that large `α` keeps full relative accuracy.
fn beta_kernel(alpha: f64, beta: f64, u: f64, uc: f64) -> f64 {
    libm::exp(alpha * ln_u(u, uc) + beta * libm::log(uc)) / (1.0 + u)
}

fn j1_kernel(k: u64, q: f64, u: f64, uc: f64) -> f64 {
    beta_kernel(k as f64 + q - 1.0, 1.0 - q, u, uc)
}

fn j2_kernel(n: u64, q: f64, u: f64, uc: f64) -> f64 {
    beta_kernel(n as f64 + q, -q, u, uc)
}

/// The limiting-variance integrand at `u ∈ (0, 1)`. The log branch is
/// taken only for `q == 0.5` exactly.
pub fn phi_integrand(q: f64, u: f64) -> Result<f64> {
    check_q(q)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::OutsideUnitInterval(u));
    }
    Ok(phi_integrand_split(q, u, 1.0 - u))
}

/// As [`phi_integrand`], with `1 − u` supplied by the caller.
pub fn phi_integrand_split(q: f64, u: f64, uc: f64) -> f64 {
    if q == 0.5 {
        phi_half(u, uc)
    } else {
        phi_general(q, u, uc)
    }
}

/// Analytic limit of the integrand as `u → 0`; infinite for `q ≥ 1/2`.
pub fn phi_limit_at_zero(q: f64) -> f64 {
    if q < 0.5 {
        (q - 1.0) / (2.0 * (2.0 * q - 1.0))
    } else {
        f64::INFINITY
    }
}

/// Analytic limit of the integrand as `u → 1`: `2^{1−q} − 1`.
pub fn phi_limit_at_one(q: f64) -> f64 {
    libm::exp2(1.0 - q) - 1.0
}

/// An integral over `(0, 1)` handled by [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrandSpec {
    /// Limiting-variance integrand, `q ≠ 1/2`.
    PhiGeneral { q: f64 },
    /// Limiting-variance integrand at `q = 1/2`.
    PhiHalf,
    /// `∫ u^{k+q−1} (1−u)^{1−q} / (1+u) du`.
    J1 { k: u64, q: f64 },
    /// `∫ u^{n+q} (1−u)^{−q} / (1+u) du`.
    J2 { n: u64, q: f64 },
}

impl IntegrandSpec {
    /// Picks the branch by exact comparison with `1/2`.
    pub fn phi(q: f64) -> Self {
        if q == 0.5 {
            IntegrandSpec::PhiHalf
        } else {
            IntegrandSpec::PhiGeneral { q }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            IntegrandSpec::PhiGeneral { q } => {
                check_q(q)?;
                if q == 0.5 {
                    return Err(Error::InvalidArgument("q = 1/2 uses the log branch"));
                }
                Ok(())
            }
            IntegrandSpec::PhiHalf => Ok(()),
            IntegrandSpec::J1 { k, q } => {
                check_q(q)?;
                if k == 0 {
                    return Err(Error::InvalidArgument("index must be at least 1"));
                }
                if k as f64 + q <= 0.0 {
                    return Err(Error::InvalidArgument("J1 needs k + q > 0"));
                }
                Ok(())
            }
            IntegrandSpec::J2 { n, q } => {
                check_q(q)?;
                if n == 0 {
                    return Err(Error::InvalidArgument("index must be at least 1"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, u: f64, uc: f64) -> f64 {
        match *self {
            IntegrandSpec::PhiGeneral { q } => phi_general(q, u, uc),
            IntegrandSpec::PhiHalf => phi_half(u, uc),
            IntegrandSpec::J1 { k, q } => j1_kernel(k, q, u, uc),
            IntegrandSpec::J2 { n, q } => j2_kernel(n, q, u, uc),
        }
    }
}

pub fn integrate(spec: IntegrandSpec, tol: Tolerance) -> Result<QuadratureResult> {
    spec.validate()?;
    integrate_unit(|u, uc| spec.eval(u, uc), tol)
}

/// `E[Z̃∞²]`.
pub fn var_ztilde_infty(q: f64, tol: Tolerance) -> Result<QuadratureResult> {
    integrate(IntegrandSpec::phi(q), tol)
}

/// `Var(Z∞) = q² E[Z̃∞²]`, with the error estimate scaled alike.
pub fn var_z_infty(q: f64, tol: Tolerance) -> Result<QuadratureResult> {
    let q2 = q * q;
    if q2 == 0.0 {
        check_q(q)?;
        return Ok(QuadratureResult {
            value: 0.0,
            abs_err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let scaled = Tolerance {
        abs: tol.abs / q2,
        rel: tol.rel,
    };
    let r = var_ztilde_infty(q, scaled)?;
    Ok(QuadratureResult {
        value: q2 * r.value,
        abs_err_estimate: q2 * r.abs_err_estimate,
        evaluations: r.evaluations,
    })
}

pub fn j1(k: u64, q: f64, tol: Tolerance) -> Result<QuadratureResult> {
    integrate(IntegrandSpec::J1 { k, q }, tol)
}

pub fn j2(n: u64, q: f64, tol: Tolerance) -> Result<QuadratureResult> {
    integrate(IntegrandSpec::J2 { n, q }, tol)
}

/// One row of the `q ↦ Var(Z∞)` curve. A failed quadrature leaves `value`
/// as NaN and records the error.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub q: f64,
    pub value: f64,
    pub abs_err: f64,
    pub failure: Option<Error>,
}

pub fn figure_row(q: f64, tol: Tolerance) -> FigureRow {
    match var_z_infty(q, tol) {
        Ok(r) => FigureRow {
            q,
            value: r.value,
            abs_err: r.abs_err_estimate,
            failure: None,
        },
        Err(e) => FigureRow {
            q,
            value: f64::NAN,
            abs_err: f64::NAN,
            failure: Some(e),
        },
    }
}

/// Grid `q_min, q_min + step, …` up to `q_max`. When `1/step` is an
/// integer the points are snapped to multiples of `step`, so `0` and `1/2`
/// come out exact.
pub fn figure_grid_points(q_min: f64, q_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument("step must be positive"));
    }
    if !(q_min >= -1.0 && q_max <= 0.99 && q_min <= q_max) {
        return Err(Error::InvalidArgument(
            "grid must satisfy -1 <= q_min <= q_max <= 0.99",
        ));
    }
    let count = libm::floor((q_max - q_min) / step + 1e-9) as usize + 1;
    let inv = libm::round(1.0 / step);
    let snap = (inv * step - 1.0).abs() < 1e-12;
    Ok((0..count)
        .map(|i| {
            let q = q_min + i as f64 * step;
            if snap {
                libm::round(q * inv) / inv
            } else {
                q
            }
        })
        .collect())
}

pub fn figure_grid(q_min: f64, q_max: f64, step: f64, tol: Tolerance) -> Result<Vec<FigureRow>> {
    Ok(figure_grid_points(q_min, q_max, step)?
        .into_iter()
        .map(|q| figure_row(q, tol))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::var_ztilde_exact;
    use crate::special::beta;
    use core::f64::consts::LN_2;
    use proptest::prelude::*;

    #[test]
    fn memoryless_integrand_is_one_over_two_minus_u() {
        assert!((phi_integrand(0.0, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for u in [1e-9, 1e-3, 0.3, 0.9, 1.0 - 1e-9] {
            let v = phi_integrand(0.0, u).unwrap();
            assert!((v - 1.0 / (2.0 - u)).abs() < 1e-12, "u={u}");
        }
        assert!(phi_integrand(0.0, 0.0).is_err());
        assert!(phi_integrand(0.0, 1.0).is_err());
        assert!(phi_integrand(1.0, 0.5).is_err());
    }

    #[test]
    fn endpoint_limits() {
        for q in [-1.0, -0.5, 0.0, 0.2, 0.45] {
            // The approach is like u^{1−2q}, so go far enough in.
            let u = libm::pow(10.0, -10.0 / (1.0 - 2.0 * q)).min(1e-10);
            let near = phi_integrand(q, u).unwrap();
            assert!((near - phi_limit_at_zero(q)).abs() < 1e-8, "q={q}");
        }
        for q in [-1.0, -0.5, 0.0, 0.3, 0.7, 0.9] {
            for uc in [1e-10, 1e-13] {
                let near = phi_integrand_split(q, 1.0 - uc, uc);
                assert!((near - phi_limit_at_one(q)).abs() < 1e-8, "q={q}");
            }
        }
        let near = phi_integrand_split(0.5, 1.0 - 1e-10, 1e-10);
        assert!((near - phi_limit_at_one(0.5)).abs() < 1e-8);
        assert_eq!(phi_limit_at_one(0.0), 1.0);
    }

    #[test]
    fn series_and_direct_forms_agree_at_the_switch() {
        for q in [-1.0, -0.3, 0.2, 0.7, 0.95] {
            let m = 1.0 - 2.0 * q;
            let c = q - 1.0;
            let r = SERIES_RADIUS;
            let below = power_quotient(m, 1.0 - r * 0.999, r * 0.999);
            let above = power_quotient(m, 1.0 - r * 1.001, r * 1.001);
            assert!((below - above).abs() < 1e-8);
            assert!((half_quotient(c, r * 0.999) - half_quotient(c, r * 1.001)).abs() < 1e-8);
        }
        let lo = log_quotient(1.0 - SERIES_RADIUS * 0.999, SERIES_RADIUS * 0.999);
        let hi = log_quotient(1.0 - SERIES_RADIUS * 1.001, SERIES_RADIUS * 1.001);
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn memoryless_limit_is_ln_two() {
        let r = var_ztilde_infty(0.0, Tolerance::default()).unwrap();
        assert!((r.value - LN_2).abs() < 1e-9);
        assert_eq!(var_z_infty(0.0, Tolerance::default()).unwrap().value, 0.0);
    }

    #[test]
    fn var_z_scales_by_q_squared() {
        let tol = Tolerance::default();
        let z = var_z_infty(-1.0, tol).unwrap().value;
        let zt = var_ztilde_infty(-1.0, tol).unwrap().value;
        assert!((z - zt).abs() < 1e-12 && z > 0.0);
        let half = var_z_infty(0.5, tol).unwrap().value;
        assert!((half - 0.25 * var_ztilde_infty(0.5, tol).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn branch_continuity_at_one_half() {
        let tol = Tolerance::absolute(1e-13);
        let centre = var_ztilde_infty(0.5, tol).unwrap().value;
        let h = 1e-6;
        for side in [-1.0, 1.0] {
            let v = var_ztilde_infty(0.5 + side * h, tol).unwrap().value;
            assert!((v - centre).abs() < 1e-5);
        }
        let h = 1e-4;
        let avg = 0.5
            * (var_ztilde_infty(0.5 - h, tol).unwrap().value
                + var_ztilde_infty(0.5 + h, tol).unwrap().value);
        assert!((avg - centre).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_long_exact_sums() {
        // The truncation gap shrinks like the T2 term: fast for q ≤ 0.
        for q in [-1.0, -0.5, 0.0] {
            let inf = var_ztilde_infty(q, Tolerance::default()).unwrap().value;
            let exact = var_ztilde_exact(100_000, q).unwrap();
            assert!((inf - exact).abs() < 1e-4, "q={q}");
        }
        let inf = var_ztilde_infty(0.3, Tolerance::default()).unwrap().value;
        let gaps: Vec<f64> = [100u64, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (var_ztilde_exact(n, 0.3).unwrap() - inf).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn kernel_integrals_closed_forms() {
        let tol = Tolerance::relative(1e-13);
        assert!((j1(1, 0.0, tol).unwrap().value - (2.0 * LN_2 - 1.0)).abs() < 1e-12);
        assert!((j2(1, 0.0, tol).unwrap().value - (1.0 - LN_2)).abs() < 1e-12);
        assert!(j1(1, -1.0, tol).is_err());
        assert!(j2(0, 0.0, tol).is_err());
    }

    /// `J2 = Σ_j 2^{−j−1} B(n+q+1, j+1−q)`, from expanding `1/(1+u)` in
    /// powers of `(1−u)/2`.
    fn j2_series(n: u64, q: f64) -> f64 {
        let a = n as f64 + q + 1.0;
        (0..200)
            .map(|j| libm::pow(0.5, j as f64 + 1.0) * beta(a, j as f64 + 1.0 - q).unwrap())
            .sum()
    }

    #[test]
    fn j2_matches_beta_series_and_bound() {
        for q in [-1.0, -0.5, 0.0, 0.3, 0.5, 0.7, 0.9] {
            for n in [1u64, 10, 100, 10_000, 100_000] {
                let v = j2(n, q, Tolerance::relative(1e-12)).unwrap().value;
                let s = j2_series(n, q);
                assert!((v / s - 1.0).abs() < 1e-10, "n={n} q={q}: {v} vs {s}");
                assert!(v <= beta(n as f64 + q + 1.0, 1.0 - q).unwrap());
            }
        }
    }

    #[test]
    fn figure_grid_snaps_and_is_nonnegative() {
        let pts = figure_grid_points(-1.0, 0.95, 0.05).unwrap();
        assert_eq!(pts.len(), 40);
        assert_eq!(pts[20], 0.0);
        assert_eq!(pts[30], 0.5);
        assert_eq!(*pts.last().unwrap(), 0.95);
        let rows = figure_grid(-1.0, 0.0, 0.25, Tolerance::default()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4].value, 0.0);
        assert!(rows.iter().all(|r| r.failure.is_none() && r.value >= 0.0));
        assert!(figure_grid_points(-1.2, 0.5, 0.1).is_err());
        assert!(figure_grid_points(0.0, 1.0, 0.1).is_err());
        assert!(figure_grid_points(0.0, 0.5, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn integrand_is_positive(q in -1.0f64..0.99, u in 1e-12f64..1.0) {
            prop_assume!(u < 1.0);
            let v = phi_integrand(q, u).unwrap();
            prop_assert!(v.is_finite() && v > 0.0);
        }

        #[test]
        fn limiting_variance_is_nonnegative(q in -1.0f64..0.95) {
            let r = var_ztilde_infty(q, Tolerance::absolute(1e-9)).unwrap();
            prop_assert!(r.value >= 0.0 && r.abs_err_estimate >= 0.0);
        }
    }
}
