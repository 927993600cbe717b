//! Gauss hypergeometric function `₂F₁(a, b; c; z)` for real `z ∈ [−1, 1)`.

use crate::quadrature::{integrate_unit, Tolerance};
use crate::special::ln_beta;
use crate::sum::Compensated;
use crate::{Error, Result};

const MAX_TERMS: usize = 200_000;

fn check_c(c: f64) -> Result<()> {
    if c <= 0.0 && c == libm::floor(c) {
        Err(Error::HypergeometricDomain("c is a non-positive integer"))
    } else {
        Ok(())
    }
}

/// Direct power series, for `|z| < 1`.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = Compensated::new(1.0);
    let mut term = 1.0;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        if term == 0.0 {
            return Ok(sum.value());
        }
        sum.add(term);
        if term.abs() <= f64::EPSILON * 0.25 * sum.value().abs() {
            small += 1;
            // Guards against a lone tiny term while (a + n)(b + n) changes sign.
            if small >= 3 {
                return Ok(sum.value());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::SeriesDivergence { terms: MAX_TERMS })
}

/// `₂F₁(a, b; c; z)`.
///
/// For `z ∈ [−1, −1/2)` the Pfaff transformation
/// `₂F₁(a, b; c; z) = (1 − z)^{−b} ₂F₁(b, c − a; c; z/(z − 1))` maps the
/// argument into `(1/3, 1/2]`, which also covers `z = −1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_c(c)?;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::HypergeometricDomain("parameters must be finite"));
    }
    if !(-1.0..1.0).contains(&z) {
        return Err(Error::HypergeometricDomain("z must lie in [-1, 1)"));
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        let scale = libm::pow(1.0 - z, -b);
        return Ok(scale * series(b, c - a, c, w)?);
    }
    series(a, b, c, z)
}

/// Euler's integral
/// `₂F₁(a, b; c; z) = 1/B(b, c−b) ∫₀¹ t^{b−1} (1−t)^{c−b−1} (1 − z t)^{−a} dt`,
/// valid for `c > b > 0` and `z < 1`.
pub fn gauss_2f1_euler(a: f64, b: f64, c: f64, z: f64, tol: Tolerance) -> Result<f64> {
    if !(c > b && b > 0.0) {
        return Err(Error::HypergeometricDomain(
            "Euler integral needs c > b > 0",
        ));
    }
    if !(z < 1.0 && z.is_finite()) {
        return Err(Error::HypergeometricDomain("Euler integral needs z < 1"));
    }
    let r = integrate_unit(
        |t, tc| libm::pow(t, b - 1.0) * libm::pow(tc, c - b - 1.0) * libm::pow(1.0 - z * t, -a),
        tol,
    )?;
    Ok(r.value * libm::exp(-ln_beta(b, c - b)?))
}
