//! Gamma-family helpers.

use crate::{Error, Result};

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == libm::floor(x)
}

/// `(ln |Γ(x)|, sign Γ(x))`.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if is_pole(x) || x.is_nan() {
        return Err(Error::GammaPole);
    }
    let (v, s) = libm::lgamma_r(x);
    Ok((v, if s < 0 { -1.0 } else { 1.0 }))
}

/// `1 / Γ(x)`, equal to `0` at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    match ln_gamma(x) {
        Ok((v, s)) => s * libm::exp(-v),
        Err(_) => 0.0,
    }
}

/// Stirling correction `ln Γ(z) − [(z − ½) ln z − z + ½ ln 2π]`.
fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln Γ(x + b) − ln Γ(x)` for `x > 0`, `x + b > 0`.
///
/// For large `x` the two log-gammas are huge and nearly equal, so the
/// difference is formed from Stirling's series directly.
pub fn ln_gamma_ratio(x: f64, b: f64) -> Result<f64> {
    if !(x > 0.0 && x + b > 0.0) {
        return Err(Error::InvalidArgument(
            "gamma ratio needs positive arguments",
        ));
    }
    if x.min(x + b) < 20.0 {
        return Ok(libm::lgamma(x + b) - libm::lgamma(x));
    }
    Ok(
        (x - 0.5) * libm::log1p(b / x) + b * libm::log(x + b) - b + stirling_tail(x + b)
            - stirling_tail(x),
    )
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(
            "beta function needs positive arguments",
        ));
    }
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    Ok(libm::lgamma(small) - ln_gamma_ratio(big, small)?)
}

pub fn beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(libm::exp)
}

/// `(x)_m / (y)_m = Π_{j<m} (x + j) / (y + j)` as a running product.
pub fn pochhammer_ratio(x: f64, y: f64, m: u64) -> f64 {
    let mut r = 1.0;
    for j in 0..m {
        let j = j as f64;
        r *= (x + j) / (y + j);
    }
    r
}

/// `H_k = Σ_{j ≤ k} 1/j`.
pub fn harmonic(k: u64) -> f64 {
    (1..=k).rev().map(|j| 1.0 / j as f64).sum()
}
