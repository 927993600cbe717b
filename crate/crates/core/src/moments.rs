//! Exact second moments of the coupled walk `W`.
//!
//! `H(k, q) = E[W_k²]` obeys the one-step identity
//! `H_{k+1} = (1 + 2q/k) H_k + 1` with `H_1 = 1`, which is what
//! [`h`] iterates. Covariances follow from `E[W_l | F_k] = W_k (k+q)_{l−k} / (k)_{l−k}`.

use alloc::vec::Vec;

use crate::params::check_q;
use crate::quadrature::Tolerance;
use crate::special::{harmonic, ln_beta, ln_gamma, ln_gamma_ratio, pochhammer_ratio};
use crate::sum::Compensated;
use crate::variance::{j1, j2};
use crate::{Error, Result};

fn check_index(k: u64) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidArgument("index must be at least 1"))
    } else {
        Ok(())
    }
}

/// `H_1, …, H_n`.
pub fn h_sequence(n: u64, q: f64) -> Result<Vec<f64>> {
    check_index(n)?;
    check_q(q)?;
    let mut out = Vec::with_capacity(n as usize);
    let mut hk = 1.0;
    out.push(hk);
    for k in 1..n {
        hk = (1.0 + 2.0 * q / k as f64) * hk + 1.0;
        out.push(hk);
    }
    Ok(out)
}

/// `H(k, q) = E[W_k²]` by the recursion.
pub fn h(k: u64, q: f64) -> Result<f64> {
    check_index(k)?;
    check_q(q)?;
    let mut hk = 1.0;
    for j in 1..k {
        hk = (1.0 + 2.0 * q / j as f64) * hk + 1.0;
    }
    Ok(hk)
}

/// Gamma-ratio form `k/(2q−1) · (Γ(k+2q) / (Γ(2q) Γ(k+1)) − 1)`, or
/// `k · Σ_{j≤k} 1/j` at `q = 1/2`. `None` when `2q` is a non-positive
/// integer, where the ratio meets a pole.
pub fn h_closed_form(k: u64, q: f64) -> Option<f64> {
    if k == 0 || check_q(q).is_err() {
        return None;
    }
    let kf = k as f64;
    if q == 0.5 {
        return Some(kf * harmonic(k));
    }
    let (num, s_num) = ln_gamma(kf + 2.0 * q).ok()?;
    let (den, s_den) = ln_gamma(2.0 * q).ok()?;
    let ratio = s_num * s_den * libm::exp(num - den - libm::lgamma(kf + 1.0));
    Some(kf / (2.0 * q - 1.0) * (ratio - 1.0))
}

/// `I(k, q) = Γ(k+1) / (Γ(k+q) Γ(1−q))`, with `1/Γ(0) = 0` at `k + q = 0`.
pub fn i_factor(k: u64, q: f64) -> Result<f64> {
    check_index(k)?;
    check_q(q)?;
    let kf = k as f64;
    if kf + q == 0.0 {
        return Ok(0.0);
    }
    Ok(libm::exp(
        ln_gamma_ratio(kf + q, 1.0 - q)? - libm::lgamma(1.0 - q),
    ))
}

/// `E[W_k W_l]`.
pub fn cov_w(k: u64, l: u64, q: f64) -> Result<f64> {
    let (k, l) = if k <= l { (k, l) } else { (l, k) };
    check_index(k)?;
    let hk = h(k, q)?;
    let kf = k as f64;
    Ok(pochhammer_ratio(kf + q, kf, l - k) * hk)
}

/// `E[Z̃_{n+1}²]` with `Z̃_{n+1} = Σ_{k≤n} (−1)^k W_k / k`.
///
/// Writes the inner alternating sum as `2 G_k − 1` with
/// `G_k = Σ_{l=0}^{n−k} (−1)^l (k+q)_l / (k+1)_l`, which satisfies
/// `G_k = 1 − (k+q)/(k+1) · G_{k+1}` and `G_n = 1`. Linear in `n`.
pub fn var_ztilde_exact(n: u64, q: f64) -> Result<f64> {
    let hs = h_sequence(n, q)?;
    let mut acc = Compensated::ZERO;
    let mut g = 1.0;
    for k in (1..=n).rev() {
        let kf = k as f64;
        if k < n {
            g = 1.0 - (kf + q) / (kf + 1.0) * g;
        }
        acc.add(hs[k as usize - 1] / (kf * kf) * (2.0 * g - 1.0));
    }
    Ok(acc.value())
}

/// The same quantity as [`var_ztilde_exact`] by the literal double sum,
/// quadratic in `n`.
pub fn var_ztilde_double_sum(n: u64, q: f64) -> Result<f64> {
    let hs = h_sequence(n, q)?;
    let mut acc = Compensated::ZERO;
    for k in 1..=n {
        let kf = k as f64;
        let mut inner = Compensated::new(1.0);
        let mut ratio = 1.0;
        for l in 1..=(n - k) {
            let j = (l - 1) as f64;
            ratio *= (kf + q + j) / (kf + 1.0 + j);
            inner.add(if l % 2 == 1 {
                -2.0 * ratio
            } else {
                2.0 * ratio
            });
        }
        acc.add(hs[k as usize - 1] / (kf * kf) * inner.value());
    }
    Ok(acc.value())
}

/// Normalizer `r_n` for `W_n`: `√n` for `p < 3/4`, `√(n / ln n)` at
/// `p = 3/4`, `n^{2(1−p)}` above.
pub fn r_norm(n: f64, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(if p == 1.0 {
            Error::DegenerateMemory(1.0)
        } else {
            Error::MemoryParameter(p)
        });
    }
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidArgument("n must be a finite value >= 1"));
    }
    if p < 0.75 {
        Ok(libm::sqrt(n))
    } else if p == 0.75 {
        if n <= 1.0 {
            return Err(Error::InvalidArgument(
                "the critical normalizer needs n > 1",
            ));
        }
        Ok(libm::sqrt(n / libm::log(n)))
    } else {
        Ok(libm::pow(n, 2.0 * (1.0 - p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub k: u64,
    pub h: f64,
    pub i: f64,
    pub a: f64,
}

/// `H_k`, `I_k` and `a_k = H_k I_k / k²` for `k = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub q: f64,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn new(q: f64, n_max: u64) -> Result<Self> {
        let hs = h_sequence(n_max, q)?;
        let rows = hs
            .into_iter()
            .enumerate()
            .map(|(idx, h)| {
                let k = idx as u64 + 1;
                let i = i_factor(k, q)?;
                let kf = k as f64;
                Ok(MomentRow {
                    k,
                    h,
                    i,
                    a: h * i / (kf * kf),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `Σ_{k≤n} (−1)^{n−k} a_k`.
    pub fn alternating_sum(&self) -> f64 {
        let n = self.rows.len();
        let mut acc = Compensated::ZERO;
        for (idx, row) in self.rows.iter().enumerate() {
            let sign = if (n - 1 - idx) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * row.a);
        }
        acc.value()
    }

    pub fn abs_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.a.abs())
            .sum::<Compensated>()
            .value()
    }
}

/// The two parts of `E[Z̃_{n+1}²] = T1 + 2 T2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TSplit {
    pub t1: f64,
    pub t2: f64,
    /// `Σ_{k≤n} (−1)^{n−k} a_k`.
    pub alternating: f64,
    pub j2: f64,
    /// Quadrature error carried into `T1 + 2 T2`.
    pub abs_err: f64,
}

impl TSplit {
    pub fn total(&self) -> f64 {
        self.t1 + 2.0 * self.t2
    }
}

/// `a_k · J1(k, q)`. At `k + q = 0` the factor `I` vanishes while `J1`
/// diverges; the product tends to `Γ(k+1) / Γ(1−q)`.
fn t1_term(row: &MomentRow, q: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let kf = row.k as f64;
    if kf + q == 0.0 {
        let lim = libm::exp(libm::lgamma(kf + 1.0) - libm::lgamma(1.0 - q));
        return Ok((row.h * lim / (kf * kf), 0.0));
    }
    let r = j1(row.k, q, tol)?;
    Ok((row.a * r.value, row.a.abs() * r.abs_err_estimate))
}

/// `T1 = Σ_{k≤n} a_k J1(k, q)`.
pub fn t1(n: u64, q: f64, tol: Tolerance) -> Result<f64> {
    let table = MomentTable::new(q, n)?;
    t1_from_table(&table, tol).map(|(v, _)| v)
}

fn t1_from_table(table: &MomentTable, tol: Tolerance) -> Result<(f64, f64)> {
    let mut acc = Compensated::ZERO;
    let mut err = 0.0;
    for row in &table.rows {
        let (v, e) = t1_term(row, table.q, tol)?;
        acc.add(v);
        err += e;
    }
    Ok((acc.value(), err))
}

/// `T2 = J2(n, q) · Σ_{k≤n} (−1)^{n−k} a_k`.
pub fn t2(n: u64, q: f64, tol: Tolerance) -> Result<f64> {
    let table = MomentTable::new(q, n)?;
    let r = j2(n, q, tol)?;
    Ok(r.value * table.alternating_sum())
}

pub fn t_split(n: u64, q: f64, tol: Tolerance) -> Result<TSplit> {
    let table = MomentTable::new(q, n)?;
    let (t1, e1) = t1_from_table(&table, tol)?;
    let r = j2(n, q, tol)?;
    let alternating = table.alternating_sum();
    Ok(TSplit {
        t1,
        t2: r.value * alternating,
        alternating,
        j2: r.value,
        abs_err: e1 + 2.0 * alternating.abs() * r.abs_err_estimate,
    })
}

/// `B(n+q+1, 1−q) · Σ_{k≤n} |a_k|`, an upper bound for `|T2|`.
pub fn t2_beta_bound(n: u64, q: f64) -> Result<f64> {
    let table = MomentTable::new(q, n)?;
    let nf = n as f64;
    Ok(libm::exp(ln_beta(nf + q + 1.0, 1.0 - q)?) * table.abs_sum())
}
