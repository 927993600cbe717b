//! Exhaustive enumeration of all `2^n` letter sequences.
//!
//! Each sequence is weighted by the product of its step probabilities. The
//! traversal is depth-first and carries the word, the counts and the
//! partial sums, so memory stays linear in `n`. Every node is also checked
//! for the group/integer coupling and for the martingale property of `Ξ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::coupled::encode_increment;
use crate::sum::Compensated;
use crate::word::{signed_location, GroupWord, Letter};
use crate::{Error, MemoryParams, Result};

/// Largest horizon accepted by [`enumerate_exact`].
pub const MAX_HORIZON: u32 = 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovEntry {
    pub k: u32,
    pub l: u32,
    pub value: f64,
}

/// Exact moments at horizon `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub n: u32,
    pub q: f64,
    pub prob_sum: f64,
    /// `E[W_n²]`.
    pub e_w2: f64,
    pub e_s: f64,
    pub e_s2: f64,
    /// `E[Z̃_{n+1}²]`.
    pub e_ztilde2: f64,
    /// `E[W_k²]` for `k = 1..=n`.
    pub w2_by_step: Vec<f64>,
    /// `E[Z̃_{k+1}²]` for `k = 1..=n`.
    pub ztilde2_by_step: Vec<f64>,
    /// `P(S_n = s)` at index `s + n`.
    pub s_distribution: Vec<f64>,
    pub cov: Vec<CovEntry>,
    pub coupling_ok: bool,
    /// Largest `|E[ξ_{k+1} | F_k]|` over all nodes with `1 ≤ k < n`.
    pub max_martingale_defect: f64,
}

struct Walker<'a> {
    n: u32,
    p: f64,
    q: f64,
    pairs: &'a [(u32, u32)],
    word: GroupWord,
    w_path: Vec<i64>,
    prob_sum: Compensated,
    w2: Vec<Compensated>,
    z2: Vec<Compensated>,
    s1: Compensated,
    s2: Compensated,
    s_dist: Vec<Compensated>,
    cov: Vec<Compensated>,
    coupling_ok: bool,
    defect: f64,
}

impl Walker<'_> {
    /// Visits the node reached after `depth` steps.
    fn visit(&mut self, depth: u32, a: u64, s: i64, z: f64, prob: f64) {
        let w = 2 * a as i64 - depth as i64;
        if signed_location(&self.word) != s {
            self.coupling_ok = false;
        }
        let sign = if depth % 2 == 0 { 1.0 } else { -1.0 };
        // Z̃_{depth+1}; the sum is empty up to the first step.
        let z_next = if depth == 0 {
            0.0
        } else {
            z + sign * w as f64 / depth as f64
        };
        if depth > 0 {
            let d = depth as usize - 1;
            self.w_path[d] = w;
            let wf = w as f64;
            self.w2[d].add(prob * wf * wf);
            self.z2[d].add(prob * z_next * z_next);
            for (idx, &(k, l)) in self.pairs.iter().enumerate() {
                if l == depth {
                    let wk = self.w_path[k as usize - 1] as f64;
                    self.cov[idx].add(prob * wk * wf);
                }
            }
        }
        if depth == self.n {
            self.prob_sum.add(prob);
            let sf = s as f64;
            self.s1.add(prob * sf);
            self.s2.add(prob * sf * sf);
            self.s_dist[(s + self.n as i64) as usize].add(prob);
            return;
        }

        let (pa, drift) = if depth == 0 {
            (0.5, 0.0)
        } else {
            let nf = depth as f64;
            let b = depth as u64 - a;
            let pa = (self.p * a as f64 + (1.0 - self.p) * b as f64) / nf;
            (pa, self.q * sign * w as f64 / nf)
        };
        let next = depth + 1;
        let mut mean_xi = 0.0;
        for (g, pg) in [(Letter::A, pa), (Letter::B, 1.0 - pa)] {
            let x = encode_increment(next as u64, g);
            mean_xi += pg * (x as f64 - drift);
            self.word.left_multiply(g);
            let a_next = if g == Letter::A { a + 1 } else { a };
            self.visit(next, a_next, s + x, z_next, prob * pg);
            self.word.left_multiply(g);
        }
        if depth > 0 {
            self.defect = self.defect.max(mean_xi.abs());
        }
    }
}

pub fn enumerate_exact(n: u32, params: &MemoryParams) -> Result<EnumerationResult> {
    enumerate_exact_with_pairs(n, params, &[])
}

/// As [`enumerate_exact`], also computing `E[W_k W_l]` for each requested
/// pair `1 ≤ k ≤ l ≤ n`.
pub fn enumerate_exact_with_pairs(
    n: u32,
    params: &MemoryParams,
    pairs: &[(u32, u32)],
) -> Result<EnumerationResult> {
    if n > MAX_HORIZON {
        return Err(Error::HorizonTooLarge(n));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1"));
    }
    let pairs: Vec<(u32, u32)> = pairs
        .iter()
        .map(|&(k, l)| if k <= l { (k, l) } else { (l, k) })
        .collect();
    if pairs.iter().any(|&(k, l)| k == 0 || l > n) {
        return Err(Error::InvalidArgument(
            "covariance indices must lie in 1..=n",
        ));
    }
    let len = n as usize;
    let mut walker = Walker {
        n,
        p: params.p(),
        q: params.q(),
        pairs: &pairs,
        word: GroupWord::identity(),
        w_path: vec![0; len],
        prob_sum: Compensated::ZERO,
        w2: vec![Compensated::ZERO; len],
        z2: vec![Compensated::ZERO; len],
        s1: Compensated::ZERO,
        s2: Compensated::ZERO,
        s_dist: vec![Compensated::ZERO; 2 * len + 1],
        cov: vec![Compensated::ZERO; pairs.len()],
        coupling_ok: true,
        defect: 0.0,
    };
    walker.visit(0, 0, 0, 0.0, 1.0);

    let values = |v: &[Compensated]| v.iter().map(Compensated::value).collect::<Vec<_>>();
    let w2_by_step = values(&walker.w2);
    let ztilde2_by_step = values(&walker.z2);
    Ok(EnumerationResult {
        n,
        q: params.q(),
        prob_sum: walker.prob_sum.value(),
        e_w2: w2_by_step[len - 1],
        e_s: walker.s1.value(),
        e_s2: walker.s2.value(),
        e_ztilde2: ztilde2_by_step[len - 1],
        w2_by_step,
        ztilde2_by_step,
        s_distribution: values(&walker.s_dist),
        cov: pairs
            .iter()
            .zip(&walker.cov)
            .map(|(&(k, l), c)| CovEntry {
                k,
                l,
                value: c.value(),
            })
            .collect(),
        coupling_ok: walker.coupling_ok,
        max_martingale_defect: walker.defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{cov_w, h, var_ztilde_exact};

    fn q(q: f64) -> MemoryParams {
        MemoryParams::from_q(q).unwrap()
    }

    #[test]
    fn three_steps_at_critical_memory() {
        let r = enumerate_exact(3, &MemoryParams::from_p(0.75).unwrap()).unwrap();
        assert!((r.e_w2 - 5.5).abs() < 1e-12);
        assert!(r.coupling_ok);
    }

    #[test]
    fn two_step_moments() {
        for qq in [-1.0, -0.5, 0.0, 0.3, 0.5, 0.8] {
            let r = enumerate_exact_with_pairs(2, &q(qq), &[(1, 2)]).unwrap();
            assert!((r.w2_by_step[1] - (2.0 + 2.0 * qq)).abs() < 1e-15);
            assert!((r.cov[0].value - (1.0 + qq)).abs() < 1e-15);
            assert!((r.e_ztilde2 - (1.0 - qq) / 2.0).abs() < 1e-15);
            assert_eq!(r.ztilde2_by_step[0], 1.0);
        }
    }

    #[test]
    fn matches_closed_forms() {
        for qq in [-1.0, -0.5, 0.0, 0.3, 0.5, 0.8] {
            let r = enumerate_exact_with_pairs(12, &q(qq), &[(3, 7), (5, 12), (9, 4)]).unwrap();
            assert!((r.prob_sum - 1.0).abs() <= 1e-12);
            assert!(r.e_s.abs() < 1e-14);
            assert!(r.coupling_ok);
            assert!(r.max_martingale_defect < 1e-14);
            for k in 1..=12u64 {
                let idx = k as usize - 1;
                assert!((r.w2_by_step[idx] - h(k, qq).unwrap()).abs() <= 1e-10);
                let v = var_ztilde_exact(k, qq).unwrap();
                assert!((r.ztilde2_by_step[idx] - v).abs() <= 1e-10);
            }
            for c in &r.cov {
                let exact = cov_w(c.k as u64, c.l as u64, qq).unwrap();
                assert!((c.value - exact).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn memoryless_walk_is_binomial() {
        for n in [1u32, 5, 14] {
            let r = enumerate_exact(n, &MemoryParams::from_p(0.5).unwrap()).unwrap();
            assert_eq!(r.e_s2, n as f64);
            let mut binom = 1.0f64;
            let total = libm::pow(2.0, n as f64);
            for j in 0..=n {
                let s = 2 * j as i64 - n as i64;
                assert_eq!(r.s_distribution[(s + n as i64) as usize], binom / total);
                binom = binom * (n - j) as f64 / (j + 1) as f64;
            }
        }
    }

    #[test]
    fn full_memory_freezes() {
        let r = enumerate_exact(9, &MemoryParams::from_p(1.0).unwrap()).unwrap();
        assert_eq!(r.e_w2, 81.0);
        assert!((r.prob_sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        assert_eq!(
            enumerate_exact(23, &q(0.0)),
            Err(Error::HorizonTooLarge(23))
        );
        assert!(enumerate_exact(0, &q(0.0)).is_err());
        assert!(enumerate_exact_with_pairs(4, &q(0.0), &[(0, 2)]).is_err());
        assert!(enumerate_exact_with_pairs(4, &q(0.0), &[(2, 5)]).is_err());
    }
}
