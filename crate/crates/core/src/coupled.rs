//! The integer processes carried by an elephant path on `D∞`.
//!
//! * `W_n = A_n − B_n` is the classical elephant walk on `Z`.
//! * `S_n` sums the increments `X_k`: `a ↦ +1`, `b ↦ −1` at odd steps and
//!   the opposite at even steps. It coincides with the signed location of
//!   the walker on the Cayley graph.
//! * `S_n = Ξ_n + q·Z̃_n` with `Ξ` a martingale and
//!   `Z̃_n = Σ_{k<n} (−1)^k W_k / k`.
//! * `⟨Ξ⟩_n`, the predictable quadratic variation of `Ξ`, equals
//!   `n − q² Σ_{k<n} W_k² / k²`.

use alloc::vec::Vec;

use crate::sum::Compensated;
use crate::walk::WalkTrace;
use crate::word::{signed_location, Letter};
use crate::{Error, MemoryParams, Result};

/// `X_n`: `+1` for `a` at odd `n` or `b` at even `n`, `−1` otherwise.
pub fn encode_increment(n: u64, g: Letter) -> i64 {
    let odd = n % 2 == 1;
    match (odd, g) {
        (true, Letter::A) | (false, Letter::B) => 1,
        _ => -1,
    }
}

/// `(−1)^n`.
fn alternating(n: u64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One step of the coupled increments. `x = dw` at odd steps and `x = −dw`
/// at even steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepIncrement {
    pub x: i64,
    pub dw: i64,
}

impl StepIncrement {
    pub fn new(n: u64, g: Letter) -> Self {
        let dw = match g {
            Letter::A => 1,
            Letter::B => -1,
        };
        Self {
            x: encode_increment(n, g),
            dw,
        }
    }
}

/// Running record of one path.
///
/// `W` and `S` are exact integers. `Ξ`, `Z̃` and the deficit
/// `Σ (E[ΔS_k | F_{k−1}])²` are double-double accumulators so the pathwise
/// identities can be checked well below the rounding level of an `f64`
/// running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    params: MemoryParams,
    n: u64,
    a: u64,
    b: u64,
    s: i64,
    xi: Compensated,
    ztilde: Compensated,
    qv_deficit: Compensated,
}

impl CoupledState {
    pub fn new(params: MemoryParams) -> Self {
        Self {
            params,
            n: 0,
            a: 0,
            b: 0,
            s: 0,
            xi: Compensated::ZERO,
            ztilde: Compensated::ZERO,
            qv_deficit: Compensated::ZERO,
        }
    }

    /// Resumes from recorded integer values. The martingale accumulators
    /// start from the given reals.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: MemoryParams,
        n: u64,
        a: u64,
        b: u64,
        s: i64,
        xi: f64,
        ztilde: f64,
        qv: f64,
    ) -> Result<Self> {
        if a.checked_add(b) != Some(n) {
            return Err(Error::InconsistentCounts { a, b, n });
        }
        if s.unsigned_abs() > n || s.unsigned_abs() % 2 != n % 2 {
            return Err(Error::InconsistentState(
                "S must satisfy |S| <= n and S = n (mod 2)",
            ));
        }
        if !(xi.is_finite() && ztilde.is_finite() && qv.is_finite()) || qv > n as f64 {
            return Err(Error::InconsistentState(
                "non-finite or oversized martingale parts",
            ));
        }
        Ok(Self {
            params,
            n,
            a,
            b,
            s,
            xi: Compensated::new(xi),
            ztilde: Compensated::new(ztilde),
            qv_deficit: Compensated::new(n as f64 - qv),
        })
    }

    pub fn params(&self) -> &MemoryParams {
        &self.params
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn w(&self) -> i64 {
        self.a as i64 - self.b as i64
    }

    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn xi(&self) -> f64 {
        self.xi.value()
    }

    pub fn ztilde(&self) -> f64 {
        self.ztilde.value()
    }

    /// `⟨Ξ⟩_n`.
    pub fn qv(&self) -> f64 {
        self.n as f64 - self.qv_deficit.value()
    }

    pub fn xi_acc(&self) -> &Compensated {
        &self.xi
    }

    pub fn ztilde_acc(&self) -> &Compensated {
        &self.ztilde
    }

    /// `n − ⟨Ξ⟩_n`, kept separately so it does not drown in the integer
    /// part.
    pub fn qv_deficit(&self) -> &Compensated {
        &self.qv_deficit
    }

    /// `E[ΔS_{n+1} | F_n] = (−1)^n q W_n / n`, and `0` at `n = 0`.
    pub fn drift(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.params.q() * self.ztilde_term()
        }
    }

    /// `(−1)^n W_n / n`, the next term of `Z̃`.
    fn ztilde_term(&self) -> f64 {
        alternating(self.n) * self.w() as f64 / self.n as f64
    }

    /// Applies step `n + 1` with letter `g`.
    pub fn advance(&mut self, g: Letter) -> StepIncrement {
        let next = self.n + 1;
        let inc = StepIncrement::new(next, g);
        let q = self.params.q();
        if self.n > 0 {
            let t = self.ztilde_term();
            self.ztilde.add(t);
            // ξ_{n+1} = ΔS_{n+1} − q t, with the product rounding kept.
            self.xi.add(inc.x as f64);
            self.xi.add_product(-q, t);
            // (q t)² from the exact split q t = d + e.
            let d = q * t;
            let e = libm::fma(q, t, -d);
            self.qv_deficit.add_product(d, d);
            self.qv_deficit.add_product(2.0 * d, e);
        } else {
            self.xi.add(inc.x as f64);
        }
        match g {
            Letter::A => self.a += 1,
            Letter::B => self.b += 1,
        }
        self.s += inc.x;
        self.n = next;
        inc
    }

    /// Value-returning form of [`CoupledState::advance`].
    pub fn advanced(&self, g: Letter) -> Self {
        let mut next = self.clone();
        next.advance(g);
        next
    }

    /// `(P(S_{n+1} = S_n + 1 | F_n), P(S_{n+1} = S_n − 1 | F_n))`.
    pub fn conditional_step_prob(&self) -> Result<(f64, f64)> {
        if self.n == 0 {
            return Err(Error::InvalidArgument(
                "the first step is uniform; n must be at least 1",
            ));
        }
        let up = 0.5 + 0.5 * self.drift();
        Ok((up, 1.0 - up))
    }

    /// Checks the integer invariants: counts, parity and range.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        if self.a + self.b != n {
            return Err(Error::InconsistentCounts {
                a: self.a,
                b: self.b,
                n,
            });
        }
        let (w, s) = (self.w(), self.s);
        if w.unsigned_abs() > n || s.unsigned_abs() > n {
            return Err(Error::InconsistentState("|W| and |S| must not exceed n"));
        }
        if w.unsigned_abs() % 2 != n % 2 || s.unsigned_abs() % 2 != n % 2 {
            return Err(Error::InconsistentState(
                "W and S must have the parity of n",
            ));
        }
        Ok(())
    }

    /// `⟨Ξ⟩_n − (n − q² Σ)` for an independently accumulated
    /// `Σ = Σ_{k<n} W_k² / k²`, evaluated in double-double.
    pub fn qv_residual(&self, sum_sq: &Compensated) -> f64 {
        let q = self.params.q();
        sum_sq.scaled(q).scaled(q).difference(&self.qv_deficit)
    }

    /// `S_n − Ξ_n − q Z̃_n`, evaluated without collapsing the accumulators
    /// first.
    pub fn doob_residual(&self) -> f64 {
        let q = self.params.q();
        let z = &self.ztilde;
        let mut acc = Compensated::new(self.s as f64);
        acc.add(-self.xi.hi());
        acc.add(-self.xi.lo());
        acc.add_product(-q, z.hi());
        acc.add_product(-q, z.lo());
        acc.value()
    }
}

/// Probabilities of the next `S` move given the path so far, from the
/// formula in `W`.
pub fn conditional_step_prob(state: &CoupledState) -> Result<(f64, f64)> {
    state.conditional_step_prob()
}

/// Recovers `W_n` from the signed-location path `S_1..S_n` via
/// `W_n = (−1)^{n−1} S_n + 2 Σ_{k<n} (−1)^{k−1} S_k`.
pub fn reconstruct_w_from_s(path: &[i64]) -> Result<i64> {
    let mut prev = 0i64;
    for (i, &s) in path.iter().enumerate() {
        if (s - prev).abs() != 1 {
            return Err(Error::InvalidIncrement { step: i + 1 });
        }
        prev = s;
    }
    let n = path.len();
    let Some(&last) = path.last() else {
        return Ok(0);
    };
    let sign = |k: usize| if k % 2 == 1 { 1 } else { -1 };
    let head: i64 = path[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &s)| sign(i + 1) * s)
        .sum();
    Ok(sign(n) * last + 2 * head)
}

/// The `S` path `S_0..S_n` obtained from the letters by the increment
/// encoding.
pub fn encoded_path(letters: &[Letter]) -> Vec<i64> {
    let mut out = Vec::with_capacity(letters.len() + 1);
    let mut s = 0;
    out.push(s);
    for (k, &g) in letters.iter().enumerate() {
        s += encode_increment(k as u64 + 1, g);
        out.push(s);
    }
    out
}

/// True iff the signed location of every position in the trace equals the
/// encoded `S` path.
pub fn verify_coupling(trace: &WalkTrace) -> bool {
    let s = encoded_path(&trace.letters);
    trace.positions.len() == s.len()
        && trace
            .positions
            .iter()
            .zip(&s)
            .all(|(w, &s)| signed_location(w) == s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::simulate_walk;
    use crate::word::{GroupWord, Letter::*};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(q: f64) -> MemoryParams {
        MemoryParams::from_q(q).unwrap()
    }

    /// The nine-step path w_1 = a, ..., w_9 = aba.
    const EXAMPLE: [Letter; 9] = [A, B, A, B, B, B, A, A, B];

    #[test]
    fn increment_encoding() {
        assert_eq!(encode_increment(1, A), 1);
        assert_eq!(encode_increment(2, B), 1);
        assert_eq!(encode_increment(2, A), -1);
        assert_eq!(encode_increment(1, B), -1);
        for n in 1..10 {
            for g in [A, B] {
                let inc = StepIncrement::new(n, g);
                let expect = if n % 2 == 1 { inc.dw } else { -inc.dw };
                assert_eq!(inc.x, expect);
            }
        }
    }

    #[test]
    fn first_step_conventions() {
        let mut st = CoupledState::new(q(0.4));
        st.advance(A);
        assert_eq!((st.n(), st.w(), st.s()), (1, 1, 1));
        assert_eq!((st.xi(), st.ztilde(), st.qv()), (1.0, 0.0, 1.0));
    }

    #[test]
    fn example_path() {
        let trace = WalkTrace::from_letters(q(0.0), EXAMPLE.to_vec());
        let s: Vec<i64> = trace.signed_locations().collect();
        assert_eq!(s, [0, 1, 2, 3, 4, 3, 4, 5, 4, 3]);
        assert_eq!(trace.positions[7], "ababa".parse::<GroupWord>().unwrap());
        assert_eq!(trace.positions[8], "baba".parse::<GroupWord>().unwrap());
        assert_eq!(trace.positions[9], "aba".parse::<GroupWord>().unwrap());
        assert!(verify_coupling(&trace));
        // A_9 = 4 and B_9 = 5.
        assert_eq!(reconstruct_w_from_s(&s[1..]).unwrap(), -1);
    }

    #[test]
    fn w_reconstruction_examples() {
        assert_eq!(reconstruct_w_from_s(&[1]).unwrap(), 1);
        assert_eq!(reconstruct_w_from_s(&[1, 2]).unwrap(), 0);
        assert_eq!(reconstruct_w_from_s(&[]).unwrap(), 0);
        assert_eq!(
            reconstruct_w_from_s(&[1, 3]),
            Err(Error::InvalidIncrement { step: 2 })
        );
        assert_eq!(
            reconstruct_w_from_s(&[0]),
            Err(Error::InvalidIncrement { step: 1 })
        );
    }

    #[test]
    fn step_probability_examples() {
        let st = CoupledState::new(q(0.0)).advanced(A).advanced(B);
        assert_eq!(st.conditional_step_prob().unwrap(), (0.5, 0.5));

        let st = CoupledState::new(q(0.5)).advanced(A);
        assert_eq!(st.conditional_step_prob().unwrap(), (0.25, 0.75));

        // q = -1 with W = n saturates at 0 or 1.
        let mut st = CoupledState::new(q(-1.0));
        st.advance(A);
        assert_eq!(st.conditional_step_prob().unwrap(), (1.0, 0.0));
        let st = CoupledState::from_parts(q(-1.0), 2, 2, 0, 0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(st.conditional_step_prob().unwrap(), (0.0, 1.0));

        assert!(CoupledState::new(q(0.2)).conditional_step_prob().is_err());
    }

    #[test]
    fn step_probability_matches_empirical_continuations() {
        // Prefix g_1 = a at q = 0.5: S moves up with probability 1/4.
        let params = q(0.5);
        let prefix = CoupledState::new(params).advanced(A);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let reps = 1_000_000;
        let mut up = 0usize;
        for _ in 0..reps {
            let g = crate::walk::sample_next_letter(1, 0, 1, &params, &mut rng).unwrap();
            if prefix.advanced(g).s() > prefix.s() {
                up += 1;
            }
        }
        let freq = up as f64 / reps as f64;
        let sd = (0.25f64 * 0.75 / reps as f64).sqrt();
        assert!((freq - 0.25).abs() < 5.0 * sd, "freq = {freq}");
    }

    #[test]
    fn from_parts_validation() {
        assert!(CoupledState::from_parts(q(0.0), 3, 1, 1, 1, 0.0, 0.0, 3.0).is_err());
        assert!(CoupledState::from_parts(q(0.0), 3, 2, 1, 2, 0.0, 0.0, 3.0).is_err());
        assert!(CoupledState::from_parts(q(0.0), 3, 2, 1, 5, 0.0, 0.0, 3.0).is_err());
        assert!(CoupledState::from_parts(q(0.0), 3, 2, 1, 1, f64::NAN, 0.0, 3.0).is_err());
        assert!(CoupledState::from_parts(q(0.0), 3, 2, 1, -1, 0.0, 0.0, 3.0).is_ok());
    }

    #[test]
    fn memoryless_case_is_pure_martingale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trace = simulate_walk(q(0.0), 2000, &mut rng).unwrap();
        let mut st = CoupledState::new(q(0.0));
        for &g in &trace.letters {
            st.advance(g);
            assert_eq!(st.xi(), st.s() as f64);
            assert_eq!(st.qv(), st.n() as f64);
        }
    }

    #[test]
    fn pathwise_identities_along_simulated_paths() {
        for (seed, qq) in [
            (1u64, -1.0),
            (2, -0.5),
            (3, 0.3),
            (4, 0.5),
            (5, 0.8),
            (6, 0.99),
        ] {
            let params = q(qq);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace = simulate_walk(params, 20_000, &mut rng).unwrap();
            assert!(verify_coupling(&trace));
            let mut st = CoupledState::new(params);
            let mut sq = Compensated::ZERO;
            let mut s_path = Vec::new();
            for (k, &g) in trace.letters.iter().enumerate() {
                if st.n() > 0 {
                    let r = st.w() as f64 / st.n() as f64;
                    sq.add_product(r, r);
                }
                let (prev_drift, prev_xi, prev_s) = (st.drift(), st.xi(), st.s());
                st.advance(g);
                st.check_invariants().unwrap();
                s_path.push(st.s());
                let xi_step = st.xi() - prev_xi;
                assert!(xi_step.abs() <= 2.0);
                assert!((xi_step - (st.s() - prev_s) as f64 + prev_drift).abs() < 1e-9);
                assert!(st.doob_residual().abs() <= 1e-12);
                let qv_residual = st.qv_residual(&sq);
                assert!(qv_residual.abs() <= 1e-12, "{qv_residual}");
                assert_eq!(st.s(), signed_location(&trace.positions[k + 1]));
            }
            assert_eq!(reconstruct_w_from_s(&s_path).unwrap(), st.w());
        }
    }
}
