//! The elephant step dynamics.
//!
//! Given `A_n` a-steps and `B_n` b-steps among the first `n`, the next
//! letter is `a` with probability `(p·A_n + (1 − p)·B_n) / n`. This is the
//! law obtained by remembering a uniform past step and repeating it with
//! probability `p`, but it needs only the two counts. The first letter is
//! uniform on `{a, b}`.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::word::{signed_location, GroupWord, Letter};
use crate::{Error, MemoryParams, Result};

/// A uniform draw from `[0, 1)` with 53 random bits.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Probability that step `n + 1` is `a`, for `n ≥ 1`.
pub fn prob_next_a(a: u64, b: u64, n: u64, params: &MemoryParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "n must be at least 1; the first step is uniform",
        ));
    }
    if a.checked_add(b) != Some(n) {
        return Err(Error::InconsistentCounts { a, b, n });
    }
    let p = params.p();
    Ok((p * a as f64 + (1.0 - p) * b as f64) / n as f64)
}

pub fn sample_next_letter<R: RngCore + ?Sized>(
    a: u64,
    b: u64,
    n: u64,
    params: &MemoryParams,
    rng: &mut R,
) -> Result<Letter> {
    let pa = prob_next_a(a, b, n, params)?;
    Ok(if uniform01(rng) < pa {
        Letter::A
    } else {
        Letter::B
    })
}

pub fn sample_first_letter<R: RngCore + ?Sized>(rng: &mut R) -> Letter {
    if uniform01(rng) < 0.5 {
        Letter::A
    } else {
        Letter::B
    }
}

/// Streaming sampler that only keeps the letter counts.
#[derive(Debug, Clone)]
pub struct ElephantSampler {
    params: MemoryParams,
    a: u64,
    b: u64,
}

impl ElephantSampler {
    pub fn new(params: MemoryParams) -> Self {
        Self { params, a: 0, b: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.a + self.b
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    pub fn next_letter<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Letter {
        let n = self.a + self.b;
        let g = if n == 0 {
            sample_first_letter(rng)
        } else {
            let p = self.params.p();
            let weight = p * self.a as f64 + (1.0 - p) * self.b as f64;
            if uniform01(rng) * (n as f64) < weight {
                Letter::A
            } else {
                Letter::B
            }
        };
        match g {
            Letter::A => self.a += 1,
            Letter::B => self.b += 1,
        }
        g
    }
}

/// A sampled path: the letters `g_1..g_n` and the positions `w_0..w_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    pub params: MemoryParams,
    pub letters: Vec<Letter>,
    pub positions: Vec<GroupWord>,
}

impl WalkTrace {
    /// Builds the trace of a fixed letter sequence, e.g. for replaying a
    /// recorded path.
    pub fn from_letters(params: MemoryParams, letters: Vec<Letter>) -> Self {
        let mut positions = Vec::with_capacity(letters.len() + 1);
        let mut w = GroupWord::identity();
        positions.push(w.clone());
        for &g in &letters {
            w.left_multiply(g);
            positions.push(w.clone());
        }
        Self {
            params,
            letters,
            positions,
        }
    }

    pub fn steps(&self) -> usize {
        self.letters.len()
    }

    /// `Δ_k`, the distance from the identity, for `k = 0..=n`.
    pub fn distances(&self) -> impl Iterator<Item = u64> + '_ {
        self.positions.iter().map(|w| w.len() as u64)
    }

    /// Signed locations `Δ^{(s)}_k` for `k = 0..=n`.
    pub fn signed_locations(&self) -> impl Iterator<Item = i64> + '_ {
        self.positions.iter().map(signed_location)
    }
}

pub fn simulate_walk<R: RngCore + ?Sized>(
    params: MemoryParams,
    steps: usize,
    rng: &mut R,
) -> Result<WalkTrace> {
    if steps == 0 {
        return Err(Error::InvalidArgument("a walk needs at least one step"));
    }
    let mut sampler = ElephantSampler::new(params);
    let letters = (0..steps).map(|_| sampler.next_letter(rng)).collect();
    Ok(WalkTrace::from_letters(params, letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(p: f64) -> MemoryParams {
        MemoryParams::from_p(p).unwrap()
    }

    #[test]
    fn probability_examples() {
        assert_eq!(prob_next_a(5, 0, 5, &params(1.0)).unwrap(), 1.0);
        assert_eq!(prob_next_a(3, 4, 7, &params(0.5)).unwrap(), 0.5);
        let pa = prob_next_a(2, 1, 3, &params(0.75)).unwrap();
        assert!((pa - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_counts() {
        assert_eq!(
            prob_next_a(2, 2, 3, &params(0.5)),
            Err(Error::InconsistentCounts { a: 2, b: 2, n: 3 })
        );
        assert!(prob_next_a(0, 0, 0, &params(0.5)).is_err());
    }

    #[test]
    fn empirical_frequency_matches_seven_twelfths() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = params(0.75);
        let draws = 1_000_000;
        let hits = (0..draws)
            .filter(|_| sample_next_letter(2, 1, 3, &p, &mut rng).unwrap() == Letter::A)
            .count();
        let freq = hits as f64 / draws as f64;
        let sd = (7.0 / 12.0 * 5.0 / 12.0 / draws as f64).sqrt();
        assert!((freq - 7.0 / 12.0).abs() < 5.0 * sd, "freq = {freq}");
    }

    #[test]
    fn full_memory_alternates_between_zero_and_one() {
        for seed in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace = simulate_walk(params(1.0), 50, &mut rng).unwrap();
            for (k, d) in trace.distances().enumerate() {
                assert_eq!(d, (k % 2) as u64);
            }
        }
    }

    #[test]
    fn trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trace = simulate_walk(params(0.3), 500, &mut rng).unwrap();
        assert!(trace.positions[0].is_identity());
        for k in 1..=trace.steps() {
            let mut expect = trace.positions[k - 1].clone();
            expect.left_multiply(trace.letters[k - 1]);
            assert_eq!(trace.positions[k], expect);
            assert_eq!(
                trace.positions[k]
                    .len()
                    .abs_diff(trace.positions[k - 1].len()),
                1
            );
        }
    }

    #[test]
    fn first_step_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let a = (0..n)
            .filter(|_| simulate_walk(params(0.9), 1, &mut rng).unwrap().letters[0] == Letter::A)
            .count();
        let z = (a as f64 - n as f64 / 2.0) / (n as f64 / 4.0).sqrt();
        assert!(z.abs() < 5.0, "z = {z}");
        assert!(simulate_walk(params(0.9), 0, &mut rng).is_err());
    }

    #[test]
    fn memoryless_walk_has_binomial_marginals() {
        // At p = 1/2 the signed location is a simple symmetric walk.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 16;
        let reps = 40_000;
        let mut counts = [0usize; 17];
        for _ in 0..reps {
            let trace = simulate_walk(params(0.5), n, &mut rng).unwrap();
            let s = *trace.signed_locations().collect::<Vec<_>>().last().unwrap();
            counts[((s + n as i64) / 2) as usize] += 1;
        }
        let mut binom = 1.0f64;
        for (j, &c) in counts.iter().enumerate() {
            let prob = binom / 65536.0;
            let expected = prob * reps as f64;
            let sd = (reps as f64 * prob * (1.0 - prob)).sqrt();
            assert!((c as f64 - expected).abs() < 5.0 * sd + 1.0, "j = {j}");
            binom = binom * (n - j) as f64 / (j + 1) as f64;
        }
    }
}
