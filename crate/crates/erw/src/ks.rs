//! One-sample Kolmogorov–Smirnov test against the standard normal law.

use serde::Serialize;

use crate::{HarnessError, Result};

/// Fewest samples for which the asymptotic critical values are used.
pub const MIN_SAMPLES: usize = 100;

/// Asymptotic critical constants `c(α)`; the threshold is `c(α)/√R`.
const CRITICAL: [(f64, f64); 4] = [(0.10, 1.224), (0.05, 1.358), (0.01, 1.628), (0.001, 1.949)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
}

pub fn critical_constant(alpha: f64) -> Result<f64> {
    CRITICAL
        .iter()
        .find(|(a, _)| *a == alpha)
        .map(|&(_, c)| c)
        .ok_or(HarnessError::UnsupportedAlpha(alpha))
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_R(x) − Φ(x)|`.
pub fn ks_statistic(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(HarnessError::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let r = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i as f64 + 1.0) / r - f).max(f - i as f64 / r);
    }
    Ok(d)
}

pub fn ks_normal_test(samples: &[f64], alpha: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(HarnessError::EmptySample);
    }
    if samples.len() < MIN_SAMPLES {
        return Err(HarnessError::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let c = critical_constant(alpha)?;
    let statistic = ks_statistic(samples)?;
    let threshold = c / (samples.len() as f64).sqrt();
    Ok(KsResult {
        statistic,
        threshold,
        pass: statistic < threshold,
        samples: samples.len(),
    })
}

/// `(s + v) / √n` with `v` uniform on `(−1, 1)`.
///
/// `S_n` lives on a lattice of spacing 2, and its atoms alone put the
/// distance from `Φ` at about `φ(0)/√n`. Spreading each atom over its cell
/// keeps the first two moments up to `1/(3n)` and removes that artefact.
pub fn jittered(s: i64, n: u64, uniform01: f64) -> f64 {
    (s as f64 + 2.0 * uniform01 - 1.0) / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_fails() {
        let r = ks_normal_test(&vec![0.0; 1000], 0.01).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn refuses_small_or_empty_samples() {
        assert!(matches!(
            ks_normal_test(&[], 0.01),
            Err(HarnessError::EmptySample)
        ));
        assert!(matches!(
            ks_normal_test(&[0.1; 99], 0.01),
            Err(HarnessError::TooFewSamples { .. })
        ));
        assert!(matches!(
            ks_normal_test(&[0.1; 200], 0.2),
            Err(HarnessError::UnsupportedAlpha(_))
        ));
    }

    #[test]
    fn calibration_on_exact_normals() {
        let mut passes = 0;
        for rep in 0..100 {
            let mut rng = replication_rng(2024, rep);
            let xs: Vec<f64> = (0..10_000)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let r = ks_normal_test(&xs, 0.01).unwrap();
            assert!((0.0..=1.0).contains(&r.statistic));
            if r.pass {
                passes += 1;
            }
        }
        assert!(passes >= 95, "{passes} of 100");
    }

    #[test]
    fn shifted_sample_is_rejected() {
        let mut rng = replication_rng(5, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| 0.1 + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        assert!(!ks_normal_test(&xs, 0.01).unwrap().pass);
    }

    #[test]
    fn jitter_stays_in_cell() {
        assert_eq!(jittered(3, 1, 0.5), 3.0);
        assert_eq!(jittered(0, 4, 0.0), -0.5);
    }
}
