//! Path statistics for the almost-sure limit laws and decay-rate fits.

use std::collections::BTreeMap;

use erw_core::moments::{t_split, MomentTable};
use erw_core::quadrature::Tolerance;
use erw_core::walk::ElephantSampler;
use erw_core::MemoryParams;
use serde::Serialize;

use crate::experiment::{
    run_paths, run_replications, w_scale, ExperimentConfig, PathOptions, ReplicationSummary,
    TestRecord, LIL_START,
};
use crate::summary::{RunningStats, StatSummary};
use crate::{HarnessError, Result};

/// Loose band for the LIL envelope at desk scale.
pub const LIL_BAND: (f64, f64) = (0.5, 1.5);

/// `(1 / ln n) Σ_{k≤n} S_k² / k²` for the path `S_1..S_n`.
pub fn qsl_statistic(path: &[i64]) -> Result<f64> {
    let n = path.len();
    if n < 2 {
        return Err(HarnessError::Config(
            "the QSL statistic needs a path of length >= 2".into(),
        ));
    }
    let sum: f64 = path
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let r = s as f64 / (i + 1) as f64;
            r * r
        })
        .sum();
    Ok(sum / (n as f64).ln())
}

/// `max_k ±S_k / √(2k ln ln k)` over `k ≥ from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LilEnvelope {
    pub pos: f64,
    pub neg: f64,
}

impl LilEnvelope {
    /// True when either sign leaves `band`.
    pub fn flagged(&self, band: (f64, f64)) -> bool {
        let inside = |x: f64| x >= band.0 && x <= band.1;
        !(inside(self.pos) && inside(self.neg))
    }
}

/// Envelope of the path `S_1..S_n`, scanned from time `from` (at least 3,
/// where `ln ln k > 0`).
pub fn lil_envelope(path: &[i64], from: u64) -> Result<LilEnvelope> {
    let from = from.max(3);
    if (path.len() as u64) < from {
        return Err(HarnessError::Config(
            "path is shorter than the LIL start time".into(),
        ));
    }
    let mut env = LilEnvelope {
        pos: f64::NEG_INFINITY,
        neg: f64::NEG_INFINITY,
    };
    for (i, &s) in path.iter().enumerate().skip(from as usize - 1) {
        let k = (i + 1) as f64;
        let ratio = s as f64 / (2.0 * k * k.ln().ln()).sqrt();
        env.pos = env.pos.max(ratio);
        env.neg = env.neg.max(-ratio);
    }
    Ok(env)
}

/// Per-path LIL envelopes for both signs over `k ∈ [100, n]`.
///
/// The gated statistic for each sign is the cross-path mean of the
/// per-path maxima, which must fall in [`LIL_BAND`]. The cross-path
/// maximum is reported alongside: it is the largest of `R` heavy-tailed
/// draws and sits above 1.5 for most seeds at `n = 10⁶`.
pub fn lil_scan(config: &ExperimentConfig) -> Result<ReplicationSummary> {
    if config.steps < 1000 {
        return Err(HarnessError::Config("lil_scan needs n_max >= 1000".into()));
    }
    let opts = PathOptions {
        lil_from: Some(LIL_START),
        ..PathOptions::default()
    };
    let paths = run_paths(config, &opts);
    let pos: RunningStats = paths.iter().filter_map(|o| o.lil_pos).collect();
    let neg: RunningStats = paths.iter().filter_map(|o| o.lil_neg).collect();
    let mut per_statistic = BTreeMap::new();
    per_statistic.insert("LIL+".to_string(), pos.summary());
    per_statistic.insert("LIL-".to_string(), neg.summary());
    let band_test = |name: &str, st: &RunningStats| TestRecord {
        name: name.to_string(),
        statistic: st.mean(),
        threshold: LIL_BAND.1,
        pass: st.mean() >= LIL_BAND.0 && st.mean() <= LIL_BAND.1,
    };
    let tests = vec![
        band_test("lil_mean_envelope(+S)", &pos),
        band_test("lil_mean_envelope(-S)", &neg),
    ];
    Ok(ReplicationSummary {
        config: config.record(),
        per_statistic,
        tests,
    })
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(HarnessError::TooFewPoints {
            min: 2,
            got: xs.len().min(ys.len()),
        });
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Config("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok((slope, intercept, (ss / m).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub fitted_slope: f64,
    pub intercept: f64,
    pub theoretical_slope: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    /// True when `ln n` was divided out before fitting.
    pub log_divided: bool,
    /// Horizons dropped because `T2` vanished or was not finite.
    pub dropped: Vec<u64>,
}

/// `−1` for `q ≤ 0` and `q − 1` for `q > 0`. At `q = 0` the rate carries an
/// extra `ln n`.
pub fn t2_theoretical_slope(q: f64) -> f64 {
    if q <= 0.0 {
        -1.0
    } else {
        q - 1.0
    }
}

/// An alternating sum within this many ulps of `Σ |a_k|` is treated as
/// cancelled to zero.
const CANCELLATION_ULPS: f64 = 64.0;

/// Slope of `ln |T2(n, q)|` against `ln n`. At `q = 0` the fit is of
/// `ln (|T2| / ln n)`.
///
/// At `q = 0` the alternating sum `Σ (−1)^{n−k} a_k` is zero for even `n`,
/// up to rounding, so even horizons are dropped there; pass odd ones. A
/// point is dropped when the alternating sum is at the rounding level of
/// `Σ |a_k|`, or when `T2` is not a finite normal number.
pub fn t2_rate_fit(q: f64, n_list: &[u64], tol: Tolerance) -> Result<SlopeFit> {
    if n_list.len() < 4 {
        return Err(HarnessError::TooFewPoints {
            min: 4,
            got: n_list.len(),
        });
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config(
            "n_list must be strictly increasing".into(),
        ));
    }
    if (n_list[n_list.len() - 1] as f64) < 100.0 * n_list[0] as f64 {
        return Err(HarnessError::Config(
            "n_list must span at least two decades".into(),
        ));
    }
    let log_divided = q == 0.0;
    let (mut xs, mut ys, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
    for &n in n_list {
        let split = t_split(n, q, tol)?;
        let v = split.t2.abs();
        let noise = CANCELLATION_ULPS * f64::EPSILON * MomentTable::new(q, n)?.abs_sum();
        if split.alternating.abs() <= noise || !v.is_finite() || v < f64::MIN_POSITIVE {
            dropped.push(n);
            continue;
        }
        let nf = n as f64;
        let v = if log_divided { v / nf.ln() } else { v };
        xs.push(nf.ln());
        ys.push(v.ln());
    }
    if xs.len() < 2 {
        return Err(HarnessError::TooFewPoints {
            min: 2,
            got: xs.len(),
        });
    }
    let (fitted_slope, intercept, residual) = fit_line(&xs, &ys)?;
    Ok(SlopeFit {
        fitted_slope,
        intercept,
        theoretical_slope: t2_theoretical_slope(q),
        residual,
        log_divided,
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub p: f64,
    /// `n / r_n`, the scale of `|W_n|`.
    pub scale: f64,
    /// Summary of `|W_n| · r_n / n` across paths.
    pub ratio: StatSummary,
}

/// `|W_n| · r_n / n` across `R` paths for each `p`.
pub fn w_regime_scan(
    p_list: &[f64],
    n: u64,
    replications: u64,
    master_seed: u64,
) -> Result<Vec<RegimeRow>> {
    p_list
        .iter()
        .map(|&p| {
            if !(0.0..1.0).contains(&p) {
                return Err(HarnessError::Config(format!("p = {p} is outside [0, 1)")));
            }
            let params = MemoryParams::from_p(p)?;
            let config = ExperimentConfig::new(params, n, replications, master_seed)?;
            let scale = w_scale(n as f64, p)?;
            let ws = run_replications(&config, |rng| {
                let mut sampler = ElephantSampler::new(params);
                for _ in 0..n {
                    sampler.next_letter(rng);
                }
                let (a, b) = sampler.counts();
                (a as f64 - b as f64).abs() / scale
            });
            Ok(RegimeRow {
                p,
                scale,
                ratio: ws.into_iter().collect::<RunningStats>().summary(),
            })
        })
        .collect()
}
