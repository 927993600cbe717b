//! Replicated path simulation.
//!
//! Each replication owns its random stream, runs one path of the coupled
//! processes and reports a [`PathOutcome`]. Replications run on the rayon
//! pool; outcomes are collected in replication order and folded
//! sequentially, so results do not depend on the thread count.

use std::collections::BTreeMap;

use erw_core::coupled::CoupledState;
use erw_core::moments::r_norm;
use erw_core::sum::Compensated;
use erw_core::walk::{uniform01, ElephantSampler};
use erw_core::MemoryParams;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ks::{jittered, ks_normal_test, MIN_SAMPLES};
use crate::rng::replication_rng;
use crate::summary::{RunningStats, StatSummary};
use crate::{HarnessError, Result};

/// Scale of `|W_n|`: `n / r_n`, that is `√n`, `√(n ln n)` or `n^{2p−1}`
/// below, at and above `p = 3/4`. `r_n` itself bounds `n / |W_n|` in
/// mean square.
pub fn w_scale(n: f64, p: f64) -> Result<f64> {
    Ok(n / r_norm(n, p)?)
}

/// First time at which the LIL envelope is tracked by default.
pub const LIL_START: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub params: MemoryParams,
    pub steps: u64,
    pub replications: u64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        params: MemoryParams,
        steps: u64,
        replications: u64,
        master_seed: u64,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(HarnessError::Config("steps must be at least 1".into()));
        }
        if replications == 0 {
            return Err(HarnessError::Config(
                "replications must be at least 1".into(),
            ));
        }
        Ok(Self {
            params,
            steps,
            replications,
            master_seed,
        })
    }

    pub fn record(&self) -> ConfigRecord {
        ConfigRecord {
            p: self.params.p(),
            q: self.params.q(),
            steps: self.steps,
            replications: self.replications,
            master_seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfigRecord {
    pub p: f64,
    pub q: f64,
    pub steps: u64,
    pub replications: u64,
    pub master_seed: u64,
}

/// What to record along a path besides the terminal values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathOptions {
    /// Times at which `S_k` is recorded, in increasing order.
    pub checkpoints: Vec<u64>,
    pub qsl: bool,
    /// Track `max_k ±S_k / √(2k ln ln k)` for `k ≥` this time.
    pub lil_from: Option<u64>,
    /// Check both Doob identities after every step.
    pub check_doob: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub n: u64,
    pub s: i64,
    pub w: i64,
    pub xi: f64,
    pub ztilde: f64,
    pub qv: f64,
    /// `S_k` at each requested checkpoint.
    pub checkpoints: Vec<i64>,
    /// `(1 / ln n) Σ_{k≤n} S_k² / k²`.
    pub qsl: Option<f64>,
    pub lil_pos: Option<f64>,
    pub lil_neg: Option<f64>,
    /// Largest `|S_k − Ξ_k − q Z̃_k|` seen.
    pub doob_max: f64,
    /// Largest `|⟨Ξ⟩_k − (k − q² Σ_{j<k} W_j² / j²)|` seen.
    pub qv_max: f64,
    /// Uniform draw on `[0, 1)` taken after the path, for lattice jitter.
    pub jitter: f64,
}

/// Runs one path of `steps` steps.
pub fn simulate_path(
    params: MemoryParams,
    steps: u64,
    opts: &PathOptions,
    rng: &mut ChaCha8Rng,
) -> PathOutcome {
    let mut sampler = ElephantSampler::new(params);
    let mut state = CoupledState::new(params);
    let mut sum_sq = Compensated::ZERO;
    let mut qsl = Compensated::ZERO;
    let mut checkpoints = Vec::with_capacity(opts.checkpoints.len());
    let mut next_cp = opts.checkpoints.iter().peekable();
    let lil_from = opts.lil_from.map(|k| k.max(3));
    let (mut lil_pos, mut lil_neg) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut doob_max, mut qv_max) = (0.0f64, 0.0f64);

    for _ in 0..steps {
        if opts.check_doob && state.n() > 0 {
            let r = state.w() as f64 / state.n() as f64;
            sum_sq.add_product(r, r);
        }
        let g = sampler.next_letter(rng);
        state.advance(g);
        let k = state.n();
        let s = state.s();
        if opts.check_doob {
            doob_max = doob_max.max(state.doob_residual().abs());
            qv_max = qv_max.max(state.qv_residual(&sum_sq).abs());
        }
        if opts.qsl {
            let r = s as f64 / k as f64;
            qsl.add(r * r);
        }
        if let Some(from) = lil_from {
            if k >= from {
                let kf = k as f64;
                let ratio = s as f64 / (2.0 * kf * kf.ln().ln()).sqrt();
                lil_pos = lil_pos.max(ratio);
                lil_neg = lil_neg.max(-ratio);
            }
        }
        while next_cp.peek() == Some(&&k) {
            checkpoints.push(s);
            next_cp.next();
        }
    }

    let tracked = |x: f64| (x > f64::NEG_INFINITY).then_some(x);
    PathOutcome {
        n: state.n(),
        s: state.s(),
        w: state.w(),
        xi: state.xi(),
        ztilde: state.ztilde(),
        qv: state.qv(),
        checkpoints,
        qsl: (opts.qsl && steps >= 2).then(|| qsl.value() / (steps as f64).ln()),
        lil_pos: tracked(lil_pos),
        lil_neg: tracked(lil_neg),
        doob_max,
        qv_max,
        jitter: uniform01(rng),
    }
}

/// Evaluates `f` once per replication, in parallel, and returns the
/// results in replication order.
pub fn run_replications<T, F>(config: &ExperimentConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..config.replications)
        .into_par_iter()
        .map(|i| f(&mut replication_rng(config.master_seed, i)))
        .collect()
}

pub fn run_paths(config: &ExperimentConfig, opts: &PathOptions) -> Vec<PathOutcome> {
    run_replications(config, |rng| {
        simulate_path(config.params, config.steps, opts, rng)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub config: ConfigRecord,
    pub per_statistic: BTreeMap<String, StatSummary>,
    pub tests: Vec<TestRecord>,
}

/// Folds named samples into summaries, in input order.
fn summarize<'a, I>(columns: I) -> BTreeMap<String, StatSummary>
where
    I: IntoIterator<Item = (&'a str, Vec<f64>)>,
{
    columns
        .into_iter()
        .filter(|(_, xs)| !xs.is_empty())
        .map(|(name, xs)| {
            (
                name.to_string(),
                xs.into_iter().collect::<RunningStats>().summary(),
            )
        })
        .collect()
}

/// Terminal statistics over `R` independent paths, with the KS test on
/// jittered `S_n/√n` (when `R ≥ 100`) and the martingale mean test on
/// `Ξ_n`.
pub fn mc_terminal_stats(config: &ExperimentConfig) -> Result<ReplicationSummary> {
    let opts = PathOptions {
        qsl: config.steps >= 2,
        lil_from: (config.steps >= LIL_START).then_some(LIL_START),
        ..PathOptions::default()
    };
    let paths = run_paths(config, &opts);
    let n = config.steps;
    let nf = n as f64;
    let root = nf.sqrt();
    let norm = w_scale(nf, config.params.p()).ok();

    let col = |f: &dyn Fn(&PathOutcome) -> Option<f64>| -> Vec<f64> {
        paths.iter().filter_map(f).collect()
    };
    let per_statistic = summarize([
        ("S_n/sqrt(n)", col(&|o| Some(o.s as f64 / root))),
        ("S_n/n", col(&|o| Some(o.s as f64 / nf))),
        ("W_n*r_n/n", col(&|o| norm.map(|r| o.w as f64 / r))),
        ("Ztilde_n", col(&|o| Some(o.ztilde))),
        ("Xi_n/sqrt(n)", col(&|o| Some(o.xi / root))),
        ("QV_n/n", col(&|o| Some(o.qv / nf))),
        ("QSL", col(&|o| o.qsl)),
        ("LIL+", col(&|o| o.lil_pos)),
        ("LIL-", col(&|o| o.lil_neg)),
    ]);

    let mut tests = Vec::new();
    if paths.len() >= MIN_SAMPLES {
        let xs: Vec<f64> = paths.iter().map(|o| jittered(o.s, n, o.jitter)).collect();
        let ks = ks_normal_test(&xs, 0.01)?;
        tests.push(TestRecord {
            name: "ks_normal(S_n/sqrt(n))".into(),
            statistic: ks.statistic,
            threshold: ks.threshold,
            pass: ks.pass,
        });
    }
    let xi = col(&|o| Some(o.xi)).into_iter().collect::<RunningStats>();
    let threshold = 4.0 * 2.0 * root / (paths.len() as f64).sqrt();
    tests.push(TestRecord {
        name: "martingale_mean(Xi_n)".into(),
        statistic: xi.mean().abs(),
        threshold,
        pass: xi.mean().abs() <= threshold,
    });

    Ok(ReplicationSummary {
        config: config.record(),
        per_statistic,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(q: f64, steps: u64, reps: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(MemoryParams::from_q(q).unwrap(), steps, reps, seed).unwrap()
    }

    #[test]
    fn w_scale_regimes() {
        assert!((w_scale(100.0, 0.5).unwrap() - 10.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((w_scale(e, 0.75).unwrap() - e.sqrt()).abs() < 1e-12);
        assert!((w_scale(1e6, 0.9).unwrap() - 1e6f64.powf(0.8)).abs() < 1e-6);
        assert!(w_scale(10.0, 1.0).is_err());
    }

    #[test]
    fn rejects_empty_configs() {
        let p = MemoryParams::from_q(0.0).unwrap();
        assert!(ExperimentConfig::new(p, 0, 1, 0).is_err());
        assert!(ExperimentConfig::new(p, 1, 0, 0).is_err());
    }

    #[test]
    fn replications_are_order_stable() {
        let cfg = config(0.3, 500, 64, 11);
        let a = run_paths(&cfg, &PathOptions::default());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| run_paths(&cfg, &PathOptions::default()));
        assert_eq!(a, b);
        let one = simulate_path(
            cfg.params,
            cfg.steps,
            &PathOptions::default(),
            &mut replication_rng(11, 5),
        );
        assert_eq!(a[5], one);
    }

    #[test]
    fn path_records_checkpoints_and_identities() {
        let opts = PathOptions {
            checkpoints: vec![1, 250, 1000],
            qsl: true,
            lil_from: Some(100),
            check_doob: true,
        };
        let out = simulate_path(
            MemoryParams::from_q(0.8).unwrap(),
            1000,
            &opts,
            &mut replication_rng(3, 0),
        );
        assert_eq!(out.checkpoints.len(), 3);
        assert_eq!(out.checkpoints[2], out.s);
        assert_eq!(out.checkpoints[0].abs(), 1);
        assert!(out.doob_max <= 1e-12 && out.qv_max <= 1e-12);
        assert!(out.qsl.unwrap() >= 0.0);
        assert!(out.lil_pos.is_some() && out.lil_neg.is_some());
        assert!((0.0..1.0).contains(&out.jitter));
        assert!(out.qv <= 1000.0);
    }

    #[test]
    fn untracked_statistics_are_absent() {
        let out = simulate_path(
            MemoryParams::from_q(0.0).unwrap(),
            50,
            &PathOptions::default(),
            &mut replication_rng(1, 1),
        );
        assert_eq!(out.qsl, None);
        assert_eq!(out.lil_pos, None);
        assert_eq!(out.doob_max, 0.0);
    }

    #[test]
    fn terminal_summary_is_deterministic_and_sane() {
        let cfg = config(0.0, 2000, 400, 99);
        let a = mc_terminal_stats(&cfg).unwrap();
        let b = mc_terminal_stats(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let s = &a.per_statistic["S_n/n"];
        assert!(s.mean.abs() <= 4.0 * s.stderr);
        // At q = 0 the drift vanishes, so Ξ = S and ⟨Ξ⟩_n = n.
        assert_eq!(a.per_statistic["QV_n/n"].mean, 1.0);
        assert_eq!(
            a.per_statistic["Xi_n/sqrt(n)"],
            a.per_statistic["S_n/sqrt(n)"]
        );
        for key in ["W_n*r_n/n", "Ztilde_n", "QSL", "LIL+", "LIL-"] {
            let st = &a.per_statistic[key];
            assert_eq!(st.count, 400);
            assert!(st.variance >= 0.0);
            assert!((st.stderr - (st.variance / 400.0).sqrt()).abs() < 1e-15);
        }
        assert_eq!(a.tests.len(), 2);
        assert!(a.tests.iter().all(|t| t.pass), "{:?}", a.tests);
    }

    #[test]
    fn degenerate_memory_skips_normalizer() {
        let cfg = ExperimentConfig::new(MemoryParams::from_p(1.0).unwrap(), 20, 10, 0).unwrap();
        let r = mc_terminal_stats(&cfg).unwrap();
        assert!(!r.per_statistic.contains_key("W_n*r_n/n"));
        // Fewer than 100 paths: no KS record.
        assert_eq!(r.tests.len(), 1);
        // p = 1 repeats the first letter forever: |W_n| = n.
        assert_eq!(r.per_statistic["S_n/n"].count, 10);
    }
}
