//! Bootstrap errors and bin-size diagnostics.
//!
//! Replicates resample raw rows with replacement. A replicate is encoded as
//! a vector of row multiplicities and handed to estimators as a weighted
//! [`DataView`], so nothing is copied per replicate.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, InteractionEstimate, PreparedEstimator, TargetSpec};
use crate::store::{DataView, SampleMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { replicates: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub point_estimate: f64,
    pub boot_mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_replicates: usize,
    pub n_failed: usize,
    pub seed: u64,
}

impl BootstrapResult {
    /// `{mean, stderr, ci: [lo, hi], B, n_failed, seed}`
    pub fn record(&self) -> serde_json::Value {
        serde_json::json!({
            "mean": self.boot_mean,
            "stderr": self.stderr,
            "ci": [self.ci_low, self.ci_high],
            "B": self.n_replicates,
            "n_failed": self.n_failed,
            "seed": self.seed,
        })
    }
}

/// Row multiplicities of replicate `index`: `n` draws with replacement.
/// Each replicate has its own stream of the master seed, so replicates can
/// be generated in any order.
pub fn resample_weights(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut w = vec![0.0; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1.0;
    }
    w
}

fn summarize(point: f64, reps: Vec<Result<f64>>, cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    let mut ok = Vec::with_capacity(reps.len());
    let mut n_failed = 0;
    for r in reps {
        match r {
            Ok(v) if v.is_finite() => ok.push(v),
            Ok(_) => n_failed += 1,
            Err(e) if e.is_estimation_failure() => n_failed += 1,
            Err(e) => return Err(e),
        }
    }
    if ok.is_empty() {
        return Err(Error::AllReplicatesFailed { replicates: cfg.replicates });
    }
    let k = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / k;
    let stderr = if ok.len() > 1 {
        (ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    ok.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        point_estimate: point,
        boot_mean: mean,
        stderr,
        ci_low: percentile(&ok, 0.025),
        ci_high: percentile(&ok, 0.975),
        n_replicates: cfg.replicates,
        n_failed,
        seed: cfg.seed,
    })
}

/// Linear interpolation between order statistics of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn check(cfg: &BootstrapConfig) -> Result<()> {
    if cfg.replicates < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 bootstrap replicates, got {}", cfg.replicates)));
    }
    Ok(())
}

/// Bootstraps one estimator. A failing point estimate is returned as the error.
pub fn bootstrap<F>(m: &SampleMatrix, cfg: &BootstrapConfig, estimator: F) -> Result<BootstrapResult>
where
    F: Fn(&DataView<'_>) -> Result<f64> + Sync,
{
    check(cfg)?;
    let point = estimator(&DataView::new(m))?;
    let reps: Vec<Result<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let w = resample_weights(m.n_samples(), cfg.seed, b);
            estimator(&DataView::weighted(m, &w)?)
        })
        .collect();
    summarize(point, reps, cfg)
}

/// Bootstraps `count` estimators against shared replicates; estimator `i`
/// is `estimator(i, view)`. Failures stay per estimator.
pub fn bootstrap_batch<F>(m: &SampleMatrix, cfg: &BootstrapConfig, count: usize, estimator: F) -> Vec<Result<BootstrapResult>>
where
    F: Fn(usize, &DataView<'_>) -> Result<f64> + Sync,
{
    if let Err(e) = check(cfg) {
        return (0..count).map(|_| Err(Error::InvalidConfig(e.to_string()))).collect();
    }
    let full = DataView::new(m);
    let points: Vec<Result<f64>> = (0..count).into_par_iter().map(|i| estimator(i, &full)).collect();
    let live: Vec<usize> = (0..count).filter(|&i| points[i].is_ok()).collect();

    let per_rep: Vec<Vec<Result<f64>>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let w = resample_weights(m.n_samples(), cfg.seed, b);
            let view = DataView::weighted(m, &w).expect("multiplicities match the row count");
            live.iter().map(|&i| estimator(i, &view)).collect()
        })
        .collect();

    let mut columns: Vec<Vec<Result<f64>>> = live.iter().map(|_| Vec::with_capacity(cfg.replicates)).collect();
    for rep in per_rep {
        for (col, r) in columns.iter_mut().zip(rep) {
            col.push(r);
        }
    }
    let mut columns = columns.into_iter();
    points
        .into_iter()
        .map(|p| match p {
            Ok(point) => summarize(point, columns.next().expect("one column per live estimator"), cfg),
            Err(e) => Err(e),
        })
        .collect()
}

/// What a batch of tuples should estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Multiplicative,
    Additive { outcome: usize },
}

#[derive(Debug)]
pub struct TupleResult {
    pub spec: TargetSpec,
    pub estimate: Result<InteractionEstimate>,
    /// Bootstrap of the log-scale value; `None` when no bootstrap was requested
    /// or the point estimate failed.
    pub boot: Option<Result<BootstrapResult>>,
}

/// Estimates every spec, then bootstraps the log-scale values (`ln I^m` or
/// `I^a`) of the ones that succeeded against shared replicates.
pub fn estimate_batch(
    m: &SampleMatrix,
    specs: &[TargetSpec],
    kind: BatchKind,
    cfg: &EstimatorConfig,
    boot: Option<&BootstrapConfig>,
) -> Vec<TupleResult> {
    let (prepared, estimates): (Vec<Option<PreparedEstimator<'_>>>, Vec<Result<InteractionEstimate>>) = specs
        .par_iter()
        .map(|s| {
            let p = match kind {
                BatchKind::Multiplicative => PreparedEstimator::multiplicative(m, s, *cfg),
                BatchKind::Additive { outcome } => PreparedEstimator::additive(m, outcome, s, *cfg),
            };
            match p {
                Ok(p) => {
                    let est = p.evaluate(None);
                    (Some(p), est)
                }
                Err(e) => (None, Err(e)),
            }
        })
        .unzip();
    let live: Vec<usize> = (0..specs.len()).filter(|&i| estimates[i].is_ok()).collect();
    let mut boots: Vec<Option<Result<BootstrapResult>>> = (0..specs.len()).map(|_| None).collect();
    if let Some(bc) = boot {
        let results = bootstrap_batch(m, bc, live.len(), |k, view| {
            let p = prepared[live[k]].as_ref().expect("live tuples were prepared");
            Ok(p.evaluate(view.weights())?.log_scale())
        });
        for (k, r) in results.into_iter().enumerate() {
            boots[live[k]] = Some(r);
        }
    }
    specs
        .iter()
        .cloned()
        .zip(estimates)
        .zip(boots)
        .map(|((spec, estimate), boot)| TupleResult { spec, estimate, boot })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRow {
    pub assignment: Vec<u8>,
    pub count: f64,
    pub low: bool,
}

/// Cell counts of a spec under its conditioning, flagging thin cells.
pub fn bin_report(m: &SampleMatrix, spec: &TargetSpec, min_bin_count: f64) -> Result<Vec<BinRow>> {
    let p = PreparedEstimator::multiplicative(m, spec, EstimatorConfig::flagging(min_bin_count))?;
    Ok(p
        .bin_counts(None)
        .into_iter()
        .enumerate()
        .map(|(c, count)| BinRow { assignment: p.spec().cell_values(c), count, low: count < min_bin_count })
        .collect())
}
