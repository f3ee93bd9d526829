//! Accuracy metrics, stability diagnostics and the timing harness.

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irt::Dataset;
use crate::matrix::ResponseMatrix;
use crate::rankers::{rank, AnswerKey, Method, RankConfig};

const UNIT_TOL: f64 = 1e-9;

/// 1-based ranks with ties sharing their average rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::ConstantInput);
    }
    pearson(&midranks(x), &midranks(y))
}

/// Mean absolute difference of each user's position in two rankings,
/// divided by the number of users. Rankings list users best first.
pub fn rank_displacement(p: &[usize], q: &[usize]) -> Result<f64> {
    let m = p.len();
    if q.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: q.len(),
        });
    }
    if m == 0 {
        return Ok(0.0);
    }
    let positions = |r: &[usize]| -> Result<Vec<usize>> {
        let mut pos = vec![usize::MAX; m];
        for (k, &u) in r.iter().enumerate() {
            if u >= m || pos[u] != usize::MAX {
                return Err(Error::InvalidParams("ranking is not a permutation".into()));
            }
            pos[u] = k;
        }
        Ok(pos)
    };
    let (pp, qq) = (positions(p)?, positions(q)?);
    let total: usize = pp.iter().zip(&qq).map(|(a, b)| a.abs_diff(*b)).sum();
    Ok(total as f64 / m as f64 / m as f64)
}

/// Population variance of the entries of a unit vector.
pub fn eigvec_variance(v: &[f64]) -> Result<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if v.is_empty() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(norm));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Ok(v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Mean and population standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 || x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParams("slope needs two or more positive points".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, _) = mean_std(&lx);
    let (my, _) = mean_std(&ly);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(sxy / sxx)
}

/// One row of `method,seed,spearman,displacement` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub seed: u64,
    pub spearman: f64,
    /// Against a reference ranking, when one is given.
    pub displacement: Option<f64>,
    #[serde(skip)]
    pub oriented: bool,
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub repeats: usize,
    /// Budget for the warm-up plus all repeats.
    pub timeout: Duration,
    pub warmup: bool,
    pub rank: RankConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repeats: 5,
            timeout: Duration::from_secs(1000),
            warmup: true,
            rank: RankConfig::default(),
        }
    }
}

/// Median of a non-empty sample.
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times the ranking call alone on a dedicated worker thread and reports
/// the median over `repeats` runs. A run still going when the budget runs
/// out is abandoned and reported as [`Error::Timeout`].
pub fn bench_run(method: Method, dataset: &Dataset, config: &BenchConfig) -> Result<BenchRecord> {
    bench_matrix(
        method,
        Arc::new(dataset.matrix.clone()),
        Some(dataset.key.clone()),
        dataset.config.seed,
        config,
    )
}

/// [`bench_run`] on a bare matrix.
pub fn bench_matrix(
    method: Method,
    matrix: Arc<ResponseMatrix>,
    key: Option<AnswerKey>,
    seed: u64,
    config: &BenchConfig,
) -> Result<BenchRecord> {
    if config.repeats == 0 {
        return Err(Error::ConfigInvalid("repeats must be at least 1".into()));
    }
    let (m, n) = (matrix.users(), matrix.items());
    let k = matrix.option_counts().iter().copied().max().unwrap_or(0);
    let runs = config.repeats + usize::from(config.warmup);
    let rank_cfg = config.rank;
    let worker_matrix = Arc::clone(&matrix);
    let (tx, rx) = mpsc::channel();
    thread::Builder::new()
        .name(format!("bench-{method}"))
        .spawn(move || {
            for _ in 0..runs {
                let start = Instant::now();
                let out = rank(method, &worker_matrix, &rank_cfg, key.as_ref());
                let elapsed = start.elapsed();
                let stop = out.is_err();
                if tx.send(out.map(|s| (s.iterations, elapsed))).is_err() || stop {
                    return;
                }
            }
        })
        .map_err(|e| Error::Io(e.to_string()))?;

    let began = Instant::now();
    let mut times = Vec::with_capacity(config.repeats);
    let mut iterations = 0;
    for run in 0..runs {
        let left = config.timeout.saturating_sub(began.elapsed());
        let (iters, elapsed) = match rx.recv_timeout(left) {
            Ok(out) => out?,
            Err(_) => {
                return Err(Error::Timeout {
                    method: method.to_string(),
                    elapsed_ms: began.elapsed().as_secs_f64() * 1e3,
                })
            }
        };
        if config.warmup && run == 0 {
            continue;
        }
        iterations = iters;
        times.push(elapsed.as_secs_f64() * 1e3);
    }
    Ok(BenchRecord {
        method: method.to_string(),
        m,
        n,
        k,
        seed,
        iterations,
        wall_ms: median(&times),
    })
}
