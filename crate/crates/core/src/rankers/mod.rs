//! User-ranking algorithms.
//!
//! Spectral rankers ([`hnd_power`], [`hnd_deflation`], [`abh_power`],
//! [`abh_fiedler_dense`]) return sign-normalized scores whose direction is
//! arbitrary; [`orient_by_decile_entropy`] picks the direction. The
//! iterative baselines are oriented by construction.

mod baselines;
mod orient;
mod spectral;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{
    hits, investment, pooled_investment, true_answer, truthfinder, truthfinder_weights,
};
pub use orient::{decile_entropies, orient_by_decile_entropy};
pub use spectral::{abh_fiedler_dense, abh_power, hnd_deflation, hnd_power};

use crate::error::{Error, Result};
use crate::matrix::ResponseMatrix;
use crate::spectral::{PowerConfig, SpectralResult};

/// Per-user scores and the ranking they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    /// User rows from best to worst; ties broken by ascending row.
    pub ranking: Vec<usize>,
    /// Iterations spent (power steps or update rounds).
    pub iterations: usize,
    /// The eigen-solve behind a spectral ranking. For the difference-space
    /// methods this holds the converged difference vector.
    pub spectral: Option<SpectralResult>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Self {
        let ranking = ranking_of(&scores);
        Self {
            scores,
            ranking,
            iterations: 0,
            spectral: None,
        }
    }

    fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    fn with_spectral(mut self, result: SpectralResult) -> Self {
        self.spectral = Some(result);
        self
    }

    /// Negated scores, hence the reversed ranking (modulo ties).
    pub fn reversed(&self) -> Self {
        let scores: Vec<f64> = self.scores.iter().map(|x| -x).collect();
        Self {
            ranking: ranking_of(&scores),
            scores,
            iterations: self.iterations,
            spectral: self.spectral.clone(),
        }
    }

    /// 0-based rank position of every user row.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ranking.len()];
        for (r, &j) in self.ranking.iter().enumerate() {
            pos[j] = r;
        }
        pos
    }
}

/// Rows sorted by descending score, ties by ascending row.
pub fn ranking_of(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Correct option per item, keyed by the item's original id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub correct: BTreeMap<u64, usize>,
}

impl AnswerKey {
    pub fn new(correct: BTreeMap<u64, usize>) -> Self {
        Self { correct }
    }

    pub fn get(&self, item: u64) -> Option<usize> {
        self.correct.get(&item).copied()
    }
}

impl FromIterator<(u64, usize)> for AnswerKey {
    fn from_iter<T: IntoIterator<Item = (u64, usize)>>(iter: T) -> Self {
        Self {
            correct: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub power: PowerConfig,
    /// Shift for the ABH power method; defaults to the largest degree of `C Cᵀ`.
    pub abh_beta: Option<f64>,
    /// TruthFinder starting user score.
    pub truthfinder_prior: f64,
    /// Belief exponent `g` of Investment.
    pub investment_exponent: f64,
    /// Belief exponent `g` of PooledInvestment.
    pub pooled_exponent: f64,
    pub investment_iterations: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            power: PowerConfig::default(),
            abh_beta: None,
            truthfinder_prior: 0.9,
            investment_exponent: 1.2,
            pooled_exponent: 1.4,
            investment_iterations: 10,
        }
    }
}

impl RankConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            power: PowerConfig::with_seed(seed),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    HndPower,
    HndDeflation,
    AbhPower,
    AbhDense,
    Hits,
    TruthFinder,
    Investment,
    PooledInvestment,
    TrueAnswer,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::HndPower,
        Method::HndDeflation,
        Method::AbhPower,
        Method::AbhDense,
        Method::Hits,
        Method::TruthFinder,
        Method::Investment,
        Method::PooledInvestment,
        Method::TrueAnswer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::HndPower => "hnd-power",
            Method::HndDeflation => "hnd-deflation",
            Method::AbhPower => "abh-power",
            Method::AbhDense => "abh-dense",
            Method::Hits => "hits",
            Method::TruthFinder => "truthfinder",
            Method::Investment => "investment",
            Method::PooledInvestment => "pooledinv",
            Method::TrueAnswer => "true-answer",
        }
    }

    /// Spectral methods return unoriented scores.
    pub fn is_spectral(self) -> bool {
        matches!(
            self,
            Method::HndPower | Method::HndDeflation | Method::AbhPower | Method::AbhDense
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Runs `method` without orientation. `key` is required for [`Method::TrueAnswer`].
pub fn rank(
    method: Method,
    matrix: &ResponseMatrix,
    config: &RankConfig,
    key: Option<&AnswerKey>,
) -> Result<ScoreVector> {
    match method {
        Method::HndPower => hnd_power(matrix, config),
        Method::HndDeflation => hnd_deflation(matrix, config),
        Method::AbhPower => abh_power(matrix, config),
        Method::AbhDense => abh_fiedler_dense(matrix),
        Method::Hits => hits(matrix, config),
        Method::TruthFinder => truthfinder(matrix, config),
        Method::Investment => investment(matrix, config),
        Method::PooledInvestment => pooled_investment(matrix, config),
        Method::TrueAnswer => {
            let key = key.ok_or_else(|| {
                Error::MissingKey(matrix.item_ids().first().copied().unwrap_or_default())
            })?;
            true_answer(matrix, key)
        }
    }
}

/// Runs `method` and, for spectral methods when `orient` is set, applies
/// decile-entropy orientation.
pub fn rank_oriented(
    method: Method,
    matrix: &ResponseMatrix,
    config: &RankConfig,
    key: Option<&AnswerKey>,
    orient: bool,
) -> Result<ScoreVector> {
    let scores = rank(method, matrix, config, key)?;
    if orient && method.is_spectral() {
        Ok(orient_by_decile_entropy(&scores, matrix))
    } else {
        Ok(scores)
    }
}

/// Rejects users without answers and multi-component inputs.
pub(crate) fn require_connected(matrix: &ResponseMatrix) -> Result<()> {
    if let Some(j) = matrix.first_empty_row() {
        return Err(Error::EmptyRow(j));
    }
    let comps = matrix.connected_components();
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps));
    }
    Ok(())
}
