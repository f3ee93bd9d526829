//! Item response functions and synthetic data generators.

mod generate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use generate::{dataset_from_params, generate_c1p, sample_dataset, Dataset, GenConfig, ItemParams};

use crate::error::{Error, Result};

/// Logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `σ(a(θ - b))`, with an infinite slope read as the Heaviside step that is
/// 1 only for `θ > b`.
fn graded_logistic(a: f64, theta: f64, b: f64) -> f64 {
    if a.is_infinite() {
        if theta > b {
            1.0
        } else {
            0.0
        }
    } else {
        sigmoid(a * (theta - b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryModel {
    OnePl,
    TwoPl,
    Glad,
    ThreePl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryItemParams {
    /// Discrimination.
    pub a: f64,
    /// Difficulty.
    pub b: f64,
    /// Guessing probability.
    pub c: f64,
}

impl BinaryItemParams {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) || !self.b.is_finite() || !(0.0..1.0).contains(&self.c) {
            return Err(Error::InvalidParams(format!(
                "binary item needs a >= 0, finite b, 0 <= c < 1; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Probability of a correct answer. Parameters a model does not use are ignored.
pub fn prob_binary(model: BinaryModel, params: &BinaryItemParams, theta: f64) -> f64 {
    let BinaryItemParams { a, b, c } = *params;
    match model {
        BinaryModel::OnePl => sigmoid(theta - b),
        BinaryModel::TwoPl => sigmoid(a * (theta - b)),
        BinaryModel::Glad => sigmoid(a * theta),
        BinaryModel::ThreePl => c + (1.0 - c) * sigmoid(a * (theta - b)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum PolytomousItemParams {
    /// Graded response: one discrimination and `k-1` increasing thresholds.
    Grm { a: f64, thresholds: Vec<f64> },
    /// Nominal response: one slope and intercept per option.
    Bock { slopes: Vec<f64>, intercepts: Vec<f64> },
    /// Nominal response with a latent "don't know" option that spreads its
    /// mass evenly over the `k` real options.
    Samejima {
        slopes: Vec<f64>,
        intercepts: Vec<f64>,
        dummy_slope: f64,
        dummy_intercept: f64,
    },
}

impl PolytomousItemParams {
    pub fn options(&self) -> usize {
        match self {
            Self::Grm { thresholds, .. } => thresholds.len() + 1,
            Self::Bock { slopes, .. } | Self::Samejima { slopes, .. } => slopes.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Grm { a, thresholds } => {
                if !(*a >= 0.0) {
                    return Err(Error::InvalidParams(format!("GRM discrimination {a} < 0")));
                }
                if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::ThresholdOrder);
                }
            }
            Self::Bock { slopes, intercepts } | Self::Samejima { slopes, intercepts, .. } => {
                if slopes.len() != intercepts.len() {
                    return Err(Error::DimensionMismatch {
                        expected: slopes.len(),
                        actual: intercepts.len(),
                    });
                }
                if slopes.is_empty() {
                    return Err(Error::InvalidParams("item without options".into()));
                }
            }
        }
        Ok(())
    }

    /// Index of the option treated as correct: the top grade, or the
    /// largest slope.
    pub fn correct_option(&self) -> usize {
        match self {
            Self::Grm { thresholds, .. } => thresholds.len(),
            Self::Bock { slopes, .. } | Self::Samejima { slopes, .. } => slopes
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map_or(0, |(h, _)| h),
        }
    }
}

/// Distribution over the options of one item at ability `theta`.
pub fn prob_polytomous(params: &PolytomousItemParams, theta: f64) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(match params {
        PolytomousItemParams::Grm { a, thresholds } => {
            let k = thresholds.len() + 1;
            let mut upper = 1.0;
            let mut probs = Vec::with_capacity(k);
            for h in 0..k {
                let lower = thresholds.get(h).map_or(0.0, |&b| graded_logistic(*a, theta, b));
                probs.push(upper - lower);
                upper = lower;
            }
            probs
        }
        PolytomousItemParams::Bock { slopes, intercepts } => {
            let z: Vec<f64> = slopes
                .iter()
                .zip(intercepts)
                .map(|(a, b)| a * theta + b)
                .collect();
            softmax(&z)
        }
        PolytomousItemParams::Samejima {
            slopes,
            intercepts,
            dummy_slope,
            dummy_intercept,
        } => {
            let k = slopes.len() as f64;
            let mut z = vec![dummy_slope * theta + dummy_intercept];
            z.extend(slopes.iter().zip(intercepts).map(|(a, b)| a * theta + b));
            let p = softmax(&z);
            p[1..].iter().map(|x| x + p[0] / k).collect()
        }
    })
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[serde(rename = "1pl")]
    OnePl,
    #[serde(rename = "2pl")]
    TwoPl,
    Glad,
    #[serde(rename = "3pl")]
    ThreePl,
    Grm,
    Bock,
    Samejima,
    C1p,
}

impl Model {
    pub const ALL: [Model; 8] = [
        Model::OnePl,
        Model::TwoPl,
        Model::Glad,
        Model::ThreePl,
        Model::Grm,
        Model::Bock,
        Model::Samejima,
        Model::C1p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::OnePl => "1pl",
            Model::TwoPl => "2pl",
            Model::Glad => "glad",
            Model::ThreePl => "3pl",
            Model::Grm => "grm",
            Model::Bock => "bock",
            Model::Samejima => "samejima",
            Model::C1p => "c1p",
        }
    }

    pub fn binary(self) -> Option<BinaryModel> {
        match self {
            Model::OnePl => Some(BinaryModel::OnePl),
            Model::TwoPl => Some(BinaryModel::TwoPl),
            Model::Glad => Some(BinaryModel::Glad),
            Model::ThreePl => Some(BinaryModel::ThreePl),
            _ => None,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown model {s:?}")))
    }
}
