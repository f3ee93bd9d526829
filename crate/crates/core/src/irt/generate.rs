use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{prob_binary, prob_polytomous, BinaryItemParams, Model, PolytomousItemParams};
use crate::error::{Error, Result};
use crate::matrix::ResponseMatrix;
use crate::rankers::AnswerKey;

/// Share of users the consecutive-ones generator places in the low half.
const C1P_LOW_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub model: Model,
    pub users: usize,
    pub items: usize,
    pub options: usize,
    pub ability: (f64, f64),
    pub difficulty: (f64, f64),
    pub discrimination: (f64, f64),
    /// 3PL guessing range.
    pub guessing: (f64, f64),
    pub p_answer: f64,
    /// Rescale GRM discrimination to `[0, 2 a_max / (k + 1)]` so its mean
    /// per-option slope matches Bock.
    pub grm_comparable: bool,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self::new(Model::Samejima)
    }
}

impl GenConfig {
    /// Defaults for `model`: 100 users, 100 items, 3 options (2 for binary
    /// models), abilities in `[0,1]`, difficulties in `[-0.5,0.5]` (`[0,1]`
    /// for the consecutive-ones generator), discrimination in `[0,10]`.
    pub fn new(model: Model) -> Self {
        Self {
            model,
            users: 100,
            items: 100,
            options: if model.binary().is_some() { 2 } else { 3 },
            ability: (0.0, 1.0),
            difficulty: if model == Model::C1p { (0.0, 1.0) } else { (-0.5, 0.5) },
            discrimination: (0.0, 10.0),
            guessing: (0.0, 0.25),
            p_answer: 1.0,
            grm_comparable: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.users == 0 || self.items == 0 {
            return bad("users and items must be positive".into());
        }
        if self.options < 2 {
            return bad(format!("need at least 2 options, got {}", self.options));
        }
        if self.model.binary().is_some() && self.options != 2 {
            return bad(format!("binary model {} needs exactly 2 options", self.model));
        }
        for (name, (lo, hi)) in [
            ("ability", self.ability),
            ("difficulty", self.difficulty),
            ("discrimination", self.discrimination),
            ("guessing", self.guessing),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} range [{lo}, {hi}] is not an interval"));
            }
        }
        if self.discrimination.0 < 0.0 {
            return bad("discrimination must be non-negative".into());
        }
        if self.guessing.0 < 0.0 || self.guessing.1 >= 1.0 {
            return bad("guessing must lie in [0, 1)".into());
        }
        if !(self.p_answer > 0.0 && self.p_answer <= 1.0) {
            return bad(format!("p_answer {} outside (0, 1]", self.p_answer));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ItemParams {
    Binary(BinaryItemParams),
    Polytomous(PolytomousItemParams),
}

impl ItemParams {
    fn options(&self) -> usize {
        match self {
            ItemParams::Binary(_) => 2,
            ItemParams::Polytomous(p) => p.options(),
        }
    }

    /// Binary items put the correct answer at option 1.
    fn correct_option(&self) -> usize {
        match self {
            ItemParams::Binary(_) => 1,
            ItemParams::Polytomous(p) => p.correct_option(),
        }
    }
}

/// A generated response matrix with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub matrix: ResponseMatrix,
    /// True ability per user row.
    pub abilities: Vec<f64>,
    pub key: AnswerKey,
    pub items: Vec<ItemParams>,
    pub config: GenConfig,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// `count` sorted draws without repeated values.
fn sorted_distinct(rng: &mut ChaCha8Rng, range: (f64, f64), count: usize) -> Result<Vec<f64>> {
    if count > 1 && range.0 == range.1 {
        return Err(Error::ConfigInvalid(
            "degenerate difficulty range cannot give distinct thresholds".into(),
        ));
    }
    let mut v: Vec<f64> = (0..count).map(|_| uniform(rng, range)).collect();
    loop {
        v.sort_by(f64::total_cmp);
        match v.windows(2).position(|w| w[0] == w[1]) {
            Some(p) => v[p] = uniform(rng, range),
            None => return Ok(v),
        }
    }
}

fn sample_item(config: &GenConfig, rng: &mut ChaCha8Rng) -> Result<ItemParams> {
    let k = config.options;
    if let Some(model) = config.model.binary() {
        use super::BinaryModel::*;
        let a = match model {
            OnePl => 1.0,
            _ => uniform(rng, config.discrimination),
        };
        let b = match model {
            Glad => 0.0,
            _ => uniform(rng, config.difficulty),
        };
        let c = match model {
            ThreePl => uniform(rng, config.guessing),
            _ => 0.0,
        };
        return Ok(ItemParams::Binary(BinaryItemParams::new(a, b, c)));
    }
    let params = match config.model {
        Model::Grm => {
            let (lo, hi) = config.discrimination;
            let range = if config.grm_comparable {
                (lo * 2.0 / (k as f64 + 1.0), hi * 2.0 / (k as f64 + 1.0))
            } else {
                (lo, hi)
            };
            let a = uniform(rng, range);
            PolytomousItemParams::Grm {
                a,
                thresholds: sorted_distinct(rng, config.difficulty, k - 1)?,
            }
        }
        Model::Bock | Model::Samejima => {
            let mut slopes: Vec<f64> = (0..k).map(|_| uniform(rng, config.discrimination)).collect();
            slopes.sort_by(f64::total_cmp);
            let b = uniform(rng, config.difficulty);
            let intercepts = slopes.iter().map(|a| -a * b).collect();
            if config.model == Model::Bock {
                PolytomousItemParams::Bock { slopes, intercepts }
            } else {
                PolytomousItemParams::Samejima {
                    slopes,
                    intercepts,
                    dummy_slope: 0.0,
                    dummy_intercept: 0.0,
                }
            }
        }
        Model::C1p => PolytomousItemParams::Grm {
            a: f64::INFINITY,
            thresholds: sorted_distinct(rng, config.difficulty, k - 1)?,
        },
        _ => unreachable!("binary models handled above"),
    };
    Ok(ItemParams::Polytomous(params))
}

/// Samples a dataset from `config`. Draw order: abilities, item parameters,
/// then responses user by user.
pub fn sample_dataset(config: &GenConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let abilities = if config.model == Model::C1p {
        c1p_abilities(config, &mut rng)
    } else {
        (0..config.users).map(|_| uniform(&mut rng, config.ability)).collect()
    };
    let items = (0..config.items)
        .map(|_| sample_item(config, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    respond(config.clone(), abilities, items, &mut rng)
}

/// The consecutive-ones limit: GRM thresholds in the difficulty range, a
/// step response, 10% of users in the lower half of the ability range and
/// the rest in the upper half. Every user answers every item.
pub fn generate_c1p(config: &GenConfig) -> Result<Dataset> {
    let config = GenConfig {
        model: Model::C1p,
        p_answer: 1.0,
        ..config.clone()
    };
    sample_dataset(&config)
}

fn c1p_abilities(config: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = config.ability;
    let mid = 0.5 * (lo + hi);
    let low = (config.users as f64 * C1P_LOW_SHARE).round() as usize;
    let mut abilities: Vec<f64> = (0..config.users)
        .map(|j| {
            if j < low {
                uniform(rng, (lo, mid))
            } else {
                uniform(rng, (mid, hi))
            }
        })
        .collect();
    abilities.shuffle(rng);
    abilities
}

/// Samples responses for given abilities and item parameters. `config`
/// supplies the seed and answer probability; its shape fields are replaced
/// by those of the inputs.
pub fn dataset_from_params(
    config: &GenConfig,
    abilities: Vec<f64>,
    items: Vec<ItemParams>,
) -> Result<Dataset> {
    let mut config = config.clone();
    config.users = abilities.len();
    config.items = items.len();
    config.options = items.iter().map(ItemParams::options).max().unwrap_or(2);
    if config.users == 0 || config.items == 0 {
        return Err(Error::EmptyInput);
    }
    if !(config.p_answer > 0.0 && config.p_answer <= 1.0) {
        return Err(Error::ConfigInvalid(format!("p_answer {} outside (0, 1]", config.p_answer)));
    }
    for item in &items {
        match item {
            ItemParams::Binary(p) => p.validate()?,
            ItemParams::Polytomous(p) => p.validate()?,
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    respond(config, abilities, items, &mut rng)
}

fn respond(
    config: GenConfig,
    abilities: Vec<f64>,
    items: Vec<ItemParams>,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset> {
    let binary = config.model.binary();
    let mut answers = Vec::with_capacity(abilities.len() * items.len());
    for (j, &theta) in abilities.iter().enumerate() {
        for (i, item) in items.iter().enumerate() {
            if config.p_answer < 1.0 && rng.gen::<f64>() >= config.p_answer {
                continue;
            }
            let probs = match item {
                ItemParams::Binary(p) => {
                    let model = binary.unwrap_or(super::BinaryModel::ThreePl);
                    let q = prob_binary(model, p, theta);
                    vec![1.0 - q, q]
                }
                ItemParams::Polytomous(p) => prob_polytomous(p, theta)?,
            };
            answers.push((j, i, draw(&probs, rng.gen::<f64>())));
        }
    }
    let option_counts: Vec<usize> = items.iter().map(ItemParams::options).collect();
    let matrix = ResponseMatrix::new(abilities.len(), option_counts, &answers)?;
    let key = items
        .iter()
        .enumerate()
        .map(|(i, item)| (i as u64, item.correct_option()))
        .collect();
    Ok(Dataset {
        matrix,
        abilities,
        key,
        items,
        config,
    })
}

/// Inverse-CDF draw; the last option with positive mass absorbs rounding.
fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (h, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = h;
            acc += p;
            if u < acc {
                return h;
            }
        }
    }
    last
}
