use crate::error::{Error, Result};
use crate::matrix::{CoChoiceOperator, ResponseMatrix};
use crate::spectral::power_iteration_from;

use super::{require_connected, AnswerKey, RankConfig, ScoreVector};

const TRUTHFINDER_CAP: f64 = 1.0 - 1e-12;

/// HITS: dominant eigenvector of `C Cᵀ`, started from the all-ones vector.
pub fn hits(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    require_connected(matrix)?;
    let m = matrix.users();
    if m == 1 {
        return Ok(ScoreVector::new(vec![1.0]));
    }
    let op = CoChoiceOperator::new(matrix);
    let start = vec![1.0; m];
    let result = power_iteration_from(&op, start, &config.power)?;
    Ok(ScoreVector::new(result.eigenvector.clone())
        .with_iterations(result.iterations)
        .with_spectral(result))
}

/// Option weights `w = 1 - exp(Cᵀ log(1 - s))`.
pub fn truthfinder_weights(matrix: &ResponseMatrix, s: &[f64]) -> Vec<f64> {
    (0..matrix.cols())
        .map(|c| {
            let log_miss: f64 = matrix.col(c).iter().map(|&j| (-s[j]).ln_1p()).sum();
            -log_miss.exp_m1()
        })
        .collect()
}

/// TruthFinder with averaged user updates `s = C^row w`.
pub fn truthfinder(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    if let Some(j) = matrix.first_empty_row() {
        return Err(Error::EmptyRow(j));
    }
    let prior = config.truthfinder_prior;
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "truthfinder prior must lie in (0,1), got {prior}"
        )));
    }
    let m = matrix.users();
    let mut s = vec![prior; m];
    let mut iterations = 0;
    while iterations < config.power.max_iter {
        iterations += 1;
        let w = truthfinder_weights(matrix, &s);
        let mut change = 0f64;
        for (j, sj) in s.iter_mut().enumerate() {
            let row = matrix.row(j);
            let avg = row.iter().map(|&c| w[c]).sum::<f64>() / row.len() as f64;
            let next = avg.min(TRUTHFINDER_CAP);
            change = change.max((next - *sj).abs());
            *sj = next;
        }
        if change < config.power.tol {
            break;
        }
    }
    Ok(ScoreVector::new(s).with_iterations(iterations))
}

/// Investment with `G(x) = x^g`.
pub fn investment(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    let g = config.investment_exponent;
    invest(matrix, config.investment_iterations, |credit| {
        credit.iter().map(|h| h.powf(g)).collect()
    })
}

/// PooledInvestment: `w_c = H_c G(H_c) / Σ G(H_c')` over the options of the
/// same item, `G(x) = x^g`.
pub fn pooled_investment(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    let g = config.pooled_exponent;
    let columns = matrix.columns();
    let groups = matrix.items() + matrix.padding_columns();
    invest(matrix, config.investment_iterations, |credit| {
        // padding columns each form their own group
        let mut next_pad = matrix.items();
        let group: Vec<usize> = columns
            .iter()
            .map(|col| match col.item {
                Some(i) => i,
                None => {
                    next_pad += 1;
                    next_pad - 1
                }
            })
            .collect();
        let mut pool = vec![0.0; groups];
        for (c, h) in credit.iter().enumerate() {
            pool[group[c]] += h.powf(g);
        }
        credit
            .iter()
            .enumerate()
            .map(|(c, &h)| {
                let p = pool[group[c]];
                if p > 0.0 {
                    h * h.powf(g) / p
                } else {
                    0.0
                }
            })
            .collect()
    })
}

fn invest<F>(matrix: &ResponseMatrix, rounds: usize, weigh: F) -> Result<ScoreVector>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    require_connected(matrix)?;
    let m = matrix.users();
    let mut s = vec![1.0; m];
    let mut share = vec![0.0; m];
    let mut credit = vec![0.0; matrix.cols()];
    for _ in 0..rounds {
        for j in 0..m {
            share[j] = s[j] / matrix.row_degree(j) as f64;
        }
        for (c, h) in credit.iter_mut().enumerate() {
            *h = matrix.col(c).iter().map(|&j| share[j]).sum();
        }
        let w = weigh(&credit);
        for j in 0..m {
            s[j] = matrix
                .row(j)
                .iter()
                .map(|&c| if credit[c] > 0.0 { w[c] * share[j] / credit[c] } else { 0.0 })
                .sum();
        }
        // rescale to keep magnitudes bounded; the ranking is unaffected
        let top = s.iter().cloned().fold(0.0, f64::max);
        if top > 0.0 {
            s.iter_mut().for_each(|x| *x /= top);
        }
    }
    Ok(ScoreVector::new(s).with_iterations(rounds))
}

/// Number of correctly answered items per user.
pub fn true_answer(matrix: &ResponseMatrix, key: &AnswerKey) -> Result<ScoreVector> {
    let mut correct = Vec::with_capacity(matrix.items());
    for (i, (&id, &k)) in matrix.item_ids().iter().zip(matrix.option_counts()).enumerate() {
        let h = key.get(id).ok_or(Error::MissingKey(id))?;
        if h >= k {
            return Err(Error::InvalidKey { item: id, option: h });
        }
        debug_assert_eq!(correct.len(), i);
        correct.push(h);
    }
    let mut scores = vec![0.0; matrix.users()];
    for (j, i, h) in matrix.answers() {
        if correct[i] == h {
            scores[j] += 1.0;
        }
    }
    Ok(ScoreVector::new(scores))
}
