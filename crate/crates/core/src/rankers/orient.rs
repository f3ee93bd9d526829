use crate::matrix::ResponseMatrix;

use super::ScoreVector;

/// Average per-item answer entropy of the top and bottom `⌈m/10⌉` users.
pub fn decile_entropies(scores: &ScoreVector, matrix: &ResponseMatrix) -> (f64, f64) {
    let m = scores.ranking.len();
    let q = m.div_ceil(10).max(1).min(m);
    let top = &scores.ranking[..q];
    let bottom = &scores.ranking[m - q..];
    (mean_entropy(matrix, top), mean_entropy(matrix, bottom))
}

/// Flips the scores when the bottom decile answers more consistently than
/// the top one. Ties keep the input orientation.
pub fn orient_by_decile_entropy(scores: &ScoreVector, matrix: &ResponseMatrix) -> ScoreVector {
    if scores.ranking.len() < 2 {
        return scores.clone();
    }
    let (top, bottom) = decile_entropies(scores, matrix);
    if bottom < top {
        scores.reversed()
    } else {
        scores.clone()
    }
}

fn mean_entropy(matrix: &ResponseMatrix, users: &[usize]) -> f64 {
    let columns = matrix.columns();
    let mut counts: Vec<Vec<f64>> = matrix.option_counts().iter().map(|&k| vec![0.0; k]).collect();
    for &j in users {
        for &c in matrix.row(j) {
            let col = columns[c];
            if let Some(i) = col.item {
                counts[i][col.option] += 1.0;
            }
        }
    }
    let mut total = 0.0;
    let mut answered = 0usize;
    for item in &counts {
        let n: f64 = item.iter().sum();
        if n == 0.0 {
            continue;
        }
        answered += 1;
        total -= item
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| {
                let p = x / n;
                p * p.ln()
            })
            .sum::<f64>();
    }
    if answered == 0 {
        0.0
    } else {
        total / answered as f64
    }
}
