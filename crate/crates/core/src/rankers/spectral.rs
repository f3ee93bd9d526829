use crate::error::{Error, Result};
use crate::matrix::{
    cumsum_apply, dense, DiffUpdateOperator, ResponseMatrix, ShiftedLaplacianOperator,
    UpdateOperator,
};
use crate::spectral::{dense_eig_oracle, hotelling_deflation, power_iteration, DENSE_ORACLE_LIMIT};

use super::{require_connected, RankConfig, ScoreVector};

/// An operator that annihilates the start vector has no ordering
/// information beyond the dominant pair: every user ties.
fn tied_if_annihilated(result: Result<ScoreVector>, m: usize) -> Result<ScoreVector> {
    match result {
        Err(Error::ZeroIterate) => Ok(ScoreVector::new(vec![0.0; m]).with_iterations(1)),
        other => other,
    }
}

/// HITSnDIFFs: power iteration on `U^diff = S U T`, scores by cumulative sum
/// of the converged difference vector. Each step costs `O(nnz)`.
pub fn hnd_power(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    require_connected(matrix)?;
    if matrix.users() == 1 {
        return Ok(ScoreVector::new(vec![0.0]));
    }
    let op = DiffUpdateOperator::new(matrix)?;
    let run = power_iteration(&op, &config.power).map(|result| {
        ScoreVector::new(cumsum_apply(&result.eigenvector))
            .with_iterations(result.iterations)
            .with_spectral(result)
    });
    tied_if_annihilated(run, matrix.users())
}

/// Second eigenvector of `U` by Hotelling deflation. The right dominant
/// eigenvector of `U` is the constant vector; the left one is found by power
/// iteration on `Uᵀ`.
pub fn hnd_deflation(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    require_connected(matrix)?;
    let m = matrix.users();
    if m == 1 {
        return Ok(ScoreVector::new(vec![0.0]));
    }
    let update = UpdateOperator::new(matrix)?;
    let ones = vec![1.0 / (m as f64).sqrt(); m];
    let run = hotelling_deflation(&update, &update.transposed(), &ones, &config.power).map(|run| {
        let iterations = run.left_dominant.iterations + run.second.iterations;
        ScoreVector::new(run.second.eigenvector.clone())
            .with_iterations(iterations)
            .with_spectral(run.second)
    });
    tied_if_annihilated(run, m)
}

/// ABH by power iteration on `βI - S L T`, scores by cumulative sum.
pub fn abh_power(matrix: &ResponseMatrix, config: &RankConfig) -> Result<ScoreVector> {
    require_connected(matrix)?;
    if matrix.users() == 1 {
        return Ok(ScoreVector::new(vec![0.0]));
    }
    let op = match config.abh_beta {
        Some(beta) => ShiftedLaplacianOperator::with_beta(matrix, beta)?,
        None => ShiftedLaplacianOperator::new(matrix)?,
    };
    let result = power_iteration(&op, &config.power)?;
    let scores = cumsum_apply(&result.eigenvector);
    Ok(ScoreVector::new(scores)
        .with_iterations(result.iterations)
        .with_spectral(result))
}

/// ABH on the dense Laplacian: scores are the Fiedler vector. Small inputs only.
pub fn abh_fiedler_dense(matrix: &ResponseMatrix) -> Result<ScoreVector> {
    let m = matrix.users();
    if m > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what: "dense Laplacian",
            size: m,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    if let Some(j) = matrix.first_empty_row() {
        return Err(Error::EmptyRow(j));
    }
    if m == 1 {
        return Ok(ScoreVector::new(vec![0.0]));
    }
    let l = dense::laplacian(matrix);
    let eig = dense_eig_oracle(&l)?;
    let fiedler_value = eig.values[m - 2];
    // λ₂(L) vanishes exactly when the co-choice graph is disconnected
    if fiedler_value <= 1e-9 * eig.values[0].max(1.0) {
        return Err(Error::Disconnected(matrix.connected_components()));
    }
    let vector = eig.vectors[m - 2].clone();
    let mut sv = ScoreVector::new(vector.clone());
    sv.spectral = Some(crate::spectral::SpectralResult {
        eigenvalue: fiedler_value,
        eigenvector: vector,
        iterations: 0,
        converged: true,
    });
    Ok(sv)
}
