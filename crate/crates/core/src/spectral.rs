//! Power iteration, Hotelling deflation and a small dense eigen-solver used
//! as a reference in tests.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{FnOperator, LinearOperator};

/// Iterates whose norm falls below this are treated as annihilated.
const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Stop once the L2 change between successive unit iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the random starting vector.
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 1000,
            seed: 0,
        }
    }
}

impl PowerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParams(format!(
                "power iteration needs tol > 0 and max_iter >= 1 (got {}, {})",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Rayleigh quotient at exit.
    pub eigenvalue: f64,
    /// Unit L2 norm; first nonzero entry positive.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flips `v` so its first nonzero entry is positive.
pub fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Seeded uniform `[-1, 1]` unit vector, redrawn once if degenerate.
pub fn random_start(dim: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm(&v);
        if n >= ZERO_NORM {
            v.iter_mut().for_each(|x| *x /= n);
            return Ok(v);
        }
    }
    Err(Error::ZeroIterate)
}

/// Dominant eigenpair of `op` from a seeded random start.
pub fn power_iteration<A: LinearOperator>(op: &A, config: &PowerConfig) -> Result<SpectralResult> {
    config.validate()?;
    if op.dim() == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: 0,
        });
    }
    let start = random_start(op.dim(), config.seed)?;
    power_iteration_from(op, start, config)
}

/// Dominant eigenpair of `op` from the given start vector.
pub fn power_iteration_from<A: LinearOperator>(
    op: &A,
    start: Vec<f64>,
    config: &PowerConfig,
) -> Result<SpectralResult> {
    config.validate()?;
    let dim = op.dim();
    if start.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: start.len(),
        });
    }
    let mut v = start;
    let n0 = norm(&v);
    if n0 < ZERO_NORM {
        return Err(Error::ZeroIterate);
    }
    v.iter_mut().for_each(|x| *x /= n0);

    let mut w = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        op.apply(&v, &mut w);
        let n = norm(&w);
        if !(n >= ZERO_NORM) {
            return Err(Error::ZeroIterate);
        }
        let mut change = 0.0;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi /= n;
            change += (*wi - vi) * (*wi - vi);
        }
        std::mem::swap(&mut v, &mut w);
        if change.sqrt() < config.tol {
            converged = true;
            break;
        }
    }
    op.apply(&v, &mut w);
    let eigenvalue = dot(&v, &w);
    normalize_sign(&mut v);
    Ok(SpectralResult {
        eigenvalue,
        eigenvector: v,
        iterations,
        converged,
    })
}

/// Both stages of a Hotelling deflation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflation {
    /// Dominant left eigenvector of `A` (power iteration on `Aᵀ`).
    pub left_dominant: SpectralResult,
    /// Dominant eigenpair of the deflated operator, i.e. the second eigenpair of `A`.
    pub second: SpectralResult,
}

/// Second-largest eigenpair of `A` given its known right dominant eigenvector.
///
/// `right` applies `A`, `left` applies `Aᵀ`. The dominant left eigenvector
/// `u₁` is found by power iteration, then `A' x = A x - λ₁ v₁ (u₁ᵀx)/(u₁ᵀv₁)`
/// is power-iterated without forming `A'`.
pub fn hotelling_deflation<R: LinearOperator, L: LinearOperator>(
    right: &R,
    left: &L,
    known_right_dominant: &[f64],
    config: &PowerConfig,
) -> Result<Deflation> {
    let dim = right.dim();
    if left.dim() != dim || known_right_dominant.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: known_right_dominant.len(),
        });
    }
    let vn = norm(known_right_dominant);
    if vn < ZERO_NORM {
        return Err(Error::ZeroIterate);
    }
    let v1: Vec<f64> = known_right_dominant.iter().map(|x| x / vn).collect();
    let mut av = vec![0.0; dim];
    right.apply(&v1, &mut av);
    let lambda1 = dot(&v1, &av);

    let left_dominant = power_iteration(left, config)?;
    let u1 = &left_dominant.eigenvector;
    let denom = dot(u1, &v1);
    if denom.abs() < ZERO_NORM {
        return Err(Error::DegenerateDeflation);
    }
    let deflated = FnOperator::new(dim, |x: &[f64], y: &mut [f64]| {
        right.apply(x, y);
        let coef = lambda1 * dot(u1, x) / denom;
        for (yi, vi) in y.iter_mut().zip(&v1) {
            *yi -= coef * vi;
        }
    });
    let second = power_iteration(
        &deflated,
        &PowerConfig {
            seed: config.seed.wrapping_add(1),
            ..*config
        },
    )?;
    Ok(Deflation {
        left_dominant,
        second,
    })
}

/// Second-largest eigenpair via [`hotelling_deflation`].
pub fn second_eigvec_hotelling<R: LinearOperator, L: LinearOperator>(
    right: &R,
    left: &L,
    known_right_dominant: &[f64],
    config: &PowerConfig,
) -> Result<SpectralResult> {
    hotelling_deflation(right, left, known_right_dominant, config).map(|d| d.second)
}

/// Full spectrum of a small dense matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`, sign-normalized.
    pub vectors: Vec<Vec<f64>>,
}

pub const DENSE_ORACLE_LIMIT: usize = 64;

/// Reference eigen-decomposition for matrices up to 64x64.
///
/// Symmetric input goes through a symmetric eigen-solver. Otherwise the
/// eigenvalues come from the real Schur form (and must be real), and each
/// eigenvector is the right singular vector of `A - λI` with the smallest
/// singular value. For repeated eigenvalues that yields one vector of the
/// eigenspace, not a basis.
pub fn dense_eig_oracle(a: &DMatrix<f64>) -> Result<DenseEigen> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    if rows > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what: "dense eigenproblem",
            size: rows,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    let scale = a.amax().max(1.0);
    let symmetric = (0..rows).all(|r| (0..r).all(|c| (a[(r, c)] - a[(c, r)]).abs() <= 1e-12 * scale));
    let mut pairs: Vec<(f64, Vec<f64>)> = if symmetric {
        let eig = a.clone().symmetric_eigen();
        (0..rows)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
            .collect()
    } else {
        let values = a.complex_eigenvalues();
        let mut pairs = Vec::with_capacity(rows);
        for z in values.iter() {
            if z.im.abs() > 1e-9 * scale {
                return Err(Error::ComplexSpectrum);
            }
            let shifted = a - DMatrix::identity(rows, rows) * z.re;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.expect("requested V");
            let (idx, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .expect("nonempty");
            pairs.push((z.re, v_t.row(idx).iter().copied().collect()));
        }
        pairs
    };
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut values = Vec::with_capacity(rows);
    let mut vectors = Vec::with_capacity(rows);
    for (val, mut vec) in pairs {
        let n = norm(&vec);
        vec.iter_mut().for_each(|x| *x /= n);
        normalize_sign(&mut vec);
        values.push(val);
        vectors.push(vec);
    }
    Ok(DenseEigen { values, vectors })
}
