//! Consecutive-ones checks: P-matrix tests, brute-force row orders for small
//! inputs, an order-uniqueness test and the R-matrix check.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ResponseMatrix;

/// Largest row count accepted by [`brute_force_c1p_order`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

const R_MATRIX_TOL: f64 = 1e-12;

/// Dense 0/1 matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(p) = data.iter().position(|&x| x > 1) {
            return Err(Error::NonBinary {
                row: p / cols.max(1),
                col: p % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                actual: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// One-hot matrix `C` of a response matrix.
    pub fn one_hot(matrix: &ResponseMatrix) -> Self {
        let (rows, cols) = (matrix.users(), matrix.cols());
        let mut data = vec![0; rows * cols];
        for j in 0..rows {
            for &c in matrix.row(j) {
                data[j * cols + c] = 1;
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Row `r` of the result is row `order[r]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let data = order.iter().flat_map(|&j| self.row(j).iter().copied()).collect();
        Self {
            rows: order.len(),
            cols: self.cols,
            data,
        }
    }

    /// Column permutation; column `c` of the result is column `order[c]`.
    pub fn permute_cols(&self, order: &[usize]) -> Self {
        let data = (0..self.rows)
            .flat_map(|j| order.iter().map(move |&c| self.get(j, c)))
            .collect();
        Self {
            rows: self.rows,
            cols: order.len(),
            data,
        }
    }
}

/// True iff the 1s of every column are contiguous.
pub fn is_p_matrix(matrix: &BinaryMatrix) -> bool {
    (0..matrix.cols).all(|c| {
        let mut state = 0u8; // 0 before the block, 1 inside, 2 after
        for j in 0..matrix.rows {
            match (state, matrix.get(j, c)) {
                (0, 1) => state = 1,
                (1, 0) => state = 2,
                (2, 1) => return false,
                _ => {}
            }
        }
        true
    })
}

/// P-matrix test of `matrix` with rows listed in `order`, in `O(nnz + m)`.
pub fn is_p_ordered(matrix: &ResponseMatrix, order: &[usize]) -> Result<bool> {
    if order.len() != matrix.users() {
        return Err(Error::DimensionMismatch {
            expected: matrix.users(),
            actual: order.len(),
        });
    }
    let mut position = vec![usize::MAX; order.len()];
    for (r, &j) in order.iter().enumerate() {
        if j >= order.len() || position[j] != usize::MAX {
            return Err(Error::InvalidParams("order is not a permutation".into()));
        }
        position[j] = r;
    }
    Ok((0..matrix.cols()).all(|c| {
        let rows = matrix.col(c);
        if rows.is_empty() {
            return true;
        }
        let (lo, hi) = rows
            .iter()
            .map(|&j| position[j])
            .fold((usize::MAX, 0), |(lo, hi), p| (lo.min(p), hi.max(p)));
        hi - lo + 1 == rows.len()
    }))
}

/// A row order under which a matrix is a P-matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationCertificate {
    /// Position `r` holds the original row placed there.
    pub permutation: Vec<usize>,
    pub verified: bool,
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C1POrders {
    /// Lexicographically first certifying permutation.
    pub certificate: PermutationCertificate,
    /// Number of certifying permutations, reversals counted separately.
    pub count: usize,
}

impl C1POrders {
    /// One order up to reversal. A single row has one order.
    pub fn is_unique(&self) -> bool {
        self.count == 2 || (self.count == 1 && self.certificate.permutation.len() <= 1)
    }
}

/// Tries all `m!` row orders.
pub fn brute_force_c1p_order(matrix: &BinaryMatrix) -> Result<C1POrders> {
    let m = matrix.rows;
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force row count",
            size: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut first: Option<Vec<usize>> = None;
    let mut count = 0;
    for perm in (0..m).permutations(m) {
        if is_p_matrix(&matrix.permute_rows(&perm)) {
            count += 1;
            if first.as_ref().is_none_or(|f| perm < *f) {
                first = Some(perm);
            }
        }
    }
    let permutation = first.ok_or(Error::NoC1POrder)?;
    Ok(C1POrders {
        certificate: PermutationCertificate {
            permutation,
            verified: true,
        },
        count,
    })
}

/// Sufficient test for a C1P order being unique up to reversal: the
/// columns with between 2 and `m-1` ones overlap into one connected
/// component covering every row, and no two rows agree on all of them.
/// Only meaningful when some C1P order exists.
pub fn has_unique_c1p_order(matrix: &ResponseMatrix) -> bool {
    let m = matrix.users();
    if m <= 2 {
        return m > 0;
    }
    let cols: Vec<usize> = (0..matrix.cols())
        .filter(|&c| (2..m).contains(&matrix.col_degree(c)))
        .collect();
    if cols.is_empty() {
        return false;
    }
    let mut covered = vec![false; m];
    for &c in &cols {
        for &j in matrix.col(c) {
            covered[j] = true;
        }
    }
    if covered.iter().any(|x| !x) {
        return false;
    }
    // connectivity of the overlap graph by breadth-first search
    let mut seen = vec![false; cols.len()];
    let mut queue = vec![0];
    seen[0] = true;
    while let Some(a) = queue.pop() {
        for b in 0..cols.len() {
            if !seen[b] && overlaps(matrix.col(cols[a]), matrix.col(cols[b])) {
                seen[b] = true;
                queue.push(b);
            }
        }
    }
    seen.iter().all(|&x| x) && rows_distinct(matrix, &cols)
}

/// Sets intersect and neither contains the other. Inputs are sorted.
fn overlaps(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut k, mut common) = (0, 0, 0);
    while i < a.len() && k < b.len() {
        match a[i].cmp(&b[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                k += 1;
            }
        }
    }
    common > 0 && common < a.len() && common < b.len()
}

fn rows_distinct(matrix: &ResponseMatrix, cols: &[usize]) -> bool {
    let mut keep = vec![false; matrix.cols()];
    for &c in cols {
        keep[c] = true;
    }
    let mut rows: Vec<Vec<usize>> = (0..matrix.users())
        .map(|j| matrix.row(j).iter().copied().filter(|&c| keep[c]).collect())
        .collect();
    rows.sort();
    rows.windows(2).all(|w| w[0] != w[1])
}

/// Symmetric, with entries non-increasing moving away from the diagonal
/// along each row.
pub fn is_r_matrix(a: &DMatrix<f64>) -> Result<bool> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    for j in 0..n {
        for i in 0..j {
            if (a[(j, i)] - a[(i, j)]).abs() > R_MATRIX_TOL {
                return Ok(false);
            }
        }
    }
    for j in 0..n {
        // right of the diagonal: A[j,i] >= A[j,i+1]
        for i in j + 1..n.saturating_sub(1) {
            if a[(j, i)] < a[(j, i + 1)] - R_MATRIX_TOL {
                return Ok(false);
            }
        }
        // left of the diagonal: A[j,i] <= A[j,i+1]
        for i in 0..j.saturating_sub(1) {
            if a[(j, i)] > a[(j, i + 1)] + R_MATRIX_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
