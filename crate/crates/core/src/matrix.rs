//! Sparse one-hot response matrix, its row/column normalizations and the
//! matrix-free kernels shared by the spectral rankers.
//!
//! Rows are users and columns are (item, option) pairs laid out item-major,
//! option-minor. Padding columns (each holding a single one) may be appended
//! after the real columns; they carry no item.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One answer: `user` chose `option` of `item`. Ids are arbitrary non-negative integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Response {
    pub user: u64,
    pub item: u64,
    pub option: u64,
}

impl Response {
    pub fn new(user: u64, item: u64, option: u64) -> Self {
        Self { user, item, option }
    }
}

/// A column of the one-hot matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    /// Compact item index, `None` for padding columns.
    pub item: Option<usize>,
    pub option: usize,
}

impl Column {
    pub fn is_padding(&self) -> bool {
        self.item.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    option_counts: Vec<usize>,
    columns: Vec<Column>,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
}

impl ResponseMatrix {
    /// Builds a matrix from raw answer records.
    ///
    /// Users and items are reindexed to `0..m` and `0..n` in ascending id
    /// order. Option ids are kept as given, so item `i` declares
    /// `max option + 1` options and options nobody chose become empty columns.
    pub fn from_records(records: &[Response]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let users: BTreeSet<u64> = records.iter().map(|r| r.user).collect();
        let mut items: BTreeMap<u64, u64> = BTreeMap::new();
        for r in records {
            let k = items.entry(r.item).or_insert(0);
            *k = (*k).max(r.option + 1);
        }
        let user_index: BTreeMap<u64, usize> =
            users.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let item_index: BTreeMap<u64, usize> =
            items.keys().enumerate().map(|(i, &it)| (it, i)).collect();
        let option_counts: Vec<usize> = items.values().map(|&k| k as usize).collect();

        let answers: Vec<_> = records
            .iter()
            .map(|r| (user_index[&r.user], item_index[&r.item], r.option as usize))
            .collect();
        let user_ids: Vec<u64> = users.into_iter().collect();
        let item_ids: Vec<u64> = items.into_keys().collect();
        Self::assemble(user_ids.clone(), item_ids.clone(), option_counts, &answers).map_err(|e| {
            match e {
                // assemble reports compact indices
                Error::DuplicateAnswer { user, item } => Error::DuplicateAnswer {
                    user: user_ids[user as usize],
                    item: item_ids[item as usize],
                },
                other => other,
            }
        })
    }

    /// Builds a matrix with users `0..users`, items `0..option_counts.len()`
    /// and the declared option count per item. Answers are
    /// `(user, item, option)` triples in compact indices.
    pub fn new(
        users: usize,
        option_counts: Vec<usize>,
        answers: &[(usize, usize, usize)],
    ) -> Result<Self> {
        for &(u, i, h) in answers {
            if u >= users || i >= option_counts.len() || h >= option_counts[i] {
                return Err(Error::InvalidParams(format!(
                    "answer ({u}, {i}, {h}) outside declared shape"
                )));
            }
        }
        let n = option_counts.len() as u64;
        Self::assemble(
            (0..users as u64).collect(),
            (0..n).collect(),
            option_counts,
            answers,
        )
    }

    fn assemble(
        user_ids: Vec<u64>,
        item_ids: Vec<u64>,
        option_counts: Vec<usize>,
        answers: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let mut offsets = Vec::with_capacity(option_counts.len() + 1);
        let mut columns = Vec::new();
        offsets.push(0);
        for (i, &k) in option_counts.iter().enumerate() {
            for h in 0..k {
                columns.push(Column {
                    item: Some(i),
                    option: h,
                });
            }
            offsets.push(columns.len());
        }
        let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); user_ids.len()];
        for &(u, i, h) in answers {
            rows[u].push((i, offsets[i] + h));
        }
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateAnswer {
                    user: u as u64,
                    item: w[0].0 as u64,
                });
            }
        }
        let row_lists: Vec<Vec<usize>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|(_, c)| c).collect())
            .collect();
        Ok(Self::from_rows(user_ids, item_ids, option_counts, columns, row_lists))
    }

    fn from_rows(
        user_ids: Vec<u64>,
        item_ids: Vec<u64>,
        option_counts: Vec<usize>,
        columns: Vec<Column>,
        rows: Vec<Vec<usize>>,
    ) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut row_cols = Vec::new();
        row_ptr.push(0);
        let mut col_deg = vec![0usize; columns.len()];
        for r in &rows {
            for &c in r {
                col_deg[c] += 1;
            }
            row_cols.extend_from_slice(r);
            row_ptr.push(row_cols.len());
        }
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        col_ptr.push(0);
        for d in &col_deg {
            col_ptr.push(col_ptr.last().unwrap() + d);
        }
        let mut fill = col_ptr[..columns.len()].to_vec();
        let mut col_rows = vec![0usize; row_cols.len()];
        for (j, r) in rows.iter().enumerate() {
            for &c in r {
                col_rows[fill[c]] = j;
                fill[c] += 1;
            }
        }
        Self {
            user_ids,
            item_ids,
            option_counts,
            columns,
            row_ptr,
            row_cols,
            col_ptr,
            col_rows,
        }
    }

    /// Number of users `m`.
    pub fn users(&self) -> usize {
        self.user_ids.len()
    }

    /// Number of items `n`.
    pub fn items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    pub fn user_ids(&self) -> &[u64] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[u64] {
        &self.item_ids
    }

    /// Declared option count `k_i` per item.
    pub fn option_counts(&self) -> &[usize] {
        &self.option_counts
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Column ids chosen by user row `j`, ascending.
    pub fn row(&self, j: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[j]..self.row_ptr[j + 1]]
    }

    /// User rows that chose column `c`, ascending.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn row_degree(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn col_degree(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    /// Real (non-padding) answers as `(user row, item index, option id)`.
    pub fn answers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.users()).flat_map(move |j| {
            self.row(j).iter().filter_map(move |&c| {
                let col = self.columns[c];
                col.item.map(|i| (j, i, col.option))
            })
        })
    }

    /// Answer records in original ids, ordered by user then item.
    pub fn records(&self) -> Vec<Response> {
        self.answers()
            .map(|(j, i, h)| Response::new(self.user_ids[j], self.item_ids[i], h as u64))
            .collect()
    }

    pub fn padding_columns(&self) -> usize {
        self.columns.iter().filter(|c| c.is_padding()).count()
    }

    pub fn first_empty_row(&self) -> Option<usize> {
        (0..self.users()).find(|&j| self.row_degree(j) == 0)
    }

    /// Removes columns nobody chose. Remaining columns keep their item and option ids.
    pub fn drop_empty_columns(&self) -> Self {
        let keep: Vec<usize> = (0..self.cols()).filter(|&c| self.col_degree(c) > 0).collect();
        if keep.len() == self.cols() {
            return self.clone();
        }
        let mut remap = vec![usize::MAX; self.cols()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let columns = keep.iter().map(|&c| self.columns[c]).collect();
        let rows = (0..self.users())
            .map(|j| self.row(j).iter().map(|&c| remap[c]).collect())
            .collect();
        Self::from_rows(
            self.user_ids.clone(),
            self.item_ids.clone(),
            self.option_counts.clone(),
            columns,
            rows,
        )
    }

    /// Appends single-entry padding columns until every row has the maximum row degree.
    pub fn pad_equal_row_sums(&self) -> Self {
        let target = (0..self.users()).map(|j| self.row_degree(j)).max().unwrap_or(0);
        let mut columns = self.columns.clone();
        let mut rows: Vec<Vec<usize>> = (0..self.users()).map(|j| self.row(j).to_vec()).collect();
        for (j, row) in rows.iter_mut().enumerate() {
            for _ in self.row_degree(j)..target {
                row.push(columns.len());
                columns.push(Column {
                    item: None,
                    option: 0,
                });
            }
        }
        Self::from_rows(
            self.user_ids.clone(),
            self.item_ids.clone(),
            self.option_counts.clone(),
            columns,
            rows,
        )
    }

    /// Connected components of the user/option bipartite graph, as lists of
    /// user rows. Largest component first, ties by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let m = self.users();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for c in 0..self.cols() {
            let members = self.col(c);
            if let Some((&first, rest)) = members.split_first() {
                let a = find(&mut parent, first);
                for &j in rest {
                    let b = find(&mut parent, j);
                    if a != b {
                        parent[b] = a;
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for j in 0..m {
            let r = find(&mut parent, j);
            groups.entry(r).or_default().push(j);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Restricts the matrix to the given user rows (in the given order) and
    /// drops columns that become empty.
    pub fn select_users(&self, rows: &[usize]) -> Self {
        let user_ids = rows.iter().map(|&j| self.user_ids[j]).collect();
        let row_lists = rows.iter().map(|&j| self.row(j).to_vec()).collect();
        Self::from_rows(
            user_ids,
            self.item_ids.clone(),
            self.option_counts.clone(),
            self.columns.clone(),
            row_lists,
        )
        .drop_empty_columns()
    }

    /// Reorders user rows: row `r` of the result is row `order[r]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let user_ids = order.iter().map(|&j| self.user_ids[j]).collect();
        let row_lists = order.iter().map(|&j| self.row(j).to_vec()).collect();
        Self::from_rows(
            user_ids,
            self.item_ids.clone(),
            self.option_counts.clone(),
            self.columns.clone(),
            row_lists,
        )
    }

    /// Per-nonzero weights of the row- or column-normalized matrix.
    pub fn normalized(&self, axis: Axis) -> NormalizedView {
        let values = match axis {
            Axis::Row => (0..self.users())
                .flat_map(|j| {
                    let w = 1.0 / self.row_degree(j) as f64;
                    std::iter::repeat_n(w, self.row_degree(j))
                })
                .collect(),
            Axis::Col => (0..self.cols())
                .flat_map(|c| {
                    let w = 1.0 / self.col_degree(c) as f64;
                    std::iter::repeat_n(w, self.col_degree(c))
                })
                .collect(),
        };
        NormalizedView { axis, values }
    }

    /// Diagonal of the degree matrix `D` of `C Cᵀ`: `D_jj = Σ_c∈row j deg(c)`.
    pub fn laplacian_degrees(&self) -> Vec<f64> {
        (0..self.users())
            .map(|j| self.row(j).iter().map(|&c| self.col_degree(c) as f64).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

/// Weights of `C^row` (stored in row-major nonzero order) or `C^col`
/// (column-major nonzero order).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedView {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl NormalizedView {
    /// Sums along the normalized axis; each is 1 unless the line is empty.
    pub fn line_sums(&self, matrix: &ResponseMatrix) -> Vec<f64> {
        let (lines, len): (usize, fn(&ResponseMatrix, usize) -> usize) = match self.axis {
            Axis::Row => (matrix.users(), ResponseMatrix::row_degree),
            Axis::Col => (matrix.cols(), ResponseMatrix::col_degree),
        };
        let mut out = Vec::with_capacity(lines);
        let mut at = 0;
        for l in 0..lines {
            let d = len(matrix, l);
            out.push(self.values[at..at + d].iter().sum());
            at += d;
        }
        out
    }
}

/// Adjacent differences `out_j = v_{j+1} - v_j` (the `S` operator).
pub fn diff_apply(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: v.len(),
        });
    }
    Ok(v.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Prefix sums with a leading zero (the `T` operator): length `d` in, `d + 1` out.
pub fn cumsum_apply(w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.len() + 1];
    cumsum_into(w, &mut out);
    out
}

pub(crate) fn cumsum_into(w: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), w.len() + 1);
    let mut acc = 0.0;
    out[0] = 0.0;
    for (o, x) in out[1..].iter_mut().zip(w) {
        acc += x;
        *o = acc;
    }
}

pub(crate) fn diff_into(v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len() + 1, v.len());
    for (o, w) in out.iter_mut().zip(v.windows(2)) {
        *o = w[1] - w[0];
    }
}

/// A square linear map evaluated without materializing its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

impl LinearOperator for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Wraps a closure as an operator of the given dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// `U = C^row (C^col)ᵀ` applied as two sparse passes.
///
/// Empty columns are never reached from a row, so they are skipped rather
/// than rejected.
#[derive(Debug, Clone)]
pub struct UpdateOperator<'a> {
    matrix: &'a ResponseMatrix,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl<'a> UpdateOperator<'a> {
    pub fn new(matrix: &'a ResponseMatrix) -> Result<Self> {
        if let Some(j) = matrix.first_empty_row() {
            return Err(Error::EmptyRow(j));
        }
        let row_scale = (0..matrix.users())
            .map(|j| 1.0 / matrix.row_degree(j) as f64)
            .collect();
        let col_scale = (0..matrix.cols())
            .map(|c| match matrix.col_degree(c) {
                0 => 0.0,
                d => 1.0 / d as f64,
            })
            .collect();
        Ok(Self {
            matrix,
            row_scale,
            col_scale,
        })
    }

    /// `Uᵀ x = C^col (C^row)ᵀ x`.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let m = self.matrix;
        let mut w = vec![0.0; m.cols()];
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = m.col(c).iter().map(|&j| self.row_scale[j] * x[j]).sum();
        }
        for (j, out) in y.iter_mut().enumerate() {
            *out = m.row(j).iter().map(|&c| self.col_scale[c] * w[c]).sum();
        }
    }

    pub fn transposed(&self) -> impl LinearOperator + '_ {
        FnOperator::new(self.dim(), move |x: &[f64], y: &mut [f64]| {
            self.apply_transpose(x, y)
        })
    }
}

impl LinearOperator for UpdateOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.users()
    }

    fn apply(&self, s: &[f64], y: &mut [f64]) {
        let m = self.matrix;
        let mut w = vec![0.0; m.cols()];
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = self.col_scale[c] * m.col(c).iter().map(|&j| s[j]).sum::<f64>();
        }
        for (j, out) in y.iter_mut().enumerate() {
            *out = self.row_scale[j] * m.row(j).iter().map(|&c| w[c]).sum::<f64>();
        }
    }
}

/// `U^diff = S U T` on difference vectors of length `m - 1`.
#[derive(Debug, Clone)]
pub struct DiffUpdateOperator<'a> {
    update: UpdateOperator<'a>,
}

impl<'a> DiffUpdateOperator<'a> {
    pub fn new(matrix: &'a ResponseMatrix) -> Result<Self> {
        if matrix.users() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: matrix.users(),
            });
        }
        Ok(Self {
            update: UpdateOperator::new(matrix)?,
        })
    }
}

impl LinearOperator for DiffUpdateOperator<'_> {
    fn dim(&self) -> usize {
        self.update.dim() - 1
    }

    fn apply(&self, d: &[f64], y: &mut [f64]) {
        let m = self.update.dim();
        let mut s = vec![0.0; m];
        let mut us = vec![0.0; m];
        cumsum_into(d, &mut s);
        self.update.apply(&s, &mut us);
        diff_into(&us, y);
    }
}

/// `L = D - C Cᵀ`, the Laplacian of the user co-choice graph.
#[derive(Debug, Clone)]
pub struct LaplacianOperator<'a> {
    matrix: &'a ResponseMatrix,
    degrees: Vec<f64>,
}

impl<'a> LaplacianOperator<'a> {
    pub fn new(matrix: &'a ResponseMatrix) -> Self {
        Self {
            matrix,
            degrees: matrix.laplacian_degrees(),
        }
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }
}

impl LinearOperator for LaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.users()
    }

    fn apply(&self, v: &[f64], y: &mut [f64]) {
        let m = self.matrix;
        let mut w = vec![0.0; m.cols()];
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = m.col(c).iter().map(|&j| v[j]).sum();
        }
        for (j, out) in y.iter_mut().enumerate() {
            *out = self.degrees[j] * v[j] - m.row(j).iter().map(|&c| w[c]).sum::<f64>();
        }
    }
}

/// `βI - S L T` on difference vectors; its dominant eigenvector is the
/// difference vector of the Fiedler vector of `L`.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacianOperator<'a> {
    laplacian: LaplacianOperator<'a>,
    beta: f64,
}

impl<'a> ShiftedLaplacianOperator<'a> {
    /// Uses the largest degree of `D` as the shift.
    pub fn new(matrix: &'a ResponseMatrix) -> Result<Self> {
        let laplacian = LaplacianOperator::new(matrix);
        let beta = laplacian.max_degree();
        Self::build(laplacian, beta)
    }

    pub fn with_beta(matrix: &'a ResponseMatrix, beta: f64) -> Result<Self> {
        Self::build(LaplacianOperator::new(matrix), beta)
    }

    fn build(laplacian: LaplacianOperator<'a>, beta: f64) -> Result<Self> {
        if laplacian.dim() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: laplacian.dim(),
            });
        }
        let required = laplacian.max_degree();
        if !(beta >= required) {
            return Err(Error::BetaTooSmall { beta, required });
        }
        Ok(Self { laplacian, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl LinearOperator for ShiftedLaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.laplacian.dim() - 1
    }

    fn apply(&self, d: &[f64], y: &mut [f64]) {
        let m = self.laplacian.dim();
        let mut s = vec![0.0; m];
        let mut ls = vec![0.0; m];
        cumsum_into(d, &mut s);
        self.laplacian.apply(&s, &mut ls);
        diff_into(&ls, y);
        for (out, x) in y.iter_mut().zip(d) {
            *out = self.beta * x - *out;
        }
    }
}

/// `C Cᵀ`, the HITS user-to-user operator.
#[derive(Debug, Clone)]
pub struct CoChoiceOperator<'a> {
    matrix: &'a ResponseMatrix,
}

impl<'a> CoChoiceOperator<'a> {
    pub fn new(matrix: &'a ResponseMatrix) -> Self {
        Self { matrix }
    }
}

impl LinearOperator for CoChoiceOperator<'_> {
    fn dim(&self) -> usize {
        self.matrix.users()
    }

    fn apply(&self, s: &[f64], y: &mut [f64]) {
        let m = self.matrix;
        let mut w = vec![0.0; m.cols()];
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = m.col(c).iter().map(|&j| s[j]).sum();
        }
        for (j, out) in y.iter_mut().enumerate() {
            *out = m.row(j).iter().map(|&c| w[c]).sum();
        }
    }
}

fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// `U s`.
pub fn u_matvec(matrix: &ResponseMatrix, s: &[f64]) -> Result<Vec<f64>> {
    check_len(s, matrix.users())?;
    let op = UpdateOperator::new(matrix)?;
    let mut y = vec![0.0; s.len()];
    op.apply(s, &mut y);
    Ok(y)
}

/// `S U T d`.
pub fn udiff_matvec(matrix: &ResponseMatrix, d: &[f64]) -> Result<Vec<f64>> {
    let op = DiffUpdateOperator::new(matrix)?;
    check_len(d, op.dim())?;
    let mut y = vec![0.0; d.len()];
    op.apply(d, &mut y);
    Ok(y)
}

/// `(βI - S L T) d`.
pub fn abh_shifted_matvec(matrix: &ResponseMatrix, d: &[f64], beta: f64) -> Result<Vec<f64>> {
    let op = ShiftedLaplacianOperator::with_beta(matrix, beta)?;
    check_len(d, op.dim())?;
    let mut y = vec![0.0; d.len()];
    op.apply(d, &mut y);
    Ok(y)
}

/// Dense forms of the operators above. These exist to check the sparse
/// kernels and the spectral identities on small instances.
pub mod dense {
    use nalgebra::DMatrix;

    use super::ResponseMatrix;

    pub fn one_hot(m: &ResponseMatrix) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(m.users(), m.cols());
        for j in 0..m.users() {
            for &col in m.row(j) {
                c[(j, col)] = 1.0;
            }
        }
        c
    }

    pub fn row_normalized(m: &ResponseMatrix) -> DMatrix<f64> {
        let mut c = one_hot(m);
        for j in 0..m.users() {
            let d = m.row_degree(j);
            if d > 0 {
                c.row_mut(j).scale_mut(1.0 / d as f64);
            }
        }
        c
    }

    pub fn col_normalized(m: &ResponseMatrix) -> DMatrix<f64> {
        let mut c = one_hot(m);
        for col in 0..m.cols() {
            let d = m.col_degree(col);
            if d > 0 {
                c.column_mut(col).scale_mut(1.0 / d as f64);
            }
        }
        c
    }

    /// `U = C^row (C^col)ᵀ` by dense triple product.
    pub fn update(m: &ResponseMatrix) -> DMatrix<f64> {
        row_normalized(m) * col_normalized(m).transpose()
    }

    /// `S`, shape `(m-1) x m`.
    pub fn diff(m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m - 1, m, |r, c| {
            if c == r + 1 {
                1.0
            } else if c == r {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `T`, shape `m x (m-1)`: row `r` has ones in columns `< r`.
    pub fn cumsum(m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m - 1, |r, c| if c < r { 1.0 } else { 0.0 })
    }

    pub fn update_diff(m: &ResponseMatrix) -> DMatrix<f64> {
        let u = m.users();
        diff(u) * update(m) * cumsum(u)
    }

    pub fn co_choice(m: &ResponseMatrix) -> DMatrix<f64> {
        let c = one_hot(m);
        &c * c.transpose()
    }

    pub fn laplacian(m: &ResponseMatrix) -> DMatrix<f64> {
        let cc = co_choice(m);
        let mut l = -cc.clone();
        for j in 0..cc.nrows() {
            l[(j, j)] += cc.row(j).sum();
        }
        l
    }

    /// `M = S L T`.
    pub fn laplacian_diff(m: &ResponseMatrix) -> DMatrix<f64> {
        let u = m.users();
        diff(u) * laplacian(m) * cumsum(u)
    }
}
