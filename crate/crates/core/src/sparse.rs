//! Row-compressed sparse matrix of `f64`.
//!
//! Only nonzero entries are stored. Each row's column indices are strictly
//! increasing, so `(row, col)` pairs are unique by construction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub dim: usize,
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> SparseRow<'a> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dot product by merging the two sorted index lists.
    pub fn dot(&self, other: &SparseRow<'_>) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    /// Dot product with a dense slice of length `dim`.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(c, v)| v * dense[c]).sum()
    }
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    /// Out-of-range positions, duplicate positions, zero and non-finite
    /// values are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside {rows}x{cols} matrix"
                )));
            }
            if last == Some((r, c)) {
                return Err(Error::invalid(format!("duplicate entry ({r}, {c})")));
            }
            if !v.is_finite() || v == 0.0 {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) has stored value {v}"
                )));
            }
            last = Some((r, c));
            row_lists[r].push((c, v));
        }
        Ok(Self::from_sorted_rows(cols, row_lists))
    }

    /// Rows given as `(col, value)` lists sorted by column. Zero values are
    /// dropped.
    pub(crate) fn from_sorted_rows(cols: usize, row_lists: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(row_lists.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &row_lists {
            for &(c, v) in row {
                debug_assert!(c < cols);
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            rows: row_lists.len(),
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(dense: &[Vec<f64>], cols: usize) -> Self {
        let rows = dense
            .iter()
            .map(|row| {
                row.iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> SparseRow<'_> {
        let (start, end) = (self.indptr[r], self.indptr[r + 1]);
        SparseRow {
            dim: self.cols,
            indices: &self.indices[start..end],
            values: &self.values[start..end],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = self.row(r);
        match row.indices.binary_search(&c) {
            Ok(i) => row.values[i],
            Err(_) => 0.0,
        }
    }

    /// Row-major `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let lists = rows
            .iter()
            .map(|&r| self.row(r).iter().collect::<Vec<_>>())
            .collect();
        Self::from_sorted_rows(self.cols, lists)
    }

    /// Places `other`'s columns to the right of this matrix's.
    pub fn hstack(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                actual: other.rows,
            });
        }
        let lists = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .chain(other.row(r).iter().map(|(c, v)| (c + self.cols, v)))
                    .collect()
            })
            .collect();
        Ok(Self::from_sorted_rows(self.cols + other.cols, lists))
    }

    /// Applies `f(col, value)` to every stored entry.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> SparseMatrix {
        let mut out = self.clone();
        for (v, &c) in out.values.iter_mut().zip(&self.indices) {
            *v = f(c, *v);
        }
        out
    }

    /// Scales each row by `factor(row)`.
    pub fn scale_rows(&self, factor: impl Fn(usize) -> f64) -> SparseMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            let s = factor(r);
            for v in &mut out.values[self.indptr[r]..self.indptr[r + 1]] {
                *v *= s;
            }
        }
        out
    }

    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|v| *v < 0.0)
    }
}
