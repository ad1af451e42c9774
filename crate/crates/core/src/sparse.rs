//! Sparse complex operators tied to a labeled Hilbert space.
//!
//! Storage is compressed sparse row with sorted, deduplicated columns.
//! Operators carry an optional handle to the space they act on; operators on
//! compact subspaces or abstract lattice bases carry only their dimension.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;

/// Numerical cutoff below which accumulated entries are dropped.
const DROP_TOL: f64 = 0.0;

#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    space: Option<Arc<HilbertSpace>>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian_hint: bool,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        dim: usize,
        space: Option<Arc<HilbertSpace>>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfBounds { row: r, col: c, dim });
            }
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    let n = vals.len();
                    vals[n - 1] += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            // prune exact zeros produced by cancellation
            let start = row_ptr[row_ptr.len() - 1];
            let mut w = start;
            for r in start..vals.len() {
                if vals[r].norm() > DROP_TOL {
                    cols[w] = cols[r];
                    vals[w] = vals[r];
                    w += 1;
                }
            }
            cols.truncate(w);
            vals.truncate(w);
            row_ptr.push(vals.len());
        }
        Ok(Self { dim, space, row_ptr, cols, vals, hermitian_hint: false })
    }

    pub fn zero(dim: usize, space: Option<Arc<HilbertSpace>>) -> Self {
        Self {
            dim,
            space,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            hermitian_hint: false,
        }
    }

    pub fn identity(dim: usize, space: Option<Arc<HilbertSpace>>) -> Self {
        let mut op = Self::from_triplets(
            dim,
            space,
            (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))),
        )
        .expect("identity triplets are in bounds");
        op.hermitian_hint = true;
        op
    }

    pub fn from_dense(dense: &Array2<C64>, space: Option<Arc<HilbertSpace>>, tol: f64) -> Result<Self> {
        let dim = dense.nrows();
        if dense.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, dense.ncols()));
        }
        Self::from_triplets(
            dim,
            space,
            dense
                .indexed_iter()
                .filter(|(_, v)| v.norm() > tol)
                .map(|((r, c), v)| (r, c, *v)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn space(&self) -> Option<&Arc<HilbertSpace>> {
        self.space.as_ref()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// Mark the operator as Hermitian after verifying the claim.
    pub fn with_hermitian_hint(mut self, tol: f64) -> Result<Self> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        self.hermitian_hint = true;
        Ok(self)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&col) {
            Ok(k) => self.vals[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in out.vals.iter_mut() {
            *v *= factor;
        }
        out.hermitian_hint = self.hermitian_hint && factor.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::from_triplets(
            self.dim,
            self.space.clone().or_else(|| other.space.clone()),
            self.entries().chain(other.entries()),
        )?;
        out.hermitian_hint = self.hermitian_hint && other.hermitian_hint;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_triplets(
            self.dim,
            self.space.clone(),
            self.entries().map(|(r, c, v)| (c, r, v.conj())),
        )
        .expect("adjoint preserves bounds");
        out.hermitian_hint = self.hermitian_hint;
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut triplets = Vec::new();
        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let m = self.cols[k];
                let v = self.vals[k];
                for k2 in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let c = other.cols[k2];
                    if acc[c] == C64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += v * other.vals[k2];
                }
            }
            for &c in touched.iter() {
                if acc[c].norm() > DROP_TOL {
                    triplets.push((r, c, acc[c]));
                }
                acc[c] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Self::from_triplets(self.dim, self.space.clone().or_else(|| other.space.clone()), triplets)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn apply(&self, state: ArrayView1<C64>) -> Array1<C64> {
        assert_eq!(state.len(), self.dim, "state length must match operator dimension");
        let mut out = Array1::zeros(self.dim);
        for r in 0..self.dim {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * state[self.cols[k]];
            }
            out[r] = s;
        }
        out
    }

    /// Expectation value `<psi|A|psi>`.
    pub fn expectation(&self, state: ArrayView1<C64>) -> C64 {
        let applied = self.apply(state);
        state.iter().zip(applied.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.entries() {
            m[[r, c]] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `M - M^dag`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.sub(&self.adjoint())
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    /// Restrict to a subset of basis indices, given the compact index of every
    /// retained parent index. Entries touching dropped indices are discarded.
    pub fn restrict(&self, compact_of_parent: &[Option<usize>], compact_dim: usize) -> Self {
        let mut out = Self::from_triplets(
            compact_dim,
            None,
            self.entries().filter_map(|(r, c, v)| {
                match (compact_of_parent[r], compact_of_parent[c]) {
                    (Some(rr), Some(cc)) => Some((rr, cc, v)),
                    _ => None,
                }
            }),
        )
        .expect("restriction preserves bounds");
        out.hermitian_hint = self.hermitian_hint;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let op = SparseOperator::from_triplets(
            3,
            None,
            vec![(0, 2, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (0, 2, c(0.5, 0.0))],
        )
        .unwrap();
        assert_eq!(op.get(0, 1), c(2.0, 0.0));
        assert_eq!(op.get(0, 2), c(1.5, 0.0));
        assert_eq!(op.nnz(), 2);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let r = SparseOperator::from_triplets(2, None, vec![(0, 2, c(1.0, 0.0))]);
        assert!(matches!(r, Err(Error::IndexOutOfBounds { .. })));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseOperator::from_triplets(
            2,
            None,
            vec![(0, 1, c(1.0, 1.0)), (1, 0, c(0.0, -2.0))],
        )
        .unwrap();
        let b = SparseOperator::from_triplets(
            2,
            None,
            vec![(0, 0, c(3.0, 0.0)), (1, 1, c(0.0, 1.0))],
        )
        .unwrap();
        let ab = a.matmul(&b).unwrap().to_dense();
        let dense = a.to_dense().dot(&b.to_dense());
        for i in 0..2 {
            for j in 0..2 {
                assert!((ab[[i, j]] - dense[[i, j]]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hermiticity_deviation_detects() {
        let h = SparseOperator::from_triplets(
            2,
            None,
            vec![(0, 1, c(0.0, -1.0)), (1, 0, c(0.0, 1.0))],
        )
        .unwrap();
        assert!(h.hermiticity_deviation() < 1e-15);
        let nh = SparseOperator::from_triplets(2, None, vec![(0, 1, c(1.0, 0.0))]).unwrap();
        assert!(nh.hermiticity_deviation() > 0.9);
    }

    #[test]
    fn apply_and_expectation() {
        let op = SparseOperator::from_triplets(
            2,
            None,
            vec![(0, 0, c(1.0, 0.0)), (1, 1, c(-1.0, 0.0))],
        )
        .unwrap();
        let st = ndarray::array![c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(op.expectation(st.view()), c(1.0, 0.0));
    }
}
