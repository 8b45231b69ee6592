//! Sparse norms and the greedy sparse-direction decomposition.
//!
//! The `(2,k)` norm of a vector is the root-sum of its `k` largest squared
//! entries. The `(F,k,k)` norm of a matrix keeps, for every row, its `k`
//! largest squared entries, then sums the `k` best rows. The maximizer of
//! `<A, B>` over unit-Frobenius matrices with `k` rows of `k` entries each is
//! the masked, normalized input, which is what [`fkk_norm`] returns.
//!
//! All top-k selections break ties toward the lowest index.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{param, Result};

/// Indices of the `k` largest keys, ordered by decreasing key then increasing index.
pub(crate) fn top_k_by<F: Fn(usize) -> f64>(len: usize, k: usize, key: F) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k < 1 || k > d {
        return param(format!("sparsity k={k} must lie in 1..={d}"));
    }
    Ok(())
}

/// `||x||_{2,k}`: root-sum of the `k` largest squared entries.
pub fn sparse_norm_2k(x: ArrayView1<f64>, k: usize) -> Result<f64> {
    check_k(k, x.len())?;
    let top = top_k_by(x.len(), k, |i| x[i] * x[i]);
    Ok(top.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt())
}

/// Keeps the `k` entries of largest magnitude and zeroes the rest.
pub fn truncate_top_k(x: ArrayView1<f64>, k: usize) -> Result<Array1<f64>> {
    check_k(k, x.len())?;
    let mut out = Array1::zeros(x.len());
    for i in top_k_by(x.len(), k, |i| x[i].abs()) {
        out[i] = x[i];
    }
    Ok(out)
}

/// Square matrix stored as `(row, col, value)` triplets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|(i, j, _)| i == j).map(|e| e.2).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }

    /// `<self, b>` for a dense `b`.
    pub fn inner(&self, b: ArrayView2<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| v * b[[i, j]]).sum()
    }

    /// `(x - center)^T A (x - center)`.
    pub fn quad_form(&self, x: ArrayView1<f64>, center: ArrayView1<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| v * (x[i] - center[i]) * (x[j] - center[j])).sum()
    }

    pub fn bilinear(&self, u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, a)| u[i] * a * v[j]).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for &(i, j, v) in &self.entries {
            out[[i, j]] += v;
        }
        out
    }
}

/// A unit-Frobenius matrix with at most `k` nonzero rows of at most `k` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDirection {
    pub matrix: SparseMatrix,
    /// Nonzero rows, ascending.
    pub row_support: Vec<usize>,
    /// Nonzero columns of each row in `row_support`, ascending.
    pub col_support_per_row: Vec<Vec<usize>>,
    /// `<A, B>` for the matrix `B` this direction was fit to.
    pub score: f64,
    /// Set when the input was identically zero and this is the canonical `e1 e1^T`.
    pub null: bool,
}

impl SparseDirection {
    fn null(dim: usize) -> Self {
        Self {
            matrix: SparseMatrix { dim, entries: vec![(0, 0, 1.0)] },
            row_support: vec![0],
            col_support_per_row: vec![vec![0]],
            score: 0.0,
            null: true,
        }
    }

    /// Rows and columns touched by the matrix, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.matrix.entries.iter().flat_map(|&(i, j, _)| [i, j]).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// `(F,k,k)` norm restricted to the rows/columns flagged in `active`.
fn fkk_masked(a: ArrayView2<f64>, k: usize, active: &[bool]) -> (f64, SparseDirection) {
    let d = a.nrows();
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| active[j]).collect();
    let rows: Vec<usize> = (0..d).filter(|&i| active[i]).collect();
    let k_rows = k.min(rows.len());
    let k_cols = k.min(cols.len());

    let mut row_best: Vec<(Vec<usize>, f64)> = Vec::with_capacity(rows.len());
    for &i in &rows {
        let row = a.row(i);
        let picked: Vec<usize> =
            top_k_by(cols.len(), k_cols, |c| row[cols[c]] * row[cols[c]]).into_iter().map(|c| cols[c]).collect();
        let mass = picked.iter().map(|&j| row[j] * row[j]).sum::<f64>();
        row_best.push((picked, mass));
    }
    let chosen = top_k_by(rows.len(), k_rows, |r| row_best[r].1);
    let total: f64 = chosen.iter().map(|&r| row_best[r].1).sum();
    let value = total.sqrt();
    if value == 0.0 || !value.is_finite() {
        return (0.0, SparseDirection::null(d));
    }

    let mut picked_rows: Vec<usize> = chosen.clone();
    picked_rows.sort_by_key(|&r| rows[r]);
    let mut entries = Vec::new();
    let mut row_support = Vec::new();
    let mut col_support_per_row = Vec::new();
    for r in picked_rows {
        let i = rows[r];
        let mut cs: Vec<usize> = row_best[r].0.iter().copied().filter(|&j| a[[i, j]] != 0.0).collect();
        if cs.is_empty() {
            continue;
        }
        cs.sort_unstable();
        for &j in &cs {
            entries.push((i, j, a[[i, j]] / value));
        }
        row_support.push(i);
        col_support_per_row.push(cs);
    }
    let dir = SparseDirection {
        matrix: SparseMatrix { dim: d, entries },
        row_support,
        col_support_per_row,
        score: value,
        null: false,
    };
    (value, dir)
}

/// `||A||_{F,k,k}` and its variational maximizer `(A ⊙ M) / ||A ⊙ M||_F`.
///
/// An all-zero matrix yields value 0 and the flagged null direction `e1 e1^T`.
pub fn fkk_norm(a: ArrayView2<f64>, k: usize) -> Result<(f64, SparseDirection)> {
    if a.nrows() != a.ncols() {
        return param(format!("fkk_norm needs a square matrix, got {:?}", a.shape()));
    }
    check_k(k, a.nrows())?;
    Ok(fkk_masked(a, k, &vec![true; a.nrows()]))
}

/// Directions `A_1..A_r'` with disjoint supports, their scores and `g_r = sum h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDirectionSet {
    pub dim: usize,
    pub directions: Vec<SparseDirection>,
    /// `H_i`: rows and columns of `A_i`.
    pub supports: Vec<Vec<usize>>,
    pub g_value: f64,
}

impl SparseDirectionSet {
    pub fn scores(&self) -> Vec<f64> {
        self.directions.iter().map(|d| d.score).collect()
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `A = sum_i A_i`. Supports are disjoint, so this is a block-diagonal concatenation.
    pub fn composite(&self) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.dim);
        for dir in &self.directions {
            out.entries.extend_from_slice(&dir.matrix.entries);
        }
        out
    }

    /// `H = H_1 ∪ … ∪ H_r'`, ascending.
    pub fn union_support(&self) -> Vec<usize> {
        let mut h: Vec<usize> = self.supports.iter().flatten().copied().collect();
        h.sort_unstable();
        h.dedup();
        h
    }
}

/// Greedy decomposition: `A_i` maximizes `<A, B'>` where `B'` is `B` with the
/// rows and columns of `H_1 ∪ … ∪ H_{i-1}` zeroed. Stops early once the
/// restricted matrix vanishes or no coordinates remain.
pub fn greedy_decomposition(b: ArrayView2<f64>, k: usize, r: usize) -> Result<SparseDirectionSet> {
    let d = b.nrows();
    if b.ncols() != d {
        return param(format!("greedy_decomposition needs a square matrix, got {:?}", b.shape()));
    }
    check_k(k, d)?;
    if r < 1 {
        return param("r must be at least 1");
    }
    let mut active = vec![true; d];
    let mut set = SparseDirectionSet { dim: d, directions: Vec::new(), supports: Vec::new(), g_value: 0.0 };
    for _ in 0..r {
        let remaining = active.iter().filter(|&&a| a).count();
        if remaining == 0 {
            break;
        }
        let (value, dir) = fkk_masked(b, k.min(remaining), &active);
        if dir.null {
            break;
        }
        let support = dir.support();
        for &i in &support {
            active[i] = false;
        }
        set.g_value += value;
        set.supports.push(support);
        set.directions.push(dir);
    }
    Ok(set)
}

/// `|u^T A v| <= r ||u||_{2,k} ||v||_{2,k}` for a composite of `r` unit-Frobenius
/// blocks with `k` rows of `k` entries.
pub fn sparse_bilinear_bound_check(
    a: ArrayView2<f64>,
    u: ArrayView1<f64>,
    v: ArrayView1<f64>,
    k: usize,
    r: usize,
) -> Result<bool> {
    let lhs = u.dot(&a.dot(&v)).abs();
    let rhs = r as f64 * sparse_norm_2k(u, k)? * sparse_norm_2k(v, k)?;
    Ok(lhs <= rhs + 1e-9)
}

pub fn frobenius(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn to_nalgebra(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Largest singular value.
pub fn op_norm(a: ArrayView2<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    to_nalgebra(a).singular_values().max()
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues in decreasing order.
/// Column `j` of the returned matrix is the eigenvector of eigenvalue `j`.
pub fn sym_eigen(a: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let sym = to_nalgebra(a);
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let order = top_k_by(n, n, |i| eig.eigenvalues[i]);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[[r, c]] = eig.eigenvectors[(r, i)];
        }
    }
    (values, vectors)
}

/// `||w w^T - v v^T||_F` for unit vectors, via `2 - 2 (w^T v)^2`.
pub fn projector_distance(w: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
    let c = w.dot(&v);
    (2.0 - 2.0 * c * c).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sparse_norm_examples() {
        let x = array![3.0, 0.0, -4.0, 0.0];
        assert_eq!(sparse_norm_2k(x.view(), 1).unwrap(), 4.0);
        assert_eq!(sparse_norm_2k(x.view(), 2).unwrap(), 5.0);
        assert!(sparse_norm_2k(x.view(), 0).is_err());
        assert!(sparse_norm_2k(x.view(), 5).is_err());
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate_top_k(array![1.0, -5.0, 2.0].view(), 1).unwrap(), array![0.0, -5.0, 0.0]);
        assert_eq!(truncate_top_k(array![1.0, 1.0, 1.0].view(), 2).unwrap(), array![1.0, 1.0, 0.0]);
    }

    #[test]
    fn fkk_diagonal_examples() {
        let a = array![[3.0, 0.0], [0.0, 4.0]];
        let (v1, dir) = fkk_norm(a.view(), 1).unwrap();
        assert_eq!(v1, 4.0);
        assert_eq!(dir.matrix.entries, vec![(1, 1, 1.0)]);
        let (v2, _) = fkk_norm(a.view(), 2).unwrap();
        assert_eq!(v2, 5.0);
    }

    #[test]
    fn fkk_zero_matrix_is_null() {
        let (v, dir) = fkk_norm(Array2::<f64>::zeros((3, 3)).view(), 2).unwrap();
        assert_eq!(v, 0.0);
        assert!(dir.null);
        assert_eq!(dir.score, 0.0);
        assert_eq!(dir.matrix.to_dense()[[0, 0]], 1.0);
    }

    #[test]
    fn fkk_maximizer_attains_value() {
        let a = array![[1.0, -2.0, 0.5], [0.3, 0.1, 4.0], [-1.0, 2.0, 2.0]];
        let (v, dir) = fkk_norm(a.view(), 2).unwrap();
        assert!((dir.matrix.inner(a.view()) - v).abs() < 1e-12);
        assert!((dir.matrix.frobenius() - 1.0).abs() < 1e-12);
        assert!(dir.row_support.len() <= 2);
        assert!(dir.col_support_per_row.iter().all(|c| c.len() <= 2));
    }

    #[test]
    fn greedy_diagonal_example() {
        let b = Array2::from_diag(&array![5.0, 4.0, 3.0, 2.0]);
        let set = greedy_decomposition(b.view(), 1, 2).unwrap();
        assert_eq!(set.scores(), vec![5.0, 4.0]);
        assert_eq!(set.supports, vec![vec![0], vec![1]]);
        assert_eq!(set.g_value, 9.0);
    }

    #[test]
    fn greedy_zero_is_empty() {
        let set = greedy_decomposition(Array2::<f64>::zeros((4, 4)).view(), 2, 3).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.g_value, 0.0);
    }

    #[test]
    fn greedy_restricts_k_when_rows_run_out() {
        let b = Array2::from_elem((3, 3), 1.0);
        let set = greedy_decomposition(b.view(), 2, 3).unwrap();
        // first direction covers rows {0,1} x cols {0,1}; one coordinate is left
        assert_eq!(set.len(), 2);
        assert_eq!(set.supports[1], vec![2]);
    }

    #[test]
    fn bilinear_examples() {
        let z = Array1::zeros(3);
        let a = Array2::eye(3);
        assert!(sparse_bilinear_bound_check(a.view(), z.view(), z.view(), 1, 1).unwrap());
        let mut e = Array2::zeros((3, 3));
        e[[0, 0]] = 1.0;
        let e1 = array![1.0, 0.0, 0.0];
        assert!(sparse_bilinear_bound_check(e.view(), e1.view(), e1.view(), 1, 1).unwrap());
    }

    #[test]
    fn eigen_is_sorted() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = sym_eigen(a.view());
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        assert!((vecs[[0, 0]].abs() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
