//! Exhaustive and closed-form reference computations.
//!
//! Nothing here shares code with the estimators it is used to check: norms
//! are found by enumerating supports, moments by scalar loops and Gaussian
//! conditionals by a Schur complement on the joint covariance.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{param, Error, Result};
use crate::linalg::op_norm;

/// Largest `d` accepted by the exponential oracles.
pub const ORACLE_MAX_DIM: usize = 14;

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `max over k-sparse unit v of v^T x`, by enumerating supports.
pub fn sparse_norm_2k_exhaustive(x: ArrayView1<f64>, k: usize) -> f64 {
    let mut best = 0.0f64;
    for_each_subset(x.len(), k, |s| {
        let norm = s.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
        if norm > 0.0 {
            // v = x_S / ||x_S||
            let value = s.iter().map(|&i| x[i] * x[i] / norm).sum::<f64>();
            best = best.max(value);
        }
    });
    best
}

/// `(F,k,k)` value by enumerating every row subset and every per-row column subset.
pub fn fkk_exhaustive(a: ArrayView2<f64>, k: usize) -> Result<f64> {
    let d = a.nrows();
    if d > 8 {
        return Err(Error::OracleTooLarge { d, limit: 8 });
    }
    let row_best: Vec<f64> = (0..d)
        .map(|i| {
            let mut best = 0.0f64;
            for_each_subset(d, k, |cols| {
                best = best.max(cols.iter().map(|&j| a[[i, j]] * a[[i, j]]).sum());
            });
            best
        })
        .collect();
    let mut best = 0.0f64;
    for_each_subset(d, k, |rows| {
        best = best.max(rows.iter().map(|&i| row_best[i]).sum());
    });
    Ok(best.sqrt())
}

/// `||A||_{op,k} = max over k-subsets S of sigma_max(A[S, S])`.
pub fn sparse_op_norm_oracle(a: ArrayView2<f64>, k: usize) -> Result<f64> {
    let d = a.ncols();
    if a.nrows() != d {
        return param(format!("sparse_op_norm_oracle needs a square matrix, got {:?}", a.shape()));
    }
    if d > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge { d, limit: ORACLE_MAX_DIM });
    }
    if k < 1 || k > d {
        return param(format!("sparsity k={k} must lie in 1..={d}"));
    }
    let mut best = 0.0f64;
    for_each_subset(d, k, |s| {
        let sub = Array2::from_shape_fn((s.len(), s.len()), |(i, j)| a[[s[i], s[j]]]);
        best = best.max(op_norm(sub.view()));
    });
    Ok(best)
}

/// Weighted mean and covariance by explicit scalar loops.
pub fn naive_weighted_moments(x: ArrayView2<f64>, w: &[f64]) -> (Array1<f64>, Array2<f64>) {
    let (n, d) = x.dim();
    let total: f64 = w.iter().sum();
    let mut mean = Array1::zeros(d);
    for j in 0..d {
        let mut s = 0.0;
        for i in 0..n {
            s += w[i] * x[[i, j]];
        }
        mean[j] = s / total;
    }
    let mut cov = Array2::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for i in 0..n {
                s += w[i] * (x[[i, a]] - mean[a]) * (x[[i, b]] - mean[b]);
            }
            cov[[a, b]] = s / total;
        }
    }
    (mean, cov)
}

/// Law of the other coordinates of a Gaussian vector given `coordinate = value`,
/// via the Schur complement of the joint covariance.
pub fn condition_on_coordinate(
    mean: ArrayView1<f64>,
    cov: ArrayView2<f64>,
    coordinate: usize,
    value: f64,
) -> (Array1<f64>, Array2<f64>) {
    let n = mean.len();
    let rest: Vec<usize> = (0..n).filter(|&i| i != coordinate).collect();
    let s22 = cov[[coordinate, coordinate]];
    let m = rest.len();
    let mut cond_mean = Array1::zeros(m);
    let mut cond_cov = Array2::zeros((m, m));
    for (a, &i) in rest.iter().enumerate() {
        cond_mean[a] = mean[i] + cov[[i, coordinate]] / s22 * (value - mean[coordinate]);
        for (b, &j) in rest.iter().enumerate() {
            cond_cov[[a, b]] = cov[[i, j]] - cov[[i, coordinate]] * cov[[coordinate, j]] / s22;
        }
    }
    (cond_mean, cond_cov)
}

/// Conditional law of `Proj_{w⊥}(X)` given `w^T X = alpha` for `X ~ N(0, I + rho v v^T)`,
/// from the joint law of `(Proj_{w⊥} X, w^T X)`.
pub fn pca_conditional_schur(
    w: ArrayView1<f64>,
    v: ArrayView1<f64>,
    rho: f64,
    alpha: f64,
) -> (Array1<f64>, Array2<f64>) {
    let d = w.len();
    let sigma = Array2::from_shape_fn((d, d), |(i, j)| f64::from(i == j) + rho * v[i] * v[j]);
    // rows 0..d: I - w w^T; row d: w^T
    let lin = Array2::from_shape_fn((d + 1, d), |(i, j)| if i < d { f64::from(i == j) - w[i] * w[j] } else { w[j] });
    let joint = lin.dot(&sigma).dot(&lin.t());
    condition_on_coordinate(Array1::zeros(d + 1).view(), joint.view(), d, alpha)
}

/// Conditional law of `X` given `y = alpha` for `X ~ N(0, I)`, `y = X^T beta + N(0, sigma^2)`.
pub fn regression_conditional_schur(beta: ArrayView1<f64>, sigma: f64, alpha: f64) -> (Array1<f64>, Array2<f64>) {
    let d = beta.len();
    let mut joint = Array2::zeros((d + 1, d + 1));
    for i in 0..d {
        joint[[i, i]] = 1.0;
        joint[[i, d]] = beta[i];
        joint[[d, i]] = beta[i];
    }
    joint[[d, d]] = sigma * sigma + beta.dot(&beta);
    condition_on_coordinate(Array1::zeros(d + 1).view(), joint.view(), d, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn subsets_enumerated() {
        let mut count = 0;
        for_each_subset(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut all = Vec::new();
        for_each_subset(3, 2, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn op_oracle_examples() {
        let eye = Array2::<f64>::eye(4);
        assert!((sparse_op_norm_oracle(eye.view(), 2).unwrap() - 1.0).abs() < 1e-12);
        let v = array![0.0, 0.6, 0.0, 0.8];
        let vvt = Array2::from_shape_fn((4, 4), |(i, j)| v[i] * v[j]);
        assert!((sparse_op_norm_oracle(vvt.view(), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(sparse_op_norm_oracle(Array2::<f64>::eye(15).view(), 1).is_err());
    }
}
