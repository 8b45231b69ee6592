//! Classical and single-direction estimators used for comparison.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

use crate::error::{param, Error, Result};
use crate::filter::{weighted_moments, WeightVector};
use crate::linalg::{sym_eigen, to_nalgebra, top_k_by, truncate_top_k};
use crate::mean::{coordinate_median, preprocess};

/// `t_k` of the mean of the points kept by the single-direction preprocess.
pub fn baseline_single_direction(samples: ArrayView2<f64>, epsilon: f64, k: usize) -> Result<Array1<f64>> {
    let (w, _) = preprocess(samples, epsilon, k, 24.0, 50)?;
    let m = weighted_moments(samples, &w)?;
    truncate_top_k(m.mean.view(), k)
}

/// `t_k` of the sample mean.
pub fn empirical_mean(samples: ArrayView2<f64>, k: usize) -> Result<Array1<f64>> {
    let m = weighted_moments(samples, &WeightVector::ones(samples.nrows()))?;
    truncate_top_k(m.mean.view(), k)
}

/// `t_k` of the coordinate-wise median.
pub fn coordinate_median_sparse(samples: ArrayView2<f64>, k: usize) -> Result<Array1<f64>> {
    if samples.nrows() == 0 {
        return Err(Error::EmptyInput("no samples".into()));
    }
    truncate_top_k(coordinate_median(samples).view(), k)
}

/// Top eigenvector of the second-moment matrix, truncated to `k` entries and normalized.
pub fn empirical_pca(samples: ArrayView2<f64>, k: usize) -> Result<Array1<f64>> {
    let n = samples.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("no samples".into()));
    }
    let second = samples.t().dot(&samples) / n as f64;
    let (_, vecs) = sym_eigen(second.view());
    let v = truncate_top_k(vecs.column(0), k)?;
    let norm = v.dot(&v).sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateCovariance("leading eigenvector vanished".into()));
    }
    Ok(v / norm)
}

/// Least squares restricted to the `k` coordinates with the largest `|X^T y|`.
pub fn ols_top_k(samples: ArrayView2<f64>, responses: ArrayView1<f64>, k: usize) -> Result<Array1<f64>> {
    let (n, d) = samples.dim();
    if responses.len() != n {
        return param(format!("{} responses for {n} samples", responses.len()));
    }
    if k < 1 || k > d {
        return param(format!("k={k} must lie in 1..={d}"));
    }
    let corr = samples.t().dot(&responses);
    let support = top_k_by(d, k, |i| corr[i].abs());
    let sub = samples.select(Axis(1), &support);
    let gram = to_nalgebra(sub.t().dot(&sub).view());
    let rhs = sub.t().dot(&responses);
    let rhs = nalgebra::DVector::from_iterator(k, rhs.iter().copied());
    let sol = gram
        .cholesky()
        .ok_or_else(|| Error::DegenerateCovariance("singular design on selected support".into()))?
        .solve(&rhs);
    let mut beta = Array1::zeros(d);
    for (a, &i) in support.iter().enumerate() {
        beta[i] = sol[a];
    }
    Ok(beta)
}

/// `t_k` of the coordinate-wise median of `y x`.
pub fn median_of_products(samples: ArrayView2<f64>, responses: ArrayView1<f64>, k: usize) -> Result<Array1<f64>> {
    if responses.len() != samples.nrows() {
        return param(format!("{} responses for {} samples", responses.len(), samples.nrows()));
    }
    let products = &samples * &responses.insert_axis(Axis(1));
    coordinate_median_sparse(products.view(), k)
}
