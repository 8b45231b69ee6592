//! Robust sparse linear regression with Gaussian design.
//!
//! Conditioning on the response `y` lying near `alpha` turns the covariates
//! into `N((alpha / sigma_y^2) beta, I - beta beta^T / sigma_y^2)`, so `beta`
//! is read off a robust sparse mean of the slice.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::truncate_top_k;
use crate::mean::{robust_sparse_mean, MeanConfig, MeanRunTrace};
use crate::pca::robust_variance_1d;
use crate::rng::{CounterRng, StreamTag};

fn default_alpha_exclusion() -> f64 {
    0.1
}
fn default_attempts() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub epsilon: f64,
    pub k: usize,
    /// Known noise level; only used to normalise reported errors.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// `ell = sigma_y / ell_divisor`; defaults to `ln(1/eps)`.
    #[serde(default)]
    pub ell_divisor: Option<f64>,
    /// `|alpha| >= alpha_exclusion * sigma_y`.
    #[serde(default = "default_alpha_exclusion")]
    pub alpha_exclusion: f64,
    pub mean_config: MeanConfig,
    #[serde(default = "default_attempts")]
    pub max_alpha_attempts: usize,
    #[serde(default)]
    pub seed: u64,
}

impl RegressionConfig {
    pub fn new(epsilon: f64, k: usize, seed: u64) -> Self {
        Self {
            epsilon,
            k,
            sigma: None,
            ell_divisor: None,
            alpha_exclusion: default_alpha_exclusion(),
            mean_config: MeanConfig::new(epsilon, k),
            max_alpha_attempts: default_attempts(),
            seed,
        }
    }

    pub fn ell_divisor(&self) -> f64 {
        self.ell_divisor.unwrap_or_else(|| (1.0 / self.epsilon).ln())
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.2) {
            return param(format!("epsilon={} must lie in (0, 0.2]", self.epsilon));
        }
        if self.k < 1 || self.k > d {
            return param(format!("k={} must lie in 1..={d}", self.k));
        }
        if !(self.ell_divisor() > 0.0) {
            return param("ell_divisor must be positive");
        }
        if !(self.alpha_exclusion >= 0.0 && self.alpha_exclusion < 1.0) {
            return param("alpha_exclusion must lie in [0, 1)");
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return param(format!("sigma={s} must be positive"));
            }
        }
        Ok(())
    }
}

/// Robust estimate of `sigma_y^2 = sigma^2 + ||beta||^2` from the responses.
pub fn robust_sigma_y(ys: &[f64], epsilon: f64) -> Result<f64> {
    robust_variance_1d(ys, epsilon)
}

/// Law of `X` given `y = alpha`: `N((alpha / sigma_y^2) beta, I - beta beta^T / sigma_y^2)`.
pub fn regression_conditional_oracle(
    beta: ArrayView1<f64>,
    sigma: f64,
    alpha: f64,
) -> Result<(Array1<f64>, Array2<f64>)> {
    if !(sigma > 0.0) {
        return param(format!("sigma={sigma} must be positive"));
    }
    let sy2 = sigma * sigma + beta.dot(&beta);
    let d = beta.len();
    let mean = &beta * (alpha / sy2);
    let cov = Array2::from_shape_fn((d, d), |(i, j)| f64::from(i == j) - beta[i] * beta[j] / sy2);
    Ok((mean, cov))
}

/// `(sigma_y^2 / alpha) beta_I`.
pub fn rescale(beta_slice: ArrayView1<f64>, sigma_y2: f64, alpha: f64) -> Array1<f64> {
    &beta_slice * (sigma_y2 / alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTrace {
    pub sigma_y2: f64,
    pub alpha: f64,
    pub alpha_attempts: usize,
    pub ell: f64,
    pub slice_size: usize,
    pub slice_outlier_fraction: Option<f64>,
    pub beta_slice: Vec<f64>,
    pub inner: MeanRunTrace,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RegressionEstimate {
    pub beta_hat: Array1<f64>,
    pub trace: RegressionTrace,
}

/// Rows with `y` in `[alpha - ell, alpha + ell]`.
pub fn response_slice(responses: ArrayView1<f64>, alpha: f64, ell: f64) -> Vec<usize> {
    (0..responses.len()).filter(|&i| (responses[i] - alpha).abs() <= ell).collect()
}

pub fn robust_sparse_regression(
    samples: ArrayView2<f64>,
    responses: ArrayView1<f64>,
    labels: Option<&[bool]>,
    config: &RegressionConfig,
) -> Result<RegressionEstimate> {
    let (n, d) = samples.dim();
    config.validate(d)?;
    if responses.len() != n {
        return param(format!("{} responses for {n} samples", responses.len()));
    }
    if let Some(l) = labels {
        if l.len() != n {
            return param(format!("{} labels for {n} samples", l.len()));
        }
    }
    let sigma_y2 = robust_sigma_y(&responses.to_vec(), config.epsilon)?;
    if !(sigma_y2 > 0.0) {
        return Err(Error::VarianceStep(sigma_y2));
    }
    let sigma_y = sigma_y2.sqrt();
    let ell = sigma_y / config.ell_divisor();
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    let mut alpha = 0.0;
    let mut attempts = 0;
    while attempts < config.max_alpha_attempts.max(1) {
        let mut rng = CounterRng::new(config.seed, StreamTag::Alpha, attempts as u64);
        let magnitude = rng.uniform_in(config.alpha_exclusion * sigma_y, sigma_y);
        alpha = if rng.uniform() < 0.5 { -magnitude } else { magnitude };
        attempts += 1;
        rows = response_slice(responses, alpha, ell);
        if !rows.is_empty() {
            break;
        }
        warnings.push(format!("empty slice at alpha={alpha}; redrawing"));
    }
    if rows.is_empty() {
        return Err(Error::EmptySlice { alpha, attempts });
    }
    if alpha.abs() < config.alpha_exclusion * sigma_y {
        return param(format!("alpha={alpha} fell inside the exclusion zone"));
    }
    let slice = samples.select(Axis(0), &rows);
    let slice_labels: Option<Vec<bool>> = labels.map(|l| rows.iter().map(|&i| l[i]).collect());
    let slice_outlier_fraction =
        slice_labels.as_ref().map(|l| l.iter().filter(|&&b| b).count() as f64 / l.len() as f64);
    let mut inner_config = config.mean_config.clone();
    inner_config.k = config.k;
    let inner = robust_sparse_mean(slice.view(), slice_labels.as_deref(), &inner_config)?;
    let beta_hat = truncate_top_k(rescale(inner.mu_hat.view(), sigma_y2, alpha).view(), config.k)?;
    Ok(RegressionEstimate {
        beta_hat,
        trace: RegressionTrace {
            sigma_y2,
            alpha,
            alpha_attempts: attempts,
            ell,
            slice_size: rows.len(),
            slice_outlier_fraction,
            beta_slice: inner.mu_hat.to_vec(),
            inner: inner.trace,
            warnings,
        },
    })
}
