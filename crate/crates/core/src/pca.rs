//! Robust sparse PCA under a spiked covariance `I + rho v v^T`.
//!
//! A warm start `w` close to `v` is refined by conditioning on `w^T x`
//! lying in a thin random interval around `alpha`. On that slice the inliers,
//! projected onto `w⊥`, are close to `N(mu~, I)` with
//! `mu~ = rho (w^T v) alpha / (1 + rho (w^T v)^2) * (v - (w^T v) w)`,
//! so a robust sparse mean of the slice recovers the part of `v` that `w` misses.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{param, Error, Result};
use crate::filter::{weighted_moments, WeightVector};
use crate::linalg::{fkk_norm, sym_eigen, top_k_by, truncate_top_k};
use crate::mean::{coordinate_median, robust_sparse_mean, MeanConfig, MeanRunTrace};
use crate::rng::{CounterRng, StreamTag};

/// Minimum number of values accepted by [`robust_variance_1d`].
pub const MIN_VARIANCE_VALUES: usize = 100;

/// Cap on the filtering passes of [`warm_start`].
pub const WARM_START_PASSES: usize = 50;

fn default_alpha_exclusion() -> f64 {
    0.1
}
fn default_attempts() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaConfig {
    pub epsilon: f64,
    pub k: usize,
    pub rho: f64,
    #[serde(default = "default_alpha_exclusion")]
    pub alpha_exclusion: f64,
    /// Half-width of the slice; defaults to `1/ln(1/eps)`.
    #[serde(default)]
    pub ell: Option<f64>,
    /// Configuration of the inner mean estimator; its `k` is replaced by `2k`.
    pub mean_config: MeanConfig,
    #[serde(default = "default_attempts")]
    pub max_alpha_attempts: usize,
    #[serde(default)]
    pub seed: u64,
}

impl PcaConfig {
    pub fn new(epsilon: f64, k: usize, rho: f64, seed: u64) -> Self {
        Self {
            epsilon,
            k,
            rho,
            alpha_exclusion: default_alpha_exclusion(),
            ell: None,
            mean_config: MeanConfig::new(epsilon, k),
            max_alpha_attempts: default_attempts(),
            seed,
        }
    }

    pub fn ell(&self) -> f64 {
        self.ell.unwrap_or_else(|| 1.0 / (1.0 / self.epsilon).ln())
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return param(format!("epsilon={} must lie in (0, 0.5)", self.epsilon));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return param(format!("rho={} must lie in (0, 1]", self.rho));
        }
        if self.k < 1 || self.k > d {
            return param(format!("k={} must lie in 1..={d}", self.k));
        }
        if !(self.ell() > 0.0) {
            return param("ell must be positive");
        }
        if !(self.alpha_exclusion >= 0.0 && self.alpha_exclusion < 1.0 + self.rho) {
            return param("alpha_exclusion must lie in [0, 1 + rho)");
        }
        Ok(())
    }

    /// `rho >= eps ln(1/eps)`; below this the guarantees do not apply.
    pub fn rho_in_regime(&self) -> bool {
        self.rho >= self.epsilon * (1.0 / self.epsilon).ln()
    }
}

/// Truncated second moment: starting from the MAD scale, iterate
/// `s^2 <- mean(x^2 : |x| <= tau s) / c(tau)` with `tau = max(3, sqrt(2 ln(1/eps)))`
/// and `c(tau) = 1 - 2 tau phi(tau) / (2 Phi(tau) - 1)`, the second moment of a
/// standard Gaussian truncated to `[-tau, tau]`. Values are assumed centred at 0.
pub fn robust_variance_1d(values: &[f64], epsilon: f64) -> Result<f64> {
    if values.len() < MIN_VARIANCE_VALUES {
        return Err(Error::EmptyInput(format!(
            "robust_variance_1d needs at least {MIN_VARIANCE_VALUES} values, got {}",
            values.len()
        )));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return param(format!("epsilon={epsilon} must lie in [0, 0.5)"));
    }
    let tau = if epsilon > 0.0 { (2.0 * (1.0 / epsilon).ln()).sqrt().max(3.0) } else { 3.0 };
    let std = Normal::standard();
    let phi = (-0.5 * tau * tau).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let c = 1.0 - 2.0 * tau * phi / (2.0 * std.cdf(tau) - 1.0);

    let mut abs: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let mid = abs.len() / 2;
    let (_, med, _) = abs.select_nth_unstable_by(mid, f64::total_cmp);
    let mut s2 = (*med / std.inverse_cdf(0.75)).powi(2);
    if !(s2 > 0.0) {
        s2 = values.iter().map(|x| x * x).sum::<f64>() / values.len() as f64;
    }
    for _ in 0..100 {
        let cut = tau * s2.sqrt();
        let (sum, count) = values.iter().filter(|x| x.abs() <= cut).fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
        if count == 0 {
            break;
        }
        let next = sum / count as f64 / c;
        let done = (next - s2).abs() <= 1e-12 * s2;
        s2 = next;
        if done {
            break;
        }
    }
    if !s2.is_finite() {
        return Err(Error::DegenerateCovariance("non-finite variance estimate".into()));
    }
    Ok(s2)
}

/// Stand-in warm start. Points are hard-filtered by their quadratic score
/// along the `(F,2k,2k)` maximizer of `Sigma - I` until no score exceeds
/// `10 ln(1/eps) (1 + rho)`; the `2k` coordinates with the largest diagonal
/// surplus of the filtered covariance are kept and the top eigenvector of
/// that block, truncated to `k` entries, is returned.
pub fn warm_start(samples: ArrayView2<f64>, epsilon: f64, k: usize, rho: f64) -> Result<Array1<f64>> {
    let (n, d) = samples.dim();
    if k < 1 || k > d {
        return param(format!("k={k} must lie in 1..={d}"));
    }
    if !(rho > 0.0) {
        return param(format!("rho={rho} must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return param(format!("epsilon={epsilon} must lie in (0, 0.5)"));
    }
    if n == 0 {
        return Err(Error::EmptyInput("warm_start needs samples".into()));
    }
    let k2 = (2 * k).min(d);
    let cut = 10.0 * (1.0 / epsilon).ln() * (1.0 + rho);
    let center = coordinate_median(samples);
    let mut w = WeightVector::ones(n);
    let mut moments = weighted_moments(samples, &w)?;
    for _ in 0..WARM_START_PASSES {
        let excess = &moments.cov - &Array2::<f64>::eye(d);
        let (_, dir) = fkk_norm(excess.view(), k2)?;
        if dir.null {
            break;
        }
        let trace = dir.matrix.trace();
        let mut removed = 0;
        for i in 0..n {
            if w.get(i) > 0.0 && dir.matrix.quad_form(samples.row(i), center.view()) - trace > cut {
                w.set_zero(i);
                removed += 1;
            }
        }
        if removed == 0 {
            break;
        }
        moments = weighted_moments(samples, &w)?;
    }
    let cov = &moments.cov;
    if cov.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateCovariance("non-finite warm-start covariance".into()));
    }
    let support = top_k_by(d, k2, |i| cov[[i, i]]);
    let block = cov.select(Axis(0), &support).select(Axis(1), &support);
    let (_, vecs) = sym_eigen(block.view());
    let mut out = Array1::zeros(d);
    for (a, &i) in support.iter().enumerate() {
        out[i] = vecs[[a, 0]];
    }
    let out = truncate_top_k(out.view(), k)?;
    let norm = out.dot(&out).sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateCovariance("warm-start eigenvector vanished".into()));
    }
    Ok(out / norm)
}

#[derive(Debug, Clone)]
pub struct Slice {
    /// Retained rows with their `w` component removed.
    pub samples: Array2<f64>,
    /// Indices of the retained rows in the input.
    pub rows: Vec<usize>,
    /// Outlier fraction among retained rows, when labels were given.
    pub outlier_fraction: Option<f64>,
}

/// Rows with `w^T x` in `[alpha - ell, alpha + ell]`, each mapped to `x - (w^T x) w`.
pub fn conditional_slice(
    samples: ArrayView2<f64>,
    labels: Option<&[bool]>,
    w: ArrayView1<f64>,
    alpha: f64,
    ell: f64,
) -> Result<Slice> {
    if !(ell > 0.0) {
        return param(format!("ell={ell} must be positive"));
    }
    let proj = samples.dot(&w);
    let rows: Vec<usize> = (0..samples.nrows()).filter(|&i| (proj[i] - alpha).abs() <= ell).collect();
    if rows.is_empty() {
        return Err(Error::EmptySlice { alpha, attempts: 1 });
    }
    let mut out = samples.select(Axis(0), &rows);
    for (mut row, &i) in out.outer_iter_mut().zip(&rows) {
        row.scaled_add(-proj[i], &w);
    }
    let outlier_fraction = labels.map(|l| rows.iter().filter(|&&i| l[i]).count() as f64 / rows.len() as f64);
    Ok(Slice { samples: out, rows, outlier_fraction })
}

/// Conditional law of `X ~ N(0, I + rho v v^T)` given `w^T X = alpha`:
/// `mu~ = rho c alpha / (1 + rho c^2) vbar` and `Sigma~ = I + rho / (1 + rho c^2) vbar vbar^T`
/// with `c = w^T v` and `vbar = v - c w`.
pub fn conditional_law_oracle(
    w: ArrayView1<f64>,
    v: ArrayView1<f64>,
    rho: f64,
    alpha: f64,
) -> (Array1<f64>, Array2<f64>) {
    let c = w.dot(&v);
    let vbar = &v - &(&w * c);
    let denom = 1.0 + rho * c * c;
    let mu = &vbar * (rho * c * alpha / denom);
    let d = w.len();
    let sigma = Array2::from_shape_fn((d, d), |(i, j)| f64::from(i == j) + rho / denom * vbar[i] * vbar[j]);
    (mu, sigma)
}

/// `v^ = z (1 + rho y) / (rho sqrt(y) alpha) + w sqrt(y)`, before normalization.
pub fn recombine(z: ArrayView1<f64>, w: ArrayView1<f64>, y: f64, rho: f64, alpha: f64) -> Array1<f64> {
    let sy = y.sqrt();
    &z * ((1.0 + rho * y) / (rho * sy * alpha)) + &w * sy
}

/// Draws `alpha` uniformly from `[-(1 + rho), 1 + rho]` minus `(-excl, excl)`.
pub fn draw_alpha(rng: &mut CounterRng, rho: f64, exclusion: f64) -> f64 {
    let magnitude = rng.uniform_in(exclusion, 1.0 + rho);
    if rng.uniform() < 0.5 {
        -magnitude
    } else {
        magnitude
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTrace {
    pub warm_start: Vec<f64>,
    pub y_prime: f64,
    pub y: f64,
    pub alpha: f64,
    pub alpha_attempts: usize,
    pub slice_size: usize,
    pub slice_outlier_fraction: Option<f64>,
    pub z: Vec<f64>,
    pub inner: MeanRunTrace,
    /// Robust variance of `v^T x` along the output.
    pub variance_along_output: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PcaEstimate {
    pub v_hat: Array1<f64>,
    pub trace: PcaTrace,
}

/// Robust sparse leading eigenvector of a contaminated spiked covariance.
pub fn robust_sparse_pca(samples: ArrayView2<f64>, labels: Option<&[bool]>, config: &PcaConfig) -> Result<PcaEstimate> {
    let (n, d) = samples.dim();
    config.validate(d)?;
    if let Some(l) = labels {
        if l.len() != n {
            return param(format!("{} labels for {n} samples", l.len()));
        }
    }
    let mut warnings = Vec::new();
    if !config.rho_in_regime() {
        let msg = format!("rho={} is below eps ln(1/eps); guarantees do not apply", config.rho);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let w = warm_start(samples, config.epsilon, config.k, config.rho)?;
    let proj: Vec<f64> = samples.dot(&w).to_vec();
    let y_prime = robust_variance_1d(&proj, config.epsilon)?;
    let y = (y_prime - 1.0) / config.rho;
    if !(y > 0.0) {
        return Err(Error::VarianceStep(y));
    }

    let ell = config.ell();
    let mut slice = None;
    let mut alpha = 0.0;
    let mut attempts = 0;
    while attempts < config.max_alpha_attempts.max(1) {
        let mut rng = CounterRng::new(config.seed, StreamTag::Alpha, attempts as u64);
        alpha = draw_alpha(&mut rng, config.rho, config.alpha_exclusion);
        attempts += 1;
        match conditional_slice(samples, labels, w.view(), alpha, ell) {
            Ok(s) => {
                slice = Some(s);
                break;
            }
            Err(Error::EmptySlice { .. }) => warnings.push(format!("empty slice at alpha={alpha}; redrawing")),
            Err(e) => return Err(e),
        }
    }
    let Some(mut slice) = slice else {
        return Err(Error::EmptySlice { alpha, attempts });
    };

    // the slice has no variance along w; give it back unit variance there
    let mut refill = CounterRng::new(config.seed, StreamTag::Refill, 0);
    for mut row in slice.samples.outer_iter_mut() {
        row.scaled_add(refill.normal(), &w);
    }
    let mut inner_config = config.mean_config.clone();
    inner_config.k = (2 * config.k).min(d);
    inner_config.truncate_output = true;
    let inner_labels: Option<Vec<bool>> = labels.map(|l| slice.rows.iter().map(|&i| l[i]).collect());
    let inner = robust_sparse_mean(slice.samples.view(), inner_labels.as_deref(), &inner_config)?;
    let along = w.dot(&inner.mu_hat);
    let z = truncate_top_k((&inner.mu_hat - &(&w * along)).view(), inner_config.k)?;

    let raw = recombine(z.view(), w.view(), y, config.rho, alpha);
    let norm = raw.dot(&raw).sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateCovariance("recombined vector vanished".into()));
    }
    let v_hat = raw / norm;
    let along_out: Vec<f64> = samples.dot(&v_hat).to_vec();
    let variance_along_output = robust_variance_1d(&along_out, config.epsilon)?;
    Ok(PcaEstimate {
        v_hat,
        trace: PcaTrace {
            warm_start: w.to_vec(),
            y_prime,
            y,
            alpha,
            alpha_attempts: attempts,
            slice_size: slice.rows.len(),
            slice_outlier_fraction: slice.outlier_fraction,
            z: z.to_vec(),
            inner: inner.trace,
            variance_along_output,
            warnings,
        },
    })
}

/// `v^T (I + rho u u^T) v / (1 + rho)` for unit `v` and `u`.
pub fn variance_ratio(v_hat: ArrayView1<f64>, v: ArrayView1<f64>, rho: f64) -> f64 {
    let c = v_hat.dot(&v);
    (v_hat.dot(&v_hat) + rho * c * c) / (1.0 + rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::pca_conditional_schur;
    use ndarray::array;

    fn normals(n: usize, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = CounterRng::new(seed, StreamTag::Test, 0);
        (0..n).map(|_| scale * rng.normal()).collect()
    }

    #[test]
    fn variance_of_clean_gaussians() {
        let y = robust_variance_1d(&normals(100_000, 1, 1.0), 0.05).unwrap();
        assert!((0.99..=1.01).contains(&y), "{y}");
        let y = robust_variance_1d(&normals(100_000, 2, 2.0), 0.05).unwrap();
        assert!((3.96..=4.04).contains(&y), "{y}");
    }

    #[test]
    fn variance_ignores_point_mass() {
        let mut v = normals(100_000, 3, 1.0);
        for x in v.iter_mut().take(10_000) {
            *x = 100.0;
        }
        let y = robust_variance_1d(&v, 0.1).unwrap();
        assert!((y - 1.0).abs() <= 0.1, "{y}");
    }

    #[test]
    fn variance_needs_enough_values() {
        assert!(robust_variance_1d(&[1.0; 99], 0.1).is_err());
    }

    #[test]
    fn slice_on_first_coordinate() {
        let x = array![[1.0, 2.0], [0.4, 1.0], [1.5, -1.0], [1.6, 0.0]];
        let w = array![1.0, 0.0];
        let s = conditional_slice(x.view(), None, w.view(), 1.0, 0.5).unwrap();
        assert_eq!(s.rows, vec![0, 2]);
        assert_eq!(s.samples, array![[0.0, 2.0], [0.0, -1.0]]);
        assert!(matches!(conditional_slice(x.view(), None, w.view(), 10.0, 0.5), Err(Error::EmptySlice { .. })));
    }

    #[test]
    fn oracle_edge_cases() {
        let v = array![0.6, 0.8, 0.0];
        let (mu, sigma) = conditional_law_oracle(v.view(), v.view(), 0.5, 1.0);
        assert!(mu.iter().all(|x| x.abs() < 1e-12));
        assert!((sigma - Array2::<f64>::eye(3)).iter().all(|x| x.abs() < 1e-12));
        let w = array![0.0, 0.0, 1.0];
        let (mu, sigma) = conditional_law_oracle(w.view(), v.view(), 0.5, 1.0);
        assert!(mu.iter().all(|x| x.abs() < 1e-12));
        assert!((sigma[[0, 1]] - 0.5 * 0.48).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_schur_complement() {
        let w = array![0.8, 0.6, 0.0, 0.0];
        let v = array![0.6, 0.0, 0.8, 0.0];
        let (mu, sigma) = conditional_law_oracle(w.view(), v.view(), 0.5, 1.3);
        let (mu2, sigma2) = pca_conditional_schur(w.view(), v.view(), 0.5, 1.3);
        let p = Array2::from_shape_fn((4, 4), |(i, j)| f64::from(i == j) - w[i] * w[j]);
        let projected = p.dot(&sigma).dot(&p);
        assert!((&mu - &mu2).iter().all(|x| x.abs() < 1e-12));
        assert!((&projected - &sigma2).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn recombination_is_exact_at_oracle_inputs() {
        let w = array![0.8, 0.6, 0.0, 0.0];
        let v = array![0.6, 0.0, 0.8, 0.0];
        let (rho, alpha) = (0.7, -0.9);
        let (mu, _) = conditional_law_oracle(w.view(), v.view(), rho, alpha);
        let c = w.dot(&v);
        let out = recombine(mu.view(), w.view(), c * c, rho, alpha);
        assert!((&out - &v).iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn alpha_avoids_exclusion_zone() {
        let mut rng = CounterRng::new(0, StreamTag::Alpha, 0);
        for _ in 0..1000 {
            let a = draw_alpha(&mut rng, 0.5, 0.1);
            assert!(a.abs() >= 0.1 && a.abs() <= 1.5);
        }
    }
}
