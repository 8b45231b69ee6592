//! Weighted moments and the multiplicative down-weighting filter.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{param, Error, Result};

/// Weights below this are snapped to zero.
pub const WEIGHT_FLOOR: f64 = 1e-12;

const CHUNK_ROWS: usize = 2048;

/// Per-sample weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn ones(n: usize) -> Self {
        Self { w: vec![1.0; n] }
    }

    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if let Some(bad) = w.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return param(format!("weight {bad} outside [0, 1]"));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }

    /// `sum(w) / n`.
    pub fn total_mass(&self) -> f64 {
        if self.w.is_empty() {
            0.0
        } else {
            self.sum() / self.w.len() as f64
        }
    }

    /// Average weight over the flagged samples (`None` when none are flagged).
    pub fn mass_of(&self, flags: &[bool], want: bool) -> Option<f64> {
        let (s, c) =
            self.w.iter().zip(flags).filter(|(_, &f)| f == want).fold((0.0, 0usize), |(s, c), (w, _)| (s + w, c + 1));
        (c > 0).then(|| s / c as f64)
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub(crate) fn set_zero(&mut self, i: usize) {
        self.w[i] = 0.0;
    }
}

/// Weighted mean, weighted covariance and total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMoments {
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
    pub mass: f64,
}

fn weighted_mean(samples: ArrayView2<f64>, w: &[f64], total: f64) -> Array1<f64> {
    let mut mean = Array1::zeros(samples.ncols());
    for (row, &wi) in samples.axis_iter(Axis(0)).zip(w) {
        if wi > 0.0 {
            mean.scaled_add(wi, &row);
        }
    }
    mean / total
}

/// `mu_w = sum w_i x_i / sum w_i`, `Sigma_w = sum w_i (x_i - mu_w)(x_i - mu_w)^T / sum w_i`.
pub fn weighted_moments(samples: ArrayView2<f64>, w: &WeightVector) -> Result<WeightedMoments> {
    let (n, d) = samples.dim();
    if w.len() != n {
        return param(format!("{} weights for {n} samples", w.len()));
    }
    let total = w.sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let mean = weighted_mean(samples, w.as_slice(), total);
    let mut cov = Array2::<f64>::zeros((d, d));
    let mut chunk = Array2::<f64>::zeros((CHUNK_ROWS.min(n), d));
    let mut filled = 0;
    let wv = w.as_slice();
    for i in 0..n {
        if wv[i] <= 0.0 {
            continue;
        }
        let sw = wv[i].sqrt();
        let mut dst = chunk.row_mut(filled);
        for ((o, &x), &m) in dst.iter_mut().zip(samples.row(i)).zip(&mean) {
            *o = sw * (x - m);
        }
        filled += 1;
        if filled == chunk.nrows() {
            ndarray::linalg::general_mat_mul(1.0, &chunk.t(), &chunk, 1.0, &mut cov);
            filled = 0;
        }
    }
    if filled > 0 {
        let part = chunk.slice(s![..filled, ..]);
        ndarray::linalg::general_mat_mul(1.0, &part.t(), &part, 1.0, &mut cov);
    }
    cov /= total;
    // symmetrize away rounding asymmetry from the blocked product
    let sym = (&cov + &cov.t()) * 0.5;
    Ok(WeightedMoments { mean, cov: sym, mass: total })
}

/// Streaming weighted mean/covariance (West's weighted update).
#[derive(Debug, Clone)]
pub struct WeightedMomentAccumulator {
    mass: f64,
    mean: Array1<f64>,
    scatter: Array2<f64>,
}

impl WeightedMomentAccumulator {
    pub fn new(d: usize) -> Self {
        Self { mass: 0.0, mean: Array1::zeros(d), scatter: Array2::zeros((d, d)) }
    }

    pub fn push(&mut self, x: ArrayView1<f64>, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        self.mass += weight;
        let delta = &x - &self.mean;
        self.mean.scaled_add(weight / self.mass, &delta);
        let after = &x - &self.mean;
        let d = x.len();
        for a in 0..d {
            for b in 0..d {
                self.scatter[[a, b]] += weight * delta[a] * after[b];
            }
        }
    }

    pub fn finish(&self) -> Result<WeightedMoments> {
        if self.mass <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        let cov = &self.scatter / self.mass;
        let cov = (&cov + &cov.t()) * 0.5;
        Ok(WeightedMoments { mean: self.mean.clone(), cov, mass: self.mass })
    }
}

/// Result of one down-weighting filter call.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub weights: WeightVector,
    /// Number of multiplicative passes applied.
    pub passes: usize,
    /// Pass budget `ceil(tau_max / (e s))`.
    pub budget: usize,
    /// Whether the budget ran out with the weighted score still above `s * beta`.
    pub exhausted: bool,
}

impl FilterOutcome {
    pub fn fired(&self) -> bool {
        self.passes > 0
    }
}

/// Multiplicative filter: while `E_P[w' tau] > s beta`, multiply every weight by
/// `1 - tau(x) / tau_max`, `tau_max` being the largest score among samples with
/// positive current weight. At most `ceil(tau_max / (e s))` passes.
pub fn downweight_filter(w: &WeightVector, scores: &[f64], s: f64, beta: f64) -> Result<FilterOutcome> {
    let n = w.len();
    if scores.len() != n {
        return param(format!("{} scores for {n} weights", scores.len()));
    }
    if let Some(bad) = scores.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return param(format!("score {bad} is not a finite non-negative number"));
    }
    if !(s > 0.0) {
        return param(format!("threshold s={s} must be positive"));
    }
    if !(beta > 1.0) {
        return param(format!("beta={beta} must exceed 1"));
    }
    let mut out = w.w.clone();
    let max_positive =
        |ws: &[f64]| ws.iter().zip(scores).filter(|(w, _)| **w > 0.0).map(|(_, t)| *t).fold(0.0f64, f64::max);
    let tau_max = max_positive(&out);
    let budget = (tau_max / (std::f64::consts::E * s)).ceil().max(0.0) as usize;
    let mut passes = 0;
    let target = s * beta;
    let weighted_score = |ws: &[f64]| ws.iter().zip(scores).map(|(w, t)| w * t).sum::<f64>() / n as f64;
    let mut above = n > 0 && weighted_score(&out) > target;
    while above && passes < budget {
        let current_max = max_positive(&out);
        if current_max <= 0.0 {
            break;
        }
        for (wi, &t) in out.iter_mut().zip(scores) {
            *wi *= 1.0 - t / current_max;
            if *wi < WEIGHT_FLOOR {
                *wi = 0.0;
            }
        }
        passes += 1;
        above = weighted_score(&out) > target;
    }
    Ok(FilterOutcome { weights: WeightVector { w: out }, passes, budget, exhausted: above })
}

/// Weighted median of `values` (lower median on ties).
pub fn weighted_median(values: ArrayView1<f64>, w: &[f64]) -> Option<f64> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(w.iter().copied()).filter(|p| p.1 > 0.0).collect();
    if pairs.is_empty() {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (i, &(v, wi)) in pairs.iter().enumerate() {
        acc += wi;
        if acc >= 0.5 * total {
            // exact half: average with the next value
            if (acc - 0.5 * total).abs() <= 1e-12 * total && i + 1 < pairs.len() {
                return Some(0.5 * (v + pairs[i + 1].0));
            }
            return Some(v);
        }
    }
    pairs.last().map(|p| p.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_weighted_moments;
    use ndarray::array;

    #[test]
    fn unit_weights_give_sample_moments() {
        let x = array![[1.0, 2.0], [3.0, 0.0], [2.0, 1.0]];
        let m = weighted_moments(x.view(), &WeightVector::ones(3)).unwrap();
        assert!((m.mean[0] - 2.0).abs() < 1e-15 && (m.mean[1] - 1.0).abs() < 1e-15);
        assert!((m.cov[[0, 0]] - 2.0 / 3.0).abs() < 1e-14);
        assert!((m.cov[[0, 1]] + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_weight_gives_point() {
        let x = array![[1.0, 2.0], [3.0, 0.0], [2.0, 1.0]];
        let w = WeightVector::from_vec(vec![0.0, 1.0, 0.0]).unwrap();
        let m = weighted_moments(x.view(), &w).unwrap();
        assert_eq!(m.mean, array![3.0, 0.0]);
        assert!(m.cov.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn random_weights_match_scalar_loops() {
        let x = array![[0.3, -1.2, 2.0], [1.1, 0.4, -0.5], [-2.0, 0.9, 0.1], [0.7, 0.7, 0.7], [5.0, -3.0, 1.0]];
        let w = vec![0.2, 1.0, 0.55, 0.0, 0.9];
        let m = weighted_moments(x.view(), &WeightVector::from_vec(w.clone()).unwrap()).unwrap();
        let (mean, cov) = naive_weighted_moments(x.view(), &w);
        assert!((&m.mean - &mean).iter().all(|v| v.abs() < 1e-12));
        assert!((&m.cov - &cov).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_weights_rejected() {
        let x = array![[1.0], [2.0]];
        let w = WeightVector::from_vec(vec![0.0, 0.0]).unwrap();
        assert!(matches!(weighted_moments(x.view(), &w), Err(Error::DegenerateWeights)));
    }

    #[test]
    fn accumulator_matches_batch() {
        let x = array![[0.3, -1.2], [1.1, 0.4], [-2.0, 0.9], [0.7, 0.7]];
        let w = vec![0.5, 1.0, 0.25, 0.8];
        let mut acc = WeightedMomentAccumulator::new(2);
        for (row, &wi) in x.axis_iter(Axis(0)).zip(&w) {
            acc.push(row, wi);
        }
        let inc = acc.finish().unwrap();
        let batch = weighted_moments(x.view(), &WeightVector::from_vec(w).unwrap()).unwrap();
        assert!((&inc.mean - &batch.mean).iter().all(|v| v.abs() < 1e-9));
        assert!((&inc.cov - &batch.cov).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn zero_scores_leave_weights() {
        let w = WeightVector::ones(5);
        let out = downweight_filter(&w, &[0.0; 5], 0.05, 3.0).unwrap();
        assert_eq!(out.weights, w);
        assert!(!out.fired());
    }

    #[test]
    fn single_large_score_is_removed() {
        let n = 100;
        let mut scores = vec![0.0; n];
        scores[17] = 1e6;
        let out = downweight_filter(&WeightVector::ones(n), &scores, 0.05, 3.0).unwrap();
        assert_eq!(out.weights.get(17), 0.0);
        for i in (0..n).filter(|&i| i != 17) {
            assert_eq!(out.weights.get(i), 1.0);
        }
        let after: f64 = out.weights.as_slice().iter().zip(&scores).map(|(w, t)| w * t).sum::<f64>() / n as f64;
        assert!(after <= 0.05 * 3.0);
    }

    #[test]
    fn at_rest_is_identity() {
        let w = WeightVector::from_vec(vec![0.5, 1.0, 0.2]).unwrap();
        let out = downweight_filter(&w, &[0.1, 0.0, 0.3], 1.0, 2.0).unwrap();
        assert_eq!(out.weights, w);
    }

    #[test]
    fn rejects_bad_parameters() {
        let w = WeightVector::ones(2);
        assert!(downweight_filter(&w, &[-1.0, 0.0], 1.0, 2.0).is_err());
        assert!(downweight_filter(&w, &[1.0, 0.0], 0.0, 2.0).is_err());
        assert!(downweight_filter(&w, &[1.0, 0.0], 1.0, 1.0).is_err());
        assert!(WeightVector::from_vec(vec![1.5]).is_err());
    }

    #[test]
    fn weighted_median_basic() {
        assert_eq!(weighted_median(array![3.0, 1.0, 2.0].view(), &[1.0, 1.0, 1.0]), Some(2.0));
        assert_eq!(weighted_median(array![1.0, 2.0].view(), &[1.0, 1.0]), Some(1.5));
        assert_eq!(weighted_median(array![1.0, 2.0, 100.0].view(), &[1.0, 1.0, 0.0]), Some(1.5));
    }
}
