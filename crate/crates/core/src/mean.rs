//! Robust sparse mean estimation with the multidirectional sparse filter.
//!
//! The working half of the data is preprocessed, naively pruned and then
//! filtered along the composite of `r` greedy sparse directions of
//! `Sigma_w - I` until their average score drops to `C_stop * eps`. The
//! coordinates touched by the final directions are estimated by a dense
//! filter on the held-out half; the rest by the weighted mean.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::filter::{downweight_filter, weighted_median, weighted_moments, WeightVector, WeightedMoments};
use crate::linalg::{fkk_norm, greedy_decomposition, sym_eigen, truncate_top_k, SparseDirectionSet};
use crate::oracle::{sparse_op_norm_oracle, ORACLE_MAX_DIM};

fn default_c_stop() -> f64 {
    10.0
}
fn default_score_mult() -> f64 {
    200.0
}
fn default_split() -> f64 {
    0.5
}
fn default_c_pre() -> f64 {
    24.0
}
fn default_preprocess_cap() -> usize {
    50
}
fn default_true() -> bool {
    true
}
fn default_min_samples() -> usize {
    20
}

/// Largest corruption rate accepted without `allow_large_epsilon`.
pub const EPSILON_GATE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanConfig {
    pub epsilon: f64,
    pub k: usize,
    /// Loop stops once `g_r / r <= c_stop * eps`.
    #[serde(default = "default_c_stop")]
    pub c_stop: f64,
    #[serde(default)]
    pub r_override: Option<usize>,
    /// Scores below `score_threshold_mult * ln(1/eps)` are zeroed.
    #[serde(default = "default_score_mult")]
    pub score_threshold_mult: f64,
    /// Filter ratio; defaults to `ln(1/eps)`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Filter threshold; defaults to `eps`.
    #[serde(default)]
    pub s: Option<f64>,
    /// Fraction of the input used by the filtering loop; the rest is the fresh holdout.
    #[serde(default = "default_split")]
    pub split_fraction: f64,
    #[serde(default)]
    pub max_outer_iters: Option<usize>,
    /// Preprocessing stops once `||Sigma - I||_{F,2k,2k} <= c_pre * eps * ln^2(1/eps)`.
    #[serde(default = "default_c_pre")]
    pub c_pre: f64,
    #[serde(default = "default_preprocess_cap")]
    pub preprocess_cap: usize,
    #[serde(default)]
    pub allow_large_epsilon: bool,
    /// Apply `t_k` to the final estimate.
    #[serde(default = "default_true")]
    pub truncate_output: bool,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
}

impl MeanConfig {
    pub fn new(epsilon: f64, k: usize) -> Self {
        Self {
            epsilon,
            k,
            c_stop: default_c_stop(),
            r_override: None,
            score_threshold_mult: default_score_mult(),
            beta: None,
            s: None,
            split_fraction: default_split(),
            max_outer_iters: None,
            c_pre: default_c_pre(),
            preprocess_cap: default_preprocess_cap(),
            allow_large_epsilon: false,
            truncate_output: true,
            min_samples: default_min_samples(),
        }
    }

    pub fn log_inv_eps(&self) -> f64 {
        (1.0 / self.epsilon).ln()
    }

    /// `r = max(1, ceil(ln(1/eps)))` unless overridden.
    pub fn r(&self) -> usize {
        self.r_override.unwrap_or_else(|| (self.log_inv_eps().ceil() as usize).max(1))
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| self.log_inv_eps())
    }

    pub fn s(&self) -> f64 {
        self.s.unwrap_or(self.epsilon)
    }

    pub fn score_threshold(&self) -> f64 {
        self.score_threshold_mult * self.log_inv_eps()
    }

    /// `50 d / (n eps)` clamped to `[100, 10^6]`.
    pub fn outer_cap(&self, n: usize, d: usize) -> usize {
        self.max_outer_iters.unwrap_or_else(|| {
            let raw = 50.0 * d as f64 / (n.max(1) as f64 * self.epsilon);
            raw.clamp(100.0, 1e6) as usize
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return param(format!("epsilon={} must lie in (0, 0.5)", self.epsilon));
        }
        if self.epsilon > EPSILON_GATE && !self.allow_large_epsilon {
            return param(format!(
                "epsilon={} exceeds {EPSILON_GATE}; set allow_large_epsilon to override",
                self.epsilon
            ));
        }
        if self.k < 1 || self.k > d {
            return param(format!("k={} must lie in 1..={d}", self.k));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return param(format!("split_fraction={} must lie in (0, 1)", self.split_fraction));
        }
        if !(self.beta() > 1.0) {
            return param(format!("beta={} must exceed 1", self.beta()));
        }
        if !(self.s() > 0.0) || !(self.c_stop > 0.0) {
            return param("s and c_stop must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub iterations: usize,
    pub removed: usize,
    /// `||Sigma_T - I||_{F,2k,2k}` at exit.
    pub final_value: f64,
    pub threshold: f64,
    pub capped: bool,
}

/// Single-direction hard filter: while the `(F,2k,2k)` norm of `Sigma_T - I`
/// exceeds `c_pre * eps * ln^2(1/eps)`, score points by the quadratic form of
/// its maximizer centered at the coordinate-wise median and drop those above `10 ln(1/eps)` (or, if none are, the
/// top `eps/4` fraction by score).
///
/// Returns 0/1 weights over the input rows.
pub fn preprocess(
    samples: ArrayView2<f64>,
    epsilon: f64,
    k: usize,
    c_pre: f64,
    cap: usize,
) -> Result<(WeightVector, PreprocessReport)> {
    let (n, d) = samples.dim();
    if n == 0 {
        return Err(Error::EmptyInput("preprocess needs at least one sample".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return param(format!("epsilon={epsilon} must lie in (0, 0.5)"));
    }
    let log = (1.0 / epsilon).ln();
    let k2 = (2 * k).clamp(1, d);
    let mut report = PreprocessReport { threshold: c_pre * epsilon * log * log, ..Default::default() };
    let cut = 10.0 * log;
    let mut w = WeightVector::ones(n);
    let center = coordinate_median(samples);
    loop {
        let m = weighted_moments(samples, &w)?;
        let (value, dir) = fkk_norm(centered_excess(&m).view(), k2)?;
        report.final_value = value;
        if value <= report.threshold || dir.null {
            break;
        }
        if report.iterations >= cap {
            report.capped = true;
            log::warn!("preprocess hit its cap of {cap} iterations (value {value:.4})");
            break;
        }
        report.iterations += 1;
        let trace = dir.matrix.trace();
        let active: Vec<usize> = (0..n).filter(|&i| w.get(i) > 0.0).collect();
        let scores: Vec<f64> =
            active.iter().map(|&i| dir.matrix.quad_form(samples.row(i), center.view()) - trace).collect();
        let mut drop: Vec<usize> = (0..active.len()).filter(|&a| scores[a] > cut).collect();
        if drop.is_empty() {
            let count = ((epsilon / 4.0) * active.len() as f64).ceil() as usize;
            let mut order: Vec<usize> = (0..active.len()).filter(|&a| scores[a] > 0.0).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            order.truncate(count);
            drop = order;
        }
        if drop.is_empty() || drop.len() == active.len() {
            report.capped = true;
            break;
        }
        for a in drop {
            w.set_zero(active[a]);
            report.removed += 1;
        }
    }
    Ok((w, report))
}

fn centered_excess(m: &WeightedMoments) -> Array2<f64> {
    &m.cov - &Array2::<f64>::eye(m.cov.nrows())
}

/// Radius of the naive pruning ball, `10 sqrt(d) ln(d / eps)`.
pub fn prune_radius(d: usize, epsilon: f64) -> f64 {
    10.0 * (d as f64).sqrt() * (d as f64 / epsilon).ln().max(1.0)
}

/// `w(x) = 1` iff `x` is kept and `||x - mu_T||_2 <= 10 sqrt(d) ln(d/eps)`, with
/// `mu_T` the mean of the kept rows.
pub fn naive_prune(samples: ArrayView2<f64>, kept: &WeightVector, epsilon: f64) -> Result<WeightVector> {
    let n = samples.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("naive_prune needs at least one sample".into()));
    }
    let idx: Vec<usize> = (0..n).filter(|&i| kept.get(i) > 0.0).collect();
    if idx.is_empty() {
        return Err(Error::DegenerateWeights);
    }
    let center = samples.select(Axis(0), &idx).mean_axis(Axis(0)).expect("nonempty");
    prune_around(samples, kept, &center, epsilon)
}

/// Keeps the rows of `kept` within `10 sqrt(d) ln(d/eps)` of `center`.
pub fn prune_around(
    samples: ArrayView2<f64>,
    kept: &WeightVector,
    center: &Array1<f64>,
    epsilon: f64,
) -> Result<WeightVector> {
    let (n, d) = samples.dim();
    let radius = prune_radius(d, epsilon);
    let w = (0..n)
        .map(|i| {
            if kept.get(i) <= 0.0 {
                return 0.0;
            }
            let dist2: f64 = samples.row(i).iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
            if dist2.sqrt() <= radius {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    WeightVector::from_vec(w)
}

/// Coordinate-wise median of the rows.
pub fn coordinate_median(samples: ArrayView2<f64>) -> Array1<f64> {
    let ones = vec![1.0; samples.nrows()];
    samples.columns().into_iter().map(|c| weighted_median(c.view(), &ones).unwrap_or(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopExit {
    /// The stopping rule fired.
    Converged,
    /// The filter could not remove any mass.
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub g_value: f64,
    pub scores: Vec<f64>,
    /// `E_P[w - w']` over the working half.
    pub mass_removed: f64,
    pub filter_passes: usize,
    /// `E_G[w - w']`, averaged over labelled inliers.
    pub inlier_removed: Option<f64>,
    /// `E_B[w - w']`, averaged over labelled outliers.
    pub outlier_removed: Option<f64>,
    /// Whether `sum_G w tau / n < s` held before the filter call.
    pub precondition: Option<bool>,
    /// Whether `sum_G (w - w') < sum_B (w - w') / (beta - 1)` held.
    pub mass_ratio_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTrace {
    pub iterations: usize,
    pub exit: LoopExit,
    /// Average of the top-`r` eigenvalues of `Sigma_w - I` at exit.
    pub final_average: f64,
    pub directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRunTrace {
    pub working_size: usize,
    pub holdout_size: usize,
    pub preprocess: PreprocessReport,
    pub pruned: usize,
    pub r: usize,
    pub iterations: Vec<IterationRecord>,
    pub exit: LoopExit,
    /// `g_r` and `h_1..h_r'` of the final decomposition.
    pub final_g: f64,
    pub final_scores: Vec<f64>,
    /// Upper bound on `||(Sigma_w - I)`restricted to the complement of `H`||_{F,k,k}`.
    pub complement_bound: f64,
    pub h: Vec<usize>,
    pub mu_hat_1: Vec<f64>,
    pub mu_hat_2: Vec<f64>,
    pub dense: Option<DenseTrace>,
    /// Final average weight of labelled inliers/outliers in the working half.
    pub inlier_mass: Option<f64>,
    pub outlier_mass: Option<f64>,
    pub warnings: Vec<String>,
}

impl MeanRunTrace {
    pub fn total_mass_removed(&self) -> f64 {
        self.iterations.iter().map(|r| r.mass_removed).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MeanEstimate {
    pub mu_hat: Array1<f64>,
    pub trace: MeanRunTrace,
}

/// Outlier scores `tau(x) = p(x) 1(p(x) > threshold)` with
/// `p(x) = (x - mu_w)^T A (x - mu_w) - tr(A)`.
pub fn thresholded_scores(
    samples: ArrayView2<f64>,
    w: &WeightVector,
    set: &SparseDirectionSet,
    center: &Array1<f64>,
    threshold: f64,
) -> Vec<f64> {
    let a = set.composite();
    let trace = a.trace();
    (0..samples.nrows())
        .map(|i| {
            if w.get(i) <= 0.0 {
                return 0.0;
            }
            let p = a.quad_form(samples.row(i), center.view()) - trace;
            if p > threshold {
                p
            } else {
                0.0
            }
        })
        .collect()
}

/// Checks the filtering guarantee on labelled data: returns whether the
/// precondition `sum_G w tau / n < s` held and whether
/// `sum_G (w - w') < sum_B (w - w') / (beta - 1)`.
pub fn mass_ratio_check(
    before: &WeightVector,
    after: &WeightVector,
    scores: &[f64],
    labels: &[bool],
    s: f64,
    beta: f64,
) -> (bool, bool) {
    let n = before.len() as f64;
    let (mut good_score, mut good_removed, mut bad_removed) = (0.0, 0.0, 0.0);
    for i in 0..before.len() {
        let delta = before.get(i) - after.get(i);
        if labels[i] {
            bad_removed += delta;
        } else {
            good_score += before.get(i) * scores[i];
            good_removed += delta;
        }
    }
    let precondition = good_score / n < s;
    let holds = good_removed < bad_removed / (beta - 1.0) || (good_removed == 0.0 && bad_removed == 0.0);
    (precondition, holds)
}

fn removal_split(before: &WeightVector, after: &WeightVector, labels: Option<&[bool]>) -> (Option<f64>, Option<f64>) {
    let Some(labels) = labels else { return (None, None) };
    let diff = |want: bool| {
        let (mut s, mut c) = (0.0, 0usize);
        for i in 0..before.len() {
            if labels[i] == want {
                s += before.get(i) - after.get(i);
                c += 1;
            }
        }
        (c > 0).then(|| s / c as f64)
    };
    (diff(false), diff(true))
}

/// Robust `k`-sparse mean of Huber-contaminated `N(mu, I)` samples.
///
/// `labels` (`true` = outlier) are used only to fill the mass ledger of the trace.
pub fn robust_sparse_mean(
    samples: ArrayView2<f64>,
    labels: Option<&[bool]>,
    config: &MeanConfig,
) -> Result<MeanEstimate> {
    let (n, d) = samples.dim();
    config.validate(d)?;
    if let Some(l) = labels {
        if l.len() != n {
            return param(format!("{} labels for {n} samples", l.len()));
        }
    }
    if n < 2 * config.min_samples {
        return Err(Error::EmptyInput(format!("need at least {} samples, got {n}", 2 * config.min_samples)));
    }
    let n_work =
        ((config.split_fraction * n as f64).round() as usize).clamp(config.min_samples, n - config.min_samples);
    let work = samples.slice(s![..n_work, ..]);
    let holdout = samples.slice(s![n_work.., ..]);
    let work_labels = labels.map(|l| &l[..n_work]);
    let r = config.r();
    let mut warnings = Vec::new();

    let (kept, pre) = preprocess(work, config.epsilon, config.k, config.c_pre, config.preprocess_cap)?;
    if pre.capped {
        warnings.push("preprocess stopped before reaching its threshold".to_string());
    }
    let mut w = naive_prune(work, &kept, config.epsilon)?;
    let pruned = (0..n_work).filter(|&i| kept.get(i) > 0.0 && w.get(i) == 0.0).count();

    let cap = config.outer_cap(n_work, d);
    let threshold = config.score_threshold();
    let mut iterations = Vec::new();
    let (exit, moments, set) = loop {
        let m = weighted_moments(work, &w)?;
        let set = greedy_decomposition(centered_excess(&m).view(), config.k, r)?;
        if set.g_value / r as f64 <= config.c_stop * config.epsilon {
            break (LoopExit::Converged, m, set);
        }
        if iterations.len() >= cap {
            warnings.push(format!("filtering loop hit its cap of {cap} iterations"));
            break (LoopExit::IterationCap, m, set);
        }
        let scores = thresholded_scores(work, &w, &set, &m.mean, threshold);
        let outcome = downweight_filter(&w, &scores, config.s(), config.beta())?;
        let removed = w.total_mass() - outcome.weights.total_mass();
        if removed <= 0.0 {
            warnings.push("filter removed no mass; stopping".to_string());
            break (LoopExit::Stalled, m, set);
        }
        let (inlier_removed, outlier_removed) = removal_split(&w, &outcome.weights, work_labels);
        let checked =
            work_labels.map(|l| mass_ratio_check(&w, &outcome.weights, &scores, l, config.s(), config.beta()));
        iterations.push(IterationRecord {
            precondition: checked.map(|c| c.0),
            mass_ratio_holds: checked.map(|c| c.1),
            g_value: set.g_value,
            scores: set.scores(),
            mass_removed: removed,
            filter_passes: outcome.passes,
            inlier_removed,
            outlier_removed,
        });
        w = outcome.weights;
    };

    let h = set.union_support();
    let complement_bound = if set.len() < r { 0.0 } else { set.scores().last().copied().unwrap_or(0.0) };

    let mut mu_hat_1 = Array1::zeros(d);
    let mut dense = None;
    if !h.is_empty() {
        let fresh = holdout.select(Axis(1), &h);
        let (est, tr) = dense_robust_mean(fresh.view(), config)?;
        for (&c, v) in h.iter().zip(est.iter()) {
            mu_hat_1[c] = *v;
        }
        dense = Some(tr);
    }
    let mut mu_hat_2 = moments.mean.clone();
    for &c in &h {
        mu_hat_2[c] = 0.0;
    }
    let mut mu_hat = &mu_hat_1 + &mu_hat_2;
    if config.truncate_output {
        mu_hat = truncate_top_k(mu_hat.view(), config.k)?;
    }

    let (inlier_mass, outlier_mass) = match work_labels {
        Some(l) => (w.mass_of(l, false), w.mass_of(l, true)),
        None => (None, None),
    };
    Ok(MeanEstimate {
        mu_hat,
        trace: MeanRunTrace {
            working_size: n_work,
            holdout_size: n - n_work,
            preprocess: pre,
            pruned,
            r,
            iterations,
            exit,
            final_g: set.g_value,
            final_scores: set.scores(),
            complement_bound,
            h,
            mu_hat_1: mu_hat_1.to_vec(),
            mu_hat_2: mu_hat_2.to_vec(),
            dense,
            inlier_mass,
            outlier_mass,
            warnings,
        },
    })
}

/// Dense filter on a low-dimensional block: filter along the top-`r` eigenvectors
/// of `Sigma_w - I` until their average eigenvalue is at most `c_stop * eps`,
/// then return the weighted median along those eigenvectors plus the weighted
/// mean on their orthogonal complement.
pub fn dense_robust_mean(samples: ArrayView2<f64>, config: &MeanConfig) -> Result<(Array1<f64>, DenseTrace)> {
    let (n, d) = samples.dim();
    if d == 0 {
        let tr = DenseTrace { iterations: 0, exit: LoopExit::Converged, final_average: 0.0, directions: 0 };
        return Ok((Array1::zeros(0), tr));
    }
    if n == 0 {
        return Err(Error::EmptyInput("dense_robust_mean needs samples".into()));
    }
    let r = config.r().min(d);
    let threshold = config.score_threshold();
    let mut w = prune_around(samples, &WeightVector::ones(n), &coordinate_median(samples), config.epsilon)?;
    let cap = config.outer_cap(n, d);
    let mut iterations = 0;
    let (exit, m, vecs, average) = loop {
        let m = weighted_moments(samples, &w)?;
        let (vals, vecs) = sym_eigen(centered_excess(&m).view());
        let average = vals[..r].iter().sum::<f64>() / r as f64;
        if average <= config.c_stop * config.epsilon {
            break (LoopExit::Converged, m, vecs, average);
        }
        if iterations >= cap {
            break (LoopExit::IterationCap, m, vecs, average);
        }
        let top = vecs.slice(s![.., ..r]);
        let scores: Vec<f64> = (0..n)
            .map(|i| {
                if w.get(i) <= 0.0 {
                    return 0.0;
                }
                let c = &samples.row(i) - &m.mean;
                let p = top.t().dot(&c).iter().map(|x| x * x).sum::<f64>() - r as f64;
                if p > threshold {
                    p
                } else {
                    0.0
                }
            })
            .collect();
        let outcome = downweight_filter(&w, &scores, config.s(), config.beta())?;
        if outcome.weights.total_mass() >= w.total_mass() {
            break (LoopExit::Stalled, m, vecs, average);
        }
        w = outcome.weights;
        iterations += 1;
    };
    let mut est = m.mean.clone();
    for j in 0..r {
        let u = vecs.column(j);
        let proj = samples.dot(&u);
        let med = weighted_median(proj.view(), w.as_slice()).ok_or(Error::DegenerateWeights)?;
        let shift = med - u.dot(&m.mean);
        est.scaled_add(shift, &u);
    }
    Ok((est, DenseTrace { iterations, exit, final_average: average, directions: r }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertificateOutcome {
    /// A precondition failed; nothing is asserted.
    Skipped,
    Holds {
        error: f64,
        bound: f64,
    },
    Violated {
        error: f64,
        bound: f64,
    },
}

/// Constant in front of the certificate bound.
pub const C_CERT: f64 = 10.0;

/// Checks `||mu_w - mu||_{2,k} <= C_cert (a sqrt(ln 1/a) + sqrt(lambda eps) + eps + sqrt(a eps ln 1/a))`
/// whenever `||Sigma_w - I||_{op,k} <= lambda` is certified and the retained inlier mass
/// is at least `1 - alpha`. The sparse operator norm is certified with the exhaustive
/// oracle for `d <= 14` and with the `(F,k,k)` upper bound otherwise.
pub fn certificate_check(
    moments: &WeightedMoments,
    mu_true: &Array1<f64>,
    epsilon: f64,
    alpha: f64,
    k: usize,
    lambda: f64,
    inlier_mass: f64,
) -> Result<CertificateOutcome> {
    if inlier_mass < 1.0 - alpha {
        return Ok(CertificateOutcome::Skipped);
    }
    let excess = centered_excess(moments);
    let d = excess.nrows();
    let certified =
        if d <= ORACLE_MAX_DIM { sparse_op_norm_oracle(excess.view(), k)? } else { fkk_norm(excess.view(), k)?.0 };
    if certified > lambda {
        return Ok(CertificateOutcome::Skipped);
    }
    let a_log = if alpha > 0.0 && alpha < 1.0 { alpha * (1.0 / alpha).ln() } else { 0.0 };
    let bound = C_CERT * (alpha_sqrt_log(alpha) + (lambda * epsilon).sqrt() + epsilon + (a_log * epsilon).sqrt());
    let diff = &moments.mean - mu_true;
    let error = crate::linalg::sparse_norm_2k(diff.view(), k)?;
    Ok(if error <= bound {
        CertificateOutcome::Holds { error, bound }
    } else {
        CertificateOutcome::Violated { error, bound }
    })
}

fn alpha_sqrt_log(alpha: f64) -> f64 {
    if alpha > 0.0 && alpha < 1.0 {
        alpha * (1.0 / alpha).ln().sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contamination::{gen_mean_task, AdversaryKind, ContaminationSpec, SparseVectorSpec, Truth};
    use ndarray::array;

    fn mu_of(ds: &crate::contamination::Dataset) -> Array1<f64> {
        match &ds.truth {
            Some(Truth::Mean { mu }) => Array1::from(mu.clone()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn config_defaults() {
        let c = MeanConfig::new(0.05, 3);
        assert_eq!(c.r(), 3);
        assert!((c.beta() - 20f64.ln()).abs() < 1e-12);
        assert_eq!(c.s(), 0.05);
        assert!(MeanConfig::new(0.3, 3).validate(10).is_err());
        let mut big = MeanConfig::new(0.3, 3);
        big.allow_large_epsilon = true;
        assert!(big.validate(10).is_ok());
        assert_eq!(MeanConfig::new(0.5f64.powi(10), 1).r(), 7);
    }

    #[test]
    fn naive_prune_examples() {
        let mut x = Array2::zeros((50_000, 3));
        x[[49_999, 0]] = 1e6;
        let w = naive_prune(x.view(), &WeightVector::ones(50_000), 0.05).unwrap();
        assert_eq!(w.get(49_999), 0.0);
        assert_eq!(w.sum(), 49_999.0);
        let one = array![[3.0, 4.0]];
        assert_eq!(naive_prune(one.view(), &WeightVector::ones(1), 0.05).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn preprocess_rejects_empty() {
        let x = Array2::<f64>::zeros((0, 3));
        assert!(matches!(preprocess(x.view(), 0.1, 1, 24.0, 10), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn preprocess_removes_large_sparse_shift() {
        let spec = ContaminationSpec::new(0.1, AdversaryKind::SparseShift, 11).with_shift(20.0);
        let ds = gen_mean_task(4000, 30, 3, &SparseVectorSpec::Zero, &spec).unwrap();
        let (w, report) = preprocess(ds.samples.view(), 0.1, 3, 24.0, 50).unwrap();
        let labels = ds.labels.unwrap();
        for i in 0..ds.samples.nrows() {
            if labels[i] {
                assert_eq!(w.get(i), 0.0);
            }
        }
        assert!(report.final_value <= report.threshold);
    }

    #[test]
    fn far_outliers_are_pruned() {
        let spec = ContaminationSpec::new(0.1, AdversaryKind::SparseShift, 2).with_shift(1e6);
        let ds = gen_mean_task(4000, 20, 2, &SparseVectorSpec::Random { norm: 1.0 }, &spec).unwrap();
        let est = robust_sparse_mean(ds.samples.view(), ds.labels.as_deref(), &MeanConfig::new(0.1, 2)).unwrap();
        let err = (&est.mu_hat - &mu_of(&ds)).mapv(|v| v * v).sum().sqrt();
        assert!(err < 0.2, "error {err}");
    }

    #[test]
    fn dense_estimator_on_single_coordinate() {
        let spec = ContaminationSpec::new(0.1, AdversaryKind::SparseShift, 5).with_shift(30.0);
        let ds = gen_mean_task(20000, 1, 1, &SparseVectorSpec::Given(vec![0.5]), &spec).unwrap();
        let (est, _) = dense_robust_mean(ds.samples.view(), &MeanConfig::new(0.1, 1)).unwrap();
        assert!((est[0] - 0.5).abs() <= 3.0 * 0.1, "estimate {}", est[0]);
    }

    #[test]
    fn dense_estimator_identity_on_symmetric_data() {
        // ±e_i pairs: eigen condition holds and medians coincide with the mean
        let mut x = Array2::zeros((8, 4));
        for i in 0..4 {
            x[[2 * i, i]] = 1.0;
            x[[2 * i + 1, i]] = -1.0;
        }
        let (est, tr) = dense_robust_mean(x.view(), &MeanConfig::new(0.1, 2)).unwrap();
        assert_eq!(tr.exit, LoopExit::Converged);
        assert!(est.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn certificate_formula_limit() {
        let m = WeightedMoments { mean: array![0.0, 0.0, 0.0], cov: Array2::eye(3), mass: 1.0 };
        let out = certificate_check(&m, &array![0.0, 0.0, 0.0], 0.1, 0.0, 2, 0.0, 1.0).unwrap();
        match out {
            CertificateOutcome::Holds { bound, .. } => assert!((bound - C_CERT * 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let skipped = certificate_check(&m, &array![0.0, 0.0, 0.0], 0.1, 0.05, 2, 0.0, 0.5).unwrap();
        assert_eq!(skipped, CertificateOutcome::Skipped);
    }
}
