//! Huber-contaminated synthetic data for the mean, PCA and regression tasks.
//!
//! Each sample is independently an outlier with probability `epsilon`. Sample
//! `i` is generated from its own counter stream (see [`crate::rng`]): one
//! uniform decides the mixture component, the next draws build the inlier,
//! and outliers consume further draws from the same stream.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rng::{CounterRng, StreamTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Mean,
    Pca,
    #[serde(alias = "reg")]
    Regression,
}

impl Task {
    /// Short name used in dataset headers.
    pub fn tag(self) -> &'static str {
        match self {
            Task::Mean => "mean",
            Task::Pca => "pca",
            Task::Regression => "reg",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Task::Mean),
            "pca" => Ok(Task::Pca),
            "reg" | "regression" => Ok(Task::Regression),
            other => param(format!("unknown task '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Outliers are drawn from the inlier law (labels only).
    None,
    /// Point mass shifted by `shift` along a random sparse unit direction.
    SparseShift,
    /// Gaussian clusters centred `shift` away along random dense directions.
    DenseCluster,
    /// Point mass at `sqrt(2 ln(1/eps))` along a random `k`-sparse direction
    /// (for the mean task, one supported on `supp(mu)` when `mu != 0`).
    EvasiveTail,
    /// Outliers cycle through user-supplied points.
    CustomPoints,
    /// Regression only: the response of an inlier pair is negated.
    FlippedResponse,
}

impl AdversaryKind {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .or_else(|_| param(format!("unknown adversary '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    /// Shift magnitude; the default depends on the adversary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Support size of the shift direction (defaults to `k`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    /// Raw outlier points for `custom_points` (regression rows carry `y` last).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub epsilon: f64,
    pub adversary: AdversaryKind,
    #[serde(default)]
    pub params: AdversaryParams,
    pub seed: u64,
}

impl ContaminationSpec {
    pub fn new(epsilon: f64, adversary: AdversaryKind, seed: u64) -> Self {
        Self { epsilon, adversary, params: AdversaryParams::default(), seed }
    }

    pub fn clean(seed: u64) -> Self {
        Self::new(0.0, AdversaryKind::None, seed)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.params.shift = Some(shift);
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return param(format!("epsilon={} must lie in [0, 0.5)", self.epsilon));
        }
        if let Some(s) = self.params.support {
            if s == 0 || s > d {
                return param(format!("shift support {s} must lie in 1..={d}"));
            }
        }
        if self.adversary == AdversaryKind::CustomPoints && self.params.points.is_empty() {
            return param("custom_points adversary needs at least one point");
        }
        Ok(())
    }

    /// Shift magnitude with per-adversary defaults.
    pub fn shift(&self) -> f64 {
        self.params.shift.unwrap_or(match self.adversary {
            AdversaryKind::EvasiveTail => evasive_shift(self.epsilon),
            AdversaryKind::DenseCluster => 5.0,
            _ => 10.0,
        })
    }
}

/// `sqrt(2 ln(1/eps))`, the default evasive offset.
pub fn evasive_shift(epsilon: f64) -> f64 {
    if epsilon > 0.0 {
        (2.0 * (1.0 / epsilon).ln()).sqrt()
    } else {
        0.0
    }
}

/// How a sparse ground-truth vector is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseVectorSpec {
    Zero,
    Given(Vec<f64>),
    /// Random `k`-sparse vector with Gaussian entries scaled to `norm`.
    Random {
        norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Truth {
    Mean { mu: Vec<f64> },
    Pca { rho: f64, v: Vec<f64> },
    Regression { beta: Vec<f64>, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub task: Task,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub adversary: AdversaryKind,
    /// Realized number of outliers.
    pub outliers: usize,
}

/// Samples (row-major `n x d`), optional responses, labels (`true` = outlier) and truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Array2<f64>,
    pub responses: Option<Array1<f64>>,
    pub labels: Option<Vec<bool>>,
    pub truth: Option<Truth>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn d(&self) -> usize {
        self.samples.ncols()
    }

    pub fn outlier_fraction(&self) -> Option<f64> {
        self.labels.as_ref().map(|l| l.iter().filter(|&&b| b).count() as f64 / l.len().max(1) as f64)
    }

    /// Rows whose label is inlier (all rows when unlabeled).
    pub fn inliers(&self) -> Array2<f64> {
        match &self.labels {
            None => self.samples.clone(),
            Some(l) => {
                let idx: Vec<usize> = (0..l.len()).filter(|&i| !l[i]).collect();
                self.samples.select(ndarray::Axis(0), &idx)
            }
        }
    }
}

/// Random `k`-sparse unit vector in dimension `d` avoiding `forbid` when possible.
fn random_sparse_unit(rng: &mut CounterRng, d: usize, k: usize, forbid: &[usize]) -> Array1<f64> {
    let allowed: Vec<usize> = (0..d).filter(|i| !forbid.contains(i)).collect();
    let pool: Vec<usize> = if allowed.len() >= k { allowed } else { (0..d).collect() };
    let picks = rng.subset(pool.len(), k);
    let mut u = Array1::zeros(d);
    loop {
        for &p in &picks {
            u[pool[p]] = rng.normal();
        }
        let norm = u.dot(&u).sqrt();
        if norm > 1e-8 {
            return u / norm;
        }
    }
}

fn random_dense_unit(rng: &mut CounterRng, d: usize) -> Array1<f64> {
    let mut u = Array1::zeros(d);
    loop {
        for x in u.iter_mut() {
            *x = rng.normal();
        }
        let norm = u.dot(&u).sqrt();
        if norm > 1e-8 {
            return u / norm;
        }
    }
}

fn sparse_vector(spec: &SparseVectorSpec, d: usize, k: usize, seed: u64, what: &str) -> Result<Array1<f64>> {
    let v = match spec {
        SparseVectorSpec::Zero => Array1::zeros(d),
        SparseVectorSpec::Given(v) => {
            if v.len() != d {
                return param(format!("{what} has length {} but d={d}", v.len()));
            }
            Array1::from(v.clone())
        }
        SparseVectorSpec::Random { norm } => {
            let mut rng = CounterRng::new(seed, StreamTag::Truth, 0);
            random_sparse_unit(&mut rng, d, k, &[]) * *norm
        }
    };
    let nnz = v.iter().filter(|x| **x != 0.0).count();
    if nnz > k {
        return param(format!("{what} has {nnz} nonzeros but k={k}"));
    }
    Ok(v)
}

fn support_of(v: &Array1<f64>) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] != 0.0).collect()
}

/// Fixed adversary ingredients drawn once per dataset.
struct AdversaryPlan {
    kind: AdversaryKind,
    shift: f64,
    direction: Array1<f64>,
    centers: Vec<Array1<f64>>,
    points: Vec<Vec<f64>>,
}

impl AdversaryPlan {
    fn new(spec: &ContaminationSpec, d: usize, k: usize, avoid: &[usize]) -> Self {
        let mut rng = CounterRng::new(spec.seed, StreamTag::Adversary, 0);
        let support = spec.params.support.unwrap_or(k).min(d);
        let direction = random_sparse_unit(&mut rng, d, support, avoid);
        let clusters = spec.params.clusters.unwrap_or(1).max(1);
        let centers = if spec.adversary == AdversaryKind::DenseCluster {
            (0..clusters).map(|_| random_dense_unit(&mut rng, d)).collect()
        } else {
            Vec::new()
        };
        Self { kind: spec.adversary, shift: spec.shift(), direction, centers, points: spec.params.points.clone() }
    }

    fn custom(&self, rng: &mut CounterRng, len: usize) -> Result<&[f64]> {
        let p = &self.points[rng.below(self.points.len())];
        if p.len() != len {
            return param(format!("custom point has {} entries, expected {len}", p.len()));
        }
        Ok(p)
    }
}

fn begin(n: usize, d: usize, k: usize, spec: &ContaminationSpec) -> Result<()> {
    if n == 0 || d == 0 {
        return param("n and d must be positive");
    }
    if k == 0 || k > d {
        return param(format!("k={k} must lie in 1..={d}"));
    }
    spec.validate(d)
}

fn meta(task: Task, n: usize, d: usize, k: usize, spec: &ContaminationSpec, labels: &[bool]) -> DatasetMeta {
    DatasetMeta {
        task,
        n,
        d,
        k,
        seed: spec.seed,
        epsilon: spec.epsilon,
        adversary: spec.adversary,
        outliers: labels.iter().filter(|&&b| b).count(),
    }
}

/// Huber-contaminated samples of `N(mu, I)` with `k`-sparse `mu`.
pub fn gen_mean_task(n: usize, d: usize, k: usize, mu: &SparseVectorSpec, spec: &ContaminationSpec) -> Result<Dataset> {
    begin(n, d, k, spec)?;
    if spec.adversary == AdversaryKind::FlippedResponse {
        return param("flipped_response applies to the regression task only");
    }
    let mu = sparse_vector(mu, d, k, spec.seed, "mu")?;
    let mut plan = AdversaryPlan::new(spec, d, k, &[]);
    let mu_support = support_of(&mu);
    if spec.adversary == AdversaryKind::EvasiveTail && !mu_support.is_empty() {
        // shift inside supp(mu) so that top-k truncation cannot discard it
        let mut rng = CounterRng::new(spec.seed, StreamTag::Adversary, 1);
        let mut u = Array1::zeros(d);
        let values = random_dense_unit(&mut rng, mu_support.len());
        for (&i, v) in mu_support.iter().zip(&values) {
            u[i] = *v;
        }
        plan.direction = u;
    }
    let mut samples = Array2::zeros((n, d));
    let mut labels = vec![false; n];
    for i in 0..n {
        let mut rng = CounterRng::new(spec.seed, StreamTag::Sample, i as u64);
        let outlier = rng.uniform() < spec.epsilon;
        let mut row = samples.row_mut(i);
        for (x, m) in row.iter_mut().zip(&mu) {
            *x = m + rng.normal();
        }
        if !outlier {
            continue;
        }
        labels[i] = true;
        match plan.kind {
            AdversaryKind::None => {}
            AdversaryKind::SparseShift | AdversaryKind::EvasiveTail => {
                row.assign(&(&mu + &(&plan.direction * plan.shift)));
            }
            AdversaryKind::DenseCluster => {
                let c = &plan.centers[rng.below(plan.centers.len())];
                row.scaled_add(plan.shift, c);
            }
            AdversaryKind::CustomPoints => {
                let p = plan.custom(&mut rng, d)?;
                row.assign(&ndarray::ArrayView1::from(p));
            }
            AdversaryKind::FlippedResponse => unreachable!(),
        }
    }
    Ok(Dataset {
        meta: meta(Task::Mean, n, d, k, spec, &labels),
        samples,
        responses: None,
        labels: Some(labels),
        truth: Some(Truth::Mean { mu: mu.to_vec() }),
    })
}

/// Huber-contaminated samples of `N(0, I + rho v v^T)` with `k`-sparse unit `v`.
///
/// `sparse_shift` and `evasive_tail` plant a fake spike: outliers at `±shift·u`
/// with `u` a sparse unit vector supported away from `v`.
pub fn gen_pca_task(
    n: usize,
    d: usize,
    k: usize,
    rho: f64,
    v: &SparseVectorSpec,
    spec: &ContaminationSpec,
) -> Result<Dataset> {
    begin(n, d, k, spec)?;
    if !(rho > 0.0) {
        return param(format!("rho={rho} must be positive"));
    }
    if spec.adversary == AdversaryKind::FlippedResponse {
        return param("flipped_response applies to the regression task only");
    }
    let v = match v {
        SparseVectorSpec::Zero => return param("the spike direction cannot be zero"),
        SparseVectorSpec::Random { .. } => {
            sparse_vector(&SparseVectorSpec::Random { norm: 1.0 }, d, k, spec.seed, "v")?
        }
        given => {
            let v = sparse_vector(given, d, k, spec.seed, "v")?;
            let norm = v.dot(&v).sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return param(format!("spike direction must be unit norm, got {norm}"));
            }
            v
        }
    };
    let plan = AdversaryPlan::new(spec, d, k, &support_of(&v));
    let spike = rho.sqrt();
    let mut samples = Array2::zeros((n, d));
    let mut labels = vec![false; n];
    for i in 0..n {
        let mut rng = CounterRng::new(spec.seed, StreamTag::Sample, i as u64);
        let outlier = rng.uniform() < spec.epsilon;
        let mut row = samples.row_mut(i);
        for x in row.iter_mut() {
            *x = rng.normal();
        }
        let s = rng.normal();
        row.scaled_add(spike * s, &v);
        if !outlier {
            continue;
        }
        labels[i] = true;
        match plan.kind {
            AdversaryKind::None => {}
            AdversaryKind::SparseShift | AdversaryKind::EvasiveTail => {
                let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                row.assign(&(&plan.direction * (sign * plan.shift)));
            }
            AdversaryKind::DenseCluster => {
                let c = &plan.centers[rng.below(plan.centers.len())];
                row.scaled_add(plan.shift, c);
            }
            AdversaryKind::CustomPoints => {
                let p = plan.custom(&mut rng, d)?;
                row.assign(&ndarray::ArrayView1::from(p));
            }
            AdversaryKind::FlippedResponse => unreachable!(),
        }
    }
    Ok(Dataset {
        meta: meta(Task::Pca, n, d, k, spec, &labels),
        samples,
        responses: None,
        labels: Some(labels),
        truth: Some(Truth::Pca { rho, v: v.to_vec() }),
    })
}

/// Default cap on `||beta||_2 / sigma` accepted by [`gen_regression_task`].
pub const BETA_NORM_CAP: f64 = 3.0;

/// Huber-contaminated pairs with `x ~ N(0, I)`, `y ~ N(x^T beta, sigma^2)`.
///
/// Adversaries: `flipped_response` negates `y`; `sparse_shift`/`evasive_tail`
/// answer with a planted regressor `beta + shift·u`; `dense_cluster` places
/// high-leverage points with pure-noise responses.
pub fn gen_regression_task(
    n: usize,
    d: usize,
    k: usize,
    beta: &SparseVectorSpec,
    sigma: f64,
    spec: &ContaminationSpec,
) -> Result<Dataset> {
    begin(n, d, k, spec)?;
    if !(sigma > 0.0) {
        return param(format!("sigma={sigma} must be positive"));
    }
    let beta = sparse_vector(beta, d, k, spec.seed, "beta")?;
    let norm = beta.dot(&beta).sqrt();
    if norm > BETA_NORM_CAP * sigma {
        return param(format!("||beta||={norm} exceeds {BETA_NORM_CAP}·sigma"));
    }
    let plan = AdversaryPlan::new(spec, d, k, &support_of(&beta));
    let planted = &beta + &(&plan.direction * plan.shift);
    let mut samples = Array2::zeros((n, d));
    let mut responses = Array1::zeros(n);
    let mut labels = vec![false; n];
    for i in 0..n {
        let mut rng = CounterRng::new(spec.seed, StreamTag::Sample, i as u64);
        let outlier = rng.uniform() < spec.epsilon;
        let mut row = samples.row_mut(i);
        for x in row.iter_mut() {
            *x = rng.normal();
        }
        let noise = sigma * rng.normal();
        responses[i] = row.dot(&beta) + noise;
        if !outlier {
            continue;
        }
        labels[i] = true;
        match plan.kind {
            AdversaryKind::None => {}
            AdversaryKind::FlippedResponse => responses[i] = -responses[i],
            AdversaryKind::SparseShift | AdversaryKind::EvasiveTail => {
                responses[i] = row.dot(&planted) + noise;
            }
            AdversaryKind::DenseCluster => {
                let c = &plan.centers[rng.below(plan.centers.len())];
                row.scaled_add(plan.shift, c);
                responses[i] = noise;
            }
            AdversaryKind::CustomPoints => {
                let p = plan.custom(&mut rng, d + 1)?;
                row.assign(&ndarray::ArrayView1::from(&p[..d]));
                responses[i] = p[d];
            }
        }
    }
    Ok(Dataset {
        meta: meta(Task::Regression, n, d, k, spec, &labels),
        samples,
        responses: Some(responses),
        labels: Some(labels),
        truth: Some(Truth::Regression { beta: beta.to_vec(), sigma }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_mean_task_has_no_outliers() {
        let ds =
            gen_mean_task(2000, 10, 3, &SparseVectorSpec::Random { norm: 2.0 }, &ContaminationSpec::clean(5)).unwrap();
        assert_eq!(ds.meta.outliers, 0);
        let Some(Truth::Mean { mu }) = &ds.truth else { panic!() };
        let mean = ds.samples.mean_axis(ndarray::Axis(0)).unwrap();
        let err: f64 = mean.iter().zip(mu).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 4.0 * (10.0f64 / 2000.0).sqrt());
    }

    #[test]
    fn sparse_shift_outliers_are_exact_point_mass() {
        let spec = ContaminationSpec::new(0.1, AdversaryKind::SparseShift, 9).with_shift(7.0);
        let ds = gen_mean_task(500, 12, 3, &SparseVectorSpec::Zero, &spec).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        let first = labels.iter().position(|&b| b).unwrap();
        let point = ds.samples.row(first).to_owned();
        assert!((point.dot(&point).sqrt() - 7.0).abs() < 1e-12);
        assert_eq!(point.iter().filter(|x| **x != 0.0).count(), 3);
        for i in (0..500).filter(|&i| labels[i]) {
            assert_eq!(ds.samples.row(i), point.view());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = ContaminationSpec::new(0.2, AdversaryKind::DenseCluster, 3);
        let a = gen_regression_task(300, 8, 2, &SparseVectorSpec::Random { norm: 1.0 }, 1.0, &spec).unwrap();
        let b = gen_regression_task(300, 8, 2, &SparseVectorSpec::Random { norm: 1.0 }, 1.0, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_errors() {
        let spec = ContaminationSpec::clean(1);
        assert!(gen_pca_task(10, 5, 2, 0.0, &SparseVectorSpec::Random { norm: 1.0 }, &spec).is_err());
        assert!(gen_regression_task(10, 5, 2, &SparseVectorSpec::Zero, 0.0, &spec).is_err());
        assert!(gen_mean_task(10, 5, 1, &SparseVectorSpec::Given(vec![1.0, 1.0, 0.0, 0.0, 0.0]), &spec).is_err());
        let bad = ContaminationSpec::new(0.6, AdversaryKind::None, 1);
        assert!(gen_mean_task(10, 5, 1, &SparseVectorSpec::Zero, &bad).is_err());
        let flipped = ContaminationSpec::new(0.1, AdversaryKind::FlippedResponse, 1);
        assert!(gen_mean_task(10, 5, 1, &SparseVectorSpec::Zero, &flipped).is_err());
    }

    #[test]
    fn flipped_responses_are_negated() {
        let clean =
            gen_regression_task(400, 6, 2, &SparseVectorSpec::Random { norm: 1.0 }, 1.0, &ContaminationSpec::clean(4))
                .unwrap();
        let spec = ContaminationSpec::new(0.2, AdversaryKind::FlippedResponse, 4);
        let dirty = gen_regression_task(400, 6, 2, &SparseVectorSpec::Random { norm: 1.0 }, 1.0, &spec).unwrap();
        let labels = dirty.labels.as_ref().unwrap();
        assert!(labels.iter().any(|&b| b));
        let (yc, yd) = (clean.responses.unwrap(), dirty.responses.unwrap());
        for i in 0..400 {
            // the mixture uniform is drawn first, so inlier draws coincide across epsilon
            assert_eq!(clean.samples.row(i), dirty.samples.row(i));
            assert_eq!(yd[i], if labels[i] { -yc[i] } else { yc[i] });
        }
    }

    #[test]
    fn adversary_names_parse() {
        assert_eq!(AdversaryKind::parse("evasive_tail").unwrap(), AdversaryKind::EvasiveTail);
        assert_eq!(AdversaryKind::parse("flipped-response").unwrap(), AdversaryKind::FlippedResponse);
        assert!(AdversaryKind::parse("bogus").is_err());
    }
}
