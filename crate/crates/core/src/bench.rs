//! Experiment plumbing shared by the CLI and the acceptance suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::contamination::{
    gen_mean_task, gen_pca_task, gen_regression_task, AdversaryKind, AdversaryParams, ContaminationSpec, Dataset,
    SparseVectorSpec, Task, Truth,
};
use crate::error::{param, Error, Result};
use crate::linalg::{projector_distance, sparse_norm_2k};
use crate::mean::{robust_sparse_mean, MeanConfig};
use crate::oracle::{sparse_norm_2k_exhaustive, ORACLE_MAX_DIM};
use crate::pca::{robust_sparse_pca, variance_ratio, warm_start, PcaConfig};
use crate::regression::{robust_sparse_regression, RegressionConfig};
use crate::rng::{CounterRng, StreamTag};

pub const REPORT_SCHEMA: u32 = 1;

/// Corruption rate handed to the robust estimators when the data are clean.
pub const NOMINAL_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Paper,
    BaselineSingleDirection,
    /// Empirical mean, empirical PCA or least squares, depending on the task.
    #[serde(alias = "empirical_mean", alias = "empirical_pca", alias = "ols")]
    Classical,
    CoordinateMedian,
}

impl Estimator {
    pub fn parse(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "paper" => Ok(Estimator::Paper),
            "baseline" | "baseline_single_direction" => Ok(Estimator::BaselineSingleDirection),
            "classical" | "empirical_mean" | "empirical_pca" | "ols" => Ok(Estimator::Classical),
            "coordinate_median" | "median" => Ok(Estimator::CoordinateMedian),
            other => param(format!("unknown estimator '{other}'")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Paper => "paper",
            Estimator::BaselineSingleDirection => "baseline_single_direction",
            Estimator::Classical => "classical",
            Estimator::CoordinateMedian => "coordinate_median",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

fn default_repeats() -> usize {
    1
}
fn default_norm() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub task: Task,
    pub grid: Vec<GridCell>,
    #[serde(default = "default_adversary")]
    pub adversary: AdversaryKind,
    #[serde(default)]
    pub adversary_params: AdversaryParams,
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    /// Norm of the planted mean or regression vector.
    #[serde(default = "default_norm")]
    pub truth_norm: f64,
    /// Field overrides merged into the paper estimator's configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_adversary() -> AdversaryKind {
    AdversaryKind::None
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return param("repeats must be at least 1");
        }
        if self.grid.is_empty() {
            return param("grid must not be empty");
        }
        if self.estimators.is_empty() {
            return param("estimators must not be empty");
        }
        Ok(())
    }

    /// Seed of the dataset for `(cell, repeat)`.
    pub fn dataset_seed(&self, cell: usize, repeat: usize) -> u64 {
        CounterRng::new(self.seed, StreamTag::Experiment, ((cell as u64) << 24) | repeat as u64).next_u64()
    }

    pub fn contamination(&self, cell: &GridCell, seed: u64) -> ContaminationSpec {
        let adversary = if cell.epsilon == 0.0 { AdversaryKind::None } else { self.adversary };
        ContaminationSpec { epsilon: cell.epsilon, adversary, params: self.adversary_params.clone(), seed }
    }

    pub fn generate(&self, cell: &GridCell, seed: u64) -> Result<Dataset> {
        let spec = self.contamination(cell, seed);
        let truth = SparseVectorSpec::Random { norm: self.truth_norm };
        match self.task {
            Task::Mean => gen_mean_task(cell.n, cell.d, cell.k, &truth, &spec),
            Task::Pca => gen_pca_task(
                cell.n,
                cell.d,
                cell.k,
                cell.rho.unwrap_or(0.5),
                &SparseVectorSpec::Random { norm: 1.0 },
                &spec,
            ),
            Task::Regression => gen_regression_task(cell.n, cell.d, cell.k, &truth, cell.sigma.unwrap_or(1.0), &spec),
        }
    }
}

/// Parameters shared by every estimator call.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub epsilon: f64,
    pub k: usize,
    pub rho: f64,
    pub seed: u64,
    pub overrides: Option<serde_json::Value>,
}

impl EstimatorParams {
    /// Robust estimators need `eps > 0`; clean runs use [`NOMINAL_EPSILON`].
    pub fn effective_epsilon(&self) -> f64 {
        if self.epsilon > 0.0 {
            self.epsilon
        } else {
            NOMINAL_EPSILON
        }
    }
}

/// Replaces the fields of `base` named in the JSON object `overrides`.
pub fn merge_config<T: Serialize + DeserializeOwned>(base: T, overrides: Option<&serde_json::Value>) -> Result<T> {
    let Some(overrides) = overrides else { return Ok(base) };
    let serde_json::Value::Object(fields) = overrides else {
        return param("config overrides must be a JSON object");
    };
    let mut value = serde_json::to_value(base)?;
    merge_value(&mut value, fields);
    serde_json::from_value(value).map_err(|e| Error::Parameter(format!("config: {e}")))
}

fn merge_value(target: &mut serde_json::Value, fields: &serde_json::Map<String, serde_json::Value>) {
    if let serde_json::Value::Object(obj) = target {
        for (key, value) in fields {
            match (obj.get_mut(key), value) {
                (Some(existing @ serde_json::Value::Object(_)), serde_json::Value::Object(inner)) => {
                    merge_value(existing, inner)
                }
                _ => {
                    obj.insert(key.clone(), value.clone());
                }
            }
        }
    }
}

/// Per-run diagnostics copied into the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_removed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inlier_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outlier_mass: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// Runs one estimator on a dataset.
pub fn estimate(
    task: Task,
    estimator: Estimator,
    ds: &Dataset,
    p: &EstimatorParams,
) -> Result<(Array1<f64>, Diagnostics)> {
    let x = ds.samples.view();
    let labels = ds.labels.as_deref();
    let eps = p.effective_epsilon();
    let overrides = p.overrides.as_ref();
    let mut diag = Diagnostics::default();
    let out = match (task, estimator) {
        (Task::Mean, Estimator::Paper) => {
            let config = merge_config(MeanConfig::new(eps, p.k), overrides)?;
            let est = robust_sparse_mean(x, labels, &config)?;
            diag.iterations = Some(est.trace.iterations.len());
            diag.mass_removed = Some(est.trace.total_mass_removed());
            diag.inlier_mass = est.trace.inlier_mass;
            diag.outlier_mass = est.trace.outlier_mass;
            diag.warnings = est.trace.warnings;
            est.mu_hat
        }
        (Task::Mean, Estimator::BaselineSingleDirection) => baselines::baseline_single_direction(x, eps, p.k)?,
        (Task::Mean, Estimator::Classical) => baselines::empirical_mean(x, p.k)?,
        (Task::Mean, Estimator::CoordinateMedian) => baselines::coordinate_median_sparse(x, p.k)?,
        (Task::Pca, Estimator::Paper) => {
            let config = merge_config(PcaConfig::new(eps, p.k, p.rho, p.seed), overrides)?;
            let est = robust_sparse_pca(x, labels, &config)?;
            diag.iterations = Some(est.trace.inner.iterations.len());
            diag.mass_removed = Some(est.trace.inner.total_mass_removed());
            diag.warnings = est.trace.warnings;
            est.v_hat
        }
        (Task::Pca, Estimator::BaselineSingleDirection) => warm_start(x, eps, p.k, p.rho)?,
        (Task::Pca, Estimator::Classical) => baselines::empirical_pca(x, p.k)?,
        (Task::Pca, Estimator::CoordinateMedian) => return param("coordinate_median is not defined for the pca task"),
        (Task::Regression, estimator) => {
            let y =
                ds.responses.as_ref().ok_or_else(|| Error::Parameter("regression dataset has no responses".into()))?;
            match estimator {
                Estimator::Paper => {
                    let config = merge_config(RegressionConfig::new(eps, p.k, p.seed), overrides)?;
                    let est = robust_sparse_regression(x, y.view(), labels, &config)?;
                    diag.iterations = Some(est.trace.inner.iterations.len());
                    diag.mass_removed = Some(est.trace.inner.total_mass_removed());
                    diag.warnings = est.trace.warnings;
                    est.beta_hat
                }
                Estimator::BaselineSingleDirection => {
                    let products = &ds.samples * &y.view().insert_axis(ndarray::Axis(1));
                    baselines::baseline_single_direction(products.view(), eps, p.k)?
                }
                Estimator::Classical => baselines::ols_top_k(x, y.view(), p.k)?,
                Estimator::CoordinateMedian => baselines::median_of_products(x, y.view(), p.k)?,
            }
        }
    };
    Ok((out, diag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema: u32,
    pub version: String,
    pub task: Task,
    pub estimator: Estimator,
    pub cell: GridCell,
    pub repeat: usize,
    /// Seed of the dataset (and of the estimator's own draws).
    pub seed: u64,
    pub adversary: AdversaryKind,
    #[serde(default)]
    pub adversary_params: AdversaryParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realized_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparse_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_ratio: Option<f64>,
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
    pub elapsed_secs: f64,
    pub estimate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl EstimateReport {
    /// The task's headline error: projector distance for PCA, `l2` otherwise.
    pub fn headline_error(&self) -> Option<f64> {
        match self.task {
            Task::Pca => self.projector_distance,
            _ => self.l2_error,
        }
    }
}

/// Error metrics; the unused half is `None` for each task.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Scores {
    pub l2: Option<f64>,
    pub sparse: Option<f64>,
    pub projector: Option<f64>,
    pub variance_ratio: Option<f64>,
}

/// Error metrics against the recorded truth.
pub fn score(truth: &Truth, estimate: &Array1<f64>, k: usize) -> Result<Scores> {
    let target = match truth {
        Truth::Mean { mu } => mu,
        Truth::Regression { beta, .. } => beta,
        Truth::Pca { rho, v } => {
            let v = Array1::from(v.clone());
            if v.len() != estimate.len() {
                return param("estimate and truth lengths differ");
            }
            let dist = projector_distance(estimate.view(), v.view());
            return Ok(Scores {
                projector: Some(dist),
                variance_ratio: Some(variance_ratio(estimate.view(), v.view(), *rho)),
                ..Scores::default()
            });
        }
    };
    let target = Array1::from(target.clone());
    if target.len() != estimate.len() {
        return param("estimate and truth lengths differ");
    }
    let diff = estimate - &target;
    let l2 = diff.dot(&diff).sqrt();
    let sparse = if diff.len() <= ORACLE_MAX_DIM {
        sparse_norm_2k_exhaustive(diff.view(), k.min(diff.len()))
    } else {
        sparse_norm_2k(diff.view(), k.min(diff.len()))?
    };
    Ok(Scores { l2: Some(l2), sparse: Some(sparse), ..Scores::default() })
}

/// Runs `estimator` on `ds` and assembles a self-describing report row.
#[allow(clippy::too_many_arguments)]
pub fn run_estimator(
    task: Task,
    estimator: Estimator,
    ds: &Dataset,
    cell: &GridCell,
    repeat: usize,
    seed: u64,
    params_overrides: Option<serde_json::Value>,
    adversary_params: AdversaryParams,
) -> EstimateReport {
    let params = EstimatorParams {
        epsilon: cell.epsilon,
        k: cell.k,
        rho: cell.rho.unwrap_or(0.5),
        seed,
        overrides: params_overrides.clone(),
    };
    let start = Instant::now();
    let result = estimate(task, estimator, ds, &params);
    let elapsed_secs = start.elapsed().as_secs_f64();
    let mut report = EstimateReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        task,
        estimator,
        cell: cell.clone(),
        repeat,
        seed,
        adversary: ds.meta.adversary,
        adversary_params,
        config: params_overrides,
        realized_epsilon: ds.outlier_fraction(),
        l2_error: None,
        sparse_error: None,
        projector_distance: None,
        variance_ratio: None,
        diagnostics: Diagnostics::default(),
        elapsed_secs,
        estimate: Vec::new(),
        failure: None,
    };
    match result {
        Ok((est, diag)) => {
            if let Some(truth) = &ds.truth {
                match score(truth, &est, cell.k) {
                    Ok(s) => {
                        report.l2_error = s.l2;
                        report.sparse_error = s.sparse;
                        report.projector_distance = s.projector;
                        report.variance_ratio = s.variance_ratio;
                    }
                    Err(e) => report.failure = Some(e.to_string()),
                }
            }
            report.diagnostics = diag;
            report.estimate = est.to_vec();
        }
        Err(e) => report.failure = Some(e.to_string()),
    }
    report
}

fn meminfo_available() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = text.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn cgroup_available() -> Option<u64> {
    let limit: u64 = std::fs::read_to_string("/sys/fs/cgroup/memory.max").ok()?.trim().parse().ok()?;
    let used: u64 =
        std::fs::read_to_string("/sys/fs/cgroup/memory.current").ok().and_then(|t| t.trim().parse().ok()).unwrap_or(0);
    Some(limit.saturating_sub(used))
}

/// Memory currently available to this process, when the platform reports it.
pub fn available_memory_bytes() -> Option<u64> {
    match (meminfo_available(), cgroup_available()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Peak working set of one `(cell, repeat)` job: the dataset plus the
/// estimators' working copies.
pub fn job_bytes(cell: &GridCell) -> u64 {
    (cell.n as u64) * (cell.d as u64 + 1) * 8 * 3
}

/// Jobs that fit in memory at once, at least one.
pub fn parallel_jobs(spec: &ExperimentSpec) -> usize {
    let per_job = spec.grid.iter().map(job_bytes).max().unwrap_or(1).max(1);
    let by_memory = available_memory_bytes().map_or(usize::MAX, |a| (a / per_job) as usize);
    by_memory.clamp(1, rayon::current_num_threads().max(1))
}

/// Every `(cell, repeat)` dataset is generated once and shared by all estimators.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<EstimateReport>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len()).flat_map(|c| (0..spec.repeats).map(move |r| (c, r))).collect();
    let width = parallel_jobs(spec);
    let mut rows: Vec<Vec<EstimateReport>> = Vec::with_capacity(jobs.len());
    for batch in jobs.chunks(width) {
        rows.extend(run_batch(spec, batch));
    }
    Ok(rows.into_iter().flatten().collect())
}

fn run_batch(spec: &ExperimentSpec, batch: &[(usize, usize)]) -> Vec<Vec<EstimateReport>> {
    batch
        .par_iter()
        .map(|&(c, r)| {
            let cell = &spec.grid[c];
            let seed = spec.dataset_seed(c, r);
            match spec.generate(cell, seed) {
                Ok(ds) => spec
                    .estimators
                    .iter()
                    .map(|&e| {
                        run_estimator(
                            spec.task,
                            e,
                            &ds,
                            cell,
                            r,
                            seed,
                            spec.config.clone(),
                            spec.adversary_params.clone(),
                        )
                    })
                    .collect(),
                Err(err) => spec.estimators.iter().map(|&e| failed_report(spec, e, cell, r, seed, &err)).collect(),
            }
        })
        .collect()
}

fn failed_report(
    spec: &ExperimentSpec,
    estimator: Estimator,
    cell: &GridCell,
    repeat: usize,
    seed: u64,
    err: &Error,
) -> EstimateReport {
    EstimateReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        task: spec.task,
        estimator,
        cell: cell.clone(),
        repeat,
        seed,
        adversary: spec.adversary,
        adversary_params: spec.adversary_params.clone(),
        config: spec.config.clone(),
        realized_epsilon: None,
        l2_error: None,
        sparse_error: None,
        projector_distance: None,
        variance_ratio: None,
        diagnostics: Diagnostics::default(),
        elapsed_secs: 0.0,
        estimate: Vec::new(),
        failure: Some(format!("dataset generation failed: {err}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: usize,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub epsilon: f64,
    pub estimator: Estimator,
    pub mean_error: f64,
    pub stderr: f64,
    pub count: usize,
    pub failures: usize,
}

/// Mean and standard error of the headline error per `(cell, estimator)`.
pub fn summarize(spec: &ExperimentSpec, reports: &[EstimateReport]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (c, cell) in spec.grid.iter().enumerate() {
        for &e in &spec.estimators {
            let mine: Vec<&EstimateReport> = reports.iter().filter(|r| r.estimator == e && r.cell == *cell).collect();
            let errors: Vec<f64> = mine.iter().filter_map(|r| r.headline_error()).collect();
            let count = errors.len();
            let mean = if count > 0 { errors.iter().sum::<f64>() / count as f64 } else { f64::NAN };
            let stderr = if count > 1 {
                let var = errors.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
                (var / count as f64).sqrt()
            } else {
                0.0
            };
            rows.push(SummaryRow {
                cell: c,
                d: cell.d,
                k: cell.k,
                n: cell.n,
                epsilon: cell.epsilon,
                estimator: e,
                mean_error: mean,
                stderr,
                count,
                failures: mine.iter().filter(|r| r.failure.is_some()).count(),
            });
        }
    }
    rows
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_jsonl<W: Write>(mut out: W, reports: &[EstimateReport]) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Files produced by [`write_sweep`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutputs {
    pub reports: PathBuf,
    pub summary: PathBuf,
    pub plot_data: Vec<PathBuf>,
    pub plot_script: PathBuf,
}

/// Writes `reports.jsonl`, the tidy `summary.csv`, one `<estimator>.dat`
/// (epsilon, mean error) per estimator and a gnuplot stub into `dir`.
pub fn write_sweep(dir: &Path, spec: &ExperimentSpec, reports: &[EstimateReport]) -> Result<SweepOutputs> {
    std::fs::create_dir_all(dir)?;
    let reports_path = dir.join("reports.jsonl");
    let mut out = BufWriter::new(File::create(&reports_path)?);
    write_jsonl(&mut out, reports)?;
    out.flush()?;

    let summary = summarize(spec, reports);
    let summary_path = dir.join("summary.csv");
    let mut out = BufWriter::new(File::create(&summary_path)?);
    writeln!(out, "cell,task,estimator,d,k,n,epsilon,mean_error,stderr,count,failures")?;
    for row in &summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.cell,
            spec.task.tag(),
            row.estimator.name(),
            row.d,
            row.k,
            row.n,
            row.epsilon,
            row.mean_error,
            row.stderr,
            row.count,
            row.failures
        )?;
    }
    out.flush()?;

    let mut plot_data = Vec::new();
    for &e in &spec.estimators {
        let path = dir.join(format!("{}.dat", e.name()));
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# epsilon mean_error")?;
        for row in summary.iter().filter(|r| r.estimator == e && r.mean_error.is_finite()) {
            writeln!(out, "{} {}", row.epsilon, row.mean_error)?;
        }
        out.flush()?;
        plot_data.push(path);
    }
    let plot_script = dir.join("plot.gp");
    let mut script =
        String::from("set logscale xy\nset xlabel 'epsilon'\nset ylabel 'error'\nset key left top\nplot \\\n");
    let lines: Vec<String> = spec
        .estimators
        .iter()
        .map(|e| format!("  '{0}.dat' using 1:2 with linespoints title '{0}'", e.name()))
        .collect();
    script.push_str(&lines.join(", \\\n"));
    script.push('\n');
    std::fs::write(&plot_script, script)?;
    Ok(SweepOutputs { reports: reports_path, summary: summary_path, plot_data, plot_script })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_names_parse() {
        assert_eq!(Estimator::parse("paper").unwrap(), Estimator::Paper);
        assert_eq!(Estimator::parse("empirical-mean").unwrap(), Estimator::Classical);
        assert_eq!(Estimator::parse("ols").unwrap(), Estimator::Classical);
        assert!(Estimator::parse("magic").is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.02, 0.05, 0.1].iter().map(|&e| (e, 3.0 * e)).collect();
        assert!((log_log_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert!(log_log_slope(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn config_overrides_merge() {
        let base = MeanConfig::new(0.1, 3);
        let merged = merge_config(base.clone(), Some(&serde_json::json!({"c_stop": 4.0}))).unwrap();
        assert_eq!(merged.c_stop, 4.0);
        assert_eq!(merged.k, 3);
        assert!(merge_config(base, Some(&serde_json::json!({"c_stop": "x"}))).is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let spec = ExperimentSpec {
            task: Task::Mean,
            grid: vec![],
            adversary: AdversaryKind::None,
            adversary_params: AdversaryParams::default(),
            estimators: vec![Estimator::Paper],
            repeats: 1,
            seed: 0,
            truth_norm: 1.0,
            config: None,
            output: None,
        };
        assert!(run_experiment(&spec).is_err());
    }
}
