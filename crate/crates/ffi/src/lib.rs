//! C interface to `robust_sparse`.
//!
//! Every function returns an [`RsStatus`]; on failure the message is kept per
//! thread and read back with [`rs_last_error_message`]. Handles are opaque and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ndarray::{Array1, Array2};
use robust_sparse::bench::{estimate, score, Estimator, EstimatorParams};
use robust_sparse::contamination::{
    gen_mean_task, gen_pca_task, gen_regression_task, AdversaryKind, ContaminationSpec, Dataset, DatasetMeta,
    SparseVectorSpec, Task,
};
use robust_sparse::io::{read_dataset, write_dataset};
use robust_sparse::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateWeights = 3,
    EmptyInput = 4,
    EmptySlice = 5,
    Numerical = 6,
    Io = 7,
    Format = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsTask {
    Mean = 0,
    Pca = 1,
    Regression = 2,
}

impl From<RsTask> for Task {
    fn from(t: RsTask) -> Self {
        match t {
            RsTask::Mean => Task::Mean,
            RsTask::Pca => Task::Pca,
            RsTask::Regression => Task::Regression,
        }
    }
}

/// Opaque dataset handle.
pub struct RsDataset {
    inner: Dataset,
}

/// Opaque estimate handle.
pub struct RsEstimate {
    values: Vec<f64>,
    report: CString,
}

/// Parameters of [`rs_dataset_generate`].
#[repr(C)]
pub struct RsGenerateParams {
    pub task: RsTask,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Spike strength (pca).
    pub rho: f64,
    /// Noise level (regression).
    pub sigma: f64,
    /// Norm of the planted mean or regressor.
    pub norm: f64,
    pub seed: u64,
    /// Adversary name such as `"evasive_tail"`; null means none.
    pub adversary: *const c_char,
}

/// Parameters of [`rs_estimate`].
#[repr(C)]
pub struct RsEstimateParams {
    pub task: RsTask,
    /// `"paper"`, `"baseline_single_direction"`, `"classical"` or `"coordinate_median"`; null means paper.
    pub estimator: *const c_char,
    pub k: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub seed: u64,
    /// JSON object of configuration overrides, or null.
    pub config_json: *const c_char,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RsStatus {
    match e {
        Error::Parameter(_) | Error::OracleTooLarge { .. } => RsStatus::InvalidArgument,
        Error::DegenerateWeights => RsStatus::DegenerateWeights,
        Error::EmptyInput(_) => RsStatus::EmptyInput,
        Error::EmptySlice { .. } => RsStatus::EmptySlice,
        Error::VarianceStep(_) | Error::DegenerateCovariance(_) => RsStatus::Numerical,
        Error::Io(_) => RsStatus::Io,
        Error::Format(_) | Error::Json(_) => RsStatus::Format,
    }
}

fn fail(status: RsStatus, msg: &str) -> RsStatus {
    set_error(msg);
    status
}

fn guard(body: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            RsStatus::Ok
        }
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(RsStatus::Panic, "internal panic"),
    }
}

fn lift(e: Error) -> (RsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (RsStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| (RsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Wraps a row-major `n x d` sample matrix, copied. `responses` (length `n`)
/// and `labels` (length `n`, nonzero = outlier) may be null.
///
/// # Safety
/// `data` must point to `n * d` doubles, `responses` to `n` doubles and
/// `labels` to `n` bytes when non-null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_from_rows(
    data: *const f64,
    n: usize,
    d: usize,
    task: RsTask,
    responses: *const f64,
    labels: *const u8,
    out: *mut *mut RsDataset,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(d).ok_or((RsStatus::InvalidArgument, "n * d overflows".to_string()))?;
        if n == 0 || d == 0 {
            return Err((RsStatus::EmptyInput, "n and d must be positive".to_string()));
        }
        let task = Task::from(task);
        if task == Task::Regression && responses.is_null() {
            return Err((RsStatus::InvalidArgument, "regression data need responses".to_string()));
        }
        let samples = Array2::from_shape_vec((n, d), std::slice::from_raw_parts(data, len).to_vec())
            .map_err(|e| (RsStatus::InvalidArgument, e.to_string()))?;
        let responses = (!responses.is_null()).then(|| Array1::from(std::slice::from_raw_parts(responses, n).to_vec()));
        let labels: Option<Vec<bool>> =
            (!labels.is_null()).then(|| std::slice::from_raw_parts(labels, n).iter().map(|&b| b != 0).collect());
        let outliers = labels.as_ref().map_or(0, |l| l.iter().filter(|&&b| b).count());
        let meta = DatasetMeta { task, n, d, k: 0, seed: 0, epsilon: 0.0, adversary: AdversaryKind::None, outliers };
        let inner = Dataset { samples, responses, labels, truth: None, meta };
        *out = Box::into_raw(Box::new(RsDataset { inner }));
        Ok(())
    })
}

/// Draws a synthetic contaminated dataset.
///
/// # Safety
/// `params` must point to a valid struct and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_generate(params: *const RsGenerateParams, out: *mut *mut RsDataset) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let adversary = match opt_str(p.adversary, "adversary")? {
            Some(name) => AdversaryKind::parse(name).map_err(lift)?,
            None => AdversaryKind::None,
        };
        let spec = ContaminationSpec::new(p.epsilon, adversary, p.seed);
        let truth = SparseVectorSpec::Random { norm: p.norm };
        let inner = match p.task {
            RsTask::Mean => gen_mean_task(p.n, p.d, p.k, &truth, &spec),
            RsTask::Pca => gen_pca_task(p.n, p.d, p.k, p.rho, &SparseVectorSpec::Random { norm: 1.0 }, &spec),
            RsTask::Regression => gen_regression_task(p.n, p.d, p.k, &truth, p.sigma, &spec),
        }
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(RsDataset { inner }));
        Ok(())
    })
}

/// Reads a dataset CSV with its optional `.labels` and `.truth.json` siblings.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_load(path: *const c_char, out: *mut *mut RsDataset) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = opt_str(path, "path")?.ok_or_else(|| null("path"))?;
        let inner = read_dataset(Path::new(path)).map_err(lift)?;
        *out = Box::into_raw(Box::new(RsDataset { inner }));
        Ok(())
    })
}

/// Writes the dataset as CSV plus siblings.
///
/// # Safety
/// `ds` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_save(ds: *const RsDataset, path: *const c_char) -> RsStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let path = opt_str(path, "path")?.ok_or_else(|| null("path"))?;
        write_dataset(&ds.inner, Path::new(path)).map_err(lift)?;
        Ok(())
    })
}

/// Number of samples and dimension.
///
/// # Safety
/// `ds` must be a live handle; `n` and `d` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_shape(ds: *const RsDataset, n: *mut usize, d: *mut usize) -> RsStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if n.is_null() || d.is_null() {
            return Err(null("n or d"));
        }
        *n = ds.inner.n();
        *d = ds.inner.d();
        Ok(())
    })
}

/// Copies the samples row-major into `out`, which holds `capacity` doubles.
///
/// # Safety
/// `ds` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_copy_samples(ds: *const RsDataset, out: *mut f64, capacity: usize) -> RsStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let len = ds.inner.samples.len();
        if capacity < len {
            return Err((RsStatus::InvalidArgument, format!("buffer holds {capacity} values, need {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (slot, x) in dst.iter_mut().zip(ds.inner.samples.iter()) {
            *slot = *x;
        }
        Ok(())
    })
}

/// Releases a dataset; null is ignored.
///
/// # Safety
/// `ds` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_dataset_free(ds: *mut RsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Runs an estimator. When the dataset carries ground truth the JSON report
/// includes error metrics.
///
/// # Safety
/// `ds` must be a live handle, `params` a valid struct, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate(
    ds: *const RsDataset,
    params: *const RsEstimateParams,
    out: *mut *mut RsEstimate,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let task = Task::from(p.task);
        if ds.inner.meta.task != task {
            return Err((
                RsStatus::InvalidArgument,
                format!("dataset holds a {} task, not {}", ds.inner.meta.task.tag(), task.tag()),
            ));
        }
        let estimator = match opt_str(p.estimator, "estimator")? {
            Some(name) => Estimator::parse(name).map_err(lift)?,
            None => Estimator::Paper,
        };
        let overrides = match opt_str(p.config_json, "config_json")? {
            Some(text) => {
                Some(serde_json::from_str(text).map_err(|e| (RsStatus::InvalidArgument, format!("config_json: {e}")))?)
            }
            None => None,
        };
        let params = EstimatorParams { epsilon: p.epsilon, k: p.k, rho: p.rho, seed: p.seed, overrides };
        let (values, diagnostics) = estimate(task, estimator, &ds.inner, &params).map_err(lift)?;
        let mut report = serde_json::json!({
            "schema": 1,
            "task": task.tag(),
            "estimator": estimator.name(),
            "k": p.k,
            "epsilon": p.epsilon,
            "seed": p.seed,
            "diagnostics": diagnostics,
        });
        if let Some(truth) = &ds.inner.truth {
            let s = score(truth, &values, p.k).map_err(lift)?;
            report["l2_error"] = serde_json::json!(s.l2);
            report["sparse_error"] = serde_json::json!(s.sparse);
            report["projector_distance"] = serde_json::json!(s.projector);
            report["variance_ratio"] = serde_json::json!(s.variance_ratio);
        }
        let report = CString::new(report.to_string()).map_err(|e| (RsStatus::Format, e.to_string()))?;
        *out = Box::into_raw(Box::new(RsEstimate { values: values.to_vec(), report }));
        Ok(())
    })
}

/// Length of the estimated vector.
///
/// # Safety
/// `est` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_len(est: *const RsEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.values.len())
}

/// Copies the estimate into `out`, which holds `capacity` doubles.
///
/// # Safety
/// `est` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_copy(est: *const RsEstimate, out: *mut f64, capacity: usize) -> RsStatus {
    guard(|| {
        let est = est.as_ref().ok_or_else(|| null("estimate"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < est.values.len() {
            return Err((
                RsStatus::InvalidArgument,
                format!("buffer holds {capacity} values, need {}", est.values.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, est.values.len()).copy_from_slice(&est.values);
        Ok(())
    })
}

/// JSON report owned by the handle; valid until [`rs_estimate_free`].
///
/// # Safety
/// `est` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_report_json(est: *const RsEstimate) -> *const c_char {
    est.as_ref().map_or(ptr::null(), |e| e.report.as_ptr())
}

/// Releases an estimate; null is ignored.
///
/// # Safety
/// `est` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_free(est: *mut RsEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}
