use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use robust_sparse_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rs_last_error_message()) }.to_string_lossy().into_owned()
}

fn generate(task: RsTask, n: usize, d: usize, eps: f64, adversary: Option<&CStr>) -> *mut RsDataset {
    let params = RsGenerateParams {
        task,
        n,
        d,
        k: 3,
        epsilon: eps,
        rho: 1.0,
        sigma: 1.0,
        norm: 1.0,
        seed: 9,
        adversary: adversary.map_or(ptr::null(), |a| a.as_ptr()),
    };
    let mut ds = ptr::null_mut();
    let status = unsafe { rs_dataset_generate(&params, &mut ds) };
    assert_eq!(status, RsStatus::Ok, "{}", last_error());
    assert!(!ds.is_null());
    ds
}

fn report(est: *const RsEstimate) -> serde_json::Value {
    let text = unsafe { CStr::from_ptr(rs_estimate_report_json(est)) }.to_str().unwrap().to_owned();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn mean_estimate_through_handles() {
    let adversary = CString::new("sparse_shift").unwrap();
    let ds = generate(RsTask::Mean, 20_000, 30, 0.1, Some(&adversary));
    let estimator = CString::new("paper").unwrap();
    let params = RsEstimateParams {
        task: RsTask::Mean,
        estimator: estimator.as_ptr(),
        k: 3,
        epsilon: 0.1,
        rho: 0.0,
        seed: 0,
        config_json: ptr::null(),
    };
    let mut est = ptr::null_mut();
    let status = unsafe { rs_estimate(ds, &params, &mut est) };
    assert_eq!(status, RsStatus::Ok, "{}", last_error());
    assert_eq!(last_error(), "");
    let len = unsafe { rs_estimate_len(est) };
    assert_eq!(len, 30);
    let mut values = vec![0.0; len];
    assert_eq!(unsafe { rs_estimate_copy(est, values.as_mut_ptr(), len) }, RsStatus::Ok);
    assert!(values.iter().filter(|v| **v != 0.0).count() <= 3);
    let json = report(est);
    assert_eq!(json["schema"], 1);
    assert!(json["l2_error"].as_f64().unwrap() < 0.5, "{json}");
    assert_eq!(unsafe { rs_estimate_copy(est, values.as_mut_ptr(), 2) }, RsStatus::InvalidArgument);
    unsafe {
        rs_estimate_free(est);
        rs_dataset_free(ds);
    }
}

#[test]
fn errors_set_status_and_message() {
    let ds = generate(RsTask::Pca, 2_000, 10, 0.0, None);
    let bad = CString::new("magic").unwrap();
    let mut params = RsEstimateParams {
        task: RsTask::Pca,
        estimator: bad.as_ptr(),
        k: 3,
        epsilon: 0.05,
        rho: 1.0,
        seed: 0,
        config_json: ptr::null(),
    };
    let mut est = ptr::null_mut();
    assert_eq!(unsafe { rs_estimate(ds, &params, &mut est) }, RsStatus::InvalidArgument);
    assert!(est.is_null());
    assert!(last_error().contains("unknown estimator"), "{}", last_error());

    let median = CString::new("coordinate_median").unwrap();
    params.estimator = median.as_ptr();
    assert_eq!(unsafe { rs_estimate(ds, &params, &mut est) }, RsStatus::InvalidArgument);

    params.estimator = ptr::null();
    params.task = RsTask::Mean;
    assert_eq!(unsafe { rs_estimate(ds, &params, &mut est) }, RsStatus::InvalidArgument);
    assert!(last_error().contains("pca"));

    assert_eq!(unsafe { rs_estimate(ptr::null(), &params, &mut est) }, RsStatus::NullPointer);
    assert_eq!(unsafe { rs_estimate(ds, ptr::null(), &mut est) }, RsStatus::NullPointer);
    assert_eq!(unsafe { rs_estimate(ds, &params, ptr::null_mut()) }, RsStatus::NullPointer);

    let bogus = CString::new("bogus").unwrap();
    let gen = RsGenerateParams {
        task: RsTask::Mean,
        n: 10,
        d: 3,
        k: 1,
        epsilon: 0.1,
        rho: 1.0,
        sigma: 1.0,
        norm: 1.0,
        seed: 0,
        adversary: bogus.as_ptr(),
    };
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rs_dataset_generate(&gen, &mut out) }, RsStatus::InvalidArgument);
    assert!(out.is_null());
    unsafe {
        rs_dataset_free(ds);
        rs_dataset_free(ptr::null_mut());
        rs_estimate_free(ptr::null_mut());
    }
}

#[test]
fn rows_round_trip_through_files() {
    let (n, d) = (50, 4);
    let data: Vec<f64> = (0..n * d).map(|i| (i as f64).sin() * 3.0).collect();
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 7 == 0)).collect();
    let mut ds = ptr::null_mut();
    let status =
        unsafe { rs_dataset_from_rows(data.as_ptr(), n, d, RsTask::Mean, ptr::null(), labels.as_ptr(), &mut ds) };
    assert_eq!(status, RsStatus::Ok);
    let (mut rows, mut cols) = (0, 0);
    assert_eq!(unsafe { rs_dataset_shape(ds, &mut rows, &mut cols) }, RsStatus::Ok);
    assert_eq!((rows, cols), (n, d));

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("rows.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rs_dataset_save(ds, path.as_ptr()) }, RsStatus::Ok, "{}", last_error());
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { rs_dataset_load(path.as_ptr(), &mut loaded) }, RsStatus::Ok, "{}", last_error());
    let mut back = vec![0.0; n * d];
    assert_eq!(unsafe { rs_dataset_copy_samples(loaded, back.as_mut_ptr(), back.len()) }, RsStatus::Ok);
    assert_eq!(back, data);

    let missing = CString::new(dir.path().join("missing.csv").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { rs_dataset_load(missing.as_ptr(), &mut none) }, RsStatus::Io);

    let mut reg = ptr::null_mut();
    let status =
        unsafe { rs_dataset_from_rows(data.as_ptr(), n, d, RsTask::Regression, ptr::null(), ptr::null(), &mut reg) };
    assert_eq!(status, RsStatus::InvalidArgument);
    unsafe {
        rs_dataset_free(ds);
        rs_dataset_free(loaded);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(rs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/robust_sparse.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["rs_dataset_generate", "rs_estimate", "rs_last_error_message", "RS_STATUS_EMPTY_SLICE", "RsDataset"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"robust_sparse.h\"\n\
         int main(void) {\n\
           RsDataset *ds = 0;\n\
           RsGenerateParams p = {RS_TASK_MEAN, 100, 5, 2, 0.1, 0.5, 1.0, 1.0, 7, \"evasive_tail\"};\n\
           RsStatus s = rs_dataset_generate(&p, &ds);\n\
           rs_dataset_free(ds);\n\
           return s == RS_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).status() {
        Ok(status) => assert!(status.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; syntax check skipped"),
    }
}
