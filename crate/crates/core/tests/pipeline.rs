use ndarray::Array1;

use robust_sparse::bench::{
    estimate, log_log_slope, run_estimator, run_experiment, summarize, write_sweep, Estimator, EstimatorParams,
    ExperimentSpec, GridCell,
};
use robust_sparse::contamination::{
    gen_mean_task, gen_pca_task, gen_regression_task, AdversaryKind, AdversaryParams, ContaminationSpec,
    SparseVectorSpec, Task, Truth,
};
use robust_sparse::mean::{robust_sparse_mean, MeanConfig};
use robust_sparse::pca::{conditional_slice, draw_alpha};
use robust_sparse::rng::{CounterRng, StreamTag};

fn spec(task: Task, grid: Vec<GridCell>, adversary: AdversaryKind, estimators: Vec<Estimator>) -> ExperimentSpec {
    ExperimentSpec {
        task,
        grid,
        adversary,
        adversary_params: AdversaryParams::default(),
        estimators,
        repeats: 1,
        seed: 17,
        truth_norm: 1.0,
        config: None,
        output: None,
    }
}

#[test]
fn slice_outlier_fraction_stays_below_four_eps() {
    let eps = 0.05;
    let ds = gen_pca_task(
        100_000,
        20,
        3,
        1.0,
        &SparseVectorSpec::Random { norm: 1.0 },
        &ContaminationSpec::new(eps, AdversaryKind::DenseCluster, 8),
    )
    .unwrap();
    let Some(Truth::Pca { v, .. }) = &ds.truth else { panic!("pca truth") };
    let v = Array1::from(v.clone());
    let ell = 1.0 / (1.0 / eps).ln();
    let draws = 50;
    let mut within = 0;
    for t in 0..draws {
        let alpha = draw_alpha(&mut CounterRng::new(8, StreamTag::Alpha, t), 1.0, 0.1);
        let slice = conditional_slice(ds.samples.view(), ds.labels.as_deref(), v.view(), alpha, ell).unwrap();
        if slice.outlier_fraction.unwrap() <= 4.0 * eps {
            within += 1;
        }
    }
    assert!(within as f64 >= 0.9 * draws as f64, "{within}/{draws}");
}

#[test]
fn every_filter_step_respects_the_mass_ratio() {
    let d = 50;
    let mut checked = 0;
    for (seed, data_eps, shift) in
        [(1u64, 0.01, 30.0), (2, 0.01, 30.0), (3, 0.005, 40.0), (4, 0.005, 40.0), (5, 0.01, 30.0)]
    {
        let mut u = vec![0.0; d];
        for (j, x) in u.iter_mut().enumerate().skip(7).take(5) {
            *x = shift / 5f64.sqrt() * if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let mut spec = ContaminationSpec::new(data_eps, AdversaryKind::CustomPoints, seed);
        spec.params.points = vec![u, neg];
        let ds = gen_mean_task(20_000, d, 5, &SparseVectorSpec::Random { norm: 1.0 }, &spec).unwrap();
        let est = robust_sparse_mean(ds.samples.view(), ds.labels.as_deref(), &MeanConfig::new(0.1, 5)).unwrap();
        for record in &est.trace.iterations {
            if record.precondition == Some(true) {
                assert_eq!(record.mass_ratio_holds, Some(true), "seed {seed}: {record:?}");
                checked += 1;
            }
        }
        assert!(est.trace.outlier_mass.unwrap() < 0.05);
    }
    assert!(checked >= 4, "only {checked} filter steps were checked");
}

#[test]
fn reports_rerun_from_their_embedded_spec() {
    let grid = vec![GridCell { d: 30, k: 3, n: 4_000, epsilon: 0.1, rho: None, sigma: None }];
    let s = spec(Task::Mean, grid, AdversaryKind::SparseShift, vec![Estimator::Paper, Estimator::CoordinateMedian]);
    let first = run_experiment(&s).unwrap();
    let second = run_experiment(&s).unwrap();
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.l2_error, b.l2_error);
    }
    let row = &first[0];
    let json = serde_json::to_string(row).unwrap();
    assert!(json.contains("\"schema\":1"));
    let rebuilt = spec(Task::Mean, vec![row.cell.clone()], row.adversary, vec![row.estimator]);
    let ds = rebuilt.generate(&row.cell, row.seed).unwrap();
    let again = run_estimator(
        row.task,
        row.estimator,
        &ds,
        &row.cell,
        0,
        row.seed,
        row.config.clone(),
        row.adversary_params.clone(),
    );
    assert_eq!(again.estimate, row.estimate);
    assert_eq!(again.l2_error, row.l2_error);
}

#[test]
fn baselines_accept_whatever_the_paper_estimator_accepts() {
    let adversaries =
        [AdversaryKind::None, AdversaryKind::SparseShift, AdversaryKind::DenseCluster, AdversaryKind::EvasiveTail];
    for (i, adv) in adversaries.into_iter().enumerate() {
        let eps = if adv == AdversaryKind::None { 0.0 } else { 0.1 };
        let cs = ContaminationSpec::new(eps, adv, i as u64);
        let mean = gen_mean_task(3_000, 20, 3, &SparseVectorSpec::Random { norm: 1.0 }, &cs).unwrap();
        let pca = gen_pca_task(20_000, 20, 3, 1.0, &SparseVectorSpec::Random { norm: 1.0 }, &cs).unwrap();
        let reg = gen_regression_task(20_000, 20, 3, &SparseVectorSpec::Random { norm: 1.0 }, 1.0, &cs).unwrap();
        let params = EstimatorParams { epsilon: eps, k: 3, rho: 1.0, seed: 1, overrides: None };
        for (task, ds, estimators) in [
            (
                Task::Mean,
                &mean,
                &[Estimator::BaselineSingleDirection, Estimator::Classical, Estimator::CoordinateMedian][..],
            ),
            (Task::Pca, &pca, &[Estimator::BaselineSingleDirection, Estimator::Classical][..]),
            (
                Task::Regression,
                &reg,
                &[Estimator::BaselineSingleDirection, Estimator::Classical, Estimator::CoordinateMedian][..],
            ),
        ] {
            if estimate(task, Estimator::Paper, ds, &params).is_err() {
                continue;
            }
            for &e in estimators {
                let (out, _) =
                    estimate(task, e, ds, &params).unwrap_or_else(|err| panic!("{task:?} {adv:?} {e:?}: {err}"));
                assert!(out.iter().all(|x| x.is_finite()));
            }
        }
    }
}

#[test]
fn sweep_writes_summary_and_plot_data() {
    let grid = [0.05, 0.1, 0.2]
        .iter()
        .map(|&e| GridCell { d: 20, k: 3, n: 5_000, epsilon: e, rho: None, sigma: None })
        .collect();
    let mut s = spec(Task::Mean, grid, AdversaryKind::EvasiveTail, vec![Estimator::Paper, Estimator::Classical]);
    s.repeats = 2;
    let reports = run_experiment(&s).unwrap();
    assert_eq!(reports.len(), 12);
    assert!(reports.iter().all(|r| r.failure.is_none()));
    let dir = tempfile::tempdir().unwrap();
    let out = write_sweep(dir.path(), &s, &reports).unwrap();
    let csv = std::fs::read_to_string(&out.summary).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.starts_with("cell,task,estimator"));
    for path in &out.plot_data {
        let lines: Vec<String> = std::fs::read_to_string(path).unwrap().lines().map(String::from).collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(' ').count() == 2));
    }
    assert!(std::fs::read_to_string(&out.plot_script).unwrap().contains("paper.dat"));
    assert_eq!(std::fs::read_to_string(&out.reports).unwrap().lines().count(), 12);
    let summary = summarize(&s, &reports);
    let paper: Vec<(f64, f64)> =
        summary.iter().filter(|r| r.estimator == Estimator::Paper).map(|r| (r.epsilon, r.mean_error)).collect();
    assert!(log_log_slope(&paper).unwrap().is_finite());
}

#[test]
fn failures_are_recorded_per_cell() {
    let grid = vec![
        GridCell { d: 20, k: 3, n: 2_000, epsilon: 0.1, rho: Some(1.0), sigma: None },
        GridCell { d: 20, k: 30, n: 2_000, epsilon: 0.1, rho: Some(1.0), sigma: None },
    ];
    let s = spec(Task::Pca, grid, AdversaryKind::DenseCluster, vec![Estimator::Classical, Estimator::CoordinateMedian]);
    let reports = run_experiment(&s).unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports[0].failure.is_none());
    assert!(reports[1].failure.as_deref().unwrap().contains("coordinate_median"));
    assert!(reports[2].failure.is_some() && reports[3].failure.is_some());
}

#[test]
fn datasets_round_trip_bit_exactly() {
    use robust_sparse::io::{read_dataset, write_dataset};
    let dir = tempfile::tempdir().unwrap();
    let cs = ContaminationSpec::new(0.1, AdversaryKind::EvasiveTail, 3);
    let make = || gen_regression_task(500, 12, 3, &SparseVectorSpec::Random { norm: 2.0 }, 1.0, &cs).unwrap();
    let ds = make();
    let a = write_dataset(&ds, &dir.path().join("a.csv")).unwrap();
    let b = write_dataset(&make(), &dir.path().join("b.csv")).unwrap();
    assert_eq!(std::fs::read(&a.csv).unwrap(), std::fs::read(&b.csv).unwrap());
    let back = read_dataset(&a.csv).unwrap();
    assert_eq!(back.samples, ds.samples);
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.meta.task, Task::Regression);
    assert_eq!(back.truth, ds.truth);
}
