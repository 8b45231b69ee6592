//! Empirical checks of the goodness conditions on a set of clean inliers.
//!
//! The conditions quantify over all sparse directions and all sparse
//! quadratic forms, so they are probed with a fixed family of random
//! directions `v` and matrices `A`. The probes are drawn once, then the
//! sample statistics are accumulated in a single streaming pass.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::linalg::{op_norm, sparse_norm_2k};
use crate::rng::{CounterRng, StreamTag};

/// A quadratic probe `p(x) = (x_S - mu_S)^T B (x_S - mu_S) - tr(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProbe {
    pub support: Vec<usize>,
    pub block: Array2<f64>,
    pub trace: f64,
}

impl QuadraticProbe {
    pub fn new(support: Vec<usize>, block: Array2<f64>) -> Self {
        let trace = block.diag().sum();
        Self { support, block, trace }
    }

    pub fn eval(&self, x: ArrayView1<f64>, mu: ArrayView1<f64>) -> f64 {
        let z: Vec<f64> = self.support.iter().map(|&i| x[i] - mu[i]).collect();
        let mut acc = 0.0;
        for (a, za) in z.iter().enumerate() {
            let row = self.block.row(a);
            acc += za * row.iter().zip(&z).map(|(b, zb)| b * zb).sum::<f64>();
        }
        acc - self.trace
    }

    pub fn to_dense(&self, d: usize) -> Array2<f64> {
        let mut out = Array2::zeros((d, d));
        for (a, &i) in self.support.iter().enumerate() {
            for (b, &j) in self.support.iter().enumerate() {
                out[[i, j]] = self.block[[a, b]];
            }
        }
        out
    }
}

/// A `k`-sparse unit vector stored by support.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl LinearProbe {
    pub fn eval(&self, x: ArrayView1<f64>, mu: ArrayView1<f64>) -> f64 {
        self.support.iter().zip(&self.values).map(|(&i, v)| v * (x[i] - mu[i])).sum()
    }
}

fn random_unit(rng: &mut CounterRng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_linear_probe(rng: &mut CounterRng, d: usize, k: usize) -> LinearProbe {
    let support = rng.subset(d, k);
    let values = random_unit(rng, support.len());
    LinearProbe { support, values }
}

/// Probe matrices cycle through three shapes: `v v^T`; a symmetric Gaussian
/// block scaled to unit operator norm; a signed sum of orthonormal rank-ones.
/// Every shape has `||A||_op <= 1` and `||A||_F <= sqrt(ln(1/eps))`.
pub fn random_quadratic_probe(rng: &mut CounterRng, d: usize, k: usize, epsilon: f64, shape: usize) -> QuadraticProbe {
    let support = rng.subset(d, k);
    let m = support.len();
    let fro_cap = (1.0 / epsilon).ln().sqrt();
    let mut block = Array2::zeros((m, m));
    match shape % 3 {
        0 => {
            let v = random_unit(rng, m);
            for a in 0..m {
                for b in 0..m {
                    block[[a, b]] = v[a] * v[b];
                }
            }
        }
        1 => {
            for a in 0..m {
                for b in a..m {
                    let g = rng.normal();
                    block[[a, b]] = g;
                    block[[b, a]] = g;
                }
            }
            let op = op_norm(block.view());
            if op > 0.0 {
                block /= op;
            }
        }
        _ => {
            let rank = (fro_cap * fro_cap).floor().clamp(1.0, m as f64) as usize;
            let mut basis: Vec<Vec<f64>> = Vec::new();
            while basis.len() < rank {
                let mut u: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
                for b in &basis {
                    let c: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                    u.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
                let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    basis.push(u.into_iter().map(|x| x / norm).collect());
                }
            }
            for u in &basis {
                let sign = if rng.uniform() < 0.25 { -1.0 } else { 1.0 };
                for a in 0..m {
                    for b in 0..m {
                        block[[a, b]] += sign * u[a] * u[b];
                    }
                }
            }
        }
    }
    let fro = block.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro > fro_cap {
        block *= fro_cap / fro;
    }
    QuadraticProbe::new(support, block)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    pub passed: bool,
    /// Worst measured value over the probes.
    pub worst: f64,
    pub bound: f64,
    /// Reported but not part of the overall verdict.
    pub best_effort: bool,
}

impl ConditionResult {
    fn new(name: &str, worst: f64, bound: f64, best_effort: bool) -> Self {
        Self { name: name.to_string(), passed: worst <= bound, worst, bound, best_effort }
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub trials: usize,
    pub conditions: Vec<ConditionResult>,
}

impl GoodnessReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().filter(|c| !c.best_effort).all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub const COND_LINEAR_TAIL: &str = "cond3_linear_tail";
pub const COND_POLY_EXCESS: &str = "cond2a_poly_excess";
pub const COND_POLY_TAIL: &str = "cond2b_poly_tail";
pub const COND_POLY_EXTRA: &str = "cond2c_poly_given_linear";
pub const COND_MEAN: &str = "cond1a_mean";
pub const COND_COVARIANCE: &str = "cond1b_covariance";

#[derive(Debug, Clone)]
struct Partial {
    n: usize,
    mean_sum: Array1<f64>,
    lin_tail: Vec<usize>,
    lin_second: Vec<f64>,
    quad_excess: Vec<f64>,
    quad_tail: Vec<usize>,
    quad_extra: Vec<f64>,
}

impl Partial {
    fn new(d: usize, trials: usize) -> Self {
        Self {
            n: 0,
            mean_sum: Array1::zeros(d),
            lin_tail: vec![0; trials],
            lin_second: vec![0.0; trials],
            quad_excess: vec![0.0; trials],
            quad_tail: vec![0; trials],
            quad_extra: vec![0.0; trials],
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.n += other.n;
        self.mean_sum += &other.mean_sum;
        for t in 0..self.lin_tail.len() {
            self.lin_tail[t] += other.lin_tail[t];
            self.lin_second[t] += other.lin_second[t];
            self.quad_excess[t] += other.quad_excess[t];
            self.quad_tail[t] += other.quad_tail[t];
            self.quad_extra[t] += other.quad_extra[t];
        }
        self
    }
}

/// Streaming version of [`check_goodness`]: push inliers in batches, then `finish`.
#[derive(Debug, Clone)]
pub struct GoodnessAccumulator {
    mu: Array1<f64>,
    epsilon: f64,
    k: usize,
    linear: Vec<LinearProbe>,
    quadratic: Vec<QuadraticProbe>,
    offsets: Vec<f64>,
    stats: Partial,
}

impl GoodnessAccumulator {
    pub fn new(mu: Array1<f64>, epsilon: f64, k: usize, trials: usize, seed: u64) -> Result<Self> {
        let d = mu.len();
        if trials < 1 {
            return param("trials must be at least 1");
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return param(format!("epsilon={epsilon} must lie in (0, 0.5)"));
        }
        if k < 1 || k > d {
            return param(format!("k={k} must lie in 1..={d}"));
        }
        let mut rng = CounterRng::new(seed, StreamTag::Probe, 0);
        let linear = (0..trials).map(|_| random_linear_probe(&mut rng, d, k)).collect();
        let quadratic = (0..trials).map(|t| random_quadratic_probe(&mut rng, d, k, epsilon, t)).collect();
        let offsets = (0..trials).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        Ok(Self { mu, epsilon, k, linear, quadratic, offsets, stats: Partial::new(d, trials) })
    }

    pub fn trials(&self) -> usize {
        self.linear.len()
    }

    pub fn push_batch(&mut self, samples: ArrayView2<f64>) -> Result<()> {
        let d = self.mu.len();
        if samples.ncols() != d {
            return param(format!("expected {d} columns, got {}", samples.ncols()));
        }
        let trials = self.trials();
        let log = (1.0 / self.epsilon).ln();
        let (lin_cut, excess_cut, tail_cut) = (40.0 * log, 100.0 * log, 10.0 * log);
        let mu = self.mu.view();
        let (linear, quadratic, offsets) = (&self.linear, &self.quadratic, &self.offsets);
        let rows = samples.nrows();
        let starts: Vec<usize> = (0..rows).step_by(1024).collect();
        let part = starts
            .into_par_iter()
            .map(|start| {
                let chunk = samples.slice(s![start..(start + 1024).min(rows), ..]);
                let mut p = Partial::new(d, trials);
                for x in chunk.outer_iter() {
                    p.n += 1;
                    p.mean_sum.zip_mut_with(&x, |s, xi| *s += xi);
                    p.mean_sum -= &mu;
                    for t in 0..trials {
                        let lv = linear[t].eval(x, mu);
                        if lv.abs() >= lin_cut {
                            p.lin_tail[t] += 1;
                        }
                        p.lin_second[t] += lv * lv;
                        let q = quadratic[t].eval(x, mu);
                        if q > excess_cut {
                            p.quad_excess[t] += q;
                        }
                        if q > tail_cut {
                            p.quad_tail[t] += 1;
                        }
                        if offsets[t] + lv > excess_cut {
                            p.quad_extra[t] += q;
                        }
                    }
                }
                p
            })
            .reduce(|| Partial::new(d, trials), Partial::merge);
        self.stats = std::mem::replace(&mut self.stats, Partial::new(0, 0)).merge(part);
        Ok(())
    }

    pub fn finish(&self) -> Result<GoodnessReport> {
        let s = &self.stats;
        if s.n == 0 {
            return Err(crate::Error::EmptyInput("no samples pushed".into()));
        }
        let n = s.n as f64;
        let eps = self.epsilon;
        let alpha = 3.0 * eps / (1.0 / eps).ln();
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lin_tail: Vec<f64> = s.lin_tail.iter().map(|&c| c as f64 / n).collect();
        let excess: Vec<f64> = s.quad_excess.iter().map(|v| v / n).collect();
        let tail: Vec<f64> = s.quad_tail.iter().map(|&c| c as f64 / n).collect();
        let extra: Vec<f64> = s.quad_extra.iter().map(|v| v / n).collect();
        let cov_dev: Vec<f64> = s.lin_second.iter().map(|v| (v / n - 1.0).abs()).collect();
        let mean_err = sparse_norm_2k((&s.mean_sum / n).view(), self.k)?;
        let conditions = vec![
            ConditionResult::new(COND_LINEAR_TAIL, max(&lin_tail), eps, false),
            ConditionResult::new(COND_POLY_EXCESS, max(&excess), eps, false),
            ConditionResult::new(COND_POLY_TAIL, max(&tail), eps, false),
            ConditionResult::new(COND_MEAN, mean_err, alpha * (1.0 / alpha).ln().sqrt(), false),
            ConditionResult::new(COND_COVARIANCE, max(&cov_dev), alpha * (1.0 / alpha).ln(), false),
            ConditionResult::new(COND_POLY_EXTRA, max(&extra), eps, true),
        ];
        Ok(GoodnessReport {
            n: s.n,
            d: self.mu.len(),
            k: self.k,
            epsilon: eps,
            alpha,
            trials: self.trials(),
            conditions,
        })
    }
}

/// Monte Carlo audit of the goodness conditions with `trials` random probes per family.
///
/// Condition (1) is checked at `w = 1` only, with unit constants and
/// `alpha = 3 eps / ln(1/eps)`.
pub fn check_goodness(
    samples: ArrayView2<f64>,
    mu: ArrayView1<f64>,
    epsilon: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<GoodnessReport> {
    let mut acc = GoodnessAccumulator::new(mu.to_owned(), epsilon, k, trials, seed)?;
    acc.push_batch(samples)?;
    acc.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
}

/// Empirical two-sided tail of `X^T A X - tr(A)` for `X ~ N(0, I)`, against
/// `2 exp(-c min(t^2, t))`.
pub fn hanson_wright_tail(a: ArrayView2<f64>, n: usize, ts: &[f64], c: f64, seed: u64) -> Vec<TailPoint> {
    let d = a.nrows();
    let trace = a.diag().sum();
    let chunks = n.div_ceil(4096);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = CounterRng::new(seed, StreamTag::Test, chunk as u64);
            let mut counts = vec![0usize; ts.len()];
            let mut x = Array1::zeros(d);
            let rows = 4096.min(n - chunk * 4096);
            for _ in 0..rows {
                x.iter_mut().for_each(|v| *v = rng.normal());
                let q = x.dot(&a.dot(&x)) - trace;
                for (c, &t) in counts.iter_mut().zip(ts) {
                    if q.abs() > t {
                        *c += 1;
                    }
                }
            }
            counts
        })
        .reduce(|| vec![0; ts.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    ts.iter()
        .zip(counts)
        .map(|(&t, count)| TailPoint {
            t,
            empirical: count as f64 / n as f64,
            bound: 2.0 * (-c * (t * t).min(t)).exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn gaussian(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = CounterRng::new(seed, StreamTag::Test, 1);
        Array2::from_shape_fn((n, d), |_| rng.normal())
    }

    #[test]
    fn probes_respect_norm_constraints() {
        let mut rng = CounterRng::new(3, StreamTag::Probe, 0);
        for shape in 0..30 {
            let p = random_quadratic_probe(&mut rng, 40, 5, 0.05, shape);
            assert_eq!(p.support.len(), 5);
            assert!(op_norm(p.block.view()) <= 1.0 + 1e-9);
            let fro = p.block.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(fro <= (20f64).ln().sqrt() + 1e-9);
        }
    }

    #[test]
    fn rejects_zero_trials() {
        let x = gaussian(10, 4, 0);
        assert!(check_goodness(x.view(), Array1::zeros(4).view(), 0.05, 2, 0, 0).is_err());
    }

    #[test]
    fn shifted_samples_fail_mean_condition() {
        let mut x = gaussian(5000, 20, 1);
        x.column_mut(0).mapv_inplace(|v| v + 10.0);
        let report = check_goodness(x.view(), Array1::zeros(20).view(), 0.05, 3, 20, 2).unwrap();
        assert!(!report.condition(COND_MEAN).unwrap().passed);
        assert!(!report.passed());
    }

    #[test]
    fn chi_square_probe_tail_matches_closed_form() {
        // p = (z1^2 + z2^2 - 2)/sqrt2, so Pr[p > t] = exp(-(sqrt2 t + 2)/2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let probe = QuadraticProbe::new(vec![0, 1], array![[s, 0.0], [0.0, s]]);
        let n = 200_000;
        let x = gaussian(n, 2, 4);
        let mu = Array1::zeros(2);
        for t in [0.5, 1.5, 3.0] {
            let hits = x.outer_iter().filter(|r| probe.eval(r.view(), mu.view()) > t).count() as f64 / n as f64;
            let exact = (-(std::f64::consts::SQRT_2 * t + 2.0) / 2.0).exp();
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((hits - exact).abs() < 4.0 * se, "t={t}: {hits} vs {exact}");
        }
    }

    #[test]
    fn streaming_matches_one_shot() {
        let x = gaussian(3000, 12, 5);
        let mu = Array1::zeros(12);
        let whole = check_goodness(x.view(), mu.view(), 0.1, 2, 15, 9).unwrap();
        let mut acc = GoodnessAccumulator::new(mu, 0.1, 2, 15, 9).unwrap();
        acc.push_batch(x.slice(ndarray::s![..1000, ..])).unwrap();
        acc.push_batch(x.slice(ndarray::s![1000.., ..])).unwrap();
        let split = acc.finish().unwrap();
        for (a, b) in whole.conditions.iter().zip(&split.conditions) {
            assert!((a.worst - b.worst).abs() < 1e-9);
        }
    }
}
