//! Seeded self-check suites comparing the fast structural identities and
//! leverage bounds against dense computations.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{gen_instance, Family, InstanceSpec};
use crate::leverage::{apply_sampling, draw_sampling_plan, exact_leverage_scores, universal_tau_bounds};
use crate::spectral::eig_sym;
use crate::structure::{
    block_gershgorin_bound, bucketize, heavy_light_split, verify_bucket_eigen_bounds, BlockMatrix,
};
use crate::toeplitz::{
    build_symmetric_fourier, frobenius_via_weighted_column, inner_product_magnitude, real_collapsed_fourier,
    vandermonde_synthesize, weight_vector, FourierFactor, FrequencySet, SymToeplitz,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed violation measure (suite specific).
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

type SuiteFn = fn(&mut ChaCha8Rng, usize) -> SuiteResult;

const SUITES: &[(&str, SuiteFn)] = &[
    ("norm-identity", norm_identity),
    ("trace-identity", trace_identity),
    ("real-collapsed-fourier", real_collapsed),
    ("inner-product", inner_product),
    ("block-gershgorin", gershgorin),
    ("weyl", weyl),
    ("bucket-partition", bucket_partition),
    ("bucket-eigen", bucket_eigen),
    ("leverage-domination", leverage_domination),
    ("leverage-reweighting", leverage_reweighting),
    ("leverage-row-subset", leverage_row_subset),
    ("leverage-column-combination", leverage_column_combination),
    ("sampling-unbiased", sampling_unbiased),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs the named suites (all when `only` is empty). Suite `i` draws from
/// its own stream seeded by `seed + i`, so results do not depend on the
/// thread count.
pub fn run_suites(seed: u64, trials: usize, only: &[String]) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if let Some(bad) = only.iter().find(|n| !SUITES.iter().any(|(s, _)| s == n)) {
        return Err(Error::InvalidConfig(format!("unknown suite '{bad}'")));
    }
    let suites: Vec<SuiteResult> = SUITES
        .par_iter()
        .enumerate()
        .filter(|(_, (n, _))| only.is_empty() || only.iter().any(|o| o == n))
        .map(|(i, (_, f))| f(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64)), trials))
        .collect();
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport { seed, trials, suites, pass })
}

fn result(name: &str, checks: usize, failures: usize, worst: f64, tolerance: f64) -> SuiteResult {
    SuiteResult { name: name.into(), checks, failures, worst, tolerance, pass: failures == 0 }
}

fn random_factor(r: &mut ChaCha8Rng, d: usize, n: usize) -> FourierFactor {
    let pairs: Vec<(f64, f64)> = (0..n).map(|_| (r.random_range(1e-3..0.499), r.random_range(0.1..2.0))).collect();
    FourierFactor::from_pairs(d, &pairs, 0.0).expect("valid random factor")
}

fn random_toeplitz(r: &mut ChaCha8Rng, d: usize) -> SymToeplitz {
    SymToeplitz::new((0..d).map(|_| r.sample(StandardNormal)).collect()).expect("finite")
}

fn gaussian(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

fn norm_identity(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-10;
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let d = r.random_range(2..=96);
        let (a, b) = (random_toeplitz(r, d), random_toeplitz(r, d));
        let dense = (a.to_dense() - b.to_dense()).norm();
        let gap = (frobenius_via_weighted_column(&a, &b).expect("same d") - dense).abs() / dense;
        worst = worst.max(gap);
        fails += usize::from(gap > tol);
    }
    result("norm-identity", trials, fails, worst, tol)
}

fn trace_identity(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-10;
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let d = r.random_range(2..=96);
        let n = r.random_range(1..=8);
        let f = random_factor(r, d, n);
        let tr = vandermonde_synthesize(&f).to_dense().trace();
        let gap = (tr - 2.0 * d as f64 * f.total_weight()).abs() / tr;
        worst = worst.max(gap);
        fails += usize::from(gap > tol);
    }
    result("trace-identity", trials, fails, worst, tol)
}

// F_S D F_S^* in complex arithmetic against the real synthesis.
fn real_collapsed(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-10;
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let d = r.random_range(2..=48);
        let n = r.random_range(1..=6);
        let f = random_factor(r, d, n);
        let fs = build_symmetric_fourier(f.frequencies(), d).expect("nonempty");
        let diag: Vec<f64> = f.weights().iter().chain(f.weights()).copied().collect();
        let scaled = DMatrix::from_fn(d, diag.len(), |i, j| fs[(i, j)] * diag[j]);
        let dense = &scaled * fs.adjoint();
        let synth = vandermonde_synthesize(&f).to_dense();
        let scale = synth.norm().max(f64::MIN_POSITIVE);
        let mut gap = dense.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
        gap = gap.max((dense.map(|z| z.re) - &synth).norm() / scale);
        // The collapsed matrix reproduces the first column from the weights.
        let rc = real_collapsed_fourier(f.frequencies(), d).expect("nonempty");
        let col = &rc * nalgebra::DVector::from_column_slice(f.weights());
        gap = gap.max((col - synth.column(0)).norm() / scale);
        worst = worst.max(gap);
        fails += usize::from(gap > tol);
    }
    result("real-collapsed-fourier", trials, fails, worst, tol)
}

fn inner_product(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-9;
    let n = 10 * trials;
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..n {
        let d = r.random_range(1..=200);
        let (f, g): (f64, f64) = (r.random_range(-0.5..0.5), r.random_range(-0.5..0.5));
        let direct: Complex<f64> = (0..d).map(|t| Complex::from_polar(1.0, 2.0 * PI * (g - f) * t as f64)).sum();
        let gap = (direct.norm() - inner_product_magnitude(f, g, d)).abs();
        worst = worst.max(gap);
        fails += usize::from(gap > tol);
    }
    result("inner-product", n, fails, worst, tol)
}

// Reports the worst ||A||_2 / bound, which must stay <= 1.
fn gershgorin(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let nb = r.random_range(1..=5);
        let sizes: Vec<usize> = (0..nb).map(|_| r.random_range(1..=4)).collect();
        let n: usize = sizes.iter().sum();
        let g = DMatrix::from_fn(n, n, |_, _| Complex::new(r.sample(StandardNormal), r.sample(StandardNormal)));
        let h = (&g + g.adjoint()) * Complex::new(0.5, 0.0);
        let norm = crate::linalg::spectral_norm(&h);
        let bound = block_gershgorin_bound(&BlockMatrix { sizes, matrix: h }).expect("hermitian");
        let ratio = norm / bound;
        worst = worst.max(ratio);
        fails += usize::from(ratio > 1.0 + 1e-12);
    }
    result("block-gershgorin", trials, fails, worst, 1.0)
}

// |lambda_i(A + B) - lambda_i(A)| <= ||B||_2, reported relative to ||B||_2.
fn weyl(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let d = r.random_range(2..=48);
        let (a, b) = (random_toeplitz(r, d), random_toeplitz(r, d));
        let sum = SymToeplitz::new(a.first_column().iter().zip(b.first_column()).map(|(x, y)| x + y).collect())
            .expect("finite");
        let (ea, eb, es) = (eig_sym(&a), eig_sym(&b), eig_sym(&sum));
        let (ea, eb, es) = (ea.expect("finite"), eb.expect("finite"), es.expect("finite"));
        let nb = eb.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let shift = ea.eigenvalues.iter().zip(&es.eigenvalues).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let ratio = shift / nb;
        worst = worst.max(ratio);
        fails += usize::from(ratio > 1.0 + 1e-10);
    }
    result("weyl", trials, fails, worst, 1.0)
}

// Buckets partition the weight; heavy + light rebuilds the first column.
fn bucket_partition(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-12;
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..trials {
        let d = r.random_range(4..=256);
        let n = r.random_range(1..=12);
        let f = random_factor(r, d, n);
        let b = bucketize(&f);
        let entries: usize = b.buckets.values().map(|x| x.entries.len()).sum();
        let mut gap = (b.total_weight() - f.total_weight()).abs() / f.total_weight();
        if entries != f.len() {
            gap = f64::INFINITY;
        }
        let lambda = r.random_range(0.0..2.0 * b.max_weight());
        let (heavy, light) = heavy_light_split(&f, lambda).expect("nonnegative threshold");
        let (h, l, full) = (heavy.first_column(), light.first_column(), f.first_column());
        let scale = full.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for t in 0..d {
            gap = gap.max((h[t] + l[t] - full[t]).abs() / scale);
        }
        worst = worst.max(gap);
        fails += usize::from(gap > tol);
    }
    result("bucket-partition", trials, fails, worst, tol)
}

fn bucket_eigen(_r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let n = (trials / 5).clamp(1, 20);
    let c = 16.0;
    let (mut worst, mut fails) = (0.0f64, 0);
    for s in 0..n as u64 {
        let spec = InstanceSpec { family: Family::Clustered, d: 128, k: 1 + (s as usize % 6), sigma: 0.0, seed: s };
        let inst = gen_instance(&spec).expect("valid spec");
        let b = bucketize(&inst.factor);
        let mut lambdas: Vec<f64> = b.buckets.values().map(|x| x.weight).collect();
        lambdas.push(0.5 * b.max_weight());
        let rep = verify_bucket_eigen_bounds(&inst.factor, &lambdas, c, c).expect("d within limit");
        worst = worst.max(rep.light.measured);
        fails += usize::from(!rep.pass);
    }
    result("bucket-eigen", n, fails, worst, c)
}

fn weighted_real_fourier(freqs: &FrequencySet, d: usize) -> DMatrix<f64> {
    let rc = real_collapsed_fourier(freqs, d).expect("nonempty");
    let w = weight_vector(d).w;
    DMatrix::from_fn(d, rc.ncols(), |t, j| w[t] * rc[(t, j)])
}

fn leverage_domination(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-9;
    let (mut worst, mut fails) = (f64::NEG_INFINITY, 0);
    for i in 0..trials {
        let d = [64usize, 128, 256][i % 3];
        let n = r.random_range(1..=8);
        let freqs: Vec<f64> = if i % 2 == 0 {
            (0..n).map(|_| r.random_range(1e-4..0.4999)).collect()
        } else {
            let c = r.random_range(0.01..0.49);
            (0..n).map(|_| (c + r.random_range(-1.0..1.0) / d as f64).clamp(1e-4, 0.4999)).collect()
        };
        let set = FrequencySet::normalized(&freqs, 1e-12);
        let tau = exact_leverage_scores(&weighted_real_fourier(&set, d));
        let b = universal_tau_bounds(d, (2 * set.len()).min(d)).expect("r <= d");
        let excess = tau.iter().zip(&b.tau).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
        fails += usize::from(excess > tol);
    }
    result("leverage-domination", trials, fails, worst, tol)
}

fn leverage_reweighting(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-9;
    let (mut worst, mut fails) = (f64::NEG_INFINITY, 0);
    for _ in 0..trials {
        let (d, k) = (r.random_range(9..=96), r.random_range(1..=8));
        let a = gaussian(r, d, k);
        let tau = exact_leverage_scores(&a);
        let (alpha, beta): (f64, f64) = (r.random_range(0.1..1.0), r.random_range(1.0..5.0));
        let mut da = a.clone();
        for i in 0..d {
            da.row_mut(i).scale_mut(r.random_range(alpha..beta).sqrt());
        }
        let tau_d = exact_leverage_scores(&da);
        let excess = (0..d).map(|i| tau_d[i] - beta / alpha * tau[i]).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
        fails += usize::from(excess > tol);
    }
    result("leverage-reweighting", trials, fails, worst, tol)
}

fn leverage_row_subset(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-9;
    let (mut worst, mut fails) = (f64::NEG_INFINITY, 0);
    for _ in 0..trials {
        let (d, k) = (r.random_range(9..=96), r.random_range(1..=8));
        let a = gaussian(r, d, k);
        let tau = exact_leverage_scores(&a);
        let keep: Vec<usize> = (0..d).filter(|_| r.random_bool(0.5)).collect();
        if keep.is_empty() {
            continue;
        }
        let tau_s = exact_leverage_scores(&a.select_rows(keep.iter()));
        let excess = keep.iter().enumerate().map(|(p, &i)| tau[i] - tau_s[p]).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
        fails += usize::from(excess > tol);
    }
    result("leverage-row-subset", trials, fails, worst, tol)
}

fn leverage_column_combination(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 1e-9;
    let (mut worst, mut fails) = (f64::NEG_INFINITY, 0);
    for _ in 0..trials {
        let (d, k) = (r.random_range(9..=96), r.random_range(1..=8));
        let a = gaussian(r, d, k);
        let tau = exact_leverage_scores(&a);
        let cols = r.random_range(1..=8);
        let m = gaussian(r, k, cols);
        let tau_m = exact_leverage_scores(&(&a * m));
        let excess = (0..d).map(|i| tau_m[i] - tau[i]).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
        fails += usize::from(excess > tol);
    }
    result("leverage-column-combination", trials, fails, worst, tol)
}

// Mean of ||S x||^2 over many plans against ||x||^2.
fn sampling_unbiased(r: &mut ChaCha8Rng, trials: usize) -> SuiteResult {
    let tol = 0.05;
    let d = 64;
    let x: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let bounds = universal_tau_bounds(d, 4).expect("r <= d");
    let n = (40 * trials).max(2000);
    let base: u64 = r.random();
    let acc: f64 = (0..n as u64)
        .map(|s| {
            let plan = draw_sampling_plan(&bounds, 16, base.wrapping_add(s)).expect("m > 0");
            apply_sampling(&plan, &x).expect("same d").iter().map(|v| v * v).sum::<f64>()
        })
        .sum();
    let gap = (acc / n as f64 - norm2).abs() / norm2;
    result("sampling-unbiased", n, usize::from(gap > tol), gap, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_and_repeat() {
        let a = run_suites(3, 10, &[]).unwrap();
        assert!(a.pass, "{a:?}");
        assert_eq!(a.suites.len(), suite_names().len());
        assert_eq!(a, run_suites(3, 10, &[]).unwrap());
    }

    #[test]
    fn selects_and_rejects_names() {
        let rep = run_suites(0, 5, &["weyl".to_string()]).unwrap();
        assert_eq!(rep.suites.len(), 1);
        assert!(run_suites(0, 5, &["nope".to_string()]).is_err());
    }
}
