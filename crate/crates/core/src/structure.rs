//! Existence machinery and structural diagnostics: buckets, heavy/light
//! splits, clustered replacements and the spectral bounds behind them.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, spectral_norm};
use crate::spectral::{eig_sym, eig_sym_dense};
use crate::toeplitz::{
    frequency_vector, frobenius_via_weighted_column, vandermonde_synthesize, wrap_distance,
    FourierFactor,
};
use crate::trig::{cos_turns, sin_turns};

/// Measured quantity against a certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `f64::INFINITY` (JSON null) when no finite bound applies.
    pub bound: f64,
    pub measured: f64,
    pub constant: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Bucket {
    pub entries: Vec<(f64, f64)>,
    pub weight: f64,
}

/// Frequencies grouped by `[(j-1)/d, j/d)`, 1-based j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Buckets {
    pub d: usize,
    pub buckets: BTreeMap<usize, Bucket>,
}

impl Buckets {
    pub fn center(&self, j: usize) -> f64 {
        (2.0 * j as f64 - 1.0) / (2.0 * self.d as f64)
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.buckets.get(&j).map_or(0.0, |b| b.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.buckets.values().map(|b| b.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.buckets.values().map(|b| b.weight).fold(0.0, f64::max)
    }

    fn factor_of<'a>(&self, js: impl Iterator<Item = &'a usize>) -> Result<FourierFactor> {
        let pairs: Vec<(f64, f64)> =
            js.flat_map(|j| self.buckets[j].entries.iter().copied()).collect();
        FourierFactor::from_pairs(self.d, &pairs, 0.0)
    }
}

pub fn bucket_index(f: f64, d: usize) -> usize {
    ((f * d as f64).floor() as usize + 1).min(d)
}

pub fn bucketize(factor: &FourierFactor) -> Buckets {
    let d = factor.dim();
    let mut buckets: BTreeMap<usize, Bucket> = BTreeMap::new();
    for (f, a) in factor.pairs() {
        let b = buckets.entry(bucket_index(f, d)).or_default();
        b.entries.push((f, a));
        b.weight += a;
    }
    Buckets { d, buckets }
}

/// Buckets with weight above `lambda` go to the first factor, the rest to
/// the second.
pub fn heavy_light_split(factor: &FourierFactor, lambda: f64) -> Result<(FourierFactor, FourierFactor)> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidConfig(format!("threshold must be >= 0, got {lambda}")));
    }
    let b = bucketize(factor);
    let (heavy, light): (Vec<&usize>, Vec<&usize>) =
        b.buckets.keys().partition(|j| b.buckets[j].weight > lambda);
    Ok((b.factor_of(heavy.into_iter())?, b.factor_of(light.into_iter())?))
}

// Taylor remainder of e^z after degree l, for |z| = z.
fn taylor_tail(z: f64, l: usize) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let n = (l + 2) as f64;
    if z >= n {
        return f64::INFINITY;
    }
    let mut term = 1.0;
    for m in 1..=l + 1 {
        term *= z / m as f64;
    }
    term / (1.0 - z / n)
}

/// Smallest degree l >= 1 whose truncation error for a cluster of width
/// 1/d (phase `2 pi`) is at most `delta` per unit weight, counting both
/// conjugate polynomials.
pub fn taylor_degree(delta: f64) -> usize {
    let z = std::f64::consts::TAU;
    (1..400).find(|&l| 2.0 * taylor_tail(z, l) <= delta).unwrap_or(400)
}

/// `e^{2 pi i f* t} p1(t) + e^{-2 pi i f* t} p2(t)` around a cluster center.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPolys {
    pub f_star: f64,
    pub p1: Vec<Complex<f64>>,
    pub p2: Vec<Complex<f64>>,
}

impl TaylorPolys {
    pub fn eval(&self, t: f64) -> f64 {
        let horner = |c: &[Complex<f64>]| c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &x| acc * t + x);
        let x = self.f_star * t;
        let e = Complex::new(cos_turns(x), sin_turns(x));
        (e * horner(&self.p1) + e.conj() * horner(&self.p2)).re
    }

    /// Max over integer `t` in `[-d, d]` of the gap to `sum_f 2 a_f cos(2 pi f t)`.
    pub fn grid_residual(&self, freqs: &[f64], weights: &[f64], d: usize) -> f64 {
        let d = d as i64;
        (-d..=d)
            .map(|t| {
                let t = t as f64;
                let exact: f64 = freqs.iter().zip(weights).map(|(f, a)| 2.0 * a * cos_turns(f * t)).sum();
                (exact - self.eval(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_clustered(freqs: &[f64], f_star: f64, d: usize) -> Result<()> {
    let limit = 1.0 / d as f64;
    let width = freqs.iter().map(|f| (f - f_star).abs()).fold(0.0, f64::max);
    if width > limit * (1.0 + 1e-12) {
        return Err(Error::NotClustered { width, limit });
    }
    Ok(())
}

/// Degree-l Taylor polynomials: `p1_m = sum_f a_f (2 pi i r_f)^m / m!` with
/// `r_f = f - f*`, and `p2` the conjugate.
pub fn taylor_cluster_polys(
    freqs: &[f64],
    weights: &[f64],
    f_star: f64,
    ell: usize,
    d: usize,
) -> Result<TaylorPolys> {
    if freqs.len() != weights.len() {
        return Err(Error::DimMismatch { expected: freqs.len(), found: weights.len() });
    }
    if ell == 0 {
        return Err(Error::InvalidConfig("Taylor degree must be at least 1".into()));
    }
    check_clustered(freqs, f_star, d)?;
    let mut p1 = vec![Complex::new(0.0, 0.0); ell + 1];
    for (&f, &a) in freqs.iter().zip(weights) {
        let z = Complex::new(0.0, std::f64::consts::TAU * (f - f_star));
        let mut term = Complex::new(a, 0.0);
        for (m, c) in p1.iter_mut().enumerate() {
            if m > 0 {
                term = term * z / m as f64;
            }
            *c += term;
        }
    }
    let p2 = p1.iter().map(|c| c.conj()).collect();
    Ok(TaylorPolys { f_star, p1, p2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// How [`poly_to_fourier`] solves for the exponential-sum coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Square Taylor-moment system.
    MomentMatching,
    /// Least squares on the integer grid `0..=d`.
    Collocation,
    /// Moment matching, falling back to collocation when it fails to certify.
    #[default]
    Auto,
}

/// `sum_j 2 c_j cos(2 pi j gamma t)` (even) or `sum_j 2 c_j sin(2 pi j gamma t)`
/// (odd), `j = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub parity: Parity,
    pub gamma: f64,
    pub coeffs: Vec<f64>,
    /// Certified `max |p(t) - p~(t)|` over integer `t` in `[-d, d]`.
    pub residual: f64,
    pub method: FitMethod,
}

impl ExpSum {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let x = (i + 1) as f64 * self.gamma * t;
                2.0 * c * match self.parity {
                    Parity::Even => cos_turns(x),
                    Parity::Odd => sin_turns(x),
                }
            })
            .sum()
    }
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

fn grid_gap(p: &[f64], s: &ExpSum, d: usize) -> f64 {
    let d = d as i64;
    (-d..=d).map(|t| (poly_eval(p, t as f64) - s.eval(t as f64)).abs()).fold(0.0, f64::max)
}

fn moment_fit(p: &[f64], parity: Parity, gamma: f64) -> Vec<f64> {
    let n = p.len();
    let tau_g = std::f64::consts::TAU * gamma;
    // Row k: sum_j c_j j^k = rhs_k, both parities included so the system is square.
    let mut a = DMatrix::from_fn(n, n, |k, j| ((j + 1) as f64).powi(k as i32));
    let mut b = DVector::from_fn(n, |k, _| {
        let matches = (k % 2 == 0) == (parity == Parity::Even);
        if !matches {
            return 0.0;
        }
        let sign = match parity {
            Parity::Even => if (k / 2) % 2 == 0 { 1.0 } else { -1.0 },
            Parity::Odd => if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 },
        };
        let mut fact = 1.0;
        for m in 1..=k {
            fact *= m as f64 / tau_g;
        }
        sign * p[k] * fact / 2.0
    });
    for k in 0..n {
        let s = a.row(k).amax();
        a.row_mut(k).unscale_mut(s);
        b[k] /= s;
    }
    let cs: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    for (j, &s) in cs.iter().enumerate() {
        a.column_mut(j).unscale_mut(s);
    }
    let (x, _) = lstsq(&a, &b, 1e-12);
    x.iter().zip(&cs).map(|(x, s)| x / s).collect()
}

fn collocation_fit(p: &[f64], parity: Parity, gamma: f64, d: usize) -> Vec<f64> {
    let n = p.len();
    let basis = |t: usize, j: usize| {
        let x = (j + 1) as f64 * gamma * t as f64;
        2.0 * match parity {
            Parity::Even => cos_turns(x),
            Parity::Odd => sin_turns(x),
        }
    };
    let mut a = DMatrix::from_fn(d + 1, n, basis);
    let b = DVector::from_fn(d + 1, |t, _| poly_eval(p, t as f64));
    let cs: Vec<f64> = (0..n).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, &s) in cs.iter().enumerate() {
        a.column_mut(j).unscale_mut(s);
    }
    let (x, _) = lstsq(&a, &b, 1e-13);
    x.iter().zip(&cs).map(|(x, s)| x / s).collect()
}

/// Represent a polynomial of one parity as an exponential sum on the
/// grid `j gamma`, certified by evaluation on `[-d, d]`.
pub fn poly_to_fourier(
    coeffs: &[f64],
    parity: Parity,
    gamma: f64,
    d: usize,
    eps: f64,
    method: FitMethod,
) -> Result<ExpSum> {
    if coeffs.iter().any(|c| !c.is_finite()) || !gamma.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidConfig("gamma must be positive".into()));
    }
    let wrong = coeffs
        .iter()
        .enumerate()
        .any(|(k, &c)| c != 0.0 && (k % 2 == 0) != (parity == Parity::Even));
    if wrong {
        return Err(Error::InvalidConfig("polynomial has terms of the other parity".into()));
    }
    let n = coeffs.len().max(1);
    if coeffs.iter().all(|&c| c == 0.0) {
        return Ok(ExpSum { parity, gamma, coeffs: vec![0.0; n], residual: 0.0, method: FitMethod::MomentMatching });
    }
    let mut tried = Vec::new();
    if method != FitMethod::Collocation {
        let c = moment_fit(coeffs, parity, gamma);
        let mut s = ExpSum { parity, gamma, coeffs: c, residual: 0.0, method: FitMethod::MomentMatching };
        s.residual = grid_gap(coeffs, &s, d);
        if s.residual.is_finite() && s.residual <= eps {
            return Ok(s);
        }
        tried.push(s.residual);
    }
    if method != FitMethod::MomentMatching {
        let c = collocation_fit(coeffs, parity, gamma, d);
        let mut s = ExpSum { parity, gamma, coeffs: c, residual: 0.0, method: FitMethod::Collocation };
        s.residual = grid_gap(coeffs, &s, d);
        if s.residual.is_finite() && s.residual <= eps {
            return Ok(s);
        }
        tried.push(s.residual);
    }
    let residual = tried.into_iter().fold(f64::INFINITY, |a, b| if b.is_nan() { a } else { a.min(b) });
    Err(Error::IllConditionedGamma { gamma, residual, tolerance: eps })
}

/// Parameters of the clustered replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterApproxParams {
    pub ell: usize,
    pub gamma: f64,
    pub eps: f64,
    pub delta: f64,
    pub method: FitMethod,
}

/// Smallest value accepted for the additive fit tolerance.
pub const EPS_FLOOR: f64 = 1e-12;

impl ClusterApproxParams {
    /// Degree from `delta / d` rounded up to even, `gamma = 1 / (d (l + 1))`.
    pub fn new(d: usize, delta: f64, eps: f64) -> Self {
        let mut ell = taylor_degree(delta / d as f64);
        if ell % 2 == 1 {
            ell += 1;
        }
        ClusterApproxParams {
            ell,
            gamma: 1.0 / (d as f64 * (ell + 1) as f64),
            eps: eps.max(EPS_FLOOR),
            delta,
            method: FitMethod::Auto,
        }
    }
}

/// Output of [`clustered_approx`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterApprox {
    pub factor: FourierFactor,
    pub taylor_residual: f64,
    pub even_fit: ExpSum,
    pub odd_fit: ExpSum,
    /// Max over `t` in `[-d, d]` of `|T_1(t) - T~_1(t)|`.
    pub pointwise_error: f64,
    pub frobenius: BoundReport,
    pub coefficient_norm: f64,
}

/// Replace a cluster around `f_star` by at most `2 (l + 1)` conjugate pairs
/// on `f_star +- j gamma`, with `||T - T~||_F <= delta sum(a) + eps d`.
pub fn clustered_approx(factor: &FourierFactor, f_star: f64, params: &ClusterApproxParams) -> Result<ClusterApprox> {
    let d = factor.dim();
    let (freqs, weights): (Vec<f64>, Vec<f64>) = factor.pairs().unzip();
    check_clustered(&freqs, f_star, d)?;
    if params.ell == 0 || params.gamma <= 0.0 {
        return Err(Error::InvalidConfig("need l >= 1 and gamma > 0".into()));
    }
    let eps = params.eps.max(EPS_FLOOR);
    let polys = taylor_cluster_polys(&freqs, &weights, f_star, params.ell, d)?;
    let taylor_residual = polys.grid_residual(&freqs, &weights, d);

    let even: Vec<f64> = polys.p1.iter().enumerate().map(|(k, c)| if k % 2 == 0 { c.re } else { 0.0 }).collect();
    let odd: Vec<f64> = polys.p1.iter().enumerate().map(|(k, c)| if k % 2 == 1 { c.im } else { 0.0 }).collect();
    let even_fit = poly_to_fourier(&even, Parity::Even, params.gamma, d, eps / 4.0, params.method)?;
    let odd_fit = poly_to_fourier(&odd, Parity::Odd, params.gamma, d, eps / 4.0, params.method)?;

    let mut pairs = Vec::with_capacity(4 * (params.ell + 1));
    for j in 0..even_fit.coeffs.len() {
        let (al, be) = (even_fit.coeffs[j], odd_fit.coeffs[j]);
        let off = (j + 1) as f64 * params.gamma;
        pairs.push((f_star + off, al + be));
        pairs.push((f_star - off, al - be));
    }
    let out = FourierFactor::from_pairs(d, &pairs, 1e-12)?;

    let t = vandermonde_synthesize(factor);
    let tt = vandermonde_synthesize(&out);
    let pointwise_error = {
        let di = d as i64;
        (-di..=di)
            .map(|s| {
                let s = s as f64;
                let a: f64 = factor.pairs().map(|(f, a)| 2.0 * a * cos_turns(f * s)).sum();
                let b: f64 = out.pairs().map(|(f, a)| 2.0 * a * cos_turns(f * s)).sum();
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    };
    let measured = frobenius_via_weighted_column(&t, &tt)?;
    let sum_a: f64 = weights.iter().map(|a| a.abs()).sum();
    let bound = params.delta * sum_a + eps * d as f64;
    let coefficient_norm = out.weights().iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(ClusterApprox {
        factor: out,
        taylor_residual,
        even_fit,
        odd_fit,
        pointwise_error,
        frobenius: BoundReport { bound, measured, constant: 1.0, pass: measured <= bound },
        coefficient_norm,
    })
}

/// Unspecified constants of the existence constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceConfig {
    /// `C` in the eigenvalue index `C k ln^5 d / eps` and the error multiplier.
    pub c: f64,
    /// `c'` in `lambda = lambda_i ln d / (c' d)`.
    pub c_prime: f64,
}

impl Default for ExistenceConfig {
    fn default() -> Self {
        ExistenceConfig { c: 4.0, c_prime: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub factor: FourierFactor,
    pub lambda: f64,
    pub threshold_index: usize,
    pub heavy_buckets: usize,
    pub rank: usize,
    /// `||T - T_k||` in the norm of the construction.
    pub opt: f64,
    pub error: BoundReport,
    pub config: ExistenceConfig,
    pub method_fallbacks: usize,
}

fn replace_heavy(heavy: &FourierFactor, delta: f64, budget: f64) -> Result<(FourierFactor, usize, usize)> {
    let d = heavy.dim();
    let b = bucketize(heavy);
    let nb = b.len().max(1);
    let mut pairs = Vec::new();
    let mut fallbacks = 0;
    for (&j, bucket) in &b.buckets {
        let sub = FourierFactor::from_pairs(d, &bucket.entries, 0.0)?;
        let eps = budget / (nb as f64 * d as f64);
        let params = ClusterApproxParams::new(d, delta, eps);
        let c = clustered_approx(&sub, b.center(j), &params)?;
        fallbacks += usize::from(c.even_fit.method == FitMethod::Collocation)
            + usize::from(c.odd_fit.method == FitMethod::Collocation);
        pairs.extend(c.factor.pairs());
    }
    Ok((FourierFactor::from_pairs(d, &pairs, 1e-12)?, b.len(), fallbacks))
}

fn nonneg(factor: &FourierFactor) -> Result<()> {
    if factor.weights().iter().any(|&a| a < 0.0) {
        return Err(Error::InvalidConfig("existence constructions need nonnegative weights".into()));
    }
    Ok(())
}

/// Frobenius existence construction: threshold from the
/// `ceil(C k ln^5 d / eps)`-th eigenvalue, keep heavy buckets, replace each
/// by a clustered approximation. Measured against
/// `(1 + eps) ||T - T_k||_F + delta ||T||_F`.
pub fn existence_frobenius(
    factor: &FourierFactor,
    k: usize,
    eps: f64,
    delta: f64,
    cfg: &ExistenceConfig,
) -> Result<ExistenceReport> {
    nonneg(factor)?;
    let d = factor.dim();
    if k > d {
        return Err(Error::BadRank { k, d });
    }
    let t = vandermonde_synthesize(factor);
    let spec = eig_sym(&t)?;
    let ld = (d as f64).ln().max(1.0);
    let idx = ((cfg.c * k as f64 * ld.powi(5) / eps).ceil() as usize).clamp(1, d);
    let lambda = (spec.eigenvalues[idx - 1].max(0.0)) * ld / (cfg.c_prime * d as f64);
    let (heavy, _) = heavy_light_split(factor, lambda)?;
    let tnorm = t.frobenius_norm();
    let (out, nb, fallbacks) = replace_heavy(&heavy, delta, 0.5 * delta * tnorm)?;
    let opt = spec.eigenvalues.iter().map(|l| l * l).collect::<Vec<_>>();
    let mut sq: Vec<f64> = opt;
    sq.sort_by(|a, b| b.total_cmp(a));
    let opt = sq[k..].iter().sum::<f64>().sqrt();
    let measured = frobenius_via_weighted_column(&t, &vandermonde_synthesize(&out))?;
    let bound = (1.0 + eps) * opt + delta * tnorm;
    Ok(ExistenceReport {
        rank: 2 * out.len(),
        factor: out,
        lambda,
        threshold_index: idx,
        heavy_buckets: nb,
        opt,
        error: BoundReport { bound, measured, constant: 1.0 + eps, pass: measured <= bound * (1.0 + 1e-12) },
        config: *cfg,
        method_fallbacks: fallbacks,
    })
}

/// Spectral existence construction with `lambda = lambda_{k+1} ln d / (c' d)`.
/// The bound reported is `C ln^2 d ||T - T_k||_2 + delta ||T||_F`; the
/// heavy-bucket count is checked against `(k + 2) ln^3 d`.
pub fn existence_spectral(
    factor: &FourierFactor,
    k: usize,
    delta: f64,
    cfg: &ExistenceConfig,
) -> Result<(ExistenceReport, BoundReport)> {
    nonneg(factor)?;
    let d = factor.dim();
    if k > d {
        return Err(Error::BadRank { k, d });
    }
    let t = vandermonde_synthesize(factor);
    let spec = eig_sym(&t)?;
    let ld = (d as f64).ln().max(1.0);
    let mut mags: Vec<f64> = spec.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let lk1 = mags.get(k).copied().unwrap_or(0.0);
    let lambda = lk1 * ld / (cfg.c_prime * d as f64);
    let (heavy, _) = heavy_light_split(factor, lambda)?;
    let tnorm = t.frobenius_norm();
    let (out, nb, fallbacks) = replace_heavy(&heavy, delta, 0.5 * delta * tnorm)?;
    let diff = t.to_dense() - vandermonde_synthesize(&out).to_dense();
    let measured = spectral_norm(&diff);
    let constant = cfg.c * ld * ld;
    let bound = constant * lk1 + delta * tnorm;
    let count_bound = (k as f64 + 2.0) * ld.powi(3);
    Ok((
        ExistenceReport {
            rank: 2 * out.len(),
            factor: out,
            lambda,
            threshold_index: k + 1,
            heavy_buckets: nb,
            opt: lk1,
            error: BoundReport { bound, measured, constant, pass: measured <= bound * (1.0 + 1e-12) },
            config: *cfg,
            method_fallbacks: fallbacks,
        },
        BoundReport { bound: count_bound, measured: nb as f64, constant: 1.0, pass: nb as f64 <= count_bound },
    ))
}

/// Hermitian matrix partitioned into square diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub sizes: Vec<usize>,
    pub matrix: DMatrix<Complex<f64>>,
}

/// `max_i (||A_ii||_2 + sum_{j != i} ||A_ij||_2)`, an upper bound on `||A||_2`.
pub fn block_gershgorin_bound(a: &BlockMatrix) -> Result<f64> {
    let n = a.matrix.nrows();
    if !a.matrix.is_square() || a.sizes.iter().sum::<usize>() != n || a.sizes.contains(&0) {
        return Err(Error::BadShape("block sizes must partition a square matrix".into()));
    }
    let scale = a.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = (&a.matrix - a.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(asym));
    }
    let offs: Vec<usize> = a.sizes.iter().scan(0, |s, &x| { let o = *s; *s += x; Some(o) }).collect();
    let mut best = 0.0f64;
    for (&oi, &si) in offs.iter().zip(&a.sizes) {
        let mut row = 0.0;
        for (&oj, &sj) in offs.iter().zip(&a.sizes) {
            row += spectral_norm(&a.matrix.view((oi, oj), (si, sj)).clone_owned());
        }
        best = best.max(row);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyCheck {
    pub lambda: f64,
    pub heavy_buckets: usize,
    pub threshold: f64,
    pub eigen_count: usize,
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketEigenReport {
    pub d: usize,
    pub c_heavy: f64,
    pub c_light: f64,
    pub heavy: Vec<HeavyCheck>,
    /// `||T||_2 / (d lambda ln d)` at `lambda` = the largest bucket weight.
    pub light: BoundReport,
    pub pass: bool,
}

/// Largest dimension for [`verify_bucket_eigen_bounds`].
pub const EIGEN_CHECK_MAX_D: usize = 512;

/// Directional checks of the heavy- and light-bucket eigenvalue bounds.
/// For each `lambda`: at least `(#buckets >= lambda) / ln^3 d` eigenvalues
/// must reach `d lambda / (c_heavy ln d)`. With `lambda` the largest bucket
/// weight, `||T||_2 <= c_light d lambda ln d`.
pub fn verify_bucket_eigen_bounds(
    factor: &FourierFactor,
    lambdas: &[f64],
    c_heavy: f64,
    c_light: f64,
) -> Result<BucketEigenReport> {
    let d = factor.dim();
    if d > EIGEN_CHECK_MAX_D {
        return Err(Error::BadShape(format!("dense check limited to d <= {EIGEN_CHECK_MAX_D}")));
    }
    let t = vandermonde_synthesize(factor);
    let spec = eig_sym(&t)?;
    let b = bucketize(factor);
    let ld = (d as f64).ln().max(1.0);
    let heavy: Vec<HeavyCheck> = lambdas
        .iter()
        .map(|&lambda| {
            let heavy_buckets = b.buckets.values().filter(|x| x.weight >= lambda).count();
            let threshold = d as f64 * lambda / (c_heavy * ld);
            let eigen_count = spec.eigenvalues.iter().filter(|&&l| l >= threshold).count();
            let required = heavy_buckets as f64 / ld.powi(3);
            HeavyCheck { lambda, heavy_buckets, threshold, eigen_count, required, pass: eigen_count as f64 >= required }
        })
        .collect();
    let lmax = b.max_weight();
    let norm2 = spec.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let ratio = if lmax > 0.0 { norm2 / (d as f64 * lmax * ld) } else { 0.0 };
    let light = BoundReport { bound: c_light, measured: ratio, constant: c_light, pass: ratio <= c_light };
    let pass = light.pass && heavy.iter().all(|h| h.pass);
    Ok(BucketEigenReport { d, c_heavy, c_light, heavy, light, pass })
}

/// Keep the residue class of bucket indices modulo `ceil(d w)` holding the
/// most buckets (smallest residue on ties).
pub fn well_separated_subsample(buckets: &Buckets, w: f64) -> Buckets {
    let stride = ((buckets.d as f64 * w) - 1e-9).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; stride];
    for &j in buckets.buckets.keys() {
        counts[j % stride] += 1;
    }
    let best = (0..stride).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))).unwrap_or(0);
    Buckets {
        d: buckets.d,
        buckets: buckets
            .buckets
            .iter()
            .filter(|(j, _)| *j % stride == best)
            .map(|(j, b)| (*j, b.clone()))
            .collect(),
    }
}

/// Constant in `|v(f)^* v(g)| <= C / wrap(f, g)`.
pub const INNER_PRODUCT_CONSTANT: f64 = 0.5;

/// `||D1^{1/2} F_1^* F_2 D2^{1/2}||_F` against `C lambda / dist`, where
/// `F_i` has columns `v(sigma_i f)` and `lambda = max(tr D1, tr D2)`.
pub fn cross_block_frobenius_bound(
    d: usize,
    d1: &[f64],
    s1: &[f64],
    sigma1: f64,
    d2: &[f64],
    s2: &[f64],
    sigma2: f64,
) -> Result<BoundReport> {
    if d1.len() != s1.len() || d2.len() != s2.len() {
        return Err(Error::DimMismatch { expected: s1.len(), found: d1.len() });
    }
    if d1.iter().chain(d2).any(|&x| x < 0.0) {
        return Err(Error::InvalidConfig("diagonal weights must be nonnegative".into()));
    }
    let cols = |s: &[f64], sg: f64| -> Vec<Vec<Complex<f64>>> { s.iter().map(|&f| frequency_vector(sg * f, d)).collect() };
    let (c1, c2) = (cols(s1, sigma1), cols(s2, sigma2));
    let mut sq = 0.0;
    let mut dist = f64::INFINITY;
    for (i, u) in c1.iter().enumerate() {
        for (j, v) in c2.iter().enumerate() {
            let ip: Complex<f64> = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
            sq += d1[i] * d2[j] * ip.norm_sqr();
            dist = dist.min(wrap_distance(sigma1 * s1[i], sigma2 * s2[j]));
        }
    }
    let measured = sq.sqrt();
    let lambda = d1.iter().sum::<f64>().max(d2.iter().sum());
    let bound = if dist > 0.0 { INNER_PRODUCT_CONSTANT * lambda / dist } else { f64::INFINITY };
    Ok(BoundReport {
        bound,
        measured,
        constant: INNER_PRODUCT_CONSTANT,
        pass: measured <= bound * (1.0 + 1e-12) + 1e-12,
    })
}

/// Spectral norm of a dense real symmetric matrix through its eigenvalues.
pub fn sym_spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eig_sym_dense(a)?.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::FrequencySet;

    fn factor(d: usize, f: &[f64], a: &[f64]) -> FourierFactor {
        FourierFactor::new(d, FrequencySet::new(f.to_vec()).unwrap(), a.to_vec()).unwrap()
    }

    #[test]
    fn bucketize_examples() {
        let d = 16;
        let b = bucketize(&factor(d, &[0.01, 0.03, 0.05], &[1.0, 2.0, 3.0]));
        assert_eq!(b.len(), 1);
        assert_eq!(b.weight(1), 6.0);
        let b = bucketize(&factor(d, &[1.5 / 16.0, 2.5 / 16.0], &[1.0, 2.0]));
        assert_eq!((b.weight(2), b.weight(3)), (1.0, 2.0));
    }

    #[test]
    fn split_examples() {
        let f = factor(16, &[1.5 / 16.0, 2.5 / 16.0], &[1.0, 3.0]);
        let (h, l) = heavy_light_split(&f, 0.0).unwrap();
        assert_eq!((h.len(), l.len()), (2, 0));
        let (h, l) = heavy_light_split(&f, 3.0).unwrap();
        assert_eq!((h.len(), l.len()), (0, 2));
        let (h, l) = heavy_light_split(&f, 2.0).unwrap();
        assert_eq!(h.weights(), &[3.0]);
        assert_eq!(l.weights(), &[1.0]);
        assert!(heavy_light_split(&f, -1.0).is_err());
    }

    #[test]
    fn taylor_degenerate_cluster() {
        let p = taylor_cluster_polys(&[0.2, 0.2], &[1.0, 2.0], 0.2, 4, 32).unwrap();
        assert_eq!(p.p1[0], Complex::new(3.0, 0.0));
        assert!(p.p1[1..].iter().all(|c| *c == Complex::new(0.0, 0.0)));
        assert_eq!(p.grid_residual(&[0.2, 0.2], &[1.0, 2.0], 32), 0.0);
    }

    #[test]
    fn taylor_single_offset() {
        let d = 64;
        let f = 0.2 + 0.5 / d as f64;
        let ell = taylor_degree(1e-6);
        let p = taylor_cluster_polys(&[f], &[1.0], 0.2, ell, d).unwrap();
        assert!(p.grid_residual(&[f], &[1.0], d) <= 1e-6);
        for (a, b) in p.p1.iter().zip(&p.p2) {
            assert_eq!(*a, b.conj());
        }
        assert!(matches!(
            taylor_cluster_polys(&[0.2 + 2.0 / d as f64], &[1.0], 0.2, ell, d),
            Err(Error::NotClustered { .. })
        ));
    }

    #[test]
    fn poly_to_fourier_examples() {
        let z = poly_to_fourier(&[0.0, 0.0, 0.0], Parity::Even, 0.01, 8, 1e-9, FitMethod::Auto).unwrap();
        assert!(z.coeffs.iter().all(|&c| c == 0.0));

        let one = poly_to_fourier(&[1.0], Parity::Even, 1e-9, 8, 1e-9, FitMethod::Auto).unwrap();
        assert!((one.eval(0.0) - 1.0).abs() < 1e-12);
        assert!(one.residual <= 1e-9);

        let lin = poly_to_fourier(&[0.0, 1.0], Parity::Odd, 1e-4, 4, 1e-3, FitMethod::Auto).unwrap();
        for t in 0..=4 {
            let t = t as f64;
            assert_eq!(lin.eval(-t), -lin.eval(t));
        }
        assert!(poly_to_fourier(&[1.0, 1.0], Parity::Even, 0.01, 4, 1e-3, FitMethod::Auto).is_err());
    }

    #[test]
    fn clustered_examples() {
        let d = 64;
        let params = ClusterApproxParams::new(d, 1e-6, 1e-10);
        assert!(params.ell % 2 == 0);
        // single frequency sitting on the gamma grid
        let fs = 0.25 + 0.5 / d as f64;
        let on = fs + 3.0 * params.gamma;
        let c = clustered_approx(&factor(d, &[on], &[2.0]), fs, &params).unwrap();
        assert!(c.frobenius.measured <= 1e-6 * 2.0 + 1e-10 * d as f64);
        // zero-width cluster
        let c = clustered_approx(&factor(d, &[fs], &[1.5]), fs, &params).unwrap();
        assert!(c.frobenius.pass);
        assert!(c.taylor_residual == 0.0);
        assert!(2 * c.factor.len() <= 4 * (params.ell + 1));
    }

    #[test]
    fn gershgorin_examples() {
        let mut m = DMatrix::<Complex<f64>>::zeros(4, 4);
        m[(0, 0)] = Complex::new(3.0, 0.0);
        m[(1, 1)] = Complex::new(1.0, 0.0);
        m[(2, 2)] = Complex::new(-5.0, 0.0);
        m[(3, 3)] = Complex::new(2.0, 0.0);
        let a = BlockMatrix { sizes: vec![2, 2], matrix: m.clone() };
        assert!((block_gershgorin_bound(&a).unwrap() - 5.0).abs() < 1e-12);
        m[(0, 1)] = Complex::new(0.0, 1.0);
        m[(1, 0)] = Complex::new(0.0, 1.0);
        let a = BlockMatrix { sizes: vec![2, 2], matrix: m };
        assert!(matches!(block_gershgorin_bound(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn bucket_eigen_examples() {
        let d = 64;
        // one bucket of weight lambda: ||T||_2 <= 2 d lambda
        let f = factor(d, &[0.2, 0.2 + 0.3 / d as f64], &[0.4, 0.6]);
        let t = vandermonde_synthesize(&f);
        assert!(sym_spectral_norm(&t.to_dense()).unwrap() <= 2.0 * d as f64 * 1.0 + 1e-9);
        let r = verify_bucket_eigen_bounds(&f, &[1.0, 0.5], 16.0, 16.0).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn separated_examples() {
        let d = 32;
        let f = factor(d, &[0.5 / 32.0, 1.5 / 32.0, 2.5 / 32.0, 3.5 / 32.0], &[1.0; 4]);
        let b = bucketize(&f);
        let one = bucketize(&factor(d, &[0.3], &[1.0]));
        assert_eq!(well_separated_subsample(&one, 0.25), one);
        let s = well_separated_subsample(&b, 2.0 / d as f64);
        assert_eq!(s.buckets.keys().copied().collect::<Vec<_>>(), vec![2, 4]);
    }

    #[test]
    fn cross_block_examples() {
        let d = 8;
        // f = 0.25 against its own conjugate: sum_t e^{-i pi t} = 0 for even d
        let r = cross_block_frobenius_bound(d, &[1.0], &[0.25], 1.0, &[1.0], &[0.25], -1.0).unwrap();
        assert!(r.measured < 1e-12);
        assert!((r.bound - 2.0 * INNER_PRODUCT_CONSTANT).abs() < 1e-15);
        let r = cross_block_frobenius_bound(d, &[1.0], &[0.1], 1.0, &[1.0], &[0.1], 1.0).unwrap();
        assert!(r.bound.is_infinite() && r.pass);
    }
}
