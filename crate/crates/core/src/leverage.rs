//! Leverage scores, universal bounds for weighted Fourier matrices, and the
//! mixed leverage/uniform row sampler.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_basis, thin_svd, SvdScalar};
use crate::toeplitz::{real_collapsed_fourier, weight_vector, FrequencySet};

/// Rank cutoff relative to the largest singular value.
pub const RANK_CUTOFF: f64 = 1e-12;

/// `tau_j = ||row_j(Q)||^2` for an orthonormal basis Q of range(A).
pub fn exact_leverage_scores<T: SvdScalar>(a: &DMatrix<T>) -> Vec<f64> {
    let q = orthonormal_basis(a, RANK_CUTOFF);
    (0..q.nrows())
        .map(|i| q.row(i).iter().map(|z| (*z).modulus_squared()).sum())
        .collect()
}

/// Per-row upper bounds on the leverage scores of `W F_S` for every
/// frequency set with at most r columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevBounds {
    pub d: usize,
    pub r: usize,
    pub c_cor: f64,
    pub tau: Vec<f64>,
    pub total: f64,
}

impl LevBounds {
    /// `total / (r ln(r+1) ln d)`.
    pub fn constant(&self) -> f64 {
        let r = self.r as f64;
        let ld = (self.d as f64).ln().max(f64::MIN_POSITIVE);
        self.total / (r * (r + 1.0).ln() * ld)
    }

    /// Uniform bounds (every row 1).
    pub fn uniform(d: usize) -> Self {
        LevBounds { d, r: d, c_cor: 1.0, tau: vec![1.0; d], total: d as f64 }
    }
}

/// [`universal_tau_bounds_with`] with `C_cor = 1`.
pub fn universal_tau_bounds(d: usize, r: usize) -> Result<LevBounds> {
    universal_tau_bounds_with(d, r, 1.0)
}

/// Geometric row partition: block i (1-based) holds rows
/// `floor(d(1 - 2^{1-i})) + 1 ..= floor(d(1 - 2^{-i}))`. Inside a block of
/// nominal size `n = d/2^i`, local row j gets
/// `min(1, r / min(j, n + 1 - j), c_cor r^6 ln^3(r+1) / n)` while
/// `2^i <= d/r`, and 1 otherwise. Rows covered by no block get 1.
pub fn universal_tau_bounds_with(d: usize, r: usize, c_cor: f64) -> Result<LevBounds> {
    if r == 0 || d == 0 || r > d {
        return Err(Error::BadShape(format!("need 1 <= r <= d, got r = {r}, d = {d}")));
    }
    let df = d as f64;
    let rf = r as f64;
    let corr = c_cor * rf.powi(6) * (rf + 1.0).ln().powi(3);
    let mut tau = vec![f64::NAN; d];
    let levels = usize::BITS - d.leading_zeros() + 2;
    for i in 1..=levels as i32 {
        let p = 2f64.powi(i);
        let start = (df * (1.0 - 2.0 / p)).floor() as usize + 1;
        let end = ((df * (1.0 - 1.0 / p)).floor() as usize).min(d);
        let n = df / p;
        let active = p <= df / rf;
        for row in start..=end {
            if !tau[row - 1].is_nan() {
                continue;
            }
            tau[row - 1] = if active {
                let j = (row - start + 1) as f64;
                let edge = j.min(n + 1.0 - j).max(f64::MIN_POSITIVE);
                1f64.min(rf / edge).min(corr / n)
            } else {
                1.0
            };
        }
    }
    for t in tau.iter_mut().filter(|t| t.is_nan()) {
        *t = 1.0;
    }
    let total = tau.iter().sum();
    Ok(LevBounds { d, r, c_cor, tau, total })
}

/// `p_i = (tau_i / total + 1/d) / 2`.
pub fn sampling_distribution(bounds: &LevBounds) -> Vec<f64> {
    let d = bounds.d as f64;
    bounds.tau.iter().map(|t| 0.5 * (t / bounds.total + 1.0 / d)).collect()
}

/// m i.i.d. row draws with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub indices: Vec<usize>,
    /// Probability of the row drawn at each position.
    pub probabilities: Vec<f64>,
}

impl SamplingPlan {
    /// Deterministic plan reading every row once with unit scales.
    pub fn full(d: usize) -> Self {
        SamplingPlan {
            d,
            m: d,
            seed: 0,
            indices: (0..d).collect(),
            probabilities: vec![1.0 / d as f64; d],
        }
    }

    /// `(m p_{i_t})^{-1/2}`.
    pub fn scale(&self, t: usize) -> f64 {
        1.0 / (self.m as f64 * self.probabilities[t]).sqrt()
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.m).map(|t| self.scale(t)).collect()
    }

    pub fn distinct_rows(&self) -> usize {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

/// Draw m rows from the mixed distribution, seeded by ChaCha8.
pub fn draw_sampling_plan(bounds: &LevBounds, m: usize, seed: u64) -> Result<SamplingPlan> {
    if m == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    let p = sampling_distribution(bounds);
    let dist = WeightedIndex::new(&p).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..m).map(|_| dist.sample(&mut rng)).collect();
    let probabilities = indices.iter().map(|&i| p[i]).collect();
    Ok(SamplingPlan { d: bounds.d, m, seed, indices, probabilities })
}

/// `(S x)_t = x[i_t] (m p_{i_t})^{-1/2}`.
pub fn apply_sampling(plan: &SamplingPlan, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != plan.d {
        return Err(Error::DimMismatch { expected: plan.d, found: x.len() });
    }
    Ok(plan.indices.iter().enumerate().map(|(t, &i)| x[i] * plan.scale(t)).collect())
}

/// `ceil(c * total * ln(1/eta) / beta^2)`.
pub fn embedding_sample_count(total: f64, eta: f64, beta: f64, c: f64) -> usize {
    (c * total * (1.0 / eta).ln() / (beta * beta)).ceil().max(1.0) as usize
}

/// Distortion of `||S A x|| / ||A x||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// Exact extremes over range(A), from the singular values of `S Q`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Extremes over random and right-singular test vectors.
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub tested: usize,
    pub excluded: usize,
    pub beta: f64,
    pub pass: bool,
}

/// Check `(1 - beta) ||Ax|| <= ||SAx|| <= (1 + beta) ||Ax||`.
pub fn subspace_embedding_check(
    a: &DMatrix<f64>,
    plan: &SamplingPlan,
    beta: f64,
    n_random: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    if a.nrows() != plan.d {
        return Err(Error::DimMismatch { expected: plan.d, found: a.nrows() });
    }
    let sample_rows = |m: &DMatrix<f64>| {
        DMatrix::from_fn(plan.m, m.ncols(), |t, j| m[(plan.indices[t], j)] * plan.scale(t))
    };
    let q = orthonormal_basis(a, RANK_CUTOFF);
    let (min_ratio, max_ratio) = if q.ncols() == 0 {
        (1.0, 1.0)
    } else {
        let sv = thin_svd(&sample_rows(&q)).s;
        let lo = if plan.m < q.ncols() { 0.0 } else { sv.iter().cloned().fold(f64::INFINITY, f64::min) };
        (lo, sv.iter().cloned().fold(0.0, f64::max))
    };

    let mut tests: Vec<DVector<f64>> = Vec::new();
    let vt = thin_svd(a).vt;
    tests.extend((0..vt.nrows()).map(|k| vt.row(k).transpose()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        tests.push(DVector::from_fn(a.ncols(), |_, _| rng.random::<f64>() * 2.0 - 1.0));
    }
    let sa = sample_rows(a);
    let anorm = a.norm();
    let (mut smin, mut smax, mut tested, mut excluded) = (f64::INFINITY, 0.0f64, 0, 0);
    for x in &tests {
        let ax = (a * x).norm();
        if ax <= 1e-12 * anorm * x.norm() {
            excluded += 1;
            continue;
        }
        let ratio = (&sa * x).norm() / ax;
        smin = smin.min(ratio);
        smax = smax.max(ratio);
        tested += 1;
    }
    if tested == 0 {
        smin = 1.0;
        smax = 1.0;
    }
    let lo = min_ratio.min(smin);
    let hi = max_ratio.max(smax);
    let pass = lo >= 1.0 - beta - 1e-12 && hi <= 1.0 + beta + 1e-12;
    Ok(EmbeddingReport {
        min_ratio,
        max_ratio,
        sampled_min: smin,
        sampled_max: smax,
        tested,
        excluded,
        beta,
        pass,
    })
}

/// Exact leverage scores of `W F_S R_S` against universal bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub trials: usize,
    /// `max_j (tau_j - bound_j)` over all sets; must be <= 1e-9.
    pub worst_excess: f64,
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Draws `trials` random sets of at most `r / 2` frequencies, alternating
/// spread-out and clustered (within 1/d of a center), and compares their
/// exact leverage scores with `bounds`.
pub fn domination_check(bounds: &LevBounds, trials: usize, seed: u64) -> Result<DominationReport> {
    let d = bounds.d;
    let w = weight_vector(d).w;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<FrequencySet> = (0..trials)
        .map(|i| {
            let n = rng.random_range(1..=(bounds.r / 2).max(1));
            let raw: Vec<f64> = if i % 2 == 0 {
                (0..n).map(|_| rng.random_range(1e-4..0.4999)).collect()
            } else {
                let c = rng.random_range(0.01..0.49);
                (0..n).map(|_| (c + rng.random_range(-1.0..1.0) / d as f64).clamp(1e-4, 0.4999)).collect()
            };
            FrequencySet::normalized(&raw, 1e-12)
        })
        .collect();
    let per = sets
        .par_iter()
        .map(|s| {
            let rc = real_collapsed_fourier(s, d)?;
            let a = DMatrix::from_fn(d, rc.ncols(), |t, j| w[t] * rc[(t, j)]);
            let tau = exact_leverage_scores(&a);
            Ok(tau
                .iter()
                .zip(&bounds.tau)
                .fold((f64::NEG_INFINITY, 0.0f64), |(e, r), (x, y)| (e.max(x - y), r.max(x / y))))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let worst_excess = per.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let worst_ratio = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(DominationReport { trials, worst_excess, worst_ratio, pass: trials == 0 || worst_excess <= 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::{real_collapsed_fourier, FrequencySet};
    use nalgebra::Complex;

    #[test]
    fn identity_scores() {
        let s = exact_leverage_scores(&DMatrix::<f64>::identity(4, 4));
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn on_grid_fourier_scores_are_flat() {
        let d = 16;
        let a = DMatrix::from_fn(d, 4, |t, j| {
            let x = (j as f64) * (t as f64) / d as f64;
            Complex::new(crate::trig::cos_turns(x), crate::trig::sin_turns(x))
        });
        for s in exact_leverage_scores(&a) {
            assert!((s - 4.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_sum_is_rank() {
        let s = FrequencySet::new(vec![0.1, 0.2]).unwrap();
        let a = real_collapsed_fourier(&s, 10).unwrap();
        let a = DMatrix::from_fn(10, 3, |i, j| if j < 2 { a[(i, j)] } else { a[(i, 0)] + a[(i, 1)] });
        let sum: f64 = exact_leverage_scores(&a).iter().sum();
        assert!((sum - 2.0).abs() < 1e-8);
    }

    #[test]
    fn full_rank_bounds_saturate() {
        let b = universal_tau_bounds(32, 32).unwrap();
        assert!(b.tau.iter().all(|&t| t == 1.0));
        assert_eq!(b.total, 32.0);
        assert!(universal_tau_bounds(4, 5).is_err());
    }

    #[test]
    fn small_bounds_shape() {
        // d = 8, r = 1: block 1 is rows 1..=4 with n = 4, block 2 rows 5..=6, block 3 row 7.
        // A large correction constant exposes the r / min(j, n + 1 - j) dip.
        let b = universal_tau_bounds_with(8, 1, 100.0).unwrap();
        let want = [1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (x, w) in b.tau.iter().zip(want) {
            assert!((x - w).abs() < 1e-15, "{:?}", b.tau);
        }
        let b = universal_tau_bounds(8, 1).unwrap();
        let c = 2f64.ln().powi(3);
        let want = [c / 4.0, c / 4.0, c / 4.0, c / 4.0, c / 2.0, c / 2.0, c, 1.0];
        for (x, w) in b.tau.iter().zip(want) {
            assert!((x - w).abs() < 1e-15, "{:?}", b.tau);
        }
    }

    #[test]
    fn uniform_bounds_give_uniform_probabilities() {
        let p = sampling_distribution(&LevBounds::uniform(10));
        assert!(p.iter().all(|&x| x == 0.1));
        let b = universal_tau_bounds(100, 3).unwrap();
        let s: f64 = sampling_distribution(&b).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plans_are_reproducible() {
        let b = universal_tau_bounds(64, 4).unwrap();
        let p1 = draw_sampling_plan(&b, 50, 9).unwrap();
        let p2 = draw_sampling_plan(&b, 50, 9).unwrap();
        assert_eq!(p1, p2);
        assert_ne!(p1.indices, draw_sampling_plan(&b, 50, 10).unwrap().indices);
    }

    #[test]
    fn apply_sampling_basics() {
        let b = universal_tau_bounds(3, 1).unwrap();
        let plan = draw_sampling_plan(&b, 4, 1).unwrap();
        assert!(apply_sampling(&plan, &[0.0; 3]).unwrap().iter().all(|&x| x == 0.0));
        assert!(apply_sampling(&plan, &[0.0; 4]).is_err());
        // single-draw expectation sum_i p_i (x_i / sqrt(p_i))^2 = ||x||^2
        let x = [0.3, -1.7, 2.2];
        let p = sampling_distribution(&b);
        let e: f64 = (0..3).map(|i| p[i] * x[i] * x[i] / p[i]).sum();
        assert!((e - x.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn full_plan_embeds_exactly() {
        let a = DMatrix::from_fn(12, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let r = subspace_embedding_check(&a, &SamplingPlan::full(12), 0.01, 10, 1).unwrap();
        assert!((r.min_ratio - 1.0).abs() < 1e-12 && (r.max_ratio - 1.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn kernel_directions_are_excluded() {
        let mut a = DMatrix::from_fn(12, 3, |i, j| (i + j) as f64);
        a.set_column(2, &(a.column(0) * 2.0));
        let r = subspace_embedding_check(&a, &SamplingPlan::full(12), 0.01, 0, 1).unwrap();
        assert!(r.excluded >= 1);
        assert!(r.pass);
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = draw_sampling_plan(&universal_tau_bounds(16, 2).unwrap(), 5, 3).unwrap();
        let j = serde_json::to_string(&plan).unwrap();
        for key in ["\"m\"", "\"seed\"", "\"indices\"", "\"probabilities\""] {
            assert!(j.contains(key));
        }
        assert_eq!(serde_json::from_str::<SamplingPlan>(&j).unwrap(), plan);
    }
}
