//! Sublinear-query recovery: sampled weighted regression over candidate
//! frequency sets, a constant-factor stage and a residual refinement stage.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::leverage::{draw_sampling_plan, universal_tau_bounds, SamplingPlan};
use crate::linalg::lstsq;
use crate::toeplitz::{
    frobenius_via_weighted_column, vandermonde_synthesize, weight_at, FourierFactor,
    FrequencySet, LagSource, QueryAccess, QueryLedger, SymToeplitz,
};
use crate::trig::cos_turns;

/// Largest `|centers|^r` an exhaustive stage may face.
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Greedy,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "greedy" => Ok(Mode::Greedy),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

/// Candidate frequencies: half-grid centers, each expanded to
/// `center +- j gamma` for `j = 1..=r2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub d: usize,
    pub r1: usize,
    pub r2: usize,
    pub gamma: f64,
    pub centers: Vec<f64>,
}

impl SearchSpace {
    pub fn new(d: usize, r1: usize, r2: usize, gamma: f64) -> Result<Self> {
        if d < 2 || r2 == 0 || !(gamma > 0.0) {
            return Err(Error::InvalidConfig("search space needs d >= 2, r2 >= 1, gamma > 0".into()));
        }
        let centers = (0..d)
            .map(|j| (2 * j + 1) as f64 / (2.0 * d as f64))
            .take_while(|&c| c < 0.5)
            .collect();
        Ok(SearchSpace { d, r1, r2, gamma, centers })
    }

    /// Same grid with a different center budget.
    pub fn with_budget(&self, r1: usize) -> Self {
        SearchSpace { r1, ..self.clone() }
    }

    pub fn merge_tol(&self) -> f64 {
        self.gamma / 4.0
    }

    /// Raw expansion of one center, before folding and merging.
    pub fn expand(&self, center: usize) -> Vec<f64> {
        let c = self.centers[center];
        (1..=self.r2)
            .flat_map(|j| [c - j as f64 * self.gamma, c + j as f64 * self.gamma])
            .collect()
    }

    /// `S(B)` for a set of center indices.
    pub fn frequencies(&self, centers: &[usize]) -> FrequencySet {
        let raw: Vec<f64> = centers.iter().flat_map(|&c| self.expand(c)).collect();
        FrequencySet::normalized(&raw, self.merge_tol())
    }

    /// `|centers|^r1`.
    pub fn exhaustive_size(&self) -> f64 {
        (self.centers.len() as f64).powi(self.r1 as i32)
    }
}

/// Every nonempty set of at most `r1` distinct centers, in lexicographic
/// order. Multisets of size r1 collapse onto these.
pub fn enumerate_candidates(space: &SearchSpace) -> Result<Vec<Vec<usize>>> {
    if space.exhaustive_size() > EXHAUSTIVE_LIMIT {
        return Err(Error::ExplosionGuard { candidates: space.exhaustive_size(), limit: EXHAUSTIVE_LIMIT });
    }
    let n = space.centers.len();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for c in start..n {
            cur.push(c);
            out.push(cur.clone());
            if left > 1 {
                rec(c + 1, n, left - 1, cur, out);
            }
            cur.pop();
        }
    }
    if space.r1 > 0 {
        rec(0, n, space.r1, &mut cur, &mut out);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub centers: Vec<usize>,
    pub frequencies: FrequencySet,
    pub coefficients: Vec<f64>,
    pub sampled_residual: f64,
    /// Fewer distinct sampled rows than unknowns; solved in minimum-norm sense.
    pub underdetermined: bool,
    pub rank: usize,
}

impl RegressionResult {
    pub fn factor(&self, d: usize) -> Result<FourierFactor> {
        FourierFactor::new(d, self.frequencies.clone(), self.coefficients.clone())
    }

    // Determined before underdetermined, then residual, then frequencies.
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.underdetermined
            .cmp(&other.underdetermined)
            .then(self.sampled_residual.total_cmp(&other.sampled_residual))
            .then_with(|| lex(self.frequencies.as_slice(), other.frequencies.as_slice()))
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Sampled rows of `W T_1` shared by every candidate of a stage.
#[derive(Debug, Clone)]
pub struct SampledProblem {
    pub d: usize,
    pub rows: Vec<usize>,
    /// `(m p_{i_t})^{-1/2} w_{i_t}`.
    pub row_weights: Vec<f64>,
    pub target: DVector<f64>,
    pub distinct_rows: usize,
    pub cutoff: f64,
}

impl SampledProblem {
    /// `values[t]` is `T_1[plan.indices[t]]`.
    pub fn new(plan: &SamplingPlan, values: &[f64], cutoff: f64) -> Result<Self> {
        if values.len() != plan.m {
            return Err(Error::DimMismatch { expected: plan.m, found: values.len() });
        }
        let row_weights: Vec<f64> =
            plan.indices.iter().enumerate().map(|(t, &i)| plan.scale(t) * weight_at(plan.d, i)).collect();
        let target = DVector::from_iterator(plan.m, values.iter().zip(&row_weights).map(|(v, w)| v * w));
        Ok(SampledProblem {
            d: plan.d,
            rows: plan.indices.clone(),
            row_weights,
            target,
            distinct_rows: plan.distinct_rows(),
            cutoff,
        })
    }

    /// Read the plan's lags through the query layer.
    pub fn read(access: &mut QueryAccess<'_>, plan: &SamplingPlan, cutoff: f64) -> Result<(Self, Vec<f64>)> {
        if access.dim() != plan.d {
            return Err(Error::DimMismatch { expected: plan.d, found: access.dim() });
        }
        let values: Vec<f64> = plan.indices.iter().map(|&i| access.read(i)).collect();
        Ok((SampledProblem::new(plan, &values, cutoff)?, values))
    }

    fn design(&self, s: &FrequencySet) -> DMatrix<f64> {
        let f = s.as_slice();
        DMatrix::from_fn(self.rows.len(), f.len(), |t, j| {
            self.row_weights[t] * 2.0 * cos_turns(f[j] * self.rows[t] as f64)
        })
    }

    /// Sampled residual of a fixed factor.
    pub fn residual_of(&self, factor: &FourierFactor) -> f64 {
        self.rows
            .iter()
            .zip(&self.row_weights)
            .zip(self.target.iter())
            .map(|((&i, &w), &b)| (w * factor.lag(i) - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn solve(&self, s: &FrequencySet) -> RegressionResult {
        let n = s.len();
        if n == 0 {
            return RegressionResult {
                centers: Vec::new(),
                frequencies: s.clone(),
                coefficients: Vec::new(),
                sampled_residual: self.target.norm(),
                underdetermined: false,
                rank: 0,
            };
        }
        let a = self.design(s);
        let (x, rank) = lstsq(&a, &self.target, self.cutoff);
        let sampled_residual = (&a * &x - &self.target).norm();
        RegressionResult {
            centers: Vec::new(),
            frequencies: s.clone(),
            coefficients: x.iter().copied().collect(),
            sampled_residual,
            underdetermined: self.distinct_rows < n,
            rank,
        }
    }

    fn solve_centers(&self, space: &SearchSpace, centers: &[usize]) -> RegressionResult {
        let mut r = self.solve(&space.frequencies(centers));
        r.centers = centers.to_vec();
        r
    }
}

/// Minimise `||S W F_S R_S a - S W T_1||_2` over real a.
pub fn solve_sampled_regression(
    s: &FrequencySet,
    plan: &SamplingPlan,
    sampled_b: &[f64],
    cutoff: f64,
) -> Result<RegressionResult> {
    if sampled_b.len() != plan.m {
        return Err(Error::DimMismatch { expected: plan.m, found: sampled_b.len() });
    }
    // sampled_b already carries the sampling scale; strip it back to lag values
    let values: Vec<f64> = sampled_b
        .iter()
        .enumerate()
        .map(|(t, &b)| b / (plan.scale(t) * weight_at(plan.d, plan.indices[t])))
        .collect();
    Ok(SampledProblem::new(plan, &values, cutoff)?.solve(s))
}

fn best_of(results: impl ParallelIterator<Item = RegressionResult>) -> Option<RegressionResult> {
    results.reduce_with(|a, b| if b.key_cmp(&a) == Ordering::Less { b } else { a })
}

/// Argmin of the sampled residual over all candidates of the space, plus
/// the zero candidate when `include_zero`.
pub fn exhaustive_search(problem: &SampledProblem, space: &SearchSpace, include_zero: bool) -> Result<RegressionResult> {
    let mut cands = enumerate_candidates(space)?;
    if include_zero || cands.is_empty() {
        cands.insert(0, Vec::new());
    }
    Ok(best_of(cands.par_iter().map(|c| problem.solve_centers(space, c))).expect("nonempty"))
}

fn improves(new: &RegressionResult, old: &RegressionResult, scale: f64) -> bool {
    !new.underdetermined && new.sampled_residual < old.sampled_residual - 1e-12 * scale
}

/// Add the center that most reduces the sampled residual, `budget` rounds,
/// then one sweep trying to swap each chosen center for a better one.
/// Stops early when nothing improves or the next set would be underdetermined.
pub fn greedy_search(problem: &SampledProblem, space: &SearchSpace, budget: usize) -> RegressionResult {
    let scale = problem.target.norm();
    let n = space.centers.len();
    let mut cur = problem.solve_centers(space, &[]);
    for _ in 0..budget {
        let chosen = cur.centers.clone();
        let best = best_of((0..n).into_par_iter().filter(|c| !chosen.contains(c)).map(|c| {
            let mut s = chosen.clone();
            s.push(c);
            s.sort_unstable();
            problem.solve_centers(space, &s)
        }));
        match best {
            Some(b) if improves(&b, &cur, scale) => cur = b,
            _ => break,
        }
    }
    for pos in 0..cur.centers.len() {
        let chosen = cur.centers.clone();
        let best = best_of((0..n).into_par_iter().filter(|c| !chosen.contains(c)).map(|c| {
            let mut s = chosen.clone();
            s[pos] = c;
            s.sort_unstable();
            problem.solve_centers(space, &s)
        }));
        if let Some(b) = best {
            if improves(&b, &cur, scale) {
                cur = b;
            }
        }
    }
    cur
}

/// User-facing knobs. `None` fields take their documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub mode: Mode,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub r1: Option<usize>,
    pub r2: Option<usize>,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub cutoff: f64,
    pub project_psd: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            k: 1,
            eps: 0.5,
            delta: 1e-3,
            mode: Mode::Greedy,
            m1: None,
            m2: None,
            r1: None,
            r2: None,
            gamma: None,
            seed: 0,
            cutoff: 1e-12,
            project_psd: false,
        }
    }
}

/// Concrete values used by a run, echoed in the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub d: usize,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub mode: Mode,
    pub m1: usize,
    pub m2: usize,
    pub r1: usize,
    pub r2: usize,
    pub gamma: f64,
    pub seed: u64,
    pub stage2_seed: u64,
    pub cutoff: f64,
    pub project_psd: bool,
    pub centers: usize,
    /// Column counts the two stages' leverage bounds are built for.
    pub bound_rank: [usize; 2],
}

fn ceil_log2(d: usize) -> usize {
    (usize::BITS - (d.max(2) - 1).leading_zeros()) as usize
}

fn bound_rank(d: usize, centers: usize, r2: usize) -> usize {
    (8 * centers.max(1) * r2).min(d).max(1)
}

impl RecoveryConfig {
    /// Fill in defaults for dimension d:
    /// `r1 = k ceil(log2 d)`, `r2 = min(ceil(log2 d + log2(1/delta)), m1 / 4k)`,
    /// `gamma = 1 / (d r2)`, `m1 = min(d, ceil(16 total ln(1/eta)))` with
    /// `eta = 1 / (100 |centers|^r1)` and `ln(1/eta) <= 64`, `m2 = min(d, 4 m1)`.
    pub fn resolve(&self, d: usize) -> Result<ResolvedConfig> {
        if d < 2 {
            return Err(Error::InvalidConfig("recovery needs d >= 2".into()));
        }
        if !(self.eps > 0.0) || !(self.delta > 0.0 && self.delta < 1.0) || !(self.cutoff >= 0.0) {
            return Err(Error::InvalidConfig("need eps > 0, 0 < delta < 1, cutoff >= 0".into()));
        }
        let lg = ceil_log2(d);
        let r1 = self.r1.unwrap_or(self.k * lg);
        let mut r2 = self.r2.unwrap_or(((d as f64).log2() + (1.0 / self.delta).log2()).ceil() as usize).max(1);
        let m1 = match self.m1 {
            Some(m) => m,
            None => {
                let gamma = self.gamma.unwrap_or(1.0 / (d as f64 * r2 as f64));
                let centers = SearchSpace::new(d, r1, r2, gamma)?.centers.len();
                let total = universal_tau_bounds(d, bound_rank(d, r1, r2))?.total;
                let log_eta = (100f64.ln() + r1 as f64 * (centers as f64).ln()).min(64.0);
                ((16.0 * total * log_eta).ceil() as usize).min(d)
            }
        };
        // Default expansion small enough that k expanded centers use at most
        // half of the stage-1 draws.
        if self.r2.is_none() {
            let cap = (m1 / (4 * self.k.max(1))).max(1);
            r2 = r2.min(cap);
        }
        let gamma = self.gamma.unwrap_or(1.0 / (d as f64 * r2 as f64));
        if !(gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be positive".into()));
        }
        let centers = SearchSpace::new(d, r1, r2, gamma)?.centers.len();
        let ranks = [bound_rank(d, r1, r2), bound_rank(d, 2 * r1, r2)];
        let m2 = self.m2.unwrap_or((4 * m1).min(d));
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidConfig("sample counts must be positive".into()));
        }
        Ok(ResolvedConfig {
            d,
            k: self.k,
            eps: self.eps,
            delta: self.delta,
            mode: self.mode,
            m1,
            m2,
            r1,
            r2,
            gamma,
            seed: self.seed,
            stage2_seed: self.seed ^ 0x9E37_79B9_7F4A_7C15,
            cutoff: self.cutoff,
            project_psd: self.project_psd,
            centers,
            bound_rank: ranks,
        })
    }
}

/// A stage's chosen regression with the plan and the lag values it read.
#[derive(Debug, Clone)]
pub struct StageResult {
    pub result: RegressionResult,
    pub plan: SamplingPlan,
    pub values: Vec<f64>,
    pub problem: SampledProblem,
}

fn search(problem: &SampledProblem, space: &SearchSpace, mode: Mode, include_zero: bool) -> Result<RegressionResult> {
    match mode {
        Mode::Exhaustive => exhaustive_search(problem, space, include_zero),
        Mode::Greedy => Ok(greedy_search(problem, space, space.r1)),
    }
}

/// One plan of m1 draws from the universal bounds; the candidate with the
/// smallest sampled residual wins.
pub fn stage1_constant(access: &mut QueryAccess<'_>, space: &SearchSpace, cfg: &ResolvedConfig) -> Result<StageResult> {
    if cfg.mode == Mode::Exhaustive && space.exhaustive_size() > EXHAUSTIVE_LIMIT {
        return Err(Error::ExplosionGuard { candidates: space.exhaustive_size(), limit: EXHAUSTIVE_LIMIT });
    }
    let bounds = universal_tau_bounds(cfg.d, cfg.bound_rank[0])?;
    let plan = draw_sampling_plan(&bounds, cfg.m1, cfg.seed)?;
    let (problem, values) = SampledProblem::read(access, &plan, cfg.cutoff)?;
    let result = search(&problem, space, cfg.mode, false)?;
    Ok(StageResult { result, plan, values, problem })
}

/// Fresh plan of m2 draws; fit the residual `T_1 - T~_1` at the sampled
/// lags over the doubled space, the zero candidate included.
pub fn stage2_refine(
    access: &mut QueryAccess<'_>,
    stage1: &StageResult,
    space2: &SearchSpace,
    cfg: &ResolvedConfig,
) -> Result<StageResult> {
    if cfg.mode == Mode::Exhaustive && space2.exhaustive_size() > EXHAUSTIVE_LIMIT {
        return Err(Error::ExplosionGuard { candidates: space2.exhaustive_size(), limit: EXHAUSTIVE_LIMIT });
    }
    let bounds = universal_tau_bounds(cfg.d, cfg.bound_rank[1])?;
    let plan = draw_sampling_plan(&bounds, cfg.m2, cfg.stage2_seed)?;
    let f1 = stage1.result.factor(cfg.d)?;
    let values: Vec<f64> = plan.indices.iter().map(|&i| access.read(i)).collect();
    let resid: Vec<f64> = plan.indices.iter().zip(&values).map(|(&i, v)| v - f1.lag(i)).collect();
    let problem = SampledProblem::new(&plan, &resid, cfg.cutoff)?;
    let result = search(&problem, space2, cfg.mode, true)?;
    Ok(StageResult { result, plan, values, problem })
}

/// Output of [`recover`].
#[derive(Debug, Clone, Serialize)]
pub struct RecoveredFactor {
    pub factor: FourierFactor,
    #[serde(serialize_with = "ledger_summary")]
    pub ledger: QueryLedger,
    pub stage_errors: [f64; 2],
    pub stage2_fallback: bool,
    pub config: ResolvedConfig,
}

fn ledger_summary<S: Serializer>(l: &QueryLedger, s: S) -> std::result::Result<S::Ok, S::Error> {
    l.summary().serialize(s)
}

// Clip negative weights and refit the survivors until none is negative.
fn project_nonneg(problem: &SampledProblem, factor: &FourierFactor) -> Result<FourierFactor> {
    let mut freqs: Vec<f64> = factor.frequencies().as_slice().to_vec();
    loop {
        let s = FrequencySet::new(freqs.clone())?;
        let r = problem.solve(&s);
        if r.coefficients.iter().all(|&a| a >= 0.0) {
            return r.factor(problem.d);
        }
        let keep: Vec<f64> =
            freqs.iter().zip(&r.coefficients).filter(|(_, &a)| a > 0.0).map(|(f, _)| *f).collect();
        if keep.is_empty() {
            return Ok(FourierFactor::zero(problem.d));
        }
        freqs = keep;
    }
}

/// Two-stage recovery reading `T_1` only through a [`QueryAccess`].
pub fn recover(source: &dyn LagSource, cfg: &RecoveryConfig) -> Result<RecoveredFactor> {
    let d = source.dim();
    let rc = cfg.resolve(d)?;
    let space = SearchSpace::new(d, rc.r1, rc.r2, rc.gamma)?;
    let space2 = space.with_budget(2 * rc.r1);
    let mut access = QueryAccess::new(source);

    let s1 = stage1_constant(&mut access, &space, &rc)?;
    let s2 = stage2_refine(&mut access, &s1, &space2, &rc)?;

    let f1 = s1.result.factor(d)?;
    let f2 = s2.result.factor(d)?;
    let pairs: Vec<(f64, f64)> = f1.pairs().chain(f2.pairs()).collect();
    let union = FourierFactor::from_pairs(d, &pairs, space.merge_tol())?;

    // Holdout on the stage-1 lags, already read: keep a' = 0 if the union does worse there.
    let fallback = s1.problem.residual_of(&union) > s1.result.sampled_residual;
    let mut factor = if fallback { f1 } else { union };
    let stage2_error = if fallback { s2.problem.target.norm() } else { s2.result.sampled_residual };

    if rc.project_psd && factor.weights().iter().any(|&a| a < 0.0) {
        let p = SampledProblem::new(&s2.plan, &s2.values, rc.cutoff)?;
        factor = project_nonneg(&p, &factor)?;
    }
    Ok(RecoveredFactor {
        factor,
        ledger: access.into_ledger(),
        stage_errors: [s1.result.sampled_residual, stage2_error],
        stage2_fallback: fallback,
        config: rc,
    })
}

/// `||T - T~||_F` with full access; never touches a ledger.
pub fn evaluate_true_error(t: &SymToeplitz, factor: &FourierFactor) -> Result<f64> {
    if t.dim() != factor.dim() {
        return Err(Error::DimMismatch { expected: t.dim(), found: factor.dim() });
    }
    frobenius_via_weighted_column(t, &vandermonde_synthesize(factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        let s = SearchSpace::new(6, 1, 2, 0.01).unwrap();
        assert_eq!(s.centers.len(), 3);
        assert_eq!(enumerate_candidates(&s).unwrap().len(), 3);
        assert_eq!(enumerate_candidates(&s.with_budget(2)).unwrap().len(), 6);
        for c in enumerate_candidates(&s.with_budget(2)).unwrap() {
            let f = s.frequencies(&c);
            assert!(f.as_slice().iter().all(|&x| x > 0.0 && x < 0.5));
            assert!(f.len() <= 2 * c.len() * s.r2);
        }
        let big = SearchSpace::new(4096, 3, 2, 1e-4).unwrap();
        assert!(matches!(enumerate_candidates(&big), Err(Error::ExplosionGuard { .. })));
    }

    #[test]
    fn expansion_stays_inside() {
        let d = 64;
        let s = SearchSpace::new(d, 1, 8, 1.0 / (d as f64 * 8.0)).unwrap();
        for c in 0..s.centers.len() {
            let f = s.frequencies(&[c]);
            assert!(f.len() >= 8, "{c}: {}", f.len());
        }
    }

    #[test]
    fn full_plan_recovers_weights() {
        let d = 32;
        let s = FrequencySet::new(vec![0.11, 0.27, 0.4]).unwrap();
        let truth = FourierFactor::new(d, s.clone(), vec![1.0, 0.5, 2.0]).unwrap();
        let plan = SamplingPlan::full(d);
        let p = SampledProblem::new(&plan, &truth.first_column(), 1e-12).unwrap();
        let r = p.solve(&s);
        for (a, b) in r.coefficients.iter().zip(truth.weights()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(r.sampled_residual < 1e-9);
        // full plan: sampled residual is the true Frobenius error
        let other = FrequencySet::new(vec![0.11, 0.3]).unwrap();
        let r = p.solve(&other);
        let err = evaluate_true_error(&vandermonde_synthesize(&truth), &r.factor(d).unwrap()).unwrap();
        assert!((r.sampled_residual - err).abs() < 1e-9 * err);
    }

    #[test]
    fn orthogonal_projection() {
        let d = 16;
        let s = FrequencySet::new(vec![2.0 / 16.0, 5.0 / 16.0]).unwrap();
        let col: Vec<f64> = (0..d).map(|t| ((t * 7 % 5) as f64) - 2.0).collect();
        let plan = SamplingPlan::full(d);
        let sb: Vec<f64> = (0..d).map(|t| col[t] * weight_at(d, t)).collect();
        let r = solve_sampled_regression(&s, &plan, &sb, 1e-12).unwrap();
        let a = crate::toeplitz::real_collapsed_fourier(&s, d).unwrap();
        for j in 0..2 {
            let wc: Vec<f64> = (0..d).map(|t| a[(t, j)] * weight_at(d, t)).collect();
            let num: f64 = wc.iter().zip(&sb).map(|(x, y)| x * y).sum();
            let den: f64 = wc.iter().map(|x| x * x).sum();
            assert!((r.coefficients[j] - num / den).abs() < 1e-10);
        }
    }

    #[test]
    fn greedy_budget_zero_is_empty() {
        let d = 16;
        let plan = SamplingPlan::full(d);
        let p = SampledProblem::new(&plan, &vec![1.0; d], 1e-12).unwrap();
        let s = SearchSpace::new(d, 0, 2, 1.0 / 32.0).unwrap();
        assert!(greedy_search(&p, &s, 0).frequencies.is_empty());
    }

    #[test]
    fn zero_rank_target_gives_zero_factor() {
        let t = SymToeplitz::new(vec![3.0, 1.0, 0.5, 0.1, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let cfg = RecoveryConfig { k: 0, m1: Some(8), m2: Some(8), ..Default::default() };
        let r = recover(&t, &cfg).unwrap();
        assert!(r.factor.is_empty());
        let e = evaluate_true_error(&t, &r.factor).unwrap();
        assert!((e - t.frobenius_norm()).abs() < 1e-12);
    }
}
