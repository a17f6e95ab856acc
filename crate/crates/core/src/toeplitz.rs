//! Symmetric Toeplitz matrices, off-grid Fourier factors and query accounting.

use std::collections::BTreeSet;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::{cos_turns, sin_turns};

/// Real symmetric Toeplitz matrix stored by its first column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ToeplitzRepr", into = "ToeplitzRepr")]
pub struct SymToeplitz {
    first_column: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ToeplitzRepr {
    d: usize,
    first_column: Vec<f64>,
}

impl TryFrom<ToeplitzRepr> for SymToeplitz {
    type Error = Error;
    fn try_from(r: ToeplitzRepr) -> Result<Self> {
        if r.d != r.first_column.len() {
            return Err(Error::DimMismatch { expected: r.d, found: r.first_column.len() });
        }
        SymToeplitz::new(r.first_column)
    }
}

impl From<SymToeplitz> for ToeplitzRepr {
    fn from(t: SymToeplitz) -> Self {
        ToeplitzRepr { d: t.first_column.len(), first_column: t.first_column }
    }
}

impl SymToeplitz {
    /// Build from a first column. Fails on an empty column.
    pub fn new(first_column: Vec<f64>) -> Result<Self> {
        if first_column.is_empty() {
            return Err(Error::BadShape("Toeplitz dimension must be positive".into()));
        }
        Ok(SymToeplitz { first_column })
    }

    pub fn zeros(d: usize) -> Self {
        SymToeplitz { first_column: vec![0.0; d.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_column[i.abs_diff(j)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.entry(i, j))
    }

    pub fn trace(&self) -> f64 {
        self.dim() as f64 * self.first_column[0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        weighted_norm(&self.first_column, None)
    }

    pub fn is_finite(&self) -> bool {
        self.first_column.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymToeplitz { first_column: self.first_column.iter().map(|x| c * x).collect() }
    }
}

/// Strictly increasing frequencies in the open interval (0, 1/2).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencySet {
    freqs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for FrequencySet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencySet::new(v)
    }
}

impl From<FrequencySet> for Vec<f64> {
    fn from(s: FrequencySet) -> Self {
        s.freqs
    }
}

impl FrequencySet {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        for (i, &f) in freqs.iter().enumerate() {
            if !f.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if f <= 0.0 || f >= 0.5 {
                return Err(Error::InvalidFrequencies(format!("{f} is outside (0, 1/2)")));
            }
            if i > 0 && freqs[i - 1] >= f {
                return Err(Error::InvalidFrequencies("frequencies must be strictly increasing".into()));
            }
        }
        Ok(FrequencySet { freqs })
    }

    pub fn empty() -> Self {
        FrequencySet { freqs: Vec::new() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Fold, clamp and merge arbitrary real frequencies into a valid set.
    pub fn normalized(raw: &[f64], tol: f64) -> Self {
        let pairs: Vec<(f64, f64)> = raw.iter().map(|&f| (f, 0.0)).collect();
        let merged = normalize_pairs(&pairs, tol);
        FrequencySet { freqs: merged.into_iter().map(|p| p.0).collect() }
    }
}

/// Map a real frequency to [0, 1/2] by periodicity and reflection. The
/// column `2 cos(2 pi f t)` is unchanged.
pub fn fold_frequency(f: f64) -> f64 {
    let r = f - f.floor();
    if r > 0.5 {
        1.0 - r
    } else {
        r
    }
}

/// Fold every frequency into [0, 1/2], push the ones within `2 tol` of an
/// endpoint to distance `2 tol`, sort, and merge neighbours closer than
/// `tol` by summing their weights. The merged entry keeps the smaller
/// frequency.
pub fn normalize_pairs(pairs: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let edge = (2.0 * tol).max(1e-12);
    let mut v: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(f, a)| (fold_frequency(f).clamp(edge, 0.5 - edge), a))
        .collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (f, a) in v {
        match out.last_mut() {
            Some(last) if f - last.0 <= tol || f == last.0 => last.1 += a,
            _ => out.push((f, a)),
        }
    }
    out
}

/// Frequencies with one real weight per conjugate pair. Induces the
/// symmetric Toeplitz matrix `F_S diag(a, a) F_S^*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FactorRepr", into = "FactorRepr")]
pub struct FourierFactor {
    d: usize,
    freqs: FrequencySet,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FactorRepr {
    d: usize,
    frequencies: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<FactorRepr> for FourierFactor {
    type Error = Error;
    fn try_from(r: FactorRepr) -> Result<Self> {
        FourierFactor::new(r.d, FrequencySet::new(r.frequencies)?, r.weights)
    }
}

impl From<FourierFactor> for FactorRepr {
    fn from(f: FourierFactor) -> Self {
        FactorRepr { d: f.d, frequencies: f.freqs.freqs, weights: f.weights }
    }
}

impl FourierFactor {
    pub fn new(d: usize, freqs: FrequencySet, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadShape("dimension must be positive".into()));
        }
        if weights.len() != freqs.len() {
            return Err(Error::DimMismatch { expected: freqs.len(), found: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(FourierFactor { d, freqs, weights })
    }

    pub fn zero(d: usize) -> Self {
        FourierFactor { d, freqs: FrequencySet::empty(), weights: Vec::new() }
    }

    /// Build from arbitrary (frequency, weight) pairs; see [`normalize_pairs`].
    pub fn from_pairs(d: usize, pairs: &[(f64, f64)], tol: f64) -> Result<Self> {
        if pairs.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let merged = normalize_pairs(pairs, tol);
        let (f, a): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        FourierFactor::new(d, FrequencySet { freqs: f }, a)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn frequencies(&self) -> &FrequencySet {
        &self.freqs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.freqs.freqs.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_f 2 a_f cos(2 pi f t)`, the lag-t entry of the induced matrix.
    pub fn lag(&self, t: usize) -> f64 {
        self.pairs().map(|(f, a)| 2.0 * a * cos_turns(f * t as f64)).sum()
    }

    pub fn first_column(&self) -> Vec<f64> {
        (0..self.d).map(|t| self.lag(t)).collect()
    }

    /// Union with another factor on the same dimension, merging
    /// frequencies closer than `tol`.
    pub fn merged(&self, other: &FourierFactor, tol: f64) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimMismatch { expected: self.d, found: other.d });
        }
        let pairs: Vec<(f64, f64)> = self.pairs().chain(other.pairs()).collect();
        FourierFactor::from_pairs(self.d, &pairs, tol)
    }
}

/// Diagonal weights turning first-column error into Frobenius error.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub d: usize,
    pub w: Vec<f64>,
}

/// `w_1 = sqrt(d)`, `w_i = sqrt(2 (d - i + 1))` (1-based).
pub fn weight_vector(d: usize) -> WeightVector {
    let w = (0..d)
        .map(|t| if t == 0 { (d as f64).sqrt() } else { (2.0 * (d - t) as f64).sqrt() })
        .collect();
    WeightVector { d, w }
}

#[inline]
pub(crate) fn weight_at(d: usize, t: usize) -> f64 {
    if t == 0 {
        (d as f64).sqrt()
    } else {
        (2.0 * (d - t) as f64).sqrt()
    }
}

fn weighted_norm(a: &[f64], b: Option<&[f64]>) -> f64 {
    let d = a.len();
    let mut s = 0.0;
    for t in 0..d {
        let x = a[t] - b.map_or(0.0, |b| b[t]);
        let w2 = if t == 0 { d as f64 } else { 2.0 * (d - t) as f64 };
        s += w2 * x * x;
    }
    s.sqrt()
}

/// `||W (A_1 - B_1)||_2`, equal to `||A - B||_F`.
pub fn frobenius_via_weighted_column(a: &SymToeplitz, b: &SymToeplitz) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(weighted_norm(&a.first_column, Some(&b.first_column)))
}

/// `v(f)_t = e^{2 pi i f t}` for t = 0..d.
pub fn frequency_vector(f: f64, d: usize) -> Vec<Complex<f64>> {
    (0..d)
        .map(|t| {
            let x = f * t as f64;
            Complex::new(cos_turns(x), sin_turns(x))
        })
        .collect()
}

/// `[v(f_1) .. v(f_s), v(-f_1) .. v(-f_s)]`.
pub fn build_symmetric_fourier(s: &FrequencySet, d: usize) -> Result<DMatrix<Complex<f64>>> {
    if s.is_empty() {
        return Err(Error::EmptyFrequencySet);
    }
    let n = s.len();
    let mut m = DMatrix::zeros(d, 2 * n);
    for (j, &f) in s.as_slice().iter().enumerate() {
        for (t, z) in frequency_vector(f, d).into_iter().enumerate() {
            m[(t, j)] = z;
            m[(t, j + n)] = z.conj();
        }
    }
    Ok(m)
}

/// `F_S R_S`: column j is `2 cos(2 pi f_j t)`.
pub fn real_collapsed_fourier(s: &FrequencySet, d: usize) -> Result<DMatrix<f64>> {
    if s.is_empty() {
        return Err(Error::EmptyFrequencySet);
    }
    let f = s.as_slice();
    Ok(DMatrix::from_fn(d, f.len(), |t, j| 2.0 * cos_turns(f[j] * t as f64)))
}

/// Induced Toeplitz matrix of a factor, summed over both conjugates.
pub fn vandermonde_synthesize(factor: &FourierFactor) -> SymToeplitz {
    let scale: f64 = factor.weights.iter().map(|a| a.abs()).sum();
    let col = (0..factor.d)
        .map(|t| {
            let mut z = Complex::new(0.0, 0.0);
            for (f, a) in factor.pairs() {
                let x = f * t as f64;
                let v = Complex::new(cos_turns(x), sin_turns(x));
                z += (v + v.conj()) * a;
            }
            debug_assert!(z.im.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
            z.re
        })
        .collect();
    SymToeplitz { first_column: col }
}

/// Circular distance `min(|f - g|, 1 - |f - g|)` on the unit torus.
pub fn wrap_distance(f: f64, g: f64) -> f64 {
    let r = (f - g).abs();
    let r = r - r.floor();
    r.min(1.0 - r)
}

/// `|v(f)^* v(g)| = |sin(pi delta d) / sin(pi delta)|` with delta the wrap distance.
pub fn inner_product_magnitude(f: f64, g: f64, d: usize) -> f64 {
    let delta = wrap_distance(f, g);
    if delta == 0.0 {
        return d as f64;
    }
    (sin_turns(0.5 * delta * d as f64) / sin_turns(0.5 * delta)).abs()
}

/// Anything that can answer "what is lag t of the first column".
pub trait LagSource: Sync {
    fn dim(&self) -> usize;
    fn lag(&self, t: usize) -> f64;
}

impl LagSource for SymToeplitz {
    fn dim(&self) -> usize {
        self.first_column.len()
    }
    fn lag(&self, t: usize) -> f64 {
        self.first_column[t]
    }
}

impl LagSource for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }
    fn lag(&self, t: usize) -> f64 {
        self[t]
    }
}

/// Record of which lags were read and how many reads happened.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryLedger {
    read_lags: BTreeSet<usize>,
    total_reads: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub distinct_lags: usize,
    pub total_reads: u64,
}

impl QueryLedger {
    pub fn record(&mut self, t: usize) {
        self.read_lags.insert(t);
        self.total_reads += 1;
    }

    pub fn distinct(&self) -> usize {
        self.read_lags.len()
    }

    pub fn total_reads(&self) -> u64 {
        self.total_reads
    }

    pub fn contains(&self, t: usize) -> bool {
        self.read_lags.contains(&t)
    }

    pub fn lags(&self) -> impl Iterator<Item = usize> + '_ {
        self.read_lags.iter().copied()
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary { distinct_lags: self.distinct(), total_reads: self.total_reads }
    }
}

/// The only path through which recovery touches the input.
pub struct QueryAccess<'a> {
    source: &'a dyn LagSource,
    ledger: QueryLedger,
}

impl<'a> QueryAccess<'a> {
    pub fn new(source: &'a dyn LagSource) -> Self {
        QueryAccess { source, ledger: QueryLedger::default() }
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn read(&mut self, t: usize) -> f64 {
        assert!(t < self.source.dim(), "lag {t} out of range");
        self.ledger.record(t);
        self.source.lag(t)
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frequency_vector_examples() {
        let v = frequency_vector(0.0, 3);
        assert!(v.iter().all(|z| *z == Complex::new(1.0, 0.0)));
        let v = frequency_vector(0.25, 4);
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (z, w) in v.iter().zip(want) {
            assert_eq!((z.re, z.im), w);
        }
        let v = frequency_vector(0.5, 2);
        assert_eq!(v[1].re, -1.0);
        for z in frequency_vector(0.3172, 50) {
            assert!(close(z.norm(), 1.0, 1e-15));
        }
    }

    #[test]
    fn symmetric_fourier_examples() {
        assert_eq!(build_symmetric_fourier(&FrequencySet::empty(), 4), Err(Error::EmptyFrequencySet));
        let s = FrequencySet::new(vec![0.25]).unwrap();
        let f = build_symmetric_fourier(&s, 2).unwrap();
        assert_eq!(f[(1, 0)], Complex::new(0.0, 1.0));
        assert_eq!(f[(1, 1)], Complex::new(0.0, -1.0));
        let s = FrequencySet::new(vec![0.125, 0.25]).unwrap();
        let f = build_symmetric_fourier(&s, 4).unwrap();
        assert_eq!(f.ncols(), 4);
        for j in 0..4 {
            assert_eq!(f[(0, j)], Complex::new(1.0, 0.0));
            let dot: Complex<f64> = f.column(j).iter().map(|z| z.conj() * z).sum();
            assert!(close(dot.re, 4.0, 1e-14));
        }
    }

    #[test]
    fn real_collapsed_examples() {
        let s = FrequencySet::new(vec![0.25]).unwrap();
        let c = real_collapsed_fourier(&s, 3).unwrap();
        assert_eq!(c.as_slice(), &[2.0, 0.0, -2.0]);
        // complex path: F_S R_S sums the two conjugate columns
        let s = FrequencySet::new(vec![0.125]).unwrap();
        let c = real_collapsed_fourier(&s, 8).unwrap();
        let f = build_symmetric_fourier(&s, 8).unwrap();
        for t in 0..8 {
            let z = f[(t, 0)] + f[(t, 1)];
            assert_eq!(c[(t, 0)], z.re);
            assert!(z.im.abs() < 1e-12);
            assert!(close(c[(t, 0)], 2.0 * (std::f64::consts::PI * t as f64 / 4.0).cos(), 1e-14));
        }
    }

    #[test]
    fn synthesize_examples() {
        let s = FrequencySet::new(vec![0.25]).unwrap();
        let t = vandermonde_synthesize(&FourierFactor::new(2, s, vec![1.0]).unwrap());
        assert_eq!(t.first_column(), &[2.0, 0.0]);
    }

    #[test]
    fn weight_vector_examples() {
        let w = weight_vector(3).w;
        assert!(close(w[0], 3f64.sqrt(), 1e-15) && w[1] == 2.0 && close(w[2], 2f64.sqrt(), 1e-15));
        assert_eq!(weight_vector(1).w, vec![1.0]);
        let s: f64 = weight_vector(17).w.iter().map(|x| x * x).sum();
        assert!(close(s, 289.0, 1e-10));
    }

    #[test]
    fn frobenius_examples() {
        let t = SymToeplitz::new(vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(frobenius_via_weighted_column(&t, &t).unwrap(), 0.0);
        assert!(close(frobenius_via_weighted_column(&t, &SymToeplitz::zeros(3)).unwrap(), 4.0, 1e-14));
        let e = frobenius_via_weighted_column(&t, &SymToeplitz::zeros(4));
        assert_eq!(e, Err(Error::DimMismatch { expected: 3, found: 4 }));
    }

    #[test]
    fn wrap_and_inner_product_examples() {
        assert_eq!(wrap_distance(0.1, 0.1), 0.0);
        assert!(close(wrap_distance(-0.45, 0.45), 0.1, 1e-15));
        assert_eq!(wrap_distance(0.0, 0.5), 0.5);
        assert_eq!(inner_product_magnitude(0.2, 0.2, 7), 7.0);
        assert!(inner_product_magnitude(0.1, 0.1 + 1.0 / 16.0, 16) < 1e-12);
        assert!(inner_product_magnitude(0.0, 0.5, 2) < 1e-15);
    }

    #[test]
    fn frequency_set_validation() {
        assert!(FrequencySet::new(vec![0.0]).is_err());
        assert!(FrequencySet::new(vec![0.5]).is_err());
        assert!(FrequencySet::new(vec![0.2, 0.1]).is_err());
        assert!(FrequencySet::new(vec![0.1, 0.1]).is_err());
        assert!(FrequencySet::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn normalize_folds_and_merges() {
        let p = normalize_pairs(&[(0.7, 1.0), (0.3, 2.0), (-0.1, 1.0), (0.0, 5.0)], 1e-3);
        assert_eq!(p.len(), 3);
        assert!(close(p[0].0, 2e-3, 1e-15) && p[0].1 == 5.0);
        assert!(close(p[1].0, 0.1, 1e-15) && p[1].1 == 1.0);
        assert!(close(p[2].0, 0.3, 1e-15) && p[2].1 == 3.0);
    }

    #[test]
    fn json_shapes() {
        let t = SymToeplitz::new(vec![2.0, 1.0]).unwrap();
        let j = serde_json::to_string(&t).unwrap();
        assert_eq!(j, r#"{"d":2,"first_column":[2.0,1.0]}"#);
        assert!(serde_json::from_str::<SymToeplitz>(r#"{"d":3,"first_column":[1.0]}"#).is_err());
        let f = FourierFactor::new(8, FrequencySet::new(vec![0.125]).unwrap(), vec![0.5]).unwrap();
        let j = serde_json::to_string(&f).unwrap();
        assert_eq!(j, r#"{"d":8,"frequencies":[0.125],"weights":[0.5]}"#);
        assert_eq!(serde_json::from_str::<FourierFactor>(&j).unwrap(), f);
    }

    #[test]
    fn ledger_counts() {
        let t = SymToeplitz::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut q = QueryAccess::new(&t);
        assert_eq!(q.read(2), 3.0);
        q.read(2);
        q.read(0);
        let l = q.into_ledger();
        assert_eq!(l.summary(), LedgerSummary { distinct_lags: 2, total_reads: 3 });
        assert!(l.contains(2) && !l.contains(1));
    }
}
