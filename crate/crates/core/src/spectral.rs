//! Dense full-access oracles: eigendecomposition, optimal rank-k
//! approximation and the brute-force rank-1 Toeplitz optimum.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::toeplitz::SymToeplitz;

/// Largest d accepted by [`best_rank1_toeplitz_bruteforce`].
pub const BRUTE_FORCE_MAX_D: usize = 14;

/// Eigenpairs sorted by eigenvalue, largest first.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    /// Column i pairs with `eigenvalues[i]`; first nonzero entry positive.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralSummary {
    /// `lambda_min >= -1e-9 * lambda_max`.
    pub fn is_psd(&self) -> bool {
        let max = self.eigenvalues.first().copied().unwrap_or(0.0).abs();
        let min = self.eigenvalues.last().copied().unwrap_or(0.0);
        min >= -1e-9 * max
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mut l = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            l.column_mut(j).scale_mut(lam);
        }
        l * u.transpose()
    }
}

/// Eigendecomposition of a symmetric Toeplitz matrix.
pub fn eig_sym(t: &SymToeplitz) -> Result<SpectralSummary> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    eig_sym_dense(&t.to_dense())
}

/// Eigendecomposition of a dense symmetric matrix (lower triangle is read).
pub fn eig_sym_dense(a: &DMatrix<f64>) -> Result<SpectralSummary> {
    if !a.is_square() {
        return Err(Error::BadShape(format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let d = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
        .map(|j| {
            let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[j], v)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    // Break near-ties by lexicographic order of the eigenvectors.
    let scale = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && pairs[end - 1].0 - pairs[end].0 <= tol {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lex_cmp(&x.1, &y.1));
        start = end;
    }

    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = DMatrix::from_fn(d, d, |i, j| pairs[j].1[i]);
    Ok(SpectralSummary { eigenvalues, eigenvectors })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Optimal rank-k approximation and its Frobenius error.
#[derive(Debug, Clone)]
pub struct RankKApprox {
    pub matrix: DMatrix<f64>,
    pub error: f64,
}

/// Best rank-k approximation in Frobenius norm. Keeps the k eigenpairs of
/// largest magnitude, which on PSD input are the top k.
pub fn best_rank_k(t: &SymToeplitz, k: usize) -> Result<RankKApprox> {
    let d = t.dim();
    if k > d {
        return Err(Error::BadRank { k, d });
    }
    let s = eig_sym(t)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| s.eigenvalues[j].abs().total_cmp(&s.eigenvalues[i].abs()));
    let mut m = DMatrix::zeros(d, d);
    for &i in &order[..k] {
        let u = s.eigenvectors.column(i);
        m += s.eigenvalues[i] * u * u.transpose();
    }
    let error = order[k..].iter().map(|&i| s.eigenvalues[i].powi(2)).sum::<f64>().sqrt();
    Ok(RankKApprox { matrix: m, error })
}

/// Best rank-1 Toeplitz approximation `c s s^T` by enumerating sign
/// vectors with `s_0 = +1`. Only patterns whose outer product is Toeplitz
/// are admissible; for each the optimal scalar is `s^T T s / d^2`.
pub fn best_rank1_toeplitz_bruteforce(t: &SymToeplitz) -> Result<(SymToeplitz, f64)> {
    let d = t.dim();
    if d > BRUTE_FORCE_MAX_D {
        return Err(Error::TooLargeForBruteForce { d, max: BRUTE_FORCE_MAX_D });
    }
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let dense = t.to_dense();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (d - 1)) {
        let s: Vec<f64> = (0..d)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let step = if d > 1 { s[1] * s[0] } else { 1.0 };
        if (1..d).any(|i| s[i] * s[i - 1] != step) {
            continue;
        }
        let mut sts = 0.0;
        for i in 0..d {
            for j in 0..d {
                sts += s[i] * dense[(i, j)] * s[j];
            }
        }
        let c = sts / (d * d) as f64;
        let col: Vec<f64> = (0..d).map(|j| c * s[0] * s[j]).collect();
        let err = crate::toeplitz::frobenius_via_weighted_column(t, &SymToeplitz::new(col.clone())?)?;
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, col));
        }
    }
    let (err, col) = best.expect("at least the all-ones pattern is admissible");
    Ok((SymToeplitz::new(col)?, err))
}
