// Small dense helpers on top of nalgebra.
//
// SVDs go through faer: nalgebra's bidiagonal SVD returns left vectors
// outside the column space for some rank-deficient inputs.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

/// Thin SVD `a = u diag(s) vt` with `p = min(rows, cols)` triplets,
/// singular values nonincreasing.
pub struct ThinSvd<T> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub vt: DMatrix<T>,
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for nalgebra::Complex<f64> {}
}

/// Scalars with an SVD backend (`f64` and `Complex<f64>`).
pub trait SvdScalar: ComplexField<RealField = f64> + Copy + sealed::Sealed {
    fn thin_svd(a: &DMatrix<Self>) -> ThinSvd<Self>;
}

macro_rules! faer_svd {
    ($t:ty, $re:expr) => {
        impl SvdScalar for $t {
            fn thin_svd(a: &DMatrix<$t>) -> ThinSvd<$t> {
                let (rows, cols) = a.shape();
                let p = rows.min(cols);
                if p == 0 {
                    return ThinSvd { u: DMatrix::zeros(rows, p), s: Vec::new(), vt: DMatrix::zeros(p, cols) };
                }
                let m = faer::Mat::<$t>::from_fn(rows, cols, |i, j| a[(i, j)]);
                let svd = m.thin_svd().expect("svd did not converge");
                let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
                ThinSvd {
                    u: DMatrix::from_fn(rows, p, |i, k| u[(i, k)]),
                    s: (0..p).map(|k| $re(s[k])).collect(),
                    vt: DMatrix::from_fn(p, cols, |k, j| ComplexField::conjugate(v[(j, k)])),
                }
            }
        }
    };
}

faer_svd!(f64, |x: f64| x);
faer_svd!(Complex<f64>, |x: Complex<f64>| x.re);

pub fn thin_svd<T: SvdScalar>(a: &DMatrix<T>) -> ThinSvd<T> {
    T::thin_svd(a)
}

/// Minimum-norm least squares through a truncated SVD. Singular values
/// below `rel_cutoff * sigma_max` are dropped. Returns (x, numerical rank).
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> (DVector<f64>, usize) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (DVector::zeros(n), 0);
    }
    let svd = thin_svd(a);
    let smax = svd.s.iter().cloned().fold(0.0, f64::max);
    let mut x = DVector::zeros(n);
    let mut rank = 0;
    if smax == 0.0 {
        return (x, 0);
    }
    for (k, &s) in svd.s.iter().enumerate() {
        if s > rel_cutoff * smax {
            rank += 1;
            let c = svd.u.column(k).dot(b) / s;
            x.axpy(c, &svd.vt.row(k).transpose(), 1.0);
        }
    }
    (x, rank)
}

/// Orthonormal basis of the column space, truncating at `rel_cutoff * sigma_max`.
pub fn orthonormal_basis<T: SvdScalar>(a: &DMatrix<T>, rel_cutoff: f64) -> DMatrix<T> {
    let svd = thin_svd(a);
    let smax = svd.s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > rel_cutoff * smax)
        .map(|(k, _)| k)
        .collect();
    svd.u.select_columns(keep.iter())
}

pub fn spectral_norm<T: SvdScalar>(a: &DMatrix<T>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    thin_svd(a).s.iter().cloned().fold(0.0, f64::max)
}
