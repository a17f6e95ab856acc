//! Structure-preserving low-rank approximation of positive semidefinite
//! Toeplitz matrices from a sampled subset of their entries.
//!
//! A symmetric Toeplitz matrix is stored as its first column. Low-rank
//! Toeplitz approximations are kept in Vandermonde form: a set of
//! frequencies in (0, 1/2) with one weight per conjugate pair, so that
//! `T[i][j] = sum_f 2 a_f cos(2 pi f |i - j|)`.
//!
//! [`recover`] reads a few lags of the input through a [`QueryAccess`],
//! fits such a factor by sampled weighted regression and reports exactly
//! which lags it touched. The dense oracles in [`spectral`] and the
//! diagnostics in [`structure`] and [`leverage`] exist to check it.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod instance;
pub mod leverage;
mod linalg;
pub mod recovery;
pub mod spectral;
pub mod structure;
pub mod toeplitz;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{gen_instance, Family, Instance, InstanceSpec};
pub use linalg::SvdScalar;
pub use leverage::{
    apply_sampling, domination_check, draw_sampling_plan, exact_leverage_scores, subspace_embedding_check,
    universal_tau_bounds, DominationReport, EmbeddingReport, LevBounds, SamplingPlan,
};
pub use recovery::{
    evaluate_true_error, recover, Mode, RecoveredFactor, RecoveryConfig, RegressionResult,
    SearchSpace,
};
pub use spectral::{best_rank1_toeplitz_bruteforce, best_rank_k, eig_sym, SpectralSummary};
pub use structure::{BoundReport, Buckets, ClusterApproxParams, FitMethod};
pub use toeplitz::{
    build_symmetric_fourier, frequency_vector, frobenius_via_weighted_column,
    inner_product_magnitude, real_collapsed_fourier, vandermonde_synthesize, weight_vector,
    wrap_distance, FourierFactor, FrequencySet, LagSource, QueryAccess, QueryLedger, SymToeplitz,
    WeightVector,
};
pub use verify::{run_suites, suite_names, SuiteResult, VerifyReport};
