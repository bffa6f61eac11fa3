//! Higher-order uncertainty lower bounds from central moments.
//!
//! The variance product of two conjugate variables is bounded below not just
//! by the Heisenberg floor 1/4 but by an infinite series of corrections,
//! each a rational function of the even central moments of one variable's
//! distribution:
//!
//! ```text
//! var(T) var(H) >= (1/4) sum_{k = 1, 3, 5, ...} mu_2 U_k^2 / N_k
//! ```
//!
//! The k = 1 term is exactly 1. Higher terms are built from Hankel-type
//! moment determinants D_2k, Gram-Schmidt squared norms N_k = D_2k/D_2k-4,
//! and recursively defined numerators U_k. This crate computes the series
//! from moment sequences ([`bound`]), produces and converts the moment
//! sequences themselves ([`moments`]), and cross-validates every closed-form
//! identity against explicit finite-dimensional Hilbert-space trajectories
//! ([`oracle`]).
//!
//! Arithmetic is generic over [`scalar::Scalar`]: exact rationals when
//! inputs are rational, `f64` otherwise. The data-parallel entry points
//! (oracle ensembles, parameter sweeps) use rayon when the default
//! `parallel` feature is on and fall back to sequential loops otherwise.

pub mod bound;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod scalar;

pub use bound::{
    bound_series, closed_form_term, gamma_second_order, hankel_determinant, numerator_u,
    orthogonal_norm, projection_coefficient, series_term, BoundError, BoundSeries, BoundTerm,
    BoundValue, TermStatus,
};
pub use moments::{
    central_to_cumulants, cumulants_to_central, moments_of, raw_to_central, validate,
    CumulantSequence, DistributionSpec, MomentError, MomentSequence, ValidityReport,
};
pub use oracle::{
    build_model, cross_validate, derivative_frame, expansion_numerators,
    expectation_and_variance, fisher_information, validate_ensemble, validate_ensemble_seq,
    DerivativeFrame, ModelSpec, OracleError, QuantumModel, SpectrumLevel, ValidationReport,
};
pub use scalar::{Exact, Scalar};
