//! Frames, finite unit norm tight frames and 2-summing norms in
//! finite-dimensional Banach spaces.

pub mod construct;
pub mod erasure;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod pi2;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::{CoordFunctional, CoordVector, C64};
pub use spaces::{conjugate_exponent, DualPoints, Field, NormSpec, SpaceSpec};
pub use frames::{
    auerbach_basis, classify, frame_operator, is_schauder, naive_potential_sq, naive_potential_sym,
    trace_lower_bound, Classification, FramePair, FrameSystem, OperatorMatrix,
};
pub use pi2::{
    frame_potential, pi2, pi2_lower, pi2_upper, smoothness_probe, AdmissibleSequence, LowerOptions,
    PietschCertificate, Pi2Options, Pi2Result, SmoothnessReport,
};
pub use construct::{
    auerbach_copies, dft_funtf, ell1_funtf_n_plus_1, ell1_funtf_of_length, ell1_special, funtf_from_diagonal, funtf_of_length, lozanovskii,
    search_funtf, DiagonalTarget, LozFactorization, SearchOptions, SearchOutcome,
};
pub use erasure::{
    erasure_error, erasure_error_with_table, is_erasure_optimal, operator_norm, ErasureOptimality, ErasureReport,
    OperatorNorm, SubsetValue,
};
