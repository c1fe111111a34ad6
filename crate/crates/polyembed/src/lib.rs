//! Exact symbolic computation for subrings of univariate polynomial rings.
//!
//! Everything here is exact: coefficients live in towers of fields built
//! over the rationals by algebraic and transcendental extensions, and no
//! floating point is used anywhere.
//!
//! The crate provides, bottom-up:
//!
//! * [`fields`] — field towers over `Q`, canonical elements, power and
//!   root extraction, irreducibility testing, specializations and
//!   embeddings between towers.
//! * [`unipoly`] — dense univariate polynomials and rational functions
//!   over a tower, with gcd, resultant-free exact division, functional
//!   decomposition, and coefficient maps.
//! * [`semigroup`] — numerical semigroups: minimal generators, the
//!   Frobenius number and the conductor exponent.
//! * [`graded`] — finitely generated graded subalgebras `R ⊆ K[s]`:
//!   graded pieces, realized degrees, subduction against a filtration
//!   basis, and lead-term closure.
//! * [`embed`] — construction and verification of degree-preserving
//!   embeddings of a subalgebra into a polynomial ring over a smaller
//!   coefficient field, with machine-checkable certificates.
//! * [`normalize`] — one-variable subfield generators, the polynomial
//!   normalization of a subalgebra, and conductor ideals.
//! * [`mpoly`] / [`lnd`] — sparse multivariate polynomials, derivations,
//!   local nilpotency analysis, slice expansions, extension of a
//!   derivation to the normalization, and a cancellation trace.
//! * [`cli`] — a line-oriented problem-file format and a JSON report
//!   emitter used by the `polyembed` binary.
//!
//! The `examples/` directory contains one runnable walkthrough per major
//! capability; start with `cargo run --example embed_number_field`.

pub mod fields;
pub mod unipoly;
pub(crate) mod intutil;
pub(crate) mod linalg;
pub mod semigroup;
pub mod graded;
pub mod embed;
pub mod normalize;
pub mod mpoly;
pub mod lnd;
pub mod cli;

pub use embed::{
    construct_embedding, discover_coefficient_field, jacobian_trdeg, verify_certificate,
    CoefficientFieldReport, CoefficientMap, DetectedGenerator, EmbedError, EmbeddingCase,
    EmbeddingCertificate, EmbeddingProblem, LeadRef, RejectedPoint, VerificationReport,
};
pub use fields::{FieldElement, FieldError, FieldTower};
pub use normalize::{
    conductor, conductor_extension_check, luroth_generator, normalize_curve, ConductorResult,
    ExtensionConductorCheck, NormalizationResult, NormalizeError,
};
pub use graded::{
    GenExpr, GradedError, GradedPiece, SagbiOutcome, SubalgebraPresentation, SubductOutcome,
};
pub use lnd::{
    cancellation_trace, conductor_stability, default_nilpotency_bound, df_in_fb_check,
    extend_to_normalization, is_locally_nilpotent, ml_intersection, slice_expansion,
    CancellationTrace, DivisibilityConclusion, LndError, NilpotencyVerdict,
    NormalizationExtension, PolyDerivation, SliceCoefficient, SliceData, StabilityVerdict,
    TraceStep,
};
pub use mpoly::{MPoly, MPolyRing};
pub use semigroup::{NumericalSemigroup, SemigroupError};
pub use unipoly::{PolyError, RationalFunction, UniPoly};
