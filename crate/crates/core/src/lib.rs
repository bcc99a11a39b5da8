//! Constructive norm-attaining corrections for operators `C(K) → Y` on a
//! finite discrete `K`, with `Y` a complex `ℓ_p^m` space.
//!
//! Given a unit operator `T` that almost attains its norm at a unit `f0`,
//! [`bpb_correct`] builds a nearby operator `S` that attains its norm at a
//! nearby `f3`, and returns a certificate listing every intermediate
//! inequality together with its numerical slack.

// NaN-rejecting checks are written as `!(x > y)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpbcorrect;
mod circle;
pub mod cmodulus;
pub mod coperator;
pub mod cspace;
pub mod error;
pub mod harness;
pub mod measures;

pub use bpbcorrect::{
    bpb_correct, tail_bound_check, verify_certificate, Certificate, CertificateEntry,
    CertificateMeta, CertificateOutputs, Correction, CorrectionConfig, Relation, TailReport, Trace,
    VerificationReport, CERT_TOL, PROOF_LABELS,
};
pub use cmodulus::{
    circle_sup, delta_complex_line, delta_hilbert, estimate_delta, parameter_pack, DeltaProfile,
    EstimatorConfig, ParameterPack, ProfileKind, ProfileSpec,
};
pub use coperator::{
    adjoint_measure, apply, op_norm, op_norm_grid, op_norm_grid_refined, op_norm_with_hints,
    project_columns, CKOperator, NormResult, OracleConfig,
};
pub use cspace::{
    dual_norm, lemma_basic_l_bound, lp_norm, norming_functional, phase, truncate_disc,
    truncate_scalar, ComplexScalar, ComplexVec, Exponent, SpaceDescriptor,
};
pub use error::{Error, Result};
pub use measures::{polar_decompose, variation_on, FiniteMeasure, PointSet, PolarDecomposition};
