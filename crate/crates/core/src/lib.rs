//! An exact-arithmetic laboratory for subspace-hypercyclic operators on
//! sequence spaces.
//!
//! Everything runs over the dyadic rationals p·2^(−e): the operators in
//! play (shift perturbations of the identity, weighted shifts with
//! power-of-two weights) keep that ring closed under application, so
//! orbits, norms, and distances are computed exactly and every inequality
//! in a report is a certified integer comparison, not a float comparison.
//!
//! The pieces:
//!
//! - [`dyadic`]: the scalar ring, with exact comparisons against powers
//!   of two;
//! - [`vector`]: finitely supported sequences and their ℓ¹/sup norms;
//! - [`subspace`]: support-pattern subspaces (odd coordinates, arithmetic
//!   progressions, explicit sets) acting as the closed subspace M;
//! - [`operator`]: closed expression trees for the operators under study,
//!   with exact application, power iteration, kernel probing, and norm
//!   bounds;
//! - [`construction`]: the explicit basis-perturbation operator
//!   T = I + Σ 2^(−n)·x*_{n+1} ⊗ x_n, its companion shift S, the
//!   relabeling map between them, and quasiconjugacy/invariance checks;
//! - [`criterion`]: the subspace-hypercyclicity criterion: condition
//!   checks, greedy subsequence selection, construction of a certified
//!   approximate hypercyclic vector, and independent certificate
//!   verification, plus a checker for the older kernel criterion;
//! - [`enumerate`]: a deterministic enumeration of a countable dense
//!   subset of a subspace, so "the first n targets" is well defined;
//! - [`orbit`]: exact orbit tabulation and density probes with least-hit
//!   bookkeeping.

pub mod construction;
pub mod criterion;
pub mod dyadic;
pub mod enumerate;
pub mod operator;
pub mod orbit;
pub mod subspace;
pub mod vector;

pub use construction::{
    build_s, build_t, check_invariance, check_quasiconjugacy, phi, BiorthogonalSystem,
    InvarianceReport, QuasiconjugacyReport, SigmaMap,
};
pub use criterion::{
    build_vector, check_conditions, check_le_criterion, decay_threshold, select_subsequence,
    verify_certificate, ConditionsReport, CriterionError, CriterionWitness, DecayCertificate,
    HypercyclicCertificate, LeClassification, LeReport, PowerSequence, SubseqSelection,
    VerificationReport,
};
pub use dyadic::DyadicScalar;
pub use enumerate::{enumerate_dense, level_scan_bound, minimal_level, DenseEnumeration};
pub use operator::{is_left_inverse_on, OperatorExpr, WeightRule};
pub use orbit::{density_report, orbit, OrbitReport};
pub use subspace::{Parity, SubspaceSpec, SupportPattern};
pub use vector::{vec_axpy, CertifiedVector, NormKind, SparseVector};
