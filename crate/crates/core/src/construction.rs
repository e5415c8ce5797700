//! The explicit operator construction on a coordinate subspace.
//!
//! Fix a strictly increasing injection σ and set x_n := e_{σ(n)} with
//! coordinate functionals x_n* (zero off range(σ), so ‖x_n‖ = 1 and
//! ‖x_n*‖ = C = 1). The constructed operator is the basis perturbation
//!
//! ```text
//! T x = x + Σ_{n≥1} 2^{-n} x*_{n+1}(x) x_n,
//! ```
//!
//! which fixes x_1, sends x_n ↦ x_n + 2^{-(n-1)} x_{n-1} for n ≥ 2, and
//! leaves coordinates outside range(σ) alone. Its ℓ¹ companion is
//! S = I + W where W is the weighted backward shift with weights 2^{-n};
//! the relabeling map φ(α) = Σ α_n x_n intertwines the two: T∘φ = φ∘S.
//! Both identities are exact on dyadic vectors and are checked here
//! coordinate by coordinate, as is membership invariance of a subspace
//! under an arbitrary operator expression.

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicScalar;
use crate::operator::{OperatorExpr, WeightRule};
use crate::subspace::SubspaceSpec;
use crate::vector::SparseVector;

/// A strictly increasing injection from positive integers to positive
/// integers, given in closed form so preimages are computable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaMap {
    #[serde(rename = "identity")]
    Identity,
    /// σ(n) = 2n − 1.
    #[serde(rename = "odd")]
    Odd,
    /// σ(n) = step·n + offset, with `step ≥ 1` and `step + offset ≥ 1`.
    #[serde(rename = "affine")]
    Affine { step: u64, offset: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SigmaError {
    #[error("affine sigma needs step ≥ 1 and step + offset ≥ 1 to stay increasing and positive")]
    NotIncreasing,
}

impl SigmaMap {
    pub fn validate(&self) -> Result<(), SigmaError> {
        match self {
            SigmaMap::Affine { step, offset } if *step == 0 || (*step as i128) + (*offset as i128) < 1 => {
                Err(SigmaError::NotIncreasing)
            }
            _ => Ok(()),
        }
    }

    /// σ(n), for n ≥ 1.
    pub fn apply(&self, n: u64) -> u64 {
        debug_assert!(n >= 1);
        match self {
            SigmaMap::Identity => n,
            SigmaMap::Odd => 2 * n - 1,
            SigmaMap::Affine { step, offset } => {
                let v = (*step as i128) * (n as i128) + (*offset as i128);
                debug_assert!(v >= 1);
                v as u64
            }
        }
    }

    /// The n with σ(n) = j, if j is in the range of σ.
    pub fn preimage(&self, j: u64) -> Option<u64> {
        match self {
            SigmaMap::Identity => Some(j),
            SigmaMap::Odd => (j % 2 == 1).then_some((j + 1) / 2),
            SigmaMap::Affine { step, offset } => {
                let shifted = (j as i128) - (*offset as i128);
                if shifted < 1 || shifted % (*step as i128) != 0 {
                    return None;
                }
                let n = shifted / (*step as i128);
                (n >= 1).then_some(n as u64)
            }
        }
    }
}

/// The coordinate biorthogonal system x_n = e_{σ(n)}: basis vectors of
/// norm 1 whose coordinate functionals have norm bound C = 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr")]
pub struct BiorthogonalSystem {
    pub sigma: SigmaMap,
}

#[derive(Deserialize)]
struct SystemRepr {
    sigma: SigmaMap,
}

impl TryFrom<SystemRepr> for BiorthogonalSystem {
    type Error = SigmaError;
    fn try_from(repr: SystemRepr) -> Result<Self, SigmaError> {
        BiorthogonalSystem::new(repr.sigma)
    }
}

impl BiorthogonalSystem {
    pub fn new(sigma: SigmaMap) -> Result<Self, SigmaError> {
        sigma.validate()?;
        Ok(BiorthogonalSystem { sigma })
    }

    pub fn identity() -> Self {
        BiorthogonalSystem { sigma: SigmaMap::Identity }
    }

    pub fn odd() -> Self {
        BiorthogonalSystem { sigma: SigmaMap::Odd }
    }

    /// The functional norm bound C; exactly 1 for coordinate systems.
    pub fn c_bound(&self) -> DyadicScalar {
        DyadicScalar::one()
    }
}

/// The basis perturbation T for the given system.
pub fn build_t(sys: &BiorthogonalSystem) -> OperatorExpr {
    OperatorExpr::BasisPerturbation(sys.clone())
}

/// The ℓ¹ companion S = I + (weighted backward shift with weights 2^{-n}).
pub fn build_s() -> OperatorExpr {
    OperatorExpr::Sum(vec![
        OperatorExpr::Identity,
        OperatorExpr::WeightedBackwardShift(WeightRule::Geometric {
            c: DyadicScalar::one(),
            base_exp: -1,
        }),
    ])
}

/// φ(α) = Σ α_n x_n: place coordinate n at index σ(n).
pub fn phi(coeffs: &SparseVector, sys: &BiorthogonalSystem) -> SparseVector {
    SparseVector::from_entries(coeffs.iter().map(|(n, c)| (sys.sigma.apply(n), c.clone())))
}

/// One failed intertwining equation: both sides at basis vector `e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiconjugacyFailure {
    pub k: u64,
    pub lhs: SparseVector,
    pub rhs: SparseVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiconjugacyReport {
    pub checked: u64,
    pub failures: Vec<QuasiconjugacyFailure>,
}

impl QuasiconjugacyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exact check of T∘φ = φ∘S on the basis vectors e_1..e_{n_max}.
pub fn check_quasiconjugacy(
    t: &OperatorExpr,
    s: &OperatorExpr,
    sys: &BiorthogonalSystem,
    n_max: u64,
) -> QuasiconjugacyReport {
    let mut failures = Vec::new();
    for k in 1..=n_max {
        let e_k = SparseVector::basis(k);
        let lhs = t.apply(&phi(&e_k, sys));
        let rhs = phi(&s.apply(&e_k), sys);
        if lhs != rhs {
            failures.push(QuasiconjugacyFailure { k, lhs, rhs });
        }
    }
    QuasiconjugacyReport { checked: n_max, failures }
}

/// The first sample whose image escapes the subspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceWitness {
    pub sample_index: usize,
    pub input: SparseVector,
    pub image: SparseVector,
    /// The offending support index of the image.
    pub violating_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub checked: usize,
    pub counterexample: Option<InvarianceWitness>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sample {sample_index} is not a member: support index {bad_index} is outside the subspace")]
pub struct NonMemberSample {
    pub sample_index: usize,
    pub bad_index: u64,
}

/// Checks that `t` maps each sample (a member of `m`) back into `m`.
/// Stops at the first counterexample; later samples are still counted as
/// checked only if examined.
pub fn check_invariance(
    t: &OperatorExpr,
    m: &SubspaceSpec,
    samples: &[SparseVector],
) -> Result<InvarianceReport, NonMemberSample> {
    for (idx, x) in samples.iter().enumerate() {
        if let Some(bad_index) = m.first_violation(x) {
            return Err(NonMemberSample { sample_index: idx, bad_index });
        }
    }
    let mut checked = 0;
    for (idx, x) in samples.iter().enumerate() {
        checked += 1;
        let image = t.apply(x);
        if let Some(violating_index) = m.first_violation(&image) {
            return Ok(InvarianceReport {
                checked,
                counterexample: Some(InvarianceWitness {
                    sample_index: idx,
                    input: x.clone(),
                    image,
                    violating_index,
                }),
            });
        }
    }
    Ok(InvarianceReport { checked, counterexample: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::NormKind;

    fn v(s: &str) -> SparseVector {
        s.parse().unwrap()
    }

    #[test]
    fn sigma_maps_and_preimages() {
        let odd = SigmaMap::Odd;
        assert_eq!(odd.apply(1), 1);
        assert_eq!(odd.apply(3), 5);
        assert_eq!(odd.preimage(5), Some(3));
        assert_eq!(odd.preimage(4), None);
        let aff = SigmaMap::Affine { step: 3, offset: -1 };
        aff.validate().unwrap();
        assert_eq!(aff.apply(1), 2);
        assert_eq!(aff.apply(4), 11);
        assert_eq!(aff.preimage(11), Some(4));
        assert_eq!(aff.preimage(3), None);
        assert_eq!(aff.preimage(1), None);
        assert!(SigmaMap::Affine { step: 1, offset: -1 }.validate().is_err());
        assert!(SigmaMap::Affine { step: 0, offset: 5 }.validate().is_err());
    }

    #[test]
    fn perturbation_action_on_basis() {
        let t_id = build_t(&BiorthogonalSystem::identity());
        assert_eq!(t_id.apply(&SparseVector::basis(3)), v("{2:1/4, 3:1}"));
        let t_odd = build_t(&BiorthogonalSystem::odd());
        assert_eq!(t_odd.apply(&SparseVector::basis(3)), v("{1:1/2, 3:1}"));
        // x_1 is fixed, and coordinates outside range(sigma) are untouched.
        assert_eq!(t_odd.apply(&SparseVector::basis(1)), v("{1:1}"));
        assert_eq!(t_odd.apply(&SparseVector::basis(4)), v("{4:1}"));
    }

    #[test]
    fn companion_operator_action() {
        let s = build_s();
        assert_eq!(s.apply(&SparseVector::basis(1)), v("{1:1}"));
        assert_eq!(s.apply(&SparseVector::basis(2)), v("{1:1/2, 2:1}"));
        assert_eq!(s.apply(&SparseVector::basis(3)), v("{2:1/4, 3:1}"));
    }

    #[test]
    fn phi_relabels_coordinates() {
        let sys = BiorthogonalSystem::odd();
        assert_eq!(phi(&SparseVector::basis(2), &sys), v("{3:1}"));
        assert_eq!(phi(&v("{1:1/2, 2:1}"), &sys), v("{1:1/2, 3:1}"));
        let id = BiorthogonalSystem::identity();
        assert_eq!(phi(&SparseVector::basis(4), &id), v("{4:1}"));
        assert!(phi(&SparseVector::zero(), &sys).is_zero());
    }

    #[test]
    fn intertwining_on_small_basis() {
        let sys = BiorthogonalSystem::odd();
        let t = build_t(&sys);
        let s = build_s();
        let report = check_quasiconjugacy(&t, &s, &sys, 2);
        assert!(report.passed(), "{:?}", report.failures);
        // A wrong left-hand operator fails at k = 2 with both sides recorded.
        let bad = check_quasiconjugacy(&OperatorExpr::Identity, &s, &sys, 2);
        assert_eq!(bad.failures.len(), 1);
        assert_eq!(bad.failures[0].k, 2);
        assert_eq!(bad.failures[0].lhs, v("{3:1}"));
        assert_eq!(bad.failures[0].rhs, v("{1:1/2, 3:1}"));
    }

    #[test]
    fn invariance_pass_and_counterexample() {
        let odd = SubspaceSpec::odd_sup();
        let t = build_t(&BiorthogonalSystem::odd());
        let members = [
            SparseVector::basis(1),
            SparseVector::basis(3),
            SparseVector::basis(5),
        ];
        assert!(check_invariance(&t, &odd, &members).unwrap().passed());

        let two_b = OperatorExpr::scale(DyadicScalar::from_integer(2), OperatorExpr::BackwardShift);
        let report = check_invariance(&two_b, &odd, &[SparseVector::basis(3)]).unwrap();
        let witness = report.counterexample.expect("2B must leave the odd subspace");
        assert_eq!(witness.image, v("{2:2}"));
        assert_eq!(witness.violating_index, 2);

        let id_report =
            check_invariance(&OperatorExpr::Identity, &odd, &[v("{1:1/2, 5:-3/4}")]).unwrap();
        assert!(id_report.passed());

        // Non-member samples violate the precondition.
        let err = check_invariance(&two_b, &odd, &[SparseVector::basis(2)]).unwrap_err();
        assert_eq!(err.bad_index, 2);
    }

    #[test]
    fn system_serialization() {
        let sys = BiorthogonalSystem::odd();
        let text = serde_json::to_string(&sys).unwrap();
        assert_eq!(text, r#"{"sigma":"odd"}"#);
        assert_eq!(serde_json::from_str::<BiorthogonalSystem>(&text).unwrap(), sys);
        let aff = BiorthogonalSystem::new(SigmaMap::Affine { step: 2, offset: -1 }).unwrap();
        let text = serde_json::to_string(&aff).unwrap();
        assert_eq!(text, r#"{"sigma":{"affine":{"step":2,"offset":-1}}}"#);
        assert_eq!(serde_json::from_str::<BiorthogonalSystem>(&text).unwrap(), aff);
        assert_eq!(aff.c_bound(), DyadicScalar::one());
        assert_eq!(sys.c_bound().to_string(), "1");
        let _ = NormKind::Sup;
    }
}
