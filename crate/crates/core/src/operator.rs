//! Operator expressions evaluated exactly on sparse vectors.
//!
//! Operators are closed expression trees rather than opaque callables: the
//! certificate machinery needs analytic facts about an operator (norm
//! bounds, weight rules, kernel behavior), not just point evaluations.
//! Every node acts exactly on finitely supported dyadic vectors, so images,
//! powers, and kernel probes are all computed without rounding.

use serde::{Deserialize, Serialize};

use crate::construction::BiorthogonalSystem;
use crate::dyadic::DyadicScalar;
use crate::vector::{vec_axpy, NormKind, SparseVector};

/// A weight sequence w(n), n ≥ 1, in closed form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Constant(DyadicScalar),
    /// w(n) = c · 2^(base_exp · n).
    Geometric { c: DyadicScalar, base_exp: i64 },
}

impl WeightRule {
    pub fn weight(&self, n: u64) -> DyadicScalar {
        match self {
            WeightRule::Constant(c) => c.clone(),
            WeightRule::Geometric { c, base_exp } => c.shift2(base_exp * n as i64),
        }
    }

    /// sup_{n ≥ 1} |w(n)| in closed form, when it is finite.
    fn sup_bound(&self) -> Option<DyadicScalar> {
        match self {
            WeightRule::Constant(c) => Some(c.abs()),
            WeightRule::Geometric { c, base_exp } if *base_exp <= 0 => {
                Some(c.abs().shift2(*base_exp))
            }
            WeightRule::Geometric { .. } => None,
        }
    }
}

/// Expression tree for a bounded operator on a sequence space.
///
/// Basis action of the primitive nodes: `BackwardShift` maps e_1 ↦ 0 and
/// e_{n+1} ↦ e_n; `ForwardShift` maps e_n ↦ e_{n+1}; the weighted variants
/// multiply the landing coordinate by w(n) (coordinate form for the
/// backward one: (Tx)_n = w(n)·x_{n+1}); `BasisPerturbation(sys)` is the
/// constructed operator x ↦ x + Σ 2^{-n} x*_{n+1}(x) x_n over the system's
/// basis x_n = e_{σ(n)}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorExpr {
    #[serde(rename = "Identity")]
    Identity,
    #[serde(rename = "B")]
    BackwardShift,
    #[serde(rename = "F")]
    ForwardShift,
    #[serde(rename = "scale")]
    Scale(DyadicScalar, Box<OperatorExpr>),
    #[serde(rename = "wbs")]
    WeightedBackwardShift(WeightRule),
    #[serde(rename = "wfs")]
    WeightedForwardShift(WeightRule),
    #[serde(rename = "sum")]
    Sum(Vec<OperatorExpr>),
    #[serde(rename = "compose")]
    Compose(Box<OperatorExpr>, Box<OperatorExpr>),
    #[serde(rename = "power")]
    Power(Box<OperatorExpr>, u64),
    #[serde(rename = "basis_perturbation")]
    BasisPerturbation(BiorthogonalSystem),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormBoundError {
    #[error("weights c·2^(base_exp·n) with base_exp > 0 have no finite sup; no closed-form bound")]
    UnboundedWeights,
}

impl OperatorExpr {
    pub fn scale(c: DyadicScalar, inner: OperatorExpr) -> Self {
        OperatorExpr::Scale(c, Box::new(inner))
    }

    pub fn compose(outer: OperatorExpr, inner: OperatorExpr) -> Self {
        OperatorExpr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn power(inner: OperatorExpr, m: u64) -> Self {
        OperatorExpr::Power(Box::new(inner), m)
    }

    /// Exact image of `x`.
    pub fn apply(&self, x: &SparseVector) -> SparseVector {
        match self {
            OperatorExpr::Identity => x.clone(),
            OperatorExpr::BackwardShift => SparseVector::from_entries(
                x.iter().filter(|(i, _)| *i >= 2).map(|(i, v)| (i - 1, v.clone())),
            ),
            OperatorExpr::ForwardShift => {
                SparseVector::from_entries(x.iter().map(|(i, v)| (i + 1, v.clone())))
            }
            OperatorExpr::Scale(c, inner) => inner.apply(x).scale(c),
            OperatorExpr::WeightedBackwardShift(w) => SparseVector::from_entries(
                x.iter()
                    .filter(|(i, _)| *i >= 2)
                    .map(|(i, v)| (i - 1, &w.weight(i - 1) * v)),
            ),
            OperatorExpr::WeightedForwardShift(w) => SparseVector::from_entries(
                x.iter().map(|(i, v)| (i + 1, &w.weight(i) * v)),
            ),
            OperatorExpr::Sum(items) => {
                let mut acc = SparseVector::zero();
                let one = DyadicScalar::one();
                for item in items {
                    acc = vec_axpy(&one, &item.apply(x), &acc);
                }
                acc
            }
            OperatorExpr::Compose(outer, inner) => outer.apply(&inner.apply(x)),
            OperatorExpr::Power(inner, m) => inner.apply_power(*m, x),
            OperatorExpr::BasisPerturbation(sys) => {
                let mut out = x.clone();
                for (j, c) in x.iter() {
                    let Some(np1) = sys.sigma.preimage(j) else { continue };
                    if np1 < 2 {
                        continue;
                    }
                    let n = np1 - 1;
                    let term = SparseVector::from_entries([(
                        sys.sigma.apply(n),
                        c.shift2(-(n as i64)),
                    )]);
                    out = vec_axpy(&DyadicScalar::one(), &term, &out);
                }
                out
            }
        }
    }

    /// `m`-fold application; `m = 0` is the identity.
    pub fn apply_power(&self, m: u64, x: &SparseVector) -> SparseVector {
        let mut v = x.clone();
        for _ in 0..m {
            if v.is_zero() {
                break;
            }
            v = self.apply(&v);
        }
        v
    }

    /// Least `p ≤ budget` with `self^p(x) = 0`, certifying membership of `x`
    /// in the generalized kernel ker*(T) = ∪ ker(T^p). Absence within the
    /// budget is a value, not an error.
    pub fn kernel_index(&self, x: &SparseVector, budget: u64) -> Option<u64> {
        let mut v = x.clone();
        for p in 0..=budget {
            if v.is_zero() {
                return Some(p);
            }
            if p < budget {
                v = self.apply(&v);
            }
        }
        None
    }

    /// A valid upper bound for the operator norm, composed structurally:
    /// shifts contribute 1, `Scale` the scalar's absolute value, `Sum` the
    /// sum of bounds, `Compose`/`Power` products, and a basis perturbation
    /// 1 + C (the identity plus the geometric series Σ 2^{-n}·C).
    pub fn norm_bound(&self, kind: NormKind) -> Result<DyadicScalar, NormBoundError> {
        match self {
            OperatorExpr::Identity
            | OperatorExpr::BackwardShift
            | OperatorExpr::ForwardShift => Ok(DyadicScalar::one()),
            OperatorExpr::Scale(c, inner) => Ok(&c.abs() * &inner.norm_bound(kind)?),
            OperatorExpr::WeightedBackwardShift(w)
            | OperatorExpr::WeightedForwardShift(w) => {
                w.sup_bound().ok_or(NormBoundError::UnboundedWeights)
            }
            OperatorExpr::Sum(items) => {
                let mut acc = DyadicScalar::zero();
                for item in items {
                    acc = &acc + &item.norm_bound(kind)?;
                }
                Ok(acc)
            }
            OperatorExpr::Compose(outer, inner) => {
                Ok(&outer.norm_bound(kind)? * &inner.norm_bound(kind)?)
            }
            OperatorExpr::Power(inner, m) => Ok(inner.norm_bound(kind)?.pow(*m)),
            OperatorExpr::BasisPerturbation(sys) => {
                Ok(&DyadicScalar::one() + &sys.c_bound())
            }
        }
    }
}

/// One failed left-inverse equation t(a(x)) = x.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftInverseFailure {
    pub sample_index: usize,
    pub input: SparseVector,
    /// What t(a(input)) actually was.
    pub image: SparseVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftInverseReport {
    pub checked: usize,
    pub failures: Vec<LeftInverseFailure>,
}

impl LeftInverseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exact check of t(a(x)) = x on each sample.
pub fn is_left_inverse_on(
    t: &OperatorExpr,
    a: &OperatorExpr,
    samples: &[SparseVector],
) -> LeftInverseReport {
    let mut failures = Vec::new();
    for (sample_index, x) in samples.iter().enumerate() {
        let image = t.apply(&a.apply(x));
        if &image != x {
            failures.push(LeftInverseFailure { sample_index, input: x.clone(), image });
        }
    }
    LeftInverseReport { checked: samples.len(), failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_s;

    fn v(s: &str) -> SparseVector {
        s.parse().unwrap()
    }

    fn d(s: &str) -> DyadicScalar {
        s.parse().unwrap()
    }

    fn two_b() -> OperatorExpr {
        OperatorExpr::scale(d("2"), OperatorExpr::BackwardShift)
    }

    fn half_f() -> OperatorExpr {
        OperatorExpr::scale(d("1/2"), OperatorExpr::ForwardShift)
    }

    #[test]
    fn shift_actions() {
        assert_eq!(two_b().apply(&SparseVector::basis(2)), v("{1:2}"));
        assert!(two_b().apply(&SparseVector::basis(1)).is_zero());
        assert_eq!(half_f().apply(&SparseVector::basis(1)), v("{2:1/2}"));
        assert_eq!(build_s().apply(&SparseVector::basis(2)), v("{1:1/2, 2:1}"));
    }

    #[test]
    fn weighted_shift_coordinate_form() {
        // (Tx)_n = w(n)·x_{n+1} with w(n) = 2^{-n}.
        let wbs = OperatorExpr::WeightedBackwardShift(WeightRule::Geometric {
            c: DyadicScalar::one(),
            base_exp: -1,
        });
        assert_eq!(wbs.apply(&v("{2:1, 3:1}")), v("{1:1/2, 2:1/4}"));
        let wfs = OperatorExpr::WeightedForwardShift(WeightRule::Constant(d("3")));
        assert_eq!(wfs.apply(&SparseVector::basis(4)), v("{5:3}"));
    }

    #[test]
    fn powers_by_iteration() {
        assert_eq!(two_b().apply_power(2, &SparseVector::basis(3)), v("{1:4}"));
        let x = v("{1:1/2, 9:-5}");
        assert_eq!(two_b().apply_power(0, &x), x);
        assert_eq!(half_f().apply_power(3, &SparseVector::basis(1)), v("{4:1/8}"));
        // Power nodes agree with repeated application.
        let node = OperatorExpr::power(two_b(), 2);
        assert_eq!(node.apply(&SparseVector::basis(3)), v("{1:4}"));
    }

    #[test]
    fn kernel_probe() {
        assert_eq!(two_b().kernel_index(&SparseVector::basis(3), 10), Some(3));
        assert_eq!(two_b().kernel_index(&SparseVector::zero(), 10), Some(0));
        assert_eq!(OperatorExpr::Identity.kernel_index(&SparseVector::basis(1), 10), None);
        // Budget is a hard cap: kernel index 3 is invisible at budget 2.
        assert_eq!(two_b().kernel_index(&SparseVector::basis(3), 2), None);
    }

    #[test]
    fn norm_bounds() {
        assert_eq!(two_b().norm_bound(NormKind::Sup).unwrap(), d("2"));
        let t = OperatorExpr::BasisPerturbation(BiorthogonalSystem::odd());
        assert_eq!(t.norm_bound(NormKind::Sup).unwrap(), d("2"));
        let c = OperatorExpr::compose(two_b(), half_f());
        assert_eq!(c.norm_bound(NormKind::L1).unwrap(), d("1"));
        let unbounded = OperatorExpr::WeightedForwardShift(WeightRule::Geometric {
            c: DyadicScalar::one(),
            base_exp: 1,
        });
        assert_eq!(
            unbounded.norm_bound(NormKind::Sup),
            Err(NormBoundError::UnboundedWeights)
        );
        let s_bound = build_s().norm_bound(NormKind::L1).unwrap();
        assert_eq!(s_bound, d("3/2")); // 1 + sup 2^{-n} = 1 + 1/2
    }

    #[test]
    fn left_inverse_checks() {
        let e1 = [SparseVector::basis(1)];
        assert!(is_left_inverse_on(&two_b(), &half_f(), &e1).passed());
        let e5 = [SparseVector::basis(5)];
        assert!(is_left_inverse_on(&OperatorExpr::BackwardShift, &OperatorExpr::ForwardShift, &e5)
            .passed());
        let report = is_left_inverse_on(&two_b(), &OperatorExpr::ForwardShift, &e1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].image, v("{1:2}"));
    }

    #[test]
    fn expression_serialization() {
        let expr = OperatorExpr::compose(two_b(), half_f());
        let text = serde_json::to_string(&expr).unwrap();
        assert_eq!(text, r#"{"compose":[{"scale":[2,"B"]},{"scale":["1/2^1","F"]}]}"#);
        assert_eq!(serde_json::from_str::<OperatorExpr>(&text).unwrap(), expr);
        // The friendlier evaluated form is accepted on input.
        let same: OperatorExpr =
            serde_json::from_str(r#"{"compose":[{"scale":[2,"B"]},{"scale":["1/2","F"]}]}"#)
                .unwrap();
        assert_eq!(same, expr);

        let t = OperatorExpr::BasisPerturbation(BiorthogonalSystem::odd());
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(text, r#"{"basis_perturbation":{"sigma":"odd"}}"#);
        assert_eq!(serde_json::from_str::<OperatorExpr>(&text).unwrap(), t);

        let s = build_s();
        let round: OperatorExpr =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(round, s);
        assert_eq!(serde_json::from_str::<OperatorExpr>(r#""Identity""#).unwrap(), OperatorExpr::Identity);
    }
}
