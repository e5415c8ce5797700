//! Scenario bundles: everything a pipeline run needs, under one name.
//!
//! A scenario is the cast of one construction: the operator under study,
//! optionally its right inverse and decay certificate, the subspace, the
//! power sequence, optionally the biorthogonal system behind a basis
//! perturbation, plus enumeration and budget knobs. Two built-ins cover
//! the constructions the tool ships for; anything else loads from a JSON
//! file of the same shape.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

use orbitlab::construction::{build_t, BiorthogonalSystem};
use orbitlab::criterion::{CriterionWitness, DecayCertificate, PowerSequence};
use orbitlab::dyadic::DyadicScalar;
use orbitlab::operator::OperatorExpr;
use orbitlab::subspace::SubspaceSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Cap on the annihilation order probed by kernel membership checks.
    pub kernel_budget: u64,
    /// Largest power the subsequence selection may pick.
    pub scan_limit: u64,
    /// How many sequence members condition checks probe per sample.
    pub k_probe: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { kernel_budget: 64, scan_limit: 100_000, k_probe: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Enumeration {
    /// Deepest enumeration level served; the stream is exhausted rather
    /// than continued past it.
    pub level_cap: u64,
}

impl Default for Enumeration {
    fn default() -> Self {
        Enumeration { level_cap: orbitlab::enumerate::MAX_LEVEL }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub operator: OperatorExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_operator: Option<OperatorExpr>,
    pub subspace: SubspaceSpec,
    pub sequence: PowerSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<BiorthogonalSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayCertificate>,
    #[serde(default)]
    pub enumeration: Enumeration,
    #[serde(default)]
    pub budgets: Budgets,
}

fn two() -> DyadicScalar {
    DyadicScalar::from_integer(2)
}

fn half() -> DyadicScalar {
    DyadicScalar::pow2(-1)
}

/// The doubled backward shift with its halved forward right inverse on the
/// odd-support sup-norm subspace, probed along m_k = 2k.
pub fn example_linf() -> Scenario {
    Scenario {
        name: "example-linf".into(),
        operator: OperatorExpr::scale(two(), OperatorExpr::BackwardShift),
        a_operator: Some(OperatorExpr::scale(half(), OperatorExpr::ForwardShift)),
        subspace: SubspaceSpec::odd_sup(),
        sequence: PowerSequence::new(2, 0).expect("static sequence"),
        system: None,
        decay: DecayCertificate::exact_geometric(-1).ok(),
        enumeration: Enumeration::default(),
        budgets: Budgets::default(),
    }
}

/// The explicit basis perturbation over sigma(n) = 2n−1 together with its
/// quasiconjugate companion shift.
pub fn thm1_construction() -> Scenario {
    let system = BiorthogonalSystem::odd();
    Scenario {
        name: "thm1-construction".into(),
        operator: build_t(&system),
        a_operator: None,
        subspace: SubspaceSpec::odd_sup(),
        sequence: PowerSequence::new(2, 0).expect("static sequence"),
        system: Some(system),
        decay: None,
        enumeration: Enumeration::default(),
        budgets: Budgets::default(),
    }
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "example-linf" => Some(example_linf()),
        "thm1-construction" => Some(thm1_construction()),
        _ => None,
    }
}

/// Resolves a `--scenario` argument: a built-in name, or a path to a JSON
/// scenario file.
pub fn load(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = builtin(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("no built-in scenario or readable file `{name_or_path}`"))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("malformed scenario file `{name_or_path}`"))?;
    Ok(scenario)
}

impl Scenario {
    /// The criterion witness bundle, if this scenario carries the full
    /// cast (a right inverse and its decay certificate).
    pub fn witness(&self) -> Result<CriterionWitness> {
        let Some(a) = &self.a_operator else {
            bail!("scenario `{}` has no a_operator; criterion commands need one", self.name);
        };
        let Some(decay) = &self.decay else {
            bail!("scenario `{}` has no decay certificate", self.name);
        };
        Ok(CriterionWitness {
            t: self.operator.clone(),
            a: a.clone(),
            subspace: self.subspace.clone(),
            seq: self.sequence.clone(),
            decay: decay.clone(),
            kernel_budget: self.budgets.kernel_budget,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve_and_round_trip() {
        for name in ["example-linf", "thm1-construction"] {
            let s = builtin(name).unwrap();
            assert_eq!(s.name, name);
            let json = serde_json::to_string_pretty(&s).unwrap();
            let back: Scenario = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
        assert!(builtin("no-such").is_none());
    }

    #[test]
    fn witness_requires_the_full_cast() {
        assert!(example_linf().witness().is_ok());
        assert!(thm1_construction().witness().is_err());
    }

    #[test]
    fn example_witness_shape() {
        let w = example_linf().witness().unwrap();
        assert_eq!(w.seq, PowerSequence::new(2, 0).unwrap());
        assert_eq!(w.kernel_budget, 64);
        let e3: orbitlab::vector::SparseVector = "{3:1}".parse().unwrap();
        assert_eq!(w.t.apply(&e3), "{2:2}".parse().unwrap());
        assert_eq!(w.a.apply(&e3), "{4:1/2}".parse().unwrap());
    }
}
