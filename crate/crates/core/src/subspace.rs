//! Coordinate-pattern subspaces.
//!
//! A subspace here is the closed span, in a stated norm, of the basis
//! vectors whose indices satisfy a decidable predicate (all indices, a
//! parity class, an arithmetic progression, or an explicit finite set).
//! A finitely supported vector is a member exactly when its whole support
//! satisfies the predicate; that support check is the computable core of
//! every membership and invariance statement in this crate.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::vector::{NormKind, SparseVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "odd")]
    Odd,
    #[serde(rename = "even")]
    Even,
}

/// Which coordinate indices the subspace allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportPattern {
    All,
    Parity(Parity),
    /// Indices `start, start+step, start+2·step, ...` with `step, start ≥ 1`.
    Progression { step: u64, start: u64 },
    /// An explicit finite set of allowed indices (spans a finite-dimensional
    /// subspace; useful for counterexamples and small experiments).
    Explicit(BTreeSet<u64>),
}

impl SupportPattern {
    pub fn allows(&self, i: u64) -> bool {
        debug_assert!(i >= 1);
        match self {
            SupportPattern::All => true,
            SupportPattern::Parity(Parity::Odd) => i % 2 == 1,
            SupportPattern::Parity(Parity::Even) => i % 2 == 0,
            SupportPattern::Progression { step, start } => {
                i >= *start && (i - *start) % *step == 0
            }
            SupportPattern::Explicit(set) => set.contains(&i),
        }
    }

    /// Allowed indices in increasing order (finite for `Explicit`).
    pub fn allowed_indices(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            SupportPattern::All => Box::new(1u64..),
            SupportPattern::Parity(Parity::Odd) => Box::new((1u64..).map(|n| 2 * n - 1)),
            SupportPattern::Parity(Parity::Even) => Box::new((1u64..).map(|n| 2 * n)),
            SupportPattern::Progression { step, start } => {
                let (step, start) = (*step, *start);
                Box::new((0u64..).map(move |k| start + k * step))
            }
            SupportPattern::Explicit(set) => Box::new(set.iter().copied()),
        }
    }
}

/// A coordinate-pattern subspace together with the ambient norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceSpec {
    pub pattern: SupportPattern,
    pub norm: NormKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubspaceError {
    #[error("progression requires step ≥ 1 and start ≥ 1")]
    BadProgression,
    #[error("explicit index set must be nonempty with 1-based indices")]
    BadExplicitSet,
    #[error("exactly one support pattern must be given")]
    AmbiguousPattern,
}

impl SubspaceSpec {
    pub fn new(pattern: SupportPattern, norm: NormKind) -> Result<Self, SubspaceError> {
        match &pattern {
            SupportPattern::Progression { step, start } if *step == 0 || *start == 0 => {
                return Err(SubspaceError::BadProgression)
            }
            SupportPattern::Explicit(set) if set.is_empty() || set.contains(&0) => {
                return Err(SubspaceError::BadExplicitSet)
            }
            _ => {}
        }
        Ok(SubspaceSpec { pattern, norm })
    }

    pub fn odd_sup() -> Self {
        SubspaceSpec { pattern: SupportPattern::Parity(Parity::Odd), norm: NormKind::Sup }
    }

    pub fn all_l1() -> Self {
        SubspaceSpec { pattern: SupportPattern::All, norm: NormKind::L1 }
    }

    /// Membership of a finitely supported vector: every support index is
    /// allowed. The zero vector belongs to every subspace.
    pub fn contains(&self, x: &SparseVector) -> bool {
        self.first_violation(x).is_none()
    }

    /// The smallest support index outside the pattern, if any.
    pub fn first_violation(&self, x: &SparseVector) -> Option<u64> {
        x.support().find(|&i| !self.pattern.allows(i))
    }

    /// The first `n` allowed indices (fewer if the pattern is a smaller
    /// explicit set).
    pub fn allowed_prefix(&self, n: usize) -> Vec<u64> {
        self.pattern.allowed_indices().take(n).collect()
    }
}

/// Wire format: one pattern key plus a norm, e.g. `{"parity":"odd","norm":"sup"}`,
/// `{"progression":[2,1],"norm":"l1"}`, `{"all":true,...}`, `{"explicit":[1,3],...}`.
#[derive(Serialize, Deserialize)]
struct SubspaceSpecRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    all: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parity: Option<Parity>,
    /// `[step, start]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    progression: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explicit: Option<Vec<u64>>,
    norm: NormKind,
}

impl Serialize for SubspaceSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut repr = SubspaceSpecRepr {
            all: None,
            parity: None,
            progression: None,
            explicit: None,
            norm: self.norm,
        };
        match &self.pattern {
            SupportPattern::All => repr.all = Some(true),
            SupportPattern::Parity(p) => repr.parity = Some(*p),
            SupportPattern::Progression { step, start } => {
                repr.progression = Some((*step, *start))
            }
            SupportPattern::Explicit(set) => {
                repr.explicit = Some(set.iter().copied().collect())
            }
        }
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SubspaceSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SubspaceSpecRepr::deserialize(deserializer)?;
        let mut patterns: Vec<SupportPattern> = Vec::new();
        if repr.all == Some(true) {
            patterns.push(SupportPattern::All);
        }
        if let Some(p) = repr.parity {
            patterns.push(SupportPattern::Parity(p));
        }
        if let Some((step, start)) = repr.progression {
            patterns.push(SupportPattern::Progression { step, start });
        }
        if let Some(set) = repr.explicit {
            patterns.push(SupportPattern::Explicit(set.into_iter().collect()));
        }
        if patterns.len() != 1 {
            return Err(D::Error::custom(SubspaceError::AmbiguousPattern));
        }
        SubspaceSpec::new(patterns.pop().unwrap(), repr.norm).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_is_support_predicate() {
        let odd = SubspaceSpec::odd_sup();
        let member: SparseVector = "{1:1, 3:-1/2}".parse().unwrap();
        let outsider: SparseVector = "{1:1, 2:1}".parse().unwrap();
        assert!(odd.contains(&member));
        assert!(odd.contains(&SparseVector::zero()));
        assert_eq!(odd.first_violation(&outsider), Some(2));
    }

    #[test]
    fn allowed_prefixes() {
        assert_eq!(SubspaceSpec::odd_sup().allowed_prefix(4), vec![1, 3, 5, 7]);
        assert_eq!(SubspaceSpec::all_l1().allowed_prefix(3), vec![1, 2, 3]);
        let even =
            SubspaceSpec::new(SupportPattern::Parity(Parity::Even), NormKind::Sup).unwrap();
        assert_eq!(even.allowed_prefix(3), vec![2, 4, 6]);
        let prog = SubspaceSpec::new(
            SupportPattern::Progression { step: 3, start: 2 },
            NormKind::L1,
        )
        .unwrap();
        assert_eq!(prog.allowed_prefix(4), vec![2, 5, 8, 11]);
        assert!(prog.pattern.allows(8));
        assert!(!prog.pattern.allows(9));
        let tiny = SubspaceSpec::new(
            SupportPattern::Explicit([1, 5].into_iter().collect()),
            NormKind::Sup,
        )
        .unwrap();
        assert_eq!(tiny.allowed_prefix(10), vec![1, 5]);
    }

    #[test]
    fn wire_format_round_trips() {
        let cases = [
            r#"{"parity":"odd","norm":"sup"}"#,
            r#"{"progression":[2,1],"norm":"l1"}"#,
            r#"{"all":true,"norm":"l1"}"#,
            r#"{"explicit":[1,3,5],"norm":"sup"}"#,
        ];
        for text in cases {
            let spec: SubspaceSpec = serde_json::from_str(text).unwrap();
            let back = serde_json::to_string(&spec).unwrap();
            assert_eq!(back, text);
        }
        // Zero or two patterns are rejected.
        assert!(serde_json::from_str::<SubspaceSpec>(r#"{"norm":"sup"}"#).is_err());
        assert!(serde_json::from_str::<SubspaceSpec>(
            r#"{"all":true,"parity":"odd","norm":"sup"}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SubspaceSpec>(
            r#"{"progression":[0,1],"norm":"sup"}"#
        )
        .is_err());
    }
}
