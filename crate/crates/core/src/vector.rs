//! Finitely supported sequence vectors with exact dyadic coordinates.
//!
//! A `SparseVector` is the computable stand-in for an element of ℓ¹, ℓ∞, or
//! c₀: a finite map from 1-based coordinate indices to nonzero scalars. The
//! two norms in play are ‖·‖₁ (coordinate sum) and ‖·‖∞ (coordinate max);
//! on finitely supported vectors the sup norm serves ℓ∞ and c₀ alike.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{DyadicScalar, ParseDyadicError};

/// Which norm a computation is carried out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "sup")]
    Sup,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "l1",
            NormKind::Sup => "sup",
        })
    }
}

/// Finite map from 1-based index to nonzero coordinate; no zero is stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SparseVector {
    entries: BTreeMap<u64, DyadicScalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseVectorError {
    #[error("vector literal must be wrapped in braces: `{{i:p/q, ...}}`")]
    MissingBraces,
    #[error("malformed entry `{0}`; expected `index:value`")]
    BadEntry(String),
    #[error("invalid index `{0}`; indices are positive integers")]
    BadIndex(String),
    #[error("duplicate index {0}")]
    DuplicateIndex(u64),
    #[error(transparent)]
    BadScalar(#[from] ParseDyadicError),
}

impl SparseVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `e_i`. Indices are 1-based.
    pub fn basis(i: u64) -> Self {
        assert!(i >= 1, "coordinate indices are 1-based");
        let mut entries = BTreeMap::new();
        entries.insert(i, DyadicScalar::one());
        SparseVector { entries }
    }

    /// Builds a vector from `(index, value)` pairs, dropping zero values.
    /// Later pairs with a repeated index overwrite earlier ones.
    pub fn from_entries(pairs: impl IntoIterator<Item = (u64, DyadicScalar)>) -> Self {
        let mut entries = BTreeMap::new();
        for (i, v) in pairs {
            assert!(i >= 1, "coordinate indices are 1-based");
            if v.is_zero() {
                entries.remove(&i);
            } else {
                entries.insert(i, v);
            }
        }
        SparseVector { entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coordinate at `i`; zero when unset.
    pub fn get(&self, i: u64) -> DyadicScalar {
        self.entries.get(&i).cloned().unwrap_or_else(DyadicScalar::zero)
    }

    /// Sorted iteration over the nonzero coordinates.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &DyadicScalar)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    /// Sorted support indices.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_support(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    fn add_assign_at(&mut self, i: u64, v: DyadicScalar) {
        if v.is_zero() {
            return;
        }
        match self.entries.entry(i) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get() + &v;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &DyadicScalar) -> SparseVector {
        if c.is_zero() {
            return SparseVector::zero();
        }
        SparseVector {
            entries: self.entries.iter().map(|(i, v)| (*i, c * v)).collect(),
        }
    }

    /// Exact norm in the requested kind.
    pub fn norm(&self, kind: NormKind) -> DyadicScalar {
        match kind {
            NormKind::L1 => self
                .entries
                .values()
                .fold(DyadicScalar::zero(), |acc, v| &acc + &v.abs()),
            NormKind::Sup => self
                .entries
                .values()
                .map(|v| v.abs())
                .max()
                .unwrap_or_else(DyadicScalar::zero),
        }
    }

    /// Canonical text literal, e.g. `{1:3/4, 7:-1/8}`; `{}` for zero.
    pub fn to_literal(&self) -> String {
        let body: Vec<String> =
            self.entries.iter().map(|(i, v)| format!("{i}:{v}")).collect();
        format!("{{{}}}", body.join(", "))
    }
}

/// Exact `c·x + y` with zero entries dropped.
pub fn vec_axpy(c: &DyadicScalar, x: &SparseVector, y: &SparseVector) -> SparseVector {
    let mut out = y.clone();
    for (i, v) in x.iter() {
        out.add_assign_at(i, c * v);
    }
    out
}

impl std::ops::Add<&SparseVector> for &SparseVector {
    type Output = SparseVector;
    fn add(self, rhs: &SparseVector) -> SparseVector {
        vec_axpy(&DyadicScalar::one(), rhs, self)
    }
}

impl std::ops::Sub<&SparseVector> for &SparseVector {
    type Output = SparseVector;
    fn sub(self, rhs: &SparseVector) -> SparseVector {
        vec_axpy(&DyadicScalar::from_integer(-1), rhs, self)
    }
}

impl std::ops::Neg for &SparseVector {
    type Output = SparseVector;
    fn neg(self) -> SparseVector {
        self.scale(&DyadicScalar::from_integer(-1))
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl fmt::Debug for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseVector{}", self.to_literal())
    }
}

impl FromStr for SparseVector {
    type Err = ParseVectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let body = s
            .strip_prefix('{')
            .and_then(|rest| rest.strip_suffix('}'))
            .ok_or(ParseVectorError::MissingBraces)?
            .trim();
        let mut entries = BTreeMap::new();
        if body.is_empty() {
            return Ok(SparseVector { entries });
        }
        for piece in body.split(',') {
            let (idx, val) = piece
                .split_once(':')
                .ok_or_else(|| ParseVectorError::BadEntry(piece.trim().to_string()))?;
            let idx = idx.trim();
            let i: u64 = idx
                .parse()
                .map_err(|_| ParseVectorError::BadIndex(idx.to_string()))?;
            if i == 0 {
                return Err(ParseVectorError::BadIndex(idx.to_string()));
            }
            let v: DyadicScalar = val.trim().parse()?;
            if entries.contains_key(&i) {
                return Err(ParseVectorError::DuplicateIndex(i));
            }
            if !v.is_zero() {
                entries.insert(i, v);
            }
        }
        Ok(SparseVector { entries })
    }
}

impl Serialize for SparseVector {
    /// Machine form: a list of `[index, numerator, exponent]` triples in
    /// index order. Numerators are decimal strings because certificate
    /// numerators routinely overflow 64-bit JSON numbers.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let triples: Vec<(u64, String, u64)> = self
            .entries
            .iter()
            .map(|(i, v)| (*i, v.numer().to_string(), v.exp()))
            .collect();
        triples.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let triples = Vec::<(u64, String, u64)>::deserialize(deserializer)?;
        let mut entries = BTreeMap::new();
        for (i, numer, exp) in triples {
            if i == 0 {
                return Err(D::Error::custom("coordinate indices are 1-based"));
            }
            let numer: num_bigint::BigInt = numer
                .parse()
                .map_err(|_| D::Error::custom(format!("bad numerator `{numer}`")))?;
            let v = DyadicScalar::new(numer, exp);
            if v.is_zero() {
                return Err(D::Error::custom(format!("stored zero coordinate at index {i}")));
            }
            if entries.insert(i, v).is_some() {
                return Err(D::Error::custom(format!("duplicate index {i}")));
            }
        }
        Ok(SparseVector { entries })
    }
}

/// A vector known only up to a norm ball: some exact value `v` satisfies
/// `‖v − computed‖ ≤ tail_bound`. `tail_bound = 0` means exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedVector {
    pub computed: SparseVector,
    pub tail_bound: DyadicScalar,
    pub norm: NormKind,
}

impl CertifiedVector {
    pub fn exact(computed: SparseVector, norm: NormKind) -> Self {
        CertifiedVector { computed, tail_bound: DyadicScalar::zero(), norm }
    }
}
