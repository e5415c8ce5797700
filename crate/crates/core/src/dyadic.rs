//! Exact dyadic rational scalars.
//!
//! Every coefficient produced by the constructions in this crate is of the
//! form `p · 2^(-e)` with integer `p` and non-negative `e`: operator weights
//! are powers of two, thresholds are powers of two, and the dyadics are
//! closed under `+`, `-`, `*`, and scaling by `2^(±j)`. Working in this ring
//! exactly removes rounding from the picture entirely; every comparison in a
//! certificate is a statement about integers.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact dyadic rational `numer · 2^(-exp)`.
///
/// Canonical form: `exp == 0` or `numer` is odd (the fraction is in lowest
/// terms), and `numer == 0` forces `exp == 0`. All constructors and
/// operations normalize, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicScalar {
    numer: BigInt,
    exp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseDyadicError {
    #[error("empty dyadic literal")]
    Empty,
    #[error("invalid integer part in dyadic literal `{0}`")]
    BadNumerator(String),
    #[error("denominator of `{0}` is not a power of two")]
    BadDenominator(String),
    #[error("invalid exponent in dyadic literal `{0}`")]
    BadExponent(String),
    #[error("decimal notation is not accepted; write `{0}` as p, p/q, or p/2^e")]
    DecimalRejected(String),
}

impl DyadicScalar {
    /// Builds `numer · 2^(-exp)` and normalizes to canonical form.
    pub fn new(numer: impl Into<BigInt>, exp: u64) -> Self {
        let mut out = DyadicScalar { numer: numer.into(), exp };
        out.normalize();
        out
    }

    pub fn zero() -> Self {
        DyadicScalar { numer: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        DyadicScalar { numer: BigInt::one(), exp: 0 }
    }

    /// Exactly `2^k`, for `k` of either sign.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            DyadicScalar { numer: BigInt::one() << (k as u64), exp: 0 }
        } else {
            DyadicScalar { numer: BigInt::one(), exp: k.unsigned_abs() }
        }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        DyadicScalar { numer: n.into(), exp: 0 }
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.numer.is_positive()
    }

    pub fn abs(&self) -> Self {
        DyadicScalar { numer: self.numer.abs(), exp: self.exp }
    }

    /// Multiplies by `2^j` exactly.
    pub fn shift2(&self, j: i64) -> Self {
        if self.numer.is_zero() {
            return Self::zero();
        }
        if j >= 0 {
            let j = j as u64;
            let cancel = j.min(self.exp);
            DyadicScalar {
                numer: &self.numer << (j - cancel),
                exp: self.exp - cancel,
            }
        } else {
            // Numerator parity is unchanged, but an integer (exp == 0) may
            // have an even numerator that now cancels.
            Self::new(self.numer.clone(), self.exp + j.unsigned_abs())
        }
    }

    /// Exact test `self < 2^(-k)`, no rounding. `k` may be negative.
    pub fn lt_pow2(&self, k: i64) -> bool {
        if !self.numer.is_positive() {
            return true;
        }
        // numer · 2^(-exp) < 2^(-k)  ⟺  numer < 2^(exp - k).
        let t = self.exp as i128 - k as i128;
        if t <= 0 {
            return false;
        }
        // For positive numer: numer < 2^t ⟺ bit length of numer ≤ t.
        (self.numer.bits() as i128) <= t
    }

    fn normalize(&mut self) {
        if self.numer.is_zero() {
            self.exp = 0;
            return;
        }
        if self.exp == 0 {
            return;
        }
        let tz = self.numer.trailing_zeros().unwrap_or(0);
        let cancel = tz.min(self.exp);
        if cancel > 0 {
            self.numer = &self.numer >> cancel;
            self.exp -= cancel;
        }
    }

    /// Exact `self^m` (with `self^0 = 1`).
    pub fn pow(&self, m: u64) -> Self {
        let mut acc = DyadicScalar::one();
        let mut base = self.clone();
        let mut m = m;
        while m > 0 {
            if m & 1 == 1 {
                acc = &acc * &base;
            }
            m >>= 1;
            if m > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Compact exact literal `p` or `p/2^e`, independent of magnitude.
    pub fn to_pow_literal(&self) -> String {
        if self.exp == 0 {
            self.numer.to_string()
        } else {
            format!("{}/2^{}", self.numer, self.exp)
        }
    }
}

impl fmt::Display for DyadicScalar {
    /// Renders `p` for integers and `p/q` with `q = 2^e` otherwise, e.g.
    /// `3/4`, `-1/8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, BigUint::one() << self.exp)
        }
    }
}

impl fmt::Debug for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DyadicScalar({})", self.to_pow_literal())
    }
}

impl FromStr for DyadicScalar {
    type Err = ParseDyadicError;

    /// Accepts `p`, `p/q` with `q` a decimal power of two, and `p/2^e`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        if s.contains('.') {
            return Err(ParseDyadicError::DecimalRejected(s.to_string()));
        }
        let (num_part, den_part) = match s.split_once('/') {
            None => (s, None),
            Some((n, d)) => (n, Some(d)),
        };
        let numer = BigInt::from_str(num_part.trim())
            .map_err(|_| ParseDyadicError::BadNumerator(s.to_string()))?;
        let exp = match den_part {
            None => 0,
            Some(d) => {
                let d = d.trim();
                if let Some(e) = d.strip_prefix("2^") {
                    u64::from_str(e.trim())
                        .map_err(|_| ParseDyadicError::BadExponent(s.to_string()))?
                } else {
                    let q = BigUint::from_str(d)
                        .map_err(|_| ParseDyadicError::BadDenominator(s.to_string()))?;
                    if q.is_zero() || q.count_ones() != 1 {
                        return Err(ParseDyadicError::BadDenominator(s.to_string()));
                    }
                    q.trailing_zeros().unwrap_or(0)
                }
            }
        };
        Ok(DyadicScalar::new(numer, exp))
    }
}

impl PartialOrd for DyadicScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        // p1·2^(-e1) vs p2·2^(-e2)  ⟺  p1·2^(e2) vs p2·2^(e1).
        match (self.numer.sign(), other.numer.sign()) {
            (Sign::Minus, Sign::NoSign | Sign::Plus) => return Ordering::Less,
            (Sign::NoSign, Sign::Plus) => return Ordering::Less,
            (Sign::Plus, Sign::NoSign | Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        let lhs = &self.numer << other.exp;
        let rhs = &other.numer << self.exp;
        lhs.cmp(&rhs)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for DyadicScalar {
            type Output = DyadicScalar;
            fn $method(self, rhs: DyadicScalar) -> DyadicScalar {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&DyadicScalar> for DyadicScalar {
            type Output = DyadicScalar;
            fn $method(self, rhs: &DyadicScalar) -> DyadicScalar {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<DyadicScalar> for &DyadicScalar {
            type Output = DyadicScalar;
            fn $method(self, rhs: DyadicScalar) -> DyadicScalar {
                self.$method(&rhs)
            }
        }
    };
}

impl std::ops::Add<&DyadicScalar> for &DyadicScalar {
    type Output = DyadicScalar;
    fn add(self, rhs: &DyadicScalar) -> DyadicScalar {
        let exp = self.exp.max(rhs.exp);
        let lhs = &self.numer << (exp - self.exp);
        let rhs = &rhs.numer << (exp - rhs.exp);
        DyadicScalar::new(lhs + rhs, exp)
    }
}
forward_binop!(Add, add);

impl std::ops::Sub<&DyadicScalar> for &DyadicScalar {
    type Output = DyadicScalar;
    fn sub(self, rhs: &DyadicScalar) -> DyadicScalar {
        let exp = self.exp.max(rhs.exp);
        let lhs = &self.numer << (exp - self.exp);
        let rhs = &rhs.numer << (exp - rhs.exp);
        DyadicScalar::new(lhs - rhs, exp)
    }
}
forward_binop!(Sub, sub);

impl std::ops::Mul<&DyadicScalar> for &DyadicScalar {
    type Output = DyadicScalar;
    fn mul(self, rhs: &DyadicScalar) -> DyadicScalar {
        DyadicScalar::new(&self.numer * &rhs.numer, self.exp + rhs.exp)
    }
}
forward_binop!(Mul, mul);

impl std::ops::Neg for &DyadicScalar {
    type Output = DyadicScalar;
    fn neg(self) -> DyadicScalar {
        DyadicScalar { numer: -&self.numer, exp: self.exp }
    }
}

impl std::ops::Neg for DyadicScalar {
    type Output = DyadicScalar;
    fn neg(self) -> DyadicScalar {
        DyadicScalar { numer: -self.numer, exp: self.exp }
    }
}

impl From<i64> for DyadicScalar {
    fn from(n: i64) -> Self {
        DyadicScalar::from_integer(n)
    }
}

impl Serialize for DyadicScalar {
    /// Integers that fit in an `i64` serialize as JSON numbers; everything
    /// else as an exact `"p"` / `"p/2^e"` string. Both directions are
    /// bit-exact.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.exp == 0 {
            if let Ok(n) = i64::try_from(&self.numer) {
                return serializer.serialize_i64(n);
            }
        }
        serializer.serialize_str(&self.to_pow_literal())
    }
}

impl<'de> Deserialize<'de> for DyadicScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct DyadicVisitor;

        impl Visitor<'_> for DyadicVisitor {
            type Value = DyadicScalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a dyadic literal string `p`, `p/q`, `p/2^e`")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(DyadicScalar::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(DyadicScalar::from_integer(v))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Err(E::custom(format!(
                    "decimal literals are not accepted (got {v}); use p, p/q, or p/2^e"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(DyadicVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicScalar {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_matches_hand_values() {
        assert_eq!(d("1/2") + d("1/4"), d("3/4"));
        assert_eq!(d("-3/8") * d("2"), d("-3/4"));
        assert_eq!(d("5").shift2(-3), d("5/8"));
        assert_eq!(d("3/4").shift2(2), d("3"));
        assert_eq!(d("1/2") - d("1/2"), DyadicScalar::zero());
    }

    #[test]
    fn canonical_form_is_lowest_terms() {
        let v = DyadicScalar::new(6, 3); // 6/8
        assert_eq!(v, d("3/4"));
        assert_eq!(v.numer(), &BigInt::from(3));
        assert_eq!(v.exp(), 2);
        // Integers keep exponent zero regardless of parity.
        let n = DyadicScalar::from_integer(-4);
        assert_eq!(n.exp(), 0);
        // Zero collapses to (0, 0).
        let z = DyadicScalar::new(0, 17);
        assert_eq!(z, DyadicScalar::zero());
        assert_eq!(z.exp(), 0);
    }

    #[test]
    fn lt_pow2_strict_threshold() {
        assert!(d("1/4").lt_pow2(1));
        assert!(!d("1/2").lt_pow2(1)); // strict at the boundary
        assert!(DyadicScalar::zero().lt_pow2(100));
        assert!(d("-7").lt_pow2(5));
        assert!(d("3/16").lt_pow2(2));
        assert!(!d("5/16").lt_pow2(2));
        // Negative k: 3 < 4 = 2^(-(-2)).
        assert!(d("3").lt_pow2(-2));
        assert!(!d("4").lt_pow2(-2));
    }

    #[test]
    fn lt_pow2_agrees_with_integer_oracle() {
        // Oracle: a < 2^(-k) ⟺ 2^k · a < 1, checked by full arithmetic.
        let values = ["0", "1", "-1", "1/2", "3/4", "17/32", "255/256", "-9/2^40", "1025/2^10"];
        for s in values {
            let a = d(s);
            for k in -8i64..=64 {
                let scaled = a.shift2(k);
                assert_eq!(
                    a.lt_pow2(k),
                    scaled < DyadicScalar::one(),
                    "mismatch for {s} at k={k}"
                );
            }
        }
    }

    #[test]
    fn ordering_crosses_exponents() {
        assert!(d("1/4") < d("1/2"));
        assert!(d("-1/2") < d("1/1024"));
        assert!(d("5/8") > d("9/16"));
        assert_eq!(d("2/4").cmp(&d("1/2")), Ordering::Equal);
    }

    #[test]
    fn literal_forms_round_trip() {
        for s in ["0", "7", "-2", "3/4", "-1/8", "5/2^7", "-1025/2^100"] {
            let v = d(s);
            assert_eq!(v.to_pow_literal().parse::<DyadicScalar>().unwrap(), v);
            assert_eq!(v.to_string().parse::<DyadicScalar>().unwrap(), v);
        }
        assert_eq!(d("3/4").to_string(), "3/4");
        assert_eq!(d("-1/8").to_string(), "-1/8");
        assert_eq!(d("-1/8").to_pow_literal(), "-1/2^3");
        assert_eq!(d("6/8"), d("3/4"));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<DyadicScalar>().is_err());
        assert!("0.5".parse::<DyadicScalar>().is_err());
        assert!("1/3".parse::<DyadicScalar>().is_err());
        assert!("1/0".parse::<DyadicScalar>().is_err());
        assert!("1/2^x".parse::<DyadicScalar>().is_err());
        assert!("x/2".parse::<DyadicScalar>().is_err());
    }

    #[test]
    fn json_forms_are_exact() {
        let small: DyadicScalar = serde_json::from_str("2").unwrap();
        assert_eq!(small, d("2"));
        assert_eq!(serde_json::to_string(&small).unwrap(), "2");
        let frac = d("-3/2^70");
        let text = serde_json::to_string(&frac).unwrap();
        assert_eq!(text, "\"-3/2^70\"");
        assert_eq!(serde_json::from_str::<DyadicScalar>(&text).unwrap(), frac);
        assert!(serde_json::from_str::<DyadicScalar>("0.25").is_err());
    }

    #[test]
    fn shift2_round_trips() {
        let v = d("19/2^5");
        assert_eq!(v.shift2(11).shift2(-11), v);
        assert_eq!(v.shift2(0), v);
        assert_eq!(DyadicScalar::zero().shift2(-40), DyadicScalar::zero());
        assert_eq!(DyadicScalar::pow2(-3), d("1/8"));
        assert_eq!(DyadicScalar::pow2(4), d("16"));
    }
}
