//! Exact rational numbers and their `"p/q"` wire format.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every exact computation in the crate.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

/// Canonical `"p/q"` form (`"p"` when the denominator is one).
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering for display only.
pub fn decimal(r: &Rational) -> String {
    format!("{:.6}", to_f64(r))
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Rational {
    items.into_iter().fold(zero(), |acc, x| acc + x)
}

const UNIT_BITS: u32 = 53;

/// Uniform draw from `{k / 2^53 : 0 <= k < 2^53}`, compared exactly against
/// rational cumulative probabilities.
pub fn uniform_unit<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let k: u64 = rng.gen::<u64>() >> (64 - UNIT_BITS);
    Rational::new(BigInt::from(k), BigInt::from(1u64 << UNIT_BITS))
}

/// Index `i` such that `u` falls into the `i`-th cell of the cumulative
/// distribution `probs`; `probs.len()` when `u` lands in the leftover mass.
pub fn pick(u: &Rational, probs: &[Rational]) -> usize {
    let mut acc = zero();
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < &acc {
            return i;
        }
    }
    probs.len()
}

/// Serde adapter so wire structs can hold rationals as `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatStr(pub Rational);

impl Serialize for RatStr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse(&s).map(RatStr).map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(RatStr(int(n))),
        }
    }
}

impl From<Rational> for RatStr {
    fn from(r: Rational) -> Self {
        RatStr(r)
    }
}

impl From<&Rational> for RatStr {
    fn from(r: &Rational) -> Self {
        RatStr(r.clone())
    }
}

impl fmt::Display for RatStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(&self.0))
    }
}

pub fn to_wire(v: &[Rational]) -> Vec<RatStr> {
    v.iter().map(RatStr::from).collect()
}

pub fn from_wire(v: Vec<RatStr>) -> Vec<Rational> {
    v.into_iter().map(|r| r.0).collect()
}

/// `#[serde(with = "rational::as_str")]` for a single rational field.
pub mod as_str {
    use super::{RatStr, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RatStr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        Ok(RatStr::deserialize(d)?.0)
    }
}

/// `#[serde(with = "rational::vec_as_str")]` for `Vec<Rational>` fields.
pub mod vec_as_str {
    use super::{from_wire, to_wire, RatStr, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        to_wire(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Ok(from_wire(Vec::<RatStr>::deserialize(d)?))
    }
}

/// Same for `Vec<Vec<Rational>>`.
pub mod matrix_as_str {
    use super::{from_wire, to_wire, RatStr, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| to_wire(r)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        Ok(Vec::<Vec<RatStr>>::deserialize(d)?.into_iter().map(from_wire).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse("6/8").unwrap(), ratio(3, 4));
        assert_eq!(parse("-2").unwrap(), int(-2));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format(&ratio(2, 4)), "1/2");
        assert_eq!(format(&int(7)), "7");
        assert_eq!(format(&ratio(-3, 9)), "-1/3");
    }

    #[test]
    fn wire_round_trip() {
        let v = vec![ratio(1, 3), int(5), ratio(-7, 2)];
        let json = serde_json::to_string(&to_wire(&v)).unwrap();
        assert_eq!(json, r#"["1/3","5","-7/2"]"#);
        let back: Vec<RatStr> = serde_json::from_str(&json).unwrap();
        assert_eq!(from_wire(back), v);
    }

    #[test]
    fn pick_respects_cells() {
        let probs = vec![ratio(1, 4), ratio(1, 4)];
        assert_eq!(pick(&ratio(0, 1), &probs), 0);
        assert_eq!(pick(&ratio(1, 4), &probs), 1);
        assert_eq!(pick(&ratio(1, 2), &probs), 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = uniform_unit(&mut rng);
            assert!(u >= zero() && u < one());
        }
    }
}
