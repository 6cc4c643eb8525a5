use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rat = BigRational;

/// Integer that serializes as a JSON number when it fits in `i64` and as a
/// base-10 string otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Int(pub BigInt);

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int(BigInt::from(v))
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int(v)
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct IntVisitor;

impl<'de> Visitor<'de> for IntVisitor {
    type Value = Int;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a base-10 integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Int, E> {
        Ok(Int::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Int, E> {
        Ok(Int(BigInt::from(v)))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Int, E> {
        BigInt::from_str(v.trim()).map(Int).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

/// Rational serialized as a `[numerator, denominator]` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPair(pub Rat);

impl Serialize for RatPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pair = (Int(self.0.numer().clone()), Int(self.0.denom().clone()));
        pair.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<RatPair, D::Error> {
        let (n, den): (Int, Int) = Deserialize::deserialize(d)?;
        if den.0.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(RatPair(Rat::new(n.0, den.0)))
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Smallest integer not below `x`.
pub fn ceil_rat(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

/// Exponent of `p` in the nonzero integer `n`.
pub fn p_adic_val(n: &BigInt, p: u64) -> u32 {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    while !m.is_zero() && (&m % &pb).is_zero() {
        m /= &pb;
        v += 1;
    }
    v
}

/// `Some(k)` when `q = p^k` with `k >= 1`.
pub fn log_p(q: u64, p: u64) -> Option<u32> {
    if q < p {
        return None;
    }
    let mut k = 0;
    let mut m = q;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    (m == 1).then_some(k)
}
