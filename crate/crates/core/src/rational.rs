//! Exact rationals and the small integer helpers the rest of the crate leans on.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parses `"a"`, `"-a"` or `"a/b"`. Decimal points and exponents are rejected.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Number of bits of `|n|`, with `bitlength(0) = 0`.
pub fn bitlength(n: &BigInt) -> u64 {
    n.bits()
}

/// Bit length of the ceiling of `|r|`.
pub fn rat_bitlength(r: &Rat) -> u64 {
    let a = r.abs();
    bitlength(&a.ceil().to_integer())
}

pub fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

pub fn rat_pow2(e: i64) -> Rat {
    if e >= 0 {
        big(&pow2(e as u64))
    } else {
        Rat::new(BigInt::one(), pow2((-e) as u64))
    }
}

/// Smallest integer `m` with `m*m >= n` for `n >= 0`.
pub fn ceil_isqrt(n: &BigInt) -> BigInt {
    assert!(n.sign() != Sign::Minus, "square root of a negative integer");
    let s = n.sqrt();
    if &(&s * &s) == n {
        s
    } else {
        s + 1
    }
}

/// A rational upper bound on `sqrt(r)` for `r >= 0`, accurate to about `bits` bits.
pub fn sqrt_upper(r: &Rat, bits: u64) -> Rat {
    let scale = pow2(2 * bits);
    let scaled = (r * big(&scale)).ceil().to_integer();
    Rat::new(ceil_isqrt(&scaled), pow2(bits))
}

/// A rational lower bound on `sqrt(r)` for `r >= 0`, accurate to about `bits` bits.
pub fn sqrt_lower(r: &Rat, bits: u64) -> Rat {
    let scale = pow2(2 * bits);
    let scaled = (r * big(&scale)).floor().to_integer();
    Rat::new(scaled.sqrt(), pow2(bits))
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(it: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Largest power of two `2^e` (e may be negative) with `2^e <= r`, for `r > 0`.
pub fn floor_log2(r: &Rat) -> i64 {
    assert!(r.is_positive());
    let mut e = r.numer().bits() as i64 - r.denom().bits() as i64;
    while rat_pow2(e) > *r {
        e -= 1;
    }
    while rat_pow2(e + 1) <= *r {
        e += 1;
    }
    e
}

/// Rounds `r` to a rational with at most `bits` significant bits, never decreasing it.
pub fn round_up_significant(r: &Rat, bits: u64) -> Rat {
    if r.is_zero() {
        return Rat::zero();
    }
    let e = floor_log2(&r.abs()) - bits as i64;
    let unit = rat_pow2(e);
    let m = (r / &unit).ceil();
    m * unit
}

/// Rounds `r` to at most `bits` significant bits, never increasing it.
pub fn round_down_significant(r: &Rat, bits: u64) -> Rat {
    -round_up_significant(&-r.clone(), bits)
}

/// Smallest `e` with `r <= 2^e`, for `r > 0`.
pub fn ceil_log2(r: &Rat) -> i64 {
    let e = floor_log2(r);
    if rat_pow2(e) == *r {
        e
    } else {
        e + 1
    }
}

/// Nearest integer to `a / b` for `b > 0`, ties rounded up.
pub fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (a * &two + b).div_floor(&(b * &two))
}

pub mod serde_rat {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => parse_rat(&s).map_err(de::Error::custom),
            other => Err(de::Error::custom(format!(
                "rationals must be strings like \"a/b\", got {other}"
            ))),
        }
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "super::serde_rat")] Rat);

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let w: Vec<W> = v.iter().cloned().map(W).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let w: Vec<W> = Vec::deserialize(d)?;
        Ok(w.into_iter().map(|w| w.0).collect())
    }
}
