//! Exact rationals: parsing, canonical `p/q` text form and serde helpers.
//!
//! Every rational that crosses a file or CLI boundary is written as a string
//! (`"3/8"`, `"-1"`), never as a float.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `p/q`, an integer, or a finite decimal literal (`0.25`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let bad = || Error::Parse(format!("malformed rational `{text}`"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        let frac: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let magnitude = BigRational::new(whole * &scale + frac, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-n`.
pub fn dyadic(n: usize) -> Rational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio of huge integers: scale both down before dividing.
        let n = r.numer().bits().max(r.denom().bits());
        let shift = n.saturating_sub(1000) as usize;
        let num = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let den = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        num / den
    })
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite coefficient {x}")))
}

/// Smallest `n ≥ 0` with `2^-n ≤ r`, i.e. `⌈−log₂ r⌉` for `0 < r ≤ 1`.
pub fn neg_log2_ceil(r: &Rational) -> Result<usize> {
    if !r.is_positive() || *r > Rational::one() {
        return Err(Error::InvalidArgument(format!("radius {} must lie in (0, 1]", format_rational(r))));
    }
    // 2^n * r >= 1  <=>  2^n * num >= den
    let num = r.numer();
    let den = r.denom();
    let mut n = (den.bits().saturating_sub(num.bits())) as usize;
    n = n.saturating_sub(1);
    while (num << n) < *den {
        n += 1;
    }
    Ok(n)
}

pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

pub mod serde_str_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        items.iter().map(|t| parse_rational(t).map_err(serde::de::Error::custom)).collect()
    }
}
