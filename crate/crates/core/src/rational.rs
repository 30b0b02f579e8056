//! Exact rationals and the `(2π)^n` scale tag.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((whole, dec)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), dec);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num::pow(BigInt::from(10), dec.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// `"p/q"`, or `"p"` for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_q_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(fmt_q).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// An exact value `value · (2π)^two_pi_power`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaled {
    #[serde(with = "serde_q")]
    pub value: Q,
    pub two_pi_power: u32,
}

impl Scaled {
    pub fn new(value: Q, two_pi_power: u32) -> Self {
        Self { value, two_pi_power }
    }

    pub fn zero(two_pi_power: u32) -> Self {
        Self::new(Q::zero(), two_pi_power)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value) * (2.0 * std::f64::consts::PI).powi(self.two_pi_power as i32)
    }

    /// Product of two tagged values; the tags add.
    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled::new(&self.value * &other.value, self.two_pi_power + other.two_pi_power)
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.two_pi_power {
            0 => write!(f, "{}", fmt_q(&self.value)),
            1 => write!(f, "{}·(2π)", fmt_q(&self.value)),
            p => write!(f, "{}·(2π)^{}", fmt_q(&self.value), p),
        }
    }
}

/// Rounds to 12 significant digits so reports are byte-stable.
pub fn fixed(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Serde adapter writing floats through [`fixed`].
pub mod serde_fixed {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(super::fixed(*x))
    }
}

pub mod serde_fixed_opt {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&super::fixed(*v)),
            None => s.serialize_none(),
        }
    }
}

pub mod serde_fixed_vec {
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<f64> = xs.iter().map(|x| super::fixed(*x)).collect();
        v.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_q("-7").unwrap(), q(-7));
        assert_eq!(parse_q("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), frac(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn format_integers_without_denominator() {
        assert_eq!(fmt_q(&q(0)), "0");
        assert_eq!(fmt_q(&frac(-3, 2)), "-3/2");
    }
}
