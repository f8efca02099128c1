//! Exact rational helpers: conversion from binary floats, `p/q` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exact value of a finite binary float.
pub fn from_f64(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite float")
}

pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn from_int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q`, an integer, or a decimal literal (converted exactly).
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(p));
    }
    let x: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: `{s}`")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite value `{s}`")));
    }
    Ok(from_f64(x))
}

pub fn sum<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
    xs.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}

/// n! as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}
