//! Exact rational helpers on top of [`num_rational::BigRational`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always normalized (lowest terms, positive denominator).
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
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

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"-0.4"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `"p/q"` rendering used in every serialized artifact.
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Bit size of the larger of numerator and denominator.
pub fn bits(r: &Rational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn min<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Exact square root when `r` is the square of a rational.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Dyadic rational within `2^-precision` below `sqrt(r)`.
pub fn approx_sqrt(r: &Rational, precision: u32) -> Rational {
    let scale = num_traits::pow(BigInt::from(2), precision as usize);
    let scaled = (r * Rational::from_integer(&scale * &scale)).floor().to_integer();
    Rational::new(scaled.sqrt(), scale)
}

/// Fails with [`Error::ArithmeticBudgetExceeded`] once `r` outgrows `budget` bits.
pub fn check_budget(r: &Rational, budget: u64, context: &str) -> Result<()> {
    let b = bits(r);
    if b > budget {
        return Err(Error::ArithmeticBudgetExceeded {
            context: context.to_string(),
            bits: b,
            budget,
        });
    }
    Ok(())
}

/// Rational `i/n`, convenience for grids.
pub fn grid_point(i: usize, n: usize) -> Rational {
    Rational::new(BigInt::from(i), BigInt::from(n))
}

/// Dyadic midpoint-friendly rounding towards zero to `2^-precision`.
pub fn round_dyadic(r: &Rational, precision: u32) -> Rational {
    let scale = num_traits::pow(BigInt::from(2), precision as usize);
    let scaled = (r * Rational::from_integer(scale.clone())).floor().to_integer();
    Rational::new(scaled, scale)
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}
