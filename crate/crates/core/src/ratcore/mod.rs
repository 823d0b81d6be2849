//! Exact rational linear algebra and strict-sign linear feasibility.
//!
//! Every structural quantity of a network (ranks, kernels, deficiencies, sign
//! sets) is computed here over arbitrary-precision rationals, so the results
//! carry no floating-point ambiguity.

mod lp;
mod matrix;

pub use lp::{strict_sign_feasible, StrictSignOutcome};
pub use matrix::{RationalMatrix, RrefResult, SubspaceBasis};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{GmasError, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_i(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q", an integer, or a decimal such as "2.5" or "-0.125" exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || GmasError::Invalid(format!("cannot parse rational '{s}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(GmasError::Invalid(format!("zero denominator in '{s}'")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_val: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().map_err(|_| bad())?
        };
        let frac_val: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mut value = Rational::new(int_val * &scale + frac_val, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Renders a rational as "p/q", or just "p" for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Split into integer quotient and remainder so huge numerators stay in range.
    let (q, rem) = (r.numer() / r.denom(), r.numer() % r.denom());
    let q_f64 = big_to_f64(&q);
    let rem_f64 = big_to_f64(&rem) / big_to_f64(r.denom());
    q_f64 + rem_f64
}

fn big_to_f64(b: &BigInt) -> f64 {
    let s = b.to_string();
    s.parse().unwrap_or(if b.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}
