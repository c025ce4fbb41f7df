//! Exact rational probabilities, serialized as `"p/q"` strings.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::str::FromStr;

/// Parse a rational from `"p/q"` or a bare integer `"p"`.
///
/// Whitespace around the numbers is accepted; the result is reduced to
/// lowest terms by construction.
pub fn parse_ratio(s: &str) -> Result<BigRational, RatioParseError> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num_s).map_err(|_| RatioParseError(s.to_owned()))?;
    let den = BigInt::from_str(den_s).map_err(|_| RatioParseError(s.to_owned()))?;
    if den.is_zero() {
        return Err(RatioParseError(s.to_owned()));
    }
    Ok(BigRational::new(num, den))
}

/// Canonical rendering: lowest terms, `"p"` when the denominator is 1,
/// otherwise `"p/q"` with a positive denominator.
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation for display next to the exact value.
pub fn approx_f64(r: &BigRational) -> f64 {
    let scale = BigInt::from(1_000_000_000_000u64);
    let scaled = (r * BigRational::from_integer(scale.clone())).trunc();
    let n: f64 = scaled.numer().to_string().parse().unwrap_or(f64::NAN);
    n / 1e12
}

pub fn is_probability(r: &BigRational) -> bool {
    !r.is_negative() && *r <= BigRational::one()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal: {0:?}")]
pub struct RatioParseError(pub String);
