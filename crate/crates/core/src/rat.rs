//! Exact rational cost arithmetic.
//!
//! All monetary quantities are `Ratio<i64>` parsed from decimal literals, so
//! objective values recompute exactly and survive a round trip through the
//! model text format. Denominators stay powers of ten throughout (sums and
//! products of decimals), which keeps `format_decimal` exact.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Rat = Ratio<i64>;

pub fn rat(n: i64) -> Rat {
    Ratio::from_integer(n)
}

/// Parses a plain decimal literal ("38.25", "-4", "0.001") into a rational.
/// At most nine fractional digits are accepted; anything else is rejected so
/// instance files cannot smuggle in values that will not round-trip.
pub fn parse_decimal(text: &str) -> Result<Rat, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("malformed number `{s}`"));
    }
    if frac_part.len() > 9 {
        return Err(format!("`{s}` has more than 9 decimal places"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("malformed number `{s}`"));
    }
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| format!("`{s}` out of range"))?
    };
    let scale = 10i64.pow(frac_part.len() as u32);
    let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().unwrap() };
    let numer = int_val
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or_else(|| format!("`{s}` out of range"))?;
    Ok(Ratio::new(sign * numer, scale))
}

/// Renders a rational whose reduced denominator divides some power of ten as
/// an exact decimal string. Values produced by `parse_decimal` and integer
/// arithmetic always satisfy that; anything else falls back to `n/d`.
pub fn format_decimal(value: &Rat) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let mut denom = *value.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while denom % 2 == 0 {
        denom /= 2;
        twos += 1;
    }
    while denom % 5 == 0 {
        denom /= 5;
        fives += 1;
    }
    if denom != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let digits = twos.max(fives);
    // scale = 10^digits / denom, bringing the value onto denominator 10^digits
    let scale = 10i64.pow(digits) / value.denom();
    let scaled = value.numer() * scale;
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let base = 10u64.pow(digits);
    let int_part = abs / base;
    let frac_part = abs % base;
    if digits == 0 || frac_part == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = format!("{frac_part:0width$}", width = digits as usize);
    format!("{sign}{int_part}.{}", frac.trim_end_matches('0'))
}

pub fn is_nonnegative(value: &Rat) -> bool {
    !value.is_negative()
}
