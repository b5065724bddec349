//! Exact rational helpers: parsing, powers, nearest-integer distance, and
//! deterministic string renderings used by the serialization layer.

use crate::error::{Error, Result};
use crate::fexp::F64x;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn rat_i(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer power with either sign of exponent.
pub fn rat_pow(q: &BigRational, k: i64) -> BigRational {
    assert!(!(q.is_zero() && k < 0), "negative power of zero");
    let kk = i32::try_from(k).expect("exponent fits i32");
    if kk >= 0 {
        num_traits::Pow::pow(q.clone(), kk as u32)
    } else {
        num_traits::Pow::pow(q.clone(), (-kk) as u32).recip()
    }
}

/// Parse "p/q", an integer, or a decimal like "-0.125" / "2.5e-3".
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |why: &str| Error::Validation(format!("cannot parse rational {s:?}: {why}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    // Decimal / scientific form.
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let e: i64 = e.parse().map_err(|_| bad("bad exponent"))?;
            (m, e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad("no digits"));
    }
    let num: BigInt = digits.parse().map_err(|_| bad("bad digits"))?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = rat_i(10);
    Ok(BigRational::from_integer(num) * rat_pow(&ten, shift))
}

/// Canonical exact rendering "p/q" (reduced, positive denominator) or "p"
/// when integral.
pub fn rat_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Deterministic decimal rendering with `frac_digits` digits after the
/// point, round half to even, trailing zeros kept (fixed width aids diffs).
pub fn rat_to_decimal(q: &BigRational, frac_digits: usize) -> String {
    let sign = if q.is_negative() { "-" } else { "" };
    let a = q.abs();
    let scale = num_traits::Pow::pow(BigInt::from(10), frac_digits as u32);
    let scaled = a * BigRational::from_integer(scale.clone());
    // Round half to even on the scaled value.
    let fl = scaled.floor().to_integer();
    let frac = &scaled - BigRational::from_integer(fl.clone());
    let half = rat(1, 2);
    let rounded = if frac > half || (frac == half && (&fl % 2) == BigInt::one()) {
        fl + 1
    } else {
        fl
    };
    let digits = rounded.to_string();
    if frac_digits == 0 {
        return format!("{sign}{digits}");
    }
    let padded = if digits.len() <= frac_digits {
        format!("{}{}", "0".repeat(frac_digits + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - frac_digits);
    format!("{sign}{int_part}.{frac_part}")
}

/// Distance from `q` to the nearest integer, exactly.
pub fn dist_to_nearest_int(q: &BigRational) -> BigRational {
    let frac = q - q.floor();
    let comp = BigRational::one() - &frac;
    if frac <= comp {
        frac
    } else {
        comp
    }
}

pub fn to_f64x(q: &BigRational) -> F64x {
    F64x::from_ratio(q.numer(), q.denom())
}

pub fn approx_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| to_f64x(q).to_f64())
}
