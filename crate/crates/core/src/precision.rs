//! Arbitrary-precision real scalar used everywhere a float is not provably
//! safe. Thin wrapper over `astro_float::BigFloat` with a fixed rounding mode
//! and panic-on-non-finite discipline: a NaN or infinity is always a bug in
//! this crate, never a value.
//!
//! Precision is carried per value, in bits. Binary operations compute at the
//! larger of the two operand precisions, so mixing precisions widens rather
//! than silently truncating.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

/// Default working precision in bits for top-level entry points.
pub const DEFAULT_PRECISION: usize = 256;

/// Smallest precision this crate computes at. astro-float rounds precision up
/// to whole 64-bit words anyway, so nothing is gained below this.
pub const MIN_PRECISION: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Comparison slack `2^-(p-32)`: the tolerance at which two quantities
/// computed at precision `p` are treated as possibly equal.
///
/// Carries precision `p + 64` so that expressions like `1 + slack` stay
/// exactly representable at the working precision of the sum.
pub fn comparison_slack(p: usize) -> Real {
    Real::exp2(-((p as i64) - 32), p + 64)
}

/// Invariant slack `2^-(p-8)`: the looser tolerance used when checking
/// algebraic identities that accumulate error over many operations.
///
/// Carries precision `p + 64` for the same reason as [`comparison_slack`].
pub fn invariant_slack(p: usize) -> Real {
    Real::exp2(-((p as i64) - 8), p + 64)
}

/// Finite arbitrary-precision real.
#[derive(Clone)]
pub struct Real(BigFloat);

fn fin(v: BigFloat, ctx: &str) -> BigFloat {
    assert!(
        !v.is_nan() && !v.is_inf(),
        "non-finite value produced by {ctx}"
    );
    v
}

impl Real {
    fn clamp_prec(p: usize) -> usize {
        p.max(MIN_PRECISION)
    }

    /// Precision in bits of this value's mantissa. Exact cancellation can
    /// leave a zero of raw precision 0; clamp so downstream operations
    /// always run at a usable precision.
    pub fn precision(&self) -> usize {
        self.0
            .precision()
            .expect("finite value has precision")
            .max(MIN_PRECISION)
    }

    fn work_prec(&self, other: &Real) -> usize {
        self.precision().max(other.precision())
    }

    pub fn zero() -> Real {
        Real(BigFloat::from_i64(0, MIN_PRECISION))
    }

    pub fn one() -> Real {
        Real(BigFloat::from_i64(1, MIN_PRECISION))
    }

    pub fn from_i64(v: i64, p: usize) -> Real {
        Real(BigFloat::from_i64(v, Self::clamp_prec(p)))
    }

    pub fn from_f64(v: f64, p: usize) -> Real {
        assert!(v.is_finite(), "from_f64 requires finite input");
        Real(BigFloat::from_f64(v, Self::clamp_prec(p)))
    }

    /// Exact conversion when `p` is at least the bit length of `v`; correctly
    /// rounded otherwise.
    pub fn from_bigint(v: &BigInt, p: usize) -> Real {
        let p = Self::clamp_prec(p);
        if let Ok(small) = i64::try_from(v) {
            return Real::from_i64(small, p);
        }
        // Hex round-trip: exact digit transport at any size.
        let s = v.to_str_radix(16);
        let bf = with_consts(|cc| BigFloat::parse(&s, Radix::Hex, p, RM, cc));
        Real(fin(bf, "from_bigint"))
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, p: usize) -> Real {
        assert!(!den.is_zero(), "zero denominator");
        let p = Self::clamp_prec(p);
        let n = Real::from_bigint(num, p + 64);
        let d = Real::from_bigint(den, p + 64);
        let q = n.0.div(&d.0, p, RM);
        Real(fin(q, "from_ratio"))
    }

    pub fn from_rational(q: &BigRational, p: usize) -> Real {
        Real::from_ratio(q.numer(), q.denom(), p)
    }

    /// Exact power of two `2^k`.
    pub fn exp2(k: i64, p: usize) -> Real {
        let e = i32::try_from(k + 1).expect("exp2 exponent in range");
        let mut one = BigFloat::from_i64(1, Self::clamp_prec(p));
        // A fresh 1.0 has binary exponent 1 (mantissa 0.5); shifting the
        // exponent rescales by an exact power of two.
        one.set_exponent(e);
        Real(fin(one, "exp2"))
    }

    /// Parse a decimal string (as produced by `to_dec_string`) at precision `p`.
    pub fn parse_dec(s: &str, p: usize) -> Option<Real> {
        let p = Self::clamp_prec(p);
        let bf = with_consts(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc));
        if bf.is_nan() || bf.is_inf() {
            None
        } else {
            Some(Real(bf))
        }
    }

    /// Decimal rendering with enough digits to round-trip at this value's
    /// precision.
    pub fn to_dec_string(&self) -> String {
        format!("{}", self.0)
    }

    /// Lossy downconversion; saturates to +/-inf outside f64 range. For
    /// display and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.0.exponent().expect("finite");
        let mut m = self.0.clone();
        m.set_exponent(0);
        let mf: f64 = m.to_string().parse().expect("mantissa parses");
        // value = mf * 2^e with mf in +-[0.5, 1)
        mf * f64_exp2(e)
    }

    /// Binary exponent `e` with `|x| in [2^(e-1), 2^e)`; `None` for zero.
    pub fn bin_exponent(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            self.0.exponent()
        }
    }

    /// Split into `(m, e)` with `value ~= m * 2^e`, `m` in `+-[0.5, 1)`.
    /// The mantissa is correctly rounded to f64; zero maps to `(0.0, 0)`.
    pub fn frexp_f64(&self) -> (f64, i64) {
        if self.is_zero() {
            return (0.0, 0);
        }
        let e = self.0.exponent().expect("finite") as i64;
        let mut m = self.0.clone();
        m.set_exponent(0);
        let mf: f64 = m.to_string().parse().expect("mantissa parses");
        (mf, e)
    }

    /// Cheap magnitude estimate `log2 |x|` as an f64; `-inf` for zero.
    pub fn mag_log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let e = self.0.exponent().expect("finite") as f64;
        let mut m = self.0.clone();
        m.set_exponent(0);
        let mf: f64 = m.to_string().parse().expect("mantissa parses");
        e + mf.abs().log2()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Some(Sign::Neg) && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Some(Sign::Pos) && !self.0.is_zero()
    }

    pub fn abs(&self) -> Real {
        Real(self.0.abs())
    }

    pub fn neg(&self) -> Real {
        Real(self.0.neg())
    }

    pub fn add(&self, rhs: &Real) -> Real {
        let p = self.work_prec(rhs);
        Real(fin(self.0.add(&rhs.0, p, RM), "add"))
    }

    pub fn sub(&self, rhs: &Real) -> Real {
        let p = self.work_prec(rhs);
        Real(fin(self.0.sub(&rhs.0, p, RM), "sub"))
    }

    pub fn mul(&self, rhs: &Real) -> Real {
        let p = self.work_prec(rhs);
        Real(fin(self.0.mul(&rhs.0, p, RM), "mul"))
    }

    pub fn div(&self, rhs: &Real) -> Real {
        assert!(!rhs.is_zero(), "division by zero");
        let p = self.work_prec(rhs);
        Real(fin(self.0.div(&rhs.0, p, RM), "div"))
    }

    pub fn recip(&self) -> Real {
        assert!(!self.is_zero(), "reciprocal of zero");
        let p = self.precision();
        Real(fin(BigFloat::from_i64(1, p).div(&self.0, p, RM), "recip"))
    }

    pub fn sqrt(&self) -> Real {
        assert!(!self.is_negative(), "sqrt of negative value");
        let p = self.precision();
        Real(fin(self.0.sqrt(p, RM), "sqrt"))
    }

    pub fn exp(&self) -> Real {
        let p = self.precision();
        let v = with_consts(|cc| self.0.exp(p, RM, cc));
        Real(fin(v, "exp"))
    }

    pub fn ln(&self) -> Real {
        assert!(self.is_positive(), "ln requires a positive argument");
        let p = self.precision();
        let v = with_consts(|cc| self.0.ln(p, RM, cc));
        Real(fin(v, "ln"))
    }

    /// Integer power by binary exponentiation, any sign of `n`.
    pub fn powi(&self, n: i64) -> Real {
        let p = self.precision();
        if n == 0 {
            return Real::from_i64(1, p);
        }
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Real::from_i64(1, p);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// `self^(num/den)` for positive `self`, via exp(q ln x) at guarded
    /// precision.
    pub fn pow_rational(&self, q: &BigRational) -> Real {
        assert!(self.is_positive(), "rational power requires positive base");
        let p = self.precision();
        if q.is_zero() {
            return Real::from_i64(1, p);
        }
        let pw = p + 64;
        let x = self.with_precision(pw);
        let qr = Real::from_rational(q, pw);
        let r = x.ln().mul(&qr).exp();
        r.with_precision(p)
    }

    /// `self^e` for positive `self`, via exp(e ln x) at guarded precision.
    pub fn pow(&self, e: &Real) -> Real {
        assert!(self.is_positive(), "real power requires positive base");
        let p = self.precision().max(e.precision());
        if e.is_zero() {
            return Real::from_i64(1, p);
        }
        let pw = p + 64;
        let x = self.with_precision(pw);
        let r = x.ln().mul(&e.with_precision(pw)).exp();
        r.with_precision(p)
    }

    /// Round (if narrowing) or zero-pad (if widening) to precision `p`.
    pub fn with_precision(&self, p: usize) -> Real {
        let p = Self::clamp_prec(p);
        let mut v = self.0.clone();
        v.set_precision(p, RM).expect("set_precision");
        Real(fin(v, "with_precision"))
    }

    pub fn cmp_total(&self, other: &Real) -> Ordering {
        self.0.partial_cmp(&other.0).expect("finite comparison")
    }

    pub fn min_of(&self, other: &Real) -> Real {
        if self.cmp_total(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn max_of(&self, other: &Real) -> Real {
        if self.cmp_total(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Exact value as a (dyadic) rational. Every finite Real is m * 2^k.
    pub fn to_rational(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::from_integer(BigInt::from(0));
        }
        let (words, prec, sign, exp, _) = self.0.as_raw_parts().expect("finite");
        let mut bytes = Vec::with_capacity(words.len() * 8);
        for w in words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        let mut m = BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes);
        if sign == Sign::Neg {
            m = -m;
        }
        // value = m * 2^(exp - prec)
        let shift = exp as i64 - prec as i64;
        let q = BigRational::from_integer(m);
        if shift >= 0 {
            q * BigRational::from_integer(BigInt::from(1) << shift as u64)
        } else {
            q / BigRational::from_integer(BigInt::from(1) << (-shift) as u64)
        }
    }

    /// round(self * 2^t) as an exact integer (ties away from zero).
    pub fn to_scaled_bigint(&self, t: i64) -> BigInt {
        use num_traits::Signed as _;
        let two_t = BigRational::from_integer(BigInt::from(1) << t.unsigned_abs());
        let q = if t >= 0 {
            self.to_rational() * two_t
        } else {
            self.to_rational() / two_t
        };
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let shifted = if q.is_negative() { &q - &half } else { &q + &half };
        shifted.trunc().to_integer()
    }

    /// Exact m * 2^(-t).
    pub fn from_dyadic(m: &BigInt, t: i64, p: usize) -> Real {
        Real::from_bigint(m, p).mul(&Real::exp2(-t, p))
    }

    /// Largest integer `<= self`, as i64. Panics if out of range.
    pub fn floor_i64(&self) -> i64 {
        let e = match self.bin_exponent() {
            None => return 0,
            Some(e) => e,
        };
        assert!(e < 63, "floor_i64 out of range");
        // Scan candidates around the f64 estimate; error there is far below 1
        // for in-range magnitudes.
        let est = self.to_f64().floor() as i64;
        for cand in [est - 1, est, est + 1] {
            let c = Real::from_i64(cand, self.precision());
            let c1 = Real::from_i64(cand + 1, self.precision());
            if c.cmp_total(self) != Ordering::Greater && self.cmp_total(&c1) == Ordering::Less {
                return cand;
            }
        }
        unreachable!("floor_i64 scan failed");
    }
}

fn f64_exp2(e: i32) -> f64 {
    // 2^e with saturation; avoids powi precision quirks by bit assembly when
    // in normal range.
    if e >= 1024 {
        f64::INFINITY
    } else if e <= -1022 {
        // Subnormal or underflow territory: fall back, fine for diagnostics.
        (2.0f64).powi(e)
    } else {
        f64::from_bits(((e + 1023) as u64) << 52)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({} @{}b)", self.to_f64(), self.precision())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dec_string())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_total(other) == Ordering::Equal
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_total(other))
    }
}

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_dec_string())
    }
}
