//! Floating scalar with an f64 mantissa and an unbounded (i64) binary
//! exponent. Gives ~53 bits of relative accuracy at any magnitude, which is
//! exactly what the fast lattice-reduction path needs: entries there span
//! exponent ranges far beyond f64 but are only ever combined through
//! cancellation-free sums of squares, so 53 bits is plenty once the one
//! cancellation-prone step is done in exact integers upstream.

use crate::precision::Real;
use num_bigint::BigInt;
use num_traits::Zero;
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value `m * 2^e` with `|m| in [1, 2)` or `m == 0`.
#[derive(Clone, Copy, Debug)]
pub struct F64x {
    m: f64,
    e: i64,
}

pub const ZERO: F64x = F64x { m: 0.0, e: 0 };
pub const ONE: F64x = F64x { m: 1.0, e: 0 };

fn split(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // Subnormal: rescale into normal range first.
        let (m, e) = split(x * f64::exp2(200.0));
        return (m, e - 200);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, raw - 1023)
}

impl F64x {
    pub fn normalize(m: f64, e: i64) -> F64x {
        if m == 0.0 {
            return ZERO;
        }
        assert!(m.is_finite(), "non-finite mantissa");
        let (m2, de) = split(m);
        F64x { m: m2, e: e + de }
    }

    pub fn from_f64(v: f64) -> F64x {
        F64x::normalize(v, 0)
    }

    pub fn from_i64(v: i64) -> F64x {
        F64x::normalize(v as f64, 0)
    }

    /// Truncating conversion; relative error below `2^-52`.
    pub fn from_bigint(v: &BigInt) -> F64x {
        if v.is_zero() {
            return ZERO;
        }
        let bits = v.bits();
        if bits <= 53 {
            let (sign, digits) = v.to_u64_digits();
            let mut val = digits[0] as f64;
            if sign == num_bigint::Sign::Minus {
                val = -val;
            }
            return F64x::from_f64(val);
        }
        let shift = bits - 53;
        let top: BigInt = v >> shift;
        let (sign, digits) = top.to_u64_digits();
        let mut val = digits[0] as f64;
        if sign == num_bigint::Sign::Minus {
            val = -val;
        }
        F64x::normalize(val, shift as i64)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt) -> F64x {
        assert!(!den.is_zero(), "zero denominator");
        F64x::from_bigint(num) / F64x::from_bigint(den)
    }

    pub fn from_real(r: &Real) -> F64x {
        let (m, e) = r.frexp_f64();
        F64x::normalize(m, e)
    }

    pub fn to_real(&self, p: usize) -> Real {
        if self.m == 0.0 {
            return Real::zero();
        }
        Real::from_f64(self.m, p).mul(&Real::exp2(self.e, p))
    }

    /// Lossy; saturates outside f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else if self.e > 1100 {
            f64::INFINITY * self.m.signum()
        } else if self.e < -1100 {
            0.0
        } else {
            self.m * f64::exp2(self.e as f64)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.m < 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.m > 0.0
    }

    pub fn abs(&self) -> F64x {
        F64x {
            m: self.m.abs(),
            e: self.e,
        }
    }

    pub fn sqrt(&self) -> F64x {
        assert!(self.m >= 0.0, "sqrt of negative value");
        if self.m == 0.0 {
            return ZERO;
        }
        let (mut m, mut e) = (self.m, self.e);
        if e.rem_euclid(2) != 0 {
            m *= 2.0;
            e -= 1;
        }
        F64x::normalize(m.sqrt(), e / 2)
    }

    /// `log2 |x|`; `-inf` for zero.
    pub fn mag_log2(&self) -> f64 {
        if self.m == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.e as f64 + self.m.abs().log2()
        }
    }

    pub fn powi(&self, n: i64) -> F64x {
        if n == 0 {
            return ONE;
        }
        let mut base = if n < 0 { ONE / *self } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn cmp_total(&self, other: &F64x) -> Ordering {
        let sa = sign_class(self);
        let sb = sign_class(other);
        if sa != sb {
            return sa.cmp(&sb);
        }
        match sa {
            0 => Ordering::Equal,
            1 => cmp_mag(self, other),
            _ => cmp_mag(other, self),
        }
    }
}

fn sign_class(x: &F64x) -> i8 {
    if x.m == 0.0 {
        0
    } else if x.m > 0.0 {
        1
    } else {
        -1
    }
}

fn cmp_mag(a: &F64x, b: &F64x) -> Ordering {
    match a.e.cmp(&b.e) {
        Ordering::Equal => a.m.abs().partial_cmp(&b.m.abs()).unwrap(),
        o => o,
    }
}

impl PartialEq for F64x {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_total(other) == Ordering::Equal
    }
}

impl PartialOrd for F64x {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_total(other))
    }
}

impl Add for F64x {
    type Output = F64x;
    fn add(self, rhs: F64x) -> F64x {
        if self.m == 0.0 {
            return rhs;
        }
        if rhs.m == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= rhs.e {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = hi.e - lo.e;
        if d > 54 {
            return hi;
        }
        // 2^-d is an exact power of two, so the scaled mantissa stays normal
        // (magnitude >= 2^-54 * 1) and the sum is an ordinary f64 add.
        let m = hi.m + lo.m * f64::exp2(-(d as f64));
        F64x::normalize(m, hi.e)
    }
}

impl Sub for F64x {
    type Output = F64x;
    fn sub(self, rhs: F64x) -> F64x {
        self + (-rhs)
    }
}

impl Neg for F64x {
    type Output = F64x;
    fn neg(self) -> F64x {
        F64x {
            m: -self.m,
            e: self.e,
        }
    }
}

impl Mul for F64x {
    type Output = F64x;
    fn mul(self, rhs: F64x) -> F64x {
        if self.m == 0.0 || rhs.m == 0.0 {
            return ZERO;
        }
        F64x::normalize(self.m * rhs.m, self.e + rhs.e)
    }
}

impl Div for F64x {
    type Output = F64x;
    fn div(self, rhs: F64x) -> F64x {
        assert!(rhs.m != 0.0, "division by zero");
        if self.m == 0.0 {
            return ZERO;
        }
        F64x::normalize(self.m / rhs.m, self.e - rhs.e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use std::str::FromStr;

    fn close(a: F64x, b: f64) {
        let bf = F64x::from_f64(b);
        let diff = (a - bf).abs();
        let scale = a.abs().cmp_total(&bf.abs()).max(Ordering::Equal);
        let _ = scale;
        let tol = F64x::normalize(1.0, a.mag_log2().max(0.0) as i64 - 48);
        assert!(
            diff.cmp_total(&tol) != Ordering::Greater,
            "{a:?} vs {b}: diff {diff:?}"
        );
    }

    #[test]
    fn arithmetic_matches_f64_in_range() {
        let a = F64x::from_f64(3.75);
        let b = F64x::from_f64(-0.0126953125);
        close(a + b, 3.75 - 0.0126953125);
        close(a * b, 3.75 * -0.0126953125);
        close(a / b, 3.75 / -0.0126953125);
        close(a.sqrt(), 3.75f64.sqrt());
    }

    #[test]
    fn survives_exponents_beyond_f64() {
        let big = F64x::normalize(1.5, 5000);
        let sq = big * big;
        assert_eq!(sq.e, 10001); // 2.25 * 2^10000 = 1.125 * 2^10001
        assert!((sq.m - 1.125).abs() < 1e-15);
        let back = sq / big;
        assert_eq!(back.e, 5000);
        assert!((back.m - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bigint_conversion_truncates_correctly() {
        let v = BigInt::from_str("340282366920938463463374607431768211456").unwrap(); // 2^128
        let x = F64x::from_bigint(&v);
        assert_eq!(x.m, 1.0);
        assert_eq!(x.e, 128);
        let w = BigInt::from_str("-170141183460469231731687303715884105729").unwrap(); // -(2^127+1)
        let y = F64x::from_bigint(&w);
        assert_eq!(y.e, 127);
        assert!(y.m < -1.0 - 1e-20 || y.m == -1.0);
    }

    #[test]
    fn ratio_and_real_round_trip() {
        let q = BigRational::new(BigInt::from(22), BigInt::from(7));
        let x = F64x::from_ratio(q.numer(), q.denom());
        close(x, 22.0 / 7.0);
        let r = x.to_real(128);
        let back = F64x::from_real(&r);
        assert_eq!(x, back);
    }

    #[test]
    fn ordering_is_total_by_magnitude_and_sign() {
        let a = F64x::normalize(1.0, -2000);
        let b = F64x::normalize(1.9, -2000);
        let c = F64x::normalize(1.0, 2000);
        assert!(a < b && b < c);
        assert!(-c < -b && -b < -a && -a < ZERO && ZERO < a);
    }

    #[test]
    fn subnormal_input_normalizes() {
        let tiny = f64::from_bits(1); // smallest positive subnormal
        let x = F64x::from_f64(tiny);
        assert_eq!(x.e, -1074);
        assert_eq!(x.m, 1.0);
    }

    #[test]
    fn powi_both_signs() {
        let two = F64x::from_i64(2);
        assert_eq!(two.powi(10).to_f64(), 1024.0);
        assert_eq!(two.powi(-3).to_f64(), 0.125);
        assert_eq!(two.powi(0), ONE);
    }
}
