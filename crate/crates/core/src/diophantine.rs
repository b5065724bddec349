//! Direct measurements of weighted Diophantine badness, diagonal-orbit
//! statistics on the space of unimodular lattices, and a probe pairing the
//! two views of the same target vector.
//!
//! The badness scan computes `c_Q = min_{1<=q<=Q} max_i q^{w_i}·dist(q·x_i, Z)`
//! by exact integer enumeration. Coordinates are carried symbolically (exact
//! rationals or real quadratic irrationals), so `dist(q·x_i, Z)` suffers no
//! cancellation at large `q`; the only rounding happens in the final products
//! against `q^{w_i}`.
//!
//! The orbit scan applies the expanding one-parameter diagonal subgroup to the
//! unipotent-translated integer lattice and records the systole at each
//! integer time. A bounded badness constant and a bounded orbit floor are two
//! faces of the same phenomenon; [`correspondence_probe`] reports both without
//! asserting any quantitative conversion between them.

use crate::error::{Error, Result};
use crate::group::make_a;
use crate::lattice::{Lattice, SystoleCache};
use crate::precision::{invariant_slack, Real};
use crate::rational::{dist_to_nearest_int, parse_rational, rat, rat_to_string};
use crate::weights::WeightVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;

/// One coordinate of a target vector: an exact rational, or an exact real
/// quadratic irrational `a + b·sqrt(d)` with rational `a`, `b` and a positive
/// non-square integer `d`.
///
/// The quadratic form is closed under the two operations the badness scan
/// needs (integer scaling and subtracting the nearest integer), so scans stay
/// exact at every denominator scale instead of degrading with `q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coord {
    Rational(BigRational),
    Quadratic {
        a: BigRational,
        b: BigRational,
        d: BigInt,
    },
}

impl Coord {
    pub fn rational(q: BigRational) -> Coord {
        Coord::Rational(q)
    }

    /// Build `a + b·sqrt(d)`, normalizing degenerate cases: a square `d`
    /// or a zero `b` folds into an exact rational. Negative `d` is rejected.
    pub fn quadratic(a: BigRational, b: BigRational, d: BigInt) -> Result<Coord> {
        if d.is_negative() {
            return Err(Error::Validation(format!(
                "quadratic coordinate needs a nonnegative radicand, got {d}"
            )));
        }
        if b.is_zero() || d.is_zero() {
            return Ok(Coord::Rational(a));
        }
        let s = d.sqrt();
        if &s * &s == d {
            return Ok(Coord::Rational(a + b * BigRational::from_integer(s)));
        }
        Ok(Coord::Quadratic { a, b, d })
    }

    /// `(sqrt(5) - 1)/2`, the classical extremal target for unweighted
    /// one-dimensional approximation.
    pub fn golden_ratio() -> Coord {
        Coord::Quadratic {
            a: rat(-1, 2),
            b: rat(1, 2),
            d: BigInt::from(5),
        }
    }

    /// Parse a coordinate. Accepted forms:
    ///
    /// - rationals and decimals: `"3/4"`, `"-2"`, `"0.125"`, `"2.5e-3"`
    /// - named constants: `"phi"` / `"golden"` for the golden ratio
    /// - surds: `"sqrt(5)"`, `"1-sqrt(2)"`, `"-1/2+1/2*sqrt(5)"`
    /// - scaled surds: `"(3-sqrt(5))/2"`
    pub fn parse(s: &str) -> Result<Coord> {
        let s = s.trim();
        let bad = |why: &str| Error::Validation(format!("cannot parse coordinate {s:?}: {why}"));
        if s.is_empty() {
            return Err(bad("empty"));
        }
        match s.to_ascii_lowercase().as_str() {
            "phi" | "golden" => return Ok(Coord::golden_ratio()),
            _ => {}
        }
        // Outer form "(...)/k": strip and divide.
        if let Some(rest) = s.strip_prefix('(') {
            if let Some((inner, denom)) = rest.rsplit_once(")/") {
                let den = parse_rational(denom)?;
                if den.is_zero() {
                    return Err(bad("zero denominator"));
                }
                return match Coord::parse(inner)? {
                    Coord::Rational(r) => Ok(Coord::Rational(r / den)),
                    Coord::Quadratic { a, b, d } => Coord::quadratic(a / &den, b / &den, d),
                };
            }
        }
        if let Some(i) = s.find("sqrt(") {
            let after = &s[i + 5..];
            let close = after.find(')').ok_or_else(|| bad("unclosed sqrt"))?;
            if !after[close + 1..].trim().is_empty() {
                return Err(bad("trailing text after sqrt(...)"));
            }
            let d: BigInt = after[..close]
                .trim()
                .parse()
                .map_err(|_| bad("radicand must be an integer"))?;
            let prefix = &s[..i];
            // Split "a+b*" / "a-b*" / "b*" / "a+" / "a-" / "-" / "".
            let (a_str, b_str) = match prefix.strip_suffix('*') {
                Some(coeff) => match split_last_sign(coeff) {
                    Some((a, sign, b)) => (a.to_string(), format!("{sign}{b}")),
                    None => (String::new(), coeff.to_string()),
                },
                None => match prefix {
                    "" => (String::new(), "1".to_string()),
                    "-" => (String::new(), "-1".to_string()),
                    _ => match prefix.strip_suffix(['+', '-']) {
                        Some(a) => {
                            let sign = &prefix[prefix.len() - 1..];
                            (a.to_string(), format!("{sign}1"))
                        }
                        None => return Err(bad("malformed surd prefix")),
                    },
                },
            };
            let a = if a_str.is_empty() {
                BigRational::zero()
            } else {
                parse_rational(&a_str)?
            };
            let b = parse_rational(&b_str)?;
            return Coord::quadratic(a, b, d);
        }
        Ok(Coord::Rational(parse_rational(s)?))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Coord::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coord::Rational(r) => r.is_zero(),
            // b != 0 and d non-square by construction, hence irrational.
            Coord::Quadratic { .. } => false,
        }
    }

    pub fn to_real(&self, p: usize) -> Real {
        match self {
            Coord::Rational(r) => Real::from_rational(r, p),
            Coord::Quadratic { a, b, d } => {
                let pw = p + 32;
                let root = Real::from_bigint(d, pw).sqrt();
                Real::from_rational(a, pw)
                    .add(&Real::from_rational(b, pw).mul(&root))
                    .with_precision(p)
            }
        }
    }

    /// Exact human-readable rendering, stable across runs.
    pub fn describe(&self) -> String {
        match self {
            Coord::Rational(r) => rat_to_string(r),
            Coord::Quadratic { a, b, d } => {
                format!("{} + {}*sqrt({})", rat_to_string(a), rat_to_string(b), d)
            }
        }
    }

    fn mul_int(&self, q: &BigInt) -> Coord {
        let qr = BigRational::from_integer(q.clone());
        match self {
            Coord::Rational(r) => Coord::Rational(r * &qr),
            Coord::Quadratic { a, b, d } => Coord::Quadratic {
                a: a * &qr,
                b: b * &qr,
                d: d.clone(),
            },
        }
    }

    /// Distance to the nearest integer, exactly, as a value of the same kind.
    fn dist_to_int(&self) -> Coord {
        match self {
            Coord::Rational(r) => Coord::Rational(dist_to_nearest_int(r)),
            Coord::Quadratic { a, b, d } => {
                let half = rat(1, 2);
                let m = quad_floor(&(a + &half), b, d);
                let shifted = a - BigRational::from_integer(m);
                match quad_sign(&shifted, b, d) {
                    Ordering::Less => Coord::Quadratic {
                        a: -shifted,
                        b: -b.clone(),
                        d: d.clone(),
                    },
                    _ => Coord::Quadratic {
                        a: shifted,
                        b: b.clone(),
                        d: d.clone(),
                    },
                }
            }
        }
    }
}

/// Split `"a+b"` / `"a-b"` at the last top-level sign that can separate two
/// operands (position > 0 and not directly after `e`/`E`/another sign, so
/// scientific notation and leading signs survive).
fn split_last_sign(s: &str) -> Option<(&str, char, &str)> {
    let bytes = s.as_bytes();
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if c != '+' && c != '-' {
            continue;
        }
        let prev = bytes[i - 1] as char;
        if prev == 'e' || prev == 'E' || prev == '+' || prev == '-' {
            continue;
        }
        return Some((&s[..i], c, &s[i + 1..]));
    }
    None
}

/// Exact sign of `a + b·sqrt(d)` for `d >= 0`.
fn quad_sign(a: &BigRational, b: &BigRational, d: &BigInt) -> Ordering {
    if b.is_zero() || d.is_zero() {
        return a.cmp(&BigRational::zero());
    }
    if a.is_zero() {
        return b.cmp(&BigRational::zero());
    }
    let dr = BigRational::from_integer(d.clone());
    match (a.is_positive(), b.is_positive()) {
        (true, true) => Ordering::Greater,
        (false, false) => Ordering::Less,
        // a > 0 > b: sign matches a^2 vs b^2 d.
        (true, false) => (a * a).cmp(&(b * b * dr)),
        // b > 0 > a: sign matches b^2 d vs a^2.
        (false, true) => (b * b * dr).cmp(&(a * a)),
    }
}

/// Exact floor of `a + b·sqrt(d)` for non-square `d > 0`, `b != 0`, via
/// integer-square-root bracketing refined until the bracket pins an integer.
/// Terminates because the value is irrational.
fn quad_floor(a: &BigRational, b: &BigRational, d: &BigInt) -> BigInt {
    debug_assert!(!b.is_zero() && d.is_positive());
    let mut k: u32 = 32;
    loop {
        let scaled: BigInt = d << (2 * k);
        let t = scaled.sqrt();
        let den: BigInt = BigInt::one() << k;
        let lo = BigRational::new(t.clone(), den.clone());
        let hi = BigRational::new(t + 1, den);
        let (ylo, yhi) = if b.is_negative() {
            (a + b * &hi, a + b * &lo)
        } else {
            (a + b * &lo, a + b * &hi)
        };
        let flo = ylo.floor().to_integer();
        let fhi = yhi.floor().to_integer();
        if flo == fhi {
            return flo;
        }
        k *= 2;
        assert!(k <= 1 << 16, "square-root bracketing failed to converge");
    }
}

/// Result of a truncated badness scan.
///
/// `c_q` is the global minimum of `max_i q^{w_i}·dist(q·x_i, Z)` over
/// `1 <= q <= q_max`; for generic targets it is attained at a small `q` and
/// says little about asymptotics, so the trailing-window minimum over
/// `q_max/10 < q <= q_max` is reported alongside it as the asymptotic badness
/// level at the scan scale.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BadnessReport {
    pub c_q: Real,
    pub argmin_q: u64,
    pub q_max: u64,
    pub tail_min: Real,
    pub tail_argmin: u64,
    /// Exclusive lower edge of the trailing window.
    pub tail_window_lo: u64,
}

/// Exact scan over `q = 1..=q_max`. For each `q` the nearest integer to
/// `q·x_i` is found symbolically; only the final product against `q^{w_i}`
/// rounds, at precision `p`. Ties in the minimum keep the first `q`.
pub fn badness_constant(
    x: &[Coord],
    w: &WeightVector,
    q_max: u64,
    p: usize,
) -> Result<BadnessReport> {
    if q_max < 1 {
        return Err(Error::Validation("scan bound q_max must be >= 1".into()));
    }
    if x.len() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} coordinates, weights have {}",
            x.len(),
            w.dim()
        )));
    }
    let tail_lo = q_max / 10;
    let mut best: Option<(Real, u64)> = None;
    let mut tail_best: Option<(Real, u64)> = None;
    for q in 1..=q_max {
        let qb = BigInt::from(q);
        let mut row: Option<Real> = None;
        for (i, xi) in x.iter().enumerate() {
            let dist = xi.mul_int(&qb).dist_to_int();
            let term = if dist.is_zero() {
                Real::zero()
            } else {
                let qw = Real::from_i64(q as i64, p).pow_rational(w.get(i));
                qw.mul(&dist.to_real(p))
            };
            row = Some(match row {
                None => term,
                Some(r) => {
                    if term > r {
                        term
                    } else {
                        r
                    }
                }
            });
        }
        let row = row.expect("nonempty target");
        if best.as_ref().map_or(true, |(v, _)| row < *v) {
            best = Some((row.clone(), q));
        }
        if q > tail_lo && tail_best.as_ref().map_or(true, |(v, _)| row < *v) {
            tail_best = Some((row, q));
        }
    }
    let (c_q, argmin_q) = best.expect("q_max >= 1");
    let (tail_min, tail_argmin) = tail_best.expect("window nonempty");
    Ok(BadnessReport {
        c_q,
        argmin_q,
        q_max,
        tail_min,
        tail_argmin,
        tail_window_lo: tail_lo,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitStep {
    pub n: u64,
    pub systole: Real,
}

/// Minimum systole along `a_n u_x Z^{d+1}` for `n = 1..=horizon`, with the
/// full per-step trace. Ties in the minimum keep the first `n`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitReport {
    pub min_systole: Real,
    pub argmin_n: u64,
    pub horizon: u64,
    pub per_step: Vec<OrbitStep>,
}

/// Walk the diagonal orbit of the unipotent-translated lattice and record the
/// systole at each step. Consecutive steps reuse the reduced basis of the
/// previous one as a warm start.
pub fn dani_orbit_min(
    x: &[Coord],
    w: &WeightVector,
    b: &Real,
    horizon: u64,
    p: usize,
) -> Result<OrbitReport> {
    if horizon < 1 {
        return Err(Error::Validation("orbit horizon must be >= 1".into()));
    }
    if x.len() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} coordinates, weights have {}",
            x.len(),
            w.dim()
        )));
    }
    let xr: Vec<Real> = x.iter().map(|c| c.to_real(p)).collect();
    let mut cache = SystoleCache::new();
    let mut per_step = Vec::with_capacity(horizon as usize);
    let mut best: Option<(Real, u64)> = None;
    for n in 1..=horizon {
        let a_n = make_a(n as i64, b, w)?;
        let lat = Lattice::from_structured_real(&a_n, &xr, p)?;
        let sv = lat.shortest_vector_cached(&mut cache).map_err(|e| match e {
            Error::PrecisionExhausted(msg) => {
                Error::PrecisionExhausted(format!("orbit step n={n}: {msg}"))
            }
            other => other,
        })?;
        if best.as_ref().map_or(true, |(v, _)| sv.norm < *v) {
            best = Some((sv.norm.clone(), n));
        }
        per_step.push(OrbitStep {
            n,
            systole: sv.norm,
        });
    }
    let (min_systole, argmin_n) = best.expect("horizon >= 1");
    Ok(OrbitReport {
        min_systole,
        argmin_n,
        horizon,
        per_step,
    })
}

/// Side-by-side badness and orbit views of one target.
///
/// `scales_matched` records whether `b^(horizon-1) <= q_max <= b^(horizon+1)`,
/// the regime where the two truncations probe comparable denominators.
///
/// When the badness scan collapses exactly to zero at `q0 = argmin_q`, every
/// coordinate is a rational with denominator dividing `q0`, so the lattice
/// contains a frozen integer direction of length `q0` that the flow contracts
/// at its top rate; `collapse_bound = q0·b^(-w_max·horizon)` is then a hard
/// ceiling for the orbit floor, and `consistent` checks it (with rounding
/// slack). For non-collapsed scans the check is vacuously true: no
/// quantitative conversion between the two truncated quantities is asserted.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrespondenceReport {
    pub badness: BadnessReport,
    pub orbit: OrbitReport,
    pub scales_matched: bool,
    pub badness_collapsed: bool,
    pub collapse_bound: Option<Real>,
    pub consistent: bool,
}

pub fn correspondence_probe(
    x: &[Coord],
    w: &WeightVector,
    b: &Real,
    q_max: u64,
    horizon: u64,
    p: usize,
) -> Result<CorrespondenceReport> {
    let badness = badness_constant(x, w, q_max, p)?;
    let orbit = dani_orbit_min(x, w, b, horizon, p)?;
    let qr = Real::from_i64(q_max as i64, p);
    let bw = b.with_precision(p);
    let scales_matched =
        bw.powi(horizon as i64 - 1) <= qr && qr <= bw.powi(horizon as i64 + 1);
    let badness_collapsed = badness.c_q.is_zero();
    let (collapse_bound, consistent) = if badness_collapsed {
        let exp_r = -(w.w_max() * BigRational::from_integer(BigInt::from(horizon)));
        let bound = Real::from_i64(badness.argmin_q as i64, p)
            .mul(&bw.pow_rational(&exp_r))
            .mul(&Real::one().add(&invariant_slack(p)));
        let ok = orbit.min_systole <= bound;
        (Some(bound), ok)
    } else {
        (None, true)
    };
    Ok(CorrespondenceReport {
        badness,
        orbit,
        scales_matched,
        badness_collapsed,
        collapse_bound,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::DEFAULT_PRECISION as P;
    use crate::rational::rat_i;

    fn weights(entries: &[(i64, i64)]) -> WeightVector {
        WeightVector::new(entries.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn f64_scan(x: &[f64], w: &[f64], q_max: u64) -> (f64, u64, f64, u64) {
        let tail_lo = q_max / 10;
        let (mut best, mut arg, mut tbest, mut targ) = (f64::INFINITY, 0, f64::INFINITY, 0);
        for q in 1..=q_max {
            let mut row: f64 = 0.0;
            for (xi, wi) in x.iter().zip(w) {
                let v = (q as f64) * xi;
                let dist = (v - v.round()).abs();
                row = row.max((q as f64).powf(*wi) * dist);
            }
            if row < best {
                best = row;
                arg = q;
            }
            if q > tail_lo && row < tbest {
                tbest = row;
                targ = q;
            }
        }
        (best, arg, tbest, targ)
    }

    #[test]
    fn coordinate_parser_round_trips() {
        assert_eq!(Coord::parse("phi").unwrap(), Coord::golden_ratio());
        assert_eq!(Coord::parse("3/4").unwrap(), Coord::Rational(rat(3, 4)));
        assert_eq!(Coord::parse("0.125").unwrap(), Coord::Rational(rat(1, 8)));
        assert_eq!(
            Coord::parse("sqrt(2)").unwrap(),
            Coord::Quadratic {
                a: rat_i(0),
                b: rat_i(1),
                d: BigInt::from(2)
            }
        );
        assert_eq!(
            Coord::parse("-1/2+1/2*sqrt(5)").unwrap(),
            Coord::golden_ratio()
        );
        assert_eq!(
            Coord::parse("1-sqrt(2)").unwrap(),
            Coord::Quadratic {
                a: rat_i(1),
                b: rat_i(-1),
                d: BigInt::from(2)
            }
        );
        // (3 - sqrt(5))/2 is the square of the golden ratio.
        assert_eq!(
            Coord::parse("(3-sqrt(5))/2").unwrap(),
            Coord::Quadratic {
                a: rat(3, 2),
                b: rat(-1, 2),
                d: BigInt::from(5)
            }
        );
        // Square radicands collapse to rationals.
        assert_eq!(Coord::parse("sqrt(9)").unwrap(), Coord::Rational(rat_i(3)));
        assert!(Coord::parse("sqrt(2)+junk").is_err());
        assert!(Coord::parse("").is_err());
    }

    #[test]
    fn quadratic_floor_and_sign_are_exact() {
        // floor(sqrt(2)) = 1, floor(-sqrt(2)) = -2, floor(10*sqrt(2)) = 14.
        assert_eq!(quad_floor(&rat_i(0), &rat_i(1), &BigInt::from(2)), BigInt::from(1));
        assert_eq!(quad_floor(&rat_i(0), &rat_i(-1), &BigInt::from(2)), BigInt::from(-2));
        assert_eq!(quad_floor(&rat_i(0), &rat_i(10), &BigInt::from(2)), BigInt::from(14));
        // 7/5 < sqrt(2) < 3/2 exactly.
        assert_eq!(
            quad_sign(&rat(-7, 5), &rat_i(1), &BigInt::from(2)),
            Ordering::Greater
        );
        assert_eq!(
            quad_sign(&rat(3, 2), &rat_i(-1), &BigInt::from(2)),
            Ordering::Greater
        );
        assert_eq!(
            quad_sign(&rat(-3, 2), &rat_i(1), &BigInt::from(2)),
            Ordering::Less
        );
    }

    #[test]
    fn golden_dist_matches_float_oracle() {
        let phi = Coord::golden_ratio();
        let phi_f = (5.0_f64.sqrt() - 1.0) / 2.0;
        for q in 1..200u64 {
            let exact = phi.mul_int(&BigInt::from(q)).dist_to_int().to_real(128);
            let v = q as f64 * phi_f;
            let oracle = (v - v.round()).abs();
            assert!(
                (exact.to_f64() - oracle).abs() < 1e-9,
                "dist mismatch at q={q}"
            );
        }
    }

    #[test]
    fn rational_point_badness_hits_zero() {
        let x = [Coord::Rational(rat(1, 2))];
        let rep = badness_constant(&x, &weights(&[(1, 1)]), 10, P).unwrap();
        assert!(rep.c_q.is_zero());
        assert_eq!(rep.argmin_q, 2);
    }

    #[test]
    fn golden_ratio_scan_minimum_and_tail_level() {
        let x = [Coord::golden_ratio()];
        let rep = badness_constant(&x, &weights(&[(1, 1)]), 10_000, P).unwrap();
        // Global minimum sits at q = 1 where the row is dist(phi, Z) =
        // (3 - sqrt(5))/2 = 0.381966...; verify against the closed form.
        assert_eq!(rep.argmin_q, 1);
        let closed = Real::from_i64(3, P)
            .sub(&Real::from_i64(5, P).sqrt())
            .div(&Real::from_i64(2, P));
        assert!(
            rep.c_q.sub(&closed).abs().to_f64() < 1e-50,
            "q=1 row should be exactly dist(phi, Z)"
        );
        // The trailing window tracks the asymptotic level near 1/sqrt(5).
        let t = rep.tail_min.to_f64();
        assert!(t > 0.44 && t < 0.45, "tail level {t} outside [0.44, 0.45]");
        // Full agreement with an independent floating-point scan.
        let phi_f = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (obest, oarg, otbest, otarg) = f64_scan(&[phi_f], &[1.0], 10_000);
        assert_eq!(rep.argmin_q, oarg);
        assert_eq!(rep.tail_argmin, otarg);
        assert!((rep.c_q.to_f64() - obest).abs() < 1e-7);
        assert!((rep.tail_min.to_f64() - otbest).abs() < 1e-7);
    }

    #[test]
    fn scan_minimum_is_non_increasing_in_q() {
        let x = [Coord::golden_ratio()];
        let w = weights(&[(1, 1)]);
        let mut prev: Option<Real> = None;
        for q_max in [10, 50, 250, 1250] {
            let rep = badness_constant(&x, &w, q_max, P).unwrap();
            if let Some(p) = prev {
                assert!(rep.c_q <= p, "minimum increased from {q_max}");
            }
            prev = Some(rep.c_q);
        }
    }

    #[test]
    fn two_dimensional_quadratic_regression_value() {
        // Target (phi, phi^2) with equal weights; phi^2 = (3 - sqrt(5))/2.
        let x = [
            Coord::golden_ratio(),
            Coord::parse("(3-sqrt(5))/2").unwrap(),
        ];
        let rep = badness_constant(&x, &weights(&[(1, 2), (1, 2)]), 1_000, P).unwrap();
        assert!(rep.c_q.is_positive());
        // Frozen regression value from the exact scan, cross-checked against
        // an independent floating-point scan.
        let phi_f = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (obest, oarg, ..) = f64_scan(&[phi_f, phi_f * phi_f], &[0.5, 0.5], 1_000);
        assert_eq!(rep.argmin_q, oarg);
        assert!((rep.c_q.to_f64() - obest).abs() < 1e-7);
    }

    #[test]
    fn zero_vector_orbit_follows_the_top_weight_axis() {
        // At x = 0 the lattice is the pure diagonal one; the shortest vector
        // at each step is the axis contracted at the top rate, so the trace
        // is b^(-n·w_max) and the minimum sits at the horizon.
        let x = [Coord::Rational(rat_i(0)), Coord::Rational(rat_i(0))];
        let w = weights(&[(2, 3), (1, 3)]);
        let b = Real::from_i64(2, P);
        let rep = dani_orbit_min(&x, &w, &b, 6, P).unwrap();
        assert_eq!(rep.argmin_n, 6);
        assert_eq!(rep.per_step.len(), 6);
        for step in &rep.per_step {
            let expect = b.pow_rational(&(-rat(2, 3) * rat_i(step.n as i64)));
            let err = step.systole.sub(&expect).abs();
            assert!(
                err <= expect.mul(&rat_tol()),
                "step {} systole off: {} vs {}",
                step.n,
                step.systole.to_dec_string(),
                expect.to_dec_string()
            );
        }
    }

    fn rat_tol() -> Real {
        crate::precision::comparison_slack(P)
    }

    #[test]
    fn golden_orbit_stays_bounded_below() {
        let x = [Coord::golden_ratio()];
        let rep = dani_orbit_min(&x, &weights(&[(1, 1)]), &Real::from_i64(2, P), 30, P).unwrap();
        assert!(
            rep.min_systole.to_f64() >= 0.2,
            "orbit floor {} below 0.2",
            rep.min_systole.to_dec_string()
        );
        for step in &rep.per_step {
            assert!(step.systole.is_positive());
        }
    }

    #[test]
    fn rational_orbit_collapses_geometrically() {
        // x = 1/2: the vector from (a, m) = (-1, 2) freezes to (0, 2) and is
        // contracted at the full rate, so the floor at n = 30 is <= 2^-29.
        let x = [Coord::Rational(rat(1, 2))];
        let rep = dani_orbit_min(&x, &weights(&[(1, 1)]), &Real::from_i64(2, P), 30, P).unwrap();
        assert_eq!(rep.argmin_n, 30);
        assert!(rep.min_systole <= Real::exp2(-14, 64));
    }

    #[test]
    fn probe_flags_rational_collapse_consistently() {
        let x = [Coord::Rational(rat(1, 2))];
        let rep = correspondence_probe(
            &x,
            &weights(&[(1, 1)]),
            &Real::from_i64(2, P),
            200,
            8,
            P,
        )
        .unwrap();
        assert!(rep.badness_collapsed);
        assert!(rep.scales_matched, "2^7 <= 200 <= 2^9 should match scales");
        assert!(rep.consistent, "frozen direction must dominate the floor");
        let bound = rep.collapse_bound.expect("collapsed scan carries a bound");
        // q0 = 2 contracted for 8 steps at rate 1: bound is 2·2^-8 = 2^-7.
        assert!((bound.to_f64() - 2.0f64.powi(-7)).abs() < 1e-9);
    }

    #[test]
    fn probe_keeps_bounded_target_unflagged() {
        let x = [Coord::golden_ratio()];
        let rep = correspondence_probe(
            &x,
            &weights(&[(1, 1)]),
            &Real::from_i64(2, P),
            1_000,
            10,
            P,
        )
        .unwrap();
        assert!(!rep.badness_collapsed);
        assert!(rep.collapse_bound.is_none());
        assert!(rep.consistent);
        assert!(rep.scales_matched, "2^9 <= 1000 <= 2^11");
        assert!(rep.badness.tail_min.to_f64() > 0.4);
        assert!(rep.orbit.min_systole.to_f64() > 0.2);
    }

    #[test]
    fn probe_on_mixed_target_decays_without_exact_collapse() {
        // One rational and one irrational coordinate: rows at even q lose the
        // rational term, so the scan minimum decays like q^(-1/2) but never
        // reaches zero, while the orbit floor decays along the frozen
        // direction (0, 2, 0).
        let x = [Coord::Rational(rat(1, 2)), Coord::golden_ratio()];
        let w = weights(&[(1, 2), (1, 2)]);
        let rep = correspondence_probe(&x, &w, &Real::from_i64(2, P), 200, 8, P).unwrap();
        assert!(!rep.badness_collapsed);
        assert!(rep.badness.c_q.is_positive());
        assert!(rep.badness.c_q.to_f64() < 0.05);
        // Frozen direction (0, 2, 0) scales by 2·b^(-n/2): at n = 8, 1/8.
        assert!(rep.orbit.min_systole.to_f64() <= 0.13);
        let small = badness_constant(&x, &w, 50, P).unwrap();
        assert!(rep.badness.c_q < small.c_q, "minimum decays with the bound");
    }

    #[test]
    fn orbit_report_serializes_deterministically() {
        let x = [Coord::golden_ratio()];
        let rep = dani_orbit_min(&x, &weights(&[(1, 1)]), &Real::from_i64(2, P), 5, P).unwrap();
        let s1 = serde_json::to_string(&rep).unwrap();
        let s2 = serde_json::to_string(&rep).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.contains("minSystole"));
        assert!(s1.contains("perStep"));
    }
}
