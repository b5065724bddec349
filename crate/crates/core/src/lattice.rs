//! Unimodular lattices g u_x Z^(d+1): systole computation, K_eps membership,
//! sublattice covolumes through the wedge algebra, and the linear-form
//! witness for supremum lower bounds.
//!
//! A lattice is stored as an exact integer model: integer generator columns
//! together with a scale Sc, the true basis being columns / Sc. Diagonal
//! entries are exact dyadic numbers at the working precision, so the model
//! is an exact rescaling of the computed basis and every membership decision
//! (systole vs threshold) is made in exact integer arithmetic on the model.

use crate::error::{Error, Result};
use crate::geom::Ball;
use crate::group::{DiagonalElement, FactoredGroupElement, UnipotentElement};
use crate::precision::Real;
use crate::svp::{self, SvpEngine};
use crate::wedge::{self, WedgeVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scale integer exponents are capped so a degenerate input cannot demand
/// gigabit integers before the engine reports the real problem.
const MAX_SCALE_BITS: i64 = 8_000_000;

/// Shortest nonzero vector of a lattice.
#[derive(Clone, Debug)]
pub struct ShortVectorResult {
    /// Integer coefficients in the lattice's generator columns.
    pub coeffs: Vec<BigInt>,
    /// Euclidean norm of the corresponding lattice vector.
    pub norm: Real,
    /// True when enumeration provably covered the whole ball of the
    /// reported radius (always the case here; kept for report surfaces).
    pub certified: bool,
}

/// K_eps membership with a diagnostic margin.
#[derive(Clone, Debug)]
pub struct InKEpsReport {
    pub inside: bool,
    /// systole - eps (negative when outside).
    pub margin: Real,
}

/// Opaque warm-start token: the unimodular transform found by the last
/// reduction, reusable across nearby lattices (orbit steps, sweep points).
#[derive(Clone, Debug, Default)]
pub struct SystoleCache {
    u: Option<Vec<Vec<BigInt>>>,
}

impl SystoleCache {
    pub fn new() -> SystoleCache {
        SystoleCache::default()
    }
}

#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    /// Integer generator columns; true basis = cols / sc.
    cols: Vec<Vec<BigInt>>,
    sc: BigInt,
    precision: usize,
    provenance: Option<FactoredGroupElement>,
}

/// Exact integerization of positive-precision real columns: returns integer
/// columns and the exponent T with cols = round(real * 2^T), exact because
/// every working real is a dyadic rational.
pub(crate) fn integerize_real_columns(cols: &[Vec<Real>]) -> Result<(Vec<Vec<BigInt>>, i64)> {
    let mut t: i64 = 0;
    for col in cols {
        for v in col {
            if let Some(e) = v.bin_exponent() {
                t = t.max(v.precision() as i64 - e as i64);
            }
        }
    }
    if t > MAX_SCALE_BITS {
        return Err(Error::PrecisionExhausted(format!(
            "scale exponent {t} exceeds the supported range"
        )));
    }
    let out = cols
        .iter()
        .map(|col| col.iter().map(|v| v.to_scaled_bigint(t)).collect())
        .collect();
    Ok((out, t))
}

fn check_unimodular(cols: &[Vec<BigInt>], sc: &BigInt, p: usize) -> Result<()> {
    let n = cols.len();
    let rows: Vec<Vec<BigInt>> = (0..n)
        .map(|r| (0..n).map(|c| cols[c][r].clone()).collect())
        .collect();
    let det = svp::int_det(&rows).abs();
    if det.is_zero() {
        return Err(Error::NonUnimodular("basis has determinant zero".into()));
    }
    let ratio = BigRational::new(det, sc.pow(n as u32));
    let slack = crate::rational::rat_pow(&crate::rational::rat(1, 2), p.max(33) as i64 - 32);
    let dev = (ratio - BigRational::one()).abs();
    if dev > slack {
        return Err(Error::NonUnimodular(format!(
            "|det(basis)| deviates from 1 by more than 2^-(P-32) (P = {p})"
        )));
    }
    Ok(())
}

impl Lattice {
    /// Z^n with identity provenance.
    pub fn standard(n: usize, p: usize) -> Result<Lattice> {
        if n < 2 || n > 7 {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimension must be 2..=7, got {n}"
            )));
        }
        let cols = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        Ok(Lattice {
            dim: n,
            cols,
            sc: BigInt::one(),
            precision: p,
            provenance: Some(FactoredGroupElement::identity(n - 1)),
        })
    }

    /// The lattice diag * u_x * Z^(d+1) for exact rational x. The diagonal
    /// entries are evaluated at precision p; the resulting model is exact.
    pub fn from_structured(
        diag: &DiagonalElement,
        x: &[BigRational],
        p: usize,
    ) -> Result<Lattice> {
        let n = diag.size();
        if x.len() + 1 != n {
            return Err(Error::DimensionMismatch(format!(
                "diagonal size {} vs point dimension {}",
                n,
                x.len()
            )));
        }
        if n < 2 || n > 7 {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimension must be 2..=7, got {n}"
            )));
        }
        let entries = diag.entries(p);
        let mut t: i64 = 0;
        for s in &entries {
            match s.bin_exponent() {
                Some(e) => t = t.max(s.precision() as i64 - e as i64),
                None => {
                    return Err(Error::PrecisionExhausted(
                        "diagonal entry underflows to zero at this precision".into(),
                    ))
                }
            }
        }
        t = t.max(0);
        if t > MAX_SCALE_BITS {
            return Err(Error::PrecisionExhausted(format!(
                "scale exponent {t} exceeds the supported range"
            )));
        }
        // Common denominator of the point coordinates.
        let den: BigInt = x
            .iter()
            .fold(BigInt::one(), |acc, xi| acc.lcm(xi.denom()));
        let nums: Vec<BigInt> = x
            .iter()
            .map(|xi| xi.numer() * (&den / xi.denom()))
            .collect();
        let m: Vec<BigInt> = entries.iter().map(|s| s.to_scaled_bigint(t)).collect();
        debug_assert!(m.iter().all(|mi| mi.is_positive()));
        // Columns of diag(s) * [[1, x^T], [0, I]] scaled by den * 2^t.
        let mut cols = vec![vec![BigInt::zero(); n]; n];
        cols[0][0] = &m[0] * &den;
        for j in 1..n {
            cols[j][0] = &m[0] * &nums[j - 1];
            cols[j][j] = &m[j] * &den;
        }
        let sc = den * (BigInt::one() << t as usize);
        let lat = Lattice {
            dim: n,
            cols,
            sc,
            precision: p,
            provenance: Some(FactoredGroupElement::new(
                diag.clone(),
                UnipotentElement::from_rationals(x, p),
            )?),
        };
        #[cfg(debug_assertions)]
        check_unimodular(&lat.cols, &lat.sc, p)?;
        Ok(lat)
    }

    /// Same with real coordinates (converted exactly; reals are dyadic).
    pub fn from_structured_real(
        diag: &DiagonalElement,
        x: &[Real],
        p: usize,
    ) -> Result<Lattice> {
        let xr: Vec<BigRational> = x.iter().map(|v| v.to_rational()).collect();
        Lattice::from_structured(diag, &xr, p)
    }

    /// Lattice from an explicit real basis (columns). Checked unimodular:
    /// |det| must be 1 within 2^-(P-32).
    pub fn from_real_basis(basis: &[Vec<Real>], p: usize) -> Result<Lattice> {
        let n = basis.len();
        if n < 2 || n > 7 {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimension must be 2..=7, got {n}"
            )));
        }
        if basis.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("basis must be square".into()));
        }
        let (cols, t) = integerize_real_columns(basis)?;
        let sc = BigInt::one() << t.max(0) as usize;
        check_unimodular(&cols, &sc, p)?;
        Ok(Lattice {
            dim: n,
            cols,
            sc,
            precision: p,
            provenance: None,
        })
    }

    /// Same lattice presented by generators * u, |det u| = 1.
    pub fn change_basis(&self, u: &[Vec<BigInt>]) -> Result<Lattice> {
        let n = self.dim;
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("transform must be square".into()));
        }
        if svp::int_det(u).abs() != BigInt::one() {
            return Err(Error::NonUnimodular(
                "change of basis must have determinant +-1".into(),
            ));
        }
        let mut cols = vec![vec![BigInt::zero(); n]; n];
        for (c, col) in cols.iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                *v = (0..n).map(|l| &self.cols[l][r] * &u[l][c]).sum();
            }
        }
        Ok(Lattice {
            dim: n,
            cols,
            sc: self.sc.clone(),
            precision: self.precision,
            provenance: self.provenance.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn provenance(&self) -> Option<&FactoredGroupElement> {
        self.provenance.as_ref()
    }

    /// True basis columns at the lattice's precision.
    pub fn basis_real(&self) -> Vec<Vec<Real>> {
        let p = self.precision;
        let sc = Real::from_bigint(&self.sc, p);
        self.cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|v| Real::from_bigint(v, p).div(&sc))
                    .collect()
            })
            .collect()
    }

    fn engine(&self, cache: Option<&SystoleCache>) -> Result<SvpEngine> {
        let warm = cache
            .and_then(|c| c.u.as_ref())
            .filter(|u| u.len() == self.dim);
        SvpEngine::from_columns(&self.cols, warm.map(|u| u.as_slice()))
    }

    fn norm_from_sq(&self, nsq: &BigInt, extra_bits: usize) -> Real {
        let p = self.precision + extra_bits;
        Real::from_bigint(nsq, p)
            .sqrt()
            .div(&Real::from_bigint(&self.sc, p))
            .with_precision(self.precision)
    }

    /// Shortest nonzero lattice vector, certified by exact enumeration.
    pub fn shortest_vector(&self) -> Result<ShortVectorResult> {
        self.shortest_vector_cached(&mut SystoleCache::new())
    }

    pub fn shortest_vector_cached(&self, cache: &mut SystoleCache) -> Result<ShortVectorResult> {
        let solve = |warm: Option<&SystoleCache>| -> Result<(Vec<BigInt>, BigInt, Vec<Vec<BigInt>>)> {
            let mut eng = self.engine(warm)?;
            let (coeffs, nsq) = eng.shortest(svp::DEFAULT_NODE_BUDGET)?;
            Ok((coeffs, nsq, eng.transform().clone()))
        };
        let (coeffs, nsq, u) = match solve(Some(cache)) {
            Ok(r) => r,
            // A stale warm transform can only hurt, never lie; on any
            // failure retry cold before giving up.
            Err(_) if cache.u.is_some() => solve(None)?,
            Err(e) => return Err(e),
        };
        cache.u = Some(u);
        debug_assert!(!coeffs.iter().all(|c| c.is_zero()));
        Ok(ShortVectorResult {
            coeffs,
            norm: self.norm_from_sq(&nsq, 32),
            certified: true,
        })
    }

    /// Systole >= eps, with margin = systole - eps for diagnostics.
    pub fn in_k_eps(&self, eps: &Real) -> Result<InKEpsReport> {
        if !eps.is_positive() {
            return Err(Error::Validation("eps must be positive".into()));
        }
        let sv = self.shortest_vector()?;
        Ok(InKEpsReport {
            inside: sv.norm >= *eps,
            margin: sv.norm.sub(eps),
        })
    }

    /// Exact membership decision on the integer model: no nonzero vector has
    /// norm < eps. Faster than `in_k_eps` (no full minimization) and exact
    /// at the boundary; the hot path of the dangerous-set tests.
    pub fn in_k_eps_decision(&self, eps: &Real, cache: &mut SystoleCache) -> Result<bool> {
        if !eps.is_positive() {
            return Err(Error::Validation("eps must be positive".into()));
        }
        let er = eps.to_rational();
        // threshold on normsq of the integer model: (eps * sc)^2
        let num = er.numer() * er.numer() * &self.sc * &self.sc;
        let den = er.denom() * er.denom();
        let run = |warm: Option<&SystoleCache>| -> Result<(bool, Vec<Vec<BigInt>>)> {
            let mut eng = self.engine(warm)?;
            let hit = eng
                .decide_below(&num, &den, svp::DEFAULT_NODE_BUDGET)?
                .is_some();
            Ok((hit, eng.transform().clone()))
        };
        let (hit, u) = match run(Some(cache)) {
            Ok(r) => r,
            Err(_) if cache.u.is_some() => run(None)?,
            Err(e) => return Err(e),
        };
        cache.u = Some(u);
        Ok(!hit)
    }
}

/// Covolume of the sublattice spanned by the images g v_1, ..., g v_j,
/// computed through the wedge algebra: || g v_1 ^ ... ^ g v_j ||.
pub fn wedge_norm_of_sublattice(
    vectors: &[Vec<BigInt>],
    g: &FactoredGroupElement,
    p: usize,
) -> Result<Real> {
    let v = wedge::wedge(vectors)?;
    if v.is_zero() {
        return Err(Error::RankDeficient(
            "dependent input: wedge of the vectors vanishes".into(),
        ));
    }
    let vr: WedgeVector<Real> = v.map(|c| Real::from_bigint(c, p));
    let after_u = wedge::apply_unipotent_wedge(g.unip.coords(), &vr, None)?;
    let after_d = wedge::apply_diagonal_wedge(&g.diag, &after_u, p)?;
    Ok(after_d.norm())
}

/// Systole of the sublattice generated by the images g v_1, ..., g v_j
/// (exact enumeration over the transformed generators).
pub fn shortest_vector_in_span(
    vectors: &[Vec<BigInt>],
    g: &FactoredGroupElement,
    p: usize,
) -> Result<Real> {
    if vectors.is_empty() {
        return Err(Error::Validation("need at least one generator".into()));
    }
    let n = vectors[0].len();
    let mat = g.matrix(p);
    let cols: Vec<Vec<Real>> = vectors
        .iter()
        .map(|v| {
            (0..n)
                .map(|r| {
                    let mut acc = Real::zero().with_precision(p);
                    for (c, vc) in v.iter().enumerate() {
                        if !vc.is_zero() {
                            acc = acc.add(&mat[r][c].mul(&Real::from_bigint(vc, p)));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let (icols, t) = integerize_real_columns(&cols)?;
    let mut eng = SvpEngine::from_columns(&icols, None)?;
    let (_, nsq) = eng.shortest(svp::DEFAULT_NODE_BUDGET)?;
    let pw = p + 32;
    Ok(Real::from_bigint(&nsq, pw)
        .sqrt()
        .div(&Real::exp2(t, pw))
        .with_precision(p))
}

/// Exact rank of an integer matrix (rows).
fn rank_exact(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let width = rows[0].len();
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect();
    let mut rank = 0usize;
    for c in 0..width {
        let pivot = (rank..m.len()).find(|&r| !m[r][c].is_zero());
        let Some(pr) = pivot else { continue };
        m.swap(rank, pr);
        let piv = m[rank][c].clone();
        for r in rank + 1..m.len() {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for cc in c..width {
                let t = &m[rank][cc] * &f;
                m[r][cc] -= t;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// All (j)-element subsets of {0..n-1} in lexicographic order.
fn lex_subsets(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(j);
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, j, cur, out);
            cur.pop();
        }
    }
    rec(0, n, j, &mut cur, &mut out);
    out
}

/// Certified lower bound on sup over x in B of || g u_x v ||, for a
/// decomposable integer wedge v given by its factor vectors, and a diagonal
/// g = diag(b_+, b_1..b_d) with b_+ >= 1 >= b_i > 0 and product 1.
///
/// Witness construction: pick the lexicographically first coordinate subset
/// {l_2..l_j} in {1..d} whose rows of the factor matrix are independent,
/// form the linear form f(x) = c_0 + sum_k c_k x_k from the bordered minors
/// (c_0 with the + row, c_k with row k), and evaluate |f| at the ball center
/// displaced by +-r_B along the first coordinate with c_k != 0. The result
/// is >= min(1, r_B); the j = d+1 case returns ||v|| >= 1 directly.
pub fn supremum_lower_bound(
    g: &DiagonalElement,
    ball: &Ball,
    factors: &[Vec<BigInt>],
    p: usize,
) -> Result<Real> {
    let d = ball.dim();
    let n = d + 1;
    if g.size() != n {
        return Err(Error::DimensionMismatch(format!(
            "diagonal size {} vs ball dimension {}",
            g.size(),
            d
        )));
    }
    // Sign pattern, decided exactly in exponent space: entry i is
    // base^(e_i) with base = exp(ln_base).
    let lb = g.ln_base();
    for (i, e) in g.exponents().iter().enumerate() {
        let log_sign = if lb.is_zero() || e.is_zero() {
            0
        } else {
            let s1 = if lb.is_positive() { 1i32 } else { -1 };
            let s2 = if e.is_positive() { 1 } else { -1 };
            s1 * s2
        };
        let ok = if i == 0 { log_sign >= 0 } else { log_sign <= 0 };
        if !ok {
            return Err(Error::Validation(
                "diagonal sign pattern violated: need b_+ >= 1 and 0 < b_i <= 1".into(),
            ));
        }
    }
    let j = factors.len();
    if j == 0 || j > n {
        return Err(Error::Validation(format!(
            "need 1..=d+1 factor vectors, got {j}"
        )));
    }
    for f in factors {
        if f.len() != n {
            return Err(Error::DimensionMismatch(
                "factor vectors must have d+1 entries".into(),
            ));
        }
    }
    let v = wedge::wedge(factors)?;
    if v.is_zero() {
        return Err(Error::Validation(
            "wedge of the factors vanishes (dependent input)".into(),
        ));
    }

    if j == n {
        // Full-degree wedge: u_x and g both act trivially on the determinant
        // line, so the value is the (integer) norm of v itself, >= 1.
        let vr: WedgeVector<Real> = v.map(|c| Real::from_bigint(c, p));
        return Ok(vr.norm().with_precision(p));
    }

    // Lexicographically first subset {l_2..l_j} of coordinate rows 1..d with
    // independent rows of the factor matrix.
    let chosen: Vec<usize> = lex_subsets(d, j - 1)
        .into_iter()
        .map(|s| s.into_iter().map(|i| i + 1).collect::<Vec<usize>>())
        .find(|rows| {
            let m: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|&r| factors.iter().map(|f| f[r].clone()).collect())
                .collect();
            rank_exact(&m) == j - 1
        })
        .ok_or_else(|| {
            Error::RankDeficient(
                "no independent coordinate-row subset: factors are dependent".into(),
            )
        })?;

    // Bordered minors: first row from slot `lead`, then the chosen rows.
    let minor = |lead: usize| -> BigInt {
        let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(j);
        m.push(factors.iter().map(|f| f[lead].clone()).collect());
        for &r in &chosen {
            m.push(factors.iter().map(|f| f[r].clone()).collect());
        }
        svp::int_det(&m)
    };
    let c0 = minor(0);
    let cs: Vec<BigInt> = (1..=d).map(minor).collect();

    if cs.iter().all(|c| c.is_zero()) {
        // f is the constant c_0, a nonzero integer: |c_0| >= 1.
        debug_assert!(!c0.is_zero());
        return Ok(Real::from_bigint(&c0.abs(), p));
    }
    let k = cs.iter().position(|c| !c.is_zero()).unwrap();
    // f(x) = c_0 + sum c_m x_m, exact rational evaluation at center +- r e_k.
    let f0: BigRational = BigRational::from_integer(c0)
        + ball
            .center
            .iter()
            .zip(&cs)
            .map(|(x, c)| x * BigRational::from_integer(c.clone()))
            .sum::<BigRational>();
    let delta = &ball.radius * BigRational::from_integer(cs[k].clone());
    let plus = (&f0 + &delta).abs();
    let minus = (&f0 - &delta).abs();
    let witness = if plus >= minus { plus } else { minus };
    Ok(Real::from_rational(&witness, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_a;
    use crate::precision::DEFAULT_PRECISION;
    use crate::rational::{rat, rat_i};
    use crate::weights::WeightVector;

    const P: usize = DEFAULT_PRECISION;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn standard_lattice_systole_is_one() {
        for n in 2..=4usize {
            let l = Lattice::standard(n, P).unwrap();
            let sv = l.shortest_vector().unwrap();
            assert!(sv.certified);
            let err = sv.norm.sub(&Real::one()).abs();
            assert!(err < crate::precision::comparison_slack(P));
            assert_eq!(sv.coeffs.iter().filter(|c| !c.is_zero()).count(), 1);
        }
    }

    #[test]
    fn structured_one_dim_flow_hand_value() {
        // d=1, w=(1), b=2, n=1: basis diag(2, 1/2), systole 1/2 exactly.
        let w = WeightVector::new(vec![rat_i(1)]).unwrap();
        let b = Real::from_i64(2, P);
        let a1 = make_a(1, &b, &w).unwrap();
        let l = Lattice::from_structured(&a1, &[rat_i(0)], P).unwrap();
        let sv = l.shortest_vector().unwrap();
        let half = Real::from_f64(0.5, P);
        assert!(sv.norm.sub(&half).abs() < crate::precision::comparison_slack(P));
    }

    fn golden_lattice() -> Lattice {
        // a_5 u_phi Z^2 with b = 2, phi = (sqrt(5)-1)/2.
        let w = WeightVector::new(vec![rat_i(1)]).unwrap();
        let b = Real::from_i64(2, P);
        let a5 = make_a(5, &b, &w).unwrap();
        let phi = Real::from_i64(5, P)
            .sqrt()
            .sub(&Real::one())
            .div(&Real::from_i64(2, P));
        Lattice::from_structured_real(&a5, &[phi], P).unwrap()
    }

    #[test]
    fn golden_orbit_point_against_brute_force() {
        let l = golden_lattice();
        let sv = l.shortest_vector().unwrap();
        // Brute force over the true basis diag(32, 1/32) u_phi: vector
        // (32(m + phi n), n/32), scan |n| <= 2000.
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut best = f64::INFINITY;
        for n in -2000i64..=2000 {
            let target = -phi * n as f64;
            for m in [target.floor() as i64, target.ceil() as i64] {
                if m == 0 && n == 0 {
                    continue;
                }
                let a = 32.0 * (m as f64 + phi * n as f64);
                let c = n as f64 / 32.0;
                best = best.min((a * a + c * c).sqrt());
            }
        }
        assert!((sv.norm.to_f64() - best).abs() < 1e-9);
        // Spec-level membership: in K_0.3.
        let rep = l.in_k_eps(&Real::from_f64(0.3, P)).unwrap();
        assert!(rep.inside);
        assert!(rep.margin.is_positive());
    }

    #[test]
    fn k_eps_examples_and_monotonicity() {
        let z3 = Lattice::standard(3, P).unwrap();
        let r1 = z3.in_k_eps(&Real::from_f64(0.5, P)).unwrap();
        assert!(r1.inside);
        assert!(r1.margin.sub(&Real::from_f64(0.5, P)).abs() < crate::precision::comparison_slack(P));
        let r2 = z3.in_k_eps(&Real::from_f64(1.5, P)).unwrap();
        assert!(!r2.inside);

        // Monotone in eps along a grid, via the exact decision path.
        let l = golden_lattice();
        let mut cache = SystoleCache::new();
        let mut prev_inside = true;
        for k in 1..=12 {
            let eps = Real::from_f64(k as f64 * 0.1, P);
            let inside = l.in_k_eps_decision(&eps, &mut cache).unwrap();
            // inside is monotone nonincreasing in eps
            assert!(
                !(inside && !prev_inside),
                "monotonicity violated at eps={}",
                k as f64 * 0.1
            );
            prev_inside = inside;
        }
    }

    #[test]
    fn decision_path_matches_full_path() {
        let l = golden_lattice();
        let sv = l.shortest_vector().unwrap();
        let mut cache = SystoleCache::new();
        for k in 1..=10 {
            let eps = Real::from_f64(k as f64 * 0.07, P);
            let fast = l.in_k_eps_decision(&eps, &mut cache).unwrap();
            let full = l.in_k_eps(&eps).unwrap().inside;
            // They can only disagree within rounding of the boundary;
            // nowhere near it on this grid.
            assert_eq!(fast, full, "eps grid point {k}, systole {}", sv.norm.to_f64());
        }
    }

    #[test]
    fn unimodular_change_of_basis_preserves_systole() {
        let l = golden_lattice();
        let base = l.shortest_vector().unwrap().norm;
        // Deterministic sequence of elementary transforms.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        for _ in 0..8 {
            // Random elementary matrix: row addition or swap with sign.
            let mut u = vec![vec![bi(0), bi(0)], vec![bi(0), bi(0)]];
            u[0][0] = bi(1);
            u[1][1] = bi(1);
            let r = next() % 7 - 3;
            u[0][1] = bi(r);
            let l2 = l.change_basis(&u).unwrap();
            let n2 = l2.shortest_vector().unwrap().norm;
            assert!(base.sub(&n2).abs() < crate::precision::invariant_slack(P));
        }
        // Non-unimodular rejected.
        let bad = vec![vec![bi(2), bi(0)], vec![bi(0), bi(1)]];
        assert!(matches!(l.change_basis(&bad), Err(Error::NonUnimodular(_))));
    }

    #[test]
    fn real_basis_constructor_checks_unimodularity() {
        let c0 = vec![Real::from_f64(2.0, P), Real::zero()];
        let c1 = vec![Real::zero(), Real::from_f64(0.5, P)];
        let l = Lattice::from_real_basis(&[c0.clone(), c1], P).unwrap();
        let sv = l.shortest_vector().unwrap();
        assert!(sv.norm.sub(&Real::from_f64(0.5, P)).abs() < crate::precision::comparison_slack(P));

        let c1bad = vec![Real::zero(), Real::from_f64(0.6, P)];
        assert!(matches!(
            Lattice::from_real_basis(&[c0, c1bad], P),
            Err(Error::NonUnimodular(_))
        ));
    }

    #[test]
    fn wedge_norm_matches_gram_determinant_oracle() {
        // Random 2-subsets of Z^3 under random diagonal g: compare against
        // sqrt(det(Gram of transformed vectors)).
        let mut state = 0xD1B54A32D192ED03u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 9) as i64 - 4
        };
        let mut done = 0;
        while done < 25 {
            let v1: Vec<BigInt> = (0..3).map(|_| bi(next())).collect();
            let v2: Vec<BigInt> = (0..3).map(|_| bi(next())).collect();
            let e1 = next().clamp(-3, 3);
            let e2 = next().clamp(-3, 3);
            // exponents (e1, e2, -e1-e2) on base 2: product 1.
            let diag = DiagonalElement::new(
                Real::from_i64(2, P).ln(),
                vec![rat_i(e1), rat_i(e2), rat_i(-e1 - e2)],
            )
            .unwrap();
            let g = FactoredGroupElement::new(diag, UnipotentElement::identity(2)).unwrap();
            let res = wedge_norm_of_sublattice(&[v1.clone(), v2.clone()], &g, P);
            let wedge_v = wedge::wedge(&[v1.clone(), v2.clone()]).unwrap();
            if wedge_v.is_zero() {
                assert!(matches!(res, Err(Error::RankDeficient(_))));
                continue;
            }
            done += 1;
            // Oracle: Gram determinant of the transformed vectors.
            let mat = g.matrix(P);
            let tv: Vec<Vec<Real>> = [&v1, &v2]
                .iter()
                .map(|v| {
                    (0..3)
                        .map(|r| {
                            let mut acc = Real::zero();
                            for (c, vc) in v.iter().enumerate() {
                                acc = acc.add(&mat[r][c].mul(&Real::from_bigint(vc, P)));
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            let dot = |a: &[Real], b: &[Real]| -> Real {
                a.iter()
                    .zip(b)
                    .fold(Real::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
            };
            let g11 = dot(&tv[0], &tv[0]);
            let g12 = dot(&tv[0], &tv[1]);
            let g22 = dot(&tv[1], &tv[1]);
            let oracle = g11.mul(&g22).sub(&g12.mul(&g12)).sqrt();
            let got = res.unwrap();
            assert!(
                got.sub(&oracle).abs() < crate::precision::invariant_slack(P),
                "wedge norm {} vs oracle {}",
                got.to_f64(),
                oracle.to_f64()
            );
        }
    }

    #[test]
    fn wedge_norm_scales_with_integer_multiple() {
        let g = FactoredGroupElement::identity(2);
        let v1 = vec![bi(1), bi(0), bi(2)];
        let v2 = vec![bi(0), bi(1), bi(-1)];
        let base = wedge_norm_of_sublattice(&[v1.clone(), v2.clone()], &g, P).unwrap();
        let v1m: Vec<BigInt> = v1.iter().map(|c| c * 3).collect();
        let scaled = wedge_norm_of_sublattice(&[v1m, v2], &g, P).unwrap();
        let want = base.mul(&Real::from_i64(3, P));
        assert!(scaled.sub(&want).abs() < crate::precision::invariant_slack(P));
    }

    #[test]
    fn sublattice_identity_covolume() {
        // g = identity, vectors e_+, e_1 -> 1.
        let g = FactoredGroupElement::identity(2);
        let e0 = vec![bi(1), bi(0), bi(0)];
        let e1 = vec![bi(0), bi(1), bi(0)];
        let got = wedge_norm_of_sublattice(&[e0, e1], &g, P).unwrap();
        assert!(got.sub(&Real::one()).abs() < crate::precision::comparison_slack(P));
    }

    #[test]
    fn minkowski_span_bound() {
        // Shrunk 2-plane: wedge norm < 1 forces a short vector in the span.
        let diag = DiagonalElement::new(
            Real::from_i64(2, P).ln(),
            vec![rat_i(-2), rat_i(1), rat_i(1)],
        )
        .unwrap();
        let g = FactoredGroupElement::new(diag, UnipotentElement::identity(2)).unwrap();
        let e0 = vec![bi(1), bi(0), bi(0)];
        let e1 = vec![bi(0), bi(1), bi(0)];
        let wn = wedge_norm_of_sublattice(&[e0.clone(), e1.clone()], &g, P).unwrap();
        // covolume = (1/4) * 2 = 1/2 < 1
        assert!(wn < Real::one());
        let sv = shortest_vector_in_span(&[e0, e1], &g, P).unwrap();
        let bound = Real::from_i64(2, P).sqrt().add(&crate::precision::comparison_slack(P));
        assert!(sv < bound, "span systole {} vs sqrt(2)", sv.to_f64());
    }

    #[test]
    fn supremum_bound_full_degree_case() {
        // j = d+1 = 3: value is ||v|| = |det| >= 1 regardless of the ball.
        let diag = DiagonalElement::new(
            Real::from_i64(2, P).ln(),
            vec![rat_i(2), rat_i(-1), rat_i(-1)],
        )
        .unwrap();
        let ball = Ball::new(vec![rat(7, 3), rat(-1, 2)], rat(1, 100)).unwrap();
        let factors = vec![
            vec![bi(1), bi(0), bi(0)],
            vec![bi(0), bi(2), bi(1)],
            vec![bi(0), bi(1), bi(1)],
        ];
        let got = supremum_lower_bound(&diag, &ball, &factors, P).unwrap();
        assert!(got.sub(&Real::one()).abs() < crate::precision::comparison_slack(P));
    }

    #[test]
    fn supremum_bound_linear_form_case() {
        // d=2, g=identity, v = e_1, B = B(0, 1/4): f(x) = x_1, witness 1/4.
        let diag = DiagonalElement::identity(3);
        let ball = Ball::new(vec![rat_i(0), rat_i(0)], rat(1, 4)).unwrap();
        let factors = vec![vec![bi(0), bi(1), bi(0)]];
        let got = supremum_lower_bound(&diag, &ball, &factors, P).unwrap();
        assert!(got.sub(&Real::from_f64(0.25, P)).abs() < crate::precision::comparison_slack(P));
    }

    #[test]
    fn supremum_bound_rejects_bad_sign_pattern() {
        // Expanding in a coordinate slot: b_1 = 2 > 1.
        let diag = DiagonalElement::new(
            Real::from_i64(2, P).ln(),
            vec![rat_i(-1), rat_i(1), rat_i(0)],
        )
        .unwrap();
        let ball = Ball::new(vec![rat_i(0), rat_i(0)], rat(1, 4)).unwrap();
        let factors = vec![vec![bi(0), bi(1), bi(0)]];
        assert!(matches!(
            supremum_lower_bound(&diag, &ball, &factors, P),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn supremum_bound_randomized_contract() {
        // Random admissible (g, B, v): bound >= min(1, r_B), and the true
        // sup sampled on a grid through the witness points never dips below
        // the returned bound.
        let mut state = 0xA0761D6478BD642Fu64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        let mut done = 0;
        while done < 60 {
            let d = 2usize;
            // exponents: e0 >= 0, e1, e2 <= 0, sum 0 on base 2.
            let e1 = -(next() % 3).abs();
            let e2 = -(next() % 3).abs();
            let diag = DiagonalElement::new(
                Real::from_i64(2, P).ln(),
                vec![rat_i(-e1 - e2), rat_i(e1), rat_i(e2)],
            )
            .unwrap();
            let j = (next().rem_euclid(3) + 1) as usize; // 1..=3
            let factors: Vec<Vec<BigInt>> = (0..j)
                .map(|_| (0..=d).map(|_| bi(next() % 5 - 2)).collect())
                .collect();
            if wedge::wedge(&factors).map(|w| w.is_zero()).unwrap_or(true) {
                continue;
            }
            let cx = rat(next() % 9 - 4, 4);
            let cy = rat(next() % 9 - 4, 4);
            let r = rat((next() % 8).abs() + 1, 8);
            let ball = Ball::new(vec![cx, cy], r.clone()).unwrap();
            let bound = supremum_lower_bound(&diag, &ball, &factors, P).unwrap();
            done += 1;
            let floor = Real::from_rational(&r, P).min_of(&Real::one());
            assert!(
                bound >= floor.sub(&crate::precision::comparison_slack(P)),
                "bound {} below min(1, r_B) {}",
                bound.to_f64(),
                floor.to_f64()
            );
            // Grid sampling of sup ||g u_x v|| including witness points.
            let vr: WedgeVector<Real> = wedge::wedge(&factors)
                .unwrap()
                .map(|c| Real::from_bigint(c, P));
            let mut sup = Real::zero();
            let mut grid: Vec<Vec<BigRational>> = Vec::new();
            for gx in -2..=2i64 {
                for gy in -2..=2i64 {
                    grid.push(vec![
                        &ball.center[0] + rat(gx, 2) * &ball.radius,
                        &ball.center[1] + rat(gy, 2) * &ball.radius,
                    ]);
                }
            }
            for pt in &grid {
                let xr: Vec<Real> = pt.iter().map(|q| Real::from_rational(q, P)).collect();
                let moved = wedge::apply_unipotent_wedge(&xr, &vr, None).unwrap();
                let out = wedge::apply_diagonal_wedge(&diag, &moved, P).unwrap();
                sup = sup.max_of(&out.norm());
            }
            assert!(
                sup >= bound.sub(&crate::precision::invariant_slack(P)),
                "sampled sup {} below returned bound {}",
                sup.to_f64(),
                bound.to_f64()
            );
        }
    }

    #[test]
    fn rank_and_subsets_helpers() {
        assert_eq!(lex_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(lex_subsets(4, 1), vec![vec![0], vec![1], vec![2], vec![3]]);
        let rows = vec![
            vec![bi(1), bi(2), bi(3)],
            vec![bi(2), bi(4), bi(6)],
            vec![bi(0), bi(1), bi(0)],
        ];
        assert_eq!(rank_exact(&rows), 2);
    }

    #[test]
    fn warm_cache_accelerates_and_agrees() {
        // Systole along an orbit with a shared cache agrees with cold calls.
        let w = WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap();
        let b = Real::from_i64(2, P);
        let x = vec![rat(5, 17), rat(3, 11)];
        let mut cache = SystoleCache::new();
        for n in 1..=12i64 {
            let an = make_a(n, &b, &w).unwrap();
            let l = Lattice::from_structured(&an, &x, P).unwrap();
            let warm = l.shortest_vector_cached(&mut cache).unwrap();
            let cold = l.shortest_vector().unwrap();
            assert!(
                warm.norm.sub(&cold.norm).abs() < crate::precision::invariant_slack(P),
                "n={n}: warm {} cold {}",
                warm.norm.to_f64(),
                cold.norm.to_f64()
            );
        }
    }
}
