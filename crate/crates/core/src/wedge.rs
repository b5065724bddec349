//! Exterior algebra of R^(d+1) over the basis e_+, e_1, ..., e_d: dense
//! wedge vectors indexed by j-element subsets, the unipotent and diagonal
//! group actions, and the orthogonal split into the subspaces V_+ (subsets
//! containing +) and V_- (subsets inside {1..d}).
//!
//! Coefficients are generic over a scalar ring so the same code runs the
//! authoritative exact path (integers, rationals) and the extended-precision
//! path (Real). Subsets are bitmasks with bit 0 = '+' and bit i = i.

use crate::error::{Error, Result};
use crate::group::DiagonalElement;
use crate::precision::Real;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Ring operations needed by wedge arithmetic.
pub trait WedgeScalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl WedgeScalar for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl WedgeScalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        BigRational::from_integer(1.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl WedgeScalar for Real {
    fn zero() -> Self {
        Real::zero()
    }
    fn one() -> Self {
        Real::one()
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Real::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Real::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Real::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Real::neg(self)
    }
}

/// All j-element subsets of {0..n-1} as bitmasks, ascending numeric order.
pub fn subsets(n: usize, j: usize) -> Vec<u32> {
    assert!(n <= 7, "ambient dimension capped at 7 (d <= 6)");
    (0u32..1 << n).filter(|m| m.count_ones() as usize == j).collect()
}

/// Dense degree-j element of the exterior algebra of R^dim.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVector<S: WedgeScalar> {
    dim: usize,
    degree: usize,
    masks: Vec<u32>,
    coeffs: Vec<S>,
}

impl<S: WedgeScalar> WedgeVector<S> {
    pub fn zero(dim: usize, degree: usize) -> WedgeVector<S> {
        assert!(degree >= 1 && degree <= dim, "degree out of range");
        let masks = subsets(dim, degree);
        let coeffs = vec![S::zero(); masks.len()];
        WedgeVector {
            dim,
            degree,
            masks,
            coeffs,
        }
    }

    pub fn basis(dim: usize, mask: u32) -> WedgeVector<S> {
        let degree = mask.count_ones() as usize;
        let mut v = WedgeVector::zero(dim, degree);
        let pos = v.position(mask).expect("mask in range");
        v.coeffs[pos] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    fn position(&self, mask: u32) -> Option<usize> {
        self.masks.binary_search(&mask).ok()
    }

    pub fn coeff(&self, mask: u32) -> &S {
        &self.coeffs[self.position(mask).expect("mask of right degree")]
    }

    pub fn set_coeff(&mut self, mask: u32, value: S) {
        let pos = self.position(mask).expect("mask of right degree");
        self.coeffs[pos] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &WedgeVector<S>) -> WedgeVector<S> {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        WedgeVector {
            coeffs,
            ..self.clone()
        }
    }

    pub fn scale(&self, s: &S) -> WedgeVector<S> {
        let coeffs = self.coeffs.iter().map(|c| c.mul(s)).collect();
        WedgeVector {
            coeffs,
            ..self.clone()
        }
    }

    pub fn map<T: WedgeScalar>(&self, f: impl Fn(&S) -> T) -> WedgeVector<T> {
        WedgeVector {
            dim: self.dim,
            degree: self.degree,
            masks: self.masks.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Sum of squared coefficients: the squared Euclidean norm in the
    /// orthonormal e_I basis.
    pub fn norm_sq(&self) -> S {
        self.coeffs
            .iter()
            .fold(S::zero(), |acc, c| acc.add(&c.mul(c)))
    }

    /// Component in V_+ (subsets containing +).
    pub fn plus_part(&self) -> WedgeVector<S> {
        self.filtered(|m| m & 1 == 1)
    }

    /// Component in V_- (subsets inside {1..d}).
    pub fn minus_part(&self) -> WedgeVector<S> {
        self.filtered(|m| m & 1 == 0)
    }

    fn filtered(&self, keep: impl Fn(u32) -> bool) -> WedgeVector<S> {
        let coeffs = self
            .masks
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| if keep(*m) { c.clone() } else { S::zero() })
            .collect();
        WedgeVector {
            coeffs,
            ..self.clone()
        }
    }
}

impl WedgeVector<Real> {
    pub fn norm(&self) -> Real {
        self.norm_sq().sqrt()
    }
}

fn det<S: WedgeScalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    if n == 0 {
        return S::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = S::zero();
    for r in 0..n {
        if m[r][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<S>> = m
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let term = m[r][0].mul(&det(&minor));
        acc = if r % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Wedge product of j vectors in R^dim: the coefficient at the sorted subset
/// I = {i_1 < ... < i_j} is the minor det[ v_b[i_a] ]_(a,b).
pub fn wedge<S: WedgeScalar>(vectors: &[Vec<S>]) -> Result<WedgeVector<S>> {
    let j = vectors.len();
    if j == 0 {
        return Err(Error::Validation("wedge of zero vectors".into()));
    }
    let dim = vectors[0].len();
    if j > dim {
        return Err(Error::Validation(format!(
            "degree overflow: {j} factors in dimension {dim}"
        )));
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(
                "wedge factors of unequal length".into(),
            ));
        }
    }
    let mut out = WedgeVector::zero(dim, j);
    let masks = out.masks.clone();
    for (pos, mask) in masks.iter().enumerate() {
        let rows: Vec<usize> = (0..dim).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<Vec<S>> = rows
            .iter()
            .map(|&r| vectors.iter().map(|v| v[r].clone()).collect())
            .collect();
        out.coeffs[pos] = det(&sub);
    }
    Ok(out)
}

/// Action of the unipotent u_x on a wedge vector.
///
/// With `factors` supplied (a decomposition v = v_1 ^ ... ^ v_j, verified),
/// uses the closed form
///   u_x v = v + e_+ ^ sum_i (-1)^(i+1) <x~, v_i> (wedge of the others),
/// where <x~, v_i> = sum_k x_k v_(i,k) over the coordinate slots only.
/// Without factors, applies the induced linear action basis-coefficient-wise;
/// the two routes agree exactly on exact scalars.
pub fn apply_unipotent_wedge<S: WedgeScalar>(
    x: &[S],
    v: &WedgeVector<S>,
    factors: Option<&[Vec<S>]>,
) -> Result<WedgeVector<S>> {
    if x.len() + 1 != v.dim {
        return Err(Error::DimensionMismatch(format!(
            "point dimension {} vs ambient {}",
            x.len(),
            v.dim
        )));
    }
    if let Some(fs) = factors {
        let rebuilt = wedge(fs)?;
        if rebuilt != *v {
            return Err(Error::Validation(
                "factor mismatch: supplied factors do not wedge to v".into(),
            ));
        }
        return Ok(apply_unipotent_closed(x, v, fs));
    }
    Ok(apply_unipotent_linear(x, v))
}

fn inner_tilde<S: WedgeScalar>(x: &[S], v: &[S]) -> S {
    // <x~, v> ignores the '+' slot: x~ = (0, x_1, ..., x_d).
    let mut acc = S::zero();
    for (k, xk) in x.iter().enumerate() {
        acc = acc.add(&xk.mul(&v[k + 1]));
    }
    acc
}

fn apply_unipotent_closed<S: WedgeScalar>(
    x: &[S],
    v: &WedgeVector<S>,
    factors: &[Vec<S>],
) -> WedgeVector<S> {
    let j = factors.len();
    let mut out = v.clone();
    if j == 1 {
        // u_x v = v + <x~, v> e_+.
        let c = inner_tilde(x, &factors[0]);
        let pos = out.position(1).expect("e_+ present in degree 1");
        out.coeffs[pos] = out.coeffs[pos].add(&c);
        return out;
    }
    for i in 0..j {
        let c = inner_tilde(x, &factors[i]);
        if c.is_zero() {
            continue;
        }
        let others: Vec<Vec<S>> = factors
            .iter()
            .enumerate()
            .filter(|(ip, _)| *ip != i)
            .map(|(_, f)| f.clone())
            .collect();
        let rest = wedge(&others).expect("degree j-1 wedge");
        // e_+ ^ e_I vanishes when + in I, else equals e_(I u {+}) with +
        // moved to the front at no sign cost (it is the smallest index).
        let signed_c = if i % 2 == 0 { c } else { c.neg() };
        for (mask, coeff) in rest.masks.iter().zip(&rest.coeffs) {
            if mask & 1 == 1 || coeff.is_zero() {
                continue;
            }
            let target = mask | 1;
            let pos = out.position(target).expect("target mask in degree j");
            out.coeffs[pos] = out.coeffs[pos].add(&signed_c.mul(coeff));
        }
    }
    out
}

fn apply_unipotent_linear<S: WedgeScalar>(x: &[S], v: &WedgeVector<S>) -> WedgeVector<S> {
    // Basis action: u_x e_+ = e_+ and u_x e_k = e_k + x_k e_+, extended to
    // e_I multiplicatively. Subsets containing + are fixed; a subset
    // I = {k_1 < ... < k_j} without + sends weight to (I \ {k}) u {+} with
    // alternating sign by the rank of k in I.
    let mut out = v.clone();
    for (mask, coeff) in v.masks.iter().zip(&v.coeffs) {
        if mask & 1 == 1 || coeff.is_zero() {
            continue;
        }
        let mut rank = 0;
        for k in 1..v.dim {
            if mask >> k & 1 == 0 {
                continue;
            }
            let target = (mask & !(1u32 << k)) | 1;
            let term = coeff.mul(&x[k - 1]);
            let term = if rank % 2 == 0 { term } else { term.neg() };
            let pos = out.position(target).expect("target mask in degree");
            out.coeffs[pos] = out.coeffs[pos].add(&term);
            rank += 1;
        }
    }
    out
}

/// Action of a diagonal element: the coefficient at I scales by the product
/// of the diagonal entries indexed by I, computed in log domain.
pub fn apply_diagonal_wedge(
    d: &DiagonalElement,
    v: &WedgeVector<Real>,
    p: usize,
) -> Result<WedgeVector<Real>> {
    if d.size() != v.dim {
        return Err(Error::DimensionMismatch(format!(
            "diagonal size {} vs ambient {}",
            d.size(),
            v.dim
        )));
    }
    let logs = d.log_scales(p);
    let mut out = v.clone();
    for (pos, mask) in v.masks.iter().enumerate() {
        if v.coeffs[pos].is_zero() {
            continue;
        }
        let mut log_sum = Real::zero().with_precision(p);
        for (i, l) in logs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                log_sum = log_sum.add(l);
            }
        }
        out.coeffs[pos] = v.coeffs[pos].mul(&log_sum.exp());
    }
    Ok(out)
}

/// Same scaling with explicit per-axis factors; exact on exact scalars.
pub fn apply_scaling_wedge<S: WedgeScalar>(scales: &[S], v: &WedgeVector<S>) -> WedgeVector<S> {
    assert_eq!(scales.len(), v.dim, "scale count vs ambient");
    let mut out = v.clone();
    for (pos, mask) in v.masks.iter().enumerate() {
        let mut f = S::one();
        for (i, s) in scales.iter().enumerate() {
            if mask >> i & 1 == 1 {
                f = f.mul(s);
            }
        }
        out.coeffs[pos] = v.coeffs[pos].mul(&f);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_a;
    use crate::precision::comparison_slack;
    use crate::rational::{rat, rat_i};
    use crate::weights::WeightVector;
    use proptest::prelude::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn biv(vs: &[i64]) -> Vec<BigInt> {
        vs.iter().map(|&v| bi(v)).collect()
    }

    #[test]
    fn wedge_hand_values() {
        // e_+ ^ e_1 in d = 2 (dim 3).
        let v = wedge(&[biv(&[1, 0, 0]), biv(&[0, 1, 0])]).unwrap();
        assert_eq!(*v.coeff(0b011), bi(1));
        assert_eq!(*v.coeff(0b101), bi(0));
        assert_eq!(*v.coeff(0b110), bi(0));

        let rep = wedge(&[biv(&[3, -1, 2]), biv(&[3, -1, 2])]).unwrap();
        assert!(rep.is_zero());

        // Rows (1,2,3) and (0,1,1): minors {+,1}: 1*1-2*0=1, {+,2}: 1*1-3*0=1,
        // {1,2}: 2*1-3*1=-1.
        let v = wedge(&[biv(&[1, 2, 3]), biv(&[0, 1, 1])]).unwrap();
        assert_eq!(*v.coeff(0b011), bi(1));
        assert_eq!(*v.coeff(0b101), bi(1));
        assert_eq!(*v.coeff(0b110), bi(-1));

        assert!(wedge::<BigInt>(&[biv(&[1, 0]), biv(&[0, 1]), biv(&[1, 1])]).is_err());
    }

    #[test]
    fn unipotent_action_hand_values() {
        let x = vec![rat_i(1), rat_i(2)];
        let e1: WedgeVector<BigRational> = WedgeVector::basis(3, 0b010);
        let moved = apply_unipotent_wedge(&x, &e1, None).unwrap();
        assert_eq!(*moved.coeff(0b010), rat_i(1));
        assert_eq!(*moved.coeff(0b001), rat_i(1));

        let zero_x = vec![rat_i(0), rat_i(0)];
        let same = apply_unipotent_wedge(&zero_x, &e1, None).unwrap();
        assert_eq!(same, e1);
    }

    #[test]
    fn factor_route_requires_matching_factors() {
        let f1 = biv(&[1, 2, 3]);
        let f2 = biv(&[0, 1, 1]);
        let v = wedge(&[f1.clone(), f2.clone()]).unwrap();
        let x = vec![bi(2), bi(-1)];
        let ok = apply_unipotent_wedge(&x, &v, Some(&[f1.clone(), f2.clone()]));
        assert!(ok.is_ok());
        let bad = apply_unipotent_wedge(&x, &v, Some(&[f1.clone(), f1.clone()]));
        assert!(bad.is_err());
    }

    #[test]
    fn diagonal_action_on_eigenvector() {
        const P: usize = 256;
        let one_d = WeightVector::new(vec![rat_i(1)]).unwrap();
        let b = Real::from_i64(2, P);
        let a_m1 = make_a(-1, &b, &one_d).unwrap(); // diag(1/2, 2)
        let e_top: WedgeVector<Real> = WedgeVector::basis(2, 0b11);
        let out = apply_diagonal_wedge(&a_m1, &e_top, P).unwrap();
        let diff = out.coeff(0b11).sub(&Real::one()).abs();
        assert!(diff < comparison_slack(P), "det-1 eigenvalue");
    }

    #[test]
    fn norm_splits_orthogonally() {
        let v = wedge(&[biv(&[1, 2, 3]), biv(&[0, 1, 1])]).unwrap();
        let total = v.norm_sq();
        let split = v.plus_part().norm_sq().add(&v.minus_part().norm_sq());
        assert_eq!(total, split);
    }

    #[test]
    fn contraction_bounds_hold_on_random_vectors() {
        const P: usize = 192;
        let w = WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap();
        let b = Real::from_ratio(&3.into(), &2.into(), P);
        // Deterministic pseudo-random integer wedge vectors of each degree.
        let mut seed = 11u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 19) as i64 - 9
        };
        for j in 1..=2usize {
            for h in 1..=10i64 {
                let factors: Vec<Vec<BigInt>> =
                    (0..j).map(|_| biv(&[next(), next(), next()])).collect();
                let v = match wedge(&factors) {
                    Ok(v) if !v.is_zero() => v.map(|c| Real::from_bigint(c, P)),
                    _ => continue,
                };
                let a_mh = make_a(-h, &b, &w).unwrap();
                let moved = apply_diagonal_wedge(&a_mh, &v, P).unwrap();
                let slack = Real::one().add(&comparison_slack(P));
                let wd = w.w_min();

                let plus_bound = b
                    .pow_rational(&(-BigRational::from_integer(h.into()) * &wd))
                    .mul(&v.plus_part().norm())
                    .mul(&slack);
                assert!(
                    moved.plus_part().norm() <= plus_bound,
                    "V+ contraction failed at j={j}, h={h}"
                );

                let minus_bound = b
                    .powi(h)
                    .mul(&v.minus_part().norm())
                    .mul(&slack);
                assert!(
                    moved.minus_part().norm() <= minus_bound,
                    "V- expansion bound failed at j={j}, h={h}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wedge_is_multilinear(
            u in prop::collection::vec(-6i64..7, 3),
            w2 in prop::collection::vec(-6i64..7, 3),
            other in prop::collection::vec(-6i64..7, 3),
            a in -4i64..5,
            b in -4i64..5,
        ) {
            let lin: Vec<BigInt> = u.iter().zip(&w2)
                .map(|(x, y)| bi(a * x + b * y)).collect();
            let lhs = wedge(&[other.iter().map(|&v| bi(v)).collect(), lin]).unwrap();
            let wu = wedge(&[other.iter().map(|&v| bi(v)).collect(), biv(&u)]).unwrap();
            let ww = wedge(&[other.iter().map(|&v| bi(v)).collect(), biv(&w2)]).unwrap();
            let rhs = wu.scale(&bi(a)).add(&ww.scale(&bi(b)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn wedge_is_alternating(
            u in prop::collection::vec(-6i64..7, 4),
            v in prop::collection::vec(-6i64..7, 4),
            w2 in prop::collection::vec(-6i64..7, 4),
        ) {
            let fwd = wedge(&[biv(&u), biv(&v), biv(&w2)]).unwrap();
            let swapped = wedge(&[biv(&v), biv(&u), biv(&w2)]).unwrap();
            prop_assert_eq!(fwd.clone(), swapped.scale(&bi(-1)));
            let repeated = wedge(&[biv(&u), biv(&u), biv(&w2)]).unwrap();
            prop_assert!(repeated.is_zero());
        }

        #[test]
        fn closed_form_equals_factorwise_bruteforce(
            f1 in prop::collection::vec(-5i64..6, 4),
            f2 in prop::collection::vec(-5i64..6, 4),
            f3 in prop::collection::vec(-5i64..6, 4),
            xn in prop::collection::vec(-9i64..10, 3),
            xd in 1i64..7,
        ) {
            // Rational point, integer factors: the exact path.
            let x: Vec<BigRational> = xn.iter().map(|&n| rat(n, xd)).collect();
            for factors in [vec![f1.clone()], vec![f1.clone(), f2.clone()],
                            vec![f1.clone(), f2.clone(), f3.clone()]] {
                let fq: Vec<Vec<BigRational>> = factors
                    .iter()
                    .map(|f| f.iter().map(|&v| rat_i(v)).collect())
                    .collect();
                let v = wedge(&fq).unwrap();
                if v.is_zero() { continue; }

                let closed = apply_unipotent_wedge(&x, &v, Some(&fq)).unwrap();
                let linear = apply_unipotent_wedge(&x, &v, None).unwrap();

                // Brute force: transform each factor by the matrix and wedge.
                let moved: Vec<Vec<BigRational>> = fq.iter().map(|f| {
                    let mut g = f.clone();
                    g[0] = &f[0] + inner_tilde(&x, f);
                    g
                }).collect();
                let brute = wedge(&moved).unwrap();

                prop_assert_eq!(closed.clone(), brute);
                prop_assert_eq!(linear, closed);
            }
        }
    }
}
