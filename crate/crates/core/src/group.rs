//! Diagonal and unipotent elements of SL(d+1, R) in the factored form the
//! orbit machinery uses: g = D * u_x with D unimodular diagonal and u_x the
//! upper unipotent whose top row is (1, x_1, ..., x_d).
//!
//! Diagonal entries are kept in log domain as exact rational multiples of a
//! single real log-base, so families like n -> a_n compose exactly
//! (exponents add as rationals) and entries never overflow: exponentiation
//! happens only at the point of use.

use crate::error::{Error, Result};
use crate::precision::{invariant_slack, Real};
use num_rational::BigRational;
use num_traits::Zero;

use crate::rational::{rat, rat_i};
use crate::weights::WeightVector;

/// Unimodular diagonal element: entry i = base^(exps[i]) where
/// ln(base) = `ln_base`. The exponent vector sums to zero exactly.
#[derive(Clone, Debug)]
pub struct DiagonalElement {
    ln_base: Real,
    exps: Vec<BigRational>,
}

impl PartialEq for DiagonalElement {
    fn eq(&self, other: &Self) -> bool {
        if self.is_identity() && other.is_identity() {
            return self.exps.len() == other.exps.len();
        }
        self.exps == other.exps && self.ln_base == other.ln_base
    }
}

impl DiagonalElement {
    fn checked(ln_base: Real, exps: Vec<BigRational>) -> DiagonalElement {
        let sum: BigRational = exps.iter().sum();
        assert!(sum.is_zero(), "diagonal exponents must sum to zero");
        DiagonalElement { ln_base, exps }
    }

    pub fn identity(size: usize) -> DiagonalElement {
        DiagonalElement {
            ln_base: Real::zero(),
            exps: vec![rat_i(0); size],
        }
    }

    /// Diagonal element with entries exp(ln_base * e_i); the exponents must
    /// sum to zero (determinant one).
    pub fn new(ln_base: Real, exps: Vec<BigRational>) -> Result<DiagonalElement> {
        if exps.is_empty() {
            return Err(Error::DimensionMismatch(
                "diagonal element needs at least one entry".into(),
            ));
        }
        let sum: BigRational = exps.iter().sum();
        if !sum.is_zero() {
            return Err(Error::Validation(
                "diagonal exponents must sum to zero".into(),
            ));
        }
        Ok(DiagonalElement { ln_base, exps })
    }

    /// Number of diagonal entries (matrix size d+1).
    pub fn size(&self) -> usize {
        self.exps.len()
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|e| e.is_zero())
    }

    pub fn ln_base(&self) -> &Real {
        &self.ln_base
    }

    pub fn exponents(&self) -> &[BigRational] {
        &self.exps
    }

    /// Natural logs of the diagonal entries at precision `p`.
    pub fn log_scales(&self, p: usize) -> Vec<Real> {
        let lb = self.ln_base.with_precision(p);
        self.exps
            .iter()
            .map(|e| Real::from_rational(e, p).mul(&lb))
            .collect()
    }

    /// Diagonal entries at precision `p`.
    pub fn entries(&self, p: usize) -> Vec<Real> {
        self.log_scales(p).iter().map(|l| l.exp()).collect()
    }

    pub fn inverse(&self) -> DiagonalElement {
        DiagonalElement {
            ln_base: self.ln_base.clone(),
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    pub fn pow(&self, m: i64) -> DiagonalElement {
        let f = rat_i(m);
        DiagonalElement {
            ln_base: self.ln_base.clone(),
            exps: self.exps.iter().map(|e| e * &f).collect(),
        }
    }

    /// Exact composition. Requires a shared log-base (or one side the
    /// identity); use `rebase` first to bring elements to a common base.
    pub fn compose(&self, other: &DiagonalElement) -> Result<DiagonalElement> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch(format!(
                "diagonal sizes {} vs {}",
                self.size(),
                other.size()
            )));
        }
        if self.is_identity() {
            return Ok(other.clone());
        }
        if other.is_identity() {
            return Ok(self.clone());
        }
        if self.ln_base != other.ln_base {
            return Err(Error::Validation(
                "diagonal elements have different log-bases; rebase to a common base first".into(),
            ));
        }
        Ok(DiagonalElement {
            ln_base: self.ln_base.clone(),
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Re-express over a new base, given the exact relation
    /// ln(old base) = factor * ln(new base). The relation is spot-checked
    /// numerically; exponents transform exactly.
    pub fn rebase(&self, new_ln_base: Real, factor: &BigRational) -> DiagonalElement {
        let p = new_ln_base.precision().max(self.ln_base.precision());
        let lhs = self.ln_base.with_precision(p);
        let rhs = Real::from_rational(factor, p).mul(&new_ln_base.with_precision(p));
        let err = lhs.sub(&rhs).abs();
        let scale = lhs.abs().max_of(&Real::one());
        assert!(
            err <= invariant_slack(p).mul(&scale),
            "rebase factor does not relate the two bases"
        );
        DiagonalElement {
            ln_base: new_ln_base,
            exps: self.exps.iter().map(|e| e * factor).collect(),
        }
    }
}

/// The flow element a_n = diag(b^n, b^(-w_1 n), ..., b^(-w_d n)).
pub fn make_a(n: i64, b: &Real, w: &WeightVector) -> Result<DiagonalElement> {
    if *b <= Real::one() {
        return Err(Error::Validation(format!(
            "invalid base: b = {} must exceed 1",
            b.to_f64()
        )));
    }
    let nn = rat_i(n);
    let mut exps = Vec::with_capacity(w.dim() + 1);
    exps.push(nn.clone());
    for wi in w.entries() {
        exps.push(-(wi * &nn));
    }
    Ok(DiagonalElement::checked(b.ln(), exps))
}

/// The auxiliary contraction d_l = diag(beta^(t*l/(d+1)),
/// beta^(-(d+1-t)*l/(d+1)) x t, beta^(t*l/(d+1)) x (d-t)).
pub fn make_d(ell: i64, beta: &Real, t: usize, d: usize) -> Result<DiagonalElement> {
    if t < 1 || t > d {
        return Err(Error::Validation(format!(
            "invalid shape: t = {t} must satisfy 1 <= t <= d = {d}"
        )));
    }
    if !(beta.is_positive() && *beta < Real::one()) {
        return Err(Error::Validation(
            "invalid base: beta must lie in (0,1)".into(),
        ));
    }
    Ok(make_d_exponents(ell, t, d).map(|exps| DiagonalElement::checked(beta.ln(), exps))?)
}

fn make_d_exponents(ell: i64, t: usize, d: usize) -> Result<Vec<BigRational>> {
    let dd = (d + 1) as i64;
    let contract = rat(t as i64 * ell, dd);
    let expand = rat(-((dd - t as i64) * ell), dd);
    let mut exps = Vec::with_capacity(d + 1);
    exps.push(contract.clone());
    for _ in 0..t {
        exps.push(expand.clone());
    }
    for _ in t..d {
        exps.push(contract.clone());
    }
    Ok(exps)
}

/// d_l expressed directly over base b, using the exact exponent relation
/// ln(beta) = -(1+w_1) ln(b). Composes exactly with `make_a` output.
pub fn make_d_base_b(
    ell: i64,
    b: &Real,
    w: &WeightVector,
    t: usize,
    d: usize,
) -> Result<DiagonalElement> {
    if *b <= Real::one() {
        return Err(Error::Validation("invalid base: b must exceed 1".into()));
    }
    let factor = -(rat_i(1) + w.w_max());
    let exps = make_d_exponents(ell, t, d)?
        .into_iter()
        .map(|e| e * &factor)
        .collect();
    Ok(DiagonalElement::checked(b.ln(), exps))
}

/// Upper unipotent with top row (1, x_1, ..., x_d).
#[derive(Clone, Debug, PartialEq)]
pub struct UnipotentElement {
    x: Vec<Real>,
}

impl UnipotentElement {
    pub fn new(x: Vec<Real>) -> UnipotentElement {
        UnipotentElement { x }
    }

    pub fn from_rationals(x: &[BigRational], p: usize) -> UnipotentElement {
        UnipotentElement {
            x: x.iter().map(|q| Real::from_rational(q, p)).collect(),
        }
    }

    pub fn identity(d: usize) -> UnipotentElement {
        UnipotentElement {
            x: vec![Real::zero(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[Real] {
        &self.x
    }

    /// u_x u_y = u_(x+y).
    pub fn compose(&self, other: &UnipotentElement) -> UnipotentElement {
        assert_eq!(self.dim(), other.dim(), "unipotent dimension mismatch");
        UnipotentElement {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn inverse(&self) -> UnipotentElement {
        UnipotentElement {
            x: self.x.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn matrix(&self, p: usize) -> Vec<Vec<Real>> {
        let n = self.dim() + 1;
        let mut m = identity_matrix(n, p);
        for (j, xj) in self.x.iter().enumerate() {
            m[0][j + 1] = xj.with_precision(p);
        }
        m
    }
}

/// Solve D u_x' = u_x'' D for x'': the coordinate-wise scaling
/// x''_i = (D_11 / D_(i+1,i+1)) x'_i, computed in log domain.
pub fn conjugate_unipotent(d: &DiagonalElement, xp: &[Real]) -> Result<Vec<Real>> {
    if d.size() != xp.len() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "diagonal size {} vs point dimension {}",
            d.size(),
            xp.len()
        )));
    }
    let p = xp
        .iter()
        .map(|v| v.precision())
        .fold(d.ln_base.precision(), usize::max);
    let lb = d.ln_base.with_precision(p);
    let out = xp
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let de = &d.exps[0] - &d.exps[i + 1];
            if de.is_zero() {
                return xi.clone();
            }
            let scale = Real::from_rational(&de, p).mul(&lb).exp();
            scale.mul(xi)
        })
        .collect();
    Ok(out)
}

/// Group element in the normal form g = D * u_x.
#[derive(Clone, Debug)]
pub struct FactoredGroupElement {
    pub diag: DiagonalElement,
    pub unip: UnipotentElement,
}

impl FactoredGroupElement {
    pub fn new(diag: DiagonalElement, unip: UnipotentElement) -> Result<FactoredGroupElement> {
        if diag.size() != unip.dim() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "diagonal size {} vs unipotent dimension {}",
                diag.size(),
                unip.dim()
            )));
        }
        Ok(FactoredGroupElement { diag, unip })
    }

    pub fn identity(d: usize) -> FactoredGroupElement {
        FactoredGroupElement {
            diag: DiagonalElement::identity(d + 1),
            unip: UnipotentElement::identity(d),
        }
    }

    /// (D1 u_a)(D2 u_b) = (D1 D2) u_(conj(D2^-1, a) + b), renormalized to
    /// the diag-then-unipotent form.
    pub fn compose(&self, other: &FactoredGroupElement) -> Result<FactoredGroupElement> {
        let a_conj = conjugate_unipotent(&other.diag.inverse(), self.unip.coords())?;
        let unip = UnipotentElement::new(a_conj).compose(&other.unip);
        let diag = self.diag.compose(&other.diag)?;
        FactoredGroupElement::new(diag, unip)
    }

    pub fn matrix(&self, p: usize) -> Vec<Vec<Real>> {
        let n = self.diag.size();
        let entries = self.diag.entries(p);
        let mut m = self.unip.matrix(p);
        for (i, row) in m.iter_mut().enumerate().take(n) {
            for v in row.iter_mut() {
                *v = v.mul(&entries[i]);
            }
        }
        m
    }
}

pub fn identity_matrix(n: usize, p: usize) -> Vec<Vec<Real>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Real::one().with_precision(p)
                    } else {
                        Real::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<Real>], b: &[Vec<Real>]) -> Vec<Vec<Real>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Real::zero();
                    for (l, brow) in b.iter().enumerate().take(k) {
                        acc = acc.add(&a[i][l].mul(&brow[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::comparison_slack;

    const P: usize = 256;

    fn w23() -> WeightVector {
        WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap()
    }

    fn assert_rel_close(a: &Real, b: &Real, p: usize, ctx: &str) {
        let scale = a.abs().max_of(&b.abs()).max_of(&Real::one());
        let err = a.sub(b).abs();
        assert!(
            err <= comparison_slack(p).mul(&scale),
            "{ctx}: {} vs {}",
            a.to_f64(),
            b.to_f64()
        );
    }

    #[test]
    fn make_a_matches_hand_values() {
        let b = Real::from_i64(2, P);
        let id = make_a(0, &b, &w23()).unwrap();
        assert!(id.is_identity());

        let one_d = WeightVector::new(vec![rat_i(1)]).unwrap();
        let a3 = make_a(3, &b, &one_d).unwrap();
        let e = a3.entries(P);
        assert_rel_close(&e[0], &Real::from_i64(8, P), P, "b^3");
        assert_rel_close(&e[1], &Real::from_i64(8, P).recip(), P, "b^-3");

        let a3w = make_a(3, &b, &w23()).unwrap();
        let e = a3w.entries(P);
        assert_rel_close(&e[0], &Real::from_i64(8, P), P, "2^3");
        assert_rel_close(&e[1], &Real::exp2(-2, P), P, "2^-2");
        assert_rel_close(&e[2], &Real::exp2(-1, P), P, "2^-1");

        assert!(make_a(1, &Real::one(), &w23()).is_err());
    }

    #[test]
    fn make_d_matches_hand_values() {
        let beta = Real::from_ratio(&2.into(), &5.into(), P);
        assert!(make_d(0, &beta, 1, 2).unwrap().is_identity());

        let d1 = make_d(1, &beta, 1, 2).unwrap();
        let e = d1.entries(P);
        let third = rat(1, 3);
        assert_rel_close(&e[0], &beta.pow_rational(&third), P, "beta^(1/3)");
        assert_rel_close(&e[1], &beta.pow_rational(&rat(-2, 3)), P, "beta^(-2/3)");
        assert_rel_close(&e[2], &beta.pow_rational(&third), P, "beta^(1/3)");

        let d2 = make_d(2, &beta, 3, 3).unwrap();
        let e = d2.entries(P);
        assert_rel_close(&e[0], &beta.pow_rational(&rat(3, 2)), P, "beta^(3/2)");
        for i in 1..4 {
            assert_rel_close(&e[i], &beta.pow_rational(&rat(-1, 2)), P, "beta^(-1/2)");
        }

        assert!(make_d(1, &beta, 0, 2).is_err());
        assert!(make_d(1, &beta, 3, 2).is_err());
        assert!(make_d(1, &Real::from_i64(2, P), 1, 2).is_err());
    }

    #[test]
    fn flow_families_compose_exactly() {
        let b = Real::from_ratio(&7.into(), &3.into(), P);
        let w = w23();
        let a5 = make_a(5, &b, &w).unwrap();
        let a7 = make_a(-7, &b, &w).unwrap();
        let a_sum = make_a(-2, &b, &w).unwrap();
        assert_eq!(a5.compose(&a7).unwrap(), a_sum);

        let beta = Real::from_ratio(&1.into(), &4.into(), P);
        let d2 = make_d(2, &beta, 1, 2).unwrap();
        let d3 = make_d(3, &beta, 1, 2).unwrap();
        assert_eq!(d2.compose(&d3).unwrap(), make_d(5, &beta, 1, 2).unwrap());
        assert_eq!(d2.compose(&d2.inverse()).unwrap(), DiagonalElement::identity(3));
    }

    #[test]
    fn conjugation_simple_case() {
        let b = Real::from_i64(2, P);
        let one_d = WeightVector::new(vec![rat_i(1)]).unwrap();
        let d = make_a(1, &b, &one_d).unwrap(); // diag(2, 1/2)
        let x = vec![Real::from_i64(3, P)];
        let y = conjugate_unipotent(&d, &x).unwrap();
        assert_rel_close(&y[0], &Real::from_i64(12, P), P, "2/(1/2) * 3");

        let id = DiagonalElement::identity(2);
        let same = conjugate_unipotent(&id, &x).unwrap();
        assert_eq!(same[0], x[0]);
    }

    #[test]
    fn conjugation_matches_matrix_products() {
        let b = Real::from_ratio(&3.into(), &2.into(), P);
        let w = w23();
        for (ell, k) in [(0i64, 1i64), (1, 4), (2, 9), (3, 17)] {
            let a_k = make_a(k, &b, &w).unwrap();
            let d_l = make_d_base_b(ell, &b, &w, w.t_leading(), w.dim()).unwrap();
            let g = d_l.compose(&a_k).unwrap();
            let x = vec![
                Real::from_ratio(&1.into(), &3.into(), P),
                Real::from_ratio(&(-2).into(), &7.into(), P),
            ];
            let y = conjugate_unipotent(&g, &x).unwrap();

            // Displacement law for w = (2/3, 1/3): the first coordinate
            // scales by beta^(ell-k), the second by b^((1+w_2) k).
            let beta = b.pow_rational(&rat(-5, 3));
            let want0 = beta.powi(ell - k).mul(&x[0]);
            let want1 = b.pow_rational(&rat(4 * k, 3)).mul(&x[1]);
            assert_rel_close(&y[0], &want0, P, "first displacement scale");
            assert_rel_close(&y[1], &want1, P, "second displacement scale");

            // Matrix oracle: D u_x == u_y D entrywise.
            let du = mat_mul(
                &g.entries_matrix(P),
                &UnipotentElement::new(x.clone()).matrix(P),
            );
            let ud = mat_mul(
                &UnipotentElement::new(y.clone()).matrix(P),
                &g.entries_matrix(P),
            );
            for i in 0..3 {
                for j in 0..3 {
                    assert_rel_close(&du[i][j], &ud[i][j], P, "matrix conjugation identity");
                }
            }
        }
    }

    #[test]
    fn factored_composition_matches_matrices() {
        let b = Real::from_ratio(&5.into(), &2.into(), P);
        let w = w23();
        let g1 = FactoredGroupElement::new(
            make_a(2, &b, &w).unwrap(),
            UnipotentElement::from_rationals(&[rat(1, 2), rat(-1, 5)], P),
        )
        .unwrap();
        let g2 = FactoredGroupElement::new(
            make_a(-3, &b, &w).unwrap(),
            UnipotentElement::from_rationals(&[rat(2, 7), rat(1, 3)], P),
        )
        .unwrap();
        let g12 = g1.compose(&g2).unwrap();
        let lhs = mat_mul(&g1.matrix(P), &g2.matrix(P));
        let rhs = g12.matrix(P);
        for i in 0..3 {
            for j in 0..3 {
                assert_rel_close(&lhs[i][j], &rhs[i][j], P, "factored composition");
            }
        }
    }

    impl DiagonalElement {
        fn entries_matrix(&self, p: usize) -> Vec<Vec<Real>> {
            let e = self.entries(p);
            let n = self.size();
            let mut m = identity_matrix(n, p);
            for i in 0..n {
                m[i][i] = e[i].clone();
            }
            m
        }
    }
}
