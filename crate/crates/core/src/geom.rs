//! Exact geometry: closed Euclidean balls and hyperplane neighborhoods with
//! rational data. All containment and disjointness predicates decide through
//! squared-distance comparisons in exact rational arithmetic, so geometric
//! legality checks in the game engines have no tolerance knobs at all.

use crate::error::{Error, Result};
use crate::precision::Real;
use crate::rational::rat_to_string;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Closed ball given by exact center and radius. Per the identity
/// convention, a ball IS its (center, radius) pair, not the point set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: Vec<BigRational>,
    pub radius: BigRational,
}

impl Ball {
    pub fn new(center: Vec<BigRational>, radius: BigRational) -> Result<Ball> {
        if !radius.is_positive() {
            return Err(Error::Validation(format!(
                "ball radius {} must be positive",
                rat_to_string(&radius)
            )));
        }
        if center.is_empty() {
            return Err(Error::Validation("ball center must have dimension".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn with_radius(&self, radius: BigRational) -> Result<Ball> {
        Ball::new(self.center.clone(), radius)
    }

    pub fn dist_sq_to(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.dim(), "point dimension");
        self.center
            .iter()
            .zip(x)
            .map(|(c, xi)| {
                let d = xi - c;
                &d * &d
            })
            .sum()
    }

    pub fn contains_point(&self, x: &[BigRational]) -> bool {
        self.dist_sq_to(x) <= &self.radius * &self.radius
    }

    /// other subset of self: |c1 - c2| + r2 <= r1, decided by squaring.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        if other.radius > self.radius {
            return false;
        }
        let slack = &self.radius - &other.radius;
        self.dist_sq_to(&other.center) <= &slack * &slack
    }

    /// Closed balls intersect: |c1 - c2| <= r1 + r2.
    pub fn intersects_ball(&self, other: &Ball) -> bool {
        let sum = &self.radius + &other.radius;
        self.dist_sq_to(&other.center) <= &sum * &sum
    }

    pub fn disjoint_from_ball(&self, other: &Ball) -> bool {
        !self.intersects_ball(other)
    }

    pub fn center_real(&self, p: usize) -> Vec<Real> {
        self.center
            .iter()
            .map(|c| Real::from_rational(c, p))
            .collect()
    }

    pub fn radius_real(&self, p: usize) -> Real {
        Real::from_rational(&self.radius, p)
    }
}

/// Closed neighborhood of the hyperplane { x : <normal, x> = offset } of
/// Euclidean width `width`. The normal is stored unnormalized (exact);
/// membership is |<n,x> - offset| <= width * |n|, decided by squaring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneNbhd {
    pub normal: Vec<BigRational>,
    pub offset: BigRational,
    pub width: BigRational,
}

impl HyperplaneNbhd {
    pub fn new(
        normal: Vec<BigRational>,
        offset: BigRational,
        width: BigRational,
    ) -> Result<HyperplaneNbhd> {
        if normal.iter().all(|n| n.is_zero()) {
            return Err(Error::Validation("hyperplane normal must be nonzero".into()));
        }
        if width.is_negative() {
            return Err(Error::Validation("hyperplane width must be >= 0".into()));
        }
        Ok(HyperplaneNbhd {
            normal,
            offset,
            width,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal_norm_sq(&self) -> BigRational {
        self.normal.iter().map(|n| n * n).sum()
    }

    /// Signed scaled offset of x: <n,x> - offset (distance times |n|).
    fn scaled_gap(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.dim(), "point dimension");
        let dot: BigRational = self.normal.iter().zip(x).map(|(n, xi)| n * xi).sum();
        dot - &self.offset
    }

    pub fn contains_point(&self, x: &[BigRational]) -> bool {
        let g = self.scaled_gap(x);
        &g * &g <= &self.width * &self.width * self.normal_norm_sq()
    }

    /// Distance from ball center to the hyperplane at most width + r.
    pub fn intersects_ball(&self, b: &Ball) -> bool {
        let g = self.scaled_gap(&b.center);
        let reach = &self.width + &b.radius;
        &g * &g <= &reach * &reach * self.normal_norm_sq()
    }

    /// Ball entirely outside the closed neighborhood.
    pub fn ball_avoids(&self, b: &Ball) -> bool {
        !self.intersects_ball(b)
    }

    /// Ball entirely inside the closed neighborhood.
    pub fn contains_ball(&self, b: &Ball) -> bool {
        if b.radius > self.width {
            return false;
        }
        let g = self.scaled_gap(&b.center);
        let slack = &self.width - &b.radius;
        &g * &g <= &slack * &slack * self.normal_norm_sq()
    }

    /// Unit normal at precision p (spec surface; exact data stays rational).
    pub fn unit_normal(&self, p: usize) -> Vec<Real> {
        let norm = Real::from_rational(&self.normal_norm_sq(), p).sqrt();
        self.normal
            .iter()
            .map(|n| Real::from_rational(n, p).div(&norm))
            .collect()
    }

    /// Offset in the unit-normal scaling.
    pub fn offset_normalized(&self, p: usize) -> Real {
        let norm = Real::from_rational(&self.normal_norm_sq(), p).sqrt();
        Real::from_rational(&self.offset, p).div(&norm)
    }
}

/// The hyperplane through d points in R^d in general position, as a width-0
/// neighborhood. The normal is the generalized cross product of the edge
/// vectors (exact); degenerate inputs are rejected.
pub fn hyperplane_through(points: &[Vec<BigRational>]) -> Result<HyperplaneNbhd> {
    if points.is_empty() {
        return Err(Error::Validation("need at least one point".into()));
    }
    let d = points[0].len();
    if points.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "need exactly d = {} points, got {}",
            d,
            points.len()
        )));
    }
    for pt in points {
        if pt.len() != d {
            return Err(Error::DimensionMismatch("point dimension mismatch".into()));
        }
    }
    // Edge vectors from the first point; normal = cofactor cross product.
    let edges: Vec<Vec<BigRational>> = points[1..]
        .iter()
        .map(|pt| pt.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    let normal: Vec<BigRational> = (0..d)
        .map(|k| {
            let minor: Vec<Vec<BigRational>> = edges
                .iter()
                .map(|e| {
                    e.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != k)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let det = det_rational(&minor);
            if k % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect();
    if normal.iter().all(|n| n.is_zero()) {
        return Err(Error::Validation(
            "degenerate: points do not span a hyperplane (general position fails)".into(),
        ));
    }
    let offset: BigRational = normal.iter().zip(&points[0]).map(|(n, x)| n * x).sum();
    let h = HyperplaneNbhd::new(normal, offset, BigRational::zero())?;
    for pt in points {
        debug_assert!(h.contains_point(pt), "hyperplane misses defining point");
    }
    Ok(h)
}

fn det_rational(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::from_integer(1.into());
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigRational::zero();
    for r in 0..n {
        if m[r][0].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigRational>> = m
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r)
            .map(|(_, row)| row[1..].to_vec())
            .collect();
        let term = &m[r][0] * det_rational(&minor);
        if r % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_i};

    fn pt(xs: &[(i64, i64)]) -> Vec<BigRational> {
        xs.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn ball_predicates_are_exact_at_boundaries() {
        let b = Ball::new(pt(&[(0, 1), (0, 1)]), rat(1, 1)).unwrap();
        assert!(b.contains_point(&pt(&[(3, 5), (4, 5)]))); // on the sphere
        assert!(!b.contains_point(&pt(&[(4, 5), (4, 5)])));

        let inner = Ball::new(pt(&[(1, 2), (0, 1)]), rat(1, 2)).unwrap();
        assert!(b.contains_ball(&inner)); // tangent internally
        let shifted = Ball::new(pt(&[(1, 2), (1, 100)]), rat(1, 2)).unwrap();
        assert!(!b.contains_ball(&shifted));

        let kiss = Ball::new(pt(&[(2, 1), (0, 1)]), rat(1, 1)).unwrap();
        assert!(b.intersects_ball(&kiss)); // tangent externally: closed balls touch
        let apart = Ball::new(pt(&[(201, 100), (0, 1)]), rat(1, 1)).unwrap();
        assert!(b.disjoint_from_ball(&apart));

        assert!(Ball::new(pt(&[(0, 1)]), rat_i(0)).is_err());
    }

    #[test]
    fn nbhd_membership_and_ball_relations() {
        // Neighborhood of {x : x_1 + x_2 = 1} with width 1/10 (normal (1,1)).
        let h = HyperplaneNbhd::new(pt(&[(1, 1), (1, 1)]), rat_i(1), rat(1, 10)).unwrap();
        assert!(h.contains_point(&pt(&[(1, 2), (1, 2)])));
        // Distance of (1,1) to the plane is 1/sqrt(2) > 1/10.
        assert!(!h.contains_point(&pt(&[(1, 1), (1, 1)])));

        let b = Ball::new(pt(&[(1, 1), (1, 1)]), rat(1, 2)).unwrap();
        // dist(center) = 2/sqrt(2) - offset... scaled gap = 2 - 1 = 1; reach
        // (1/10 + 1/2)^2 * 2 = 0.72 < 1: disjoint.
        assert!(h.ball_avoids(&b));
        let near = Ball::new(pt(&[(1, 2), (1, 2)]), rat(1, 20)).unwrap();
        assert!(h.contains_ball(&near));
        assert!(h.intersects_ball(&near));
    }

    #[test]
    fn hyperplane_through_hand_cases() {
        // d=2: through (0,0) and (1,0) -> the x-axis, normal (0, 1)-ish.
        let h = hyperplane_through(&[pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)])]).unwrap();
        assert!(h.normal[0].is_zero());
        assert!(!h.normal[1].is_zero());
        assert!(h.offset.is_zero());
        assert!(h.contains_point(&pt(&[(7, 2), (0, 1)])));

        // d=3: through the three unit points -> normal proportional to (1,1,1),
        // offset matching <n, e_1>.
        let h3 = hyperplane_through(&[
            pt(&[(1, 1), (0, 1), (0, 1)]),
            pt(&[(0, 1), (1, 1), (0, 1)]),
            pt(&[(0, 1), (0, 1), (1, 1)]),
        ])
        .unwrap();
        assert_eq!(h3.normal[0], h3.normal[1]);
        assert_eq!(h3.normal[1], h3.normal[2]);
        assert!(!h3.normal[0].is_zero());
        assert_eq!(h3.offset, h3.normal[0]);

        // Coincident points: degenerate.
        assert!(hyperplane_through(&[pt(&[(1, 2), (1, 2)]), pt(&[(1, 2), (1, 2)])]).is_err());
    }

    #[test]
    fn unit_normal_is_normalized() {
        let h = HyperplaneNbhd::new(pt(&[(3, 1), (4, 1)]), rat_i(2), rat(1, 4)).unwrap();
        let un = h.unit_normal(128);
        let norm_sq = un[0].mul(&un[0]).add(&un[1].mul(&un[1]));
        let err = norm_sq.sub(&Real::one()).abs();
        assert!(err < crate::precision::comparison_slack(128));
        // offset/|n| = 2/5
        let off = h.offset_normalized(128);
        let expect = Real::from_rational(&rat(2, 5), 128);
        assert!(off.sub(&expect).abs() < crate::precision::comparison_slack(128));
    }
}
