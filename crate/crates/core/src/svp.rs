//! Exact shortest-vector engine for lattices of rank at most 7.
//!
//! The lattice is presented by its exact integer Gram matrix; a unimodular
//! transform back to the caller's generators is threaded through every
//! operation. Reduction is greedy pairwise size reduction (each accepted step
//! strictly decreases an integer diagonal entry, so termination needs no
//! argument), escalating to an all-integer LLL when the floating
//! Gram-Schmidt data degenerates. Enumeration is depth-first with pruning
//! bounds inflated by 2^-25 and every surviving leaf re-evaluated in exact
//! integer arithmetic, so a reported minimum is certified.

use crate::error::{Error, Result};
use crate::fexp::{self, F64x};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

const GREEDY_STEP_CAP: usize = 400_000;
const LLL_ITER_CAP: usize = 4_000_000;
pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Nearest integer to num/den for den > 0, ties toward +inf.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let n2: BigInt = num * 2 + den;
    let d2: BigInt = den * 2;
    n2.div_floor(&d2)
}

fn round_f64x_to_i64(x: &F64x) -> Result<i64> {
    let f = x.to_f64();
    if !f.is_finite() || f.abs() >= 9.0e15 {
        return Err(Error::PrecisionExhausted(
            "enumeration coefficient exceeds integer range".into(),
        ));
    }
    Ok(f.round() as i64)
}

/// Exact Gram matrix of integer generator columns.
pub fn gram_from_columns(cols: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let m = cols.len();
    let mut g = vec![vec![BigInt::zero(); m]; m];
    for i in 0..m {
        for j in 0..=i {
            let dot: BigInt = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            g[i][j] = dot.clone();
            g[j][i] = dot;
        }
    }
    g
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn int_det(mat: &[Vec<BigInt>]) -> BigInt {
    let m = mat.len();
    if m == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..m - 1 {
        if a[k][k].is_zero() {
            match (k + 1..m).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                let (q, r) = t.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[i][j] = q;
            }
        }
        prev = a[k][k].clone();
    }
    if sign < 0 {
        -a[m - 1][m - 1].clone()
    } else {
        a[m - 1][m - 1].clone()
    }
}

enum Mode {
    /// Track the global minimum; `best` always holds a valid candidate.
    FullMin,
    /// Stop at the first vector with normsq * den < num (exact).
    Decision { num: BigInt, den: BigInt },
}

#[derive(Debug)]
pub struct SvpEngine {
    m: usize,
    gram: Vec<Vec<BigInt>>,
    /// u[r][c] = coefficient of original generator r in current vector c.
    u: Vec<Vec<BigInt>>,
    lll_done: bool,
}

impl SvpEngine {
    /// Engine over the exact Gram matrix of the caller's generators.
    /// `warm` composes a previously extracted transform before reduction.
    /// `check_rank` decides rank deficiency exactly up front (Gram
    /// determinant); skip it on hot paths where full rank is structural.
    pub fn new(
        gram0: Vec<Vec<BigInt>>,
        warm: Option<&[Vec<BigInt>]>,
        check_rank: bool,
    ) -> Result<SvpEngine> {
        let m = gram0.len();
        if m == 0 || m > 7 {
            return Err(Error::DimensionMismatch(format!(
                "engine supports rank 1..=7, got {m}"
            )));
        }
        for row in &gram0 {
            if row.len() != m {
                return Err(Error::DimensionMismatch("Gram matrix not square".into()));
            }
        }
        for (i, row) in gram0.iter().enumerate() {
            if !row[i].is_positive() {
                return Err(Error::RankDeficient(
                    "zero generator (Gram diagonal not positive)".into(),
                ));
            }
        }
        if check_rank && int_det(&gram0).is_zero() {
            return Err(Error::RankDeficient(
                "generators are linearly dependent (Gram determinant zero)".into(),
            ));
        }
        let (gram, u) = match warm {
            None => {
                let mut id = vec![vec![BigInt::zero(); m]; m];
                for (i, row) in id.iter_mut().enumerate() {
                    row[i] = BigInt::one();
                }
                (gram0, id)
            }
            Some(u0) => {
                if u0.len() != m || u0.iter().any(|r| r.len() != m) {
                    return Err(Error::DimensionMismatch("warm transform shape".into()));
                }
                // gram = u0^T * gram0 * u0, exactly.
                let mut gu = vec![vec![BigInt::zero(); m]; m];
                for i in 0..m {
                    for j in 0..m {
                        gu[i][j] = (0..m).map(|l| &gram0[i][l] * &u0[l][j]).sum();
                    }
                }
                let mut g = vec![vec![BigInt::zero(); m]; m];
                for i in 0..m {
                    for j in 0..=i {
                        let s: BigInt = (0..m).map(|l| &u0[l][i] * &gu[l][j]).sum();
                        g[i][j] = s.clone();
                        g[j][i] = s;
                    }
                }
                for (i, row) in g.iter().enumerate() {
                    if !row[i].is_positive() {
                        return Err(Error::RankDeficient(
                            "warm transform collapsed a generator".into(),
                        ));
                    }
                }
                (g, u0.to_vec())
            }
        };
        Ok(SvpEngine {
            m,
            gram,
            u,
            lll_done: false,
        })
    }

    pub fn from_columns(cols: &[Vec<BigInt>], warm: Option<&[Vec<BigInt>]>) -> Result<SvpEngine> {
        SvpEngine::new(gram_from_columns(cols), warm, warm.is_none())
    }

    /// The accumulated unimodular transform: original coeffs = u * current.
    pub fn transform(&self) -> &Vec<Vec<BigInt>> {
        &self.u
    }

    /// b_i <- b_i - r * b_j on the Gram matrix and transform.
    fn row_sub(&mut self, i: usize, j: usize, r: &BigInt) {
        debug_assert_ne!(i, j);
        let gij = self.gram[i][j].clone();
        let gjj = self.gram[j][j].clone();
        let new_diag = &self.gram[i][i] - r * &gij * 2 + r * r * &gjj;
        for l in 0..self.m {
            if l != i {
                let t = &self.gram[i][l] - r * &self.gram[j][l];
                self.gram[i][l] = t.clone();
                self.gram[l][i] = t;
            }
        }
        self.gram[i][i] = new_diag;
        for row in self.u.iter_mut() {
            let t = &row[i] - r * &row[j];
            row[i] = t;
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.gram.swap(i, j);
        for row in self.gram.iter_mut() {
            row.swap(i, j);
        }
        for row in self.u.iter_mut() {
            row.swap(i, j);
        }
    }

    /// Greedy pairwise reduction: subtract the nearest-integer multiple of
    /// one generator from another whenever that strictly shortens it. Every
    /// accepted step decreases a positive integer, so this terminates; the
    /// cap only guards against pathological slow convergence.
    fn greedy_reduce(&mut self, max_steps: usize) -> Result<usize> {
        let m = self.m;
        if m == 1 {
            return Ok(0);
        }
        let mut steps = 0usize;
        loop {
            let mut improved = false;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let r = round_div(&self.gram[i][j], &self.gram[j][j]);
                    if r.is_zero() {
                        continue;
                    }
                    let cand: BigInt = &self.gram[i][i]
                        - &r * &self.gram[i][j] * BigInt::from(2)
                        + &r * &r * &self.gram[j][j];
                    if cand < self.gram[i][i] {
                        if cand.is_zero() {
                            return Err(Error::RankDeficient(
                                "generator reduced to zero: dependent input".into(),
                            ));
                        }
                        self.row_sub(i, j, &r);
                        improved = true;
                        steps += 1;
                        if steps >= max_steps {
                            return Ok(steps);
                        }
                    }
                }
            }
            if !improved {
                return Ok(steps);
            }
        }
    }

    /// Floating Gram-Schmidt data from the exact Gram matrix. None when
    /// cancellation leaves a non-positive squared star norm.
    fn gso(&self) -> Option<(Vec<Vec<F64x>>, Vec<F64x>)> {
        let m = self.m;
        let g: Vec<Vec<F64x>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(F64x::from_bigint).collect())
            .collect();
        let mut mu = vec![vec![fexp::ZERO; m]; m];
        let mut bstar = vec![fexp::ZERO; m];
        for i in 0..m {
            for j in 0..i {
                let mut s = g[i][j];
                for l in 0..j {
                    s = s - mu[i][l] * mu[j][l] * bstar[l];
                }
                mu[i][j] = s / bstar[j];
            }
            let mut b = g[i][i];
            for l in 0..i {
                b = b - mu[i][l] * mu[i][l] * bstar[l];
            }
            if !b.is_positive() {
                return None;
            }
            bstar[i] = b;
        }
        Some((mu, bstar))
    }

    /// All-integer LLL (delta = 3/4) on the exact Gram matrix, maintaining
    /// the scaled Gram-Schmidt data lambda/d so every step is exact. Used as
    /// an escalation when floating Gram-Schmidt degenerates.
    fn exact_lll(&mut self) -> Result<()> {
        let m = self.m;
        self.lll_done = true;
        if m == 1 {
            return Ok(());
        }
        // Integral GSO: d[i] = det of leading (i+1)x(i+1) Gram minor,
        // lambda[i][j] = d[j] * mu_ij. Recomputed from scratch here.
        let mut d: Vec<BigInt> = vec![BigInt::one(); m];
        let mut lambda = vec![vec![BigInt::zero(); m]; m];
        let dm1 = BigInt::one();
        {
            let dv = |dd: &Vec<BigInt>, i: isize| -> BigInt {
                if i < 0 {
                    dm1.clone()
                } else {
                    dd[i as usize].clone()
                }
            };
            for i in 0..m {
                for j in 0..=i {
                    let mut u = self.gram[i][j].clone();
                    for l in 0..j {
                        let t = dv(&d, l as isize) * &u - &lambda[i][l] * &lambda[j][l];
                        let (q, r) = t.div_rem(&dv(&d, l as isize - 1));
                        debug_assert!(r.is_zero());
                        u = q;
                    }
                    if j < i {
                        lambda[i][j] = u;
                    } else {
                        if !u.is_positive() {
                            return Err(Error::RankDeficient(
                                "Gram leading minor not positive: dependent input".into(),
                            ));
                        }
                        d[i] = u;
                    }
                }
            }
        }

        let dval = |d: &Vec<BigInt>, i: isize| -> BigInt {
            if i < 0 {
                BigInt::one()
            } else {
                d[i as usize].clone()
            }
        };

        let mut k = 1usize;
        let mut iters = 0usize;
        while k < m {
            iters += 1;
            if iters > LLL_ITER_CAP {
                return Err(Error::PrecisionExhausted(
                    "integral LLL iteration cap exceeded".into(),
                ));
            }
            // RED(k, k-1)
            {
                let l = k - 1;
                let two_lam: BigInt = &lambda[k][l] * 2;
                if two_lam.abs() > d[l] {
                    let q = round_div(&lambda[k][l], &d[l]);
                    self.row_sub(k, l, &q);
                    lambda[k][l] = &lambda[k][l] - &q * &d[l];
                    for i in 0..l {
                        lambda[k][i] = &lambda[k][i] - &q * &lambda[l][i];
                    }
                }
            }
            // Lovasz test: 4 d_k d_{k-2} < 3 d_{k-1}^2 - 4 lambda_{k,k-1}^2
            let lhs: BigInt = &d[k] * dval(&d, k as isize - 2) * 4;
            let rhs: BigInt =
                dval(&d, k as isize - 1).pow(2) * 3 - &lambda[k][k - 1] * &lambda[k][k - 1] * 4;
            if lhs < rhs {
                // SWAP(k)
                self.swap_rows(k, k - 1);
                for j in 0..(k - 1) {
                    let t = lambda[k][j].clone();
                    lambda[k][j] = lambda[k - 1][j].clone();
                    lambda[k - 1][j] = t;
                }
                let lam = lambda[k][k - 1].clone();
                let b: BigInt = {
                    let t = dval(&d, k as isize - 2) * &d[k] + &lam * &lam;
                    let (q, r) = t.div_rem(&d[k - 1]);
                    debug_assert!(r.is_zero());
                    q
                };
                for i in k + 1..m {
                    let t = lambda[i][k].clone();
                    let new_ik = {
                        let nm = &d[k] * &lambda[i][k - 1] - &lam * &t;
                        let (q, r) = nm.div_rem(&d[k - 1]);
                        debug_assert!(r.is_zero());
                        q
                    };
                    lambda[i][k] = new_ik;
                    let new_ikm1 = {
                        let nm = &b * &t + &lam * &lambda[i][k];
                        let (q, r) = nm.div_rem(&d[k]);
                        debug_assert!(r.is_zero());
                        q
                    };
                    lambda[i][k - 1] = new_ikm1;
                }
                d[k - 1] = b;
                k = if k > 1 { k - 1 } else { 1 };
            } else {
                if k >= 2 {
                    for l in (0..k - 1).rev() {
                        let two_lam: BigInt = &lambda[k][l] * 2;
                        if two_lam.abs() > d[l] {
                            let q = round_div(&lambda[k][l], &d[l]);
                            self.row_sub(k, l, &q);
                            lambda[k][l] = &lambda[k][l] - &q * &d[l];
                            for i in 0..l {
                                lambda[k][i] = &lambda[k][i] - &q * &lambda[l][i];
                            }
                        }
                    }
                }
                k += 1;
            }
        }
        Ok(())
    }

    /// Reduce until floating Gram-Schmidt is usable.
    fn reduce_well(&mut self) -> Result<(Vec<Vec<F64x>>, Vec<F64x>)> {
        self.greedy_reduce(GREEDY_STEP_CAP)?;
        if let Some(gs) = self.gso() {
            return Ok(gs);
        }
        self.exact_lll()?;
        self.gso().ok_or_else(|| {
            Error::PrecisionExhausted("Gram-Schmidt degenerate after exact reduction".into())
        })
    }

    fn exact_normsq(&self, z: &[i64]) -> BigInt {
        let m = self.m;
        let mut acc = BigInt::zero();
        for i in 0..m {
            if z[i] == 0 {
                continue;
            }
            for j in 0..m {
                if z[j] == 0 {
                    continue;
                }
                acc += BigInt::from(z[i]) * BigInt::from(z[j]) * &self.gram[i][j];
            }
        }
        acc
    }

    fn coeffs_from(&self, z: &[i64]) -> Vec<BigInt> {
        (0..self.m)
            .map(|r| {
                (0..self.m)
                    .map(|c| &self.u[r][c] * BigInt::from(z[c]))
                    .sum()
            })
            .collect()
    }

    /// Depth-first enumeration. In FullMin mode returns the global minimum
    /// (seeded by the best diagonal entry); in Decision mode returns the
    /// first vector strictly below the threshold, or None if none exists.
    fn enumerate(
        &self,
        mu: &[Vec<F64x>],
        bstar: &[F64x],
        mode: Mode,
        node_cap: usize,
    ) -> Result<Option<(Vec<i64>, BigInt)>> {
        let m = self.m;
        let inflate = F64x::from_f64(1.0 + (2f64).powi(-25));
        // Initial exclusive bound.
        let (mut best, mut bound_excl): (Option<(Vec<i64>, BigInt)>, BigRational) = match &mode {
            Mode::FullMin => {
                let mut bi = 0usize;
                for i in 1..m {
                    if self.gram[i][i] < self.gram[bi][bi] {
                        bi = i;
                    }
                }
                let mut z = vec![0i64; m];
                z[bi] = 1;
                let nsq = self.gram[bi][bi].clone();
                (
                    Some((z, nsq.clone())),
                    BigRational::from_integer(nsq),
                )
            }
            Mode::Decision { num, den } => (
                None,
                BigRational::new(num.clone(), den.clone()),
            ),
        };
        let mut bound_fp =
            F64x::from_ratio(bound_excl.numer(), bound_excl.denom()) * inflate;

        let mut nodes = 0usize;
        // Iterative zigzag DFS. Levels m-1 (outermost) down to 0.
        let mut z = vec![0i64; m];
        let mut zig = vec![0i64; m]; // zigzag counter per level
        let mut center = vec![fexp::ZERO; m];
        let mut center_round = vec![0i64; m];
        let mut partial = vec![fexp::ZERO; m + 1]; // partial[i+1] accumulated above level i

        let compute_center = |z: &[i64], i: usize| -> F64x {
            let mut c = fexp::ZERO;
            for j in i + 1..m {
                c = c - mu[j][i] * F64x::from_i64(z[j]);
            }
            c
        };

        let mut level = m - 1;
        center[level] = fexp::ZERO;
        center_round[level] = 0;
        zig[level] = 0;
        'outer: loop {
            nodes += 1;
            if nodes > node_cap {
                return Err(Error::PrecisionExhausted(format!(
                    "enumeration node budget {node_cap} exceeded"
                )));
            }
            // Candidate z at the current level from the zigzag counter.
            let k = zig[level];
            let s: i64 = if center[level].to_f64() >= center_round[level] as f64 {
                1
            } else {
                -1
            };
            let offset = if k == 0 {
                0
            } else if k % 2 == 1 {
                ((k + 1) / 2) * s
            } else {
                -(k / 2) * s
            };
            z[level] = center_round[level].checked_add(offset).ok_or_else(|| {
                Error::PrecisionExhausted("enumeration coefficient overflow".into())
            })?;
            zig[level] += 1;

            let diff = F64x::from_i64(z[level]) - center[level];
            let term = diff * diff * bstar[level];
            let np = partial[level + 1] + term;
            if np > bound_fp {
                // Zigzag candidates are ordered by distance from the center,
                // so the rest of this level is pruned too: backtrack.
                if level == m - 1 {
                    break 'outer;
                }
                level += 1;
                continue 'outer;
            }
            if level == 0 {
                if z.iter().any(|&v| v != 0) {
                    let nsq = self.exact_normsq(&z);
                    let nsq_rat = BigRational::from_integer(nsq.clone());
                    if nsq_rat < bound_excl {
                        match &mode {
                            Mode::FullMin => {
                                best = Some((z.clone(), nsq.clone()));
                                bound_excl = nsq_rat;
                                bound_fp = F64x::from_bigint(&nsq) * inflate;
                            }
                            Mode::Decision { .. } => {
                                return Ok(Some((z.clone(), nsq)));
                            }
                        }
                    }
                }
                // Stay at level 0, try next zigzag value.
                continue 'outer;
            }
            // Descend.
            partial[level] = np;
            level -= 1;
            center[level] = compute_center(&z, level);
            center_round[level] = round_f64x_to_i64(&center[level])?;
            zig[level] = 0;
        }
        Ok(best)
    }

    /// Global shortest vector: (coefficients in the original generators,
    /// exact squared norm). Certified by exhaustive enumeration.
    pub fn shortest(&mut self, node_cap: usize) -> Result<(Vec<BigInt>, BigInt)> {
        let (mu, bstar) = self.reduce_well()?;
        match self.enumerate(&mu, &bstar, Mode::FullMin, node_cap) {
            Ok(Some((z, nsq))) => Ok((self.coeffs_from(&z), nsq)),
            Ok(None) => unreachable!("FullMin always holds a candidate"),
            Err(e) => {
                if !self.lll_done {
                    self.exact_lll()?;
                    let (mu, bstar) = self.gso().ok_or_else(|| {
                        Error::PrecisionExhausted("Gram-Schmidt degenerate after LLL".into())
                    })?;
                    let (z, nsq) = self
                        .enumerate(&mu, &bstar, Mode::FullMin, node_cap)?
                        .expect("FullMin always holds a candidate");
                    Ok((self.coeffs_from(&z), nsq))
                } else {
                    Err(e)
                }
            }
        }
    }

    /// Does some nonzero vector satisfy normsq < num/den? Returns a witness
    /// (original coefficients, exact squared norm) if so.
    pub fn decide_below(
        &mut self,
        num: &BigInt,
        den: &BigInt,
        node_cap: usize,
    ) -> Result<Option<(Vec<BigInt>, BigInt)>> {
        debug_assert!(den.is_positive());
        if !num.is_positive() {
            return Ok(None);
        }
        let (mu, bstar) = self.reduce_well()?;
        // Fast path: a reduced basis vector already below the threshold.
        for i in 0..self.m {
            if &self.gram[i][i] * den < *num {
                let mut z = vec![0i64; self.m];
                z[i] = 1;
                let nsq = self.gram[i][i].clone();
                return Ok(Some((self.coeffs_from(&z), nsq)));
            }
        }
        let mode = Mode::Decision {
            num: num.clone(),
            den: den.clone(),
        };
        match self.enumerate(&mu, &bstar, mode, node_cap) {
            Ok(Some((z, nsq))) => Ok(Some((self.coeffs_from(&z), nsq))),
            Ok(None) => Ok(None),
            Err(e) => {
                if !self.lll_done {
                    self.exact_lll()?;
                    let (mu, bstar) = self.gso().ok_or_else(|| {
                        Error::PrecisionExhausted("Gram-Schmidt degenerate after LLL".into())
                    })?;
                    let mode = Mode::Decision {
                        num: num.clone(),
                        den: den.clone(),
                    };
                    Ok(self
                        .enumerate(&mu, &bstar, mode, node_cap)?
                        .map(|(z, nsq)| (self.coeffs_from(&z), nsq)))
                } else {
                    Err(e)
                }
            }
        }
    }
}
