//! Winning strategy producing weighted badly approximable points on a
//! fractal support.
//!
//! The construction plays the potential game on the support tree of an
//! Ahlfors-regular measure. Alice derives play parameters from the weight
//! vector and the measure data ([`derive_params`]), marks the regions where
//! the weighted diagonal flow pushes the orbit lattice below a systole
//! threshold ([`is_dangerous`]), and each round covers the newly dangerous
//! part of Bob's ball by a budgeted ball family ([`alice_move`]). Any point
//! Bob can hold onto forever then has a certified badly approximable orbit
//! ([`outcome_certificate`]); [`run_badw`] drives a full game against the
//! support-tree player and assembles the audit trail.
//!
//! Two empirical instruments accompany the strategy: a report-only legality
//! audit of the covering budget ([`audit_legality`]) and a measured check of
//! the covering inequality behind it ([`verify_keylemma_empirical`],
//! [`keylemma_sweep`]).

use crate::diophantine::{badness_constant, dani_orbit_min, BadnessReport, Coord, OrbitReport};
use crate::error::{Error, Result};
use crate::fractal::{efficient_cover, BallTree, TreeMeasure};
use crate::games::{scheduled_radius, AliceMove, AliceStrategy, GameTranscript, GameVariant, TreeBob};
use crate::geom::Ball;
use crate::group::{make_a, make_d_base_b};
use crate::lattice::{Lattice, SystoleCache};
use crate::precision::{comparison_slack, invariant_slack, Real};
use crate::rational::{rat, rat_i, rat_pow, rat_to_string};
use crate::weights::WeightVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Largest contraction exponent tried when searching for a compliant ratio.
pub const MAX_M_EXPONENT: i64 = 64;

// ---------------------------------------------------------------------------
// Derived play parameters
// ---------------------------------------------------------------------------

/// One side-by-side evaluation of a ratio size requirement.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BetaCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

/// How [`derive_params_with_policy`] treats a seed ratio whose powers up to
/// [`MAX_M_EXPONENT`] never satisfy the size checks.
#[derive(Clone, Copy, Debug)]
pub enum MPolicy {
    /// Fail with `ParamInfeasible`.
    Strict,
    /// Fall back to the given exponent and mark the parameters
    /// non-compliant; reports carry an explicit banner.
    CapWithFallback(i64),
}

/// Play parameters derived from a weight vector and measure data. Weights
/// are stored sorted in descending order; all schedule formulas read them in
/// that order.
#[derive(Clone, Debug)]
pub struct StrategyParams {
    w: WeightVector,
    d: usize,
    t: usize,
    s: i64,
    eta: Real,
    eta_exact: Option<BigRational>,
    alpha_prime: Real,
    beta: BigRational,
    b: Real,
    r0: BigRational,
    alpha: Real,
    a_const: Real,
    gamma_cfg: Real,
    cprime_cfg: Real,
    m_applied: i64,
    m_required: Option<i64>,
    compliant: bool,
    s_overridden: bool,
    precision: usize,
}

/// Serializable echo of the parameters, embedded in certificates and run
/// reports. Rationals are fraction strings, reals decimal strings.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParamsEcho {
    pub w: Vec<String>,
    pub d: usize,
    pub t: usize,
    pub s: i64,
    pub eta: String,
    pub eta_exact: Option<String>,
    pub alpha_prime: String,
    pub beta: String,
    pub b: String,
    pub r0: String,
    pub alpha: String,
    pub a_const: String,
    pub gamma_cfg: String,
    pub cprime_cfg: String,
    pub m_applied: i64,
    pub m_required: Option<i64>,
    pub compliant: bool,
    pub s_overridden: bool,
    pub precision: usize,
}

/// Exact rational power of a positive rational when one exists: integer
/// exponents always, fractional ones when numerator and denominator of the
/// base admit exact roots of the required order.
fn exact_rational_pow(base: &BigRational, e: &BigRational) -> Option<BigRational> {
    if !base.is_positive() {
        return None;
    }
    let den = e.denom().to_u32()?;
    let num = e.numer().to_i64()?;
    let root = |v: &BigInt| -> Option<BigInt> {
        if den == 1 {
            return Some(v.clone());
        }
        let r = v.nth_root(den);
        (r.pow(den) == *v).then_some(r)
    };
    let rn = root(base.numer())?;
    let rd = root(base.denom())?;
    Some(rat_pow(&BigRational::new(rn, rd), num))
}

/// Ceiling of a rational as i64.
fn rat_ceil_i64(q: &BigRational) -> Result<i64> {
    q.ceil()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Validation("schedule exponent out of i64 range".into()))
}

impl StrategyParams {
    pub fn w(&self) -> &WeightVector {
        &self.w
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of leading (maximal) weights.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Rounds-per-level stride of the move schedule.
    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn eta(&self) -> &Real {
        &self.eta
    }

    /// Exact value of the threshold exponent when a rational branch attains
    /// the minimum.
    pub fn eta_exact(&self) -> Option<&BigRational> {
        self.eta_exact.as_ref()
    }

    /// Potential-game exponent the strategy plays at; strictly between 0 and
    /// the measure exponent.
    pub fn alpha_prime(&self) -> &Real {
        &self.alpha_prime
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn beta_real(&self) -> Real {
        Real::from_rational(&self.beta, self.precision)
    }

    /// Expansion base of the weighted flow; `beta = b^-(1+w_1)`.
    pub fn b(&self) -> &Real {
        &self.b
    }

    pub fn r0(&self) -> &BigRational {
        &self.r0
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn a_const(&self) -> &Real {
        &self.a_const
    }

    pub fn gamma_cfg(&self) -> &Real {
        &self.gamma_cfg
    }

    pub fn cprime_cfg(&self) -> &Real {
        &self.cprime_cfg
    }

    /// Exponent actually applied to the seed ratio.
    pub fn m_applied(&self) -> i64 {
        self.m_applied
    }

    /// Least exponent (at most [`MAX_M_EXPONENT`]) satisfying the size
    /// checks, when one exists.
    pub fn m_required(&self) -> Option<i64> {
        self.m_required
    }

    /// Whether the applied ratio satisfies every size check.
    pub fn compliant(&self) -> bool {
        self.compliant
    }

    pub fn s_overridden(&self) -> bool {
        self.s_overridden
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// `beta^e` for a rational exponent, exact when the seed admits it.
    pub fn beta_pow(&self, e: &BigRational) -> Real {
        match exact_rational_pow(&self.beta, e) {
            Some(q) => Real::from_rational(&q, self.precision),
            None => Real::from_rational(&self.beta, self.precision).pow_rational(e),
        }
    }

    /// Flow index of the condition covered at round `n` with level `ell`.
    pub fn k_for(&self, n: usize, ell: i64) -> i64 {
        n as i64 + 1 + self.s * ell
    }

    /// Systole threshold `beta^(eta*ell)` of a level-`ell` dangerous set.
    pub fn epsilon_for(&self, ell: i64) -> Real {
        match &self.eta_exact {
            Some(eta) => self.beta_pow(&(eta * rat_i(ell))),
            None => {
                let e = self.eta.mul(&Real::from_i64(ell, self.precision));
                Real::from_rational(&self.beta, self.precision).pow(&e)
            }
        }
    }

    /// Radius of the balls a family emitted at round `n` with index `i`
    /// must use: `beta^(n+1+i) * r0`.
    pub fn family_radius(&self, n: usize, i: usize) -> BigRational {
        scheduled_radius(&self.beta, &self.r0, n + i)
    }

    /// Ball-count budget `beta^(-alpha' * (i+1))` of family index `i`.
    pub fn budget(&self, i: usize) -> Real {
        let e = self
            .alpha_prime
            .mul(&Real::from_i64(-(i as i64) - 1, self.precision));
        Real::from_rational(&self.beta, self.precision).pow(&e)
    }

    /// Systole distortion rate of `d_ell a_k` under a unipotent shift: the
    /// systole at `y` differs from the systole at `x` by a factor at most
    /// `1 + lipschitz(k, ell) * |y - x|`.
    pub fn lipschitz(&self, k: i64, ell: i64) -> Real {
        let p = self.precision;
        let first = Real::from_rational(&rat_pow(&self.beta, ell - k), p);
        let w = self.w.entries();
        let w1 = &w[0];
        let wt1 = self.w.w_after_leading();
        // b^((1+w_{t+1}) k) expressed over the contraction base.
        let e = -(BigRational::one() + &wt1) * rat_i(k) / (BigRational::one() + w1);
        let second = self.beta_pow(&e);
        first.max_of(&second)
    }

    /// Uniform orbit threshold implied by surviving every dangerous set:
    /// `beta^(eta + (s+1)/(1+w_1) + (d+1-t)/(d+1))`.
    pub fn epsilon_star(&self) -> Real {
        let w1 = &self.w.entries()[0];
        let tail = rat_i(self.s + 1) / (BigRational::one() + w1)
            + BigRational::new(
                BigInt::from(self.d + 1 - self.t),
                BigInt::from(self.d + 1),
            );
        match &self.eta_exact {
            Some(eta) => self.beta_pow(&(eta + &tail)),
            None => {
                let e = self
                    .eta
                    .add(&Real::from_rational(&tail, self.precision));
                Real::from_rational(&self.beta, self.precision).pow(&e)
            }
        }
    }

    /// The four ratio size checks, each evaluated and reported
    /// individually at the stored ratio.
    pub fn beta_checks(&self) -> Vec<BetaCheck> {
        let shape = Shape {
            d: self.d,
            t: self.t,
            s: self.s,
            eta: self.eta.clone(),
            eta_exact: self.eta_exact.clone(),
            w_sorted: self.w.entries().to_vec(),
            precision: self.precision,
        };
        shape.checks(
            &self.beta,
            &self.r0,
            &self.alpha,
            &self.a_const,
            &self.gamma_cfg,
            &self.cprime_cfg,
        )
    }

    /// Copy with the schedule stride replaced. Dependent quantities `eta`
    /// and `alpha'` keep their derived values: the override exists to
    /// reproduce shallow-schedule geometry and is flagged in every report,
    /// while audits keep running against the derived budget exponent.
    pub fn with_override_s(&self, s: i64) -> Result<StrategyParams> {
        if s < 1 {
            return Err(Error::Validation("schedule stride must be positive".into()));
        }
        let mut p = self.clone();
        p.s = s;
        p.s_overridden = true;
        Ok(p)
    }

    pub fn echo(&self) -> ParamsEcho {
        ParamsEcho {
            w: self.w.entries().iter().map(rat_to_string).collect(),
            d: self.d,
            t: self.t,
            s: self.s,
            eta: self.eta.to_dec_string(),
            eta_exact: self.eta_exact.as_ref().map(rat_to_string),
            alpha_prime: self.alpha_prime.to_dec_string(),
            beta: rat_to_string(&self.beta),
            b: self.b.to_dec_string(),
            r0: rat_to_string(&self.r0),
            alpha: self.alpha.to_dec_string(),
            a_const: self.a_const.to_dec_string(),
            gamma_cfg: self.gamma_cfg.to_dec_string(),
            cprime_cfg: self.cprime_cfg.to_dec_string(),
            m_applied: self.m_applied,
            m_required: self.m_required,
            compliant: self.compliant,
            s_overridden: self.s_overridden,
            precision: self.precision,
        }
    }
}

/// Weight-derived shape of the schedule, independent of the ratio.
struct Shape {
    d: usize,
    t: usize,
    s: i64,
    eta: Real,
    eta_exact: Option<BigRational>,
    w_sorted: Vec<BigRational>,
    precision: usize,
}

impl Shape {
    fn derive(w: &WeightVector, alpha: &Real, gamma: &Real, p: usize) -> Result<Shape> {
        if !w.is_strict() {
            return Err(Error::InvalidWeights(
                "the strategy needs strictly positive weights".into(),
            ));
        }
        let (sorted, _) = w.sorted_desc();
        let d = sorted.len();
        let sw = WeightVector::new(sorted.clone())?;
        let t = sw.t_leading();
        let w1 = sorted[0].clone();
        let wd = sorted[d - 1].clone();
        let wt1 = sw.w_after_leading();
        let one = BigRational::one();

        // Stride: large enough that the level-1 sets both fit the covering
        // scale and clear the expansion gap.
        let b2 = (&one + &w1) / (&w1 - &wt1);
        let b3 = (rat_i(2) * (&one + &w1) + &one) / &w1;
        let s = [5, rat_ceil_i64(&b2)?, rat_ceil_i64(&b3)?]
            .into_iter()
            .max()
            .unwrap();

        // Threshold exponent: least of three rational branches and the
        // measured-decay cap alpha/gamma.
        let den = rat_i(2 * d as i64) * (&one + &w1);
        let e1 = BigRational::new(BigInt::one(), BigInt::from(4 * (d + 1)));
        let e2 = &wd * rat_i(s) / &den;
        let e3 = (&w1 * rat_i(s) - rat_i(2) * (&one + &w1)) / &den;
        let rational_min = [e1, e2, e3].into_iter().min().unwrap();
        if !rational_min.is_positive() {
            return Err(Error::ParamInfeasible(format!(
                "threshold exponent collapsed to {} for weights {:?}",
                rat_to_string(&rational_min),
                sorted.iter().map(rat_to_string).collect::<Vec<_>>()
            )));
        }
        let cap = alpha.div(gamma);
        let rm_real = Real::from_rational(&rational_min, p);
        let (eta, eta_exact) = if rm_real <= cap {
            (rm_real, Some(rational_min))
        } else {
            (cap, None)
        };

        Ok(Shape {
            d,
            t,
            s,
            eta,
            eta_exact,
            w_sorted: sorted,
            precision: p,
        })
    }

    /// Analytic lower estimate of the least seed exponent passing all four
    /// size checks: each check reads `seed^(m*c) <= K` for a positive rate
    /// `c`, so `m >= ln(1/K) / (c * ln(1/seed))`. Rounding is confirmed by
    /// the caller against the exact checks.
    fn min_exponent_estimate(
        &self,
        seed: &BigRational,
        r0: &BigRational,
        alpha: &Real,
        a_const: &Real,
        gamma: &Real,
        cprime: &Real,
    ) -> i64 {
        let p = self.precision;
        let one = BigRational::one();
        let w1 = &self.w_sorted[0];
        let wd = &self.w_sorted[self.d - 1];
        let den = rat_i(2 * self.d as i64) * (&one + w1);
        let l_seed = Real::from_rational(seed, p).ln().neg();
        let need = |goal: &Real, rate: &BigRational| -> i64 {
            if !goal.is_positive() {
                return 1;
            }
            let x = goal.div(&Real::from_rational(rate, p).mul(&l_seed));
            if x >= Real::from_i64(MAX_M_EXPONENT + 1, p) {
                return MAX_M_EXPONENT + 1;
            }
            let f = x.floor_i64();
            if Real::from_i64(f, p) < x {
                f + 1
            } else {
                f
            }
        };
        let sqrt2d = Real::from_i64(2, p)
            .sqrt()
            .mul(&Real::from_i64(self.d as i64, p));
        let ea = (w1 * rat_i(self.s) - rat_i(2) * (&one + w1)) / &den;
        let eb = wd * rat_i(self.s) / &den;
        let ec = BigRational::new(BigInt::one(), BigInt::from(2 * (self.d + 1)));
        let goal_c = Real::from_i64((self.d + 1) as i64, p)
            .sqrt()
            .div(&Real::from_rational(r0, p))
            .ln();
        let big = a_const
            .mul(a_const)
            .mul(cprime)
            .mul(&Real::from_i64(2, p).pow(&gamma.add(&Real::one())))
            .mul(&Real::from_rational(&(rat_i(3) / r0), p).pow(alpha));
        let goal_d = big.max_of(&Real::from_i64(2, p)).ln();
        let rate_d = gamma
            .mul(&self.eta)
            .div(&Real::from_i64(self.s - 1, p))
            .to_rational();
        [
            need(&sqrt2d.ln(), &ea),
            need(&sqrt2d.ln(), &eb),
            need(&goal_c, &ec),
            need(&goal_d, &rate_d),
            1,
        ]
        .into_iter()
        .max()
        .unwrap()
    }

    /// Evaluates the four size checks at a candidate ratio.
    fn checks(
        &self,
        beta: &BigRational,
        r0: &BigRational,
        alpha: &Real,
        a_const: &Real,
        gamma: &Real,
        cprime: &Real,
    ) -> Vec<BetaCheck> {
        let p = self.precision;
        let one = BigRational::one();
        let w1 = &self.w_sorted[0];
        let wd = &self.w_sorted[self.d - 1];
        let den = rat_i(2 * self.d as i64) * (&one + w1);
        let beta_pow = |e: &BigRational| -> Real {
            match exact_rational_pow(beta, e) {
                Some(q) => Real::from_rational(&q, p),
                None => Real::from_rational(beta, p).pow_rational(e),
            }
        };
        let sqrt2d = Real::from_i64(2, p)
            .sqrt()
            .mul(&Real::from_i64(self.d as i64, p));
        let mut out = Vec::new();

        let ea = (w1 * rat_i(self.s) - rat_i(2) * (&one + w1)) / &den;
        let lhs_a = beta_pow(&-ea);
        out.push(BetaCheck {
            name: "expansion gap beats sqrt(2)*d on the leading block".into(),
            lhs: lhs_a.to_dec_string(),
            rhs: sqrt2d.to_dec_string(),
            pass: lhs_a >= sqrt2d,
        });

        let eb = wd * rat_i(self.s) / &den;
        let lhs_b = beta_pow(&-eb);
        out.push(BetaCheck {
            name: "expansion gap beats sqrt(2)*d on the trailing block".into(),
            lhs: lhs_b.to_dec_string(),
            rhs: sqrt2d.to_dec_string(),
            pass: lhs_b >= sqrt2d,
        });

        let ec = BigRational::new(BigInt::one(), BigInt::from(2 * (self.d + 1)));
        let lhs_c = beta_pow(&-ec);
        let rhs_c = Real::from_i64((self.d + 1) as i64, p)
            .sqrt()
            .div(&Real::from_rational(r0, p));
        out.push(BetaCheck {
            name: "one contraction step clears the start-ball scale".into(),
            lhs: lhs_c.to_dec_string(),
            rhs: rhs_c.to_dec_string(),
            pass: lhs_c >= rhs_c,
        });

        // beta^(gamma*eta/(s-1)) <= min(1/2, 1/(A^2 C' 2^(gamma+1) (3/r0)^alpha))
        let e2 = gamma
            .mul(&self.eta)
            .div(&Real::from_i64(self.s - 1, p));
        let lhs_2 = Real::from_rational(beta, p).pow(&e2);
        let two = Real::from_i64(2, p);
        let big = a_const
            .mul(a_const)
            .mul(cprime)
            .mul(&two.pow(&gamma.add(&Real::one())))
            .mul(
                &Real::from_rational(&(rat_i(3) / r0), p).pow(alpha),
            );
        let rhs_2 = rat(1, 2).pipe_real(p).min_of(&big.recip());
        out.push(BetaCheck {
            name: "budget slack per stride absorbs the covering constant".into(),
            lhs: lhs_2.to_dec_string(),
            rhs: rhs_2.to_dec_string(),
            pass: lhs_2 <= rhs_2,
        });

        out
    }
}

/// Small convenience: lift a rational into a `Real` inline.
trait PipeReal {
    fn pipe_real(&self, p: usize) -> Real;
}

impl PipeReal for BigRational {
    fn pipe_real(&self, p: usize) -> Real {
        Real::from_rational(self, p)
    }
}

/// Derives play parameters, replacing the seed ratio by its least power
/// `M <= 64` that passes every size check. Fails with `ParamInfeasible` when
/// no such power exists; [`derive_params_with_policy`] can fall back instead.
#[allow(clippy::too_many_arguments)]
pub fn derive_params(
    w: &WeightVector,
    alpha: &Real,
    a_const: &Real,
    gamma_cfg: &Real,
    cprime_cfg: &Real,
    r0: &BigRational,
    beta_seed: &BigRational,
    p: usize,
) -> Result<StrategyParams> {
    derive_params_with_policy(
        w, alpha, a_const, gamma_cfg, cprime_cfg, r0, beta_seed, p, MPolicy::Strict,
    )
}

/// [`derive_params`] with an explicit policy for infeasible seeds.
#[allow(clippy::too_many_arguments)]
pub fn derive_params_with_policy(
    w: &WeightVector,
    alpha: &Real,
    a_const: &Real,
    gamma_cfg: &Real,
    cprime_cfg: &Real,
    r0: &BigRational,
    beta_seed: &BigRational,
    p: usize,
    policy: MPolicy,
) -> Result<StrategyParams> {
    if !(beta_seed.is_positive() && *beta_seed < BigRational::one()) {
        return Err(Error::Validation("seed ratio must lie in (0,1)".into()));
    }
    if !r0.is_positive() {
        return Err(Error::Validation("start radius must be positive".into()));
    }
    for (name, v) in [
        ("measure exponent", alpha),
        ("measure constant", a_const),
        ("decay exponent", gamma_cfg),
        ("covering constant", cprime_cfg),
    ] {
        if !v.is_positive() {
            return Err(Error::Validation(format!("{name} must be positive")));
        }
    }
    let shape = Shape::derive(w, alpha, gamma_cfg, p)?;

    // Every size check is monotone in the exponent, so the least compliant
    // one is found analytically in log space and then confirmed (and
    // minimality-polished) with the exact check evaluation.
    let passes = |m: i64| -> bool {
        let pw = rat_pow(beta_seed, m);
        shape
            .checks(&pw, r0, alpha, a_const, gamma_cfg, cprime_cfg)
            .iter()
            .all(|c| c.pass)
    };
    let mut m_required = None;
    let mut m = shape.min_exponent_estimate(beta_seed, r0, alpha, a_const, gamma_cfg, cprime_cfg);
    while m <= MAX_M_EXPONENT {
        if passes(m) {
            while m > 1 && passes(m - 1) {
                m -= 1;
            }
            m_required = Some(m);
            break;
        }
        m += 1;
    }

    let (m_applied, compliant) = match (m_required, policy) {
        (Some(m), _) => (m, true),
        (None, MPolicy::Strict) => {
            return Err(Error::ParamInfeasible(format!(
                "no power of the seed ratio {} up to exponent {} satisfies the size checks; \
                 loosen the decay or covering configuration, or cap with a fallback exponent",
                rat_to_string(beta_seed),
                MAX_M_EXPONENT
            )));
        }
        (None, MPolicy::CapWithFallback(m)) => {
            if !(1..=MAX_M_EXPONENT).contains(&m) {
                return Err(Error::Validation(
                    "fallback exponent must lie in 1..=64".into(),
                ));
            }
            (m, false)
        }
    };

    let beta = rat_pow(beta_seed, m_applied);
    let w1 = shape.w_sorted[0].clone();
    let e_b = -BigRational::one() / (BigRational::one() + &w1);
    let b = match exact_rational_pow(&beta, &e_b) {
        Some(q) => Real::from_rational(&q, p),
        None => Real::from_rational(&beta, p).pow_rational(&e_b),
    };

    // alpha' = alpha - gamma*eta/(4(s-1)); eta <= alpha/gamma forces
    // 0 < alpha' < alpha, re-checked here as a hard invariant.
    let alpha_prime = alpha.sub(
        &gamma_cfg
            .mul(&shape.eta)
            .div(&Real::from_i64(4 * (shape.s - 1), p)),
    );
    if alpha_prime.is_negative() || alpha_prime >= *alpha {
        return Err(Error::Validation(format!(
            "potential exponent {} escaped [0, alpha) for alpha {}",
            alpha_prime.to_dec_string(),
            alpha.to_dec_string()
        )));
    }

    let sw = WeightVector::new(shape.w_sorted.clone())?;
    Ok(StrategyParams {
        w: sw,
        d: shape.d,
        t: shape.t,
        s: shape.s,
        eta: shape.eta,
        eta_exact: shape.eta_exact,
        alpha_prime,
        beta,
        b,
        r0: r0.clone(),
        alpha: alpha.clone(),
        a_const: a_const.clone(),
        gamma_cfg: gamma_cfg.clone(),
        cprime_cfg: cprime_cfg.clone(),
        m_applied,
        m_required,
        compliant,
        s_overridden: false,
        precision: p,
    })
}

/// Covering constant from an absolute-decay constant `C`:
/// `C * A^2 * max(2^alpha * (2 r0)^-gamma, 3^alpha)`.
pub fn closed_form_cprime(
    c_decay: &Real,
    a_const: &Real,
    alpha: &Real,
    gamma: &Real,
    r0: &BigRational,
    p: usize,
) -> Real {
    let two_r0 = Real::from_rational(&(rat_i(2) * r0), p);
    let first = Real::from_i64(2, p)
        .pow(alpha)
        .mul(&two_r0.pow(&gamma.neg()));
    let second = Real::from_i64(3, p).pow(alpha);
    c_decay.mul(&a_const.mul(a_const)).mul(&first.max_of(&second))
}

// ---------------------------------------------------------------------------
// Dangerous sets
// ---------------------------------------------------------------------------

/// One dangerous set: points `x` of the round-`n` ball whose sheared
/// lattice `d_ell a_k u_x` has a vector shorter than `eps`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DangerousSetSpec {
    pub k: i64,
    pub ell: i64,
    pub n: usize,
    pub eps: Real,
}

/// The schedule spec for round `n >= 1` and level `ell`: `k = n+1+s*ell`,
/// `eps = beta^(eta*ell)`.
pub fn dangerous_spec(n: usize, ell: i64, params: &StrategyParams) -> Result<DangerousSetSpec> {
    if ell < 1 {
        return Err(Error::Validation("dangerous-set level must be >= 1".into()));
    }
    Ok(DangerousSetSpec {
        k: params.k_for(n, ell),
        ell,
        n,
        eps: params.epsilon_for(ell),
    })
}

/// Levels unioned into the opening move's family `i`: pairs `(n', ell)`
/// with `n' + (s-1) ell = i`, `ell >= (n'+1)/s`. Empty for small `i`.
pub fn first_round_pairs(i: usize, s: i64) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let i = i as i64;
    let mut ell = 1;
    while (s - 1) * ell <= i {
        let np = i - (s - 1) * ell;
        if s * ell >= np + 1 {
            out.push((np as usize, ell));
        }
        ell += 1;
    }
    out
}

/// The level covered by family `i` of round `n >= 1`, when any: `i` must be
/// `(s-1) ell` for an integer `0 < ell` with `s*ell <= n`.
pub fn later_round_pair(n: usize, i: usize, s: i64) -> Option<i64> {
    let i = i as i64;
    if s < 2 || i % (s - 1) != 0 {
        return None;
    }
    let ell = i / (s - 1);
    (ell >= 1 && s * ell <= n as i64).then_some(ell)
}

/// Whether `x` lies in the dangerous set `spec`: exact decision on the
/// structured integer model of `d_ell a_k u_x`.
pub fn is_dangerous(
    x: &[BigRational],
    spec: &DangerousSetSpec,
    params: &StrategyParams,
    cache: &mut SystoleCache,
) -> Result<bool> {
    let lat = spec_lattice(x, spec, params)?;
    let inside = lat
        .in_k_eps_decision(&spec.eps, cache)
        .map_err(|e| decorate(e, spec))?;
    Ok(!inside)
}

fn spec_lattice(x: &[BigRational], spec: &DangerousSetSpec, params: &StrategyParams) -> Result<Lattice> {
    let dl = make_d_base_b(spec.ell, &params.b, &params.w, params.t, params.d)?;
    let ak = make_a(spec.k, &params.b, &params.w)?;
    let g = dl.compose(&ak)?;
    Lattice::from_structured(&g, x, params.precision).map_err(|e| decorate(e, spec))
}

fn decorate(e: Error, spec: &DangerousSetSpec) -> Error {
    match e {
        Error::PrecisionExhausted(m) => Error::PrecisionExhausted(format!(
            "dangerous-set test (k={}, ell={}, n={}): {}",
            spec.k, spec.ell, spec.n, m
        )),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Alice's covering moves
// ---------------------------------------------------------------------------

/// Persistent record of every dangerous set instantiated so far, with a
/// membership memo keyed by tree path. Valid for one support tree and one
/// parameter set.
#[derive(Default)]
pub struct StrategyHistory {
    specs: Vec<DangerousSetSpec>,
    /// Parallel to `specs`: whether the family realizing that set covered it
    /// completely (full-mode realization). Only complete sets may absorb
    /// later representatives or blanket a round.
    complete: Vec<bool>,
    memo: BTreeMap<(i64, i64, Vec<usize>), bool>,
    pad_memo: BTreeMap<(i64, i64, Vec<usize>), bool>,
    class_memo: BTreeMap<(i64, i64, Vec<usize>), BoxClass>,
    caches: BTreeMap<(i64, i64), SystoleCache>,
}

impl StrategyHistory {
    pub fn new() -> StrategyHistory {
        StrategyHistory::default()
    }

    /// All instantiated specs in emission order.
    pub fn specs(&self) -> &[DangerousSetSpec] {
        &self.specs
    }

    /// Memoized membership of the support point at `path`.
    pub fn member(
        &mut self,
        path: &[usize],
        x: &[BigRational],
        spec: &DangerousSetSpec,
        params: &StrategyParams,
    ) -> Result<bool> {
        let key = (spec.k, spec.ell, path.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let cache = self.caches.entry((spec.k, spec.ell)).or_default();
        let v = is_dangerous(x, spec, params, cache)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Memoized padded membership of the box center at `path`: flags the
    /// point once its systole drops below `eps + lipschitz * rho`, so any
    /// box of radius `rho` that meets the set is guaranteed a flagged
    /// center. Wider than `member` (which tests bare `eps`), hence the
    /// separate memo; the pad is a function of the key because the radius
    /// is a function of the path length.
    fn flagged(
        &mut self,
        path: &[usize],
        x: &[BigRational],
        rho: &BigRational,
        spec: &DangerousSetSpec,
        params: &StrategyParams,
    ) -> Result<bool> {
        let key = (spec.k, spec.ell, path.to_vec());
        if let Some(v) = self.pad_memo.get(&key) {
            return Ok(*v);
        }
        let eps_pad = spec.eps.add(&pad_term(rho, spec, params));
        let cache = self.caches.entry((spec.k, spec.ell)).or_default();
        let lat = spec_lattice(x, spec, params)?;
        let v = !lat
            .in_k_eps_decision(&eps_pad, cache)
            .map_err(|e| decorate(e, spec))?;
        self.pad_memo.insert(key, v);
        Ok(v)
    }

    /// Memoized whole-box classification of the node at `path`.
    fn classify_at(
        &mut self,
        support: &mut dyn BallTree,
        path: &[usize],
        spec: &DangerousSetSpec,
        params: &StrategyParams,
    ) -> Result<BoxClass> {
        let key = (spec.k, spec.ell, path.to_vec());
        if let Some(v) = self.class_memo.get(&key) {
            return Ok(*v);
        }
        let ball = support.ball_at(path)?;
        let cache = self.caches.entry((spec.k, spec.ell)).or_default();
        let v = classify_region(&ball.center, &ball.radius, spec, params, cache)?;
        self.class_memo.insert(key, v);
        Ok(v)
    }

    /// Whether the box of the representative at `path` was covered in full
    /// by the realization of one of the listed earlier sets; scans most
    /// recent first and stops on the first hit. A set's covering and
    /// resolution levels depend only on `(k, ell)`, so this replays the
    /// earlier sift along the ancestor chain: a Dangerous ancestor fed all
    /// its children to that family's cover, a flagged resolution box went in
    /// whole, and a Clean verdict certifies the box held nothing to cover.
    /// Anything short of proof keeps the representative.
    fn covered_by_any(
        &mut self,
        indices: &[usize],
        support: &mut dyn BallTree,
        m_step: usize,
        path: &[usize],
        params: &StrategyParams,
    ) -> Result<bool> {
        'specs: for &idx in indices {
            let spec = self.specs[idx].clone();
            let lcov = m_step * (spec.k - spec.ell) as usize;
            let lres = lcov + 2;
            if lcov > path.len() {
                continue;
            }
            let mut lvl = lcov;
            loop {
                let anc = &path[..lvl];
                if lvl == lres {
                    let ball = support.ball_at(anc)?;
                    if self.flagged(anc, &ball.center, &ball.radius, &spec, params)? {
                        return Ok(true);
                    }
                    continue 'specs;
                }
                match self.classify_at(support, anc, &spec, params)? {
                    BoxClass::Dangerous => return Ok(true),
                    BoxClass::Clean => continue 'specs,
                    BoxClass::Mixed => {
                        if lvl == path.len() {
                            continue 'specs;
                        }
                        lvl += 1;
                    }
                }
            }
        }
        Ok(false)
    }
}

/// Whole-region classification against one dangerous set via the shear
/// distortion bound: the systole is `lipschitz(k, ell)`-Lipschitz in the
/// base point, so with additive slack `h = lipschitz * rho` a center
/// systole of at least `eps + h` clears the whole ball and one below
/// `eps - h` sinks it. The slack must be added, not multiplied in: at the
/// covering scale `h` is comparable to `1`, so there every box is Mixed
/// and the split only starts pruning one level further down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BoxClass {
    Clean,
    Dangerous,
    Mixed,
}

fn pad_term(rho: &BigRational, spec: &DangerousSetSpec, params: &StrategyParams) -> Real {
    let p = params.precision;
    params
        .lipschitz(spec.k, spec.ell)
        .mul(&Real::from_rational(rho, p))
        .mul(&Real::one().add(&invariant_slack(p)))
}

fn classify_region(
    center: &[BigRational],
    rho: &BigRational,
    spec: &DangerousSetSpec,
    params: &StrategyParams,
    cache: &mut SystoleCache,
) -> Result<BoxClass> {
    let h = pad_term(rho, spec, params);
    let lat = spec_lattice(center, spec, params)?;
    let hi = spec.eps.add(&h);
    if lat.in_k_eps_decision(&hi, cache).map_err(|e| decorate(e, spec))? {
        return Ok(BoxClass::Clean);
    }
    let lo = spec.eps.sub(&h);
    if lo.is_positive() && !lat.in_k_eps_decision(&lo, cache).map_err(|e| decorate(e, spec))? {
        return Ok(BoxClass::Dangerous);
    }
    Ok(BoxClass::Mixed)
}

/// How one family was realized on the support.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyEcho {
    pub i: usize,
    pub mode: String,
    pub specs: Vec<DangerousSetSpec>,
    pub raw_reps: usize,
    pub removed_by_dedup: usize,
    pub cover_size: usize,
}

/// Report-only audit line for one family.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyAudit {
    pub i: usize,
    pub count: usize,
    pub budget: String,
    pub headroom: String,
    pub pass: bool,
}

/// Budget audit of one emitted move.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LegalityReport {
    pub n: usize,
    pub per_family: Vec<FamilyAudit>,
    pub all_pass: bool,
}

/// Everything [`alice_move`] produces for one round.
pub struct AliceMoveOutcome {
    pub families: Vec<Vec<Ball>>,
    pub echoes: Vec<FamilyEcho>,
    pub audit: LegalityReport,
}

/// Report-only legality audit: per family, the ball count against the
/// budget `beta^(-alpha'(i+1))` with numeric headroom. Never gates.
pub fn audit_legality(families: &[Vec<Ball>], n: usize, params: &StrategyParams) -> LegalityReport {
    let p = params.precision;
    let slack = Real::one().add(&comparison_slack(p));
    let mut per_family = Vec::with_capacity(families.len());
    let mut all_pass = true;
    for (i, fam) in families.iter().enumerate() {
        let budget = params.budget(i);
        let count = fam.len();
        let pass = count <= 1 || Real::from_i64(count as i64, p) <= budget.mul(&slack);
        let headroom = if count == 0 {
            "inf".to_string()
        } else {
            budget
                .div(&Real::from_i64(count as i64, p))
                .to_dec_string()
        };
        all_pass &= pass;
        per_family.push(FamilyAudit {
            i,
            count,
            budget: budget.to_dec_string(),
            headroom,
            pass,
        });
    }
    LegalityReport {
        n,
        per_family,
        all_pass,
    }
}

fn tree_step(tree_beta: &BigRational, game_beta: &BigRational) -> Result<usize> {
    let mut pw = tree_beta.clone();
    for m in 1..=64usize {
        if pw == *game_beta {
            return Ok(m);
        }
        pw *= tree_beta;
    }
    Err(Error::Validation(
        "play ratio must be a positive power of the support tree ratio".into(),
    ))
}

fn pow_le(base: usize, exp: usize, cap: usize) -> bool {
    let mut acc = 1usize;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) if v <= cap => v,
            _ => return false,
        };
    }
    true
}

fn tree_radius(tree: &dyn BallTree, level: usize) -> BigRational {
    rat_pow(tree.beta(), level as i64) * tree.root_radius()
}

/// Path of the tree node whose ball equals `bn`. The covering moves need
/// node-aligned play, which the support-tree player guarantees.
fn locate_node(support: &mut dyn BallTree, bn: &Ball) -> Result<Vec<usize>> {
    let mut path: Vec<usize> = Vec::new();
    let mut ball = support.ball_at(&path)?;
    loop {
        if ball.center == bn.center && ball.radius == bn.radius {
            return Ok(path);
        }
        let next_radius = tree_radius(support, path.len() + 1);
        if next_radius < bn.radius {
            return Err(Error::Validation(
                "current ball is not a node of the support tree; the covering strategy needs tree play"
                    .into(),
            ));
        }
        let kids = support.children_centers(&path)?;
        let mut found = None;
        for (ci, c) in kids.into_iter().enumerate() {
            let cb = Ball::new(c, next_radius.clone())?;
            if cb.contains_ball(bn) {
                found = Some((ci, cb));
                break;
            }
        }
        match found {
            Some((ci, cb)) => {
                path.push(ci);
                ball = cb;
            }
            None => {
                return Err(Error::Validation(
                    "current ball escapes every child of its containing node".into(),
                ));
            }
        }
    }
}

struct RealizeOut {
    reps: Vec<(Vec<usize>, Vec<BigRational>)>,
    mode: String,
    full: bool,
}

/// Collects representative support points of the union of `specs` below the
/// node at `bn_path`. Full mode classifies every covering-scale box through
/// the distortion bound and resolves mixed boxes two tree levels deeper;
/// sample mode tests box centers at the deepest level whose box count fits
/// the grid cap.
#[allow(clippy::too_many_arguments)]
fn realize_reps(
    support: &mut dyn BallTree,
    history: &mut StrategyHistory,
    params: &StrategyParams,
    specs: &[DangerousSetSpec],
    bn_path: &[usize],
    bn: &Ball,
    m_step: usize,
    i: usize,
    grid_cap: usize,
) -> Result<RealizeOut> {
    let branching = support.branching();
    let lb = bn_path.len();
    let lcov = lb + m_step * (i + 1);
    let full = pow_le(branching, lcov - lb, grid_cap);
    let mut reps = Vec::new();

    if full {
        let lres = lcov + 2;
        sift(
            support, history, params, specs, &mut bn_path.to_vec(), bn, lcov, lres, &mut reps,
        )?;
        Ok(RealizeOut {
            reps,
            mode: "full".into(),
            full: true,
        })
    } else {
        let mut js = 1usize;
        while pow_le(branching, js + 1, grid_cap) && lb + js + 1 <= lcov {
            js += 1;
        }
        let ls = lb + js;
        let mut stack = vec![(bn_path.to_vec(), Vec::new())];
        while let Some((path, center)) = stack.pop() {
            if path.len() == ls {
                let danger = specs
                    .iter()
                    .map(|sp| history.member(&path, &center, sp, params))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .any(|v| v);
                if danger {
                    reps.push((path, center));
                }
                continue;
            }
            let rho = tree_radius(support, path.len() + 1);
            let kids = support.children_centers(&path)?;
            // Reverse push so the walk visits children in stored order.
            for (ci, c) in kids.into_iter().enumerate().rev() {
                if bn.disjoint_from_ball(&Ball::new(c.clone(), rho.clone())?) {
                    continue;
                }
                let mut np = path.clone();
                np.push(ci);
                stack.push((np, c));
            }
        }
        reps.sort();
        Ok(RealizeOut {
            reps,
            mode: format!("sampled at {} levels below the round ball", js),
            full: false,
        })
    }
}

/// Full-mode recursive sift from the covering level down to the resolution
/// level. A box wholly inside some set feeds its children as covered
/// representatives; a wholly clean box is dropped; mixed boxes descend, with
/// padded center tests at the resolution level so that no box meeting a set
/// resolves to unflagged.
#[allow(clippy::too_many_arguments)]
fn sift(
    support: &mut dyn BallTree,
    history: &mut StrategyHistory,
    params: &StrategyParams,
    specs: &[DangerousSetSpec],
    path: &mut Vec<usize>,
    bn: &Ball,
    lcov: usize,
    lres: usize,
    reps: &mut Vec<(Vec<usize>, Vec<BigRational>)>,
) -> Result<()> {
    let level = path.len();
    if level < lcov {
        let rho = tree_radius(support, level + 1);
        let kids = support.children_centers(path)?;
        for (ci, c) in kids.into_iter().enumerate() {
            if bn.disjoint_from_ball(&Ball::new(c, rho.clone())?) {
                continue;
            }
            path.push(ci);
            sift(support, history, params, specs, path, bn, lcov, lres, reps)?;
            path.pop();
        }
        return Ok(());
    }

    let ball = support.ball_at(path)?;
    if level == lres {
        let danger = specs
            .iter()
            .map(|sp| history.flagged(path, &ball.center, &ball.radius, sp, params))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .any(|v| v);
        if danger {
            reps.push((path.clone(), ball.center));
        }
        return Ok(());
    }

    let mut any_mixed = false;
    for sp in specs {
        match history.classify_at(support, path, sp, params)? {
            BoxClass::Dangerous => {
                // The whole box is dangerous; its children's balls cover its
                // support slice at radii small enough for the net below.
                let rho = tree_radius(support, level + 1);
                let kids = support.children_centers(path)?;
                for (ci, c) in kids.into_iter().enumerate() {
                    if bn.disjoint_from_ball(&Ball::new(c.clone(), rho.clone())?) {
                        continue;
                    }
                    let mut np = path.clone();
                    np.push(ci);
                    reps.push((np, c));
                }
                return Ok(());
            }
            BoxClass::Mixed => any_mixed = true,
            BoxClass::Clean => {}
        }
    }
    if !any_mixed {
        return Ok(());
    }
    let kids = support.children_centers(path)?;
    let rho = tree_radius(support, level + 1);
    for (ci, c) in kids.into_iter().enumerate() {
        if bn.disjoint_from_ball(&Ball::new(c, rho.clone())?) {
            continue;
        }
        path.push(ci);
        sift(support, history, params, specs, path, bn, lcov, lres, reps)?;
        path.pop();
    }
    Ok(())
}

/// Alice's covering move for round `n` on ball `bn`: realizes the newly
/// dangerous sets on the support, removes everything already dangerous for
/// an earlier round, and covers the rest by balls of the scheduled family
/// radius. Exceeding a family budget is surfaced as an error, never clipped.
///
/// `horizon` caps the family indices at those that can still activate in a
/// game of that length; `grid_cap` bounds the per-family box enumeration,
/// switching oversized families to honest coarse sampling.
#[allow(clippy::too_many_arguments)]
pub fn alice_move(
    n: usize,
    bn: &Ball,
    history: &mut StrategyHistory,
    support: &mut dyn BallTree,
    params: &StrategyParams,
    horizon: usize,
    grid_cap: usize,
) -> Result<AliceMoveOutcome> {
    let branching = support.branching();
    if grid_cap < branching {
        return Err(Error::Validation(
            "grid cap must allow at least one level of descent".into(),
        ));
    }
    if *support.beta() > rat(1, 3) {
        return Err(Error::Validation(
            "support tree ratio must be at most 1/3 for covered representatives".into(),
        ));
    }
    let m_step = tree_step(support.beta(), &params.beta)?;
    let bn_path = locate_node(support, bn)?;

    // Index bookkeeping, asserted on every move.
    let base_level = bn_path.len().checked_sub(m_step * n).ok_or_else(|| {
        Error::Validation(format!(
            "round {} ball sits only {} tree levels deep, too shallow for the schedule",
            n,
            bn_path.len()
        ))
    })?;
    let expect = rat_pow(&params.beta, n as i64) * tree_radius(support, base_level);
    if bn.radius != expect {
        return Err(Error::Validation(format!(
            "round {} ball radius {} breaks the schedule (expected {})",
            n,
            rat_to_string(&bn.radius),
            rat_to_string(&expect)
        )));
    }

    // Pre-classify the whole round ball against earlier completely covered
    // sets: wholly clean sets drop out of dedup for the round; a wholly
    // dangerous one blankets the round (everything new is old), leaving
    // every family empty. Sets with only sampled realizations absorb
    // nothing: their points must be covered afresh.
    let hist_len = history.specs.len();
    let mut active: Vec<usize> = Vec::new();
    let mut blanket = false;
    for idx in (0..hist_len).rev() {
        if !history.complete[idx] {
            continue;
        }
        let spec = history.specs[idx].clone();
        match history.classify_at(support, &bn_path, &spec, params)? {
            BoxClass::Clean => {}
            BoxClass::Dangerous => {
                blanket = true;
                break;
            }
            BoxClass::Mixed => active.push(idx),
        }
    }

    let max_i = if horizon > n { horizon - 1 - n } else { 0 };
    let mut families: Vec<Vec<Ball>> = Vec::new();
    let mut echoes: Vec<FamilyEcho> = Vec::new();
    let mut new_specs: Vec<DangerousSetSpec> = Vec::new();
    let mut new_complete: Vec<bool> = Vec::new();

    for i in 0..=max_i {
        let specs: Vec<DangerousSetSpec> = if n == 0 {
            first_round_pairs(i, params.s)
                .into_iter()
                .map(|(np, ell)| {
                    Ok(DangerousSetSpec {
                        k: np as i64 + 1 + params.s * ell,
                        ell,
                        n: 0,
                        eps: params.epsilon_for(ell),
                    })
                })
                .collect::<Result<_>>()?
        } else {
            match later_round_pair(n, i, params.s) {
                Some(ell) => vec![dangerous_spec(n, ell, params)?],
                None => Vec::new(),
            }
        };
        if !specs.is_empty() && n >= 1 {
            // Redundant with the constructors above; keeps the invariant
            // visible where the move is assembled.
            let ell = specs[0].ell;
            assert!(i as i64 == (params.s - 1) * ell && params.s * ell <= n as i64);
        }
        if specs.is_empty() {
            families.push(Vec::new());
            echoes.push(FamilyEcho {
                i,
                mode: "empty".into(),
                specs,
                raw_reps: 0,
                removed_by_dedup: 0,
                cover_size: 0,
            });
            continue;
        }
        new_specs.extend(specs.iter().cloned());
        if blanket {
            // The round ball sits inside an earlier completely covered set,
            // so these sets are recorded but nothing realizes them here;
            // they must not absorb later representatives themselves.
            new_complete.extend(std::iter::repeat(false).take(specs.len()));
            families.push(Vec::new());
            echoes.push(FamilyEcho {
                i,
                mode: "blanket".into(),
                specs,
                raw_reps: 0,
                removed_by_dedup: 0,
                cover_size: 0,
            });
            continue;
        }

        let out = realize_reps(
            support, history, params, &specs, &bn_path, bn, m_step, i, grid_cap,
        )?;
        new_complete.extend(std::iter::repeat(out.full).take(specs.len()));
        let raw = out.reps.len();
        let mut kept: Vec<Vec<BigRational>> = Vec::with_capacity(raw);
        for (path, center) in out.reps {
            if !history.covered_by_any(&active, support, m_step, &path, params)? {
                kept.push(center);
            }
        }
        let removed = raw - kept.len();

        let radius = params.family_radius(n, i);
        let r = radius / rat_i(3);
        let cover = efficient_cover(&kept, &r)?;

        let budget = params.budget(i);
        let p = params.precision;
        let cap = budget.mul(&Real::one().add(&comparison_slack(p)));
        if cover.len() > 1 && Real::from_i64(cover.len() as i64, p) > cap {
            return Err(Error::BudgetExceeded {
                n: n + 1,
                i,
                count: cover.len(),
                budget: budget.to_dec_string(),
            });
        }

        echoes.push(FamilyEcho {
            i,
            mode: out.mode,
            specs,
            raw_reps: raw,
            removed_by_dedup: removed,
            cover_size: cover.len(),
        });
        families.push(cover);
    }

    debug_assert_eq!(new_specs.len(), new_complete.len());
    history.specs.extend(new_specs);
    history.complete.extend(new_complete);
    let audit = audit_legality(&families, n, params);
    Ok(AliceMoveOutcome {
        families,
        echoes,
        audit,
    })
}

/// Engine adapter: plays [`alice_move`] each round and accumulates the
/// audit trail and the instantiated specs.
pub struct BadwAlice<'a> {
    params: &'a StrategyParams,
    support: &'a mut dyn BallTree,
    horizon: usize,
    grid_cap: usize,
    pub history: StrategyHistory,
    pub audits: Vec<LegalityReport>,
    pub echoes: Vec<Vec<FamilyEcho>>,
}

impl<'a> BadwAlice<'a> {
    pub fn new(
        params: &'a StrategyParams,
        support: &'a mut dyn BallTree,
        horizon: usize,
        grid_cap: usize,
    ) -> BadwAlice<'a> {
        BadwAlice {
            params,
            support,
            horizon,
            grid_cap,
            history: StrategyHistory::new(),
            audits: Vec::new(),
            echoes: Vec::new(),
        }
    }
}

impl AliceStrategy for BadwAlice<'_> {
    fn pick(&mut self, n: usize, current: &Ball, _t: &GameTranscript) -> Result<AliceMove> {
        let out = alice_move(
            n,
            current,
            &mut self.history,
            self.support,
            self.params,
            self.horizon,
            self.grid_cap,
        )?;
        self.audits.push(out.audit);
        self.echoes.push(out.echoes);
        Ok(AliceMove::BallFamilies(out.families))
    }
}

// ---------------------------------------------------------------------------
// Empirical covering-inequality checks
// ---------------------------------------------------------------------------

/// Index tuple of one covering-inequality instance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KeyLemmaQuintuple {
    pub h: i64,
    pub k: i64,
    pub ell: i64,
    pub m: i64,
    pub n: i64,
}

/// One verified precondition at the reference point.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssumptionCheck {
    pub name: String,
    pub systole: String,
    pub threshold: String,
    pub pass: bool,
}

/// Measured outcome of one covering-inequality instance.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KeyLemmaReport {
    pub quintuple: KeyLemmaQuintuple,
    pub tau: String,
    pub route: String,
    pub assumptions: Vec<AssumptionCheck>,
    pub applicable: bool,
    pub eps: String,
    pub eps_prime: String,
    pub r: String,
    pub sample_points: usize,
    pub dangerous_points: usize,
    pub mu_bn: String,
    pub mu_a: String,
    pub mu_nbhd: String,
    pub bound_a: String,
    pub bound_nbhd: String,
    pub result1_pass: bool,
    pub result2_pass: bool,
}

/// Measures one covering-inequality instance on a materialized tree
/// measure: realizes the dangerous set on leaf centers inside `bn`,
/// compares its mass and the mass of its `r`-neighborhood against
/// `C' * eps^gamma * mu(bn)` and `C' * eps'^gamma * mu(bn)`.
///
/// Preconditions are verified at the reference point `x_tilde` and reported;
/// an unmet assumption marks the report inapplicable instead of failing.
/// The low-round unconditional route (`n = 0` and `k*w_1 >= (1+w_1)*ell`)
/// skips them.
#[allow(clippy::too_many_arguments)]
pub fn verify_keylemma_empirical(
    q: KeyLemmaQuintuple,
    x_tilde: &[BigRational],
    bn: &Ball,
    mu: &TreeMeasure,
    eps: &Real,
    r: &BigRational,
    params: &StrategyParams,
) -> Result<KeyLemmaReport> {
    let p = params.precision;
    if q.h < 0 || q.k < 0 || q.ell < 0 || q.m < 0 || q.n < 0 {
        return Err(Error::Validation(
            "quintuple components must be nonnegative".into(),
        ));
    }
    if !eps.is_positive() {
        return Err(Error::Validation("threshold must be positive".into()));
    }
    let w = params.w.entries();
    let one = BigRational::one();
    let w1 = &w[0];
    let wd = &w[params.d - 1];

    // tau = min(k - ell - m - n - h/(1+w1), h*wd/(1+w1)), exact.
    let tau_a = rat_i(q.k - q.ell - q.m - q.n) - rat_i(q.h) / (&one + w1);
    let tau_b = rat_i(q.h) * wd / (&one + w1);
    let tau = tau_a.min(tau_b);
    if tau.is_negative() {
        return Err(Error::Validation(format!(
            "quintuple has negative expansion margin tau = {}",
            rat_to_string(&tau)
        )));
    }

    let max_r = rat_pow(&params.beta, q.n) * &params.r0;
    if !(r.is_positive() && *r <= max_r) {
        return Err(Error::Validation(format!(
            "neighborhood radius {} must lie in (0, beta^n * r0 = {}]",
            rat_to_string(r),
            rat_to_string(&max_r)
        )));
    }

    let unconditional = q.n == 0 && rat_i(q.k) * w1 >= (&one + w1) * rat_i(q.ell);
    let mut assumptions = Vec::new();
    let mut applicable = true;
    let route = if unconditional {
        "unconditional".to_string()
    } else {
        // First: d_(ell+m) a_k u_xt stays above sqrt(d+1) * beta^(m/(d+1)) / r0.
        let th1 = Real::from_i64((params.d + 1) as i64, p)
            .sqrt()
            .mul(&params.beta_pow(&BigRational::new(
                BigInt::from(q.m),
                BigInt::from(params.d + 1),
            )))
            .div(&Real::from_rational(&params.r0, p));
        let sys1 = reference_systole(x_tilde, q.ell + q.m, q.k, params)?;
        let pass1 = sys1 >= th1;
        assumptions.push(AssumptionCheck {
            name: "reference orbit height at the deepened contraction".into(),
            systole: sys1.to_dec_string(),
            threshold: th1.to_dec_string(),
            pass: pass1,
        });
        // Second: d_ell a_(k-h) u_xt stays above sqrt(2) * d * beta^(tau/d).
        let th2 = Real::from_i64(2, p)
            .sqrt()
            .mul(&Real::from_i64(params.d as i64, p))
            .mul(&params.beta_pow(&(&tau / rat_i(params.d as i64))));
        let sys2 = reference_systole(x_tilde, q.ell, q.k - q.h, params)?;
        let pass2 = sys2 >= th2;
        assumptions.push(AssumptionCheck {
            name: "reference orbit height at the rewound expansion".into(),
            systole: sys2.to_dec_string(),
            threshold: th2.to_dec_string(),
            pass: pass2,
        });
        applicable = pass1 && pass2;
        "assumed".to_string()
    };

    // Realize the dangerous set on leaf centers inside bn.
    let spec = DangerousSetSpec {
        k: q.k,
        ell: q.ell,
        n: q.n as usize,
        eps: eps.clone(),
    };
    let mut cache = SystoleCache::new();
    let mut dangerous: Vec<Vec<BigRational>> = Vec::new();
    let mut sample_points = 0usize;
    for leaf in mu.leaf_centers() {
        if !bn.contains_point(&leaf) {
            continue;
        }
        sample_points += 1;
        if is_dangerous(&leaf, &spec, params, &mut cache)? {
            dangerous.push(leaf);
        }
    }
    let leaf_mass = mu.node_mass(mu.depth());
    let mu_a = &leaf_mass * rat_i(dangerous.len() as i64);
    let mu_bn = mu.mass_of_ball(bn)?;
    let mu_nbhd = if dangerous.is_empty() {
        BigRational::zero()
    } else {
        mu.mass_of_point_set_nbhd(&dangerous, r)?
    };

    let eps_prime = Real::one()
        .add(&params.lipschitz(q.k, q.ell).mul(&Real::from_rational(r, p)))
        .mul(eps);
    let mu_bn_real = Real::from_rational(&mu_bn, p);
    let bound_a = params
        .cprime_cfg
        .mul(&eps.pow(&params.gamma_cfg))
        .mul(&mu_bn_real);
    let bound_nbhd = params
        .cprime_cfg
        .mul(&eps_prime.pow(&params.gamma_cfg))
        .mul(&mu_bn_real);
    let slack = Real::one().add(&comparison_slack(p));
    let result1_pass = Real::from_rational(&mu_a, p) <= bound_a.mul(&slack);
    let result2_pass = Real::from_rational(&mu_nbhd, p) <= bound_nbhd.mul(&slack);

    Ok(KeyLemmaReport {
        quintuple: q,
        tau: rat_to_string(&tau),
        route,
        assumptions,
        applicable,
        eps: eps.to_dec_string(),
        eps_prime: eps_prime.to_dec_string(),
        r: rat_to_string(r),
        sample_points,
        dangerous_points: dangerous.len(),
        mu_bn: rat_to_string(&mu_bn),
        mu_a: rat_to_string(&mu_a),
        mu_nbhd: rat_to_string(&mu_nbhd),
        bound_a: bound_a.to_dec_string(),
        bound_nbhd: bound_nbhd.to_dec_string(),
        result1_pass,
        result2_pass,
    })
}

fn reference_systole(
    x: &[BigRational],
    ell: i64,
    k: i64,
    params: &StrategyParams,
) -> Result<Real> {
    let dl = make_d_base_b(ell, &params.b, &params.w, params.t, params.d)?;
    let ak = make_a(k, &params.b, &params.w)?;
    let lat = Lattice::from_structured(&dl.compose(&ak)?, x, params.precision)?;
    let mut cache = SystoleCache::new();
    Ok(lat.shortest_vector_cached(&mut cache)?.norm)
}

/// One measured point of a threshold sweep.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPoint {
    pub eps: String,
    pub mu_a: String,
    pub dangerous_points: usize,
}

/// Threshold sweep with an empirical decay exponent: fits the log-log slope
/// of mass against threshold, then re-checks both covering bounds at the
/// conservative exponent `min(fitted/2, 1/10)`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaSweepReport {
    pub k: i64,
    pub ell: i64,
    pub points: Vec<SweepPoint>,
    pub gamma_emp: Option<Real>,
    pub gamma_check: Option<Real>,
    pub all_result1: bool,
    pub all_result2: bool,
    pub reports: Vec<KeyLemmaReport>,
}

/// Runs [`verify_keylemma_empirical`] over a threshold list, fits the
/// empirical decay exponent on the positive-mass points, and re-evaluates
/// both bounds at `gamma = min(fitted/2, 1/10)` using the measured masses.
#[allow(clippy::too_many_arguments)]
pub fn keylemma_sweep(
    q: KeyLemmaQuintuple,
    x_tilde: &[BigRational],
    bn: &Ball,
    mu: &TreeMeasure,
    eps_list: &[Real],
    r: &BigRational,
    params: &StrategyParams,
) -> Result<GammaSweepReport> {
    if eps_list.is_empty() {
        return Err(Error::Validation("threshold sweep needs thresholds".into()));
    }
    let p = params.precision;
    let mut reports = Vec::with_capacity(eps_list.len());
    let mut points = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        let rep = verify_keylemma_empirical(q, x_tilde, bn, mu, eps, r, params)?;
        points.push(SweepPoint {
            eps: rep.eps.clone(),
            mu_a: rep.mu_a.clone(),
            dangerous_points: rep.dangerous_points,
        });
        reports.push(rep);
    }

    // Least-squares slope of ln(mass) against ln(eps), positive masses only.
    let mut xs: Vec<Real> = Vec::new();
    let mut ys: Vec<Real> = Vec::new();
    for (eps, rep) in eps_list.iter().zip(&reports) {
        if rep.dangerous_points > 0 {
            xs.push(eps.ln());
            let mass = crate::rational::parse_rational(&rep.mu_a)?;
            ys.push(Real::from_rational(&mass, p).ln());
        }
    }
    let gamma_emp = if xs.len() >= 2 {
        let nn = Real::from_i64(xs.len() as i64, p);
        let mean = |v: &[Real]| {
            v.iter()
                .fold(Real::zero(), |a, b| a.add(b))
                .div(&nn)
                .with_precision(p)
        };
        let mx = mean(&xs);
        let my = mean(&ys);
        let mut num = Real::zero();
        let mut den = Real::zero();
        for (x, y) in xs.iter().zip(&ys) {
            let dx = x.sub(&mx);
            num = num.add(&dx.mul(&y.sub(&my)));
            den = den.add(&dx.mul(&dx));
        }
        if den.is_positive() {
            Some(num.div(&den))
        } else {
            None
        }
    } else {
        None
    };

    let gamma_check = gamma_emp
        .as_ref()
        .map(|g| g.div(&Real::from_i64(2, p)).min_of(&Real::from_f64(0.1, p)));
    let (mut all_result1, mut all_result2) = (true, true);
    if let Some(gc) = &gamma_check {
        let slack = Real::one().add(&comparison_slack(p));
        for rep in &reports {
            let mu_bn = Real::from_rational(&crate::rational::parse_rational(&rep.mu_bn)?, p);
            let mu_a = Real::from_rational(&crate::rational::parse_rational(&rep.mu_a)?, p);
            let mu_nb = Real::from_rational(&crate::rational::parse_rational(&rep.mu_nbhd)?, p);
            let eps = Real::parse_dec(&rep.eps, p)
                .ok_or_else(|| Error::Validation("unreadable threshold echo".into()))?;
            let epsp = Real::parse_dec(&rep.eps_prime, p)
                .ok_or_else(|| Error::Validation("unreadable inflated threshold echo".into()))?;
            let b1 = params.cprime_cfg.mul(&eps.pow(gc)).mul(&mu_bn).mul(&slack);
            let b2 = params.cprime_cfg.mul(&epsp.pow(gc)).mul(&mu_bn).mul(&slack);
            all_result1 &= mu_a <= b1;
            all_result2 &= mu_nb <= b2;
        }
    } else {
        all_result1 = false;
        all_result2 = false;
    }

    Ok(GammaSweepReport {
        k: q.k,
        ell: q.ell,
        points,
        gamma_emp,
        gamma_check,
        all_result1,
        all_result2,
        reports,
    })
}

// ---------------------------------------------------------------------------
// Outcome certificate
// ---------------------------------------------------------------------------

/// One re-checked dangerous-set condition at the outcome point.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VisitedCheck {
    pub n: usize,
    pub ell: i64,
    pub k: i64,
    pub systole: String,
    pub threshold: String,
    pub pass: bool,
}

/// Stability of the orbit floor under doubling the horizon.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StabilityReport {
    pub horizon: u64,
    pub floor: String,
    pub horizon2: u64,
    pub floor2: String,
    pub drift: String,
    pub pass: bool,
}

/// Numerically certified record that the outcome point survived every
/// instantiated dangerous set and keeps its flow orbit above the uniform
/// threshold.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeCertificate {
    pub xhat: Vec<String>,
    pub xhat_exact: Vec<String>,
    pub params: ParamsEcho,
    pub visited_checks: Vec<VisitedCheck>,
    pub epsilon_star: String,
    pub orbit: OrbitReport,
    pub orbit_floor_ok: bool,
    pub badness: BadnessReport,
    pub stability: Option<StabilityReport>,
    pub pass: bool,
    pub violations: Vec<String>,
}

impl OutcomeCertificate {
    /// Turns a failing certificate into an error listing every violation.
    pub fn require(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::CertificateFailure(self.violations.join("; ")))
        }
    }
}

/// Re-checks the outcome point against every visited dangerous set, the
/// uniform orbit threshold out to `horizon + n_extra` flow steps, and
/// optionally the floor stability under a doubled horizon; approximation
/// quality reports are attached, not gated on.
pub fn outcome_certificate(
    xhat: &[BigRational],
    visited: &[DangerousSetSpec],
    params: &StrategyParams,
    horizon: u64,
    n_extra: u64,
    badness_q_max: u64,
    stability: bool,
) -> Result<OutcomeCertificate> {
    let p = params.precision;
    if xhat.len() != params.d {
        return Err(Error::DimensionMismatch(
            "outcome point dimension differs from the weight count".into(),
        ));
    }
    let mut violations = Vec::new();

    // Deduplicate identical conditions; re-check each exactly once.
    let mut seen = BTreeSet::new();
    let mut checks = Vec::new();
    let mut cache = SystoleCache::new();
    for spec in visited {
        if !seen.insert((spec.k, spec.ell)) {
            continue;
        }
        let lat = spec_lattice(xhat, spec, params)?;
        let systole = lat.shortest_vector_cached(&mut cache)?.norm;
        let pass = systole >= spec.eps;
        if !pass {
            violations.push(format!(
                "visited set (n={}, ell={}): systole {} below threshold {}",
                spec.n,
                spec.ell,
                systole.to_dec_string(),
                spec.eps.to_dec_string()
            ));
        }
        checks.push(VisitedCheck {
            n: spec.n,
            ell: spec.ell,
            k: spec.k,
            systole: systole.to_dec_string(),
            threshold: spec.eps.to_dec_string(),
            pass,
        });
    }

    let eps_star = params.epsilon_star();
    let coords: Vec<Coord> = xhat.iter().map(|q| Coord::rational(q.clone())).collect();
    let orbit = dani_orbit_min(&coords, &params.w, &params.b, horizon + n_extra, p)?;
    let orbit_floor_ok = orbit.min_systole >= eps_star;
    if !orbit_floor_ok {
        violations.push(format!(
            "flow orbit dipped to {} at step {}, below the uniform threshold {}",
            orbit.min_systole.to_dec_string(),
            orbit.argmin_n,
            eps_star.to_dec_string()
        ));
    }

    let badness = badness_constant(&coords, &params.w, badness_q_max, p)?;

    let stability = if stability {
        let h2 = 2 * (horizon + n_extra);
        let orbit2 = dani_orbit_min(&coords, &params.w, &params.b, h2, p)?;
        let drift = orbit
            .min_systole
            .sub(&orbit2.min_systole)
            .abs()
            .div(&orbit.min_systole);
        let pass = drift < Real::from_f64(0.1, p);
        if !pass {
            violations.push(format!(
                "orbit floor drifted by {} when the horizon doubled",
                drift.to_dec_string()
            ));
        }
        Some(StabilityReport {
            horizon: horizon + n_extra,
            floor: orbit.min_systole.to_dec_string(),
            horizon2: h2,
            floor2: orbit2.min_systole.to_dec_string(),
            drift: drift.to_dec_string(),
            pass,
        })
    } else {
        None
    };

    let pass = violations.is_empty();
    Ok(OutcomeCertificate {
        xhat: xhat
            .iter()
            .map(|q| Real::from_rational(q, p).to_dec_string())
            .collect(),
        xhat_exact: xhat.iter().map(rat_to_string).collect(),
        params: params.echo(),
        visited_checks: checks,
        epsilon_star: eps_star.to_dec_string(),
        orbit,
        orbit_floor_ok,
        badness,
        stability,
        pass,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Full orchestrated run
// ---------------------------------------------------------------------------

/// One verified setup precondition.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SetupCheck {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// Start-ball preconditions plus the compliance banner.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SetupReport {
    pub checks: Vec<SetupCheck>,
    pub all_pass: bool,
    pub banner: Option<String>,
}

/// Configuration of a full strategy run.
#[derive(Clone, Debug)]
pub struct BadwRunConfig {
    /// Number of rounds to play; also the family-index horizon.
    pub rounds: usize,
    /// Per-family box enumeration cap; larger families switch to sampling.
    pub grid_cap: usize,
    /// Extra flow steps checked beyond the run length in the certificate.
    pub n_extra: u64,
    /// Denominator range of the attached approximation-quality report.
    pub badness_q_max: u64,
    /// Whether the certificate doubles the horizon and checks floor drift.
    pub stability: bool,
    /// Ball on which the measure data is trusted; when given, the start
    /// ball inflated five-fold must fit inside it.
    pub validity_ball: Option<Ball>,
    /// Upper scale of the regularity window; when given, the start radius
    /// must be at most a third of it.
    pub rho0: Option<BigRational>,
    /// Exact mass of the start ball when known; replaces the closed-form
    /// `A * r0^alpha <= 1` normalization check by the bound it implies.
    pub exact_start_mass: Option<BigRational>,
}

impl BadwRunConfig {
    pub fn new(rounds: usize) -> BadwRunConfig {
        BadwRunConfig {
            rounds,
            grid_cap: 4096,
            n_extra: 5,
            badness_q_max: 2000,
            stability: true,
            validity_ball: None,
            rho0: None,
            exact_start_mass: None,
        }
    }
}

/// Full report of an orchestrated run.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BadwRunReport {
    pub params: ParamsEcho,
    pub setup: SetupReport,
    pub status: String,
    pub audits: Vec<LegalityReport>,
    pub legality_all_pass: bool,
    pub family_echoes: Vec<Vec<FamilyEcho>>,
    pub outcome: Option<Vec<String>>,
    pub certificate: Option<OutcomeCertificate>,
}

/// Report plus the raw transcript for serialization and replay.
pub struct BadwRunResult {
    pub report: BadwRunReport,
    pub transcript: GameTranscript,
}

/// Verifies the start-ball preconditions against the measure data.
pub fn validate_setup(
    params: &StrategyParams,
    b0: &Ball,
    cfg: &BadwRunConfig,
) -> Result<SetupReport> {
    let p = params.precision;
    let r0 = &params.r0;
    let mut checks = Vec::new();

    let lhs = r0 * r0 * rat_i(params.d as i64);
    checks.push(SetupCheck {
        name: "start radius at most 1/sqrt(d)".into(),
        detail: format!("d * r0^2 = {}", rat_to_string(&lhs)),
        pass: lhs <= BigRational::one(),
    });

    if let Some(rho0) = &cfg.rho0 {
        checks.push(SetupCheck {
            name: "start radius at most a third of the regularity scale".into(),
            detail: format!("3 r0 = {}, rho0 = {}", rat_to_string(&(rat_i(3) * r0)), rat_to_string(rho0)),
            pass: rat_i(3) * r0 <= *rho0,
        });
    }

    match &cfg.exact_start_mass {
        Some(mass) => {
            checks.push(SetupCheck {
                name: "start ball carries mass at most one".into(),
                detail: format!("mu(B0) = {}", rat_to_string(mass)),
                pass: *mass <= BigRational::one(),
            });
        }
        None => {
            let bound = params
                .a_const
                .mul(&Real::from_rational(r0, p).pow(&params.alpha));
            checks.push(SetupCheck {
                name: "closed-form start mass normalization".into(),
                detail: format!("A * r0^alpha = {}", bound.to_dec_string()),
                pass: bound <= Real::one().add(&comparison_slack(p)),
            });
        }
    }

    if let Some(validity) = &cfg.validity_ball {
        let inflated = Ball::new(b0.center.clone(), rat_i(5) * r0)?;
        checks.push(SetupCheck {
            name: "five-fold start ball inside the trusted region".into(),
            detail: format!(
                "5 r0 = {} around the start center",
                rat_to_string(&inflated.radius)
            ),
            pass: validity.contains_ball(&inflated),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let banner = (!params.compliant()).then(|| {
        format!(
            "parameters are not inequality-compliant: no seed power up to {} satisfied \
             the size checks; running with exponent {}",
            MAX_M_EXPONENT,
            params.m_applied()
        )
    });
    Ok(SetupReport {
        checks,
        all_pass,
        banner,
    })
}

/// Plays the covering strategy against the support-tree player for
/// `cfg.rounds` rounds and certifies the outcome. `alice_support` and
/// `bob_support` must present the same tree; two instances keep their walk
/// caches independent. `start` is the node whose ball becomes the initial
/// ball; its radius must equal the derived `r0`.
pub fn run_badw(
    params: &StrategyParams,
    alice_support: &mut dyn BallTree,
    bob_support: &mut dyn BallTree,
    start: Vec<usize>,
    cfg: &BadwRunConfig,
) -> Result<BadwRunResult> {
    if alice_support.beta() != bob_support.beta()
        || alice_support.root_radius() != bob_support.root_radius()
        || alice_support.root_center() != bob_support.root_center()
        || alice_support.branching() != bob_support.branching()
    {
        return Err(Error::Validation(
            "the two support views must present the same tree".into(),
        ));
    }
    let mut bob = TreeBob::new(bob_support, start, &params.beta)?;
    let b0 = bob.start_ball()?;
    if b0.radius != params.r0 {
        return Err(Error::Validation(format!(
            "start ball radius {} differs from the derived r0 = {}",
            rat_to_string(&b0.radius),
            rat_to_string(&params.r0)
        )));
    }
    let setup = validate_setup(params, &b0, cfg)?;
    if !setup.all_pass {
        let failing: Vec<&str> = setup
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        return Err(Error::Validation(format!(
            "setup preconditions failed: {}",
            failing.join(", ")
        )));
    }

    let mut alice = BadwAlice::new(params, alice_support, cfg.rounds, cfg.grid_cap);
    let transcript = crate::games::play(
        GameVariant::cantor(params.alpha_prime.clone()),
        params.beta.clone(),
        b0,
        &mut alice,
        &mut bob,
        cfg.rounds,
    )?;

    let legality_all_pass = alice.audits.iter().all(|a| a.all_pass);
    let (status, outcome, certificate) = match &transcript.status {
        crate::games::GameStatus::Outcome(ball) => {
            let cert = outcome_certificate(
                &ball.center,
                alice.history.specs(),
                params,
                cfg.rounds as u64,
                cfg.n_extra,
                cfg.badness_q_max,
                cfg.stability,
            )?;
            (
                "outcome".to_string(),
                Some(ball.center.iter().map(rat_to_string).collect()),
                Some(cert),
            )
        }
        crate::games::GameStatus::AliceWinsByDefault => {
            ("default win".to_string(), None, None)
        }
        other => (format!("{:?}", other), None, None),
    };

    Ok(BadwRunResult {
        report: BadwRunReport {
            params: params.echo(),
            setup,
            status,
            audits: alice.audits,
            legality_all_pass,
            family_echoes: alice.echoes,
            outcome,
            certificate,
        },
        transcript,
    })
}

// ---------------------------------------------------------------------------
// Diagonal-flow coordinate export
// ---------------------------------------------------------------------------

/// Log-coordinates (in units of `ln b`) of one scheduled flow element.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagLogRow {
    pub n: i64,
    pub ell: i64,
    pub k: i64,
    pub exponents: Vec<String>,
}

/// Exact log-coordinates of the scheduled elements `d_ell a_(n+1+s*ell)`
/// for the given `(n, ell)` pairs, for plotting the flow geometry.
pub fn diag_log_rows(params: &StrategyParams, pairs: &[(i64, i64)]) -> Result<Vec<DiagLogRow>> {
    let mut out = Vec::with_capacity(pairs.len());
    for &(n, ell) in pairs {
        if n < 0 || ell < 0 {
            return Err(Error::Validation("pair indices must be nonnegative".into()));
        }
        let k = n + 1 + params.s * ell;
        let dl = make_d_base_b(ell, &params.b, &params.w, params.t, params.d)?;
        let ak = make_a(k, &params.b, &params.w)?;
        let g = dl.compose(&ak)?;
        out.push(DiagLogRow {
            n,
            ell,
            k,
            exponents: g.exponents().iter().map(rat_to_string).collect(),
        });
    }
    Ok(out)
}


#[cfg(test)]
mod debug_tests {
    use super::*;
    use crate::fractal::{CantorDiffuseOracle, LazyDiffuseTree};
    use crate::precision::DEFAULT_PRECISION;
    use crate::rational::{rat, rat_i, rat_pow};

    #[test]
    fn debug_line_run_trace() {
        let p = DEFAULT_PRECISION;
        let w = WeightVector::new(vec![BigRational::one()]).unwrap();
        let beta = rat_pow(&rat(1, 3), 8);
        let alpha = Real::from_i64(2, p)
            .ln()
            .div(&Real::from_i64(3, p).ln().mul(&Real::from_i64(4, p)));
        let params = derive_params_with_policy(
            &w,
            &alpha,
            &Real::from_i64(3, p),
            &Real::from_f64(0.1, p),
            &Real::from_i64(10, p),
            &rat_i(1),
            &beta,
            p,
            MPolicy::CapWithFallback(1),
        )
        .unwrap();
        let mut cfg = BadwRunConfig::new(10);
        cfg.exact_start_mass = Some(BigRational::one());
        cfg.n_extra = 3;
        let bp = rat_i(2) * rat_pow(&rat(1, 3), 4);
        let oracle = CantorDiffuseOracle::new();
        let mut alice_tree =
            LazyDiffuseTree::new(&oracle, CantorDiffuseOracle::standard_root(), Some(&bp)).unwrap();
        let mut bob_tree =
            LazyDiffuseTree::new(&oracle, CantorDiffuseOracle::standard_root(), Some(&bp)).unwrap();
        let result = run_badw(&params, &mut alice_tree, &mut bob_tree, vec![], &cfg).unwrap();
        eprintln!("status: {}", result.report.status);
        eprintln!("rounds played: {}", result.transcript.rounds.len());
        for (n, echoes) in result.report.family_echoes.iter().enumerate() {
            for e in echoes {
                if e.cover_size > 0 || e.raw_reps > 0 {
                    eprintln!(
                        "round {} fam {}: mode={} raw={} dedup={} cover={}",
                        n, e.i, e.mode, e.raw_reps, e.removed_by_dedup, e.cover_size
                    );
                }
            }
        }
        for (j, round) in result.transcript.rounds.iter().enumerate() {
            match &round.bob {
                Some(b) => {
                    let c = &b.center[0];
                    let f = c.numer().to_string().parse::<f64>().unwrap_or(f64::NAN)
                        / c.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
                    eprintln!("round {j}: bob center ~ {f:.12}");
                }
                None => eprintln!("round {j}: bob cornered"),
            }
        }
        if let Some(cert) = &result.report.certificate {
            eprintln!("cert pass: {} violations: {:?}", cert.pass, cert.violations);
            if let Some(st) = &cert.stability {
                eprintln!("stability pass: {}", st.pass);
            }
        }
    }
}
