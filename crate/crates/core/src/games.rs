//! Engines for three ball-nesting games between a blocking player (Alice)
//! and a shrinking player (Bob), played on closed balls in R^d with exact
//! rational data.
//!
//! In the hyperplane game Alice blocks a hyperplane neighborhood of width up
//! to `beta` times Bob's current radius and Bob re-balls inside the
//! complement at any radius at least `beta` times his current one. The
//! width-locked variant forces both widths and radii to follow the geometric
//! schedule `beta^(n+1) * r0` exactly; when no legal ball remains Alice wins
//! by default. The potential game replaces the single neighborhood by
//! per-scale finite ball families under a cardinality budget, and Bob's ball
//! must stay disjoint from every family whose balls have reached his current
//! scale.
//!
//! The module keeps engine and validator in lockstep: [`play`] checks each
//! move with the same per-move functions [`validate_transcript`] applies to a
//! finished record, and never repairs an illegal move. A positional
//! hyperplane-game strategy can be built from a width-locked one by the
//! scale transform [`PositionalTransform`], and
//! [`extract_restricted_subgame`] recovers the width-locked game embedded in
//! any hyperplane-game transcript that was played against such a strategy.
//! Transcripts serialize to JSON lines and replay bit-exactly.

use crate::error::{Error, Result};
use crate::fractal::{check_diffuse_point, BallTree, DiffuseOracle};
use crate::geom::{Ball, HyperplaneNbhd};
use crate::precision::{comparison_slack, Real, DEFAULT_PRECISION};
use crate::rational::{parse_rational, rat, rat_i, rat_pow, rat_to_string};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Which game is being played. The potential variant carries its budget
/// exponent `alpha >= 0`: at round n+1 a family at scale offset i may hold at
/// most `beta^(-alpha * (i+1))` balls.
#[derive(Clone, Debug, PartialEq)]
pub enum GameVariant {
    Haw,
    RestrictedHaw,
    CantorPotential { alpha: Real },
}

impl GameVariant {
    pub fn cantor(alpha: Real) -> GameVariant {
        GameVariant::CantorPotential { alpha }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GameVariant::Haw => "haw",
            GameVariant::RestrictedHaw => "restrictedHaw",
            GameVariant::CantorPotential { .. } => "cantorPotential",
        }
    }
}

/// One Alice move: a hyperplane neighborhood in the hyperplane games, or a
/// finite list of ball families indexed by scale offset i in the potential
/// game (families past the end of the list are empty).
#[derive(Clone, Debug, PartialEq)]
pub enum AliceMove {
    Neighborhood(HyperplaneNbhd),
    BallFamilies(Vec<Vec<Ball>>),
}

/// One full round: Alice's move and Bob's reply. `bob` is `None` only in a
/// terminal round where no legal ball remained.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRound {
    pub alice: AliceMove,
    pub bob: Option<Ball>,
}

/// Terminal state of a transcript. A finite horizon ends in `Outcome`: the
/// last ball's center is the numerical outcome and its radius bounds the
/// distance to the true limit point of any continuation.
#[derive(Clone, Debug, PartialEq)]
pub enum GameStatus {
    Running,
    AliceWinsByDefault,
    Outcome(Ball),
}

/// Complete record of a play: parameters, initial ball, rounds in order, and
/// terminal status. Validation recovers every legality check offline.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTranscript {
    pub variant: GameVariant,
    pub beta: BigRational,
    pub b0: Ball,
    pub rounds: Vec<GameRound>,
    pub status: GameStatus,
}

impl GameTranscript {
    pub fn dim(&self) -> usize {
        self.b0.dim()
    }

    /// The last ball on record (the initial ball before any round).
    pub fn current_ball(&self) -> &Ball {
        self.rounds
            .iter()
            .rev()
            .find_map(|r| r.bob.as_ref())
            .unwrap_or(&self.b0)
    }

    pub fn outcome_ball(&self) -> Option<&Ball> {
        match &self.status {
            GameStatus::Outcome(b) => Some(b),
            _ => None,
        }
    }
}

/// The forced ball radius (and blocking width) of round n+1 in the
/// width-locked and potential games: `beta^(n+1) * r0`, exact.
pub fn scheduled_radius(beta: &BigRational, r0: &BigRational, n: usize) -> BigRational {
    rat_pow(beta, (n + 1) as i64) * r0
}

/// Family cardinality budget `beta^(-alpha * (i+1))` in the potential game.
pub fn cantor_family_budget(beta: &BigRational, alpha: &Real, i: usize) -> Real {
    let p = DEFAULT_PRECISION.max(alpha.precision());
    let e = alpha.mul(&Real::from_i64(-((i + 1) as i64), p));
    Real::from_rational(beta, p).pow(&e)
}

pub fn validate_params(variant: &GameVariant, beta: &BigRational, b0: &Ball) -> Result<()> {
    if !beta.is_positive() {
        return Err(Error::Validation(format!(
            "ratio beta = {} must be positive",
            rat_to_string(beta)
        )));
    }
    match variant {
        GameVariant::Haw => {
            if *beta >= rat(1, 3) {
                return Err(Error::Validation(format!(
                    "hyperplane game needs beta < 1/3, got {}",
                    rat_to_string(beta)
                )));
            }
        }
        GameVariant::RestrictedHaw => {
            if *beta >= BigRational::one() {
                return Err(Error::Validation(format!(
                    "width-locked game needs beta < 1, got {}",
                    rat_to_string(beta)
                )));
            }
        }
        GameVariant::CantorPotential { alpha } => {
            if *beta >= BigRational::one() {
                return Err(Error::Validation(format!(
                    "potential game needs beta < 1, got {}",
                    rat_to_string(beta)
                )));
            }
            if alpha.is_negative() {
                return Err(Error::Validation(format!(
                    "budget exponent alpha = {} must be >= 0",
                    alpha.to_dec_string()
                )));
            }
        }
    }
    debug_assert!(b0.radius.is_positive());
    Ok(())
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn illegal(role: &'static str, j: usize, reason: String) -> Error {
    Error::IllegalMove {
        role,
        round: j + 1,
        reason,
    }
}

/// Legality of Alice's move for round index `j` (round number j+1) when
/// Bob's current ball is `current`. Exact; shared by engine and validator.
fn check_alice_move(
    variant: &GameVariant,
    beta: &BigRational,
    b0: &Ball,
    j: usize,
    current: &Ball,
    mv: &AliceMove,
) -> Result<()> {
    let d = b0.dim();
    match (variant, mv) {
        (GameVariant::Haw, AliceMove::Neighborhood(h)) => {
            if h.dim() != d {
                return Err(illegal("alice", j, "neighborhood dimension mismatch".into()));
            }
            if !h.width.is_positive() {
                return Err(illegal("alice", j, "blocking width must be positive".into()));
            }
            let cap = beta * &current.radius;
            if h.width > cap {
                return Err(illegal(
                    "alice",
                    j,
                    format!(
                        "blocking width {} exceeds beta * r_n = {}",
                        rat_to_string(&h.width),
                        rat_to_string(&cap)
                    ),
                ));
            }
            Ok(())
        }
        (GameVariant::RestrictedHaw, AliceMove::Neighborhood(h)) => {
            if h.dim() != d {
                return Err(illegal("alice", j, "neighborhood dimension mismatch".into()));
            }
            let need = scheduled_radius(beta, &b0.radius, j);
            if h.width != need {
                return Err(illegal(
                    "alice",
                    j,
                    format!(
                        "blocking width {} must equal beta^(n+1) * r0 = {}",
                        rat_to_string(&h.width),
                        rat_to_string(&need)
                    ),
                ));
            }
            Ok(())
        }
        (GameVariant::CantorPotential { alpha }, AliceMove::BallFamilies(fams)) => {
            for (i, fam) in fams.iter().enumerate() {
                let need = rat_pow(beta, (j + 1 + i) as i64) * &b0.radius;
                for ball in fam {
                    if ball.dim() != d {
                        return Err(illegal("alice", j, "family ball dimension mismatch".into()));
                    }
                    if ball.radius != need {
                        return Err(illegal(
                            "alice",
                            j,
                            format!(
                                "family {} ball radius {} must equal beta^(n+1+i) * r0 = {}",
                                i,
                                rat_to_string(&ball.radius),
                                rat_to_string(&need)
                            ),
                        ));
                    }
                }
                // The budget is >= 1 (beta < 1, alpha >= 0), so only
                // families with two or more balls need the comparison.
                if fam.len() > 1 {
                    let budget = cantor_family_budget(beta, alpha, i);
                    let p = budget.precision();
                    let count = Real::from_i64(fam.len() as i64, p);
                    let cap = budget.mul(&Real::one().add(&comparison_slack(p)));
                    if count > cap {
                        return Err(Error::BudgetExceeded {
                            n: j + 1,
                            i,
                            count: fam.len(),
                            budget: budget.to_dec_string(),
                        });
                    }
                }
            }
            Ok(())
        }
        _ => Err(illegal(
            "alice",
            j,
            format!("move kind does not fit the {} game", variant.name()),
        )),
    }
}

/// Whether a ball of radius `rho` fits inside `current` while avoiding the
/// closed neighborhood `h`. The best center sits at distance `r - rho` from
/// the current center straight away from the hyperplane, so a legal ball
/// exists iff dist(center, H) + r - rho > width + rho; decided by squaring.
pub fn restricted_move_exists(current: &Ball, h: &HyperplaneNbhd, rho: &BigRational) -> bool {
    if *rho > current.radius {
        return false;
    }
    let t = &h.width + rho + rho - &current.radius;
    if t.is_negative() {
        return true;
    }
    let g = dot(&h.normal, &current.center) - &h.offset;
    &g * &g > &t * &t * h.normal_norm_sq()
}

/// Balls Bob must stay clear of in the potential game at round index `j`:
/// from each past move the family whose balls have shrunk to his current
/// scale, plus family 0 of the pending move. All have radius
/// `beta^(j+1) * r0` once the moves have been validated.
fn active_forbidden(rounds: &[GameRound], pending: &AliceMove, j: usize) -> Vec<Ball> {
    let mut out = Vec::new();
    for l in 0..=j {
        let mv = if l == 0 { pending } else { &rounds[j - l].alice };
        if let AliceMove::BallFamilies(fams) = mv {
            if let Some(fam) = fams.get(l) {
                out.extend(fam.iter().cloned());
            }
        }
    }
    out
}

/// Legality of Bob's reply ball for round index `j`. Exact; shared by engine
/// and validator.
fn check_bob_ball(
    variant: &GameVariant,
    beta: &BigRational,
    b0: &Ball,
    j: usize,
    current: &Ball,
    alice: &AliceMove,
    forbidden: &[Ball],
    ball: &Ball,
) -> Result<()> {
    if ball.dim() != b0.dim() {
        return Err(illegal("bob", j, "ball dimension mismatch".into()));
    }
    if !current.contains_ball(ball) {
        return Err(illegal("bob", j, "ball escapes the current ball".into()));
    }
    match variant {
        GameVariant::Haw => {
            let floor = beta * &current.radius;
            if ball.radius < floor {
                return Err(illegal(
                    "bob",
                    j,
                    format!(
                        "radius {} below beta * r_n = {}",
                        rat_to_string(&ball.radius),
                        rat_to_string(&floor)
                    ),
                ));
            }
            let AliceMove::Neighborhood(h) = alice else {
                return Err(illegal("bob", j, "no neighborhood on record".into()));
            };
            if !h.ball_avoids(ball) {
                return Err(illegal("bob", j, "ball meets the blocked neighborhood".into()));
            }
        }
        GameVariant::RestrictedHaw => {
            let need = scheduled_radius(beta, &b0.radius, j);
            if ball.radius != need {
                return Err(illegal(
                    "bob",
                    j,
                    format!(
                        "radius {} must equal beta^(n+1) * r0 = {}",
                        rat_to_string(&ball.radius),
                        rat_to_string(&need)
                    ),
                ));
            }
            let AliceMove::Neighborhood(h) = alice else {
                return Err(illegal("bob", j, "no neighborhood on record".into()));
            };
            if !h.ball_avoids(ball) {
                return Err(illegal("bob", j, "ball meets the blocked neighborhood".into()));
            }
        }
        GameVariant::CantorPotential { .. } => {
            let need = scheduled_radius(beta, &b0.radius, j);
            if ball.radius != need {
                return Err(illegal(
                    "bob",
                    j,
                    format!(
                        "radius {} must equal beta^(n+1) * r0 = {}",
                        rat_to_string(&ball.radius),
                        rat_to_string(&need)
                    ),
                ));
            }
            for (idx, f) in forbidden.iter().enumerate() {
                if !ball.disjoint_from_ball(f) {
                    return Err(illegal(
                        "bob",
                        j,
                        format!("ball meets active blocked ball {idx}"),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Re-checks a finished or in-progress transcript move by move with the same
/// exact predicates the engine uses, then checks the terminal status against
/// the move list. Never repairs anything.
pub fn validate_transcript(t: &GameTranscript) -> Result<()> {
    validate_params(&t.variant, &t.beta, &t.b0)?;
    let is_cantor = matches!(t.variant, GameVariant::CantorPotential { .. });
    let mut current = t.b0.clone();
    let last = t.rounds.len().checked_sub(1);
    for (j, round) in t.rounds.iter().enumerate() {
        check_alice_move(&t.variant, &t.beta, &t.b0, j, &current, &round.alice)?;
        match &round.bob {
            Some(ball) => {
                let forbidden = if is_cantor {
                    active_forbidden(&t.rounds[..j], &round.alice, j)
                } else {
                    Vec::new()
                };
                check_bob_ball(
                    &t.variant, &t.beta, &t.b0, j, &current, &round.alice, &forbidden, ball,
                )?;
                current = ball.clone();
            }
            None => {
                if Some(j) != last {
                    return Err(Error::Validation(
                        "no-move round before the end of the transcript".into(),
                    ));
                }
                match &t.variant {
                    GameVariant::Haw => {
                        return Err(Error::Validation(
                            "hyperplane game: a legal ball always exists when beta < 1/3".into(),
                        ));
                    }
                    GameVariant::RestrictedHaw => {
                        let AliceMove::Neighborhood(h) = &round.alice else {
                            return Err(Error::Validation("no neighborhood on record".into()));
                        };
                        let rho = scheduled_radius(&t.beta, &t.b0.radius, j);
                        if restricted_move_exists(&current, h, &rho) {
                            return Err(Error::Validation(
                                "default win claimed although a legal ball exists".into(),
                            ));
                        }
                    }
                    // Bob's concession: nonexistence over all of R^d is not
                    // certified here; the tree player gives up exactly when
                    // the measure support offers no ball.
                    GameVariant::CantorPotential { .. } => {}
                }
            }
        }
    }
    match &t.status {
        GameStatus::Running => {
            if t.rounds.last().is_some_and(|r| r.bob.is_none()) {
                return Err(Error::Validation(
                    "running status with a terminal no-move round".into(),
                ));
            }
        }
        GameStatus::AliceWinsByDefault => {
            if !t.rounds.last().is_some_and(|r| r.bob.is_none()) {
                return Err(Error::Validation(
                    "default-win status but the last round has a ball".into(),
                ));
            }
        }
        GameStatus::Outcome(b) => {
            let ok = t.rounds.last().is_some_and(|r| r.bob.as_ref() == Some(b));
            if !ok {
                return Err(Error::Validation(
                    "outcome does not match the last ball on record".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Alice's side of an engine run. `n` is the 0-based round index; `current`
/// is Bob's latest ball.
pub trait AliceStrategy {
    fn pick(&mut self, n: usize, current: &Ball, t: &GameTranscript) -> Result<AliceMove>;
}

/// Bob's side. Returning `Ok(None)` means the strategy found no legal ball;
/// the engine turns that into a default win for Alice in the potential game
/// and into an error in the hyperplane games, where legal balls are known to
/// exist. `forbidden` carries the active blocked balls in the potential game.
pub trait BobStrategy {
    fn pick(
        &mut self,
        n: usize,
        current: &Ball,
        alice: &AliceMove,
        forbidden: &[Ball],
        t: &GameTranscript,
    ) -> Result<Option<Ball>>;
}

/// Runs a game to `max_rounds` or to an earlier default win. Every move is
/// checked as it is made and an illegal one aborts the run as an error;
/// nothing is repaired or retried.
pub fn play(
    variant: GameVariant,
    beta: BigRational,
    b0: Ball,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    max_rounds: usize,
) -> Result<GameTranscript> {
    validate_params(&variant, &beta, &b0)?;
    if max_rounds == 0 {
        return Err(Error::Validation("need at least one round".into()));
    }
    let mut t = GameTranscript {
        variant,
        beta,
        b0,
        rounds: Vec::new(),
        status: GameStatus::Running,
    };
    let mut current = t.b0.clone();
    for j in 0..max_rounds {
        let mv = alice.pick(j, &current, &t)?;
        check_alice_move(&t.variant, &t.beta, &t.b0, j, &current, &mv)?;
        if let (GameVariant::RestrictedHaw, AliceMove::Neighborhood(h)) = (&t.variant, &mv) {
            let rho = scheduled_radius(&t.beta, &t.b0.radius, j);
            if !restricted_move_exists(&current, h, &rho) {
                t.rounds.push(GameRound {
                    alice: mv,
                    bob: None,
                });
                t.status = GameStatus::AliceWinsByDefault;
                return Ok(t);
            }
        }
        let forbidden = match &t.variant {
            GameVariant::CantorPotential { .. } => active_forbidden(&t.rounds, &mv, j),
            _ => Vec::new(),
        };
        let reply = bob.pick(j, &current, &mv, &forbidden, &t)?;
        match reply {
            Some(ball) => {
                check_bob_ball(
                    &t.variant, &t.beta, &t.b0, j, &current, &mv, &forbidden, &ball,
                )?;
                current = ball.clone();
                t.rounds.push(GameRound {
                    alice: mv,
                    bob: Some(ball),
                });
            }
            None => match &t.variant {
                GameVariant::CantorPotential { .. } => {
                    t.rounds.push(GameRound {
                        alice: mv,
                        bob: None,
                    });
                    t.status = GameStatus::AliceWinsByDefault;
                    return Ok(t);
                }
                _ => {
                    return Err(illegal(
                        "bob",
                        j,
                        "strategy returned no ball although a legal ball exists".into(),
                    ));
                }
            },
        }
    }
    t.status = GameStatus::Outcome(current);
    Ok(t)
}

/// A strategy that depends only on Bob's current ball, not on the history.
/// Such strategies compose with the scale transform below.
pub trait PositionalAlice {
    fn respond(&mut self, current: &Ball) -> Result<HyperplaneNbhd>;
}

/// Adapter using a positional strategy in an engine run.
pub struct Positional<F: PositionalAlice>(pub F);

impl<F: PositionalAlice> AliceStrategy for Positional<F> {
    fn pick(&mut self, _n: usize, current: &Ball, _t: &GameTranscript) -> Result<AliceMove> {
        self.0.respond(current).map(AliceMove::Neighborhood)
    }
}

/// The scale index m of a radius r at ratio `beta`: the unique integer with
/// `(beta/2)^(2m+1) <= r < (beta/2)^(2m-1)`, left end included. Radii at
/// the lower end map to the finer scale.
pub fn scale_index(beta: &BigRational, r: &BigRational) -> Result<i64> {
    if !beta.is_positive() || *beta >= rat(1, 3) {
        return Err(Error::Validation(
            "scale transform needs 0 < beta < 1/3".into(),
        ));
    }
    if !r.is_positive() {
        return Err(Error::Validation("radius must be positive".into()));
    }
    let q = beta / rat_i(2);
    let q2 = &q * &q;
    let mut m: i64 = 0;
    let mut low = q.clone(); // (beta/2)^(2m+1)
    while *r < low {
        m += 1;
        low *= &q2;
    }
    let mut high = rat_pow(&q, 2 * m - 1); // (beta/2)^(2m-1)
    while *r >= high {
        m -= 1;
        high /= &q2;
    }
    Ok(m)
}

/// Turns a positional width-locked strategy at parameter `(beta/2)^2` into a
/// positional hyperplane-game strategy at parameter `beta < 1/3`.
///
/// On a ball of radius r with scale index m the inner strategy is consulted
/// on the recentered ball of radius `(beta/2)^(2m)` and must answer with a
/// neighborhood of width `(beta/2)^(2m+2)`; the transform doubles that
/// width. Doubling is what lets a game against the transform be replayed as
/// a width-locked game: the half-width neighborhood blocked around the same
/// hyperplane stays clear of every later ball the extraction selects. The
/// doubled width is always legal: `2 (beta/2)^(2m+2) <= beta * r` because
/// `r >= (beta/2)^(2m+1)`.
pub struct PositionalTransform<F: PositionalAlice> {
    inner: F,
    beta: BigRational,
    half: BigRational, // beta/2
}

/// Builds the scale transform; `beta` must satisfy `0 < beta < 1/3`.
pub fn positional_transform<F: PositionalAlice>(
    inner: F,
    beta: BigRational,
) -> Result<PositionalTransform<F>> {
    if !beta.is_positive() || beta >= rat(1, 3) {
        return Err(Error::Validation(
            "scale transform needs 0 < beta < 1/3".into(),
        ));
    }
    let half = &beta / rat_i(2);
    Ok(PositionalTransform { inner, beta, half })
}

impl<F: PositionalAlice> PositionalTransform<F> {
    pub fn scale_index(&self, r: &BigRational) -> Result<i64> {
        scale_index(&self.beta, r)
    }
}

impl<F: PositionalAlice> PositionalAlice for PositionalTransform<F> {
    fn respond(&mut self, current: &Ball) -> Result<HyperplaneNbhd> {
        let m = scale_index(&self.beta, &current.radius)?;
        let queried = current.with_radius(rat_pow(&self.half, 2 * m))?;
        let a = self.inner.respond(&queried)?;
        let w = rat_pow(&self.half, 2 * m + 2);
        if a.width != w {
            return Err(Error::Validation(format!(
                "inner strategy answered width {}, the scale transform needs {}",
                rat_to_string(&a.width),
                rat_to_string(&w)
            )));
        }
        HyperplaneNbhd::new(a.normal, a.offset, &w * rat_i(2))
    }
}

/// The width-locked subgame recovered from a hyperplane-game transcript.
#[derive(Clone, Debug)]
pub struct ExtractedSubgame {
    /// Parameter of the recovered game: `(beta/2)^2`.
    pub beta: BigRational,
    /// Base scale index: minimal k with `(beta/2)^(2k) < r_1`. `None` when
    /// the source has no second ball to anchor the scale ladder.
    pub k0: Option<i64>,
    /// Selected source ball indices n_k, strictly increasing; ball n_k has
    /// radius in `[(beta/2)^(2k+1), (beta/2)^(2k) / 2)`.
    pub indices: Vec<usize>,
    /// The recovered transcript, validated as a width-locked game. `None`
    /// when no ball lands on the scale ladder.
    pub transcript: Option<GameTranscript>,
}

/// Replays a hyperplane-game transcript played against a scale-transformed
/// strategy as a width-locked game at parameter `(beta/2)^2`.
///
/// With q = beta/2, ball n_k recenters to radius `q^(2k)` and Alice's
/// recorded response after it, halved back to width `q^(2k+2)`, becomes the
/// blocking move before ball n_(k+1). Consecutive radii shrink by at most
/// the factor beta, so a legal source transcript cannot skip over any radius
/// bracket; a skip means the source was illegal and raises
/// [`Error::ExtractionGap`]. A transcript too short to reach the ladder
/// extracts empty without error.
pub fn extract_restricted_subgame(
    t: &GameTranscript,
    beta: &BigRational,
) -> Result<ExtractedSubgame> {
    if t.variant != GameVariant::Haw {
        return Err(Error::Validation(
            "subgame extraction applies to hyperplane-game transcripts".into(),
        ));
    }
    if t.beta != *beta {
        return Err(Error::Validation(format!(
            "transcript parameter {} does not match beta = {}",
            rat_to_string(&t.beta),
            rat_to_string(beta)
        )));
    }
    if !beta.is_positive() || *beta >= rat(1, 3) {
        return Err(Error::Validation(
            "scale transform needs 0 < beta < 1/3".into(),
        ));
    }
    let q = beta / rat_i(2);
    let q2 = &q * &q;

    let mut balls = vec![t.b0.clone()];
    let mut nbhds: Vec<HyperplaneNbhd> = Vec::new();
    for round in &t.rounds {
        let AliceMove::Neighborhood(h) = &round.alice else {
            return Err(Error::Validation("source move is not a neighborhood".into()));
        };
        let Some(b) = &round.bob else {
            return Err(Error::Validation("source transcript has a no-move round".into()));
        };
        nbhds.push(h.clone());
        balls.push(b.clone());
    }
    if balls.len() < 2 {
        return Ok(ExtractedSubgame {
            beta: q2,
            k0: None,
            indices: Vec::new(),
            transcript: None,
        });
    }

    // Minimal k0 with q^(2 k0) < r_1.
    let r1 = balls[1].radius.clone();
    let mut k0: i64 = 0;
    let mut pw = BigRational::one(); // q^(2 k0)
    while pw >= r1 {
        k0 += 1;
        pw *= &q2;
    }
    while &pw / &q2 < r1 {
        k0 -= 1;
        pw /= &q2;
    }

    // Walk the scale ladder: for k = k0, k0+1, ... pick the first ball with
    // radius in [q^(2k+1), q^(2k)/2), scanning past earlier selections only.
    let mut indices: Vec<usize> = Vec::new();
    let mut start = 1usize;
    let mut k = k0;
    let mut lo = rat_pow(&q, 2 * k0 + 1);
    let mut hi = rat_pow(&q, 2 * k0) / rat_i(2);
    loop {
        let mut found = None;
        for (n, ball) in balls.iter().enumerate().skip(start) {
            if ball.radius >= hi {
                continue;
            }
            if ball.radius >= lo {
                found = Some(n);
                break;
            }
            return Err(Error::ExtractionGap(format!(
                "no ball radius in [{}, {}) at scale index {}",
                rat_to_string(&lo),
                rat_to_string(&hi),
                k
            )));
        }
        match found {
            Some(n) => {
                indices.push(n);
                start = n + 1;
                k += 1;
                lo *= &q2;
                hi *= &q2;
            }
            None => break,
        }
    }

    let transcript = if indices.is_empty() {
        None
    } else {
        let b0 = Ball::new(balls[indices[0]].center.clone(), rat_pow(&q, 2 * k0))?;
        let mut rounds = Vec::new();
        for (ti, pair) in indices.windows(2).enumerate() {
            let kk = k0 + ti as i64 + 1;
            let src = &nbhds[pair[0]];
            let w = rat_pow(&q, 2 * kk);
            if src.width != &w * rat_i(2) {
                return Err(Error::Validation(format!(
                    "round {} width {} was not produced by the scale transform",
                    pair[0] + 1,
                    rat_to_string(&src.width)
                )));
            }
            let a = HyperplaneNbhd::new(src.normal.clone(), src.offset.clone(), w.clone())?;
            let b = Ball::new(balls[pair[1]].center.clone(), w)?;
            rounds.push(GameRound {
                alice: AliceMove::Neighborhood(a),
                bob: Some(b),
            });
        }
        let sub = GameTranscript {
            variant: GameVariant::RestrictedHaw,
            beta: q2.clone(),
            b0,
            rounds,
            status: GameStatus::Running,
        };
        validate_transcript(&sub)?;
        Some(sub)
    };

    Ok(ExtractedSubgame {
        beta: q2,
        k0: Some(k0),
        indices,
        transcript,
    })
}

/// Blocks the axis hyperplane through Bob's center at width `ratio * r`.
/// With `ratio = beta` this is a legal positional move in both hyperplane
/// games; with `ratio = (beta/2)^2` it feeds the scale transform.
pub struct CenterBlockingAlice {
    pub ratio: BigRational,
    pub axis: usize,
}

impl PositionalAlice for CenterBlockingAlice {
    fn respond(&mut self, current: &Ball) -> Result<HyperplaneNbhd> {
        let d = current.dim();
        if self.axis >= d {
            return Err(Error::DimensionMismatch(format!(
                "axis {} out of range for dimension {}",
                self.axis, d
            )));
        }
        let mut normal = vec![BigRational::zero(); d];
        normal[self.axis] = BigRational::one();
        HyperplaneNbhd::new(
            normal,
            current.center[self.axis].clone(),
            &self.ratio * &current.radius,
        )
    }
}

/// Plays the empty family list every round of the potential game.
pub struct EmptyAlice;

impl AliceStrategy for EmptyAlice {
    fn pick(&mut self, _n: usize, _current: &Ball, _t: &GameTranscript) -> Result<AliceMove> {
        Ok(AliceMove::BallFamilies(Vec::new()))
    }
}

/// Seeded random legal Alice: axis-aligned neighborhoods in the hyperplane
/// games, small random families under budget in the potential game.
pub struct RandomAxisAlice {
    rng: ChaCha20Rng,
}

impl RandomAxisAlice {
    pub fn new(seed: u64) -> RandomAxisAlice {
        RandomAxisAlice {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl AliceStrategy for RandomAxisAlice {
    fn pick(&mut self, n: usize, current: &Ball, t: &GameTranscript) -> Result<AliceMove> {
        let d = current.dim();
        let axis = self.rng.gen_range(0..d);
        let off_num = self.rng.gen_range(0..=64i64) - 32;
        let offset = &current.center[axis] + &current.radius * rat(off_num, 32);
        match &t.variant {
            GameVariant::Haw => {
                let w_num = self.rng.gen_range(1..=64i64);
                let width = &t.beta * &current.radius * rat(w_num, 64);
                let mut normal = vec![BigRational::zero(); d];
                normal[axis] = BigRational::one();
                Ok(AliceMove::Neighborhood(HyperplaneNbhd::new(
                    normal, offset, width,
                )?))
            }
            GameVariant::RestrictedHaw => {
                let width = scheduled_radius(&t.beta, &t.b0.radius, n);
                let mut normal = vec![BigRational::zero(); d];
                normal[axis] = BigRational::one();
                Ok(AliceMove::Neighborhood(HyperplaneNbhd::new(
                    normal, offset, width,
                )?))
            }
            GameVariant::CantorPotential { alpha } => {
                let fams_len = self.rng.gen_range(0..=2usize);
                let mut fams = Vec::new();
                for i in 0..fams_len {
                    // Conservative integer cap under the budget; rounding
                    // down never produces an illegal family.
                    let budget = cantor_family_budget(&t.beta, alpha, i);
                    let cap = (1..=2i64)
                        .take_while(|c| Real::from_i64(*c, 64) <= budget)
                        .last()
                        .unwrap_or(0);
                    let count = self.rng.gen_range(0..=cap.max(0) as usize);
                    let rad = rat_pow(&t.beta, (n + 1 + i) as i64) * &t.b0.radius;
                    let mut fam = Vec::new();
                    for _ in 0..count {
                        let center: Vec<BigRational> = current
                            .center
                            .iter()
                            .map(|c| {
                                let g = self.rng.gen_range(0..=128i64) - 64;
                                c + &current.radius * rat(g, 64)
                            })
                            .collect();
                        fam.push(Ball::new(center, rad.clone())?);
                    }
                    fams.push(fam);
                }
                Ok(AliceMove::BallFamilies(fams))
            }
        }
    }
}

/// Deterministic geometric Bob for the hyperplane games: slides the center
/// straight away from the blocked hyperplane along the coordinate axis most
/// aligned with its normal, falling back to the other axis directions. In
/// the hyperplane game the next radius is `shrink * r`; the width-locked
/// game forces `beta^(n+1) * r0`.
pub struct GreedyBallBob {
    pub shrink: Option<BigRational>,
}

impl GreedyBallBob {
    /// For the width-locked game, where the radius schedule is forced.
    pub fn locked() -> GreedyBallBob {
        GreedyBallBob { shrink: None }
    }

    /// For the hyperplane game, with `beta <= shrink < 1`.
    pub fn shrinking(shrink: BigRational) -> GreedyBallBob {
        GreedyBallBob {
            shrink: Some(shrink),
        }
    }
}

impl BobStrategy for GreedyBallBob {
    fn pick(
        &mut self,
        n: usize,
        current: &Ball,
        alice: &AliceMove,
        _forbidden: &[Ball],
        t: &GameTranscript,
    ) -> Result<Option<Ball>> {
        let rho = match &t.variant {
            GameVariant::RestrictedHaw => scheduled_radius(&t.beta, &t.b0.radius, n),
            GameVariant::Haw => {
                let s = self.shrink.as_ref().ok_or_else(|| {
                    Error::Validation("hyperplane game needs a shrink ratio".into())
                })?;
                if *s < t.beta || *s >= BigRational::one() {
                    return Err(Error::Validation(format!(
                        "shrink ratio {} must lie in [beta, 1)",
                        rat_to_string(s)
                    )));
                }
                s * &current.radius
            }
            GameVariant::CantorPotential { .. } => {
                return Err(Error::Validation(
                    "the potential game needs a support-tree player".into(),
                ));
            }
        };
        let AliceMove::Neighborhood(h) = alice else {
            return Err(Error::Validation("no neighborhood to avoid".into()));
        };
        let step = &current.radius - &rho;
        let g = dot(&h.normal, &current.center) - &h.offset;

        // Axes carrying a normal component, largest first.
        let mut axes: Vec<usize> = (0..current.dim())
            .filter(|&a| !h.normal[a].is_zero())
            .collect();
        axes.sort_by(|&a, &b| h.normal[b].abs().cmp(&h.normal[a].abs()).then(a.cmp(&b)));

        let mut candidates: Vec<Vec<BigRational>> = Vec::new();
        let signed = |axis: usize, flip: bool| -> Vec<BigRational> {
            let mut y = current.center.clone();
            // Stepping +e_axis changes the scaled gap by step * n_axis, so
            // the positive direction leads away iff g and n_axis agree in
            // sign (zero counts as positive).
            let away_is_positive = g.is_negative() == h.normal[axis].is_negative();
            let dir = if away_is_positive != flip { 1 } else { -1 };
            y[axis] = &y[axis] + &step * rat_i(dir);
            y
        };
        for &a in &axes {
            candidates.push(signed(a, false));
        }
        candidates.push(current.center.clone());
        for &a in axes.iter().rev() {
            candidates.push(signed(a, true));
        }

        for cand in candidates {
            let ball = Ball::new(cand, rho.clone())?;
            if current.contains_ball(&ball) && h.ball_avoids(&ball) {
                return Ok(Some(ball));
            }
        }
        Ok(None)
    }
}

/// Width-locked-game Bob that stays on a diffuse set: each round the set
/// oracle supplies a point whose margin ball clears the widened blocked
/// neighborhood, and the reply ball sits at that point. Requires
/// `beta <= beta0` of the oracle; every returned point is re-verified
/// against the avoidance contract before being played.
pub struct DiffuseBob<'a> {
    oracle: &'a dyn DiffuseOracle,
}

impl<'a> DiffuseBob<'a> {
    pub fn new(oracle: &'a dyn DiffuseOracle) -> DiffuseBob<'a> {
        DiffuseBob { oracle }
    }
}

impl BobStrategy for DiffuseBob<'_> {
    fn pick(
        &mut self,
        n: usize,
        current: &Ball,
        alice: &AliceMove,
        _forbidden: &[Ball],
        t: &GameTranscript,
    ) -> Result<Option<Ball>> {
        if t.variant != GameVariant::RestrictedHaw {
            return Err(Error::Validation(
                "the diffuse-set player plays the width-locked game".into(),
            ));
        }
        let beta0 = self.oracle.beta0();
        if t.beta > beta0 {
            return Err(Error::Validation(format!(
                "game ratio {} exceeds the oracle avoidance bound {}",
                rat_to_string(&t.beta),
                rat_to_string(&beta0)
            )));
        }
        if current.radius > self.oracle.scale_cap() {
            return Err(Error::Validation(
                "ball radius above the oracle scale cap".into(),
            ));
        }
        let AliceMove::Neighborhood(h) = alice else {
            return Err(Error::Validation("no neighborhood to avoid".into()));
        };
        let x = self.oracle.avoid(current, h)?;
        check_diffuse_point(current, h, &beta0, &x)?;
        let ball = Ball::new(x, scheduled_radius(&t.beta, &t.b0.radius, n))?;
        Ok(Some(ball))
    }
}

/// Potential-game Bob restricted to the support of a tree measure. Each
/// round he descends a fixed number of levels and, among descendant balls
/// disjoint from every active blocked ball, takes the one farthest from the
/// nearest center of ANY ball announced so far, active or pending (ties to
/// the lexicographically smallest center). Families scheduled for later
/// rounds are already visible in the transcript, and blocked regions recur
/// around the same centers at finer scales, so steering by the full
/// announcement veers away from traps while the current ball is still large
/// enough to clear them; reacting only to active balls walks into nested
/// blocks that are wider than the ball by the time they switch on. Radii
/// are ignored in the ranking: centers mark the danger sites and announced
/// radii vary by family. Returns no ball when the support offers none,
/// which the engine records as a default win for Alice.
pub struct TreeBob<'a> {
    tree: &'a mut dyn BallTree,
    path: Vec<usize>,
    descend: usize,
}

impl<'a> TreeBob<'a> {
    /// `game_beta` must be a positive power of the tree ratio; the player
    /// descends that many levels per round starting below `start`.
    pub fn new(
        tree: &'a mut dyn BallTree,
        start: Vec<usize>,
        game_beta: &BigRational,
    ) -> Result<TreeBob<'a>> {
        let tb = tree.beta().clone();
        let mut pw = tb.clone();
        let mut descend = None;
        for m in 1..=64usize {
            if pw == *game_beta {
                descend = Some(m);
                break;
            }
            pw *= &tb;
        }
        let Some(descend) = descend else {
            return Err(Error::Validation(
                "game ratio must be a positive power of the tree ratio".into(),
            ));
        };
        tree.ball_at(&start)?;
        Ok(TreeBob {
            tree,
            path: start,
            descend,
        })
    }

    /// The ball of the start node; use it as the initial ball of the game.
    pub fn start_ball(&mut self) -> Result<Ball> {
        self.tree.ball_at(&self.path)
    }
}

impl BobStrategy for TreeBob<'_> {
    fn pick(
        &mut self,
        _n: usize,
        _current: &Ball,
        alice: &AliceMove,
        forbidden: &[Ball],
        t: &GameTranscript,
    ) -> Result<Option<Ball>> {
        if !matches!(t.variant, GameVariant::CantorPotential { .. }) {
            return Err(Error::Validation(
                "the support-tree player plays the potential game".into(),
            ));
        }
        // Every announced center repels, not only the active ones; see the
        // type-level comment. Legality below still checks active balls only.
        let mut repellers: Vec<&Ball> = Vec::new();
        for mv in t.rounds.iter().map(|r| &r.alice).chain([alice]) {
            if let AliceMove::BallFamilies(fams) = mv {
                repellers.extend(fams.iter().flatten());
            }
        }

        let mut frontier: Vec<(Vec<usize>, Vec<BigRational>)> = vec![(self.path.clone(), vec![])];
        for _ in 0..self.descend {
            let mut next = Vec::new();
            for (p, _) in &frontier {
                let kids = self.tree.children_centers(p)?;
                for (ci, c) in kids.into_iter().enumerate() {
                    let mut np = p.clone();
                    np.push(ci);
                    next.push((np, c));
                }
            }
            frontier = next;
        }
        let depth = self.path.len() + self.descend;
        let rho = rat_pow(self.tree.beta(), depth as i64) * self.tree.root_radius();

        let mut best: Option<(Option<BigRational>, Ball, Vec<usize>)> = None;
        for (p, c) in frontier {
            let ball = Ball::new(c, rho.clone())?;
            if forbidden.iter().any(|f| !ball.disjoint_from_ball(f)) {
                continue;
            }
            let key: Option<BigRational> =
                repellers.iter().map(|f| ball.dist_sq_to(&f.center)).min();
            let better = match &best {
                None => true,
                Some((bk, bb, _)) => match (&key, bk) {
                    (Some(a), Some(b)) => a > b || (a == b && ball.center < bb.center),
                    (None, None) => ball.center < bb.center,
                    // Key presence depends only on `repellers`, never on the
                    // candidate, so mixed cases cannot occur.
                    _ => unreachable!("inconsistent ranking keys"),
                },
            };
            if better {
                best = Some((key, ball, p));
            }
        }
        match best {
            Some((_, ball, p)) => {
                self.path = p;
                Ok(Some(ball))
            }
            None => Ok(None),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct BallDoc {
    center: Vec<String>,
    radius: String,
}

impl BallDoc {
    fn of(b: &Ball) -> BallDoc {
        BallDoc {
            center: b.center.iter().map(rat_to_string).collect(),
            radius: rat_to_string(&b.radius),
        }
    }

    fn parse(&self) -> Result<Ball> {
        let center = self
            .center
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ball::new(center, parse_rational(&self.radius)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NbhdDoc {
    normal: Vec<String>,
    offset: String,
    width: String,
}

impl NbhdDoc {
    fn of(h: &HyperplaneNbhd) -> NbhdDoc {
        NbhdDoc {
            normal: h.normal.iter().map(rat_to_string).collect(),
            offset: rat_to_string(&h.offset),
            width: rat_to_string(&h.width),
        }
    }

    fn parse(&self) -> Result<HyperplaneNbhd> {
        let normal = self
            .normal
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        HyperplaneNbhd::new(normal, parse_rational(&self.offset)?, parse_rational(&self.width)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
enum AliceDoc {
    #[serde(rename_all = "camelCase")]
    Neighborhood { nbhd: NbhdDoc },
    #[serde(rename_all = "camelCase")]
    BallFamilies { families: Vec<Vec<BallDoc>> },
}

impl AliceDoc {
    fn of(mv: &AliceMove) -> AliceDoc {
        match mv {
            AliceMove::Neighborhood(h) => AliceDoc::Neighborhood { nbhd: NbhdDoc::of(h) },
            AliceMove::BallFamilies(fams) => AliceDoc::BallFamilies {
                families: fams
                    .iter()
                    .map(|f| f.iter().map(BallDoc::of).collect())
                    .collect(),
            },
        }
    }

    fn parse(&self) -> Result<AliceMove> {
        match self {
            AliceDoc::Neighborhood { nbhd } => Ok(AliceMove::Neighborhood(nbhd.parse()?)),
            AliceDoc::BallFamilies { families } => Ok(AliceMove::BallFamilies(
                families
                    .iter()
                    .map(|f| f.iter().map(BallDoc::parse).collect())
                    .collect::<Result<Vec<Vec<_>>>>()?,
            )),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "line", rename_all = "camelCase", deny_unknown_fields)]
enum LineDoc {
    #[serde(rename_all = "camelCase")]
    Header {
        version: u32,
        variant: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha: Option<String>,
        beta: String,
        b0: BallDoc,
    },
    #[serde(rename_all = "camelCase")]
    Round {
        n: usize,
        alice: AliceDoc,
        bob: Option<BallDoc>,
    },
    #[serde(rename_all = "camelCase")]
    Status {
        status: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        outcome: Option<BallDoc>,
    },
}

/// Serializes a transcript as JSON lines: one header, one line per round in
/// order, one terminal status line. All rational fields render as exact
/// fraction strings and the budget exponent as a full-precision decimal
/// string, so parsing back yields the identical transcript byte for byte.
pub fn transcript_to_jsonl(t: &GameTranscript) -> Result<String> {
    let mut lines = Vec::with_capacity(t.rounds.len() + 2);
    let alpha = match &t.variant {
        GameVariant::CantorPotential { alpha } => Some(alpha.to_dec_string()),
        _ => None,
    };
    lines.push(LineDoc::Header {
        version: 1,
        variant: t.variant.name().to_string(),
        alpha,
        beta: rat_to_string(&t.beta),
        b0: BallDoc::of(&t.b0),
    });
    for (j, round) in t.rounds.iter().enumerate() {
        lines.push(LineDoc::Round {
            n: j + 1,
            alice: AliceDoc::of(&round.alice),
            bob: round.bob.as_ref().map(BallDoc::of),
        });
    }
    let (status, outcome) = match &t.status {
        GameStatus::Running => ("running", None),
        GameStatus::AliceWinsByDefault => ("aliceWinsByDefault", None),
        GameStatus::Outcome(b) => ("outcome", Some(BallDoc::of(b))),
    };
    lines.push(LineDoc::Status {
        status: status.to_string(),
        outcome,
    });
    let mut out = String::new();
    for line in lines {
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses JSON-lines output of [`transcript_to_jsonl`] and re-validates the
/// transcript, so a replayed record is accepted only if every recorded move
/// is legal.
pub fn transcript_from_jsonl(s: &str) -> Result<GameTranscript> {
    let mut header: Option<(String, Option<String>, BigRational, Ball)> = None;
    let mut rounds: Vec<GameRound> = Vec::new();
    let mut status: Option<GameStatus> = None;
    for raw in s.lines() {
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if status.is_some() {
            return Err(Error::Validation("content after the status line".into()));
        }
        let line: LineDoc = serde_json::from_str(raw)?;
        match line {
            LineDoc::Header {
                version,
                variant,
                alpha,
                beta,
                b0,
            } => {
                if header.is_some() {
                    return Err(Error::Validation("duplicate header line".into()));
                }
                if version != 1 {
                    return Err(Error::Validation(format!(
                        "unsupported transcript version {version}"
                    )));
                }
                header = Some((variant, alpha, parse_rational(&beta)?, b0.parse()?));
            }
            LineDoc::Round { n, alice, bob } => {
                if header.is_none() {
                    return Err(Error::Validation("round before header".into()));
                }
                if n != rounds.len() + 1 {
                    return Err(Error::Validation(format!(
                        "round {n} out of order, expected {}",
                        rounds.len() + 1
                    )));
                }
                rounds.push(GameRound {
                    alice: alice.parse()?,
                    bob: bob.as_ref().map(BallDoc::parse).transpose()?,
                });
            }
            LineDoc::Status { status: st, outcome } => {
                if header.is_none() {
                    return Err(Error::Validation("status before header".into()));
                }
                status = Some(match (st.as_str(), outcome) {
                    ("running", None) => GameStatus::Running,
                    ("aliceWinsByDefault", None) => GameStatus::AliceWinsByDefault,
                    ("outcome", Some(b)) => GameStatus::Outcome(b.parse()?),
                    (other, _) => {
                        return Err(Error::Validation(format!(
                            "malformed status line {other:?}"
                        )));
                    }
                });
            }
        }
    }
    let Some((variant_name, alpha, beta, b0)) = header else {
        return Err(Error::Validation("missing header line".into()));
    };
    let Some(status) = status else {
        return Err(Error::Validation("missing status line".into()));
    };
    let variant = match (variant_name.as_str(), alpha) {
        ("haw", None) => GameVariant::Haw,
        ("restrictedHaw", None) => GameVariant::RestrictedHaw,
        ("cantorPotential", Some(a)) => {
            let alpha = Real::parse_dec(&a, DEFAULT_PRECISION)
                .ok_or_else(|| Error::Validation(format!("cannot parse alpha {a:?}")))?;
            GameVariant::CantorPotential { alpha }
        }
        (name, _) => {
            return Err(Error::Validation(format!(
                "unknown or malformed variant {name:?}"
            )));
        }
    };
    let t = GameTranscript {
        variant,
        beta,
        b0,
        rounds,
        status,
    };
    validate_transcript(&t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{
        cantor_endpoints_in, middle_thirds_tree, CantorDiffuseOracle, LazyDiffuseTree,
    };
    use std::collections::VecDeque;

    fn pt1(c: BigRational) -> Vec<BigRational> {
        vec![c]
    }

    fn ball1(c: BigRational, r: BigRational) -> Ball {
        Ball::new(pt1(c), r).unwrap()
    }

    /// Plays a fixed list of moves, for driving hand-built positions.
    struct ScriptedAlice {
        moves: VecDeque<AliceMove>,
    }

    impl ScriptedAlice {
        fn new(moves: Vec<AliceMove>) -> ScriptedAlice {
            ScriptedAlice {
                moves: moves.into(),
            }
        }
    }

    impl AliceStrategy for ScriptedAlice {
        fn pick(&mut self, _n: usize, _c: &Ball, _t: &GameTranscript) -> Result<AliceMove> {
            self.moves
                .pop_front()
                .ok_or_else(|| Error::Validation("script exhausted".into()))
        }
    }

    #[test]
    fn parameter_ranges_per_variant() {
        let b0 = ball1(rat(1, 2), rat(1, 2));
        assert!(validate_params(&GameVariant::Haw, &rat(1, 5), &b0).is_ok());
        assert!(validate_params(&GameVariant::Haw, &rat(1, 3), &b0).is_err());
        assert!(validate_params(&GameVariant::Haw, &rat(0, 1), &b0).is_err());
        // The width-locked game allows the whole range (0, 1).
        assert!(validate_params(&GameVariant::RestrictedHaw, &rat(2, 5), &b0).is_ok());
        assert!(validate_params(&GameVariant::RestrictedHaw, &rat(1, 1), &b0).is_err());
        let neg = GameVariant::cantor(Real::from_i64(-1, 64));
        assert!(validate_params(&neg, &rat(1, 3), &b0).is_err());
        let ok = GameVariant::cantor(Real::zero());
        assert!(validate_params(&ok, &rat(1, 3), &b0).is_ok());
    }

    #[test]
    fn width_locked_center_split_runs_to_horizon() {
        // d=1, beta=1/5: blocking through the center leaves both sides
        // roomy, (1-beta) r >= 2 beta r, so the run reaches the horizon.
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        let mut alice = Positional(CenterBlockingAlice {
            ratio: beta.clone(),
            axis: 0,
        });
        let mut bob = GreedyBallBob::locked();
        let t = play(
            GameVariant::RestrictedHaw,
            beta.clone(),
            b0,
            &mut alice,
            &mut bob,
            10,
        )
        .unwrap();
        assert_eq!(t.rounds.len(), 10);
        validate_transcript(&t).unwrap();
        let out = t.outcome_ball().expect("horizon outcome");
        assert_eq!(out.radius, rat_pow(&beta, 10) * rat(1, 2));
        for (j, round) in t.rounds.iter().enumerate() {
            let b = round.bob.as_ref().unwrap();
            assert_eq!(b.radius, rat_pow(&beta, j as i64 + 1) * rat(1, 2));
        }
    }

    #[test]
    fn width_locked_default_win_when_blocking_dominates() {
        // beta = 2/5: the center block of width beta*r plus the forced next
        // radius cover everything, 2 beta r > (1 - beta) r, so no legal ball
        // remains and the very first round ends the game.
        let beta = rat(2, 5);
        let r = rat(1, 2);
        assert!(rat_i(2) * &beta * &r > (rat_i(1) - &beta) * &r);
        let b0 = ball1(rat(1, 2), r);
        let mut alice = Positional(CenterBlockingAlice {
            ratio: beta.clone(),
            axis: 0,
        });
        let mut bob = GreedyBallBob::locked();
        let t = play(
            GameVariant::RestrictedHaw,
            beta,
            b0,
            &mut alice,
            &mut bob,
            10,
        )
        .unwrap();
        assert_eq!(t.status, GameStatus::AliceWinsByDefault);
        assert_eq!(t.rounds.len(), 1);
        assert!(t.rounds[0].bob.is_none());
        validate_transcript(&t).unwrap();

        // The same record with a running status is inconsistent.
        let mut bad = t.clone();
        bad.status = GameStatus::Running;
        assert!(validate_transcript(&bad).is_err());
    }

    #[test]
    fn default_claim_rejected_when_a_ball_exists() {
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        let h = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 2), rat(1, 10)).unwrap();
        let t = GameTranscript {
            variant: GameVariant::RestrictedHaw,
            beta,
            b0,
            rounds: vec![GameRound {
                alice: AliceMove::Neighborhood(h),
                bob: None,
            }],
            status: GameStatus::AliceWinsByDefault,
        };
        let err = validate_transcript(&t).unwrap_err();
        assert!(err.to_string().contains("legal ball exists"), "{err}");
    }

    #[test]
    fn hyperplane_game_never_defaults() {
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        let h = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 2), rat(1, 10)).unwrap();
        let t = GameTranscript {
            variant: GameVariant::Haw,
            beta,
            b0,
            rounds: vec![GameRound {
                alice: AliceMove::Neighborhood(h),
                bob: None,
            }],
            status: GameStatus::AliceWinsByDefault,
        };
        let err = validate_transcript(&t).unwrap_err();
        assert!(err.to_string().contains("always exists"), "{err}");
    }

    #[test]
    fn illegal_moves_are_reported_not_repaired() {
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        // Alice oversteps the width cap in the hyperplane game.
        let wide = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 2), rat(1, 4)).unwrap();
        let mut alice = ScriptedAlice::new(vec![AliceMove::Neighborhood(wide)]);
        let mut bob = GreedyBallBob::shrinking(rat(1, 4));
        let err = play(
            GameVariant::Haw,
            beta.clone(),
            b0.clone(),
            &mut alice,
            &mut bob,
            3,
        )
        .unwrap_err();
        match err {
            Error::IllegalMove { role, round, .. } => {
                assert_eq!(role, "alice");
                assert_eq!(round, 1);
            }
            other => panic!("expected illegal move, got {other}"),
        }

        // A hand-built record with a ball leaking outside is rejected offline.
        let h = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 2), rat(1, 10)).unwrap();
        let stray = ball1(rat(19, 20), rat(1, 10));
        let t = GameTranscript {
            variant: GameVariant::RestrictedHaw,
            beta,
            b0,
            rounds: vec![GameRound {
                alice: AliceMove::Neighborhood(h),
                bob: Some(stray),
            }],
            status: GameStatus::Running,
        };
        let err = validate_transcript(&t).unwrap_err();
        assert!(matches!(err, Error::IllegalMove { role: "bob", .. }), "{err}");
    }

    #[test]
    fn scale_index_brackets_and_examples() {
        let beta = rat(1, 5); // q = 1/10
        assert_eq!(scale_index(&beta, &rat(1, 2)).unwrap(), 0);
        assert_eq!(scale_index(&beta, &rat(1, 10)).unwrap(), 0);
        // Exactly at the left end of the bracket: included.
        assert_eq!(scale_index(&beta, &rat(1, 1000)).unwrap(), 1);
        assert_eq!(scale_index(&beta, &rat_i(50)).unwrap(), -1);
        assert!(scale_index(&rat(1, 3), &rat(1, 2)).is_err());

        let q = rat(1, 10);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let num = rng.gen_range(1..=1_000_000i64);
            let den = rng.gen_range(1..=1_000_000i64);
            let shift = rng.gen_range(0..=12i32) - 6;
            let r = rat(num, den) * rat_pow(&rat_i(10), shift as i64);
            let m = scale_index(&beta, &r).unwrap();
            assert!(rat_pow(&q, 2 * m + 1) <= r && r < rat_pow(&q, 2 * m - 1));
            // The doubled transformed width is always a legal blocking width.
            let width = rat_i(2) * rat_pow(&q, 2 * m + 2);
            assert!(width <= &beta * &r);
        }
    }

    #[test]
    fn transform_width_mismatch_is_reported() {
        // An inner strategy that blocks the wrong width is a contract
        // breach, surfaced as an error rather than silently rescaled.
        let mut wrong = positional_transform(
            CenterBlockingAlice {
                ratio: rat(1, 7),
                axis: 0,
            },
            rat(1, 5),
        )
        .unwrap();
        let err = wrong.respond(&ball1(rat(1, 2), rat(1, 2))).unwrap_err();
        assert!(err.to_string().contains("scale transform needs"), "{err}");
    }

    fn play_transformed_game(
        beta: &BigRational,
        shrink: BigRational,
        rounds: usize,
    ) -> GameTranscript {
        let inner = CenterBlockingAlice {
            ratio: &(beta / rat_i(2)) * &(beta / rat_i(2)),
            axis: 0,
        };
        let mut alice = Positional(positional_transform(inner, beta.clone()).unwrap());
        let mut bob = GreedyBallBob::shrinking(shrink);
        play(
            GameVariant::Haw,
            beta.clone(),
            ball1(rat(1, 2), rat(1, 2)),
            &mut alice,
            &mut bob,
            rounds,
        )
        .unwrap()
    }

    #[test]
    fn transform_plays_legal_hyperplane_game_and_extracts() {
        let beta = rat(1, 5);
        // Geometric shrink at exactly beta: the densest radius sequence.
        let t = play_transformed_game(&beta, rat(1, 5), 24);
        validate_transcript(&t).unwrap();
        let ex = extract_restricted_subgame(&t, &beta).unwrap();
        assert_eq!(ex.beta, rat(1, 100));
        let sub = ex.transcript.expect("nonempty extraction");
        validate_transcript(&sub).unwrap();
        assert_eq!(sub.variant, GameVariant::RestrictedHaw);
        assert!(sub.rounds.len() >= 5);
        // r_(n+1) = beta r_n: consecutive selections sit 2 log(beta/2) /
        // log(beta) apart, which for beta = 1/5 is between 2 and 3.
        for pair in ex.indices.windows(2) {
            let gap = pair[1] - pair[0];
            assert!(gap == 2 || gap == 3, "spacing {gap}");
        }

        // A lazier shrink still extracts a valid subgame.
        let t2 = play_transformed_game(&beta, rat(1, 3), 30);
        let ex2 = extract_restricted_subgame(&t2, &beta).unwrap();
        let sub2 = ex2.transcript.expect("nonempty extraction");
        validate_transcript(&sub2).unwrap();
        for w in ex2.indices.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn extraction_on_short_transcripts_is_empty_not_an_error() {
        let beta = rat(1, 5);
        let t = play_transformed_game(&beta, rat(1, 3), 1);
        let ex = extract_restricted_subgame(&t, &beta).unwrap();
        // One round: k0 anchors on r_1 but no ball reaches its bracket yet
        // (r_1 = 1/6 lies above (1/10)^2 / 2 only for the k0 bracket).
        assert!(ex.k0.is_some());
        assert!(ex.transcript.is_none() || ex.indices.len() == 1);
    }

    #[test]
    fn extraction_gap_flags_radius_skips() {
        // Hand-built source whose radii jump over a whole bracket; such a
        // record cannot come from a legal play, where radii shrink by at
        // most the factor beta per round.
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        let h1 = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 2), rat(2, 10_000)).unwrap();
        let b1 = ball1(rat(1, 4), rat(1, 30)); // lands in the k=1 bracket
        let h2 = HyperplaneNbhd::new(pt1(rat_i(1)), rat(1, 4), rat(2, 100_000_000)).unwrap();
        let b2 = ball1(rat(1, 4) + rat(1, 15), rat(1, 10_000_000)); // skips k=2
        let t = GameTranscript {
            variant: GameVariant::Haw,
            beta: beta.clone(),
            b0,
            rounds: vec![
                GameRound {
                    alice: AliceMove::Neighborhood(h1),
                    bob: Some(b1),
                },
                GameRound {
                    alice: AliceMove::Neighborhood(h2),
                    bob: Some(b2),
                },
            ],
            status: GameStatus::Running,
        };
        let err = extract_restricted_subgame(&t, &beta).unwrap_err();
        assert!(matches!(err, Error::ExtractionGap(_)), "{err}");
    }

    #[test]
    fn potential_game_empty_families_walk_the_leftmost_chain() {
        // With nothing blocked the support player descends to the
        // lexicographically smallest child every round; on the ternary tree
        // that is the leftmost interval, center (1/2) 3^-n.
        let mut tree = middle_thirds_tree(7);
        let beta = rat(1, 3);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        assert_eq!(b0, ball1(rat(1, 2), rat(1, 2)));
        let mut alice = EmptyAlice;
        let t = play(
            GameVariant::cantor(Real::one()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            6,
        )
        .unwrap();
        validate_transcript(&t).unwrap();
        assert_eq!(t.rounds.len(), 6);
        for (j, round) in t.rounds.iter().enumerate() {
            let b = round.bob.as_ref().unwrap();
            assert_eq!(b.center[0], rat(1, 2) * rat_pow(&rat(1, 3), j as i64 + 1));
        }
    }

    #[test]
    fn potential_game_blocked_child_pushes_bob_right() {
        // Blocking the left child ball forces the far child; the survivor
        // maximizing distance to the blocked center is the right one.
        let mut tree = middle_thirds_tree(4);
        let beta = rat(1, 3);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        let left_child = ball1(rat(1, 6), rat(1, 6));
        let mut alice = ScriptedAlice::new(vec![
            AliceMove::BallFamilies(vec![vec![left_child]]),
            AliceMove::BallFamilies(vec![]),
        ]);
        let t = play(
            GameVariant::cantor(Real::one()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            2,
        )
        .unwrap();
        validate_transcript(&t).unwrap();
        assert_eq!(t.rounds[0].bob.as_ref().unwrap().center[0], rat(5, 6));
        // The blocked center keeps repelling after its ball expires: under
        // 5/6 the grandchild farthest from 1/6 is 17/18, not the leftmost.
        assert_eq!(t.rounds[1].bob.as_ref().unwrap().center[0], rat(17, 18));
    }

    #[test]
    fn potential_game_all_children_blocked_defaults() {
        let mut tree = middle_thirds_tree(4);
        let beta = rat(1, 3);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        let both = vec![ball1(rat(1, 6), rat(1, 6)), ball1(rat(5, 6), rat(1, 6))];
        let mut alice = ScriptedAlice::new(vec![AliceMove::BallFamilies(vec![both])]);
        let t = play(
            GameVariant::cantor(Real::one()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            4,
        )
        .unwrap();
        assert_eq!(t.status, GameStatus::AliceWinsByDefault);
        assert_eq!(t.rounds.len(), 1);
        validate_transcript(&t).unwrap();
    }

    #[test]
    fn potential_game_budget_is_enforced() {
        // alpha = 0 allows one ball per family; two must be rejected.
        let mut tree = middle_thirds_tree(4);
        let beta = rat(1, 3);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        let both = vec![ball1(rat(1, 6), rat(1, 6)), ball1(rat(5, 6), rat(1, 6))];
        let mut alice = ScriptedAlice::new(vec![AliceMove::BallFamilies(vec![both])]);
        let err = play(
            GameVariant::cantor(Real::zero()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            4,
        )
        .unwrap_err();
        match err {
            Error::BudgetExceeded { n, i, count, .. } => {
                assert_eq!((n, i, count), (1, 0, 2));
            }
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn potential_game_descends_multiple_levels_per_round() {
        // Game ratio (1/3)^2 on the ternary tree: two levels per round.
        let mut tree = middle_thirds_tree(6);
        let beta = rat(1, 9);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        let mut alice = EmptyAlice;
        let t = play(
            GameVariant::cantor(Real::one()),
            beta.clone(),
            b0,
            &mut alice,
            &mut bob,
            3,
        )
        .unwrap();
        validate_transcript(&t).unwrap();
        for (j, round) in t.rounds.iter().enumerate() {
            let b = round.bob.as_ref().unwrap();
            assert_eq!(b.radius, rat_pow(&beta, j as i64 + 1) * rat(1, 2));
        }
    }

    #[test]
    fn scheduled_family_radii_are_checked() {
        let mut tree = middle_thirds_tree(4);
        let beta = rat(1, 3);
        let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        // Family 0 at round 1 must have radius beta * r0 = 1/6; 1/7 is out.
        let wrong = vec![ball1(rat(1, 6), rat(1, 7))];
        let mut alice = ScriptedAlice::new(vec![AliceMove::BallFamilies(vec![wrong])]);
        let err = play(
            GameVariant::cantor(Real::one()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IllegalMove { role: "alice", .. }), "{err}");
    }

    #[test]
    fn diffuse_player_stays_on_the_ternary_set() {
        // 25 rounds of the width-locked game on the ternary set oracle: all
        // reply centers are set points (interval endpoints of some level).
        let oracle = CantorDiffuseOracle::new();
        let beta = oracle.beta0(); // 1/20, the largest ratio the oracle covers
        let b0 = ball1(rat(1, 3), rat(1, 6));
        let mut alice = RandomAxisAlice::new(11);
        let mut bob = DiffuseBob::new(&oracle);
        let t = play(
            GameVariant::RestrictedHaw,
            beta.clone(),
            b0,
            &mut alice,
            &mut bob,
            25,
        )
        .unwrap();
        validate_transcript(&t).unwrap();
        assert_eq!(t.rounds.len(), 25);
        for round in &t.rounds {
            let c = &round.bob.as_ref().unwrap().center[0];
            let endpoints = cantor_endpoints_in(c, c, 160);
            assert_eq!(endpoints.len(), 1, "center {} is a set point", c);
        }
        // Final ball pins the outcome within the scheduled radius.
        let out = t.outcome_ball().unwrap();
        assert_eq!(out.radius, rat_pow(&beta, 25) * rat(1, 6));
    }

    #[test]
    fn diffuse_player_rejects_ratios_above_the_margin() {
        let oracle = CantorDiffuseOracle::new();
        let b0 = ball1(rat(1, 3), rat(1, 6));
        let mut alice = RandomAxisAlice::new(3);
        let mut bob = DiffuseBob::new(&oracle);
        let err = play(
            GameVariant::RestrictedHaw,
            rat(1, 10),
            b0,
            &mut alice,
            &mut bob,
            3,
        )
        .unwrap_err();
        assert!(err.to_string().contains("avoidance bound"), "{err}");
    }

    #[test]
    fn diffuse_player_on_a_lazily_built_tree() {
        // The same player works against the lazily materialized tree view
        // of the oracle set, so long games never need a prebuilt measure.
        let oracle = CantorDiffuseOracle::new();
        let root = CantorDiffuseOracle::standard_root();
        let bp = rat(1, 60);
        let mut lazy = LazyDiffuseTree::new(&oracle, root, Some(&bp)).unwrap();
        let beta = lazy.beta().clone(); // bp/2 = 1/120
        let mut bob = TreeBob::new(&mut lazy, vec![], &beta).unwrap();
        let b0 = bob.start_ball().unwrap();
        let mut alice = EmptyAlice;
        let t = play(
            GameVariant::cantor(Real::one()),
            beta,
            b0,
            &mut alice,
            &mut bob,
            2,
        )
        .unwrap();
        validate_transcript(&t).unwrap();
    }

    #[test]
    fn engine_and_validator_agree_on_random_games() {
        // Random legal plays in both hyperplane variants; every engine
        // output re-validates, and a corrupted copy does not.
        let beta = rat(1, 5);
        for seed in 0..500u64 {
            let variant = if seed % 2 == 0 {
                GameVariant::RestrictedHaw
            } else {
                GameVariant::Haw
            };
            let b0 = Ball::new(vec![rat(1, 2), rat(1, 3)], rat(1, 2)).unwrap();
            let mut alice = RandomAxisAlice::new(seed);
            let mut bob = match variant {
                GameVariant::Haw => GreedyBallBob::shrinking(rat(1, 4)),
                _ => GreedyBallBob::locked(),
            };
            let t = play(variant, beta.clone(), b0, &mut alice, &mut bob, 4).unwrap();
            validate_transcript(&t).unwrap();
            assert_eq!(t.rounds.len(), 4);

            if seed % 10 == 0 {
                let mut bad = t.clone();
                let last = bad.rounds.last_mut().unwrap();
                if let Some(b) = last.bob.as_mut() {
                    b.center[0] = &b.center[0] + rat_i(3);
                }
                bad.status = GameStatus::Running;
                assert!(validate_transcript(&bad).is_err());
            }
        }
    }

    #[test]
    fn engine_and_validator_agree_on_random_potential_games() {
        let mut tree = middle_thirds_tree(6);
        let beta = rat(1, 3);
        for seed in 0..100u64 {
            let mut bob = TreeBob::new(&mut tree, vec![], &beta).unwrap();
            let b0 = bob.start_ball().unwrap();
            let mut alice = RandomAxisAlice::new(seed);
            let t = play(
                GameVariant::cantor(Real::one()),
                beta.clone(),
                b0,
                &mut alice,
                &mut bob,
                5,
            )
            .unwrap();
            validate_transcript(&t).unwrap();
        }
    }

    #[test]
    fn transcripts_replay_bit_exactly() {
        // One transcript per variant, through serialize -> parse ->
        // serialize; parsing re-validates and the bytes are stable.
        let beta = rat(1, 5);
        let mut samples: Vec<GameTranscript> = Vec::new();

        let b0 = ball1(rat(1, 2), rat(1, 2));
        let mut alice = RandomAxisAlice::new(5);
        let mut bob = GreedyBallBob::locked();
        samples.push(
            play(
                GameVariant::RestrictedHaw,
                beta.clone(),
                b0.clone(),
                &mut alice,
                &mut bob,
                6,
            )
            .unwrap(),
        );

        samples.push(play_transformed_game(&beta, rat(1, 3), 8));

        let mut tree = middle_thirds_tree(5);
        let mut tbob = TreeBob::new(&mut tree, vec![], &rat(1, 3)).unwrap();
        let tb0 = tbob.start_ball().unwrap();
        let mut talice = RandomAxisAlice::new(9);
        samples.push(
            play(
                GameVariant::cantor(Real::one()),
                rat(1, 3),
                tb0,
                &mut talice,
                &mut tbob,
                4,
            )
            .unwrap(),
        );

        // A default-win record round-trips too.
        let mut dalice = Positional(CenterBlockingAlice {
            ratio: rat(2, 5),
            axis: 0,
        });
        let mut dbob = GreedyBallBob::locked();
        samples.push(
            play(
                GameVariant::RestrictedHaw,
                rat(2, 5),
                b0,
                &mut dalice,
                &mut dbob,
                3,
            )
            .unwrap(),
        );

        for t in &samples {
            let s1 = transcript_to_jsonl(t).unwrap();
            let back = transcript_from_jsonl(&s1).unwrap();
            assert_eq!(&back, t);
            let s2 = transcript_to_jsonl(&back).unwrap();
            assert_eq!(s1, s2, "serialization must be byte-stable");
        }

        // Corrupting a radius breaks replay validation.
        let s = transcript_to_jsonl(&samples[0]).unwrap();
        let needle = "\"radius\":\"1/10\"";
        assert!(s.contains(needle));
        let bad = s.replacen(needle, "\"radius\":\"1/11\"", 1);
        assert!(transcript_from_jsonl(&bad).is_err());
    }

    #[test]
    fn jsonl_structure_errors_are_reported() {
        let beta = rat(1, 5);
        let b0 = ball1(rat(1, 2), rat(1, 2));
        let mut alice = Positional(CenterBlockingAlice {
            ratio: beta.clone(),
            axis: 0,
        });
        let mut bob = GreedyBallBob::locked();
        let t = play(
            GameVariant::RestrictedHaw,
            beta,
            b0,
            &mut alice,
            &mut bob,
            2,
        )
        .unwrap();
        let s = transcript_to_jsonl(&t).unwrap();
        let lines: Vec<&str> = s.lines().collect();

        // Missing status line.
        let headless = lines[..lines.len() - 1].join("\n");
        assert!(transcript_from_jsonl(&headless).is_err());

        // Out-of-order rounds.
        let mut swapped = lines.clone();
        swapped.swap(1, 2);
        assert!(transcript_from_jsonl(&swapped.join("\n")).is_err());

        // Trailing content after the status line.
        let mut extra = lines.clone();
        extra.push(lines[1]);
        assert!(transcript_from_jsonl(&extra.join("\n")).is_err());
    }
}
