//! Numerically certified construction of weighted badly approximable points
//! on fractal supports.
//!
//! The library provides, bottom up:
//! - exact-exponent arbitrary-precision scalars ([`precision::Real`]) and a
//!   wide-exponent float ([`fexp::F64x`]) for bound arithmetic;
//! - weight vectors and the diagonal/unipotent group elements driving the
//!   lattice dynamics ([`weights`], [`group`]);
//! - wedge algebra for sublattice covolumes ([`wedge`]);
//! - exact rational geometry ([`geom`]);
//! - certified shortest-vector computation and lattice membership tests
//!   ([`lattice`], [`svp`]);
//! - Diophantine badness constants and flow orbits ([`diophantine`]);
//! - tree measures with verified regularity and decay ([`fractal`]);
//! - game engines with exact transcript validation ([`games`]);
//! - the winning-strategy construction and its certificates ([`strategy`]).

pub mod diophantine;
pub mod error;
pub mod fexp;
pub mod fractal;
pub mod games;
pub mod geom;
pub mod group;
pub mod lattice;
pub mod precision;
pub mod rational;
pub mod strategy;
pub mod svp;
pub mod wedge;
pub mod weights;

pub use diophantine::{BadnessReport, Coord, CorrespondenceReport, OrbitReport};
pub use error::{Error, Result};
pub use fractal::{
    build_measure_from_diffuse, efficient_cover, AhlforsReport, BallTree, CantorDiffuseOracle,
    CantorProductDiffuseOracle, DecayReport, DiffuseOracle, LazyDiffuseTree, TreeMeasure,
};
pub use games::{
    extract_restricted_subgame, play, positional_transform, transcript_from_jsonl,
    transcript_to_jsonl, validate_transcript, AliceMove, AliceStrategy, BobStrategy, DiffuseBob,
    GameStatus, GameTranscript, GameVariant, GreedyBallBob, TreeBob,
};
pub use geom::{Ball, HyperplaneNbhd};
pub use group::{DiagonalElement, FactoredGroupElement, UnipotentElement};
pub use lattice::{InKEpsReport, Lattice, ShortVectorResult, SystoleCache};
pub use precision::{Real, DEFAULT_PRECISION};
pub use strategy::{
    alice_move, audit_legality, closed_form_cprime, derive_params, derive_params_with_policy,
    diag_log_rows, dangerous_spec, is_dangerous, keylemma_sweep, outcome_certificate, run_badw,
    validate_setup, verify_keylemma_empirical, BadwAlice, BadwRunConfig, BadwRunReport,
    BadwRunResult, DangerousSetSpec, GammaSweepReport, KeyLemmaQuintuple, KeyLemmaReport,
    LegalityReport, MPolicy, OutcomeCertificate, ParamsEcho, StrategyHistory, StrategyParams,
};
pub use weights::WeightVector;
