//! Linear congestion games with altruistic social contexts.
//!
//! The crate models games whose players weigh each other's costs through a
//! non-negative matrix `Γ`, and provides exact tools to study them: closed-form
//! deviation deltas, exact potential functions, pure Nash enumeration,
//! improvement dynamics with cycle detection, price of anarchy and stability,
//! primal-dual certificate checking, and generators for the classic
//! lower-bound constructions.
//!
//! All arithmetic is exact (see [`numerics`]).

pub mod certificates;
pub mod context;
pub mod equilibria;
pub mod game;
pub mod gamefile;
pub mod instances;
pub mod lp;
pub mod numerics;
pub mod potential;
pub mod verify;

pub use context::{AltruismVector, ContextFlags, SocialContext};
pub use equilibria::{AnalysisReport, DynamicsOutcome, Policy, RatioOutcome};
pub use game::{Game, Latency, Profile, Strategy};
pub use numerics::{qeval, qsign, rat, QuadExt, Rational};
