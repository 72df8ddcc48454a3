//! Iterated prisoner's dilemma analysis: memory-one Markov chains,
//! zero-determinant strategies, replicator dynamics and seeded tournaments.
//!
//! The `parallel` feature (on by default) runs tournaments and batch
//! evaluations on rayon; without it everything runs on one thread with
//! identical results.

pub mod game;
pub mod lineup;
pub mod markov;
pub mod par;
pub mod players;
pub mod replicator;
pub mod tournament;
pub mod zd;

pub use game::{payoff, Action, DonationParams, GameError, GameParams, Outcome};
pub use markov::{expected_scores, MarkovError, ScorePair, StrategyVector};
pub use par::Execution;
pub use players::{FirstMovePolicy, PlayerSpec};
pub use tournament::{MatchConfig, MatchLength, PlayerEntry, TournamentConfig};
