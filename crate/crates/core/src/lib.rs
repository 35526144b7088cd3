//! Online reactive planning with sensing actions for Büchi objectives in
//! partially observable two-player games.
//!
//! The pipeline: an [`arena::Arena`] and a deterministic Büchi automaton
//! ([`automata::Dba`]) form a product game, solved under complete
//! information by [`product::solve_buchi`]. At run time the system tracks a
//! [`observation::Belief`], plays the randomized progress strategy where it
//! is safe, and otherwise asks sensing queries chosen by
//! [`sensing::SensingPlanner`] until it is. [`executor::run`] drives the
//! loop against a simulated environment.

pub mod arena;
pub mod automata;
pub mod bitset;
pub mod error;
pub mod executor;
pub mod formula;
pub mod ids;
pub mod instance;
pub mod observation;
pub mod product;
pub mod random;
pub mod sensing;
pub mod strategy;
pub mod wumpus;

pub use error::ModelError;
pub use instance::Instance;

/// Action distribution with floating-point probabilities.
pub type ActionDistribution = strategy::ActionDistribution<f64>;
/// Action distribution with exact rational probabilities.
pub type ExactActionDistribution = strategy::ActionDistribution<num_rational::Rational64>;
