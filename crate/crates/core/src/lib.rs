//! Discrete-event simulation of parallel evolutionary algorithms in which only
//! fitness evaluations consume (simulated) time.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - the domain types ([`Genotype`], [`Individual`], [`Population`]) and a
//!   seeded, splittable [`RandomSource`];
//! - benchmark problems with genotype-dependent evaluation times
//!   ([`problems`]);
//! - the simulator ([`engine`]), which drives synchronous (generational
//!   barrier) and asynchronous (self-rescheduling) task schedules;
//! - three algorithms expressed as simulator tasks: a simple GA ([`ga`]),
//!   ECGA ([`ecga`]) and GOMEA ([`gomea`]);
//! - population-size searches ([`search`]) and rank statistics ([`stats`])
//!   used to compare configurations.
//!
//! IO, the CLI and the experiment matrix live in the companion `evotime` crate.
#![no_std]

extern crate alloc;

pub mod algorithm;
pub mod ecga;
pub mod engine;
mod error;
pub mod ga;
mod genotype;
pub mod gomea;
pub mod problems;
mod rng;
pub mod search;
pub mod stats;

pub use algorithm::{AlgorithmId, RunConfig};
pub use engine::{Mode, Outcome, RunStats, Termination};
pub use error::{Error, Result};
pub use genotype::{hamming_normalized, population_converged, Genotype, Individual, Population};
pub use problems::{ProblemInstance, TimeModel};
pub use rng::RandomSource;
