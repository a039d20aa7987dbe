//! Stochastic constraint programming toolkit.
//!
//! Models mix staged integer decision variables with staged stochastic
//! variables drawn from declared finite distributions, under hard and chance
//! constraints and one optional objective (expected / worst / best / spread).
//! The crate provides:
//!
//! - a parser for the `.scsp` modeling language ([`parser`]),
//! - scenario-tree expansion with exact rational probabilities ([`scenario`]),
//! - compilation into a conventional finite-domain CSP ([`compile`], [`flat`]),
//! - a bounds-propagation branch-and-bound solver ([`solver`]),
//! - a brute-force policy oracle for cross-checking ([`oracle`]),
//! - end-to-end solve/verify pipelines ([`pipeline`]).
//!
//! All probability arithmetic is exact ([`rational`]); there is no floating
//! point anywhere in the semantics. Compilation and the oracle have
//! data-parallel inner loops (enabled by the default `parallel` feature)
//! whose merged results are bit-identical to the sequential path.

pub mod compile;
pub mod diag;
pub mod exec;
pub mod flat;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod rational;
pub mod scenario;
pub mod solver;

pub use diag::Diagnostic;
pub use exec::ExecMode;
pub use model::StochasticModel;
pub use rational::Rational;
