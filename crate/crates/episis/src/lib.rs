//! Networked SIS epidemics with awareness-driven social distancing.
//!
//! The crate simulates two discrete-time Markov chains over the infection
//! states of a contact network — a benchmark SIS chain and a distancing
//! chain in which nodes scale down their interactions as they learn about
//! the epidemic from a social network and a global broadcast — and the
//! analysis tooling around them:
//!
//! * [`graph`]: random-graph generators, social-network rewiring, spectral
//!   radius, edge-list I/O;
//! * [`dynamics`]: per-node transition laws, synchronous simulation, exact
//!   transition matrices and absorption times at small node counts;
//! * [`mfa`]: mean-field maps on `[0,1]^n`, fixed-point iteration and the
//!   spectral threshold;
//! * [`coupling`]: a monotone coupling of the two chains producing ordered
//!   path pairs, exact marginal verification and expectation-gap
//!   estimates;
//! * [`metrics`]: increasing path functionals (absorption time, social
//!   cost, epidemic spread) with monotonicity certification.
//!
//! Every stochastic entry point takes an explicit seed or a [`rng::SimRng`]
//! stream, so identical inputs reproduce identical results bit for bit.

#![forbid(unsafe_code)]

pub mod coupling;
pub mod dynamics;
pub mod graph;
pub mod metrics;
pub mod mfa;
pub mod rng;

pub use dynamics::{ChainKind, EpidemicParams, EpidemicState, Networks, SamplePath};
pub use graph::Graph;
