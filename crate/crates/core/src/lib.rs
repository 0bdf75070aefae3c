//! Algorithmic-information models of evolution.
//!
//! Self-delimiting codes, exact sparse dyadic arithmetic, a toy
//! prefix-free machine with computable lower bounds on its halting
//! probability, Omega oracles, mutation-selection runners, quantum
//! variants of the model, and circuit-based network complexity.

pub mod dyadic;
pub mod prefix_code;
pub mod rng;
pub mod toy_machine;
pub mod oracle;
pub mod evolution;
pub mod quantum;
pub mod analysis;
pub mod netcomplexity;
