//! Desk-scale numerical laboratory for pseudorandom quantum state families.
//!
//! The crate builds the candidate state families (random phase, binary phase,
//! random subset), the symmetric-subspace machinery needed to compare their
//! multi-copy moments against Haar moments, reflection-oracle simulation,
//! optimal-cloning experiments, and a private-key quantum money scheme, all
//! at sizes where exact dense computation and brute-force enumeration are
//! feasible.
//!
//! Module map:
//! - [`linalg`]: states, operators, tensor products, trace distance, Haar
//!   sampling.
//! - [`randfn`]: keyed PRF/PRP instantiations plus truly-random and
//!   exhaustive function oracles.
//! - [`states`]: the candidate state families and their generating circuits.
//! - [`symm`]: multiset basis, permutation operators, symmetric projector,
//!   reflection, Haar moments.
//! - [`moments`]: exact and sampled multi-copy moments, trace distances to
//!   Haar.
//! - [`protocols`]: SWAP tests, reflection-oracle simulation, cloning and
//!   distinguishing experiments.
//! - [`money`]: the private-key quantum money scheme and counterfeiting
//!   experiments.
//! - [`pru`]: candidate pseudorandom unitary ensembles and frame-potential
//!   diagnostics.
//! - [`report`], [`rng`], [`selftest`]: experiment reports, deterministic
//!   stream derivation, and the release-gate suite.

pub mod error;
pub mod linalg;
pub mod money;
pub mod moments;
pub mod protocols;
pub mod pru;
pub mod randfn;
pub mod report;
pub mod rng;
pub mod selftest;
pub mod states;
pub mod symm;

pub use error::{Error, Result};
