//! Protocol-level building blocks and experiments: SWAP tests, reflection
//! oracles and their multi-copy simulation, the optimal cloner and cloning
//! bounds, and distinguisher harnesses.

mod cloning;
mod distinguish;
mod reflect;
mod swap;

pub use cloning::{
    cloning_experiment, CloneSource, ClonerKind, CloningConfig, WernerCloner,
};
pub use distinguish::{distinguisher_advantage, DistinguishStrategy, StateSource};
pub use reflect::{
    reflection_oracle, reflection_query, reflection_query_dense, simulate_reflection_algorithm,
    simulate_reflection_algorithm_dense, theta_reflection_matrix, DenseReflectionOutcome,
    ReflectionAlgOutcome, ReflectionQueryOutcome, ReflectionSimConfig, TargetMode,
};
pub use swap::{swap_test_accept_prob, swap_test_sample};
