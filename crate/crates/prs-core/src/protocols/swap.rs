//! The SWAP test.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::StateVector;

/// Exact SWAP-test acceptance probability `(1 + |<a|b>|^2) / 2`.
pub fn swap_test_accept_prob(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(0.5 * (1.0 + a.inner(b)?.norm_sqr()))
}

/// One Bernoulli SWAP-test outcome with the exact acceptance probability.
pub fn swap_test_sample<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    rng: &mut R,
) -> Result<bool> {
    let p = swap_test_accept_prob(a, b)?;
    Ok(rng.random::<f64>() < p)
}
