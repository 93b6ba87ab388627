//! Distinguisher harnesses: estimate the advantage of copy-consuming
//! strategies between two state ensembles.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sample_haar_state, DomainParams, StateVector};
use crate::moments::phase_moment_distance;
use crate::randfn::{function_count, sample_function, PrfKey, FUNCTION_ENUM_BUDGET};
use crate::report::{Check, ExperimentReport};
use crate::rng::derive_stream;
use crate::states::{function_phase_state, phase_state};
use crate::symm::{product_state_sym_coords, sym_basis_indices};

/// An ensemble handing the distinguisher `m` copies of one drawn state.
#[derive(Clone, Debug)]
pub enum StateSource {
    Haar { dim: usize },
    /// Random-phase states of truly random functions.
    PhaseIdeal { qubits: u32 },
    /// Random-phase states of keyed PRFs under fresh keys.
    PhaseKeyed { qubits: u32 },
    /// One fixed state every time.
    Fixed(StateVector),
}

impl StateSource {
    pub fn dim(&self) -> usize {
        match self {
            StateSource::Haar { dim } => *dim,
            StateSource::PhaseIdeal { qubits } | StateSource::PhaseKeyed { qubits } => {
                1usize << qubits
            }
            StateSource::Fixed(state) => state.dim(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StateSource::Haar { .. } => "haar",
            StateSource::PhaseIdeal { .. } => "phase_ideal",
            StateSource::PhaseKeyed { .. } => "phase_keyed",
            StateSource::Fixed(_) => "fixed",
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StateVector> {
        match self {
            StateSource::Haar { dim } => sample_haar_state(*dim, rng),
            StateSource::PhaseIdeal { qubits } => {
                function_phase_state(&sample_function(1usize << qubits, rng))
            }
            StateSource::PhaseKeyed { qubits } => {
                let params = DomainParams::new(*qubits, 1)?;
                phase_state(&PrfKey::random(rng), &params)
            }
            StateSource::Fixed(state) => Ok(state.clone()),
        }
    }
}

/// Copy-consuming one-bit strategies.
#[derive(Clone, Debug)]
pub enum DistinguishStrategy {
    /// SWAP test between the first two copies (collision test).
    SwapPairs,
    /// SWAP test between the first copy and a fixed reference state.
    SwapReference(StateVector),
    /// Measure the projector onto the symmetric multiset basis; with
    /// `distinct_only` restrict to the all-distinct multisets (the
    /// moment-optimal block).
    SymProjection { distinct_only: bool },
}

impl DistinguishStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            DistinguishStrategy::SwapPairs => "swap_pairs",
            DistinguishStrategy::SwapReference(_) => "swap_reference",
            DistinguishStrategy::SymProjection {
                distinct_only: true,
            } => "sym_projection_distinct",
            DistinguishStrategy::SymProjection { .. } => "sym_projection",
        }
    }

    /// The exact Bernoulli acceptance parameter on `psi^(x)m` input.
    pub fn accept_probability(&self, psi: &StateVector, copies: usize) -> Result<f64> {
        match self {
            DistinguishStrategy::SwapPairs => {
                if copies < 2 {
                    return Err(Error::InvalidArgument(
                        "the collision strategy needs m >= 2 copies".into(),
                    ));
                }
                super::swap::swap_test_accept_prob(psi, psi)
            }
            DistinguishStrategy::SwapReference(reference) => {
                super::swap::swap_test_accept_prob(reference, psi)
            }
            DistinguishStrategy::SymProjection { distinct_only } => {
                let basis = sym_basis_indices(psi.dim(), copies)?;
                let coords = product_state_sym_coords(psi, &basis);
                let mut p = 0.0;
                for (pos, x) in basis.indices().iter().enumerate() {
                    if !distinct_only || x.is_all_distinct() {
                        p += coords[pos].norm_sqr();
                    }
                }
                Ok(p.min(1.0))
            }
        }
    }
}

/// Estimate `|P(strategy accepts a) - P(strategy accepts b)|` with binomial
/// error bars.
pub fn distinguisher_advantage(
    source_a: &StateSource,
    source_b: &StateSource,
    strategy: &DistinguishStrategy,
    copies: usize,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if source_a.dim() != source_b.dim() {
        return Err(Error::DimensionMismatch {
            left: source_a.dim(),
            right: source_b.dim(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let run = |source: &StateSource, tag: &str| -> Result<u64> {
        (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<u64> {
                let mut rng = derive_stream(seed, tag, trial);
                let psi = source.draw(&mut rng)?;
                let p = strategy.accept_probability(&psi, copies)?;
                Ok(u64::from(rng.random::<f64>() < p))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let accepts_a = run(source_a, "distinguish-a")?;
    let accepts_b = run(source_b, "distinguish-b")?;
    let t = trials as f64;
    let pa = accepts_a as f64 / t;
    let pb = accepts_b as f64 / t;
    let advantage = (pa - pb).abs();
    let sigma = (pa * (1.0 - pa) / t + pb * (1.0 - pb) / t).sqrt();

    let mut report = ExperimentReport::new("distinguish", seed);
    report
        .param("source_a", source_a.label())
        .param("source_b", source_b.label())
        .param("strategy", strategy.label())
        .param("copies", copies)
        .param("trials", trials);
    report
        .estimate("accept_a", pa, Some((pa * (1.0 - pa) / t).sqrt()))
        .estimate("accept_b", pb, Some((pb * (1.0 - pb) / t).sqrt()))
        .estimate("advantage", advantage, Some(sigma));

    // the optimal advantage between the ideal phase ensemble and Haar is the
    // moment trace distance; assert the envelope whenever it is computable
    let pair = (source_a.label(), source_b.label());
    if (pair == ("phase_ideal", "haar") || pair == ("haar", "phase_ideal"))
        && function_count(source_a.dim()) <= FUNCTION_ENUM_BUDGET
    {
        let dist = phase_moment_distance(source_a.dim(), copies)?.distance;
        report.estimate("moment_distance", dist, None);
        report.check(Check::le(
            "advantage_within_moment_envelope",
            advantage,
            dist + 3.0 * sigma,
        ));
    }
    Ok(report)
}
