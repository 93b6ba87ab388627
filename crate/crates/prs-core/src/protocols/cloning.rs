//! The symmetric-projection (Werner) cloner and cloning experiments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, kron, pow_u128, sample_haar_state, tensor_power, DensityOperator,
    DomainParams, StateVector,
};
use crate::randfn::{sample_function, PrfKey};
use crate::report::{Check, ExperimentReport};
use crate::rng::derive_stream;
use crate::states::{function_phase_state, phase_state};
use crate::symm::{binomial_f64, sym_projector};

/// Parameters of one cloning experiment: `m` input copies cloned to `m' > m`.
#[derive(Clone, Copy, Debug)]
pub struct CloningConfig {
    pub dim: usize,
    pub copies_in: usize,
    pub copies_out: usize,
    pub trials: u64,
}

impl CloningConfig {
    pub fn new(dim: usize, copies_in: usize, copies_out: usize, trials: u64) -> Result<Self> {
        if copies_in == 0 || copies_in >= copies_out {
            return Err(Error::InvalidArgument(format!(
                "cloning needs 1 <= m < m', got m={copies_in}, m'={copies_out}"
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("need at least one trial".into()));
        }
        Ok(Self {
            dim,
            copies_in,
            copies_out,
            trials,
        })
    }
}

/// The optimal-for-Haar cloning channel
/// `C(rho) = kappa Pi_{m'} (rho (x) I^(x)(m'-m)) Pi_{m'}`, normalized per
/// input.
#[derive(Clone, Debug)]
pub struct WernerCloner {
    dim: usize,
    copies_in: usize,
    copies_out: usize,
    projector: DMatrix<Complex64>,
}

impl WernerCloner {
    pub fn new(dim: usize, copies_in: usize, copies_out: usize) -> Result<Self> {
        if copies_in == 0 || copies_in > copies_out {
            return Err(Error::InvalidArgument(format!(
                "cloner needs 1 <= m <= m', got m={copies_in}, m'={copies_out}"
            )));
        }
        check_mat_dim("Werner cloner projector", pow_u128(dim, copies_out))?;
        Ok(Self {
            dim,
            copies_in,
            copies_out,
            projector: sym_projector(dim, copies_out)?,
        })
    }

    pub fn copies_in(&self) -> usize {
        self.copies_in
    }

    pub fn copies_out(&self) -> usize {
        self.copies_out
    }

    /// Haar-average success probability `C(N+m-1,m) / C(N+m'-1,m')`.
    pub fn haar_average_success(&self) -> f64 {
        let n = self.dim as u64;
        binomial_f64(n + self.copies_in as u64 - 1, self.copies_in as u64)
            / binomial_f64(n + self.copies_out as u64 - 1, self.copies_out as u64)
    }

    /// Apply the channel to an `m`-copy input.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let in_dim = pow_u128(self.dim, self.copies_in);
        if rho.dim() as u128 != in_dim {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: in_dim as usize,
            });
        }
        let pad = self.dim.pow((self.copies_out - self.copies_in) as u32);
        let padded = kron(rho.mat(), &DMatrix::identity(pad, pad));
        let sandwiched = &self.projector * padded * &self.projector;
        let trace = sandwiched.trace().re;
        if trace < 1e-12 {
            return Err(Error::DegenerateInput(
                "input orthogonal to all symmetric extensions",
            ));
        }
        Ok(DensityOperator::from_mat_unchecked(
            sandwiched / Complex64::new(trace, 0.0),
        ))
    }

    /// Success probability `<psi^(x)m'| C((psi psi*)^(x)m) |psi^(x)m'>` for a
    /// pure single-copy input, without forming the dense channel output.
    ///
    /// The numerator collapses to 1, so this is `1 / tr((chi chi* (x) I) Pi)`
    /// with `chi = psi^(x)m`, computed from quadratic forms of the projector.
    pub fn pure_input_success(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: psi.dim(),
                right: self.dim,
            });
        }
        let chi = tensor_power(psi, self.copies_in)?;
        let pad = self.dim.pow((self.copies_out - self.copies_in) as u32);
        let block = chi.dim();
        let mut denom = 0.0;
        for j in 0..pad {
            // quadratic form <chi, e_j| Pi |chi, e_j>
            let mut acc = Complex64::ZERO;
            for a in 0..block {
                let ca = chi.amp(a).conj();
                if ca == Complex64::ZERO {
                    continue;
                }
                for b in 0..block {
                    acc += ca * self.projector[(a * pad + j, b * pad + j)] * chi.amp(b);
                }
            }
            denom += acc.re;
        }
        Ok(1.0 / denom)
    }

    /// Sample a pure two-copy output of the 1 -> 2 cloner applied to `phi`,
    /// using the rank-N unraveling `C(phi phi*) = sum_j p_j |w_j><w_j|` with
    /// `w_j ~ phi (x) e_j + e_j (x) phi`.
    pub fn sample_two_copy_output<R: Rng + ?Sized>(
        &self,
        phi: &StateVector,
        rng: &mut R,
    ) -> Result<StateVector> {
        if self.copies_in != 1 || self.copies_out != 2 {
            return Err(Error::InvalidArgument(
                "pure-output sampling is implemented for the 1 -> 2 cloner".into(),
            ));
        }
        if phi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: phi.dim(),
                right: self.dim,
            });
        }
        let n = self.dim;
        // p_j = (1 + |phi_j|^2) / (N + 1)
        let mut u: f64 = rng.random::<f64>() * (n as f64 + 1.0);
        let mut pick = n - 1;
        for j in 0..n {
            let w = 1.0 + phi.amp(j).norm_sqr();
            if u < w {
                pick = j;
                break;
            }
            u -= w;
        }
        let mut amps = nalgebra::DVector::zeros(n * n);
        for i in 0..n {
            amps[i * n + pick] += phi.amp(i);
            amps[pick * n + i] += phi.amp(i);
        }
        StateVector::normalized(amps)
    }
}

/// Which ensemble feeds the cloning experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloneSource {
    Haar,
    /// Random-phase states of truly random functions.
    PhaseIdeal,
    /// Random-phase states of keyed PRFs under fresh keys.
    PhaseKeyed,
}

impl std::fmt::Display for CloneSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CloneSource::Haar => write!(f, "haar"),
            CloneSource::PhaseIdeal => write!(f, "phase_ideal"),
            CloneSource::PhaseKeyed => write!(f, "phase_keyed"),
        }
    }
}

fn draw_source<R: Rng + ?Sized>(
    source: CloneSource,
    dim: usize,
    rng: &mut R,
) -> Result<StateVector> {
    match source {
        CloneSource::Haar => sample_haar_state(dim, rng),
        CloneSource::PhaseIdeal => function_phase_state(&sample_function(dim, rng)),
        CloneSource::PhaseKeyed => {
            if !dim.is_power_of_two() {
                return Err(Error::InvalidArgument(format!(
                    "keyed phase states need a power-of-two dimension, got {dim}"
                )));
            }
            let params = DomainParams::new(dim.trailing_zeros(), 1)?;
            phase_state(&PrfKey::random(rng), &params)
        }
    }
}

/// Which cloning strategy the experiment evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClonerKind {
    /// Symmetric-projection channel.
    Werner,
    /// Measure the first copy in the computational basis, emit `|x>^(x)m'`.
    MeasureAndPrepare,
    /// Keep the input copies, pad with `|0>` states.
    PadWithZero,
}

impl std::fmt::Display for ClonerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClonerKind::Werner => write!(f, "werner"),
            ClonerKind::MeasureAndPrepare => write!(f, "measure_prepare"),
            ClonerKind::PadWithZero => write!(f, "pad_zero"),
        }
    }
}

/// Estimate the expected cloning success
/// `E <(phi)^(x)m', C((phi)^(x)m)>` over the source ensemble.
pub fn cloning_experiment(
    source: CloneSource,
    cloner: ClonerKind,
    config: &CloningConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    let werner = match cloner {
        ClonerKind::Werner => Some(WernerCloner::new(
            config.dim,
            config.copies_in,
            config.copies_out,
        )?),
        _ => None,
    };
    let tag = format!("cloning-{source}-{cloner}");
    let values: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = derive_stream(seed, &tag, trial);
            let phi = draw_source(source, config.dim, &mut rng)?;
            let value = match cloner {
                ClonerKind::Werner => werner.as_ref().unwrap().pure_input_success(&phi)?,
                ClonerKind::MeasureAndPrepare => {
                    // Born-rule measurement of the first copy
                    let mut u: f64 = rng.random();
                    let mut outcome = config.dim - 1;
                    for x in 0..config.dim {
                        let p = phi.amp(x).norm_sqr();
                        if u < p {
                            outcome = x;
                            break;
                        }
                        u -= p;
                    }
                    phi.amp(outcome).norm_sqr().powi(config.copies_out as i32)
                }
                ClonerKind::PadWithZero => phi
                    .amp(0)
                    .norm_sqr()
                    .powi((config.copies_out - config.copies_in) as i32),
            };
            Ok(value)
        })
        .collect::<Result<Vec<_>>>()?;

    let trials = config.trials as f64;
    let mean = values.iter().sum::<f64>() / trials;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials - 1.0).max(1.0);
    let std_err = (var / trials).sqrt();

    let mut report = ExperimentReport::new("cloning", seed);
    report
        .param("source", source.to_string())
        .param("cloner", cloner.to_string())
        .param("dim", config.dim)
        .param("copies_in", config.copies_in)
        .param("copies_out", config.copies_out)
        .param("trials", config.trials);
    report.estimate("success", mean, Some(std_err));

    match cloner {
        ClonerKind::Werner => {
            let bound = werner.as_ref().unwrap().haar_average_success();
            report.estimate("haar_average_bound", bound, None);
            report.check(Check::within("success_matches_bound", mean, bound, 0.01));
        }
        ClonerKind::MeasureAndPrepare => {
            if source != CloneSource::Haar {
                // phase states have exactly |<phi|x>|^2 = 1/N
                let expected = (config.dim as f64).powi(-(config.copies_out as i32));
                report.estimate("analytic_success", expected, None);
                report.check(Check::within(
                    "success_matches_overlap_structure",
                    mean,
                    expected,
                    3.0 * std_err + 1e-12,
                ));
            }
        }
        ClonerKind::PadWithZero => {
            if source != CloneSource::Haar {
                let expected = (config.dim as f64)
                    .powi(-((config.copies_out - config.copies_in) as i32));
                report.estimate("analytic_success", expected, None);
                report.check(Check::within(
                    "success_matches_overlap_structure",
                    mean,
                    expected,
                    3.0 * std_err + 1e-12,
                ));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_distance;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_cloner_fixes_symmetric_inputs() {
        let mut rng = derive_stream(71, "cloning-test-id", 0);
        let cloner = WernerCloner::new(2, 2, 2).unwrap();
        let psi = sample_haar_state(2, &mut rng).unwrap();
        let two = tensor_power(&psi, 2).unwrap();
        let rho = DensityOperator::from_pure(&two);
        let out = cloner.apply(&rho).unwrap();
        assert!(trace_distance(&out, &rho).unwrap() <= 1e-10);
        let overlap = out.expectation(&two).unwrap();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_input_is_rejected() {
        // the antisymmetric singlet has no symmetric extension
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = StateVector::from_slice(&[
            Complex64::ZERO,
            Complex64::new(r, 0.0),
            Complex64::new(-r, 0.0),
            Complex64::ZERO,
        ])
        .unwrap();
        let cloner = WernerCloner::new(2, 2, 2).unwrap();
        assert!(matches!(
            cloner.apply(&DensityOperator::from_pure(&singlet)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn pure_success_agrees_with_the_dense_channel() {
        let mut rng = derive_stream(72, "cloning-test-dense", 0);
        for &(dim, m, mp) in &[(2usize, 1usize, 2usize), (4, 2, 3), (3, 1, 3)] {
            let cloner = WernerCloner::new(dim, m, mp).unwrap();
            let psi = sample_haar_state(dim, &mut rng).unwrap();
            let rho_in = DensityOperator::from_pure(&tensor_power(&psi, m).unwrap());
            let out = cloner.apply(&rho_in).unwrap();
            let target = tensor_power(&psi, mp).unwrap();
            let dense = out.expectation(&target).unwrap();
            let fast = cloner.pure_input_success(&psi).unwrap();
            assert_abs_diff_eq!(dense, fast, epsilon = 1e-10);
        }
    }

    #[test]
    fn werner_output_is_a_valid_symmetric_state() {
        let mut rng = derive_stream(75, "cloning-test-valid", 0);
        let cloner = WernerCloner::new(3, 1, 2).unwrap();
        let psi = sample_haar_state(3, &mut rng).unwrap();
        let out = cloner.apply(&DensityOperator::from_pure(&psi)).unwrap();
        out.validate().unwrap();
        // supported on the symmetric subspace
        let proj = crate::symm::sym_projector(3, 2).unwrap();
        let id = DMatrix::<Complex64>::identity(9, 9);
        let complement = &id - &proj;
        let residual = &complement * out.mat() * &complement;
        assert!(crate::linalg::max_abs_entry(&residual) <= 1e-12);
    }

    #[test]
    fn werner_success_is_input_independent_at_the_haar_bound() {
        let mut rng = derive_stream(73, "cloning-test-covariant", 0);
        let cloner = WernerCloner::new(4, 2, 3).unwrap();
        let bound = cloner.haar_average_success();
        assert_abs_diff_eq!(bound, 0.5, epsilon = 1e-12);
        for _ in 0..10 {
            let psi = sample_haar_state(4, &mut rng).unwrap();
            assert_abs_diff_eq!(
                cloner.pure_input_success(&psi).unwrap(),
                bound,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn two_copy_unraveling_reproduces_the_channel_output() {
        let mut rng = derive_stream(74, "cloning-test-unravel", 0);
        let cloner = WernerCloner::new(2, 1, 2).unwrap();
        let phi = sample_haar_state(2, &mut rng).unwrap();
        let exact = cloner.apply(&DensityOperator::from_pure(&phi)).unwrap();
        let trials = 20_000;
        let mut acc = DMatrix::<Complex64>::zeros(4, 4);
        for _ in 0..trials {
            let w = cloner.sample_two_copy_output(&phi, &mut rng).unwrap();
            acc += w.to_density().mat();
        }
        acc /= Complex64::new(trials as f64, 0.0);
        let sampled = DensityOperator::from_mat_unchecked(acc);
        assert!(trace_distance(&sampled, &exact).unwrap() <= 0.02);
    }

    #[test]
    fn block_swap_test_detects_cloning_success() {
        // the cloner-to-distinguisher reduction: SWAP test between the
        // cloner's two-copy output block and a fresh two-copy block accepts
        // with probability (1 + success)/2
        let mut rng = derive_stream(76, "cloning-test-swap", 0);
        let cloner = WernerCloner::new(4, 1, 2).unwrap();
        let trials = 20_000;
        let mut accepts = 0u64;
        for _ in 0..trials {
            let psi = sample_haar_state(4, &mut rng).unwrap();
            let output_block = cloner.sample_two_copy_output(&psi, &mut rng).unwrap();
            let fresh_block = tensor_power(&psi, 2).unwrap();
            if crate::protocols::swap_test_sample(&output_block, &fresh_block, &mut rng).unwrap()
            {
                accepts += 1;
            }
        }
        let observed = accepts as f64 / trials as f64;
        let expected = 0.5 * (1.0 + cloner.haar_average_success());
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (observed - expected).abs() <= 4.0 * sigma,
            "accept rate {observed}, expected {expected}"
        );
    }

    #[test]
    fn haar_average_success_examples() {
        let examples = [
            ((2usize, 1usize, 2usize), 2.0 / 3.0),
            ((4, 2, 3), 0.5),
            ((16, 1, 2), 16.0 / 136.0),
        ];
        for ((dim, m, mp), expected) in examples {
            let config = CloningConfig::new(dim, m, mp, 10_000).unwrap();
            let report = cloning_experiment(CloneSource::Haar, ClonerKind::Werner, &config, 7)
                .unwrap();
            let mean = report.estimate_value("success").unwrap();
            assert_abs_diff_eq!(mean, expected, epsilon = 0.01);
            assert!(report.passed());
        }
    }

    #[test]
    fn measure_and_prepare_success_for_phase_states() {
        let config = CloningConfig::new(16, 1, 2, 20_000).unwrap();
        let report = cloning_experiment(
            CloneSource::PhaseIdeal,
            ClonerKind::MeasureAndPrepare,
            &config,
            8,
        )
        .unwrap();
        let mean = report.estimate_value("success").unwrap();
        assert_abs_diff_eq!(mean, 1.0 / 256.0, epsilon = 1e-10);
        assert!(report.passed());
    }

    #[test]
    fn pad_with_zero_success_for_phase_states() {
        let config = CloningConfig::new(16, 1, 2, 20_000).unwrap();
        let report =
            cloning_experiment(CloneSource::PhaseKeyed, ClonerKind::PadWithZero, &config, 9)
                .unwrap();
        let mean = report.estimate_value("success").unwrap();
        assert_abs_diff_eq!(mean, 1.0 / 16.0, epsilon = 1e-10);
        assert!(report.passed());
    }

    #[test]
    fn config_rejects_non_expanding_clones() {
        assert!(CloningConfig::new(4, 2, 2, 100).is_err());
        assert!(CloningConfig::new(4, 0, 2, 100).is_err());
    }
}
