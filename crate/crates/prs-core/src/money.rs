//! The private-key quantum money scheme built on the random-phase family,
//! plus counterfeiting experiments.
//!
//! Bank notes are bare `|phi_k>` states with no serial numbers. Verification
//! is the projective measurement `{|phi_k><phi_k|, I - |phi_k><phi_k|}`; an
//! auxiliary-qubit circuit path (controlled reflection oracle plus an X
//! measurement) is implemented as an independent route to the same outcome
//! probabilities. Count applies verification to each note subsystem in list
//! order, updating the held joint state after every measurement.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, check_vec_len, kron, pow_u128, DensityOperator, DomainParams, StateVector,
};
use crate::protocols::{reflection_oracle, WernerCloner};
use crate::randfn::PrfKey;
use crate::report::{Check, ExperimentReport};
use crate::rng::derive_stream;
use crate::states::{phase_state, FamilyKind};

/// A bank note: the money state plus bookkeeping.
#[derive(Clone, Debug)]
pub struct Banknote {
    pub state: StateVector,
    pub family: FamilyKind,
    pub note_id: u64,
}

/// Outcome of verifying one alleged note.
#[derive(Clone, Debug)]
pub struct VerificationOutcome {
    pub accepted: bool,
    pub post_state: DensityOperator,
}

/// Sample a private key.
pub fn keygen<R: Rng + ?Sized>(rng: &mut R) -> PrfKey {
    PrfKey::random(rng)
}

/// Generate the bank note `|phi_k>` for a key.
pub fn bank(key: &PrfKey, params: &DomainParams) -> Result<Banknote> {
    Ok(Banknote {
        state: phase_state(key, params)?,
        family: FamilyKind::RandomPhase,
        note_id: 0,
    })
}

/// Exact acceptance probability `<phi_k| rho |phi_k>` (the query mode of
/// verification).
pub fn verify_accept_prob(
    key: &PrfKey,
    note: &DensityOperator,
    params: &DomainParams,
) -> Result<f64> {
    let phi = phase_state(key, params)?;
    if note.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: note.dim(),
            right: phi.dim(),
        });
    }
    note.expectation(&phi)
}

/// The same acceptance probability through the auxiliary-qubit circuit:
/// attach `(|0> + |1>)/sqrt(2)`, apply the reflection oracle controlled on
/// the auxiliary qubit, and measure the auxiliary qubit in the X basis. The
/// `|minus>` outcome is acceptance.
pub fn verify_accept_prob_aux(
    key: &PrfKey,
    note: &DensityOperator,
    params: &DomainParams,
) -> Result<f64> {
    let phi = phase_state(key, params)?;
    let dim = phi.dim();
    if note.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: note.dim(),
            right: dim,
        });
    }
    check_mat_dim("auxiliary-qubit verification", 2 * dim as u128)?;

    // aux (x) note, aux on the high-order index, prepared in |+><+| (x) rho
    let half = Complex64::new(0.5, 0.0);
    let plus = DMatrix::from_element(2, 2, half);
    let joint = kron(&plus, note.mat());

    // controlled reflection: |0><0| (x) I + |1><1| (x) O_phi
    let oracle = reflection_oracle(&phi);
    let mut controlled = DMatrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        controlled[(i, i)] = Complex64::ONE;
        for j in 0..dim {
            controlled[(dim + i, dim + j)] = oracle.mat()[(i, j)];
        }
    }
    let evolved = &controlled * joint * controlled.adjoint();

    // X measurement on the auxiliary qubit: project onto |-> (x) I
    let mut p_accept = Complex64::ZERO;
    for i in 0..dim {
        // <-,i| evolved |-,i> with |-> = (|0> - |1>)/sqrt(2)
        p_accept += half
            * (evolved[(i, i)] - evolved[(i, dim + i)] - evolved[(dim + i, i)]
                + evolved[(dim + i, dim + i)]);
    }
    Ok(p_accept.re)
}

/// Projective verification of an alleged note, with the post-measurement
/// state.
pub fn verify<R: Rng + ?Sized>(
    key: &PrfKey,
    note: &DensityOperator,
    params: &DomainParams,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let phi = phase_state(key, params)?;
    if note.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: note.dim(),
            right: phi.dim(),
        });
    }
    let p = note.expectation(&phi)?;
    let accepted = rng.random::<f64>() < p;
    let post_state = if accepted {
        DensityOperator::from_pure(&phi)
    } else {
        let dim = note.dim();
        let mut q = DMatrix::identity(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                q[(i, j)] -= phi.amp(i) * phi.amp(j).conj();
            }
        }
        let unnorm = &q * note.mat() * &q;
        let trace = unnorm.trace().re;
        if trace < 1e-14 {
            return Err(Error::DegenerateInput(
                "rejected a note with no reject component",
            ));
        }
        DensityOperator::from_mat_unchecked(unnorm / Complex64::new(trace, 0.0))
    };
    Ok(VerificationOutcome {
        accepted,
        post_state,
    })
}

/// A collection of alleged notes held as one joint state on `N^r`.
#[derive(Clone, Debug)]
pub enum JointNotes {
    Pure { state: StateVector, notes: usize },
    Mixed { state: DensityOperator, notes: usize },
}

impl JointNotes {
    pub fn notes(&self) -> usize {
        match self {
            JointNotes::Pure { notes, .. } | JointNotes::Mixed { notes, .. } => *notes,
        }
    }

    fn check_dims(&self, note_dim: usize) -> Result<()> {
        let expected = pow_u128(note_dim, self.notes());
        let actual = match self {
            JointNotes::Pure { state, .. } => state.dim() as u128,
            JointNotes::Mixed { state, .. } => state.dim() as u128,
        };
        if actual != expected {
            return Err(Error::DimensionMismatch {
                left: actual as usize,
                right: expected as usize,
            });
        }
        Ok(())
    }
}

/// Project register `slot` of a pure joint state onto `phi` (accept) or its
/// complement (reject); returns the outcome probability and the projected,
/// unnormalized amplitudes.
fn project_note_pure(
    amps: &DVector<Complex64>,
    phi: &StateVector,
    slot: usize,
    notes: usize,
    accept: bool,
) -> (f64, DVector<Complex64>) {
    let n = phi.dim();
    let stride = n.pow((notes - 1 - slot) as u32);
    let total = amps.len();
    let mut accept_part = DVector::<Complex64>::zeros(total);
    let mut p = 0.0;
    let outer = total / (stride * n);
    for hi in 0..outer {
        let base = hi * stride * n;
        for lo in 0..stride {
            let mut overlap = Complex64::ZERO;
            for d in 0..n {
                overlap += phi.amp(d).conj() * amps[base + d * stride + lo];
            }
            p += overlap.norm_sqr();
            if overlap != Complex64::ZERO {
                for d in 0..n {
                    accept_part[base + d * stride + lo] = phi.amp(d) * overlap;
                }
            }
        }
    }
    if accept {
        (p, accept_part)
    } else {
        (1.0 - p, amps - accept_part)
    }
}

/// Dense projector `I (x) .. (x) |phi><phi| (x) .. (x) I` acting on slot
/// `slot` of `notes` registers.
fn note_projector(phi: &StateVector, slot: usize, notes: usize) -> DMatrix<Complex64> {
    let n = phi.dim();
    let left = DMatrix::identity(n.pow(slot as u32), n.pow(slot as u32));
    let right = DMatrix::identity(
        n.pow((notes - 1 - slot) as u32),
        n.pow((notes - 1 - slot) as u32),
    );
    let p = phi.to_density();
    kron(&kron(&left, p.mat()), &right)
}

/// Sequentially verify each note subsystem in list order, updating the joint
/// state after every measurement; returns the number of accepts.
pub fn count<R: Rng + ?Sized>(
    key: &PrfKey,
    notes: &JointNotes,
    params: &DomainParams,
    rng: &mut R,
) -> Result<usize> {
    let phi = phase_state(key, params)?;
    notes.check_dims(phi.dim())?;
    let r = notes.notes();
    let mut accepted = 0usize;
    match notes {
        JointNotes::Pure { state, .. } => {
            let mut amps = state.amps().clone();
            for slot in 0..r {
                let (p_accept, _) = project_note_pure(&amps, &phi, slot, r, true);
                let accept = rng.random::<f64>() < p_accept;
                let (p, projected) = project_note_pure(&amps, &phi, slot, r, accept);
                if p < 1e-14 {
                    return Err(Error::DegenerateInput(
                        "measurement branch with vanishing probability",
                    ));
                }
                amps = projected / Complex64::new(p.sqrt(), 0.0);
                accepted += usize::from(accept);
            }
        }
        JointNotes::Mixed { state, .. } => {
            check_mat_dim("joint note state", state.dim() as u128)?;
            let mut rho = state.mat().clone();
            for slot in 0..r {
                let proj = note_projector(&phi, slot, r);
                let p_accept = (&proj * &rho).trace().re.clamp(0.0, 1.0);
                let accept = rng.random::<f64>() < p_accept;
                let (p, projected) = if accept {
                    (p_accept, &proj * &rho * &proj)
                } else {
                    let dim = rho.nrows();
                    let q = DMatrix::identity(dim, dim) - &proj;
                    (1.0 - p_accept, &q * &rho * &q)
                };
                if p < 1e-14 {
                    return Err(Error::DegenerateInput(
                        "measurement branch with vanishing probability",
                    ));
                }
                rho = projected / Complex64::new(p, 0.0);
                accepted += usize::from(accept);
            }
        }
    }
    Ok(accepted)
}

/// Brute-force joint-measurement oracle: the exact distribution of the
/// accept count over all `2^r` outcome patterns (the per-note projectors
/// commute, so this is also the sequential distribution in any order).
pub fn count_distribution_oracle(
    key: &PrfKey,
    notes: &JointNotes,
    params: &DomainParams,
) -> Result<Vec<f64>> {
    let phi = phase_state(key, params)?;
    notes.check_dims(phi.dim())?;
    let r = notes.notes();
    let mut dist = vec![0.0; r + 1];
    match notes {
        JointNotes::Pure { state, .. } => {
            for pattern in 0..(1u32 << r) {
                let mut amps = state.amps().clone();
                for slot in 0..r {
                    let accept = (pattern >> slot) & 1 == 1;
                    let (_, projected) = project_note_pure(&amps, &phi, slot, r, accept);
                    amps = projected;
                }
                dist[pattern.count_ones() as usize] += amps.norm_squared();
            }
        }
        JointNotes::Mixed { state, .. } => {
            for pattern in 0..(1u32 << r) {
                let mut op = DMatrix::identity(state.dim(), state.dim());
                for slot in 0..r {
                    let proj = note_projector(&phi, slot, r);
                    let factor = if (pattern >> slot) & 1 == 1 {
                        proj
                    } else {
                        DMatrix::identity(state.dim(), state.dim()) - proj
                    };
                    op = factor * op;
                }
                let weight = (&op * state.mat() * op.adjoint()).trace().re;
                dist[pattern.count_ones() as usize] += weight.max(0.0);
            }
        }
    }
    Ok(dist)
}

/// Built-in counterfeiting strategies mapping `q` honest notes to `r`
/// alleged notes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterfeitStrategy {
    /// Return the honest notes unchanged (`r = q`).
    PassThrough,
    /// Measure the first note in the computational basis, emit `r` copies of
    /// the outcome.
    MeasureFabricate,
    /// Keep the honest notes, pad with `|0>` states.
    PadJunk,
    /// Apply the symmetric-projection cloner to one note (`q = 1, r = 2`).
    WernerClone,
}

impl std::fmt::Display for CounterfeitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CounterfeitStrategy::PassThrough => write!(f, "pass_through"),
            CounterfeitStrategy::MeasureFabricate => write!(f, "measure_fabricate"),
            CounterfeitStrategy::PadJunk => write!(f, "pad_junk"),
            CounterfeitStrategy::WernerClone => write!(f, "werner_clone"),
        }
    }
}

fn forge<R: Rng + ?Sized>(
    strategy: CounterfeitStrategy,
    note: &StateVector,
    q: usize,
    r: usize,
    cloner: Option<&WernerCloner>,
    rng: &mut R,
) -> Result<JointNotes> {
    let n = note.dim();
    check_vec_len("joint forged notes", pow_u128(n, r))?;
    let state = match strategy {
        CounterfeitStrategy::PassThrough => {
            if r != q {
                return Err(Error::InvalidArgument(
                    "pass-through emits exactly the q notes it received".into(),
                ));
            }
            crate::linalg::tensor_power(note, q)?
        }
        CounterfeitStrategy::MeasureFabricate => {
            let mut u: f64 = rng.random();
            let mut outcome = n - 1;
            for x in 0..n {
                let p = note.amp(x).norm_sqr();
                if u < p {
                    outcome = x;
                    break;
                }
                u -= p;
            }
            crate::linalg::tensor_power(&StateVector::basis_state(n, outcome)?, r)?
        }
        CounterfeitStrategy::PadJunk => {
            if r <= q {
                return Err(Error::InvalidArgument("padding needs r > q".into()));
            }
            let honest = crate::linalg::tensor_power(note, q)?;
            let pad = crate::linalg::tensor_power(&StateVector::basis_state(n, 0)?, r - q)?;
            honest.tensor(&pad)?
        }
        CounterfeitStrategy::WernerClone => {
            if q != 1 || r != 2 {
                return Err(Error::InvalidArgument(
                    "the cloning attack is implemented for q = 1, r = 2".into(),
                ));
            }
            cloner
                .expect("cloner prepared for the werner attack")
                .sample_two_copy_output(note, rng)?
        }
    };
    Ok(JointNotes::Pure { state, notes: r })
}

/// Estimate `Pr[count(k, strategy(notes^q)) > q]` over fresh keys.
pub fn counterfeit_experiment(
    strategy: CounterfeitStrategy,
    q: usize,
    r: usize,
    params: &DomainParams,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if q == 0 || r < q {
        return Err(Error::InvalidArgument(
            "counterfeiting needs q >= 1 and r >= q".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let n = params.domain_size() as usize;
    let cloner = match strategy {
        CounterfeitStrategy::WernerClone => Some(WernerCloner::new(n, 1, 2)?),
        _ => None,
    };
    let tag = format!("counterfeit-{strategy}");
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let mut rng = derive_stream(seed, &tag, trial);
            let key = keygen(&mut rng);
            let note = bank(&key, params)?;
            let forged = forge(strategy, &note.state, q, r, cloner.as_ref(), &mut rng)?;
            let c = count(&key, &forged, params, &mut rng)?;
            Ok(u64::from(c > q))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let t = trials as f64;
    let mean = successes as f64 / t;
    let std_err = (mean * (1.0 - mean) / t).sqrt();

    let mut report = ExperimentReport::new("counterfeit", seed);
    report
        .param("strategy", strategy.to_string())
        .param("qubits", params.qubits())
        .param("q", q)
        .param("r", r)
        .param("trials", trials);
    report.estimate("success", mean, Some(std_err));
    report.note("count verifies notes in list order with a non-adaptive counterfeiter");

    match strategy {
        CounterfeitStrategy::PassThrough => {
            report.check(Check::within("success_is_zero", mean, 0.0, 0.0));
        }
        CounterfeitStrategy::MeasureFabricate => {
            if q == 1 && r == 2 {
                let p = 1.0 / (n as f64 * n as f64);
                let sigma = (p * (1.0 - p) / t).sqrt();
                report.estimate("analytic_success", p, None);
                report.check(Check::within(
                    "success_matches_independent_accepts",
                    mean,
                    p,
                    3.0 * sigma,
                ));
            }
        }
        CounterfeitStrategy::PadJunk => {
            if r == q + 1 {
                let p = 1.0 / n as f64;
                let sigma = (p * (1.0 - p) / t).sqrt();
                report.estimate("analytic_success", p, None);
                report.check(Check::within(
                    "success_matches_pad_accept_rate",
                    mean,
                    p,
                    3.0 * sigma,
                ));
            }
        }
        CounterfeitStrategy::WernerClone => {
            let bound = cloner.as_ref().unwrap().haar_average_success();
            let sigma = (bound * (1.0 - bound) / t).sqrt();
            report.estimate("cloning_bound", bound, None);
            report.check(Check::within(
                "success_matches_cloning_bound",
                mean,
                bound,
                3.0 * sigma,
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params16() -> DomainParams {
        DomainParams::new(4, 1).unwrap()
    }

    #[test]
    fn keygen_is_deterministic_per_stream_and_distinct_across_streams() {
        let k1 = keygen(&mut derive_stream(81, "money-test", 0));
        let k2 = keygen(&mut derive_stream(81, "money-test", 0));
        let k3 = keygen(&mut derive_stream(81, "money-test", 1));
        assert_eq!(k1, k2);
        assert_ne!(k1, k3);
        assert_eq!(k1.as_bytes().len(), 32);
    }

    #[test]
    fn bank_notes_reproduce_the_state_family() {
        let params = params16();
        let key = keygen(&mut derive_stream(82, "money-test-bank", 0));
        let note = bank(&key, &params).unwrap();
        let again = bank(&key, &params).unwrap();
        assert_eq!(note.state.amps(), again.state.amps());
        let direct = phase_state(&key, &params).unwrap();
        assert_eq!(note.state.amps(), direct.amps());
        assert_abs_diff_eq!(note.state.amps().norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn verification_is_complete() {
        let params = params16();
        let mut rng = derive_stream(83, "money-test-complete", 0);
        let key = keygen(&mut rng);
        let note = bank(&key, &params).unwrap();
        let rho = DensityOperator::from_pure(&note.state);
        let p = verify_accept_prob(&key, &rho, &params).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        for _ in 0..200 {
            let outcome = verify(&key, &rho, &params, &mut rng).unwrap();
            assert!(outcome.accepted);
            // query security: the post state is the note itself
            let fidelity = outcome.post_state.expectation(&note.state).unwrap();
            assert_abs_diff_eq!(fidelity, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn verification_probability_of_basis_and_mixed_states() {
        let params = params16();
        let mut rng = derive_stream(84, "money-test-prob", 0);
        let key = keygen(&mut rng);
        let basis = DensityOperator::from_pure(&StateVector::basis_state(16, 3).unwrap());
        assert_abs_diff_eq!(
            verify_accept_prob(&key, &basis, &params).unwrap(),
            1.0 / 16.0,
            epsilon = 1e-12
        );
        let mixed = DensityOperator::maximally_mixed(16).unwrap();
        assert_abs_diff_eq!(
            verify_accept_prob(&key, &mixed, &params).unwrap(),
            1.0 / 16.0,
            epsilon = 1e-12
        );
        let wrong_dim = DensityOperator::maximally_mixed(8).unwrap();
        assert!(verify_accept_prob(&key, &wrong_dim, &params).is_err());
    }

    #[test]
    fn auxiliary_qubit_path_agrees_with_the_projective_path() {
        let params = params16();
        let mut rng = derive_stream(85, "money-test-aux", 0);
        let key = keygen(&mut rng);
        let candidates: Vec<DensityOperator> = vec![
            DensityOperator::from_pure(&bank(&key, &params).unwrap().state),
            DensityOperator::from_pure(&StateVector::basis_state(16, 5).unwrap()),
            DensityOperator::maximally_mixed(16).unwrap(),
            DensityOperator::from_pure(&crate::linalg::sample_haar_state(16, &mut rng).unwrap()),
        ];
        for rho in candidates {
            let direct = verify_accept_prob(&key, &rho, &params).unwrap();
            let circuit = verify_accept_prob_aux(&key, &rho, &params).unwrap();
            assert_abs_diff_eq!(direct, circuit, epsilon = 1e-12);
        }
    }

    #[test]
    fn count_accepts_all_honest_notes() {
        let params = params16();
        let mut rng = derive_stream(86, "money-test-count", 0);
        let key = keygen(&mut rng);
        let note = bank(&key, &params).unwrap();
        let joint = JointNotes::Pure {
            state: crate::linalg::tensor_power(&note.state, 3).unwrap(),
            notes: 3,
        };
        for _ in 0..100 {
            assert_eq!(count(&key, &joint, &params, &mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn count_of_honest_notes_with_a_pad_is_q_plus_bernoulli() {
        let params = params16();
        let mut rng = derive_stream(87, "money-test-pad", 0);
        let key = keygen(&mut rng);
        let note = bank(&key, &params).unwrap();
        let joint = JointNotes::Pure {
            state: note
                .state
                .tensor(&StateVector::basis_state(16, 0).unwrap())
                .unwrap(),
            notes: 2,
        };
        let trials = 10_000u64;
        let mut extra = 0u64;
        for _ in 0..trials {
            let c = count(&key, &joint, &params, &mut rng).unwrap();
            assert!(c >= 1);
            extra += (c - 1) as u64;
        }
        let p = extra as f64 / trials as f64;
        let sigma = (1.0 / 16.0 * 15.0 / 16.0 / trials as f64).sqrt();
        assert!((p - 1.0 / 16.0).abs() <= 3.0 * sigma, "pad accept rate {p}");
    }

    #[test]
    fn product_attacks_give_independent_bernoulli_accepts() {
        // one honest note plus two |0> pads: count - 1 ~ Binomial(2, 1/16)
        let params = params16();
        let mut rng = derive_stream(94, "money-test-product", 0);
        let key = keygen(&mut rng);
        let phi = bank(&key, &params).unwrap().state;
        let zero = StateVector::basis_state(16, 0).unwrap();
        let joint = JointNotes::Pure {
            state: phi.tensor(&zero).unwrap().tensor(&zero).unwrap(),
            notes: 3,
        };
        let trials = 100_000u64;
        let mut hist = [0u64; 4];
        for _ in 0..trials {
            hist[count(&key, &joint, &params, &mut rng).unwrap()] += 1;
        }
        assert_eq!(hist[0], 0, "the honest note always verifies");
        let p = 1.0 / 16.0;
        let expected = [
            (1.0 - p) * (1.0 - p),
            2.0 * p * (1.0 - p),
            p * p,
        ];
        for (c, &want) in expected.iter().enumerate() {
            let observed = hist[c + 1] as f64 / trials as f64;
            let sigma = (want * (1.0 - want) / trials as f64).sqrt();
            assert!(
                (observed - want).abs() <= 3.0 * sigma,
                "count {}: observed {observed}, expected {want}",
                c + 1
            );
        }
    }

    #[test]
    fn sequential_count_matches_the_joint_measurement_oracle() {
        let params = params16();
        let mut rng = derive_stream(88, "money-test-entangled", 0);
        let key = keygen(&mut rng);
        let phi = bank(&key, &params).unwrap().state;
        let zero = StateVector::basis_state(16, 0).unwrap();
        // entangled two-note state (|phi>|0> + |0>|phi>)/norm
        let raw = phi.tensor(&zero).unwrap().amps() + zero.tensor(&phi).unwrap().amps();
        let entangled = StateVector::normalized(raw).unwrap();
        let joint = JointNotes::Pure {
            state: entangled,
            notes: 2,
        };
        let oracle = count_distribution_oracle(&key, &joint, &params).unwrap();
        assert_abs_diff_eq!(oracle.iter().sum::<f64>(), 1.0, epsilon = 1e-10);

        let trials = 20_000u64;
        let mut hist = [0u64; 3];
        for _ in 0..trials {
            hist[count(&key, &joint, &params, &mut rng).unwrap()] += 1;
        }
        for c in 0..=2 {
            let observed = hist[c] as f64 / trials as f64;
            let sigma = (oracle[c] * (1.0 - oracle[c]) / trials as f64).sqrt();
            assert!(
                (observed - oracle[c]).abs() <= 3.0 * sigma + 1e-9,
                "count {c}: observed {observed}, oracle {}",
                oracle[c]
            );
        }
    }

    #[test]
    fn mixed_and_pure_joint_paths_agree() {
        let params = params16();
        let mut rng = derive_stream(89, "money-test-mixed", 0);
        let key = keygen(&mut rng);
        let phi = bank(&key, &params).unwrap().state;
        let state = phi.tensor(&StateVector::basis_state(16, 0).unwrap()).unwrap();
        let pure = JointNotes::Pure {
            state: state.clone(),
            notes: 2,
        };
        let mixed = JointNotes::Mixed {
            state: DensityOperator::from_pure(&state),
            notes: 2,
        };
        let a = count_distribution_oracle(&key, &pure, &params).unwrap();
        let b = count_distribution_oracle(&key, &mixed, &params).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn pass_through_never_wins() {
        let params = params16();
        let report =
            counterfeit_experiment(CounterfeitStrategy::PassThrough, 2, 2, &params, 2_000, 90)
                .unwrap();
        assert_eq!(report.estimate_value("success"), Some(0.0));
        assert!(report.passed());
    }

    #[test]
    fn measure_fabricate_success_rate() {
        let params = params16();
        let report = counterfeit_experiment(
            CounterfeitStrategy::MeasureFabricate,
            1,
            2,
            &params,
            100_000,
            91,
        )
        .unwrap();
        assert!(report.passed(), "checks: {:?}", report.checks);
        let mean = report.estimate_value("success").unwrap();
        assert!((mean - 1.0 / 256.0).abs() <= 3.0 * (1.0 / 256.0 / 100_000f64).sqrt() + 1e-9);
    }

    #[test]
    fn werner_attack_success_rate() {
        let params = params16();
        let report =
            counterfeit_experiment(CounterfeitStrategy::WernerClone, 1, 2, &params, 20_000, 92)
                .unwrap();
        assert!(report.passed(), "checks: {:?}", report.checks);
        let mean = report.estimate_value("success").unwrap();
        assert!((mean - 2.0 / 17.0).abs() <= 0.02, "success {mean}");
    }

    #[test]
    fn pad_junk_success_rate() {
        let params = params16();
        let report =
            counterfeit_experiment(CounterfeitStrategy::PadJunk, 1, 2, &params, 50_000, 93)
                .unwrap();
        assert!(report.passed(), "checks: {:?}", report.checks);
    }
}
