//! Candidate pseudorandom unitary ensembles and frame-potential diagnostics.
//!
//! Both iterated candidates come without a security proof; everything here is
//! diagnostic-only and reports are labeled candidate, unproven.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, kron, pow_u128, sample_haar_unitary, DomainParams, UnitaryOperator,
};
use crate::randfn::{prp_eval, ExplicitFunction, PrfKey};
use crate::report::{Check, ExperimentReport};
use crate::rng::derive_stream;
use crate::states::hadamard_transform;

/// The phase unitary `T_k: |x> -> omega_N^{PRF_k(x)} |x>` of an explicit
/// phase table.
pub fn phase_unitary_for_table(f: &ExplicitFunction) -> Result<UnitaryOperator> {
    let n = f.domain();
    check_mat_dim("phase unitary", n as u128)?;
    let mut mat = DMatrix::zeros(n, n);
    for x in 0..n {
        mat[(x, x)] = crate::linalg::omega_pow(n as u64, f.eval(x) as u64);
    }
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// The keyed phase unitary `T_k`.
pub fn phase_unitary(key: &PrfKey, params: &DomainParams) -> Result<UnitaryOperator> {
    let table = ExplicitFunction::from_prf(key, params.domain_size())?;
    phase_unitary_for_table(&table)
}

/// The iterated phase candidate `(T_k H^(x)n)^r`.
pub fn pru_candidate(key: &PrfKey, params: &DomainParams, reps: usize) -> Result<UnitaryOperator> {
    if reps == 0 {
        return Err(Error::InvalidArgument("need at least one repetition".into()));
    }
    let t = phase_unitary(key, params)?;
    let h = hadamard_transform(params.qubits())?;
    let step = t.compose(&h)?;
    let mut out = step.clone();
    for _ in 1..reps {
        out = out.compose(&step)?;
    }
    Ok(out)
}

/// Permutation matrix of an explicit permutation table.
pub fn permutation_matrix(perm: &ExplicitFunction) -> Result<UnitaryOperator> {
    if !perm.is_permutation() {
        return Err(Error::InvalidArgument(
            "permutation unitary needs a permutation table".into(),
        ));
    }
    let n = perm.domain();
    check_mat_dim("permutation matrix", n as u128)?;
    let mut mat = DMatrix::zeros(n, n);
    for x in 0..n {
        mat[(perm.eval(x), x)] = Complex64::ONE;
    }
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// The iterated permutation candidate `(P_k (H^(x)n (x) I^(x)n))^r` on `2n`
/// qubits, with an explicit permutation table.
pub fn prp_pru_candidate_for_table(
    perm: &ExplicitFunction,
    n_qubits: u32,
    reps: usize,
) -> Result<UnitaryOperator> {
    if reps == 0 {
        return Err(Error::InvalidArgument("need at least one repetition".into()));
    }
    let dim = check_mat_dim("iterated permutation candidate", pow_u128(2, 2 * n_qubits as usize))?;
    if perm.domain() != dim {
        return Err(Error::DimensionMismatch {
            left: perm.domain(),
            right: dim,
        });
    }
    let p = permutation_matrix(perm)?;
    let h = hadamard_transform(n_qubits)?;
    let half = 1usize << n_qubits;
    let spread = UnitaryOperator::from_mat_unchecked(kron(
        h.mat(),
        &DMatrix::identity(half, half),
    ));
    let step = p.compose(&spread)?;
    let mut out = step.clone();
    for _ in 1..reps {
        out = out.compose(&step)?;
    }
    Ok(out)
}

/// The keyed iterated permutation candidate.
pub fn prp_pru_candidate(
    key: &PrfKey,
    params: &DomainParams,
    reps: usize,
) -> Result<UnitaryOperator> {
    let bits = 2 * params.qubits();
    let dim = 1usize << bits;
    let table = (0..dim as u64)
        .map(|x| prp_eval(key, x, bits).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    prp_pru_candidate_for_table(
        &ExplicitFunction::from_table(dim, table)?,
        params.qubits(),
        reps,
    )
}

/// A samplable ensemble of unitaries.
#[derive(Clone, Debug)]
pub enum UnitaryEnsemble {
    /// `(T_k H)^r`; `independent_keys` redraws the key per repetition.
    PhaseIterate {
        params: DomainParams,
        reps: usize,
        independent_keys: bool,
    },
    /// `(P_k (H (x) I))^r` on doubled qubits.
    PrpIterate {
        params: DomainParams,
        reps: usize,
        independent_keys: bool,
    },
    Haar { dim: usize },
    Fixed(UnitaryOperator),
}

impl UnitaryEnsemble {
    pub fn dim(&self) -> usize {
        match self {
            UnitaryEnsemble::PhaseIterate { params, .. } => params.domain_size() as usize,
            UnitaryEnsemble::PrpIterate { params, .. } => {
                1usize << (2 * params.qubits())
            }
            UnitaryEnsemble::Haar { dim } => *dim,
            UnitaryEnsemble::Fixed(u) => u.dim(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            UnitaryEnsemble::PhaseIterate { .. } => "phase_iterate",
            UnitaryEnsemble::PrpIterate { .. } => "prp_iterate",
            UnitaryEnsemble::Haar { .. } => "haar",
            UnitaryEnsemble::Fixed(_) => "fixed",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitaryOperator> {
        match self {
            UnitaryEnsemble::PhaseIterate {
                params,
                reps,
                independent_keys,
            } => {
                if *independent_keys {
                    let mut out: Option<UnitaryOperator> = None;
                    for _ in 0..*reps {
                        let step = pru_candidate(&PrfKey::random(rng), params, 1)?;
                        out = Some(match out {
                            None => step,
                            Some(acc) => acc.compose(&step)?,
                        });
                    }
                    Ok(out.expect("reps >= 1"))
                } else {
                    pru_candidate(&PrfKey::random(rng), params, *reps)
                }
            }
            UnitaryEnsemble::PrpIterate {
                params,
                reps,
                independent_keys,
            } => {
                if *independent_keys {
                    let mut out: Option<UnitaryOperator> = None;
                    for _ in 0..*reps {
                        let step = prp_pru_candidate(&PrfKey::random(rng), params, 1)?;
                        out = Some(match out {
                            None => step,
                            Some(acc) => acc.compose(&step)?,
                        });
                    }
                    Ok(out.expect("reps >= 1"))
                } else {
                    prp_pru_candidate(&PrfKey::random(rng), params, *reps)
                }
            }
            UnitaryEnsemble::Haar { dim } => sample_haar_unitary(*dim, rng),
            UnitaryEnsemble::Fixed(u) => Ok(u.clone()),
        }
    }
}

/// Monte Carlo estimate of the frame potential
/// `E_{U,V} |tr(U* V)|^{2t}` over independent ensemble draws, with the Haar
/// ensemble estimated alongside as the baseline.
pub fn frame_potential(
    ensemble: &UnitaryEnsemble,
    t: u32,
    pairs: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if t == 0 || pairs == 0 {
        return Err(Error::InvalidArgument(
            "frame potential needs t >= 1 and pairs >= 1".into(),
        ));
    }
    let dim = ensemble.dim();
    let estimate = |ens: &UnitaryEnsemble, tag: &str| -> Result<(f64, f64)> {
        let values: Vec<f64> = (0..pairs)
            .into_par_iter()
            .map(|pair| -> Result<f64> {
                let mut rng = derive_stream(seed, tag, pair);
                let u = ens.sample(&mut rng)?;
                let v = ens.sample(&mut rng)?;
                let tr = (u.mat().adjoint() * v.mat()).trace();
                Ok(tr.norm_sqr().powi(t as i32))
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = values.iter().sum::<f64>() / pairs as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (pairs as f64 - 1.0).max(1.0);
        Ok((mean, (var / pairs as f64).sqrt()))
    };

    let (mean, std_err) = estimate(ensemble, &format!("frame-{}", ensemble.label()))?;
    let (haar_mean, haar_err) = estimate(&UnitaryEnsemble::Haar { dim }, "frame-haar-baseline")?;

    let mut report = ExperimentReport::new("frame_potential", seed);
    report
        .param("ensemble", ensemble.label())
        .param("dim", dim)
        .param("t", t)
        .param("pairs", pairs);
    report
        .estimate("frame_potential", mean, Some(std_err))
        .estimate("haar_baseline", haar_mean, Some(haar_err));
    // Haar minimizes the frame potential
    report.check(Check::ge(
        "haar_minimizes_frame_potential",
        mean,
        haar_mean - 3.0 * (std_err + haar_err),
    ));
    report.note("candidate, unproven");
    Ok(report)
}

/// Frame-potential sweep over repetition counts for the iterated phase
/// candidate; the trend is recorded, not asserted.
pub fn frame_potential_sweep(
    params: &DomainParams,
    reps_list: &[usize],
    t: u32,
    pairs: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if reps_list.is_empty() {
        return Err(Error::InvalidArgument("need at least one repetition count".into()));
    }
    let mut report = ExperimentReport::new("frame_potential_sweep", seed);
    report
        .param("ensemble", "phase_iterate")
        .param("qubits", params.qubits())
        .param("t", t)
        .param("pairs", pairs)
        .param(
            "reps",
            serde_json::Value::Array(
                reps_list.iter().map(|&r| serde_json::json!(r)).collect(),
            ),
        );

    let mut gaps = Vec::new();
    let mut haar_baseline = 0.0;
    for &reps in reps_list {
        let ens = UnitaryEnsemble::PhaseIterate {
            params: params.clone(),
            reps,
            independent_keys: false,
        };
        let inner = frame_potential(&ens, t, pairs, seed ^ reps as u64)?;
        let value = inner.estimate_value("frame_potential").unwrap();
        haar_baseline = inner.estimate_value("haar_baseline").unwrap();
        report.estimate(&format!("frame_potential_r{reps}"), value, None);
        gaps.push((value - haar_baseline).abs());
    }
    report.estimate("haar_baseline", haar_baseline, None);
    // the trend is recorded, never asserted: the candidates are unproven
    let shrinks = gaps.last().unwrap() < gaps.first().unwrap();
    report.details = serde_json::json!({ "gap_to_haar_shrinks_with_reps": shrinks });
    report.note("candidate, unproven; trend recorded, not asserted");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_entry, StateVector};
    use crate::moments::{phase_moment_sym_enumerate, sym_moment_of_states};
    use crate::states::phase_state;
    use crate::symm::sym_basis_indices;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_table_gives_the_identity() {
        let f = ExplicitFunction::constant(8, 0).unwrap();
        let t = phase_unitary_for_table(&f).unwrap();
        assert!(max_abs_entry(&(t.mat() - DMatrix::identity(8, 8))) < 1e-12);
    }

    #[test]
    fn phase_unitary_is_diagonal_with_unit_moduli() {
        let params = DomainParams::new(3, 1).unwrap();
        let key = PrfKey::random(&mut derive_stream(101, "pru-test", 0));
        let t = phase_unitary(&key, &params).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(t.mat()[(i, i)].norm(), 1.0, epsilon = 1e-12);
            for j in 0..8 {
                if i != j {
                    assert_eq!(t.mat()[(i, j)], Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn kickback_on_the_uniform_state_gives_the_phase_state() {
        let params = DomainParams::new(3, 1).unwrap();
        let key = PrfKey::random(&mut derive_stream(102, "pru-test-kick", 0));
        let t = phase_unitary(&key, &params).unwrap();
        let h = hadamard_transform(3).unwrap();
        let zero = StateVector::basis_state(8, 0).unwrap();
        let out = t.apply(&h.apply(&zero).unwrap()).unwrap();
        let expected = phase_state(&key, &params).unwrap();
        assert!((out.amps() - expected.amps()).norm() < 1e-12);
    }

    #[test]
    fn candidate_column_at_zero_is_the_phase_state() {
        let params = DomainParams::new(3, 1).unwrap();
        let key = PrfKey::random(&mut derive_stream(103, "pru-test-col", 0));
        let u = pru_candidate(&key, &params, 1).unwrap();
        let out = u.apply(&StateVector::basis_state(8, 0).unwrap()).unwrap();
        let expected = phase_state(&key, &params).unwrap();
        assert!((out.amps() - expected.amps()).norm() < 1e-12);
    }

    #[test]
    fn iterated_candidate_stays_unitary() {
        let params = DomainParams::new(3, 1).unwrap();
        let key = PrfKey::random(&mut derive_stream(104, "pru-test-unitary", 0));
        let u = pru_candidate(&key, &params, 8).unwrap();
        let gram = u.mat().adjoint() * u.mat();
        assert!(max_abs_entry(&(gram - DMatrix::identity(8, 8))) <= 1e-10);
    }

    #[test]
    fn successive_repetition_counts_differ() {
        let params = DomainParams::new(3, 1).unwrap();
        let mut rng = derive_stream(105, "pru-test-reps", 0);
        for _ in 0..5 {
            let key = PrfKey::random(&mut rng);
            let a = pru_candidate(&key, &params, 3).unwrap();
            let b = pru_candidate(&key, &params, 4).unwrap();
            assert!((a.mat() - b.mat()).norm() > 0.1);
        }
    }

    #[test]
    fn permutation_candidate_identity_stub() {
        let perm = ExplicitFunction::identity(16);
        let u = prp_pru_candidate_for_table(&perm, 2, 1).unwrap();
        let h = hadamard_transform(2).unwrap();
        let expected = kron(h.mat(), &DMatrix::identity(4, 4));
        assert!(max_abs_entry(&(u.mat() - expected)) < 1e-12);
    }

    #[test]
    fn permutation_factor_is_a_permutation_matrix() {
        let params = DomainParams::new(2, 1).unwrap();
        let key = PrfKey::random(&mut derive_stream(106, "pru-test-perm", 0));
        let bits = 4;
        let table = (0..16u64)
            .map(|x| prp_eval(&key, x, bits).unwrap() as usize)
            .collect::<Vec<_>>();
        let p = permutation_matrix(&ExplicitFunction::from_table(16, table).unwrap()).unwrap();
        for i in 0..16 {
            let row_ones = (0..16).filter(|&j| p.mat()[(i, j)] == Complex64::ONE).count();
            let col_ones = (0..16).filter(|&j| p.mat()[(j, i)] == Complex64::ONE).count();
            assert_eq!(row_ones, 1);
            assert_eq!(col_ones, 1);
        }
        let u = prp_pru_candidate(&key, &params, 4).unwrap();
        let gram = u.mat().adjoint() * u.mat();
        assert!(max_abs_entry(&(gram - DMatrix::identity(16, 16))) <= 1e-10);
    }

    #[test]
    fn fixed_ensemble_frame_potential_is_maximal() {
        let mut rng = derive_stream(107, "pru-test-fixed", 0);
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        let ens = UnitaryEnsemble::Fixed(u);
        for t in 1..=2u32 {
            let report = frame_potential(&ens, t, 100, 7).unwrap();
            let expected = (4f64).powi(2 * t as i32);
            let got = report.estimate_value("frame_potential").unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-9 * expected);
        }
    }

    #[test]
    fn haar_first_frame_potential_is_one() {
        let ens = UnitaryEnsemble::Haar { dim: 4 };
        let report = frame_potential(&ens, 1, 10_000, 8).unwrap();
        let got = report.estimate_value("frame_potential").unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 0.05);
        assert!(report.passed());
    }

    #[test]
    fn phase_iterate_sweep_is_recorded() {
        let params = DomainParams::new(2, 1).unwrap();
        let report = frame_potential_sweep(&params, &[1, 2, 4, 8], 1, 1_000, 9).unwrap();
        for reps in [1usize, 2, 4, 8] {
            assert!(report
                .estimate_value(&format!("frame_potential_r{reps}"))
                .is_some());
        }
        assert!(report.notes.iter().any(|n| n.contains("unproven")));
    }

    #[test]
    fn ensembles_never_beat_the_haar_floor() {
        let params = DomainParams::new(2, 1).unwrap();
        for ens in [
            UnitaryEnsemble::PhaseIterate {
                params: params.clone(),
                reps: 2,
                independent_keys: false,
            },
            UnitaryEnsemble::PhaseIterate {
                params: params.clone(),
                reps: 2,
                independent_keys: true,
            },
            UnitaryEnsemble::PrpIterate {
                params: params.clone(),
                reps: 2,
                independent_keys: false,
            },
        ] {
            let report = frame_potential(&ens, 1, 2_000, 10).unwrap();
            assert!(report.passed(), "{} broke the Haar floor", ens.label());
        }
    }

    #[test]
    fn candidate_states_reproduce_the_phase_moment() {
        // r = 1 columns at |0> are exactly the keyed phase states; their
        // sampled two-copy moment approaches the exact random-function moment
        let params = DomainParams::new(2, 2).unwrap();
        let basis = sym_basis_indices(4, 2).unwrap();
        let mut rng = derive_stream(108, "pru-test-moment", 0);
        let ens = UnitaryEnsemble::PhaseIterate {
            params: params.clone(),
            reps: 1,
            independent_keys: false,
        };
        let zero = StateVector::basis_state(4, 0).unwrap();
        let states: Vec<StateVector> = (0..60_000)
            .map(|_| ens.sample(&mut rng).unwrap().apply(&zero).unwrap())
            .collect();
        let sampled = sym_moment_of_states(&states, &basis);
        let exact = phase_moment_sym_enumerate(4, 2).unwrap();
        let dist = crate::linalg::trace_distance_hermitian(&sampled, &exact).unwrap();
        assert!(dist <= 0.015, "sampled keyed moment distance {dist}");
    }
}
