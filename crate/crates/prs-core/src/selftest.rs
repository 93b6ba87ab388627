//! The release-gate suite: every acceptance criterion as one seeded,
//! deterministic check bundle.
//!
//! Criterion payloads (names, verdicts, observed values) are serialized with
//! exact float formatting; running the suite twice under one seed must
//! produce byte-identical payloads, and that determinism contract is itself
//! the final criterion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{
    max_abs_entry, sample_haar_state, sample_haar_unitary, trace_distance, DensityOperator,
    DomainParams, StateVector,
};
use crate::money::{
    bank, counterfeit_experiment, keygen, verify_accept_prob, verify_accept_prob_aux,
    CounterfeitStrategy,
};
use crate::moments::{
    empirical_state_moment, phase_moment_diagonal, phase_moment_distance,
    phase_moment_sym_enumerate,
};
use crate::protocols::{
    cloning_experiment, simulate_reflection_algorithm, swap_test_accept_prob, swap_test_sample,
    CloneSource, ClonerKind, CloningConfig, TargetMode,
};
use crate::pru::{frame_potential, frame_potential_sweep, UnitaryEnsemble};
use crate::randfn::PrfKey;
use crate::report::{to_json_17, Check};
use crate::rng::derive_stream;
use crate::states::{phase_state, phase_state_circuit};
use crate::symm::{
    binomial, sym_basis_indices, sym_projector, sym_projector_from_permutations, sym_reflection,
};

/// Deliberate corruptions for negative-control runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaultToggles {
    /// Perturb the basis-sum projector before the projector-identity check.
    pub corrupt_projector: bool,
}

/// One acceptance criterion's verdicts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    fn new(id: u32, name: &str, checks: Vec<Check>) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

/// The whole suite's outcome. Timings stay out of the serialized payload so
/// reruns compare byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub passed: bool,
    #[serde(skip)]
    pub timings_ms: Vec<(u32, f64)>,
}

impl SelftestReport {
    /// The deterministic numeric payload (criteria only, no timing).
    pub fn payload_json(&self) -> String {
        criteria_payload(&self.criteria)
    }
}

fn criteria_payload(criteria: &[CriterionOutcome]) -> String {
    to_json_17(&serde_json::to_value(criteria).expect("criteria serialize"))
}

fn c1_lemma_distance() -> Result<CriterionOutcome> {
    let report = phase_moment_distance(4, 2)?;
    let checks = vec![
        Check::within("distance_is_0.15", report.distance, 0.15, 1e-10),
        Check::within(
            "closed_form_matches_exact",
            report.closed_form.unwrap(),
            report.distance,
            1e-10,
        ),
        Check::flag("closed_form_flagged_valid", report.closed_form_valid),
    ];
    Ok(CriterionOutcome::new(1, "lemma-distance-exact", checks))
}

fn c2_validity_boundary() -> Result<CriterionOutcome> {
    let report = phase_moment_distance(2, 2)?;
    let checks = vec![
        Check::within("distance_is_one_third", report.distance, 1.0 / 3.0, 1e-10),
        Check::within(
            "closed_form_would_give_one_sixth",
            report.closed_form.unwrap(),
            1.0 / 6.0,
            1e-10,
        ),
        Check::flag("closed_form_flagged_invalid", !report.closed_form_valid),
    ];
    Ok(CriterionOutcome::new(
        2,
        "closed-form-validity-boundary",
        checks,
    ))
}

fn c3_diagonal_structure() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    for copies in [2usize, 3] {
        let basis = sym_basis_indices(4, copies)?;
        let moment = phase_moment_sym_enumerate(4, copies)?;
        let mut max_off = 0.0f64;
        let mut max_diag_dev = 0.0f64;
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if i != j {
                    max_off = max_off.max(moment[(i, j)].norm());
                }
            }
            let expected = phase_moment_diagonal(basis.multiset(i), 4, copies);
            max_diag_dev = max_diag_dev.max((moment[(i, i)].re - expected).abs());
        }
        checks.push(Check::le(
            &format!("off_diagonals_vanish_m{copies}"),
            max_off,
            1e-12,
        ));
        checks.push(Check::le(
            &format!("diagonals_match_formula_m{copies}"),
            max_diag_dev,
            1e-12,
        ));
    }
    Ok(CriterionOutcome::new(3, "moment-diagonal-structure", checks))
}

fn c4_projector_identity(faults: &FaultToggles) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    for n in 1..=3usize {
        for m in 1..=4usize {
            let mut from_basis = sym_projector(n, m)?;
            if faults.corrupt_projector {
                from_basis[(0, 0)] += Complex64::new(1e-6, 0.0);
            }
            let from_perms = sym_projector_from_permutations(n, m)?;
            let dev = max_abs_entry(&(&from_basis - &from_perms));
            checks.push(Check::le(&format!("identity_n{n}_m{m}"), dev, 1e-12));
            let rank = crate::linalg::hermitian_eigenvalues(&from_basis)?
                .iter()
                .filter(|&&l| l > 0.5)
                .count();
            let expected = binomial((n + m - 1) as u64, m as u64) as f64;
            checks.push(Check::within(
                &format!("rank_n{n}_m{m}"),
                rank as f64,
                expected,
                0.0,
            ));
        }
    }
    Ok(CriterionOutcome::new(4, "projector-identity", checks))
}

fn c5_haar_moment_monte_carlo(seed: u64) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    for dim in [2usize, 4] {
        let mut rng = derive_stream(seed, "selftest-haar-moment", dim as u64);
        let empirical =
            empirical_state_moment(2, 10_000, &mut rng, |r| sample_haar_state(dim, r))?;
        let exact = crate::symm::haar_moment(dim, 2)?;
        let dist = trace_distance(&empirical, &exact)?;
        checks.push(Check::le(
            &format!("second_moment_close_dim{dim}"),
            dist,
            0.05,
        ));
    }
    Ok(CriterionOutcome::new(5, "haar-moment-monte-carlo", checks))
}

fn c6_reflection_simulation(seed: u64) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let instances = 100u64;
    for &dim in &[2usize, 4] {
        for &queries in &[1usize, 2, 3] {
            for &copies in &[1usize, 4, 16, 64] {
                let mut max_dist = 0.0f64;
                for inst in 0..instances {
                    let mut rng = derive_stream(
                        seed,
                        &format!("selftest-reflect-{dim}-{queries}-{copies}"),
                        inst,
                    );
                    let psi = sample_haar_state(dim, &mut rng)?;
                    let phi = sample_haar_state(dim, &mut rng)?;
                    let unitaries: Vec<_> = (0..queries)
                        .map(|_| sample_haar_unitary(dim, &mut rng))
                        .collect::<Result<Vec<_>>>()?;
                    let out = simulate_reflection_algorithm(
                        &psi,
                        &phi,
                        &unitaries,
                        copies,
                        TargetMode::FreshPerQuery,
                    )?;
                    max_dist = max_dist.max(out.euclid_distance);
                }
                let bound = 2.0 * queries as f64 / ((copies as f64) + 1.0).sqrt();
                checks.push(Check::le(
                    &format!("distance_bound_N{dim}_q{queries}_l{copies}"),
                    max_dist,
                    bound,
                ));
            }
        }
    }
    // the <Theta|R|Theta> operator identity
    for &dim in &[2usize, 4] {
        for copies in 1..=4usize {
            let mut rng = derive_stream(
                seed,
                &format!("selftest-reflect-op-{dim}"),
                copies as u64,
            );
            let psi = sample_haar_state(dim, &mut rng)?;
            let theta = crate::linalg::tensor_power(&psi, copies)?;
            let refl = sym_reflection(dim, copies + 1)?;
            let mut observed = DMatrix::<Complex64>::zeros(dim, dim);
            for j in 0..dim {
                let ej = StateVector::basis_state(dim, j)?;
                let rj = refl.apply(&ej.tensor(&theta)?)?;
                for i in 0..dim {
                    let ei = StateVector::basis_state(dim, i)?;
                    observed[(i, j)] = ei.tensor(&theta)?.inner(&rj)?;
                }
            }
            let expected = crate::protocols::theta_reflection_matrix(&psi, copies);
            checks.push(Check::le(
                &format!("theta_operator_identity_N{dim}_l{copies}"),
                max_abs_entry(&(observed - expected)),
                1e-10,
            ));
        }
    }
    Ok(CriterionOutcome::new(6, "reflection-simulation", checks))
}

fn c7_cloning_bound(seed: u64) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    for (dim, m, mp, expected) in [
        (2usize, 1usize, 2usize, 2.0 / 3.0),
        (4, 2, 3, 0.5),
        (16, 1, 2, 16.0 / 136.0),
    ] {
        let config = CloningConfig::new(dim, m, mp, 10_000)?;
        let report = cloning_experiment(CloneSource::Haar, ClonerKind::Werner, &config, seed)?;
        let mean = report.estimate_value("success").unwrap();
        checks.push(Check::within(
            &format!("werner_success_N{dim}_{m}to{mp}"),
            mean,
            expected,
            0.01,
        ));
    }
    Ok(CriterionOutcome::new(7, "cloning-bound", checks))
}

fn c8_circuit_formula_equivalence(seed: u64) -> Result<CriterionOutcome> {
    let mut max_dev = 0.0f64;
    let mut rng = derive_stream(seed, "selftest-circuit", 0);
    // 100 random keys across n = 1..4
    for n in 1..=4u32 {
        let params = DomainParams::new(n, 1)?;
        for _ in 0..25 {
            let key = PrfKey::random(&mut rng);
            let direct = phase_state(&key, &params)?;
            let circuit = phase_state_circuit(&key, &params)?;
            let dev = (direct.amps() - circuit.amps())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            max_dev = max_dev.max(dev);
        }
    }
    let checks = vec![Check::le(
        "circuit_equals_formula_amplitudewise",
        max_dev,
        1e-10,
    )];
    Ok(CriterionOutcome::new(8, "circuit-formula-equivalence", checks))
}

fn c9_money_scheme(seed: u64) -> Result<CriterionOutcome> {
    let params = DomainParams::new(4, 1)?;
    let mut checks = Vec::new();

    // completeness: the projective fixed point
    let mut rng = derive_stream(seed, "selftest-money-complete", 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let key = keygen(&mut rng);
        let note = bank(&key, &params)?;
        let p = verify_accept_prob(&key, &DensityOperator::from_pure(&note.state), &params)?;
        worst = worst.max((p - 1.0).abs());
    }
    checks.push(Check::le("completeness_probability_is_one", worst, 1e-12));

    // measure-and-fabricate attack at q=1, r=2, N=16 over 1e5 trials
    let attack = counterfeit_experiment(
        CounterfeitStrategy::MeasureFabricate,
        1,
        2,
        &params,
        100_000,
        seed,
    )?;
    let mean = attack.estimate_value("success").unwrap();
    let p = 1.0 / 256.0;
    let sigma = (p * (1.0 - p) / 100_000f64).sqrt();
    checks.push(Check::within(
        "measure_fabricate_success_near_inverse_square",
        mean,
        p,
        3.0 * sigma,
    ));

    // auxiliary-qubit path agreement on assorted notes
    let mut rng = derive_stream(seed, "selftest-money-aux", 0);
    let key = keygen(&mut rng);
    let mut worst = 0.0f64;
    let notes = [
        DensityOperator::from_pure(&bank(&key, &params)?.state),
        DensityOperator::from_pure(&StateVector::basis_state(16, 7)?),
        DensityOperator::maximally_mixed(16)?,
        DensityOperator::from_pure(&sample_haar_state(16, &mut rng)?),
    ];
    for rho in &notes {
        let direct = verify_accept_prob(&key, rho, &params)?;
        let circuit = verify_accept_prob_aux(&key, rho, &params)?;
        worst = worst.max((direct - circuit).abs());
    }
    checks.push(Check::le("aux_circuit_agrees_with_projective", worst, 1e-12));

    Ok(CriterionOutcome::new(9, "money-scheme", checks))
}

fn c10_swap_test(seed: u64) -> Result<CriterionOutcome> {
    let zero = StateVector::basis_state(2, 0)?;
    let one = StateVector::basis_state(2, 1)?;
    let plus = StateVector::uniform(2)?;
    let pairs = [
        ("identical", zero.clone(), zero.clone(), 1.0),
        ("orthogonal", zero.clone(), one, 0.5),
        ("plus_zero", plus, zero, 0.75),
    ];
    let mut checks = Vec::new();
    for (name, a, b, expected) in &pairs {
        let exact = swap_test_accept_prob(a, b)?;
        checks.push(Check::within(
            &format!("exact_probability_{name}"),
            exact,
            *expected,
            1e-12,
        ));
        let mut rng = derive_stream(seed, "selftest-swap", checks.len() as u64);
        let trials = 100_000u64;
        let mut accepts = 0u64;
        for _ in 0..trials {
            accepts += u64::from(swap_test_sample(a, b, &mut rng)?);
        }
        let observed = accepts as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        checks.push(Check::within(
            &format!("empirical_probability_{name}"),
            observed,
            *expected,
            3.0 * sigma,
        ));
    }
    Ok(CriterionOutcome::new(10, "swap-test", checks))
}

fn c11_pru_diagnostics(seed: u64) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();

    let mut rng = derive_stream(seed, "selftest-pru-fixed", 0);
    let fixed = UnitaryEnsemble::Fixed(sample_haar_unitary(4, &mut rng)?);
    for t in [1u32, 2] {
        let report = frame_potential(&fixed, t, 200, seed)?;
        let expected = 4f64.powi(2 * t as i32);
        let got = report.estimate_value("frame_potential").unwrap();
        checks.push(Check::within(
            &format!("fixed_ensemble_maximal_t{t}"),
            got,
            expected,
            1e-9 * expected,
        ));
    }

    let haar = UnitaryEnsemble::Haar { dim: 4 };
    let report = frame_potential(&haar, 1, 10_000, seed)?;
    checks.push(Check::within(
        "haar_first_frame_potential",
        report.estimate_value("frame_potential").unwrap(),
        1.0,
        0.05,
    ));

    // r-sweep is generated and recorded without assertion
    let params = DomainParams::new(2, 1)?;
    let sweep = frame_potential_sweep(&params, &[1, 2, 4, 8], 1, 1_000, seed)?;
    let have_all = [1usize, 2, 4, 8]
        .iter()
        .all(|r| sweep.estimate_value(&format!("frame_potential_r{r}")).is_some());
    checks.push(Check::flag("phase_iterate_sweep_generated", have_all));

    Ok(CriterionOutcome::new(11, "pru-diagnostics", checks))
}

fn run_one(id: u32, seed: u64, faults: &FaultToggles) -> Result<CriterionOutcome> {
    match id {
        1 => c1_lemma_distance(),
        2 => c2_validity_boundary(),
        3 => c3_diagonal_structure(),
        4 => c4_projector_identity(faults),
        5 => c5_haar_moment_monte_carlo(seed),
        6 => c6_reflection_simulation(seed),
        7 => c7_cloning_bound(seed),
        8 => c8_circuit_formula_equivalence(seed),
        9 => c9_money_scheme(seed),
        10 => c10_swap_test(seed),
        11 => c11_pru_diagnostics(seed),
        _ => unreachable!("criterion ids are 1..=11"),
    }
}

/// Run criteria 1 through 11 under one seed.
pub fn run_criteria(seed: u64, faults: &FaultToggles) -> Result<Vec<CriterionOutcome>> {
    (1..=11).map(|id| run_one(id, seed, faults)).collect()
}

/// Run the full suite, including the determinism criterion (the first eleven
/// criteria are executed twice and their payloads compared byte for byte).
pub fn run_all_with_faults(seed: u64, faults: &FaultToggles) -> Result<SelftestReport> {
    let mut timings_ms = Vec::with_capacity(11);
    let mut first = Vec::with_capacity(12);
    for id in 1..=11 {
        let started = std::time::Instant::now();
        first.push(run_one(id, seed, faults)?);
        timings_ms.push((id, started.elapsed().as_secs_f64() * 1e3));
    }
    let second = run_criteria(seed, faults)?;
    let payload_first = criteria_payload(&first);
    let payload_second = criteria_payload(&second);
    let determinism = CriterionOutcome::new(
        12,
        "determinism",
        vec![Check::flag(
            "payloads_byte_identical_across_reruns",
            payload_first == payload_second,
        )],
    );
    let mut criteria = first;
    criteria.push(determinism);
    let passed = criteria.iter().all(|c| c.passed);
    Ok(SelftestReport {
        seed,
        criteria,
        passed,
        timings_ms,
    })
}

/// Run the full suite at default budgets.
pub fn run_all(seed: u64) -> Result<SelftestReport> {
    run_all_with_faults(seed, &FaultToggles::default())
}
