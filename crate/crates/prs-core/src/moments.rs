//! Exact and sampled m-copy moment operators of each candidate family and
//! their trace distance to the Haar moment.
//!
//! The exact path enumerates every function (or sign pattern, or subset) and
//! accumulates the moment in the compressed multiset basis, where the Haar
//! moment is `I/D`. Product-state moments are supported on the symmetric
//! subspace, so eigenvalues taken there give the exact trace distance. The
//! brute-force path is always authoritative; the asymptotic closed form is
//! evaluated alongside and gated by an explicit, machine-checked validity
//! predicate (it assumes `m < N` and a sign pattern of the deltas that holds
//! only for large domains).

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, hermitian_eigenvalues, pow_u128, tensor_power, DensityOperator, StateVector,
};
use crate::randfn::{
    function_by_index, function_count, sample_function, ExplicitFunction, PrfKey,
    FUNCTION_ENUM_BUDGET,
};
use crate::states::{
    binary_phase_state_for_table, function_phase_state, subset_state, FamilyKind,
};
use crate::symm::{product_state_sym_coords, sym_basis_indices, SymBasis};

/// Sign-function enumeration budget for the binary family (`2^N`).
pub const BINARY_ENUM_BUDGET: u128 = 1_000_000;
/// Subset enumeration budget (`C(2^{2n}, 2^n)`).
pub const SUBSET_ENUM_BUDGET: u128 = 100_000;
/// Fixed partition count for parallel enumeration; results are
/// bit-reproducible for a given partition count.
const ENUM_PARTITIONS: u128 = 16;

/// Exact or Monte Carlo averaging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    Enumerate,
    Sample,
}

/// One diagonal deviation `delta_x = <x;Sym|rho^m|x;Sym> - 1/D`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaTerm {
    pub multiset: Vec<usize>,
    pub delta: f64,
}

/// Machine-checked premises of the asymptotic closed-form distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedFormValidity {
    /// `m < N`; the diagonal formula wraps around mod N otherwise.
    pub copies_below_domain: bool,
    /// The positive deltas are exactly the all-distinct multisets
    /// (checked numerically in enumerate mode, absent otherwise).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_only_positive: Option<bool>,
}

/// Moment comparison report for one family at one `(N, m)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub family: FamilyKind,
    pub n_levels: usize,
    pub copies: usize,
    pub mode: MomentMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Trace distance to the Haar moment; always the eigendecomposition
    /// value, never the closed form.
    pub distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    pub closed_form_valid: bool,
    pub validity: ClosedFormValidity,
    /// Weight the moment carries outside the symmetric subspace
    /// (`1 - tr(Pi rho Pi)`); must be ~0 for product-state ensembles.
    pub sym_support_deficit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_off_diagonal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<DeltaTerm>>,
    /// The random-phase family's distance at the same `(N, m)`, for
    /// cross-family comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_exceeded: Option<bool>,
}

fn accumulate_outer(acc: &mut DMatrix<Complex64>, coords: &DVector<Complex64>) {
    let d = coords.len();
    for j in 0..d {
        let cj = coords[j].conj();
        if cj == Complex64::ZERO {
            continue;
        }
        for i in 0..d {
            acc[(i, j)] += coords[i] * cj;
        }
    }
}

/// Average `(|psi><psi|)^(x)m` over an explicit state list, in the multiset
/// basis. Partials are summed in fixed partition order.
pub fn sym_moment_of_states(states: &[StateVector], basis: &SymBasis) -> DMatrix<Complex64> {
    let d = basis.dim();
    let chunk_len = states.len().div_ceil(ENUM_PARTITIONS as usize).max(1);
    let partials: Vec<DMatrix<Complex64>> = states
        .par_chunks(chunk_len)
        .map(|chunk| {
            let mut acc = DMatrix::zeros(d, d);
            for psi in chunk {
                let coords = product_state_sym_coords(psi, basis);
                accumulate_outer(&mut acc, &coords);
            }
            acc
        })
        .collect();
    let mut total = DMatrix::zeros(d, d);
    for p in partials {
        total += p;
    }
    total / Complex64::new(states.len() as f64, 0.0)
}

/// Average `(|psi><psi|)^(x)m` over an explicit state list, dense.
pub fn moment_of_states(states: &[StateVector], copies: usize) -> Result<DensityOperator> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("need at least one state".into()));
    }
    let dim = check_mat_dim("dense moment operator", pow_u128(states[0].dim(), copies))?;
    let mut acc = DMatrix::zeros(dim, dim);
    for psi in states {
        let big = tensor_power(psi, copies)?;
        accumulate_outer(&mut acc, big.amps());
    }
    Ok(DensityOperator::from_mat_unchecked(
        acc / Complex64::new(states.len() as f64, 0.0),
    ))
}

/// Monte Carlo moment of a state sampler, dense.
pub fn empirical_state_moment<R, F>(
    copies: usize,
    trials: u64,
    rng: &mut R,
    mut draw: F,
) -> Result<DensityOperator>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<StateVector>,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let first = draw(rng)?;
    let dim = check_mat_dim("dense moment operator", pow_u128(first.dim(), copies))?;
    let mut acc = DMatrix::zeros(dim, dim);
    accumulate_outer(&mut acc, tensor_power(&first, copies)?.amps());
    for _ in 1..trials {
        let psi = draw(rng)?;
        accumulate_outer(&mut acc, tensor_power(&psi, copies)?.amps());
    }
    Ok(DensityOperator::from_mat_unchecked(
        acc / Complex64::new(trials as f64, 0.0),
    ))
}

fn check_function_enum_budget(n_levels: usize) -> Result<u128> {
    let total = function_count(n_levels);
    if total > FUNCTION_ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "phase-moment function enumeration",
            requested: total,
            budget: FUNCTION_ENUM_BUDGET,
            hint: "use sampling mode",
        });
    }
    Ok(total)
}

/// The exact compressed moment of the random-phase family over all `N^N`
/// functions, partitioned across workers and reduced in fixed order.
pub fn phase_moment_sym_enumerate(
    n_levels: usize,
    copies: usize,
) -> Result<DMatrix<Complex64>> {
    let total = check_function_enum_budget(n_levels)?;
    let basis = sym_basis_indices(n_levels, copies)?;
    let d = basis.dim();
    let chunk = total.div_ceil(ENUM_PARTITIONS).max(1);
    let partials: Vec<DMatrix<Complex64>> = (0..ENUM_PARTITIONS)
        .into_par_iter()
        .map(|p| {
            let lo = (p * chunk).min(total);
            let hi = total.min(lo + chunk);
            let mut acc = DMatrix::zeros(d, d);
            for idx in lo..hi {
                let f = function_by_index(n_levels, idx);
                let psi = function_phase_state(&f).expect("phase state within cap");
                let coords = product_state_sym_coords(&psi, &basis);
                accumulate_outer(&mut acc, &coords);
            }
            acc
        })
        .collect();
    let mut acc = DMatrix::zeros(d, d);
    for p in partials {
        acc += p;
    }
    Ok(acc / Complex64::new(total as f64, 0.0))
}

/// Compressed Monte Carlo moment of the ideal random-function phase family.
pub fn phase_moment_sym_sample<R: Rng + ?Sized>(
    n_levels: usize,
    copies: usize,
    trials: u64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let basis = sym_basis_indices(n_levels, copies)?;
    let d = basis.dim();
    let mut acc = DMatrix::zeros(d, d);
    for _ in 0..trials {
        let f = sample_function(n_levels, rng);
        let psi = function_phase_state(&f)?;
        let coords = product_state_sym_coords(&psi, &basis);
        accumulate_outer(&mut acc, &coords);
    }
    Ok(acc / Complex64::new(trials as f64, 0.0))
}

/// The dense m-copy moment of the random-phase family: the exact average
/// over all `N^N` functions, or an unbiased Monte Carlo average.
pub fn phase_moment<R: Rng + ?Sized>(
    n_levels: usize,
    copies: usize,
    mode: MomentMode,
    trials: u64,
    rng: &mut R,
) -> Result<DensityOperator> {
    let dim = check_mat_dim("dense phase moment", pow_u128(n_levels, copies))?;
    match mode {
        MomentMode::Enumerate => {
            let total = check_function_enum_budget(n_levels)?;
            let chunk = total.div_ceil(ENUM_PARTITIONS).max(1);
            let partials: Vec<DMatrix<Complex64>> = (0..ENUM_PARTITIONS)
                .into_par_iter()
                .map(|p| {
                    let lo = (p * chunk).min(total);
                    let hi = total.min(lo + chunk);
                    let mut acc = DMatrix::zeros(dim, dim);
                    for idx in lo..hi {
                        let f = function_by_index(n_levels, idx);
                        let psi = function_phase_state(&f).expect("phase state within cap");
                        let big = tensor_power(&psi, copies).expect("within cap");
                        accumulate_outer(&mut acc, big.amps());
                    }
                    acc
                })
                .collect();
            let mut acc = DMatrix::zeros(dim, dim);
            for p in partials {
                acc += p;
            }
            Ok(DensityOperator::from_mat_unchecked(
                acc / Complex64::new(total as f64, 0.0),
            ))
        }
        MomentMode::Sample => {
            if trials == 0 {
                return Err(Error::InvalidArgument("need at least one trial".into()));
            }
            let mut acc = DMatrix::zeros(dim, dim);
            for _ in 0..trials {
                let f = sample_function(n_levels, rng);
                let psi = function_phase_state(&f)?;
                let big = tensor_power(&psi, copies)?;
                accumulate_outer(&mut acc, big.amps());
            }
            Ok(DensityOperator::from_mat_unchecked(
                acc / Complex64::new(trials as f64, 0.0),
            ))
        }
    }
}

/// Closed-form diagonal entry `m! / (N^m prod_j m_j!)` of the exact phase
/// moment in the multiset basis (valid for `m < N`).
pub fn phase_moment_diagonal(
    x: &crate::symm::MultisetIndex,
    n_levels: usize,
    copies: usize,
) -> f64 {
    x.multinomial(n_levels) / (n_levels as f64).powi(copies as i32)
}

/// The asymptotic closed-form distance
/// `falling(N,m)/N^m - falling(N,m)/rising(N,m)`.
pub fn phase_closed_form_distance(n_levels: usize, copies: usize) -> f64 {
    let n = n_levels as f64;
    let mut falling = 1.0;
    let mut rising = 1.0;
    for i in 0..copies {
        falling *= n - i as f64;
        rising *= n + i as f64;
    }
    falling / n.powi(copies as i32) - falling / rising
}

struct SymDistance {
    distance: f64,
    deltas: Vec<DeltaTerm>,
    max_off_diagonal: f64,
    support_deficit: f64,
    distinct_only_positive: bool,
}

fn sym_distance_to_haar(moment: &DMatrix<Complex64>, basis: &SymBasis) -> Result<SymDistance> {
    let d = basis.dim();
    let haar = 1.0 / d as f64;
    let mut diff = moment.clone();
    for i in 0..d {
        diff[(i, i)] -= Complex64::new(haar, 0.0);
    }
    let eigs = hermitian_eigenvalues(&diff)?;
    let distance = 0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>();

    let mut deltas = Vec::with_capacity(d);
    let mut distinct_only_positive = true;
    for (pos, x) in basis.indices().iter().enumerate() {
        let delta = moment[(pos, pos)].re - haar;
        if (delta > 1e-12) != x.is_all_distinct() {
            distinct_only_positive = false;
        }
        deltas.push(DeltaTerm {
            multiset: x.values().to_vec(),
            delta,
        });
    }

    let mut max_off = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                max_off = max_off.max(moment[(i, j)].norm());
            }
        }
    }

    Ok(SymDistance {
        distance,
        deltas,
        max_off_diagonal: max_off,
        support_deficit: 1.0 - moment.trace().re,
        distinct_only_positive,
    })
}

/// Exact moment comparison for the random-phase family: brute force over all
/// `N^N` functions, with the closed form evaluated and validity-flagged
/// alongside.
pub fn phase_moment_distance(n_levels: usize, copies: usize) -> Result<MomentReport> {
    let basis = sym_basis_indices(n_levels, copies)?;
    let moment = phase_moment_sym_enumerate(n_levels, copies)?;
    let sym = sym_distance_to_haar(&moment, &basis)?;
    let copies_below_domain = copies < n_levels;
    Ok(MomentReport {
        family: FamilyKind::RandomPhase,
        n_levels,
        copies,
        mode: MomentMode::Enumerate,
        trials: None,
        distance: sym.distance,
        closed_form: Some(phase_closed_form_distance(n_levels, copies)),
        closed_form_valid: copies_below_domain && sym.distinct_only_positive,
        validity: ClosedFormValidity {
            copies_below_domain,
            distinct_only_positive: Some(sym.distinct_only_positive),
        },
        sym_support_deficit: sym.support_deficit,
        max_off_diagonal: Some(sym.max_off_diagonal),
        deltas: Some(sym.deltas),
        reference_distance: None,
        reference_exceeded: None,
    })
}

/// Sampled variant for domains past the enumeration budget; the validity
/// predicate's sign-pattern half cannot be certified here.
pub fn phase_moment_distance_sampled<R: Rng + ?Sized>(
    n_levels: usize,
    copies: usize,
    trials: u64,
    rng: &mut R,
) -> Result<MomentReport> {
    let basis = sym_basis_indices(n_levels, copies)?;
    let moment = phase_moment_sym_sample(n_levels, copies, trials, rng)?;
    let sym = sym_distance_to_haar(&moment, &basis)?;
    let copies_below_domain = copies < n_levels;
    Ok(MomentReport {
        family: FamilyKind::RandomPhase,
        n_levels,
        copies,
        mode: MomentMode::Sample,
        trials: Some(trials),
        distance: sym.distance,
        closed_form: Some(phase_closed_form_distance(n_levels, copies)),
        closed_form_valid: copies_below_domain,
        validity: ClosedFormValidity {
            copies_below_domain,
            distinct_only_positive: None,
        },
        sym_support_deficit: sym.support_deficit,
        max_off_diagonal: Some(sym.max_off_diagonal),
        deltas: Some(sym.deltas),
        reference_distance: None,
        reference_exceeded: None,
    })
}

/// Exact moment comparison for the binary-phase family over all `2^N` sign
/// functions.
pub fn binary_phase_moment_distance(n_levels: usize, copies: usize) -> Result<MomentReport> {
    let total = pow_u128(2, n_levels);
    if total > BINARY_ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "binary-phase sign enumeration",
            requested: total,
            budget: BINARY_ENUM_BUDGET,
            hint: "use sampling mode",
        });
    }
    let basis = sym_basis_indices(n_levels, copies)?;
    let states: Vec<StateVector> = (0..total as u64)
        .map(|mask| {
            let table: Vec<usize> = (0..n_levels).map(|x| ((mask >> x) & 1) as usize).collect();
            binary_phase_state_for_table(&ExplicitFunction::from_table(n_levels, table)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let moment = sym_moment_of_states(&states, &basis);
    let sym = sym_distance_to_haar(&moment, &basis)?;

    // the random-phase family at the same size, as the comparison baseline
    let reference_distance = phase_moment_distance(n_levels, copies)
        .ok()
        .map(|r| r.distance);
    let reference_exceeded = reference_distance.map(|r| sym.distance > r);

    Ok(MomentReport {
        family: FamilyKind::BinaryPhase,
        n_levels,
        copies,
        mode: MomentMode::Enumerate,
        trials: None,
        distance: sym.distance,
        closed_form: None,
        closed_form_valid: false,
        validity: ClosedFormValidity {
            copies_below_domain: copies < n_levels,
            distinct_only_positive: Some(sym.distinct_only_positive),
        },
        sym_support_deficit: sym.support_deficit,
        max_off_diagonal: Some(sym.max_off_diagonal),
        deltas: Some(sym.deltas),
        reference_distance,
        reference_exceeded,
    })
}

/// Exact moment comparison for the random-subset family: the average over
/// all size-`2^n` subsets of the `2^{2n}`-element domain (the
/// ideal-permutation idealization).
pub fn subset_moment_distance(n_qubits: u32, copies: usize) -> Result<MomentReport> {
    let dim = 1usize << (2 * n_qubits);
    let subset_size = 1usize << n_qubits;
    let total = crate::symm::binomial(dim as u64, subset_size as u64);
    if total > SUBSET_ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "subset enumeration",
            requested: total,
            budget: SUBSET_ENUM_BUDGET,
            hint: "use sampling mode",
        });
    }
    let basis = sym_basis_indices(dim, copies)?;
    let norm = Complex64::new(1.0 / (subset_size as f64).sqrt(), 0.0);
    let states: Vec<StateVector> = (0..dim)
        .combinations(subset_size)
        .map(|subset| {
            let mut amps = DVector::zeros(dim);
            for &i in &subset {
                amps[i] = norm;
            }
            StateVector::new(amps)
        })
        .collect::<Result<Vec<_>>>()?;
    let moment = sym_moment_of_states(&states, &basis);
    let sym = sym_distance_to_haar(&moment, &basis)?;
    Ok(MomentReport {
        family: FamilyKind::RandomSubset,
        n_levels: dim,
        copies,
        mode: MomentMode::Enumerate,
        trials: None,
        distance: sym.distance,
        closed_form: None,
        closed_form_valid: false,
        validity: ClosedFormValidity {
            copies_below_domain: copies < dim,
            distinct_only_positive: Some(sym.distinct_only_positive),
        },
        sym_support_deficit: sym.support_deficit,
        max_off_diagonal: Some(sym.max_off_diagonal),
        deltas: Some(sym.deltas),
        reference_distance: None,
        reference_exceeded: None,
    })
}

/// How far the Feistel-keyed subset distribution sits from the ideal uniform
/// subset distribution, for small `n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeistelSubsetDiagnostic {
    pub n_qubits: u32,
    pub keys: u64,
    /// Total-variation distance between the empirical support distribution
    /// and uniform over all subsets.
    pub tv_distance: f64,
    pub distinct_supports_seen: usize,
    pub possible_supports: u64,
}

/// Compare Feistel-induced and ideal subset distributions by sampling keys.
pub fn subset_feistel_diagnostic<R: Rng + ?Sized>(
    n_qubits: u32,
    keys: u64,
    rng: &mut R,
) -> Result<FeistelSubsetDiagnostic> {
    use std::collections::BTreeMap;
    let dim = 1u64 << (2 * n_qubits);
    let subset_size = 1u64 << n_qubits;
    let total = crate::symm::binomial(dim, subset_size);
    if total > SUBSET_ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "subset support enumeration",
            requested: total,
            budget: SUBSET_ENUM_BUDGET,
            hint: "reduce n",
        });
    }
    let params = crate::linalg::DomainParams::new(n_qubits, 1)?;
    // BTreeMap so the float reduction below has a fixed order
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for _ in 0..keys {
        let key = PrfKey::random(rng);
        let support = crate::states::state_support(&subset_state(&key, &params)?);
        *counts.entry(support).or_insert(0) += 1;
    }
    let uniform = 1.0 / total as f64;
    let mut tv = 0.0;
    let mut covered = 0u128;
    for &c in counts.values() {
        tv += (c as f64 / keys as f64 - uniform).abs();
        covered += 1;
    }
    tv += (total - covered) as f64 * uniform;
    Ok(FeistelSubsetDiagnostic {
        n_qubits,
        keys,
        tv_distance: 0.5 * tv,
        distinct_supports_seen: counts.len(),
        possible_supports: total as u64,
    })
}

/// Expand a compressed symmetric-basis moment to the dense representation.
pub fn sym_moment_to_dense(
    moment: &DMatrix<Complex64>,
    basis: &SymBasis,
) -> Result<DMatrix<Complex64>> {
    let dim = check_mat_dim(
        "dense moment expansion",
        pow_u128(basis.n_levels(), basis.copies()),
    )?;
    let d = basis.dim();
    // columns of the isometry from the compressed to the dense space
    let mut iso = DMatrix::zeros(dim, d);
    for (pos, x) in basis.indices().iter().enumerate() {
        let v = crate::symm::sym_basis_state(x, basis.n_levels())?;
        for i in 0..dim {
            iso[(i, pos)] = v.amp(i);
        }
    }
    Ok(&iso * moment * iso.adjoint())
}
