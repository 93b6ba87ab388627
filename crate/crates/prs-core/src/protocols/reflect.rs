//! Reflection oracles and their copy-based simulation.
//!
//! The simulated algorithm replaces each query to `O_psi = I - 2|psi><psi|`
//! with the symmetric-subspace reflection `R = I - 2 Pi_{l+1}` on the query
//! register plus `l` copies of `psi`. Two register disciplines are
//! implemented:
//!
//! - fresh per-query target blocks: untouched blocks contract against
//!   `<Theta|R|Theta> = ((l-1)/(l+1)) I - (2l/(l+1)) |psi><psi|`, so the
//!   final-state overlap (and hence the exact distance) reduces to products
//!   of small matrices, valid for any `l`;
//! - one persistent target block, evolved exactly in the compressed
//!   `H (x) Sym^l(H)` representation.
//!
//! Dense counterparts exist as small-size oracles for both disciplines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, check_vec_len, pow_u128, tensor_power, StateVector, UnitaryOperator,
};
use crate::symm::{product_state_sym_coords, sym_basis_indices, sym_reflection, SymEmbedding};

/// Copy budget, query count and dimension for one reflection-simulation run.
#[derive(Clone, Copy, Debug)]
pub struct ReflectionSimConfig {
    pub copies: usize,
    pub queries: usize,
    pub dim: usize,
    /// Acceptance slack on the distance bound when harnesses assert it.
    pub tolerance: f64,
}

impl ReflectionSimConfig {
    pub fn new(copies: usize, queries: usize, dim: usize) -> Result<Self> {
        if copies == 0 || queries == 0 {
            return Err(Error::InvalidArgument(
                "reflection simulation needs l >= 1 and q >= 1".into(),
            ));
        }
        Ok(Self {
            copies,
            queries,
            dim,
            tolerance: 1e-9,
        })
    }

    /// `2 q / sqrt(l + 1)`.
    pub fn distance_bound(&self) -> f64 {
        2.0 * self.queries as f64 / ((self.copies as f64) + 1.0).sqrt()
    }
}

/// The reflection oracle `O_psi = I - 2 |psi><psi|`.
pub fn reflection_oracle(psi: &StateVector) -> UnitaryOperator {
    let dim = psi.dim();
    let mut mat = DMatrix::identity(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            mat[(i, j)] -= Complex64::new(2.0, 0.0) * psi.amp(i) * psi.amp(j).conj();
        }
    }
    UnitaryOperator::from_mat_unchecked(mat)
}

/// The contraction of `R` against an untouched copy block:
/// `<Theta|R|Theta> = ((l-1)/(l+1)) I - (2l/(l+1)) |psi><psi|`.
pub fn theta_reflection_matrix(psi: &StateVector, copies: usize) -> DMatrix<Complex64> {
    let dim = psi.dim();
    let l = copies as f64;
    let mut mat = DMatrix::identity(dim, dim) * Complex64::new((l - 1.0) / (l + 1.0), 0.0);
    let scale = Complex64::new(2.0 * l / (l + 1.0), 0.0);
    for i in 0..dim {
        for j in 0..dim {
            mat[(i, j)] -= scale * psi.amp(i) * psi.amp(j).conj();
        }
    }
    mat
}

/// Result of one simulated reflection query.
#[derive(Clone, Debug)]
pub struct ReflectionQueryOutcome {
    /// `<Psi_A|Psi_B>` between the true-oracle and simulated joint states.
    pub overlap: Complex64,
    /// Exact Euclidean distance between the joint states.
    pub euclid_distance: f64,
    /// Trace distance between the (pure) joint states.
    pub trace_distance: f64,
    /// `2 / sqrt(l + 1)`.
    pub bound: f64,
}

fn outcome_from_overlap(overlap: Complex64, bound: f64) -> ReflectionQueryOutcome {
    let euclid = (2.0 - 2.0 * overlap.re).max(0.0).sqrt();
    let trace = (1.0 - overlap.norm_sqr()).max(0.0).sqrt();
    ReflectionQueryOutcome {
        overlap,
        euclid_distance: euclid,
        trace_distance: trace,
        bound,
    }
}

/// Exact distance between `R (|phi> (x) psi^(x)l)` and `(O_psi |phi>) (x)
/// psi^(x)l`, computed in closed form; valid for any `l`.
pub fn reflection_query(
    psi: &StateVector,
    phi: &StateVector,
    copies: usize,
) -> Result<ReflectionQueryOutcome> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: phi.dim(),
        });
    }
    if copies == 0 {
        return Err(Error::InvalidArgument("need l >= 1 copies".into()));
    }
    let oracle = reflection_oracle(psi);
    let alpha = oracle.apply(phi)?;
    // the all-Theta component of the simulated state (sub-normalized)
    let beta = theta_reflection_matrix(psi, copies) * phi.amps();
    let overlap = alpha.amps().dotc(&beta);
    Ok(outcome_from_overlap(
        overlap,
        2.0 / ((copies as f64) + 1.0).sqrt(),
    ))
}

/// Dense single-query oracle: returns `(R (phi (x) Theta), (O_psi phi) (x)
/// Theta)` as explicit `N^{l+1}` vectors. Capacity-limited.
pub fn reflection_query_dense(
    psi: &StateVector,
    phi: &StateVector,
    copies: usize,
) -> Result<(StateVector, StateVector)> {
    let dim = psi.dim();
    check_mat_dim("dense symmetric reflection", pow_u128(dim, copies + 1))?;
    let refl = sym_reflection(dim, copies + 1)?;
    let theta = tensor_power(psi, copies)?;
    let joint = phi.tensor(&theta)?;
    let simulated = refl.apply(&joint)?;
    let truth = reflection_oracle(psi).apply(phi)?.tensor(&theta)?;
    Ok((simulated, truth))
}

/// Which target-register discipline the simulation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetMode {
    /// A fresh `psi^(x)l` block per query (`q*l` copies total).
    FreshPerQuery,
    /// One `psi^(x)l` block reused across all queries (`l` copies total).
    Persistent,
}

impl std::fmt::Display for TargetMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetMode::FreshPerQuery => write!(f, "fresh"),
            TargetMode::Persistent => write!(f, "persistent"),
        }
    }
}

/// Outcome of a full simulated oracle algorithm.
#[derive(Clone, Debug)]
pub struct ReflectionAlgOutcome {
    pub queries: usize,
    pub copies: usize,
    pub dim: usize,
    pub mode: TargetMode,
    pub overlap: Complex64,
    /// Exact Euclidean distance between true and simulated final states.
    pub euclid_distance: f64,
    pub trace_distance: f64,
    /// `2 q / sqrt(l + 1)`.
    pub bound: f64,
    /// The true algorithm's final query-register state.
    pub oracle_final: StateVector,
}

/// Run an oracle algorithm (initial state, one interleaved unitary after each
/// query) against the true reflection oracle and against the copy-based
/// simulation, returning the exact distance between the final states.
///
/// The query count is `unitaries.len()`; pass identities for a bare query
/// sequence. Both target disciplines are exact for any `l`: fresh blocks via
/// the `<Theta|R|Theta>` contraction, the persistent block via the
/// compressed symmetric representation.
pub fn simulate_reflection_algorithm(
    psi: &StateVector,
    initial: &StateVector,
    unitaries: &[UnitaryOperator],
    copies: usize,
    mode: TargetMode,
) -> Result<ReflectionAlgOutcome> {
    let dim = psi.dim();
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: initial.dim(),
            right: dim,
        });
    }
    let queries = unitaries.len();
    if queries == 0 || copies == 0 {
        return Err(Error::InvalidArgument(
            "need at least one query and one copy".into(),
        ));
    }
    for u in unitaries {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: u.dim(),
                right: dim,
            });
        }
    }
    let oracle = reflection_oracle(psi);
    let mut alpha = initial.amps().clone();
    for u in unitaries {
        alpha = u.mat() * (oracle.mat() * alpha);
    }
    let bound = 2.0 * queries as f64 / ((copies as f64) + 1.0).sqrt();

    let overlap = match mode {
        TargetMode::FreshPerQuery => {
            // every untouched block contracts to M = <Theta|R|Theta>
            let m = theta_reflection_matrix(psi, copies);
            let mut beta = initial.amps().clone();
            for u in unitaries {
                beta = u.mat() * (&m * beta);
            }
            alpha.dotc(&beta)
        }
        TargetMode::Persistent => {
            let embed = SymEmbedding::new(dim, copies)?;
            let mut joint = embed.joint_product(initial, psi)?;
            for u in unitaries {
                joint = embed.apply_reflection(&joint);
                joint = embed.apply_register_operator(u, &joint)?;
            }
            // true branch in the same coordinates: alpha (x) Theta
            let basis = sym_basis_indices(dim, copies)?;
            let theta = product_state_sym_coords(psi, &basis);
            let d = basis.dim();
            let mut truth = DVector::zeros(dim * d);
            for i in 0..dim {
                for x in 0..d {
                    truth[i * d + x] = alpha[i] * theta[x];
                }
            }
            truth.dotc(&joint)
        }
    };

    let euclid = (2.0 - 2.0 * overlap.re).max(0.0).sqrt();
    let trace = (1.0 - overlap.norm_sqr()).max(0.0).sqrt();
    Ok(ReflectionAlgOutcome {
        queries,
        copies,
        dim,
        mode,
        overlap,
        euclid_distance: euclid,
        trace_distance: trace,
        bound,
        oracle_final: StateVector::new(alpha)?,
    })
}

/// Dense final states of the true and simulated algorithms, for small sizes.
#[derive(Clone, Debug)]
pub struct DenseReflectionOutcome {
    pub final_true: StateVector,
    pub final_sim: StateVector,
    pub euclid_distance: f64,
    pub trace_distance: f64,
}

fn apply_on_register_pair(
    op: &DMatrix<Complex64>,
    vec: &mut DVector<Complex64>,
    dim_a: usize,
    stride_a: usize,
    dim_b: usize,
    stride_b: usize,
) {
    let total = vec.len();
    let sub = dim_a * dim_b;
    let mut gathered = vec![Complex64::ZERO; sub];
    let mut visited = vec![false; total];
    for base in 0..total {
        if visited[base] {
            continue;
        }
        if !(base / stride_a).is_multiple_of(dim_a) || !(base / stride_b).is_multiple_of(dim_b) {
            continue;
        }
        for a in 0..dim_a {
            for b in 0..dim_b {
                let idx = base + a * stride_a + b * stride_b;
                gathered[a * dim_b + b] = vec[idx];
                visited[idx] = true;
            }
        }
        for (row, out) in (0..sub).map(|r| {
            let mut acc = Complex64::ZERO;
            for c in 0..sub {
                acc += op[(r, c)] * gathered[c];
            }
            (r, acc)
        }) {
            let (a, b) = (row / dim_b, row % dim_b);
            vec[base + a * stride_a + b * stride_b] = out;
        }
    }
}

/// Dense oracle for [`simulate_reflection_algorithm`], building the full
/// joint state (`N^{l+1}` persistent, `N^{1+q*l}` fresh). Capacity-limited.
pub fn simulate_reflection_algorithm_dense(
    psi: &StateVector,
    initial: &StateVector,
    unitaries: &[UnitaryOperator],
    copies: usize,
    mode: TargetMode,
) -> Result<DenseReflectionOutcome> {
    let dim = psi.dim();
    let queries = unitaries.len();
    if queries == 0 || copies == 0 {
        return Err(Error::InvalidArgument(
            "need at least one query and one copy".into(),
        ));
    }
    let oracle = reflection_oracle(psi);
    let mut alpha = initial.clone();
    for u in unitaries {
        alpha = u.apply(&oracle.apply(&alpha)?)?;
    }

    match mode {
        TargetMode::Persistent => {
            check_mat_dim("dense persistent simulation", pow_u128(dim, copies + 1))?;
            let refl = sym_reflection(dim, copies + 1)?;
            let theta = tensor_power(psi, copies)?;
            let block = theta.dim();
            let mut joint = initial.tensor(&theta)?;
            for u in unitaries {
                joint = refl.apply(&joint)?;
                // unitary on the query register
                let mut amps = joint.amps().clone();
                apply_on_register_pair(u.mat(), &mut amps, dim, block, 1, 1);
                joint = StateVector::new(amps)?;
            }
            let final_true = alpha.tensor(&theta)?;
            let overlap = final_true.inner(&joint)?;
            Ok(DenseReflectionOutcome {
                euclid_distance: (final_true.amps() - joint.amps()).norm(),
                trace_distance: (1.0 - overlap.norm_sqr()).max(0.0).sqrt(),
                final_true,
                final_sim: joint,
            })
        }
        TargetMode::FreshPerQuery => {
            let block = pow_u128(dim, copies);
            let total = check_vec_len(
                "dense fresh-block simulation",
                (dim as u128) * block.saturating_pow(queries as u32),
            )?;
            check_mat_dim("dense symmetric reflection", pow_u128(dim, copies + 1))?;
            let refl = sym_reflection(dim, copies + 1)?;
            let theta = tensor_power(psi, copies)?;
            let block = theta.dim();

            // layout: query register slowest, then T_1 .. T_q
            let mut joint = initial.clone();
            for _ in 0..queries {
                joint = joint.tensor(&theta)?;
            }
            debug_assert_eq!(joint.dim(), total);
            let mut amps = joint.amps().clone();
            let stride_d = total / dim;
            for (i, u) in unitaries.iter().enumerate() {
                let stride_t = block.pow((queries - 1 - i) as u32);
                apply_on_register_pair(refl.mat(), &mut amps, dim, stride_d, block, stride_t);
                apply_on_register_pair(u.mat(), &mut amps, dim, stride_d, 1, 1);
            }
            let final_sim = StateVector::new(amps)?;
            let mut final_true = alpha;
            for _ in 0..queries {
                final_true = final_true.tensor(&theta)?;
            }
            let overlap = final_true.inner(&final_sim)?;
            Ok(DenseReflectionOutcome {
                euclid_distance: (final_true.amps() - final_sim.amps()).norm(),
                trace_distance: (1.0 - overlap.norm_sqr()).max(0.0).sqrt(),
                final_true,
                final_sim,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_haar_state, sample_haar_unitary};
    use crate::rng::derive_stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn oracle_reflects_its_own_state() {
        let mut rng = derive_stream(61, "reflect-test", 0);
        let psi = sample_haar_state(4, &mut rng).unwrap();
        let oracle = reflection_oracle(&psi);
        let out = oracle.apply(&psi).unwrap();
        assert!((out.amps() + psi.amps()).norm() < 1e-12);
        // involution
        let sq = oracle.compose(&oracle).unwrap();
        let dev = crate::linalg::max_abs_entry(&(sq.mat() - DMatrix::identity(4, 4)));
        assert!(dev < 1e-12);
        // spectrum: one -1, rest +1
        let eigs = crate::linalg::hermitian_eigenvalues(oracle.mat()).unwrap();
        assert_abs_diff_eq!(eigs[3], -1.0, epsilon = 1e-12);
        for &e in &eigs[..3] {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_query_matches_the_dense_oracle() {
        let mut rng = derive_stream(62, "reflect-test-dense", 0);
        for &(dim, copies) in &[(2usize, 1usize), (2, 4), (4, 2), (3, 3)] {
            let psi = sample_haar_state(dim, &mut rng).unwrap();
            let phi = sample_haar_state(dim, &mut rng).unwrap();
            let fast = reflection_query(&psi, &phi, copies).unwrap();
            let (sim, truth) = reflection_query_dense(&psi, &phi, copies).unwrap();
            let dense_dist = (sim.amps() - truth.amps()).norm();
            assert_abs_diff_eq!(fast.euclid_distance, dense_dist, epsilon = 1e-12);
            let dense_overlap = truth.inner(&sim).unwrap();
            assert!((fast.overlap - dense_overlap).norm() < 1e-12);
        }
    }

    #[test]
    fn single_query_overlap_lower_bound() {
        let mut rng = derive_stream(63, "reflect-test-bound", 0);
        for _ in 0..50 {
            let psi = sample_haar_state(4, &mut rng).unwrap();
            let phi = sample_haar_state(4, &mut rng).unwrap();
            let out = reflection_query(&psi, &phi, 1).unwrap();
            // overlap >= 1 - 2/(l+1) = 0 at l = 1
            assert!(out.overlap.re >= -1e-12);
            assert!(out.euclid_distance <= out.bound + 1e-12);
        }
    }

    #[test]
    fn query_on_the_oracle_state_is_exact() {
        let mut rng = derive_stream(64, "reflect-test-fixed", 0);
        let psi = sample_haar_state(4, &mut rng).unwrap();
        for copies in [1usize, 3, 16] {
            let out = reflection_query(&psi, &psi, copies).unwrap();
            assert_abs_diff_eq!(out.euclid_distance, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn per_query_distance_decreases_with_more_copies() {
        let mut rng = derive_stream(65, "reflect-test-monotone", 0);
        for _ in 0..100 {
            let psi = sample_haar_state(4, &mut rng).unwrap();
            let phi = sample_haar_state(4, &mut rng).unwrap();
            let mut last = f64::INFINITY;
            for copies in [1usize, 4, 16] {
                let out = reflection_query(&psi, &phi, copies).unwrap();
                assert!(out.euclid_distance <= out.bound + 1e-12);
                assert!(out.euclid_distance <= last + 1e-12);
                last = out.euclid_distance;
            }
        }
    }

    #[test]
    fn single_query_algorithm_reduces_to_the_query_primitive() {
        let mut rng = derive_stream(66, "reflect-test-q1", 0);
        let psi = sample_haar_state(4, &mut rng).unwrap();
        let phi = sample_haar_state(4, &mut rng).unwrap();
        let id = UnitaryOperator::identity(4).unwrap();
        let alg = simulate_reflection_algorithm(&psi, &phi, &[id], 3, TargetMode::FreshPerQuery)
            .unwrap();
        let query = reflection_query(&psi, &phi, 3).unwrap();
        assert_abs_diff_eq!(alg.euclid_distance, query.euclid_distance, epsilon = 1e-12);
        // fresh and persistent coincide for a single query
        let id = UnitaryOperator::identity(4).unwrap();
        let alg_p =
            simulate_reflection_algorithm(&psi, &phi, &[id], 3, TargetMode::Persistent).unwrap();
        assert_abs_diff_eq!(alg_p.euclid_distance, query.euclid_distance, epsilon = 1e-12);
    }

    #[test]
    fn fresh_mode_matches_the_dense_oracle() {
        let mut rng = derive_stream(67, "reflect-test-fresh-dense", 0);
        for &(dim, copies, queries) in &[(2usize, 1usize, 2usize), (2, 2, 2), (2, 2, 3), (3, 1, 2)]
        {
            let psi = sample_haar_state(dim, &mut rng).unwrap();
            let phi = sample_haar_state(dim, &mut rng).unwrap();
            let unitaries: Vec<_> = (0..queries)
                .map(|_| sample_haar_unitary(dim, &mut rng).unwrap())
                .collect();
            let fast =
                simulate_reflection_algorithm(&psi, &phi, &unitaries, copies, TargetMode::FreshPerQuery)
                    .unwrap();
            let dense = simulate_reflection_algorithm_dense(
                &psi,
                &phi,
                &unitaries,
                copies,
                TargetMode::FreshPerQuery,
            )
            .unwrap();
            assert_abs_diff_eq!(fast.euclid_distance, dense.euclid_distance, epsilon = 1e-10);
            assert_abs_diff_eq!(fast.trace_distance, dense.trace_distance, epsilon = 1e-10);
        }
    }

    #[test]
    fn persistent_mode_matches_the_dense_oracle() {
        let mut rng = derive_stream(68, "reflect-test-persist-dense", 0);
        for &(dim, copies, queries) in &[(2usize, 3usize, 2usize), (3, 2, 3), (4, 2, 2)] {
            let psi = sample_haar_state(dim, &mut rng).unwrap();
            let phi = sample_haar_state(dim, &mut rng).unwrap();
            let unitaries: Vec<_> = (0..queries)
                .map(|_| sample_haar_unitary(dim, &mut rng).unwrap())
                .collect();
            let fast =
                simulate_reflection_algorithm(&psi, &phi, &unitaries, copies, TargetMode::Persistent)
                    .unwrap();
            let dense = simulate_reflection_algorithm_dense(
                &psi,
                &phi,
                &unitaries,
                copies,
                TargetMode::Persistent,
            )
            .unwrap();
            assert_abs_diff_eq!(fast.euclid_distance, dense.euclid_distance, epsilon = 1e-10);
            assert_abs_diff_eq!(fast.trace_distance, dense.trace_distance, epsilon = 1e-10);
        }
    }

    #[test]
    fn multi_query_distances_respect_the_bound() {
        let mut rng = derive_stream(69, "reflect-test-multiq", 0);
        // q=2, l=4, N=2: bound 2*2/sqrt(5)
        let psi = sample_haar_state(2, &mut rng).unwrap();
        let phi = sample_haar_state(2, &mut rng).unwrap();
        let us: Vec<_> = (0..2)
            .map(|_| sample_haar_unitary(2, &mut rng).unwrap())
            .collect();
        for mode in [TargetMode::FreshPerQuery, TargetMode::Persistent] {
            let out = simulate_reflection_algorithm(&psi, &phi, &us, 4, mode).unwrap();
            assert!(out.euclid_distance <= 4.0 / 5f64.sqrt() + 1e-12);
        }
        // q=3, l=16, N=2: bound 6/sqrt(17)
        let us: Vec<_> = (0..3)
            .map(|_| sample_haar_unitary(2, &mut rng).unwrap())
            .collect();
        for mode in [TargetMode::FreshPerQuery, TargetMode::Persistent] {
            let out = simulate_reflection_algorithm(&psi, &phi, &us, 16, mode).unwrap();
            assert!(out.euclid_distance <= 6.0 / 17f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn algorithm_distance_is_monotone_in_the_copy_budget() {
        let mut rng = derive_stream(70, "reflect-test-alg-monotone", 0);
        for _ in 0..20 {
            let psi = sample_haar_state(2, &mut rng).unwrap();
            let phi = sample_haar_state(2, &mut rng).unwrap();
            let us: Vec<_> = (0..2)
                .map(|_| sample_haar_unitary(2, &mut rng).unwrap())
                .collect();
            let mut last = f64::INFINITY;
            for copies in [1usize, 4, 16, 64] {
                let out =
                    simulate_reflection_algorithm(&psi, &phi, &us, copies, TargetMode::FreshPerQuery)
                        .unwrap();
                assert!(out.euclid_distance <= last + 1e-12);
                last = out.euclid_distance;
            }
        }
    }

    #[test]
    fn config_carries_the_bound() {
        let cfg = ReflectionSimConfig::new(16, 3, 4).unwrap();
        assert_abs_diff_eq!(cfg.distance_bound(), 6.0 / 17f64.sqrt(), epsilon = 1e-15);
        assert!(ReflectionSimConfig::new(0, 1, 4).is_err());
    }
}
