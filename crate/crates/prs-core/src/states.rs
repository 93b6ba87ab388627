//! The candidate pseudorandom state families, built both directly from their
//! amplitude formulas and via the QFT / phase-kickback generating circuit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, check_vec_len, omega_pow, partial_trace_first, partial_trace_second,
    pow_u128, DomainParams, StateVector, UnitaryOperator,
};
use crate::randfn::{prf_eval, prp_eval, ExplicitFunction, PrfKey};

/// Which candidate family a state was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    RandomPhase,
    BinaryPhase,
    RandomSubset,
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyKind::RandomPhase => write!(f, "random_phase"),
            FamilyKind::BinaryPhase => write!(f, "binary_phase"),
            FamilyKind::RandomSubset => write!(f, "random_subset"),
        }
    }
}

/// A keyed family of candidate pseudorandom states.
#[derive(Clone, Debug)]
pub struct PrsFamily {
    pub kind: FamilyKind,
    pub params: DomainParams,
}

impl PrsFamily {
    pub fn new(kind: FamilyKind, params: DomainParams) -> Self {
        Self { kind, params }
    }

    /// State dimension: `N` for the phase families, `N^2` for subsets.
    pub fn state_dim(&self) -> u64 {
        match self.kind {
            FamilyKind::RandomPhase | FamilyKind::BinaryPhase => self.params.domain_size(),
            FamilyKind::RandomSubset => self.params.domain_size() * self.params.domain_size(),
        }
    }

    pub fn state_for_key(&self, key: &PrfKey) -> Result<StateVector> {
        match self.kind {
            FamilyKind::RandomPhase => phase_state(key, &self.params),
            FamilyKind::BinaryPhase => binary_phase_state(key, &self.params),
            FamilyKind::RandomSubset => subset_state(key, &self.params),
        }
    }

    /// Draw a fresh key and build its state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(PrfKey, StateVector)> {
        let key = PrfKey::random(rng);
        let state = self.state_for_key(&key)?;
        Ok((key, state))
    }
}

/// Phase state of an explicit function: amplitude `omega_N^{f(x)} / sqrt(N)`
/// at `x`.
pub fn function_phase_state(f: &ExplicitFunction) -> Result<StateVector> {
    let n = f.domain();
    check_vec_len("phase state", n as u128)?;
    let norm = 1.0 / (n as f64).sqrt();
    let amps = DVector::from_fn(n, |x, _| {
        omega_pow(n as u64, f.eval(x) as u64) * Complex64::new(norm, 0.0)
    });
    StateVector::new(amps)
}

/// The keyed random phase state `N^{-1/2} sum_x omega_N^{PRF_k(x)} |x>`.
pub fn phase_state(key: &PrfKey, params: &DomainParams) -> Result<StateVector> {
    check_vec_len("phase state", params.domain_size() as u128)?;
    let table = ExplicitFunction::from_prf(key, params.domain_size())?;
    function_phase_state(&table)
}

/// The quantum Fourier transform on `n` qubits: entry `(x, y)` is
/// `omega_N^{x y} / sqrt(N)`.
pub fn qft(n: u32) -> Result<UnitaryOperator> {
    let dim = check_mat_dim("QFT", pow_u128(2, n as usize))?;
    let norm = 1.0 / (dim as f64).sqrt();
    let mat = DMatrix::from_fn(dim, dim, |x, y| {
        omega_pow(dim as u64, (x as u64 * y as u64) % dim as u64) * Complex64::new(norm, 0.0)
    });
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// `H^(x)n`: the n-qubit Hadamard transform.
pub fn hadamard_transform(n: u32) -> Result<UnitaryOperator> {
    let dim = check_mat_dim("Hadamard transform", pow_u128(2, n as usize))?;
    let norm = 1.0 / (dim as f64).sqrt();
    let mat = DMatrix::from_fn(dim, dim, |x, y| {
        let parity = (x & y).count_ones() % 2;
        Complex64::new(if parity == 0 { norm } else { -norm }, 0.0)
    });
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// Two-register generating circuit for the phase state of an explicit
/// function table.
///
/// Prepares `H^(x)n |0> (x) F |1>`, applies the modular-subtraction oracle
/// `|x>|y> -> |x>|y - f(x) mod N>` as an explicit permutation of the joint
/// index space, checks that the second register is left intact, and returns
/// the first register's state with no global-phase slack.
pub fn phase_state_circuit_for_table(f: &ExplicitFunction) -> Result<StateVector> {
    let n = f.domain();
    let joint_len = check_vec_len("phase state circuit", (n as u128) * (n as u128))?;

    // H^n|0> (x) F|1>: amplitude omega_N^y / N at (x, y)
    let scale = 1.0 / n as f64;
    let mut joint = DVector::<Complex64>::zeros(joint_len);
    for x in 0..n {
        for y in 0..n {
            joint[x * n + y] = omega_pow(n as u64, y as u64) * Complex64::new(scale, 0.0);
        }
    }

    // oracle: |x>|y> -> |x>|y - f(x) mod N>
    let mut oracled = DVector::<Complex64>::zeros(joint_len);
    for x in 0..n {
        let shift = f.eval(x);
        for y in 0..n {
            let target = (y + n - shift) % n;
            oracled[x * n + target] = joint[x * n + y];
        }
    }

    // discard the second register: require the joint state to be a product
    let joint_mat = DMatrix::from_fn(joint_len, joint_len, |i, j| {
        oracled[i] * oracled[j].conj()
    });
    let reduced_first = partial_trace_second(&joint_mat, n, n)?;
    let purity: f64 = reduced_first.iter().map(|z| z.norm_sqr()).sum();
    if purity < 1.0 - 1e-10 {
        return Err(Error::DegenerateInput(
            "registers left entangled by the phase oracle",
        ));
    }

    // the second register holds F|1> with amplitude 1/sqrt(N) at |0>, so the
    // first register's amplitudes (including global phase) can be read off
    // the y = 0 slice
    let sqrt_n = Complex64::new((n as f64).sqrt(), 0.0);
    let amps = DVector::from_fn(n, |x, _| oracled[x * n] * sqrt_n);
    StateVector::new(amps)
}

/// Reduced state of the circuit's second register, for the register-intact
/// check.
pub fn phase_circuit_second_register(f: &ExplicitFunction) -> Result<DMatrix<Complex64>> {
    let n = f.domain();
    let joint_len = check_vec_len("phase state circuit", (n as u128) * (n as u128))?;
    let scale = 1.0 / n as f64;
    let mut oracled = DVector::<Complex64>::zeros(joint_len);
    for x in 0..n {
        let shift = f.eval(x);
        for y in 0..n {
            let target = (y + n - shift) % n;
            oracled[x * n + target] = omega_pow(n as u64, y as u64) * Complex64::new(scale, 0.0);
        }
    }
    let joint_mat = DMatrix::from_fn(joint_len, joint_len, |i, j| {
        oracled[i] * oracled[j].conj()
    });
    partial_trace_first(&joint_mat, n, n)
}

/// Keyed circuit-generated phase state; must agree amplitudewise with
/// [`phase_state`].
pub fn phase_state_circuit(key: &PrfKey, params: &DomainParams) -> Result<StateVector> {
    let table = ExplicitFunction::from_prf(key, params.domain_size())?;
    phase_state_circuit_for_table(&table)
}

/// Binary phase state of an explicit 0/1-valued function: amplitude
/// `(-1)^{b(x)} / sqrt(N)`.
pub fn binary_phase_state_for_table(b: &ExplicitFunction) -> Result<StateVector> {
    let n = b.domain();
    check_vec_len("binary phase state", n as u128)?;
    if let Some(&bad) = b.table().iter().find(|&&v| v > 1) {
        return Err(Error::DomainViolation {
            value: bad as u64,
            domain: 2,
        });
    }
    let norm = 1.0 / (n as f64).sqrt();
    let amps = DVector::from_fn(n, |x, _| {
        Complex64::new(if b.eval(x) == 0 { norm } else { -norm }, 0.0)
    });
    StateVector::new(amps)
}

/// Keyed binary phase state, using the parity of the PRF value as the sign
/// function.
pub fn binary_phase_state(key: &PrfKey, params: &DomainParams) -> Result<StateVector> {
    let n = params.domain_size();
    check_vec_len("binary phase state", n as u128)?;
    let table = (0..n)
        .map(|x| prf_eval(key, x, n).map(|v| (v & 1) as usize))
        .collect::<Result<Vec<_>>>()?;
    binary_phase_state_for_table(&ExplicitFunction::from_table(n as usize, table)?)
}

/// Subset state from an explicit permutation of `{0,1}^{2n}`: the equal
/// superposition of `perm(x || 0^n)` over all `x`.
pub fn subset_state_from_permutation(
    perm: &ExplicitFunction,
    n_qubits: u32,
) -> Result<StateVector> {
    let n = 1usize << n_qubits;
    let dim = check_vec_len("subset state", pow_u128(2, 2 * n_qubits as usize))?;
    if perm.domain() != dim {
        return Err(Error::DimensionMismatch {
            left: perm.domain(),
            right: dim,
        });
    }
    if !perm.is_permutation() {
        return Err(Error::InvalidArgument(
            "subset construction needs a permutation table".into(),
        ));
    }
    let norm = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = DVector::zeros(dim);
    for x in 0..n {
        // embed x as x || 0^n, first register on the high-order bits
        amps[perm.eval(x << n_qubits)] = norm;
    }
    StateVector::new(amps)
}

/// The keyed random subset state on `2n` qubits:
/// `N^{-1/2} sum_x |PRP_k(x || 0^n)>`.
pub fn subset_state(key: &PrfKey, params: &DomainParams) -> Result<StateVector> {
    let n_qubits = params.qubits();
    let n = params.domain_size();
    let dim = check_vec_len("subset state", pow_u128(2, 2 * n_qubits as usize))?;
    let bits = 2 * n_qubits;
    let norm = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = DVector::zeros(dim);
    for x in 0..n {
        let image = prp_eval(key, x << n_qubits, bits)?;
        amps[image as usize] = norm;
    }
    StateVector::new(amps)
}

/// Support of a subset state: the sorted list of basis indices with nonzero
/// amplitude.
pub fn state_support(state: &StateVector) -> Vec<usize> {
    (0..state.dim())
        .filter(|&i| state.amp(i).norm_sqr() > 1e-20)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_entry, DensityOperator};
    use crate::rng::derive_stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_function_gives_uniform_superposition() {
        let f = ExplicitFunction::constant(4, 0).unwrap();
        let v = function_phase_state(&f).unwrap();
        for x in 0..4 {
            assert!((v.amp(x) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn two_level_phase_state_is_the_minus_state() {
        let f = ExplicitFunction::from_table(2, vec![0, 1]).unwrap();
        let v = function_phase_state(&f).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.amp(0) - Complex64::new(r, 0.0)).norm() < 1e-12);
        assert!((v.amp(1) - Complex64::new(-r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_state_amplitudes_have_uniform_modulus() {
        let mut rng = derive_stream(31, "states-test-mod", 0);
        let params = DomainParams::new(3, 1).unwrap();
        let key = PrfKey::random(&mut rng);
        let v = phase_state(&key, &params).unwrap();
        let expected = 1.0 / 8f64.sqrt();
        for x in 0..8 {
            assert_abs_diff_eq!(v.amp(x).norm(), expected, epsilon = 1e-12);
        }
        // determinism
        let w = phase_state(&key, &params).unwrap();
        assert_eq!(v.amps(), w.amps());
    }

    #[test]
    fn qft_basics() {
        let f = qft(2).unwrap();
        // F|0> is the uniform superposition
        let col0 = f.apply(&StateVector::basis_state(4, 0).unwrap()).unwrap();
        for x in 0..4 {
            assert!((col0.amp(x) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        // unitarity
        let gram = f.mat().adjoint() * f.mat();
        assert!(max_abs_entry(&(gram - DMatrix::identity(4, 4))) < 1e-12);
        // n = 1 is the Hadamard matrix
        let h = qft(1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(r, 0.0),
                Complex64::new(r, 0.0),
                Complex64::new(r, 0.0),
                Complex64::new(-r, 0.0),
            ],
        );
        assert!(max_abs_entry(&(h.mat() - expected)) < 1e-12);
    }

    #[test]
    fn circuit_on_zero_stub_yields_plus_state() {
        let f = ExplicitFunction::constant(2, 0).unwrap();
        let v = phase_state_circuit_for_table(&f).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.amp(0) - Complex64::new(r, 0.0)).norm() < 1e-12);
        assert!((v.amp(1) - Complex64::new(r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn circuit_agrees_with_direct_construction() {
        let mut rng = derive_stream(32, "states-test-circuit", 0);
        for n in 1..=4u32 {
            let params = DomainParams::new(n, 1).unwrap();
            for _ in 0..25 {
                let key = PrfKey::random(&mut rng);
                let direct = phase_state(&key, &params).unwrap();
                let circuit = phase_state_circuit(&key, &params).unwrap();
                let dev = (direct.amps() - circuit.amps())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(dev <= 1e-10, "amplitude deviation {dev} at n={n}");
            }
        }
    }

    #[test]
    fn circuit_leaves_second_register_intact() {
        let mut rng = derive_stream(33, "states-test-reg2", 0);
        let key = PrfKey::random(&mut rng);
        let table = ExplicitFunction::from_prf(&key, 8).unwrap();
        let reduced = phase_circuit_second_register(&table).unwrap();
        let f = qft(3).unwrap();
        let f1 = f.apply(&StateVector::basis_state(8, 1).unwrap()).unwrap();
        let expected = DensityOperator::from_pure(&f1);
        assert!(max_abs_entry(&(reduced - expected.mat())) <= 1e-10);
    }

    #[test]
    fn binary_phase_state_basics() {
        let b = ExplicitFunction::constant(4, 0).unwrap();
        let v = binary_phase_state_for_table(&b).unwrap();
        for x in 0..4 {
            assert!((v.amp(x) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        let mut rng = derive_stream(34, "states-test-binary", 0);
        let params = DomainParams::new(2, 1).unwrap();
        let key = PrfKey::random(&mut rng);
        let v = binary_phase_state(&key, &params).unwrap();
        for x in 0..4 {
            let a = v.amp(x);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(a.re.abs(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn binary_family_equals_phase_family_for_two_levels() {
        // with N = 2, omega_N = -1, so the four phase functions give exactly
        // the four binary sign states
        let phase_states: Vec<_> = crate::randfn::enumerate_functions(2)
            .unwrap()
            .map(|f| function_phase_state(&f).unwrap())
            .collect();
        let binary_states: Vec<_> = crate::randfn::enumerate_functions(2)
            .unwrap()
            .map(|b| binary_phase_state_for_table(&b).unwrap())
            .collect();
        for b in &binary_states {
            assert!(phase_states
                .iter()
                .any(|p| (p.amps() - b.amps()).norm() < 1e-12));
        }
    }

    #[test]
    fn subset_state_identity_stub() {
        let perm = ExplicitFunction::identity(16);
        let v = subset_state_from_permutation(&perm, 2).unwrap();
        for x in 0..4usize {
            assert!((v.amp(x << 2) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        assert_eq!(state_support(&v), vec![0, 4, 8, 12]);
    }

    #[test]
    fn subset_state_has_exactly_n_uniform_amplitudes() {
        let mut rng = derive_stream(35, "states-test-subset", 0);
        let params = DomainParams::new(2, 1).unwrap();
        let key = PrfKey::random(&mut rng);
        let v = subset_state(&key, &params).unwrap();
        let support = state_support(&v);
        assert_eq!(support.len(), 4);
        for &i in &support {
            assert_abs_diff_eq!(v.amp(i).norm(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn family_handles_dispatch_to_the_right_construction() {
        let mut rng = derive_stream(37, "states-test-family", 0);
        let params = DomainParams::new(2, 1).unwrap();
        for kind in [
            FamilyKind::RandomPhase,
            FamilyKind::BinaryPhase,
            FamilyKind::RandomSubset,
        ] {
            let family = PrsFamily::new(kind, params.clone());
            let (key, state) = family.sample(&mut rng).unwrap();
            assert_eq!(state.dim() as u64, family.state_dim());
            let again = family.state_for_key(&key).unwrap();
            assert_eq!(state.amps(), again.amps());
        }
    }

    #[test]
    fn subset_supports_differ_across_keys() {
        let mut rng = derive_stream(36, "states-test-supports", 0);
        let params = DomainParams::new(3, 1).unwrap();
        let mut differing = 0;
        for _ in 0..100 {
            let k1 = PrfKey::random(&mut rng);
            let k2 = PrfKey::random(&mut rng);
            let s1 = state_support(&subset_state(&k1, &params).unwrap());
            let s2 = state_support(&subset_state(&k2, &params).unwrap());
            if s1 != s2 {
                differing += 1;
            }
        }
        assert!(differing >= 99);
    }
}
