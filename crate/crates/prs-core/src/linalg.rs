//! Dense complex linear algebra: states, operators, tensor products, norms,
//! distances, Haar sampling.
//!
//! Everything is dense `Complex64` backed by `nalgebra`. Allocations are
//! guarded by desk-scale caps ([`MAX_DENSE_VEC_LEN`], [`MAX_DENSE_MAT_DIM`]);
//! exceeding them is a [`Error::CapacityExceeded`], never an OOM.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for structural invariants (normalization, hermiticity, unitarity).
pub const INVARIANT_TOL: f64 = 1e-10;
/// Tolerance for derived numerical identities.
pub const DERIVED_TOL: f64 = 1e-9;
/// Tolerance for identities that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Longest dense vector any operation may allocate.
pub const MAX_DENSE_VEC_LEN: usize = 1 << 22;
/// Largest dense square-matrix side any operation may allocate.
pub const MAX_DENSE_MAT_DIM: usize = 1 << 12;

/// Fail with a capacity error if a dense vector of length `len` is too large.
pub fn check_vec_len(what: &'static str, len: u128) -> Result<usize> {
    if len == 0 || len > MAX_DENSE_VEC_LEN as u128 {
        return Err(Error::CapacityExceeded {
            what,
            requested: len,
            cap: MAX_DENSE_VEC_LEN as u128,
        });
    }
    Ok(len as usize)
}

/// Fail with a capacity error if a dense `dim x dim` matrix is too large.
pub fn check_mat_dim(what: &'static str, dim: u128) -> Result<usize> {
    if dim == 0 || dim > MAX_DENSE_MAT_DIM as u128 {
        return Err(Error::CapacityExceeded {
            what,
            requested: dim,
            cap: MAX_DENSE_MAT_DIM as u128,
        });
    }
    Ok(dim as usize)
}

/// `base^exp` as u128 without overflow surprises.
pub fn pow_u128(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

fn max_hermitian_deviation(mat: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..mat.nrows() {
        for j in i..mat.ncols() {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of a Hermitian matrix, descending. Errors if the input is not
/// Hermitian within [`INVARIANT_TOL`].
pub fn hermitian_eigenvalues(mat: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let dev = max_hermitian_deviation(mat);
    if dev > INVARIANT_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut eigs: Vec<f64> = mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eigs)
}

/// Largest |entry| of a complex matrix.
pub fn max_abs_entry(mat: &DMatrix<Complex64>) -> f64 {
    mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product, first factor on the high-order index.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Partial trace over the second factor of a `d1*d2` square matrix.
pub fn partial_trace_second(
    mat: &DMatrix<Complex64>,
    d1: usize,
    d2: usize,
) -> Result<DMatrix<Complex64>> {
    if mat.nrows() != d1 * d2 || mat.ncols() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            left: mat.nrows(),
            right: d1 * d2,
        });
    }
    let mut out = DMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for ip in 0..d1 {
            let mut acc = Complex64::ZERO;
            for j in 0..d2 {
                acc += mat[(i * d2 + j, ip * d2 + j)];
            }
            out[(i, ip)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace over the first factor of a `d1*d2` square matrix.
pub fn partial_trace_first(
    mat: &DMatrix<Complex64>,
    d1: usize,
    d2: usize,
) -> Result<DMatrix<Complex64>> {
    if mat.nrows() != d1 * d2 || mat.ncols() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            left: mat.nrows(),
            right: d1 * d2,
        });
    }
    let mut out = DMatrix::zeros(d2, d2);
    for j in 0..d2 {
        for jp in 0..d2 {
            let mut acc = Complex64::ZERO;
            for i in 0..d1 {
                acc += mat[(i * d2 + j, i * d2 + jp)];
            }
            out[(j, jp)] = acc;
        }
    }
    Ok(out)
}

/// A pure quantum state: unit-norm complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Wrap an amplitude vector, enforcing unit norm within [`INVARIANT_TOL`].
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be >= 1".into()));
        }
        let dev = (amps.norm() - 1.0).abs();
        if dev > INVARIANT_TOL {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(Self { amps })
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amps))
    }

    /// Normalize and wrap; errors on (near-)zero vectors.
    pub fn normalized(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm < 1e-14 {
            return Err(Error::DegenerateInput("cannot normalize a zero vector"));
        }
        Ok(Self { amps: amps / Complex64::new(norm, 0.0) })
    }

    /// Computational basis state |idx> of the given dimension.
    pub fn basis_state(dim: usize, idx: usize) -> Result<Self> {
        check_vec_len("basis state", dim as u128)?;
        if idx >= dim {
            return Err(Error::DomainViolation {
                value: idx as u64,
                domain: dim as u64,
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[idx] = Complex64::ONE;
        Ok(Self { amps })
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(dim: usize) -> Result<Self> {
        check_vec_len("uniform state", dim as u128)?;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { amps: DVector::from_element(dim, amp) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amp(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Tensor product `self (x) other`, self on the high-order index.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let len = check_vec_len(
            "tensor product",
            self.dim() as u128 * other.dim() as u128,
        )?;
        let mut amps = DVector::zeros(len);
        for i in 0..self.dim() {
            let a = self.amps[i];
            for j in 0..other.dim() {
                amps[i * other.dim() + j] = a * other.amps[j];
            }
        }
        Ok(StateVector { amps })
    }

    /// |self><self| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        let mut mat = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                mat[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityOperator { mat }
    }
}

/// Tensor power `v^(x) m`. Norm is preserved; the result length `dim^m` is
/// capped.
pub fn tensor_power(v: &StateVector, m: usize) -> Result<StateVector> {
    if m == 0 {
        return Err(Error::InvalidArgument("tensor power needs m >= 1".into()));
    }
    check_vec_len("tensor power", pow_u128(v.dim(), m))?;
    let mut out = v.clone();
    for _ in 1..m {
        out = out.tensor(v)?;
    }
    Ok(out)
}

/// A density operator: Hermitian, PSD, trace-1 complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Wrap a matrix, enforcing all three invariants within [`INVARIANT_TOL`].
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "density operator must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let op = Self { mat };
        op.validate()?;
        Ok(op)
    }

    /// Internal constructor for matrices valid by construction.
    pub(crate) fn from_mat_unchecked(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    pub fn from_pure(v: &StateVector) -> Self {
        v.to_density()
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_mat_dim("maximally mixed state", dim as u128)?;
        let mat = DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self { mat })
    }

    /// Re-run the Hermitian / PSD / trace-1 checks.
    pub fn validate(&self) -> Result<()> {
        let dev = max_hermitian_deviation(&self.mat);
        if dev > INVARIANT_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = self.mat.trace().re;
        if (trace - 1.0).abs() > INVARIANT_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        let eigs = hermitian_eigenvalues(&self.mat)?;
        let min = eigs.last().copied().unwrap_or(0.0);
        if min < -INVARIANT_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// `<psi| rho |psi>`, real part (exact for valid inputs).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: psi.dim(),
                right: self.dim(),
            });
        }
        let v = &self.mat * psi.amps();
        Ok(psi.amps().dotc(&v).re)
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.mat)
    }

    /// tr(rho^2); 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// A unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    mat: DMatrix<Complex64>,
}

impl UnitaryOperator {
    /// Wrap a matrix, enforcing `U*U = I` within [`INVARIANT_TOL`].
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "unitary must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let gram = mat.adjoint() * &mat;
        let dev = max_abs_entry(&(gram - DMatrix::identity(mat.nrows(), mat.ncols())));
        if dev > INVARIANT_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_mat_dim("identity operator", dim as u128)?;
        Ok(Self { mat: DMatrix::identity(dim, dim) })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// `U |psi>`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: psi.dim(),
                right: self.dim(),
            });
        }
        Ok(StateVector { amps: &self.mat * psi.amps() })
    }

    /// `U rho U*`.
    pub fn conjugate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: self.dim(),
            });
        }
        Ok(DensityOperator {
            mat: &self.mat * rho.mat() * self.mat.adjoint(),
        })
    }

    /// `U V`.
    pub fn compose(&self, rhs: &UnitaryOperator) -> Result<UnitaryOperator> {
        if rhs.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(Self { mat: &self.mat * &rhs.mat })
    }
}

/// Problem-size parameters shared by the keyed state families.
///
/// `n` qubits, domain size `N = 2^n`, copy count `m`; the security parameter
/// is identified with `n` at desk scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainParams {
    n: u32,
    copies: usize,
}

impl DomainParams {
    pub fn new(n: u32, copies: usize) -> Result<Self> {
        if n == 0 || n > 32 {
            return Err(Error::InvalidArgument(format!(
                "qubit count must be in 1..=32, got {n}"
            )));
        }
        if copies == 0 {
            return Err(Error::InvalidArgument("copy count must be >= 1".into()));
        }
        Ok(Self { n, copies })
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    /// `N = 2^n`.
    pub fn domain_size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Security parameter proxy; `n` at desk scale.
    pub fn security(&self) -> u32 {
        self.n
    }

    /// `omega_N^e = exp(2 pi i e / N)`, exponent reduced mod N first.
    pub fn omega_pow(&self, e: u64) -> Complex64 {
        omega_pow(self.domain_size(), e)
    }
}

/// `exp(2 pi i e / n)` with the exponent reduced mod `n` for precision.
pub fn omega_pow(n: u64, e: u64) -> Complex64 {
    let r = (e % n) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r / n as f64)
}

/// Trace distance `1/2 ||a - b||_1` via Hermitian eigendecomposition of the
/// difference.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let diff = a.mat() - b.mat();
    let eigs = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}

/// Trace distance between two Hermitian matrices (not necessarily states).
pub fn trace_distance_hermitian(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let eigs = hermitian_eigenvalues(&(a - b))?;
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}

/// Draw a Haar-random pure state: i.i.d. standard complex Gaussian entries,
/// normalized.
pub fn sample_haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    check_vec_len("Haar state", dim as u128)?;
    let amps = DVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    StateVector::normalized(amps)
}

/// Draw a Haar-random unitary: QR of a complex Ginibre matrix with the phase
/// correction `Q <- Q diag(r_ii / |r_ii|)` that makes the factorization
/// distribution-correct.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryOperator> {
    check_mat_dim("Haar unitary", dim as u128)?;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() < 1e-300 { Complex64::ONE } else { d / d.norm() };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryOperator { mat: q })
}
