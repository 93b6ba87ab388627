//! Symmetric-subspace mathematics: multiset basis, permutation operators,
//! projector, reflection, Haar moments.
//!
//! The symmetric subspace of `m` copies of an `N`-level system has the
//! orthonormal multiset basis `{|x;Sym>}` with one vector per nondecreasing
//! tuple; its dimension is `C(N+m-1, m)`. Besides the dense operators this
//! module carries a compressed representation in that basis, which keeps
//! symmetric-subspace computations feasible far beyond the dense `N^m` cap.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_mat_dim, check_vec_len, pow_u128, DensityOperator, StateVector, UnitaryOperator,
};

/// The factorial-cost projector verification path is capped at this copy
/// count.
pub const PERMUTATION_SUM_MAX_COPIES: usize = 5;

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
    }
    acc
}

/// Binomial coefficient as f64, stable for arguments far past u128 range.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= (n - k + i) as f64 / i as f64;
    }
    acc
}

/// Multinomial coefficient `m! / prod_j m_j!` from multiplicities, as a
/// product of binomials so intermediate values stay bounded by the result.
pub fn multinomial_f64(multiplicities: &[usize]) -> f64 {
    let mut acc = 1.0;
    let mut seen: u64 = 0;
    for &mj in multiplicities {
        if mj == 0 {
            continue;
        }
        seen += mj as u64;
        acc *= binomial_f64(seen, mj as u64);
    }
    acc
}

/// Dimension of the symmetric subspace, `C(N+m-1, m)`.
pub fn sym_dim(n_levels: usize, copies: usize) -> u128 {
    binomial((n_levels + copies - 1) as u64, copies as u64)
}

/// A sorted multiset of `m` values from `{0, .., N-1}`, indexing one
/// symmetric basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultisetIndex {
    values: Vec<usize>,
}

impl MultisetIndex {
    /// Construct from any value order; stored nondecreasing.
    pub fn new(mut values: Vec<usize>, n_levels: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("multiset must be nonempty".into()));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= n_levels) {
            return Err(Error::DomainViolation {
                value: bad as u64,
                domain: n_levels as u64,
            });
        }
        values.sort_unstable();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn copies(&self) -> usize {
        self.values.len()
    }

    /// Occurrence count of each value in `{0, .., N-1}`.
    pub fn multiplicities(&self, n_levels: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_levels];
        for &v in &self.values {
            counts[v] += 1;
        }
        counts
    }

    pub fn is_all_distinct(&self) -> bool {
        self.values.windows(2).all(|w| w[0] != w[1])
    }

    /// `m! / prod_j m_j!`: the number of distinct words with this multiset.
    pub fn multinomial(&self, n_levels: usize) -> f64 {
        multinomial_f64(&self.multiplicities(n_levels))
    }
}

/// The ordered multiset basis of the symmetric subspace.
#[derive(Clone, Debug)]
pub struct SymBasis {
    n_levels: usize,
    copies: usize,
    indices: Vec<MultisetIndex>,
    positions: HashMap<Vec<usize>, usize>,
}

impl SymBasis {
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[MultisetIndex] {
        &self.indices
    }

    pub fn multiset(&self, pos: usize) -> &MultisetIndex {
        &self.indices[pos]
    }

    /// Position of a sorted value tuple in the basis order.
    pub fn position(&self, sorted_values: &[usize]) -> Option<usize> {
        self.positions.get(sorted_values).copied()
    }
}

/// Enumerate the multiset basis indices in lexicographic order.
pub fn sym_basis_indices(n_levels: usize, copies: usize) -> Result<SymBasis> {
    if n_levels == 0 || copies == 0 {
        return Err(Error::InvalidArgument(
            "symmetric basis needs N >= 1 and m >= 1".into(),
        ));
    }
    let dim = check_vec_len("symmetric basis", sym_dim(n_levels, copies))?;
    let mut indices = Vec::with_capacity(dim);
    let mut positions = HashMap::with_capacity(dim);
    let mut current = vec![0usize; copies];
    loop {
        positions.insert(current.clone(), indices.len());
        indices.push(MultisetIndex {
            values: current.clone(),
        });
        // next nondecreasing tuple in lexicographic order
        let mut slot = copies;
        loop {
            if slot == 0 {
                debug_assert_eq!(indices.len(), dim);
                return Ok(SymBasis {
                    n_levels,
                    copies,
                    indices,
                    positions,
                });
            }
            slot -= 1;
            if current[slot] + 1 < n_levels {
                let v = current[slot] + 1;
                for x in current.iter_mut().skip(slot) {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Advance `word` to the next distinct permutation in lexicographic order.
fn next_permutation(word: &mut [usize]) -> bool {
    if word.len() < 2 {
        return false;
    }
    let mut i = word.len() - 1;
    while i > 0 && word[i - 1] >= word[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = word.len() - 1;
    while word[j] <= word[i - 1] {
        j -= 1;
    }
    word.swap(i - 1, j);
    word[i..].reverse();
    true
}

fn word_index(word: &[usize], n_levels: usize) -> usize {
    word.iter().fold(0, |acc, &v| acc * n_levels + v)
}

/// Dense symmetric basis vector |x;Sym> on `N^m` dimensions: the normalized
/// sum over all distinct orderings of the multiset.
pub fn sym_basis_state(x: &MultisetIndex, n_levels: usize) -> Result<StateVector> {
    let copies = x.copies();
    let dim = check_vec_len("symmetric basis state", pow_u128(n_levels, copies))?;
    let amp = Complex64::new(1.0 / x.multinomial(n_levels).sqrt(), 0.0);
    let mut amps = DVector::zeros(dim);
    let mut word = x.values().to_vec();
    loop {
        amps[word_index(&word, n_levels)] = amp;
        if !next_permutation(&mut word) {
            break;
        }
    }
    StateVector::new(amps)
}

/// The register-permutation operator `W_sigma` on `N^m` dimensions, mapping
/// `|x_1, .., x_m>` to `|x_{sigma^-1(1)}, .., x_{sigma^-1(m)}>`.
///
/// `sigma` is given as the image list `sigma[i] = sigma(i)` on 0-based
/// register positions; composition satisfies `W_sigma W_tau = W_{sigma o tau}`.
pub fn permutation_operator(sigma: &[usize], n_levels: usize) -> Result<UnitaryOperator> {
    let copies = sigma.len();
    let mut seen = vec![false; copies];
    for &s in sigma {
        if s >= copies || seen[s] {
            return Err(Error::InvalidArgument(format!(
                "{sigma:?} is not a permutation of 0..{copies}"
            )));
        }
        seen[s] = true;
    }
    let dim = check_mat_dim("permutation operator", pow_u128(n_levels, copies))?;
    let mut inverse = vec![0usize; copies];
    for (i, &s) in sigma.iter().enumerate() {
        inverse[s] = i;
    }
    let mut mat = DMatrix::zeros(dim, dim);
    let mut word = vec![0usize; copies];
    for input in 0..dim {
        let mut rest = input;
        for slot in (0..copies).rev() {
            word[slot] = rest % n_levels;
            rest /= n_levels;
        }
        let output: usize = (0..copies).fold(0, |acc, i| acc * n_levels + word[inverse[i]]);
        mat[(output, input)] = Complex64::ONE;
    }
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// Projector onto the symmetric subspace, built from the orthonormal multiset
/// basis (`sum_x |x;Sym><x;Sym|`).
pub fn sym_projector(n_levels: usize, copies: usize) -> Result<DMatrix<Complex64>> {
    let dim = check_mat_dim("symmetric projector", pow_u128(n_levels, copies))?;
    let basis = sym_basis_indices(n_levels, copies)?;
    let mut proj = DMatrix::zeros(dim, dim);
    for x in basis.indices() {
        let v = sym_basis_state(x, n_levels)?;
        let amps = v.amps();
        // outer-product accumulation over the sparse support of |x;Sym>
        let support: Vec<usize> = (0..dim).filter(|&i| amps[i].norm_sqr() > 0.0).collect();
        for &i in &support {
            for &j in &support {
                proj[(i, j)] += amps[i] * amps[j].conj();
            }
        }
    }
    Ok(proj)
}

/// The same projector as the permutation average `(1/m!) sum_sigma W_sigma`.
/// Factorial cost; verification path only.
pub fn sym_projector_from_permutations(
    n_levels: usize,
    copies: usize,
) -> Result<DMatrix<Complex64>> {
    if copies > PERMUTATION_SUM_MAX_COPIES {
        return Err(Error::BudgetExceeded {
            what: "permutation-average projector",
            requested: (1..=copies as u128).product(),
            budget: (1..=PERMUTATION_SUM_MAX_COPIES as u128).product(),
            hint: "use the basis-sum construction",
        });
    }
    let dim = check_mat_dim("symmetric projector", pow_u128(n_levels, copies))?;
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    let mut count = 0u64;
    for sigma in (0..copies).permutations(copies) {
        acc += permutation_operator(&sigma, n_levels)?.mat();
        count += 1;
    }
    Ok(acc / Complex64::new(count as f64, 0.0))
}

/// The Haar m-copy moment operator `C(N+m-1, m)^-1 Pi`.
pub fn haar_moment(n_levels: usize, copies: usize) -> Result<DensityOperator> {
    let proj = sym_projector(n_levels, copies)?;
    let d = sym_dim(n_levels, copies) as f64;
    Ok(DensityOperator::from_mat_unchecked(
        proj / Complex64::new(d, 0.0),
    ))
}

/// Reflection about the symmetric subspace, `R = I - 2 Pi`.
pub fn sym_reflection(n_levels: usize, copies: usize) -> Result<UnitaryOperator> {
    let proj = sym_projector(n_levels, copies)?;
    let dim = proj.nrows();
    let mat = DMatrix::identity(dim, dim) - proj * Complex64::new(2.0, 0.0);
    Ok(UnitaryOperator::from_mat_unchecked(mat))
}

/// Coordinates of the product state `psi^(x)m` in the multiset basis:
/// `<x;Sym|psi^(x)m> = sqrt(m!/prod m_j!) prod_j psi_j^{m_j}`.
pub fn product_state_sym_coords(psi: &StateVector, basis: &SymBasis) -> DVector<Complex64> {
    let mut coords = DVector::zeros(basis.dim());
    for (pos, x) in basis.indices().iter().enumerate() {
        let mut amp = Complex64::new(x.multinomial(basis.n_levels()).sqrt(), 0.0);
        for &v in x.values() {
            amp *= psi.amp(v);
        }
        coords[pos] = amp;
    }
    coords
}

/// Project a dense `N^m` vector into the multiset basis (`<x;Sym|v>` per x).
pub fn dense_to_sym_coords(v: &StateVector, basis: &SymBasis) -> Result<DVector<Complex64>> {
    let n = basis.n_levels();
    let m = basis.copies();
    let dim = check_vec_len("symmetric projection", pow_u128(n, m))?;
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: dim,
        });
    }
    let mut sums = DVector::<Complex64>::zeros(basis.dim());
    let mut word = vec![0usize; m];
    for i in 0..dim {
        let mut rest = i;
        for slot in (0..m).rev() {
            word[slot] = rest % n;
            rest /= n;
        }
        let mut sorted = word.clone();
        sorted.sort_unstable();
        let pos = basis.position(&sorted).expect("word multiset in basis");
        sums[pos] += v.amp(i);
    }
    for (pos, x) in basis.indices().iter().enumerate() {
        sums[pos] /= Complex64::new(x.multinomial(n).sqrt(), 0.0);
    }
    Ok(sums)
}

/// Expand multiset-basis coordinates back to the dense `N^m` representation.
pub fn sym_coords_to_dense(
    coords: &DVector<Complex64>,
    basis: &SymBasis,
) -> Result<StateVector> {
    let n = basis.n_levels();
    let m = basis.copies();
    let dim = check_vec_len("symmetric expansion", pow_u128(n, m))?;
    if coords.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: coords.len(),
            right: basis.dim(),
        });
    }
    let mut amps = DVector::zeros(dim);
    for (pos, x) in basis.indices().iter().enumerate() {
        let amp = coords[pos] / Complex64::new(x.multinomial(n).sqrt(), 0.0);
        let mut word = x.values().to_vec();
        loop {
            amps[word_index(&word, n)] = amp;
            if !next_permutation(&mut word) {
                break;
            }
        }
    }
    StateVector::new(amps)
}

/// Compressed form of the symmetric projector on one extra register.
///
/// On the space `H (x) Sym^l(H)` with coordinates indexed by `(i, x)`, the
/// projector onto `Sym^(l+1)(H)` factorizes as `V V*`, where `V` embeds the
/// size-(l+1) multiset basis with amplitudes `sqrt(m_i(z) / (l+1))` for
/// `z = x U {i}`. This keeps reflection-oracle simulation polynomial in `l`.
#[derive(Clone, Debug)]
pub struct SymEmbedding {
    basis_l: SymBasis,
    basis_l1: SymBasis,
    // per z in basis_{l+1}: (value i, position of z \ {i} in basis_l, coeff)
    terms: Vec<Vec<(usize, usize, f64)>>,
}

impl SymEmbedding {
    pub fn new(n_levels: usize, copies_l: usize) -> Result<Self> {
        let basis_l = sym_basis_indices(n_levels, copies_l)?;
        let basis_l1 = sym_basis_indices(n_levels, copies_l + 1)?;
        check_vec_len(
            "joint register-symmetric representation",
            (n_levels as u128) * basis_l.dim() as u128,
        )?;
        let scale = 1.0 / (copies_l as f64 + 1.0);
        let mut terms = Vec::with_capacity(basis_l1.dim());
        for z in basis_l1.indices() {
            let mut row = Vec::new();
            let mult = z.multiplicities(n_levels);
            for (i, &mi) in mult.iter().enumerate() {
                if mi == 0 {
                    continue;
                }
                let mut reduced = z.values().to_vec();
                let at = reduced.iter().position(|&v| v == i).unwrap();
                reduced.remove(at);
                let pos = basis_l.position(&reduced).expect("reduced multiset in basis");
                row.push((i, pos, (mi as f64 * scale).sqrt()));
            }
            terms.push(row);
        }
        Ok(Self {
            basis_l,
            basis_l1,
            terms,
        })
    }

    pub fn basis_l(&self) -> &SymBasis {
        &self.basis_l
    }

    pub fn basis_l1(&self) -> &SymBasis {
        &self.basis_l1
    }

    /// Length of a joint `(register, multiset)` coordinate vector.
    pub fn joint_len(&self) -> usize {
        self.basis_l.n_levels() * self.basis_l.dim()
    }

    /// Joint coordinates of `|phi> (x) |psi>^(x)l`.
    pub fn joint_product(&self, phi: &StateVector, psi: &StateVector) -> Result<DVector<Complex64>> {
        let n = self.basis_l.n_levels();
        if phi.dim() != n || psi.dim() != n {
            return Err(Error::DimensionMismatch {
                left: phi.dim().max(psi.dim()),
                right: n,
            });
        }
        let theta = product_state_sym_coords(psi, &self.basis_l);
        let d = self.basis_l.dim();
        let mut joint = DVector::zeros(n * d);
        for i in 0..n {
            for x in 0..d {
                joint[i * d + x] = phi.amp(i) * theta[x];
            }
        }
        Ok(joint)
    }

    /// Apply `Pi_{l+1}` to joint coordinates.
    pub fn apply_projector(&self, joint: &DVector<Complex64>) -> DVector<Complex64> {
        let d = self.basis_l.dim();
        let mut upper = DVector::<Complex64>::zeros(self.basis_l1.dim());
        for (z, row) in self.terms.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for &(i, x, c) in row {
                acc += Complex64::new(c, 0.0) * joint[i * d + x];
            }
            upper[z] = acc;
        }
        let mut out = DVector::zeros(joint.len());
        for (z, row) in self.terms.iter().enumerate() {
            let w = upper[z];
            for &(i, x, c) in row {
                out[i * d + x] += Complex64::new(c, 0.0) * w;
            }
        }
        out
    }

    /// Apply `R = I - 2 Pi_{l+1}` to joint coordinates.
    pub fn apply_reflection(&self, joint: &DVector<Complex64>) -> DVector<Complex64> {
        let projected = self.apply_projector(joint);
        joint - projected * Complex64::new(2.0, 0.0)
    }

    /// Apply an operator on the bare register factor of the joint space.
    pub fn apply_register_operator(
        &self,
        op: &UnitaryOperator,
        joint: &DVector<Complex64>,
    ) -> Result<DVector<Complex64>> {
        let n = self.basis_l.n_levels();
        if op.dim() != n {
            return Err(Error::DimensionMismatch {
                left: op.dim(),
                right: n,
            });
        }
        let d = self.basis_l.dim();
        let mut out = DVector::zeros(joint.len());
        for x in 0..d {
            for i in 0..n {
                let mut acc = Complex64::ZERO;
                for j in 0..n {
                    acc += op.mat()[(i, j)] * joint[j * d + x];
                }
                out[i * d + x] = acc;
            }
        }
        Ok(out)
    }

    /// Expand joint coordinates to the dense `N^(l+1)` vector (register on the
    /// high-order index), for cross-checks at small sizes.
    pub fn joint_to_dense(&self, joint: &DVector<Complex64>) -> Result<StateVector> {
        let n = self.basis_l.n_levels();
        let d = self.basis_l.dim();
        let block = check_vec_len(
            "joint dense expansion",
            pow_u128(n, self.basis_l.copies()),
        )?;
        let mut amps = DVector::zeros(n * block);
        for i in 0..n {
            let coords = DVector::from_fn(d, |x, _| joint[i * d + x]);
            // expand without the unit-norm check; blocks are sub-normalized
            let mut word;
            for (pos, xi) in self.basis_l.indices().iter().enumerate() {
                let amp = coords[pos] / Complex64::new(xi.multinomial(n).sqrt(), 0.0);
                word = xi.values().to_vec();
                loop {
                    amps[i * block + word_index(&word, n)] = amp;
                    if !next_permutation(&mut word) {
                        break;
                    }
                }
            }
        }
        StateVector::new(amps)
    }
}
