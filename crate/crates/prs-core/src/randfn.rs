//! Keyed pseudorandom functions and permutations at desk scale, plus
//! truly-random and exhaustive function oracles for brute-force comparison.
//!
//! The keyed PRF is instantiated with a keyed cryptographic hash under domain
//! separation tags. The experiments in this crate test statistical properties
//! only, so any deterministic construction with empirically uniform output
//! works; the keyed hash stands in for an abstract quantum-secure PRF
//! family, which is otherwise a black box here.

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Exhaustive function enumeration stops at `N^N` past this budget.
pub const FUNCTION_ENUM_BUDGET: u128 = 10_000_000;

/// Number of Feistel rounds; the conventional floor for strong-PRP-style
/// behavior.
const FEISTEL_ROUNDS: u32 = 4;

/// A fixed-length PRF key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrfKey {
    bytes: [u8; PrfKey::LEN],
}

impl PrfKey {
    pub const LEN: usize = 32;

    pub fn from_bytes(bytes: [u8; Self::LEN]) -> Self {
        Self { bytes }
    }

    /// Uniformly random key.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; Self::LEN];
        rng.fill_bytes(&mut bytes);
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8; Self::LEN] {
        &self.bytes
    }

    /// Domain-separated subkey, used for Feistel round keys.
    fn derived(&self, label: &[u8], index: u32) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"prs-subkey-v1");
        hasher.update(label);
        hasher.update(index.to_le_bytes());
        hasher.update(self.bytes);
        let digest = hasher.finalize();
        let mut bytes = [0u8; Self::LEN];
        bytes.copy_from_slice(&digest);
        Self { bytes }
    }
}

/// Keyed PRF evaluation on the domain `{0, .., domain-1}`; `domain` must be a
/// power of two.
pub fn prf_eval(key: &PrfKey, x: u64, domain: u64) -> Result<u64> {
    if domain == 0 || !domain.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "PRF domain must be a power of two, got {domain}"
        )));
    }
    if x >= domain {
        return Err(Error::DomainViolation { value: x, domain });
    }
    let mut hasher = Sha256::new();
    hasher.update(b"prs-prf-v1");
    hasher.update(key.bytes);
    hasher.update(domain.to_le_bytes());
    hasher.update(x.to_le_bytes());
    let digest = hasher.finalize();
    let word = u64::from_le_bytes(digest[..8].try_into().unwrap());
    Ok(word & (domain - 1))
}

/// An explicit function table on `{0, .., domain-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExplicitFunction {
    domain: usize,
    table: Vec<usize>,
}

impl ExplicitFunction {
    pub fn from_table(domain: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain {
            return Err(Error::DimensionMismatch {
                left: table.len(),
                right: domain,
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= domain) {
            return Err(Error::DomainViolation {
                value: bad as u64,
                domain: domain as u64,
            });
        }
        Ok(Self { domain, table })
    }

    pub fn constant(domain: usize, value: usize) -> Result<Self> {
        Self::from_table(domain, vec![value; domain])
    }

    pub fn identity(domain: usize) -> Self {
        Self {
            domain,
            table: (0..domain).collect(),
        }
    }

    /// Tabulate `x -> prf_eval(key, x, domain)`.
    pub fn from_prf(key: &PrfKey, domain: u64) -> Result<Self> {
        let table = (0..domain)
            .map(|x| prf_eval(key, x, domain).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            domain: domain as usize,
            table,
        })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn eval(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.domain];
        for &v in &self.table {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Number of functions on a domain of the given size.
pub fn function_count(domain: usize) -> u128 {
    (domain as u128)
        .checked_pow(domain as u32)
        .unwrap_or(u128::MAX)
}

/// The `index`-th function table in lexicographic order (table[0] most
/// significant).
pub(crate) fn function_by_index(domain: usize, index: u128) -> ExplicitFunction {
    let mut table = vec![0usize; domain];
    let mut rest = index;
    for slot in (0..domain).rev() {
        table[slot] = (rest % domain as u128) as usize;
        rest /= domain as u128;
    }
    ExplicitFunction { domain, table }
}

/// Enumerate all `N^N` functions on `{0, .., N-1}` in lexicographic table
/// order. Errors past the enumeration budget, pointing callers at sampling
/// mode.
pub fn enumerate_functions(
    domain: usize,
) -> Result<impl Iterator<Item = ExplicitFunction>> {
    let total = function_count(domain);
    if total > FUNCTION_ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "function enumeration",
            requested: total,
            budget: FUNCTION_ENUM_BUDGET,
            hint: "use sampling mode",
        });
    }
    Ok((0..total).map(move |i| function_by_index(domain, i)))
}

/// Draw a uniformly random function table.
pub fn sample_function<R: Rng + ?Sized>(domain: usize, rng: &mut R) -> ExplicitFunction {
    let table = (0..domain).map(|_| rng.random_range(0..domain)).collect();
    ExplicitFunction { domain, table }
}

fn feistel_halves(bits: u32) -> Result<(u32, u64)> {
    if bits == 0 || !bits.is_multiple_of(2) {
        return Err(Error::OddBits { bits });
    }
    if bits > 40 {
        return Err(Error::InvalidArgument(format!(
            "Feistel width capped at 40 bits, got {bits}"
        )));
    }
    let half = bits / 2;
    Ok((half, 1u64 << half))
}

/// Keyed permutation on `{0, .., 2^bits - 1}`: a 4-round Feistel network
/// whose round functions are [`prf_eval`] under round-tagged keys.
pub fn prp_eval(key: &PrfKey, x: u64, bits: u32) -> Result<u64> {
    let (half, half_domain) = feistel_halves(bits)?;
    let domain = 1u64 << bits;
    if x >= domain {
        return Err(Error::DomainViolation { value: x, domain });
    }
    let mut left = x >> half;
    let mut right = x & (half_domain - 1);
    for round in 0..FEISTEL_ROUNDS {
        let f = prf_eval(&key.derived(b"feistel-round", round), right, half_domain)?;
        (left, right) = (right, left ^ f);
    }
    Ok((left << half) | right)
}

/// Inverse of [`prp_eval`] for the same key.
pub fn prp_invert(key: &PrfKey, y: u64, bits: u32) -> Result<u64> {
    let (half, half_domain) = feistel_halves(bits)?;
    let domain = 1u64 << bits;
    if y >= domain {
        return Err(Error::DomainViolation { value: y, domain });
    }
    let mut left = y >> half;
    let mut right = y & (half_domain - 1);
    for round in (0..FEISTEL_ROUNDS).rev() {
        let f = prf_eval(&key.derived(b"feistel-round", round), left, half_domain)?;
        (left, right) = (right ^ f, left);
    }
    Ok((left << half) | right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use std::collections::HashSet;

    #[test]
    fn prf_is_deterministic_and_in_range() {
        let key = PrfKey::random(&mut derive_stream(1, "randfn-test", 0));
        for x in 0..16 {
            let a = prf_eval(&key, x, 16).unwrap();
            let b = prf_eval(&key, x, 16).unwrap();
            assert_eq!(a, b);
            assert!(a < 16);
        }
    }

    #[test]
    fn prf_rejects_out_of_domain_input() {
        let key = PrfKey::from_bytes([7; 32]);
        assert!(matches!(
            prf_eval(&key, 16, 16),
            Err(Error::DomainViolation { .. })
        ));
        assert!(prf_eval(&key, 0, 12).is_err()); // not a power of two
    }

    #[test]
    fn prf_outputs_pass_chi_square_uniformity() {
        // 2^14 keyed evaluations: 1024 random keys, all 16 inputs each.
        // Chi-square critical value for 15 degrees of freedom at
        // significance 0.01 is 30.5779.
        let mut rng = derive_stream(2, "randfn-test-chi2", 0);
        let mut counts = [0u64; 16];
        for _ in 0..1024 {
            let key = PrfKey::random(&mut rng);
            for x in 0..16 {
                counts[prf_eval(&key, x, 16).unwrap() as usize] += 1;
            }
        }
        let expected = (1024 * 16) as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 30.5779, "chi-square statistic {chi2} too large");
    }

    #[test]
    fn distinct_keys_give_distinct_tables() {
        let mut rng = derive_stream(3, "randfn-test-keys", 0);
        let mut differing = 0;
        let pairs = 1000;
        for _ in 0..pairs {
            let k1 = PrfKey::random(&mut rng);
            let k2 = PrfKey::random(&mut rng);
            let t1 = ExplicitFunction::from_prf(&k1, 16).unwrap();
            let t2 = ExplicitFunction::from_prf(&k2, 16).unwrap();
            if t1 != t2 {
                differing += 1;
            }
        }
        assert!(differing as f64 / pairs as f64 >= 0.99);
    }

    #[test]
    fn enumerate_functions_counts() {
        assert_eq!(enumerate_functions(2).unwrap().count(), 4);
        assert_eq!(enumerate_functions(3).unwrap().count(), 27);
        let all: HashSet<_> = enumerate_functions(4).unwrap().collect();
        assert_eq!(all.len(), 256);
    }

    #[test]
    fn enumerate_functions_is_lexicographic_and_budgeted() {
        let first: Vec<_> = enumerate_functions(2).unwrap().collect();
        assert_eq!(first[0].table(), &[0, 0]);
        assert_eq!(first[1].table(), &[0, 1]);
        assert_eq!(first[2].table(), &[1, 0]);
        assert_eq!(first[3].table(), &[1, 1]);
        assert!(matches!(
            enumerate_functions(8).err(),
            Some(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sample_function_on_singleton_domain() {
        let mut rng = derive_stream(4, "randfn-test-sample1", 0);
        let f = sample_function(1, &mut rng);
        assert_eq!(f.table(), &[0]);
    }

    #[test]
    fn sample_function_entries_are_uniform() {
        let mut rng = derive_stream(5, "randfn-test-sample4", 0);
        let trials = 100_000;
        let mut counts = [0u64; 4];
        for _ in 0..trials {
            let f = sample_function(4, &mut rng);
            for x in 0..4 {
                counts[f.eval(x)] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / (4 * trials) as f64;
            assert!((freq - 0.25).abs() <= 0.01, "entry frequency {freq}");
        }
    }

    #[test]
    fn sample_function_covers_all_functions_uniformly() {
        let mut rng = derive_stream(6, "randfn-test-sample2", 0);
        let trials = 10_000;
        let mut counts = [0u64; 4];
        for _ in 0..trials {
            let f = sample_function(2, &mut rng);
            counts[f.eval(0) * 2 + f.eval(1)] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.25).abs() <= 0.02, "function frequency {freq}");
        }
    }

    #[test]
    fn prp_round_trips() {
        let key = PrfKey::random(&mut derive_stream(7, "randfn-test-prp", 0));
        for x in 0..256 {
            let y = prp_eval(&key, x, 8).unwrap();
            assert_eq!(prp_invert(&key, y, 8).unwrap(), x);
        }
    }

    #[test]
    fn prp_image_is_a_permutation() {
        let key = PrfKey::random(&mut derive_stream(8, "randfn-test-perm", 0));
        let image: HashSet<u64> = (0..16).map(|x| prp_eval(&key, x, 4).unwrap()).collect();
        assert_eq!(image.len(), 16);
        assert!(image.iter().all(|&y| y < 16));
    }

    #[test]
    fn prp_is_a_bijection_for_wider_domains() {
        let key = PrfKey::random(&mut derive_stream(9, "randfn-test-bij", 0));
        let mut seen = vec![false; 1 << 12];
        for x in 0..(1u64 << 12) {
            let y = prp_eval(&key, x, 12).unwrap() as usize;
            assert!(!seen[y]);
            seen[y] = true;
        }
    }

    #[test]
    fn prp_is_not_the_identity_map() {
        let mut rng = derive_stream(10, "randfn-test-id", 0);
        for _ in 0..100 {
            let key = PrfKey::random(&mut rng);
            let identity = (0..256).all(|x| prp_eval(&key, x, 8).unwrap() == x);
            assert!(!identity);
        }
    }

    #[test]
    fn prp_rejects_odd_widths() {
        let key = PrfKey::from_bytes([1; 32]);
        assert!(matches!(prp_eval(&key, 0, 5), Err(Error::OddBits { .. })));
    }
}
