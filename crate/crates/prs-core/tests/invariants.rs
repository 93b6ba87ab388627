//! Property tests for the algebraic invariants that hold on all inputs, not
//! just the worked examples.

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use prs_core::linalg::{tensor_power, trace_distance, StateVector};
use prs_core::protocols::{reflection_query, swap_test_accept_prob};
use prs_core::randfn::{prp_eval, prp_invert, PrfKey};

fn arb_key() -> impl Strategy<Value = PrfKey> {
    any::<[u8; 32]>().prop_map(PrfKey::from_bytes)
}

fn arb_state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim..=dim).prop_filter_map(
        "state must be normalizable",
        |parts| {
            let amps = DVector::from_iterator(
                parts.len(),
                parts.iter().map(|&(re, im)| Complex64::new(re, im)),
            );
            StateVector::normalized(amps).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feistel_is_a_bijection(key in arb_key(), bits in (1u32..=5).prop_map(|h| 2 * h), x in 0u64..1024) {
        let domain = 1u64 << bits;
        let x = x % domain;
        let y = prp_eval(&key, x, bits).unwrap();
        prop_assert!(y < domain);
        prop_assert_eq!(prp_invert(&key, y, bits).unwrap(), x);
    }

    #[test]
    fn pure_state_trace_distance_formula(a in arb_state(6), b in arb_state(6)) {
        let overlap = a.inner(&b).unwrap().norm_sqr();
        let expected = (1.0 - overlap).max(0.0).sqrt();
        let got = trace_distance(&a.to_density(), &b.to_density()).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9);
    }

    #[test]
    fn swap_test_probability_range_and_symmetry(a in arb_state(5), b in arb_state(5)) {
        let p = swap_test_accept_prob(&a, &b).unwrap();
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&p));
        let q = swap_test_accept_prob(&b, &a).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
    }

    #[test]
    fn tensor_power_preserves_norm_and_overlap(a in arb_state(3), b in arb_state(3)) {
        let a3 = tensor_power(&a, 3).unwrap();
        let b3 = tensor_power(&b, 3).unwrap();
        prop_assert!((a3.amps().norm() - 1.0).abs() <= 1e-10);
        let s = a.inner(&b).unwrap();
        let lhs = a3.inner(&b3).unwrap();
        prop_assert!((lhs - s * s * s).norm() <= 1e-10);
    }

    #[test]
    fn reflection_query_distance_never_exceeds_the_bound(
        psi in arb_state(4),
        phi in arb_state(4),
        copies in 1usize..200,
    ) {
        let out = reflection_query(&psi, &phi, copies).unwrap();
        prop_assert!(out.euclid_distance <= out.bound + 1e-12);
        prop_assert!(out.trace_distance <= out.euclid_distance + 1e-12);
    }
}
