//! Sparse dyadic arithmetic against a dense fixed-point `BigUint` model.

use metabio::dyadic::SparseDyadic;
use num_bigint::BigUint;
use proptest::prelude::*;

/// Fixed-point scale; exponents stay below it.
const SCALE: u64 = 96;

fn dense(exps: &[u64]) -> BigUint {
    exps.iter()
        .fold(BigUint::from(0u32), |acc, &e| acc + (BigUint::from(1u32) << (SCALE - e)))
}

fn dense_of(v: &SparseDyadic) -> BigUint {
    (v.integer_part().clone() << SCALE) + dense(v.exponents())
}

fn exps() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..SCALE, 0..80)
}

proptest! {
    #[test]
    fn sums_match_dense(xs in exps()) {
        let mut v = SparseDyadic::zero();
        for &e in &xs {
            v.add_power(e);
        }
        prop_assert_eq!(dense_of(&v), dense(&xs));
        prop_assert!(v.exponents().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bits_match_dense(xs in exps()) {
        let v = SparseDyadic::from_exponents(xs.iter().copied());
        let d = dense(&xs);
        for i in 1..SCALE {
            prop_assert_eq!(v.bit_at(i), d.bit(SCALE - i));
        }
        let p = v.prefix_bits(40);
        for i in 0..40 {
            prop_assert_eq!(p[i], d.bit(SCALE - 1 - i as u64));
        }
    }

    #[test]
    fn order_matches_dense(xs in exps(), ys in exps()) {
        let a = SparseDyadic::from_exponents(xs.iter().copied());
        let b = SparseDyadic::from_exponents(ys.iter().copied());
        prop_assert_eq!(a.cmp(&b), dense(&xs).cmp(&dense(&ys)));
    }

    #[test]
    fn addition_matches_dense(xs in exps(), ys in exps()) {
        let mut a = SparseDyadic::from_exponents(xs.iter().copied());
        let b = SparseDyadic::from_exponents(ys.iter().copied());
        a.add_assign_dyadic(&b);
        prop_assert_eq!(dense_of(&a), dense(&xs) + dense(&ys));
    }

    #[test]
    fn text_round_trip(xs in exps()) {
        let v = SparseDyadic::from_exponents(xs.iter().copied());
        let back: SparseDyadic = v.to_string().parse().unwrap();
        prop_assert_eq!(back, v);
    }
}
