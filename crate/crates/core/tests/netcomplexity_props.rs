use metabio::netcomplexity::{
    apply_circuit, classify_entanglement, decode_circuit, encode_circuit, fidelity, gate_alphabet,
    h_net_upper, schmidt_rank, synthesize, Circuit, Classification, Op, StateVector,
    SynthesisConfig,
};
use metabio::rng::{stream_rng, Stream};
use proptest::prelude::*;
use rand::Rng;

fn random_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> Circuit {
    let alphabet = gate_alphabet(n);
    let ops = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
    Circuit::new(n, ops).unwrap()
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (1usize..=4).prop_flat_map(|n| {
        let alphabet = gate_alphabet(n);
        prop::collection::vec(0..alphabet.len(), 0..20)
            .prop_map(move |ix| Circuit::new(n, ix.iter().map(|&i| alphabet[i]).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn encoding_round_trips(c in circuit_strategy()) {
        let bits = encode_circuit(&c);
        prop_assert_eq!(decode_circuit(&bits, c.n).unwrap(), c);
    }
}

#[test]
fn norm_is_preserved() {
    let mut rng = stream_rng(17, Stream::Synthesis);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let n = 1 + i % 4;
        let s = apply_circuit(&random_circuit(n, 8, &mut rng)).unwrap();
        worst = worst.max((s.norm() - 1.0).abs());
    }
    assert!(worst < 1e-12, "{worst}");
}

/// First circuit in length-then-lexicographic order (over the canonical
/// gate alphabet) whose state is close enough to `target`.
fn brute_force(target: &StateVector, eps: f64, max_len: usize) -> Option<Circuit> {
    let n = target.n();
    let alphabet = gate_alphabet(n);
    for len in 0..=max_len {
        let total = alphabet.len().pow(len as u32);
        for mut code in 0..total {
            let mut ops = vec![alphabet[0]; len];
            for slot in ops.iter_mut().rev() {
                *slot = alphabet[code % alphabet.len()];
                code /= alphabet.len();
            }
            let c = Circuit::new(n, ops).unwrap();
            if fidelity(&apply_circuit(&c).unwrap(), target).unwrap() >= 1.0 - eps {
                return Some(c);
            }
        }
    }
    None
}

#[test]
fn synthesis_is_minimal_for_short_circuits() {
    let mut rng = stream_rng(3, Stream::Synthesis);
    for n in 1..=3usize {
        for len in 0..=3usize {
            for _ in 0..6 {
                let target = apply_circuit(&random_circuit(n, len, &mut rng)).unwrap();
                let cfg = SynthesisConfig { n, epsilon: 1e-6, max_gates: 4 };
                let got = synthesize(&target, &cfg).unwrap();
                let want = brute_force(&target, 1e-6, len).unwrap();
                assert_eq!(got.len(), want.len(), "n {n}: {got} vs {want}");
                assert!(got.len() <= len);
                assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn h_net_monotone_in_epsilon() {
    let mut rng = stream_rng(8, Stream::Synthesis);
    let epsilons = [0.005, 0.01, 0.05, 0.1, 0.3];
    for _ in 0..8 {
        let target = StateVector::random_haar(2, &mut rng).unwrap();
        let mut prev = usize::MAX;
        for &eps in &epsilons {
            let cfg = SynthesisConfig { n: 2, epsilon: eps, max_gates: 7 };
            let h = h_net_upper(&target, &cfg).unwrap_or(usize::MAX);
            assert!(h <= prev, "eps {eps}");
            prev = h;
        }
    }
}

#[test]
fn fixed_examples() {
    let bell = StateVector::ghz(2).unwrap();
    let c = synthesize(&bell, &SynthesisConfig::new(2, 0.01)).unwrap();
    assert_eq!(c.ops, vec![Op::h(0), Op::cnot(0, 1)]);
    let zero = StateVector::zero(2).unwrap();
    assert_eq!(h_net_upper(&zero, &SynthesisConfig::new(2, 0.01)), Some(3));
    assert_eq!(encode_circuit(&Circuit::new(2, vec![Op::h(0)]).unwrap()).to_string(), "00111000");
}

#[test]
fn product_states_have_unit_ranks() {
    let mut rng = stream_rng(4, Stream::Synthesis);
    for n in 2..=4 {
        for _ in 0..5 {
            let s = StateVector::random_product(n, &mut rng).unwrap();
            assert_eq!(classify_entanglement(&s).unwrap().classification, Classification::Product);
            let h = StateVector::random_haar(n, &mut rng).unwrap();
            assert_eq!(schmidt_rank(&h, &[0]).unwrap(), 2);
        }
    }
}
