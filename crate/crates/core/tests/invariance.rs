mod common;

use common::{random_slot_state, random_spec};
use proptest::prelude::*;
use qfork::channel::{qudit_dephasing, unitary_channel};
use qfork::fork::{run, ControlSpec};
use qfork::gates;
use qfork::random::{random_unitary, stream_rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ancillas_do_not_matter(seed in any::<u64>(), d in 2usize..=4, q in 1usize..=2) {
        let mut rng = stream_rng(seed, 0);
        let spec = random_spec(d, q, 2, false, &mut rng);
        let base = run(&spec).unwrap().value;
        let fresh = (0..q * (d - 1)).map(|_| random_slot_state(2, &mut rng)).collect();
        let other = spec.with_ancillas(fresh).unwrap();
        prop_assert!((run(&other).unwrap().value - base).abs() <= 1e-9);
    }

    #[test]
    fn pure_and_mixed_control_agree(seed in any::<u64>(), d in 1usize..=4, q in 1usize..=2) {
        let mut spec = random_spec(d, q, 2, false, &mut stream_rng(seed, 1));
        let w = spec.weights();
        spec.control = ControlSpec::PureWeights(w.clone());
        let a = run(&spec).unwrap().value;
        spec.control = ControlSpec::MixedWeights(w);
        let b = run(&spec).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn control_dephasing_is_harmless(seed in any::<u64>(), d in 2usize..=5, q in 1usize..=2, p in 0.0f64..=1.0) {
        let spec = random_spec(d, q, 2, false, &mut stream_rng(seed, 2));
        let base = run(&spec).unwrap().value;
        let noisy = spec.with_control_pipeline(vec![qudit_dephasing(d, p).unwrap()]).unwrap();
        prop_assert!((run(&noisy).unwrap().value - base).abs() <= 1e-9);
    }

    #[test]
    fn control_starting_in_one(seed in any::<u64>()) {
        // control prepared as H|1⟩ = (|0⟩ − |1⟩)/√2 instead of H|0⟩
        let mut rng = stream_rng(seed, 3);
        let mut spec = random_spec(2, 1, 2, false, &mut rng);
        let u1 = unitary_channel(&random_unitary(2, &mut rng)).unwrap();
        let u2 = unitary_channel(&random_unitary(2, &mut rng)).unwrap();
        spec = spec.with_pipeline(0, 0, vec![u1]).unwrap().with_pipeline(0, 1, vec![u2]).unwrap();
        spec.control = ControlSpec::PureWeights(vec![0.5, 0.5]);
        let a = run(&spec).unwrap().value;
        let hx = &gates::hadamard() * &gates::pauli_x();
        spec.control = ControlSpec::encoded(hx, vec![vec![0], vec![1]]).unwrap();
        let b = run(&spec).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9);
    }
}
