#![allow(dead_code)]

use qfork::channel::Channel;
use qfork::fork::{ControlSpec, ForkSpec, Measurement};
use qfork::oracle::{oracle_trajectories, weighted_total, OracleMeasurement};
use qfork::random::{random_channel, random_density, random_pure_state, random_weights};
use qfork::state::QuantumState;
use qfork::tensor::{ComplexMatrix, ComplexVector};
use rand::Rng;

pub fn random_slot_state(radix: usize, rng: &mut impl Rng) -> QuantumState {
    if rng.random_bool(0.5) {
        QuantumState::single_pure(random_pure_state(radix, rng)).unwrap()
    } else {
        let rank = rng.random_range(1..=radix);
        QuantumState::single_density(random_density(radix, rank, rng)).unwrap()
    }
}

/// Random Hermitian matrix with spectrum in [−1, 1].
pub fn random_observable(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u = qfork::random::random_unitary(dim, rng);
    let diag: Vec<_> = (0..dim)
        .map(|_| rng.random_range(-1.0..1.0).into())
        .collect();
    let m = &(&u * &ComplexMatrix::from_diag(&diag)) * &u.dagger();
    (&m + &m.dagger()).scale_real(0.5)
}

/// Random spec with a random channel on every slot of every copy.
pub fn random_spec(
    d: usize,
    q: usize,
    radix: usize,
    projective: bool,
    rng: &mut impl Rng,
) -> ForkSpec {
    let weights = random_weights(d, rng);
    let control = if rng.random_bool(0.5) {
        ControlSpec::PureWeights(weights)
    } else {
        ControlSpec::MixedWeights(weights)
    };
    let target = random_slot_state(radix, rng);
    let measurement = if projective {
        Measurement::Projective(
            (0..q)
                .map(|_| {
                    let v = random_pure_state(radix, rng);
                    v.projector()
                })
                .collect(),
        )
    } else {
        Measurement::Expectation(random_observable(radix.pow(q as u32), rng))
    };
    let mut spec = ForkSpec::new(d, q, radix, control, target, measurement).unwrap();
    let ancillas = (0..q * (d - 1))
        .map(|_| random_slot_state(radix, rng))
        .collect();
    spec = spec.with_ancillas(ancillas).unwrap();
    for k in 0..q {
        for s in 0..d {
            let n = rng.random_range(1..=3);
            spec = spec
                .with_pipeline(k, s, vec![random_channel(radix, n, rng)])
                .unwrap();
        }
    }
    spec
}

/// Oracle value of a spec: trajectory i evolves each copy with slot i−1's pipeline.
pub fn oracle_value(spec: &ForkSpec) -> f64 {
    let weights = spec.weights();
    let rho = spec.target_state.density_matrix();
    let pipelines: Vec<Vec<Vec<Channel>>> = spec.pipelines.clone();
    let t = match &spec.measurement {
        Measurement::Expectation(m) => {
            oracle_trajectories(&weights, &pipelines, OracleMeasurement::Joint(m), &rho).unwrap()
        }
        Measurement::Projective(ps) => oracle_trajectories(
            &weights,
            &pipelines,
            OracleMeasurement::Projective(ps),
            &rho,
        )
        .unwrap(),
    };
    weighted_total(&t)
}

pub fn zero(radix: usize) -> QuantumState {
    QuantumState::single_pure(ComplexVector::basis(radix, 0)).unwrap()
}
