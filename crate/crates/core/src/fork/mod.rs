//! The forking engine: register construction, fork, per-slot pipelines,
//! unfork and measurement.

mod blocks;
pub mod dense;
mod ir;
mod spec;

pub use blocks::BlockRegister;
pub use ir::{CircuitIR, IrOp};
pub use spec::{ControlSpec, ForkSpec, Measurement};

use crate::error::{QforkError, Result};
use crate::random::stream_rng;
use crate::sampler::EstimateResult;
use crate::state::{outcome_distribution_with, sample_distribution, QuantumState};
use crate::tensor::ComplexMatrix;

/// State representation used for a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// Pure vector if the circuit stays pure and fits, else a dense density
    /// matrix if it fits, else blocks.
    #[default]
    Auto,
    /// Pure vector or dense density matrix; fails over the dimension caps.
    Dense,
    /// Block/product-factor form; never materializes the full register.
    Blocks,
}

#[derive(Clone, Debug)]
pub enum FinalState {
    Dense(QuantumState),
    Blocks(BlockRegister),
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub value: f64,
    pub ir: CircuitIR,
    pub final_state: FinalState,
    /// Reduced state of the target slots after unforking, in copy order.
    pub target_state: ComplexMatrix,
}

impl RunOutput {
    pub fn backend(&self) -> Backend {
        match self.final_state {
            FinalState::Dense(_) => Backend::Dense,
            FinalState::Blocks(_) => Backend::Blocks,
        }
    }
}

fn resolve(spec: &ForkSpec, backend: Backend) -> Backend {
    if backend != Backend::Auto {
        return backend;
    }
    let dim = spec.layout().map(|l| l.total_dim()).unwrap_or(usize::MAX);
    let dense_fits = if spec.stays_pure() {
        dim <= spec.caps.max_pure
    } else {
        dim <= spec.caps.max_density
    };
    let control_ok = spec
        .control_pipeline
        .iter()
        .all(|c| c.diagonal_multipliers().is_some());
    if dense_fits || !control_ok {
        Backend::Dense
    } else {
        Backend::Blocks
    }
}

/// Value of the measurement on the reduced target state.
pub fn measure(spec: &ForkSpec, target: &ComplexMatrix) -> Result<f64> {
    match &spec.measurement {
        Measurement::Expectation(m) => Ok(m.trace_product(target)?.re),
        Measurement::Projective(ps) => {
            let mut joint = ComplexMatrix::identity(1);
            for p in ps {
                joint = joint.kron(p)?;
            }
            crate::state::clip_probability(joint.trace_product(target)?.re)
        }
    }
}

pub fn run(spec: &ForkSpec) -> Result<RunOutput> {
    run_with(spec, Backend::Auto)
}

pub fn run_with(spec: &ForkSpec, backend: Backend) -> Result<RunOutput> {
    spec.validate()?;
    let ir = CircuitIR::from_spec(spec)?;
    let (final_state, target_state) = match resolve(spec, backend) {
        Backend::Blocks => {
            let mut reg = BlockRegister::build(spec)?;
            reg.execute(spec, &ir.ops)?;
            let t = reg.target_state()?;
            (FinalState::Blocks(reg), t)
        }
        _ => {
            let reg = dense::build_register(spec)?;
            let out = dense::execute(reg, spec, &ir.ops)?;
            let t = dense::target_state(&out, spec)?;
            (FinalState::Dense(out), t)
        }
    };
    let value = measure(spec, &target_state)?;
    Ok(RunOutput {
        value,
        ir,
        final_state,
        target_state,
    })
}

/// Samples the target observable `shots` times from the exact final state.
/// Each shot counts as one state preparation.
pub fn run_sampled(spec: &ForkSpec, shots: usize, seed: u64) -> Result<EstimateResult> {
    run_sampled_stream(spec, shots, seed, 0)
}

/// As [`run_sampled`], drawing from random stream `stream` of `seed`.
pub fn run_sampled_stream(
    spec: &ForkSpec,
    shots: usize,
    seed: u64,
    stream: u64,
) -> Result<EstimateResult> {
    if shots == 0 {
        return Err(QforkError::param("shots", "must be at least 1"));
    }
    let Measurement::Expectation(m) = &spec.measurement else {
        return Err(QforkError::Unsupported(
            "sampling needs an expectation measurement".into(),
        ));
    };
    let out = run(spec)?;
    let dist = outcome_distribution_with(m, |p| Ok(p.trace_product(&out.target_state)?.re))?;
    let samples = sample_distribution(&dist, shots, &mut stream_rng(seed, stream));
    Ok(EstimateResult::from_samples(&samples, seed, shots))
}
