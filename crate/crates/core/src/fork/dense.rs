//! Full state-vector / density-matrix execution.

use super::ir::IrOp;
use super::spec::ForkSpec;
use crate::error::{QforkError, Result};
use crate::state::{apply_channel, apply_unitary, QuantumState, StateForm};
use crate::tensor::{strides, ComplexMatrix};

/// Control ⊗ (target ⊗ ancillas) per copy. Density form iff a component is mixed.
pub fn build_register(spec: &ForkSpec) -> Result<QuantumState> {
    spec.validate()?;
    let mixed = spec.control.is_mixed()
        || !spec.target_state.is_pure()
        || spec.ancilla_states.iter().any(|a| !a.is_pure());
    build_register_as(spec, mixed)
}

/// As [`build_register`], forcing density form when `density` is set.
pub fn build_register_as(spec: &ForkSpec, density: bool) -> Result<QuantumState> {
    let layout = spec.layout()?;
    let dim = layout.total_dim();
    let caps = spec.caps;
    let cap = if density {
        caps.max_density
    } else {
        caps.max_pure
    };
    if dim > cap {
        return Err(QforkError::DimensionCap {
            what: if density {
                "density matrix"
            } else {
                "pure state"
            },
            dim,
            cap,
        });
    }
    let slots = (0..spec.q).flat_map(|k| (0..spec.d).map(move |s| (k, s)));
    if density {
        let mut rho = spec.control.density();
        for (k, s) in slots {
            rho = rho.kron(&spec.slot_state(k, s).density_matrix())?;
        }
        Ok(QuantumState::from_parts(
            layout,
            StateForm::Density(rho),
            caps,
        ))
    } else {
        let mut v = match spec.control.initial_state() {
            StateForm::Pure(v) => v,
            StateForm::Density(_) => unreachable!("mixed control needs density form"),
        };
        for (k, s) in slots {
            let a = spec.slot_state(k, s).amplitudes().ok_or_else(|| {
                QforkError::InvalidState("mixed slot state in a pure register".into())
            })?;
            v = v.kron(a)?;
        }
        Ok(QuantumState::from_parts(layout, StateForm::Pure(v), caps))
    }
}

/// Basis permutation of c-swap(`branch`, `copy`); `branch` is 1-based.
fn cswap_permutation(spec: &ForkSpec, branch: usize, copy: usize) -> Vec<usize> {
    let dims = spec.layout().expect("validated spec").dims();
    let stride = strides(&dims);
    let branch_of = spec.control.branch_of();
    let a = spec.subsystem(copy, 0);
    let b = spec.subsystem(copy, branch - 1);
    let (sa, sb) = (stride[a], stride[b]);
    let r = spec.slot_radix;
    let total: usize = dims.iter().product();
    (0..total)
        .map(|x| {
            let control = x / stride[0];
            if branch_of[control] + 1 != branch || a == b {
                return x;
            }
            let (da, db) = ((x / sa) % r, (x / sb) % r);
            x - da * sa - db * sb + db * sa + da * sb
        })
        .collect()
}

pub fn cswap(state: &QuantumState, spec: &ForkSpec, branch: usize, copy: usize) -> QuantumState {
    state.permute_basis(&cswap_permutation(spec, branch, copy))
}

pub fn fork(state: &QuantumState, spec: &ForkSpec) -> QuantumState {
    let mut s = state.clone();
    for copy in 0..spec.q {
        for branch in 2..=spec.d {
            s = cswap(&s, spec, branch, copy);
        }
    }
    s
}

pub fn unfork(state: &QuantumState, spec: &ForkSpec) -> QuantumState {
    let mut s = state.clone();
    for copy in (0..spec.q).rev() {
        for branch in (2..=spec.d).rev() {
            s = cswap(&s, spec, branch, copy);
        }
    }
    s
}

fn apply_on(
    state: &QuantumState,
    ch: &crate::channel::Channel,
    target: usize,
) -> Result<QuantumState> {
    match (state.is_pure(), ch.as_unitary()) {
        (true, Some(u)) => apply_unitary(state, u, &[target]),
        _ => apply_channel(state, ch, &[target]),
    }
}

pub fn apply_pipelines(state: &QuantumState, spec: &ForkSpec) -> Result<QuantumState> {
    let mut s = state.clone();
    for (copy, slots) in spec.pipelines.iter().enumerate() {
        for (slot, channels) in slots.iter().enumerate() {
            for ch in channels {
                s = apply_on(&s, ch, spec.subsystem(copy, slot))?;
            }
        }
    }
    for ch in &spec.control_pipeline {
        s = apply_on(&s, ch, 0)?;
    }
    Ok(s)
}

/// Executes the IR op list on a prepared register.
pub(crate) fn execute(state: QuantumState, spec: &ForkSpec, ops: &[IrOp]) -> Result<QuantumState> {
    let mut s = state;
    for op in ops {
        s = match op {
            IrOp::Cswap { branch, copy } => cswap(&s, spec, *branch, *copy),
            IrOp::ApplyChannel {
                copy, slot, index, ..
            } => apply_on(
                &s,
                &spec.pipelines[*copy][*slot][*index],
                spec.subsystem(*copy, *slot),
            )?,
            IrOp::ControlChannel { index, .. } => apply_on(&s, &spec.control_pipeline[*index], 0)?,
            _ => s,
        };
    }
    Ok(s)
}

/// Reduced state of the target slots, in copy order.
pub fn target_state(state: &QuantumState, spec: &ForkSpec) -> Result<ComplexMatrix> {
    state.reduced(&spec.target_subsystems())
}
