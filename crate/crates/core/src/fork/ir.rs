use serde::Serialize;

use super::spec::{ForkSpec, Measurement};
use crate::error::Result;
use crate::state::RegisterLayout;

/// One step of a forking circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrOp {
    PrepareControl,
    /// `branch` is 1-based; branch 1 never swaps.
    Cswap {
        branch: usize,
        copy: usize,
    },
    ApplyChannel {
        copy: usize,
        slot: usize,
        channel_id: String,
        #[serde(skip)]
        index: usize,
    },
    ControlChannel {
        channel_id: String,
        #[serde(skip)]
        index: usize,
    },
    MeasureExpectation,
    MeasureProjective,
}

/// Ordered record of the operations a run executes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitIR {
    pub layout: RegisterLayout,
    pub ops: Vec<IrOp>,
    pub cswap_count: usize,
}

impl CircuitIR {
    /// Circuit for `spec`: prepare, fork (copies ascending, branches 2..d
    /// ascending), pipelines, control channels, unfork (exact reverse), measure.
    pub fn from_spec(spec: &ForkSpec) -> Result<Self> {
        let mut ops = vec![IrOp::PrepareControl];
        let fork: Vec<IrOp> = (0..spec.q)
            .flat_map(|copy| (2..=spec.d).map(move |branch| IrOp::Cswap { branch, copy }))
            .collect();
        ops.extend(fork.iter().cloned());
        for (copy, slots) in spec.pipelines.iter().enumerate() {
            for (slot, channels) in slots.iter().enumerate() {
                for (index, ch) in channels.iter().enumerate() {
                    ops.push(IrOp::ApplyChannel {
                        copy,
                        slot,
                        channel_id: ch.label().to_string(),
                        index,
                    });
                }
            }
        }
        for (index, ch) in spec.control_pipeline.iter().enumerate() {
            ops.push(IrOp::ControlChannel {
                channel_id: ch.label().to_string(),
                index,
            });
        }
        ops.extend(fork.into_iter().rev());
        ops.push(match spec.measurement {
            Measurement::Expectation(_) => IrOp::MeasureExpectation,
            Measurement::Projective(_) => IrOp::MeasureProjective,
        });
        let cswap_count = ops
            .iter()
            .filter(|o| matches!(o, IrOp::Cswap { .. }))
            .count();
        Ok(Self {
            layout: spec.layout()?,
            ops,
            cswap_count,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("IR serializes")
    }
}
