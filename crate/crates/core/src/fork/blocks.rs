//! Exact structured execution for registers too large for a dense matrix.
//!
//! The register state is kept as Σ_{j,k} |j⟩⟨k| ⊗ X_jk over control basis
//! states, with each X_jk a scalar times a tensor product of small factors.
//! A c-swap acting on both sides of a block only relabels slots; acting on
//! one side merges the two factors involved and permutes rows or columns.
//! Slot channels act inside a single factor. Factors never span more than
//! three slots of one copy.

use super::ir::IrOp;
use super::spec::ForkSpec;
use crate::channel::Channel;
use crate::error::{QforkError, Result};
use crate::state::{DimensionCaps, QuantumState, StateForm};
use crate::tensor::{apply_on_subsystems, partial_trace, permute_operator, ComplexMatrix, C};

#[derive(Clone, Debug)]
struct Factor {
    /// Slot labels, big-endian within `op`.
    slots: Vec<usize>,
    op: ComplexMatrix,
}

#[derive(Clone, Debug)]
struct Block {
    coeff: C,
    factors: Vec<Factor>,
}

/// Block/product-factor representation of a forking register.
#[derive(Clone, Debug)]
pub struct BlockRegister {
    control_dim: usize,
    slot_radix: usize,
    d: usize,
    q: usize,
    branch_of: Vec<usize>,
    /// Row-major over (j, k); zero blocks are dropped.
    blocks: Vec<Option<Block>>,
}

fn digit_swap_permutation(radix: usize, n: usize, pa: usize, pb: usize) -> Vec<usize> {
    let total = radix.pow(n as u32);
    let sa = radix.pow((n - 1 - pa) as u32);
    let sb = radix.pow((n - 1 - pb) as u32);
    (0..total)
        .map(|x| {
            let (da, db) = ((x / sa) % radix, (x / sb) % radix);
            x - da * sa - db * sb + db * sa + da * sb
        })
        .collect()
}

impl Block {
    fn position(&self, slot: usize) -> (usize, usize) {
        for (f, factor) in self.factors.iter().enumerate() {
            if let Some(p) = factor.slots.iter().position(|&s| s == slot) {
                return (f, p);
            }
        }
        unreachable!("every slot belongs to one factor")
    }

    fn relabel(&mut self, a: usize, b: usize) {
        for f in &mut self.factors {
            for s in &mut f.slots {
                if *s == a {
                    *s = b;
                } else if *s == b {
                    *s = a;
                }
            }
        }
    }

    /// Merges the factors holding `a` and `b`; returns the merged factor index.
    fn merge(&mut self, a: usize, b: usize) -> Result<usize> {
        let (fa, _) = self.position(a);
        let (fb, _) = self.position(b);
        if fa == fb {
            return Ok(fa);
        }
        let (lo, hi) = (fa.min(fb), fa.max(fb));
        let second = self.factors.remove(hi);
        let first = &mut self.factors[lo];
        first.op = first.op.kron(&second.op)?;
        first.slots.extend(second.slots);
        Ok(lo)
    }

    /// Swap of slots `a` and `b` applied from the left (`rows`) or right.
    fn one_sided_swap(&mut self, a: usize, b: usize, radix: usize, rows: bool) -> Result<()> {
        let f = self.merge(a, b)?;
        let factor = &mut self.factors[f];
        let n = factor.slots.len();
        let pa = factor.slots.iter().position(|&s| s == a).expect("merged");
        let pb = factor.slots.iter().position(|&s| s == b).expect("merged");
        let perm = digit_swap_permutation(radix, n, pa, pb);
        let dim = factor.op.rows();
        let src = factor.op.data();
        let mut out = vec![C::default(); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let (sr, sc) = if rows { (perm[r], c) } else { (r, perm[c]) };
                out[r * dim + c] = src[sr * dim + sc];
            }
        }
        factor.op = ComplexMatrix::from_raw(dim, dim, out);
        Ok(())
    }

    fn apply_superoperator(
        &mut self,
        slot: usize,
        superop: &ComplexMatrix,
        radix: usize,
    ) -> Result<()> {
        let (f, p) = self.position(slot);
        let factor = &mut self.factors[f];
        let n = factor.slots.len();
        let dims = vec![radix; 2 * n];
        let data = apply_on_subsystems(factor.op.data(), &dims, superop, &[p, p + n])?;
        factor.op = ComplexMatrix::from_raw(factor.op.rows(), factor.op.cols(), data);
        Ok(())
    }

    /// Operator of this block on all slots `0..n_slots`, in slot order.
    fn dense(&self, radix: usize, n_slots: usize) -> Result<ComplexMatrix> {
        let mut op = ComplexMatrix::identity(1);
        let mut order = Vec::with_capacity(n_slots);
        for f in &self.factors {
            op = op.kron(&f.op)?;
            order.extend_from_slice(&f.slots);
        }
        let perm: Vec<usize> = (0..n_slots)
            .map(|s| order.iter().position(|&o| o == s).expect("slot present"))
            .collect();
        Ok(permute_operator(&op, &vec![radix; n_slots], &perm)?.scale(self.coeff))
    }

    /// Partial trace down to the given slots, in the given order.
    fn reduced(&self, keep: &[usize], radix: usize) -> Result<ComplexMatrix> {
        let mut op = ComplexMatrix::identity(1).scale(self.coeff);
        let mut order = Vec::new();
        for f in &self.factors {
            let positions: Vec<usize> = (0..f.slots.len())
                .filter(|&p| keep.contains(&f.slots[p]))
                .collect();
            if positions.is_empty() {
                op = op.scale(f.op.trace());
                continue;
            }
            let r = partial_trace(&f.op, &vec![radix; f.slots.len()], &positions)?;
            op = op.kron(&r)?;
            order.extend(positions.iter().map(|&p| f.slots[p]));
        }
        let perm: Vec<usize> = keep
            .iter()
            .map(|s| {
                order
                    .iter()
                    .position(|o| o == s)
                    .expect("kept slot present")
            })
            .collect();
        permute_operator(&op, &vec![radix; keep.len()], &perm)
    }
}

impl BlockRegister {
    /// Register for `spec` before forking.
    pub fn build(spec: &ForkSpec) -> Result<Self> {
        spec.validate()?;
        let dc = spec.control.control_dim();
        let rho_c = spec.control.density();
        let factors: Vec<Factor> = (0..spec.q)
            .flat_map(|k| (0..spec.d).map(move |s| (k, s)))
            .enumerate()
            .map(|(slot, (k, s))| Factor {
                slots: vec![slot],
                op: spec.slot_state(k, s).density_matrix(),
            })
            .collect();
        let blocks = (0..dc * dc)
            .map(|jk| {
                let coeff = rho_c[(jk / dc, jk % dc)];
                (coeff != C::default()).then(|| Block {
                    coeff,
                    factors: factors.clone(),
                })
            })
            .collect();
        Ok(Self {
            control_dim: dc,
            slot_radix: spec.slot_radix,
            d: spec.d,
            q: spec.q,
            branch_of: spec.control.branch_of(),
            blocks,
        })
    }

    fn n_slots(&self) -> usize {
        self.q * self.d
    }

    /// c-swap of `copy`'s target with its slot `branch − 1` on the control
    /// states of `branch` (1-based).
    pub fn cswap(&mut self, branch: usize, copy: usize) -> Result<()> {
        if branch < 2 {
            return Ok(());
        }
        let a = copy * self.d;
        let b = a + branch - 1;
        let dc = self.control_dim;
        for (jk, block) in self.blocks.iter_mut().enumerate() {
            let Some(block) = block else { continue };
            let left = self.branch_of[jk / dc] + 1 == branch;
            let right = self.branch_of[jk % dc] + 1 == branch;
            match (left, right) {
                (true, true) => block.relabel(a, b),
                (true, false) => block.one_sided_swap(a, b, self.slot_radix, true)?,
                (false, true) => block.one_sided_swap(a, b, self.slot_radix, false)?,
                (false, false) => {}
            }
        }
        Ok(())
    }

    pub fn apply_channel(&mut self, copy: usize, slot: usize, ch: &Channel) -> Result<()> {
        if ch.dim() != self.slot_radix {
            return Err(QforkError::DimensionMismatch(format!(
                "channel of dimension {} on a slot of radix {}",
                ch.dim(),
                self.slot_radix
            )));
        }
        let superop = ch.superoperator();
        let s = copy * self.d + slot;
        for block in self.blocks.iter_mut().flatten() {
            block.apply_superoperator(s, &superop, self.slot_radix)?;
        }
        Ok(())
    }

    /// Control channels must be diagonal in the control basis.
    pub fn apply_control_channel(&mut self, ch: &Channel) -> Result<()> {
        let m = ch.diagonal_multipliers().ok_or_else(|| {
            QforkError::Unsupported(format!(
                "control channel '{}' is not diagonal in the control basis",
                ch.label()
            ))
        })?;
        for (jk, block) in self.blocks.iter_mut().enumerate() {
            if let Some(b) = block {
                b.coeff *= m[jk];
            }
        }
        Ok(())
    }

    pub(crate) fn execute(&mut self, spec: &ForkSpec, ops: &[IrOp]) -> Result<()> {
        for op in ops {
            match op {
                IrOp::Cswap { branch, copy } => self.cswap(*branch, *copy)?,
                IrOp::ApplyChannel {
                    copy, slot, index, ..
                } => self.apply_channel(*copy, *slot, &spec.pipelines[*copy][*slot][*index])?,
                IrOp::ControlChannel { index, .. } => {
                    self.apply_control_channel(&spec.control_pipeline[*index])?
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Reduced state of the target slots, in copy order.
    pub fn target_state(&self) -> Result<ComplexMatrix> {
        let keep: Vec<usize> = (0..self.q).map(|k| k * self.d).collect();
        let dim = self.slot_radix.pow(self.q as u32);
        let mut out = ComplexMatrix::zeros(dim, dim);
        let dc = self.control_dim;
        for j in 0..dc {
            if let Some(b) = &self.blocks[j * dc + j] {
                out = &out + &b.reduced(&keep, self.slot_radix)?;
            }
        }
        Ok(out)
    }

    /// Largest number of slots held by a single factor.
    pub fn max_factor_slots(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .flat_map(|b| b.factors.iter().map(|f| f.slots.len()))
            .max()
            .unwrap_or(0)
    }

    /// Full density matrix over the forking layout, for cross-checks.
    pub fn to_dense(&self, spec: &ForkSpec, caps: DimensionCaps) -> Result<QuantumState> {
        let layout = spec.layout()?;
        let dim = layout.total_dim();
        if dim > caps.max_density {
            return Err(QforkError::DimensionCap {
                what: "density matrix",
                dim,
                cap: caps.max_density,
            });
        }
        let dc = self.control_dim;
        let inner = dim / dc;
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (jk, block) in self.blocks.iter().enumerate() {
            let Some(b) = block else { continue };
            let (j, k) = (jk / dc, jk % dc);
            let x = b.dense(self.slot_radix, self.n_slots())?;
            for r in 0..inner {
                for c in 0..inner {
                    rho[(j * inner + r, k * inner + c)] = x[(r, c)];
                }
            }
        }
        Ok(QuantumState::from_parts(
            layout,
            StateForm::Density(rho),
            caps,
        ))
    }
}
