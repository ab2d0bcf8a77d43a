//! Register layouts and quantum states over them.

use rand::Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::channel::Channel;
use crate::error::{QforkError, Result};
use crate::random::stream_rng;
use crate::tensor::{
    apply_on_subsystems, check_targets, local_offsets, partial_trace, strides, ComplexMatrix,
    ComplexVector, C, KRON_ENTRY_CAP,
};
use crate::tol;

/// What a subsystem holds in a forking register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Control,
    TargetCopy(usize),
    Ancilla { copy: usize, slot: usize },
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub radix: usize,
    pub role: Role,
}

impl Serialize for Subsystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("radix", &self.radix)?;
        match self.role {
            Role::Control => m.serialize_entry("role", "control")?,
            Role::TargetCopy(k) => {
                m.serialize_entry("role", "target")?;
                m.serialize_entry("copy", &k)?;
            }
            Role::Ancilla { copy, slot } => {
                m.serialize_entry("role", "ancilla")?;
                m.serialize_entry("copy", &copy)?;
                m.serialize_entry("slot", &slot)?;
            }
            Role::Free => m.serialize_entry("role", "free")?,
        }
        m.end()
    }
}

/// Ordered list of subsystems; subsystem 0 is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RegisterLayout {
    subsystems: Vec<Subsystem>,
}

impl RegisterLayout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(QforkError::param("layout", "no subsystems"));
        }
        if subsystems.iter().any(|s| s.radix == 0) {
            return Err(QforkError::param("radix", "zero-dimensional subsystem"));
        }
        Ok(Self { subsystems })
    }

    /// Layout of unlabeled subsystems.
    pub fn uniform(radices: &[usize]) -> Result<Self> {
        Self::new(
            radices
                .iter()
                .map(|&radix| Subsystem {
                    radix,
                    role: Role::Free,
                })
                .collect(),
        )
    }

    /// Forking register: control, then for each copy its target slot followed
    /// by its `d − 1` ancilla slots.
    pub fn forking(control_dim: usize, d: usize, q: usize, slot_radix: usize) -> Result<Self> {
        let mut subs = vec![Subsystem {
            radix: control_dim,
            role: Role::Control,
        }];
        for copy in 0..q {
            subs.push(Subsystem {
                radix: slot_radix,
                role: Role::TargetCopy(copy),
            });
            for slot in 1..d {
                subs.push(Subsystem {
                    radix: slot_radix,
                    role: Role::Ancilla { copy, slot },
                });
            }
        }
        Self::new(subs)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.radix).collect()
    }

    /// Total Hilbert-space dimension, saturating on overflow.
    pub fn total_dim(&self) -> usize {
        self.subsystems
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.radix))
            .unwrap_or(usize::MAX)
    }

    pub fn concat(&self, other: &RegisterLayout) -> RegisterLayout {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend_from_slice(&other.subsystems);
        RegisterLayout { subsystems }
    }

    fn target_dim(&self, targets: &[usize]) -> Result<usize> {
        check_targets(&self.dims(), targets)?;
        Ok(targets.iter().map(|&t| self.subsystems[t].radix).product())
    }
}

/// Dimension limits for state representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimensionCaps {
    pub max_pure: usize,
    pub max_density: usize,
}

impl Default for DimensionCaps {
    fn default() -> Self {
        Self {
            max_pure: 1 << 12,
            max_density: 1 << 8,
        }
    }
}

impl DimensionCaps {
    fn check_pure(&self, dim: usize) -> Result<()> {
        if dim > self.max_pure {
            return Err(QforkError::DimensionCap {
                what: "pure state",
                dim,
                cap: self.max_pure,
            });
        }
        Ok(())
    }

    fn check_density(&self, dim: usize) -> Result<()> {
        if dim > self.max_density {
            return Err(QforkError::DimensionCap {
                what: "density matrix",
                dim,
                cap: self.max_density,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateForm {
    Pure(ComplexVector),
    Density(ComplexMatrix),
}

/// Pure amplitude vector or density matrix over a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: RegisterLayout,
    form: StateForm,
    caps: DimensionCaps,
}

impl QuantumState {
    pub fn pure(layout: RegisterLayout, amplitudes: ComplexVector) -> Result<Self> {
        Self::pure_with_caps(layout, amplitudes, DimensionCaps::default())
    }

    pub fn pure_with_caps(
        layout: RegisterLayout,
        amplitudes: ComplexVector,
        caps: DimensionCaps,
    ) -> Result<Self> {
        let dim = layout.total_dim();
        caps.check_pure(dim)?;
        if amplitudes.dim() != dim {
            return Err(QforkError::DimensionMismatch(format!(
                "{} amplitudes for layout dimension {dim}",
                amplitudes.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(QforkError::InvalidState(format!(
                "norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            layout,
            form: StateForm::Pure(amplitudes),
            caps,
        })
    }

    pub fn density(layout: RegisterLayout, rho: ComplexMatrix) -> Result<Self> {
        Self::density_with_caps(layout, rho, DimensionCaps::default())
    }

    pub fn density_with_caps(
        layout: RegisterLayout,
        rho: ComplexMatrix,
        caps: DimensionCaps,
    ) -> Result<Self> {
        let dim = layout.total_dim();
        caps.check_density(dim)?;
        validate_density(&rho, dim)?;
        Ok(Self {
            layout,
            form: StateForm::Density(rho),
            caps,
        })
    }

    /// Single-subsystem pure state.
    pub fn single_pure(amplitudes: ComplexVector) -> Result<Self> {
        let layout = RegisterLayout::uniform(&[amplitudes.dim()])?;
        Self::pure(layout, amplitudes)
    }

    /// Single-subsystem mixed state.
    pub fn single_density(rho: ComplexMatrix) -> Result<Self> {
        let layout = RegisterLayout::uniform(&[rho.rows()])?;
        Self::density(layout, rho)
    }

    /// Computational basis state.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(QforkError::IndexOutOfRange { index, len: dim });
        }
        Self::pure(layout, ComplexVector::basis(dim, index))
    }

    pub(crate) fn from_parts(layout: RegisterLayout, form: StateForm, caps: DimensionCaps) -> Self {
        Self { layout, form, caps }
    }

    /// Replaces the caps; fails if the current representation exceeds them.
    pub fn with_caps(mut self, caps: DimensionCaps) -> Result<Self> {
        match &self.form {
            StateForm::Pure(_) => caps.check_pure(self.dim())?,
            StateForm::Density(_) => caps.check_density(self.dim())?,
        }
        self.caps = caps;
        Ok(self)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn form(&self) -> &StateForm {
        &self.form
    }

    pub fn caps(&self) -> DimensionCaps {
        self.caps
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.form, StateForm::Pure(_))
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn amplitudes(&self) -> Option<&ComplexVector> {
        match &self.form {
            StateForm::Pure(v) => Some(v),
            StateForm::Density(_) => None,
        }
    }

    /// Density matrix of the state (computed for pure states).
    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.form {
            StateForm::Pure(v) => v.projector(),
            StateForm::Density(rho) => rho.clone(),
        }
    }

    pub fn to_density(&self) -> Result<QuantumState> {
        match &self.form {
            StateForm::Density(_) => Ok(self.clone()),
            StateForm::Pure(v) => {
                self.caps.check_density(self.dim())?;
                Ok(Self {
                    layout: self.layout.clone(),
                    form: StateForm::Density(v.projector()),
                    caps: self.caps,
                })
            }
        }
    }

    /// self ⊗ other; density form iff either factor is mixed.
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let layout = self.layout.concat(&other.layout);
        let dim = layout.total_dim();
        let form = match (&self.form, &other.form) {
            (StateForm::Pure(a), StateForm::Pure(b)) => {
                self.caps.check_pure(dim)?;
                StateForm::Pure(a.kron(b)?)
            }
            _ => {
                self.caps.check_density(dim)?;
                StateForm::Density(self.density_matrix().kron(&other.density_matrix())?)
            }
        };
        Ok(Self {
            layout,
            form,
            caps: self.caps,
        })
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        let dims = self.layout.dims();
        match &self.form {
            StateForm::Pure(v) => {
                // reduce without forming the full projector
                check_targets(&dims, keep)?;
                let mut keep = keep.to_vec();
                keep.sort_unstable();
                let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
                let stride = strides(&dims);
                let ko = local_offsets(&dims, &stride, &keep);
                let to = local_offsets(&dims, &stride, &traced);
                let a = v.data();
                Ok(ComplexMatrix::from_fn(ko.len(), ko.len(), |r, col| {
                    to.iter()
                        .map(|&t| a[ko[r] + t] * a[ko[col] + t].conj())
                        .sum()
                }))
            }
            StateForm::Density(rho) => partial_trace(rho, &dims, keep),
        }
    }

    /// Applies a basis permutation: amplitude at index `x` moves to `perm[x]`.
    pub(crate) fn permute_basis(&self, perm: &[usize]) -> QuantumState {
        let form = match &self.form {
            StateForm::Pure(v) => {
                let mut out = vec![C::default(); v.dim()];
                for (x, &a) in v.data().iter().enumerate() {
                    out[perm[x]] = a;
                }
                StateForm::Pure(ComplexVector::from_raw(out))
            }
            StateForm::Density(rho) => {
                let n = rho.rows();
                let mut out = vec![C::default(); n * n];
                let src = rho.data();
                for x in 0..n {
                    let row = perm[x] * n;
                    for y in 0..n {
                        out[row + perm[y]] = src[x * n + y];
                    }
                }
                StateForm::Density(ComplexMatrix::from_raw(n, n, out))
            }
        };
        Self {
            layout: self.layout.clone(),
            form,
            caps: self.caps,
        }
    }

    /// Trace deviation (density) or norm deviation (pure) from one.
    pub fn normalization_error(&self) -> f64 {
        match &self.form {
            StateForm::Pure(v) => (v.norm() - 1.0).abs(),
            StateForm::Density(rho) => (rho.trace() - 1.0).norm(),
        }
    }
}

fn validate_density(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if !rho.is_square() || rho.rows() != dim {
        return Err(QforkError::DimensionMismatch(format!(
            "{}x{} density matrix for layout dimension {dim}",
            rho.rows(),
            rho.cols()
        )));
    }
    let herr = rho.hermiticity_error();
    if herr > tol::STRUCTURAL {
        return Err(QforkError::InvalidState(format!(
            "density matrix not Hermitian ({herr:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > tol::STRUCTURAL {
        return Err(QforkError::InvalidState(format!(
            "trace {tr} differs from 1"
        )));
    }
    let min = rho.hermitian_eig()?.values[0];
    if min < -tol::STRUCTURAL {
        return Err(QforkError::InvalidState(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Hermitian operator acting on a list of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    acting_on: Vec<usize>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, acting_on: Vec<usize>) -> Result<Self> {
        let herr = matrix.hermiticity_error();
        if herr > tol::STRUCTURAL * matrix.max_abs().max(1.0) {
            return Err(QforkError::NotHermitian(herr));
        }
        Ok(Self { matrix, acting_on })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn acting_on(&self) -> &[usize] {
        &self.acting_on
    }
}

/// Orthogonal projector acting on a list of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    acting_on: Vec<usize>,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, acting_on: Vec<usize>) -> Result<Self> {
        let herr = matrix.hermiticity_error();
        if herr > tol::STRUCTURAL {
            return Err(QforkError::NotHermitian(herr));
        }
        let ierr = (&matrix * &matrix).max_abs_diff(&matrix);
        if ierr > tol::ORACLE {
            return Err(QforkError::NotIdempotent(ierr));
        }
        Ok(Self { matrix, acting_on })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn acting_on(&self) -> &[usize] {
        &self.acting_on
    }
}

/// Full-space operator acting as `op` on `targets` (in order), identity elsewhere.
pub fn embed(
    op: &ComplexMatrix,
    layout: &RegisterLayout,
    targets: &[usize],
) -> Result<ComplexMatrix> {
    let local = layout.target_dim(targets)?;
    if !op.is_square() || op.rows() != local {
        return Err(QforkError::DimensionMismatch(format!(
            "{}x{} operator on targets of dimension {local}",
            op.rows(),
            op.cols()
        )));
    }
    let dim = layout.total_dim();
    if dim.saturating_mul(dim) > KRON_ENTRY_CAP {
        return Err(QforkError::DimensionCap {
            what: "embedded operator entries",
            dim: dim.saturating_mul(dim),
            cap: KRON_ENTRY_CAP,
        });
    }
    let dims = layout.dims();
    let stride = strides(&dims);
    let offs = local_offsets(&dims, &stride, targets);
    let others: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();
    let bases = local_offsets(&dims, &stride, &others);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for &b in &bases {
        for (a, &oa) in offs.iter().enumerate() {
            for (a2, &oa2) in offs.iter().enumerate() {
                out[(b + oa, b + oa2)] = op[(a, a2)];
            }
        }
    }
    Ok(out)
}

fn doubled(layout: &RegisterLayout) -> Vec<usize> {
    let dims = layout.dims();
    dims.iter().chain(&dims).copied().collect()
}

/// Op·ρ with `op` on the row index of the given subsystems.
fn left_apply(
    rho: &ComplexMatrix,
    layout: &RegisterLayout,
    op: &ComplexMatrix,
    targets: &[usize],
) -> Result<ComplexMatrix> {
    let data = apply_on_subsystems(rho.data(), &doubled(layout), op, targets)?;
    Ok(ComplexMatrix::from_raw(rho.rows(), rho.cols(), data))
}

pub fn apply_unitary(
    state: &QuantumState,
    u: &ComplexMatrix,
    targets: &[usize],
) -> Result<QuantumState> {
    let err = u.unitarity_error();
    if err > tol::STRUCTURAL {
        return Err(QforkError::NotUnitary(err));
    }
    let layout = state.layout();
    let form = match state.form() {
        StateForm::Pure(v) => StateForm::Pure(ComplexVector::from_raw(apply_on_subsystems(
            v.data(),
            &layout.dims(),
            u,
            targets,
        )?)),
        StateForm::Density(rho) => {
            let n = layout.len();
            let cols: Vec<usize> = targets.iter().map(|t| t + n).collect();
            let half = left_apply(rho, layout, u, targets)?;
            StateForm::Density(left_apply(&half, layout, &u.conj(), &cols)?)
        }
    };
    Ok(QuantumState::from_parts(layout.clone(), form, state.caps()))
}

/// ρ → Σ K ρ K† on `targets`; pure inputs are promoted to density form.
pub fn apply_channel(
    state: &QuantumState,
    ch: &Channel,
    targets: &[usize],
) -> Result<QuantumState> {
    let err = ch.cptp_error();
    if err > tol::CHANNEL {
        return Err(QforkError::NotCptp(err));
    }
    let layout = state.layout();
    let local = layout.target_dim(targets)?;
    if ch.dim() != local {
        return Err(QforkError::DimensionMismatch(format!(
            "channel of dimension {} on targets of dimension {local}",
            ch.dim()
        )));
    }
    let rho = state.to_density()?.density_matrix();
    let n = layout.len();
    let both: Vec<usize> = targets
        .iter()
        .copied()
        .chain(targets.iter().map(|t| t + n))
        .collect();
    let out = left_apply(&rho, layout, &ch.superoperator(), &both)?;
    Ok(QuantumState::from_parts(
        layout.clone(),
        StateForm::Density(out),
        state.caps(),
    ))
}

/// tr(Oᵉ ρ) for an arbitrary (not necessarily Hermitian) operator.
pub fn expectation_operator(
    state: &QuantumState,
    op: &ComplexMatrix,
    targets: &[usize],
) -> Result<C> {
    let layout = state.layout();
    let local = layout.target_dim(targets)?;
    if !op.is_square() || op.rows() != local {
        return Err(QforkError::DimensionMismatch(format!(
            "{}x{} operator on targets of dimension {local}",
            op.rows(),
            op.cols()
        )));
    }
    match state.form() {
        StateForm::Pure(v) => {
            let ov = apply_on_subsystems(v.data(), &layout.dims(), op, targets)?;
            Ok(v.inner(&ComplexVector::from_raw(ov)))
        }
        StateForm::Density(rho) => Ok(left_apply(rho, layout, op, targets)?.trace()),
    }
}

pub fn expectation(state: &QuantumState, obs: &Observable) -> Result<f64> {
    Ok(expectation_operator(state, obs.matrix(), obs.acting_on())?.re)
}

/// Clips a probability into [0, 1] within the clipping window.
pub fn clip_probability(p: f64) -> Result<f64> {
    if (-tol::PROBABILITY_CLIP..=1.0 + tol::PROBABILITY_CLIP).contains(&p) {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(QforkError::ProbabilityOutOfRange(p))
    }
}

pub fn projective_probability(state: &QuantumState, proj: &Projector) -> Result<f64> {
    clip_probability(expectation_operator(state, proj.matrix(), proj.acting_on())?.re)
}

/// Distinct eigenvalues of `op` with their Born probabilities, computed by
/// `prob_of(projector)`.
pub fn outcome_distribution_with(
    op: &ComplexMatrix,
    mut prob_of: impl FnMut(&ComplexMatrix) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    let eig = op.hermitian_eig()?;
    let n = op.rows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && eig.values[j] - eig.values[i] <= tol::ORACLE {
            j += 1;
        }
        let mut proj = ComplexMatrix::zeros(n, n);
        for k in i..j {
            proj = &proj + &eig.vector(k).projector();
        }
        let value = eig.values[i..j].iter().sum::<f64>() / (j - i) as f64;
        out.push((value, clip_probability(prob_of(&proj)?)?));
        i = j;
    }
    let total: f64 = out.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > tol::ORACLE {
        return Err(QforkError::InvalidState(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    for (_, p) in out.iter_mut() {
        *p /= total;
    }
    Ok(out)
}

pub fn outcome_distribution(state: &QuantumState, obs: &Observable) -> Result<Vec<(f64, f64)>> {
    outcome_distribution_with(obs.matrix(), |p| {
        Ok(expectation_operator(state, p, obs.acting_on())?.re)
    })
}

/// Draws `shots` outcomes from a discrete distribution of (value, probability).
pub fn sample_distribution(dist: &[(f64, f64)], shots: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut cumulative = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for (_, p) in dist {
        acc += p;
        cumulative.push(acc);
    }
    (0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(dist.len() - 1);
            dist[k].0
        })
        .collect()
}

/// I.i.d. eigenvalue samples of `obs`, deterministic for a fixed seed.
pub fn born_sample(
    state: &QuantumState,
    obs: &Observable,
    shots: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(QforkError::param("shots", "must be at least 1"));
    }
    let dist = outcome_distribution(state, obs)?;
    let mut rng = stream_rng(seed, 0);
    Ok(sample_distribution(&dist, shots, &mut rng))
}
