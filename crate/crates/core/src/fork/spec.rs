use crate::channel::{validate_weights, Channel};
use crate::error::{QforkError, Result};
use crate::state::{DimensionCaps, QuantumState, RegisterLayout, StateForm};
use crate::tensor::{ComplexMatrix, ComplexVector};
use crate::tol;

/// Control preparation. Branch `i` (0-based here, 1-based in the IR) is
/// selected by the control basis states in its set.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlSpec {
    /// Σᵢ √pᵢ |i⟩.
    PureWeights(Vec<f64>),
    /// Σᵢ pᵢ |i⟩⟨i|.
    MixedWeights(Vec<f64>),
    /// `prep|0⟩` on a control of dimension `prep.rows()`, with disjoint
    /// basis-index sets covering the control space.
    Encoded {
        prep: ComplexMatrix,
        branches: Vec<Vec<usize>>,
    },
}

impl ControlSpec {
    pub fn encoded(prep: ComplexMatrix, branches: Vec<Vec<usize>>) -> Result<Self> {
        let c = ControlSpec::Encoded { prep, branches };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControlSpec::PureWeights(p) | ControlSpec::MixedWeights(p) => validate_weights(p),
            ControlSpec::Encoded { prep, branches } => {
                let err = prep.unitarity_error();
                if err > tol::STRUCTURAL {
                    return Err(QforkError::NotUnitary(err));
                }
                if prep.rows() < 2 {
                    return Err(QforkError::param("control", "control dimension below 2"));
                }
                let mut seen = vec![false; prep.rows()];
                for set in branches {
                    if set.is_empty() {
                        return Err(QforkError::param("branches", "empty basis-index set"));
                    }
                    for &b in set {
                        if b >= seen.len() {
                            return Err(QforkError::IndexOutOfRange {
                                index: b,
                                len: seen.len(),
                            });
                        }
                        if seen[b] {
                            return Err(QforkError::param(
                                "branches",
                                format!("basis index {b} appears in two branches"),
                            ));
                        }
                        seen[b] = true;
                    }
                }
                if let Some(b) = seen.iter().position(|s| !s) {
                    return Err(QforkError::param(
                        "branches",
                        format!("basis index {b} belongs to no branch"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn control_dim(&self) -> usize {
        match self {
            ControlSpec::PureWeights(p) | ControlSpec::MixedWeights(p) => p.len(),
            ControlSpec::Encoded { prep, .. } => prep.rows(),
        }
    }

    pub fn branch_count(&self) -> usize {
        match self {
            ControlSpec::PureWeights(p) | ControlSpec::MixedWeights(p) => p.len(),
            ControlSpec::Encoded { branches, .. } => branches.len(),
        }
    }

    /// Branch (0-based) selected by each control basis state.
    pub fn branch_of(&self) -> Vec<usize> {
        match self {
            ControlSpec::PureWeights(p) | ControlSpec::MixedWeights(p) => (0..p.len()).collect(),
            ControlSpec::Encoded { prep, branches } => {
                let mut out = vec![0; prep.rows()];
                for (i, set) in branches.iter().enumerate() {
                    for &b in set {
                        out[b] = i;
                    }
                }
                out
            }
        }
    }

    /// Effective branch weights; for encoded controls pᵢ = Σ_{b∈setᵢ} |⟨b|prep|0⟩|².
    pub fn weights(&self) -> Vec<f64> {
        match self {
            ControlSpec::PureWeights(p) | ControlSpec::MixedWeights(p) => p.clone(),
            ControlSpec::Encoded { prep, branches } => branches
                .iter()
                .map(|set| set.iter().map(|&b| prep[(b, 0)].norm_sqr()).sum())
                .collect(),
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, ControlSpec::MixedWeights(_))
    }

    pub fn initial_state(&self) -> StateForm {
        match self {
            ControlSpec::PureWeights(p) => StateForm::Pure(
                ComplexVector::real(&p.iter().map(|w| w.sqrt()).collect::<Vec<_>>())
                    .expect("finite weights"),
            ),
            ControlSpec::MixedWeights(p) => StateForm::Density(ComplexMatrix::from_diag(
                &p.iter().map(|&w| w.into()).collect::<Vec<_>>(),
            )),
            ControlSpec::Encoded { prep, .. } => StateForm::Pure(
                ComplexVector::new((0..prep.rows()).map(|r| prep[(r, 0)]).collect())
                    .expect("finite prep"),
            ),
        }
    }

    /// Control density matrix.
    pub fn density(&self) -> ComplexMatrix {
        match self.initial_state() {
            StateForm::Pure(v) => v.projector(),
            StateForm::Density(m) => m,
        }
    }
}

/// What is read out on the target slots after unforking.
#[derive(Clone, Debug, PartialEq)]
pub enum Measurement {
    /// Hermitian observable on the `q` target slots in copy order.
    Expectation(ComplexMatrix),
    /// One projector per copy; the value is the joint probability.
    Projective(Vec<ComplexMatrix>),
}

/// Complete description of one forking circuit.
#[derive(Clone, Debug)]
pub struct ForkSpec {
    pub d: usize,
    pub q: usize,
    pub slot_radix: usize,
    pub control: ControlSpec,
    /// Single-slot state shared by every copy.
    pub target_state: QuantumState,
    /// `q·(d−1)` single-slot states, copy-major.
    pub ancilla_states: Vec<QuantumState>,
    /// `pipelines[copy][slot]`: channels applied between fork and unfork.
    pub pipelines: Vec<Vec<Vec<Channel>>>,
    /// Channels on the control subsystem, applied after the slot pipelines.
    pub control_pipeline: Vec<Channel>,
    pub measurement: Measurement,
    pub caps: DimensionCaps,
}

impl ForkSpec {
    /// Spec with `|0⟩` ancillas, empty pipelines and default caps.
    pub fn new(
        d: usize,
        q: usize,
        slot_radix: usize,
        control: ControlSpec,
        target_state: QuantumState,
        measurement: Measurement,
    ) -> Result<Self> {
        if d == 0 || q == 0 {
            return Err(QforkError::param(
                "d, q",
                "branch count and power must be at least 1",
            ));
        }
        if slot_radix < 2 {
            return Err(QforkError::param("slot_radix", "must be at least 2"));
        }
        let zero = QuantumState::single_pure(ComplexVector::basis(slot_radix, 0))?;
        let spec = Self {
            d,
            q,
            slot_radix,
            control,
            target_state,
            ancilla_states: vec![zero; q * (d - 1)],
            pipelines: vec![vec![Vec::new(); d]; q],
            control_pipeline: Vec::new(),
            measurement,
            caps: DimensionCaps::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_ancillas(mut self, ancillas: Vec<QuantumState>) -> Result<Self> {
        self.ancilla_states = ancillas;
        self.validate()?;
        Ok(self)
    }

    pub fn with_pipeline(
        mut self,
        copy: usize,
        slot: usize,
        channels: Vec<Channel>,
    ) -> Result<Self> {
        if copy >= self.q || slot >= self.d {
            return Err(QforkError::param(
                "pipeline",
                format!(
                    "no slot {slot} in copy {copy} (d = {}, q = {})",
                    self.d, self.q
                ),
            ));
        }
        self.pipelines[copy][slot] = channels;
        self.validate()?;
        Ok(self)
    }

    /// Same channel list on `slot` of every copy.
    pub fn with_slot_pipeline(mut self, slot: usize, channels: Vec<Channel>) -> Result<Self> {
        for copy in 0..self.q {
            self = self.with_pipeline(copy, slot, channels.clone())?;
        }
        Ok(self)
    }

    pub fn with_control_pipeline(mut self, channels: Vec<Channel>) -> Result<Self> {
        self.control_pipeline = channels;
        self.validate()?;
        Ok(self)
    }

    pub fn with_caps(mut self, caps: DimensionCaps) -> Self {
        self.caps = caps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (d, q, r) = (self.d, self.q, self.slot_radix);
        if d == 0 || q == 0 {
            return Err(QforkError::param(
                "d, q",
                "branch count and power must be at least 1",
            ));
        }
        self.control.validate()?;
        if self.control.branch_count() != d {
            return Err(QforkError::param(
                "control",
                format!("{} branches for d = {d}", self.control.branch_count()),
            ));
        }
        check_slot_state("target_state", &self.target_state, r)?;
        if self.ancilla_states.len() != q * (d - 1) {
            return Err(QforkError::param(
                "ancilla_states",
                format!(
                    "expected {} states, got {}",
                    q * (d - 1),
                    self.ancilla_states.len()
                ),
            ));
        }
        for a in &self.ancilla_states {
            check_slot_state("ancilla_states", a, r)?;
        }
        if self.pipelines.len() != q || self.pipelines.iter().any(|p| p.len() != d) {
            return Err(QforkError::param(
                "pipelines",
                format!("expected {q} copies of {d} slots"),
            ));
        }
        for ch in self.pipelines.iter().flatten().flatten() {
            if ch.dim() != r {
                return Err(QforkError::param(
                    "pipelines",
                    format!(
                        "channel '{}' has dimension {}, slots have {r}",
                        ch.label(),
                        ch.dim()
                    ),
                ));
            }
        }
        let dc = self.control.control_dim();
        if let Some(ch) = self.control_pipeline.iter().find(|c| c.dim() != dc) {
            return Err(QforkError::param(
                "control_pipeline",
                format!(
                    "channel '{}' has dimension {}, control has {dc}",
                    ch.label(),
                    ch.dim()
                ),
            ));
        }
        match &self.measurement {
            Measurement::Expectation(m) => {
                let dim = r.checked_pow(q as u32).unwrap_or(usize::MAX);
                if !m.is_square() || m.rows() != dim {
                    return Err(QforkError::param(
                        "measurement",
                        format!(
                            "observable is {}x{}, targets span {dim}",
                            m.rows(),
                            m.cols()
                        ),
                    ));
                }
                let herr = m.hermiticity_error();
                if herr > tol::STRUCTURAL * m.max_abs().max(1.0) {
                    return Err(QforkError::NotHermitian(herr));
                }
            }
            Measurement::Projective(ps) => {
                if ps.len() != q {
                    return Err(QforkError::param(
                        "measurement",
                        format!("{} projectors for {q} copies", ps.len()),
                    ));
                }
                for p in ps {
                    if !p.is_square() || p.rows() != r {
                        return Err(QforkError::param(
                            "measurement",
                            "projector dimension differs from slot radix",
                        ));
                    }
                    let herr = p.hermiticity_error();
                    if herr > tol::STRUCTURAL {
                        return Err(QforkError::NotHermitian(herr));
                    }
                    let ierr = (p * p).max_abs_diff(p);
                    if ierr > tol::ORACLE {
                        return Err(QforkError::NotIdempotent(ierr));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::forking(self.control.control_dim(), self.d, self.q, self.slot_radix)
    }

    /// Register subsystem holding `slot` of `copy`.
    pub fn subsystem(&self, copy: usize, slot: usize) -> usize {
        1 + copy * self.d + slot
    }

    /// Target subsystems in copy order.
    pub fn target_subsystems(&self) -> Vec<usize> {
        (0..self.q).map(|k| self.subsystem(k, 0)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.control.weights()
    }

    /// State held by `slot` of `copy` before forking.
    pub fn slot_state(&self, copy: usize, slot: usize) -> &QuantumState {
        if slot == 0 {
            &self.target_state
        } else {
            &self.ancilla_states[copy * (self.d - 1) + slot - 1]
        }
    }

    /// True when every component is pure and every channel is unitary.
    pub fn stays_pure(&self) -> bool {
        !self.control.is_mixed()
            && self.target_state.is_pure()
            && self.ancilla_states.iter().all(QuantumState::is_pure)
            && self
                .pipelines
                .iter()
                .flatten()
                .flatten()
                .chain(&self.control_pipeline)
                .all(|c| c.as_unitary().is_some())
    }

    /// Number of c-swaps in the fork and unfork networks together.
    pub fn cswap_count(&self) -> usize {
        2 * self.q * (self.d - 1)
    }
}

fn check_slot_state(name: &str, s: &QuantumState, radix: usize) -> Result<()> {
    if s.dim() != radix {
        return Err(QforkError::param(
            name,
            format!("state of dimension {} in a slot of radix {radix}", s.dim()),
        ));
    }
    Ok(())
}
