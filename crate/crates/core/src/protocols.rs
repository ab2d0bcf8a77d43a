//! Ready-made forking circuits for the standard applications.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::channel::{unitary_channel, validate_weights, Channel};
use crate::error::{QforkError, Result};
use crate::fork::{run, ControlSpec, ForkSpec, Measurement};
use crate::gates;
use crate::state::QuantumState;
use crate::tensor::{ComplexMatrix, ComplexVector};
use crate::tol;

fn power_observable(obs: &ComplexMatrix, q: usize) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::identity(1);
    for _ in 0..q {
        m = m.kron(obs)?;
    }
    Ok(m)
}

fn slot_state(rho: &ComplexMatrix) -> Result<QuantumState> {
    QuantumState::single_density(rho.clone())
}

/// Spec whose branch `i` runs `channels[i]` on slot `i` of every copy and
/// measures `obs^{⊗q}`.
pub fn power_sum_spec(
    q: usize,
    weights: &[f64],
    channels: &[Channel],
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<ForkSpec> {
    validate_weights(weights)?;
    let d = weights.len();
    if channels.len() != d {
        return Err(QforkError::DimensionMismatch(format!(
            "{} channels for {d} weights",
            channels.len()
        )));
    }
    let mut spec = ForkSpec::new(
        d,
        q,
        rho.rows(),
        ControlSpec::PureWeights(weights.to_vec()),
        slot_state(rho)?,
        Measurement::Expectation(power_observable(obs, q)?),
    )?;
    for (slot, ch) in channels.iter().enumerate() {
        spec = spec.with_slot_pipeline(slot, vec![ch.clone()])?;
    }
    Ok(spec)
}

/// Σᵢ pᵢ tr(M Λᵢ(ρ))^q evaluated by a single forking circuit.
pub fn weighted_power_sum(
    q: usize,
    weights: &[f64],
    channels: &[Channel],
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<f64> {
    Ok(run(&power_sum_spec(q, weights, channels, obs, rho)?)?.value)
}

/// tr(A Φ(ρ)) for the mixed unitary channel Φ = Σ pᵢ Uᵢ·Uᵢ†.
pub fn mixed_unitary_qfs(
    weights: &[f64],
    unitaries: &[ComplexMatrix],
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<f64> {
    let channels = unitaries
        .iter()
        .map(unitary_channel)
        .collect::<Result<Vec<_>>>()?;
    weighted_power_sum(1, weights, &channels, obs, rho)
}

/// Spec for the twirl of `inner` over `twirl_set`: branch `i` runs
/// Uᵢ, then `inner`, then Uᵢ†.
pub fn twirl_spec(
    twirl_set: &[ComplexMatrix],
    weights: &[f64],
    inner: &Channel,
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<ForkSpec> {
    validate_weights(weights)?;
    let d = weights.len();
    if twirl_set.len() != d {
        return Err(QforkError::DimensionMismatch(format!(
            "{} unitaries for {d} weights",
            twirl_set.len()
        )));
    }
    let mut spec = ForkSpec::new(
        d,
        1,
        rho.rows(),
        ControlSpec::PureWeights(weights.to_vec()),
        slot_state(rho)?,
        Measurement::Expectation(obs.clone()),
    )?;
    for (slot, u) in twirl_set.iter().enumerate() {
        let pipeline = vec![
            unitary_channel(u)?.with_label(format!("U{}", slot + 1)),
            inner.clone(),
            unitary_channel(&u.dagger())?.with_label(format!("U{}†", slot + 1)),
        ];
        spec = spec.with_pipeline(0, slot, pipeline)?;
    }
    Ok(spec)
}

pub fn twirl_qfs(
    twirl_set: &[ComplexMatrix],
    weights: &[f64],
    inner: &Channel,
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<f64> {
    Ok(run(&twirl_spec(twirl_set, weights, inner, obs, rho)?)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    /// ⟨σ_z⊗σ_z⟩ read out on the target after unforking.
    pub qfs_measured: f64,
    /// ⟨W⟩ = (1 − 3·qfs_measured)/4.
    pub witness_value: f64,
    pub entangled_flag: bool,
}

impl WitnessReport {
    pub fn from_measured(qfs_measured: f64) -> Self {
        let witness_value = (1.0 - 3.0 * qfs_measured) / 4.0;
        Self {
            qfs_measured,
            witness_value,
            entangled_flag: witness_value < -crate::tol::STRUCTURAL,
        }
    }
}

/// Basis changes per branch so that σ_z⊗σ_z reads X⊗X, −Y⊗Y and Z⊗Z.
///
/// (HS†)† Z (HS†) = S X S† = Y and (HS)† Z (HS) = S† X S = −Y, so the
/// asymmetric pair in branch 2 yields −Y⊗Y.
pub fn witness_basis_changes() -> [ComplexMatrix; 3] {
    let h = gates::hadamard();
    let hsd = &h * &gates::phase_s_dag();
    let hs = &h * &gates::phase_s();
    [
        h.kron(&h).expect("4x4"),
        hsd.kron(&hs).expect("4x4"),
        ComplexMatrix::identity(4),
    ]
}

pub fn witness_spec(rho: &ComplexMatrix) -> Result<ForkSpec> {
    if !rho.is_square() || rho.rows() != 4 {
        return Err(QforkError::InvalidState(
            "witness needs a two-qubit state".into(),
        ));
    }
    let zz = gates::pauli_z().kron(&gates::pauli_z())?;
    let mut spec = ForkSpec::new(
        3,
        1,
        4,
        ControlSpec::PureWeights(vec![1.0 / 3.0; 3]),
        slot_state(rho)?,
        Measurement::Expectation(zz),
    )?;
    let labels = ["H⊗H", "HS†⊗HS"];
    for (slot, (u, label)) in witness_basis_changes().iter().zip(labels).enumerate() {
        spec = spec.with_pipeline(0, slot, vec![unitary_channel(u)?.with_label(label)])?;
    }
    Ok(spec)
}

pub fn teleportation_witness_qfs(rho: &ComplexMatrix) -> Result<WitnessReport> {
    let spec = witness_spec(rho)?;
    Ok(WitnessReport::from_measured(run(&spec)?.value))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PurityMode {
    #[default]
    Qutrit,
    /// Two-qubit control H⊗R_y(2·arccos√(2/3)) with branch sets
    /// {|00⟩}, {|10⟩}, {|01⟩, |11⟩}.
    TwoQubitEncoded,
}

impl FromStr for PurityMode {
    type Err = QforkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qutrit" => Ok(Self::Qutrit),
            "two-qubit" | "encoded" => Ok(Self::TwoQubitEncoded),
            other => Err(QforkError::param(
                "mode",
                format!("unknown control mode '{other}'"),
            )),
        }
    }
}

impl fmt::Display for PurityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qutrit => "qutrit",
            Self::TwoQubitEncoded => "two-qubit",
        })
    }
}

pub fn two_qubit_encoded_control() -> ControlSpec {
    let theta = 2.0 * (2.0f64 / 3.0).sqrt().acos();
    let prep = gates::hadamard().kron(&gates::ry(theta)).expect("4x4");
    ControlSpec::encoded(prep, vec![vec![0], vec![2], vec![1, 3]]).expect("valid encoding")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityReport {
    pub qfs_measured: f64,
    /// Σ over the three Paulis of ⟨σ⟩² = 3·qfs_measured.
    pub purity_sum: f64,
    /// tr(Λ(ρ)²), computed directly.
    pub trace_purity: f64,
}

pub fn purity_spec(inner: &Channel, rho: &ComplexMatrix, mode: PurityMode) -> Result<ForkSpec> {
    if inner.dim() != 2 || rho.rows() != 2 {
        return Err(QforkError::param(
            "inner",
            "purity benchmarking acts on a single qubit",
        ));
    }
    let control = match mode {
        PurityMode::Qutrit => ControlSpec::PureWeights(vec![1.0 / 3.0; 3]),
        PurityMode::TwoQubitEncoded => two_qubit_encoded_control(),
    };
    let zz = gates::pauli_z().kron(&gates::pauli_z())?;
    let mut spec = ForkSpec::new(
        3,
        2,
        2,
        control,
        slot_state(rho)?,
        Measurement::Expectation(zz),
    )?;
    let h = gates::hadamard();
    let changes = [
        unitary_channel(&h)?.with_label("H"),
        unitary_channel(&(&h * &gates::phase_s_dag()))?.with_label("HS†"),
        Channel::identity(2),
    ];
    for (slot, change) in changes.into_iter().enumerate() {
        spec = spec.with_slot_pipeline(slot, vec![inner.clone(), change])?;
    }
    Ok(spec)
}

pub fn purity_qfs(inner: &Channel, rho: &ComplexMatrix, mode: PurityMode) -> Result<PurityReport> {
    let spec = purity_spec(inner, rho, mode)?;
    let qfs_measured = run(&spec)?.value;
    let out = inner.apply(rho)?;
    Ok(PurityReport {
        qfs_measured,
        purity_sum: 3.0 * qfs_measured,
        trace_purity: (&out * &out).trace().re,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn rotation(self, theta: f64) -> ComplexMatrix {
        match self {
            Axis::X => gates::rx(theta),
            Axis::Y => gates::ry(theta),
            Axis::Z => gates::rz(theta),
        }
    }
}

impl FromStr for Axis {
    type Err = QforkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(QforkError::param("axis", format!("unknown axis '{other}'"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Two branches on ψ = R_axis(θ)|0⟩; the second sees H before unforking, so
/// ⟨σ_z⟩ on the target is ½(⟨σ_z⟩ + ⟨σ_x⟩).
pub fn axis_spec(axis: Axis, theta: f64) -> Result<ForkSpec> {
    let psi = axis.rotation(theta).mul_vec(&ComplexVector::basis(2, 0))?;
    ForkSpec::new(
        2,
        1,
        2,
        ControlSpec::PureWeights(vec![0.5, 0.5]),
        QuantumState::single_pure(psi.normalized())?,
        Measurement::Expectation(gates::pauli_z()),
    )?
    .with_pipeline(
        0,
        1,
        vec![unitary_channel(&gates::hadamard())?.with_label("H")],
    )
}

pub fn axis_discrimination(axis: Axis, theta: f64) -> Result<f64> {
    Ok(run(&axis_spec(axis, theta)?)?.value)
}

/// Closed form of [`axis_discrimination`].
pub fn theory_value(axis: Axis, theta: f64) -> f64 {
    match axis {
        Axis::X => theta.cos() / 2.0,
        Axis::Y => (theta.cos() + theta.sin()) / 2.0,
        Axis::Z => 0.5,
    }
}

pub fn theory_curve(axis: Axis, thetas: &[f64]) -> Vec<f64> {
    thetas.iter().map(|&t| theory_value(axis, t)).collect()
}

/// `steps` evenly spaced angles from 0 to 2π inclusive.
pub fn theta_grid(steps: usize) -> Vec<f64> {
    let n = steps.max(2) - 1;
    (0..=n)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / n as f64)
        .collect()
}

/// Checks the witness basis changes against direct conjugation.
pub fn witness_basis_error() -> f64 {
    let zz = gates::pauli_z().kron(&gates::pauli_z()).expect("4x4");
    let [x, y, z] = gates::paulis();
    let targets = [
        x.kron(&x).expect("4x4"),
        y.kron(&y).expect("4x4").scale_real(-1.0),
        z.kron(&z).expect("4x4"),
    ];
    witness_basis_changes()
        .iter()
        .zip(&targets)
        .map(|(u, t)| (&(&u.dagger() * &zz) * u).max_abs_diff(t))
        .fold(0.0, f64::max)
}

/// Whether a witness value certifies entanglement beyond numerical noise.
pub fn certifies_entanglement(report: &WitnessReport) -> bool {
    report.witness_value < -tol::ORACLE
}
