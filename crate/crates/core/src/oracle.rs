//! Brute-force references, one trajectory at a time.
//!
//! Nothing here touches the forking engine: every value is computed by
//! applying Kraus operators to the bare target state and taking traces.

use crate::channel::{validate_weights, Channel};
use crate::error::{QforkError, Result};
use crate::gates;
use crate::state::clip_probability;
use crate::tensor::ComplexMatrix;

/// Outcome of one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    /// 1-based branch index.
    pub branch: usize,
    pub weight: f64,
    /// Per-copy expectations (per-copy observables) or the single joint one.
    pub expectations: Vec<f64>,
    /// Joint outcome probability in projective mode.
    pub probability: Option<f64>,
    /// The branch's contribution before weighting.
    pub value: f64,
}

/// Readout used by [`oracle_trajectories`].
#[derive(Clone, Copy, Debug)]
pub enum OracleMeasurement<'a> {
    /// Observable on all copies jointly, copies in order.
    Joint(&'a ComplexMatrix),
    /// One observable per copy; the branch value is their product.
    PerCopy(&'a [ComplexMatrix]),
    /// One projector per copy; the branch value is the joint probability.
    Projective(&'a [ComplexMatrix]),
}

fn run_channels(channels: &[Channel], rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    for ch in channels {
        out = ch.apply(&out)?;
    }
    Ok(out)
}

/// Evolves copy `k` of trajectory `i` with `pipelines[k][i]` and reads out.
pub fn oracle_trajectories(
    weights: &[f64],
    pipelines: &[Vec<Vec<Channel>>],
    measurement: OracleMeasurement<'_>,
    rho: &ComplexMatrix,
) -> Result<Vec<TrajectoryResult>> {
    validate_weights(weights)?;
    let q = pipelines.len();
    if q == 0 || pipelines.iter().any(|p| p.len() != weights.len()) {
        return Err(QforkError::DimensionMismatch(format!(
            "pipelines must list {} branches for each copy",
            weights.len()
        )));
    }
    let mut out = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let states = pipelines
            .iter()
            .map(|copy| run_channels(&copy[i], rho))
            .collect::<Result<Vec<_>>>()?;
        let (expectations, probability, value) = match measurement {
            OracleMeasurement::Joint(m) => {
                let mut joint = ComplexMatrix::identity(1);
                for s in &states {
                    joint = joint.kron(s)?;
                }
                let v = (m * &joint).trace().re;
                (vec![v], None, v)
            }
            OracleMeasurement::PerCopy(ms) => {
                if ms.len() != q {
                    return Err(QforkError::DimensionMismatch(format!(
                        "{} observables for {q} copies",
                        ms.len()
                    )));
                }
                let e: Vec<f64> = ms
                    .iter()
                    .zip(&states)
                    .map(|(m, s)| (m * s).trace().re)
                    .collect();
                let v = e.iter().product();
                (e, None, v)
            }
            OracleMeasurement::Projective(ps) => {
                if ps.len() != q {
                    return Err(QforkError::DimensionMismatch(format!(
                        "{} projectors for {q} copies",
                        ps.len()
                    )));
                }
                let e = ps
                    .iter()
                    .zip(&states)
                    .map(|(p, s)| clip_probability((p * s).trace().re))
                    .collect::<Result<Vec<f64>>>()?;
                let v = e.iter().product();
                (e, Some(v), v)
            }
        };
        out.push(TrajectoryResult {
            branch: i + 1,
            weight: w,
            expectations,
            probability,
            value,
        });
    }
    Ok(out)
}

/// Σᵢ pᵢ · valueᵢ.
pub fn weighted_total(trajectories: &[TrajectoryResult]) -> f64 {
    trajectories.iter().map(|t| t.weight * t.value).sum()
}

/// Σᵢ pᵢ tr(M Λᵢ(ρ))^q.
pub fn oracle_power_sum(
    weights: &[f64],
    channels: &[Channel],
    obs: &ComplexMatrix,
    q: usize,
    rho: &ComplexMatrix,
) -> Result<f64> {
    validate_weights(weights)?;
    if channels.len() != weights.len() {
        return Err(QforkError::DimensionMismatch(format!(
            "{} channels for {} weights",
            channels.len(),
            weights.len()
        )));
    }
    let mut total = 0.0;
    for (&p, ch) in weights.iter().zip(channels) {
        let e = (obs * &ch.apply(rho)?).trace().re;
        total += p * e.powi(q as i32);
    }
    Ok(total)
}

/// Σᵢ pᵢ ∏ⱼ tr(Πⱼ Λᵢ(ρ)).
pub fn oracle_projective(
    weights: &[f64],
    channels: &[Channel],
    projectors: &[ComplexMatrix],
    rho: &ComplexMatrix,
) -> Result<f64> {
    validate_weights(weights)?;
    let mut total = 0.0;
    for (&p, ch) in weights.iter().zip(channels) {
        let out = ch.apply(rho)?;
        let mut prod = 1.0;
        for proj in projectors {
            prod *= clip_probability((proj * &out).trace().re)?;
        }
        total += p * prod;
    }
    Ok(total)
}

/// Σᵢ pᵢ tr(A Uᵢ ρ Uᵢ†).
pub fn oracle_mixed_unitary(
    weights: &[f64],
    unitaries: &[ComplexMatrix],
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> Result<f64> {
    validate_weights(weights)?;
    Ok(weights
        .iter()
        .zip(unitaries)
        .map(|(&p, u)| p * (obs * &(&(u * rho) * &u.dagger())).trace().re)
        .sum())
}

/// Σᵢ pᵢ Uᵢ† Λ(Uᵢ ρ Uᵢ†) Uᵢ.
pub fn oracle_twirl(
    twirl_set: &[ComplexMatrix],
    weights: &[f64],
    inner: &Channel,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    validate_weights(weights)?;
    if twirl_set.len() != weights.len() {
        return Err(QforkError::DimensionMismatch(format!(
            "{} unitaries for {} weights",
            twirl_set.len(),
            weights.len()
        )));
    }
    let n = rho.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (&p, u) in weights.iter().zip(twirl_set) {
        let conj = &(u * rho) * &u.dagger();
        let mid = inner.apply(&conj)?;
        let back = &(&u.dagger() * &mid) * u;
        out = &out + &back.scale_real(p);
    }
    Ok(out)
}

fn check_state(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if !rho.is_square() || rho.rows() != dim {
        return Err(QforkError::InvalidState(format!(
            "expected a {dim}x{dim} density matrix"
        )));
    }
    if rho.hermiticity_error() > crate::tol::STRUCTURAL
        || (rho.trace().re - 1.0).abs() > crate::tol::STRUCTURAL
    {
        return Err(QforkError::InvalidState(
            "not a normalized Hermitian matrix".into(),
        ));
    }
    Ok(())
}

/// Teleportation witness W = (I⊗I − X⊗X + Y⊗Y − Z⊗Z)/4.
pub fn witness_operator() -> ComplexMatrix {
    let [x, y, z] = gates::paulis();
    let kk = |a: &ComplexMatrix| a.kron(a).expect("4x4");
    let w = &(&(&ComplexMatrix::identity(4) - &kk(&x)) + &kk(&y)) - &kk(&z);
    w.scale_real(0.25)
}

/// tr(W ρ) for a two-qubit state.
pub fn oracle_witness(rho: &ComplexMatrix) -> Result<f64> {
    check_state(rho, 4)?;
    Ok((&witness_operator() * rho).trace().re)
}

/// Σ over the three Paulis of ⟨σ⟩² for a single-qubit state.
pub fn oracle_purity(rho: &ComplexMatrix) -> Result<f64> {
    check_state(rho, 2)?;
    Ok(gates::paulis()
        .iter()
        .map(|s| (s * rho).trace().re.powi(2))
        .sum())
}
