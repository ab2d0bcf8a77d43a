//! CPTP maps in Kraus form and the concrete channels used by the protocols.
//!
//! Parameter conventions (Bloch-vector action on a qubit in parentheses):
//!
//! * `dephasing(p)`: ρ → (1−p)ρ + p·diag(ρ), Kraus {√(1−p/2)·I, √(p/2)·σ_z}
//!   (x and y scale by 1−p, z unchanged).
//! * `depolarizing(p)`: ρ → (1−p)ρ + p·I/2 (whole Bloch vector scales by 1−p).
//! * `amplitude_damping(γ)`: K₀ = diag(1, √(1−γ)), K₁ = √γ·|0⟩⟨1|
//!   (x, y scale by √(1−γ); z → γ + (1−γ)z).

use crate::error::{QforkError, Result};
use crate::gates;
use crate::tensor::{cr, ComplexMatrix, C};
use crate::tol;

/// Completely positive trace-preserving map as a list of Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    label: String,
}

impl Channel {
    /// Validates Σ K†K = I within the channel tolerance.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| QforkError::param("kraus", "at least one Kraus operator is required"))?;
        let dim = first.rows();
        if kraus.iter().any(|k| !k.is_square() || k.rows() != dim) {
            return Err(QforkError::DimensionMismatch(
                "Kraus operators must be square with a common dimension".into(),
            ));
        }
        let ch = Self {
            kraus,
            label: "kraus".into(),
        };
        let err = ch.cptp_error();
        if err > tol::CHANNEL {
            return Err(QforkError::NotCptp(err));
        }
        Ok(ch)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].rows()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// max |Σ K†K − I|.
    pub fn cptp_error(&self) -> f64 {
        let dim = self.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for k in &self.kraus {
            acc = &acc + &(&k.dagger() * k);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// The unitary, if this channel is a single-Kraus (unitary) channel.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.kraus.as_slice() {
            [u] => Some(u),
            _ => None,
        }
    }

    /// Σ K ρ K† on an operator of the channel's own dimension.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !rho.is_square() || rho.rows() != self.dim() {
            return Err(QforkError::DimensionMismatch(format!(
                "channel of dimension {} applied to a {}x{} operator",
                self.dim(),
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for k in &self.kraus {
            out = &out + &(&(k * rho) * &k.dagger());
        }
        Ok(out)
    }

    /// Superoperator on vectorized operators: S[(a,b),(a',b')] = Σ K[a,a']·conj(K[b,b']).
    pub fn superoperator(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut s = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.kraus {
            for a in 0..d {
                for b in 0..d {
                    for ap in 0..d {
                        let ka = k[(a, ap)];
                        if ka == C::default() {
                            continue;
                        }
                        for bp in 0..d {
                            s[(a * d + b, ap * d + bp)] += ka * k[(b, bp)].conj();
                        }
                    }
                }
            }
        }
        s
    }

    /// If every Kraus operator is diagonal, the multiplier Σ_K K[j,j]·conj(K[k,k])
    /// for each matrix element (j, k), row-major.
    pub fn diagonal_multipliers(&self) -> Option<Vec<C>> {
        let d = self.dim();
        for k in &self.kraus {
            for r in 0..d {
                for col in 0..d {
                    if r != col && k[(r, col)].norm() > tol::STRUCTURAL {
                        return None;
                    }
                }
            }
        }
        let mut m = vec![C::default(); d * d];
        for k in &self.kraus {
            for j in 0..d {
                for l in 0..d {
                    m[j * d + l] += k[(j, j)] * k[(l, l)].conj();
                }
            }
        }
        Some(m)
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QforkError::param(name, format!("{p} is outside [0, 1]")));
    }
    Ok(())
}

pub fn unitary_channel(u: &ComplexMatrix) -> Result<Channel> {
    let err = u.unitarity_error();
    if err > tol::STRUCTURAL {
        return Err(QforkError::NotUnitary(err));
    }
    Ok(Channel {
        kraus: vec![u.clone()],
        label: "unitary".into(),
    })
}

/// Qubit dephasing with off-diagonal contraction factor 1−p.
pub fn dephasing(p: f64) -> Result<Channel> {
    check_probability("p", p)?;
    Ok(Channel {
        kraus: vec![
            gates::identity(2).scale_real((1.0 - p / 2.0).sqrt()),
            gates::pauli_z().scale_real((p / 2.0).sqrt()),
        ],
        label: format!("dephasing({p})"),
    })
}

/// Qudit dephasing ρ → (1−p)ρ + p·diag(ρ); equals [`dephasing`] for dim 2.
pub fn qudit_dephasing(dim: usize, p: f64) -> Result<Channel> {
    check_probability("p", p)?;
    let z = gates::clock(dim);
    let mut kraus = vec![gates::identity(dim).scale_real((1.0 - p + p / dim as f64).sqrt())];
    let mut zk = gates::identity(dim);
    for _ in 1..dim {
        zk = &zk * &z;
        kraus.push(zk.scale_real((p / dim as f64).sqrt()));
    }
    Ok(Channel {
        kraus,
        label: format!("dephasing{dim}({p})"),
    })
}

pub fn depolarizing(p: f64) -> Result<Channel> {
    check_probability("p", p)?;
    let mut kraus = vec![gates::identity(2).scale_real((1.0 - 0.75 * p).sqrt())];
    kraus.extend(
        gates::paulis()
            .iter()
            .map(|s| s.scale_real((p / 4.0).sqrt())),
    );
    Ok(Channel {
        kraus,
        label: format!("depolarizing({p})"),
    })
}

pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    check_probability("gamma", gamma)?;
    let k0 = ComplexMatrix::from_diag(&[cr(1.0), cr((1.0 - gamma).sqrt())]);
    let k1 = ComplexMatrix::real_square(&[0.0, gamma.sqrt(), 0.0, 0.0]).expect("2x2");
    Ok(Channel {
        kraus: vec![k0, k1],
        label: format!("amplitude_damping({gamma})"),
    })
}

/// Σ pᵢ Uᵢ ρ Uᵢ†.
pub fn mixed_unitary(weights: &[f64], unitaries: &[ComplexMatrix]) -> Result<Channel> {
    validate_weights(weights)?;
    if weights.len() != unitaries.len() {
        return Err(QforkError::DimensionMismatch(format!(
            "{} weights for {} unitaries",
            weights.len(),
            unitaries.len()
        )));
    }
    let mut kraus = Vec::with_capacity(unitaries.len());
    for (&p, u) in weights.iter().zip(unitaries) {
        let err = u.unitarity_error();
        if err > tol::STRUCTURAL {
            return Err(QforkError::NotUnitary(err));
        }
        kraus.push(u.scale_real(p.sqrt()));
    }
    Ok(Channel::new(kraus)?.with_label("mixed_unitary"))
}

/// Channel that applies `first`, then `second`.
pub fn compose(first: &Channel, second: &Channel) -> Result<Channel> {
    if first.dim() != second.dim() {
        return Err(QforkError::DimensionMismatch(format!(
            "composing channels of dimension {} and {}",
            first.dim(),
            second.dim()
        )));
    }
    let kraus = second
        .kraus
        .iter()
        .flat_map(|b| first.kraus.iter().map(move |a| b * a))
        .collect();
    Ok(Channel {
        kraus,
        label: format!("{}∘{}", second.label, first.label),
    })
}

/// Non-negative weights summing to one within 1e-12.
pub fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(QforkError::param("weights", "empty weight list"));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(QforkError::param(
            "weights",
            format!("negative or non-finite weight {w}"),
        ));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > tol::WEIGHTS {
        return Err(QforkError::param(
            "weights",
            format!("weights sum to {s}, not 1"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_density, random_unitary, stream_rng};
    use crate::tensor::{c, ComplexVector};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> ComplexMatrix {
        ComplexVector::real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
            .unwrap()
            .projector()
    }

    fn half_identity() -> ComplexMatrix {
        ComplexMatrix::identity(2).scale_real(0.5)
    }

    #[test]
    fn unitary_channel_cases() {
        let ch = unitary_channel(&gates::identity(2)).unwrap();
        assert_eq!(ch.kraus(), &[gates::identity(2)]);
        let ch = unitary_channel(&gates::hadamard()).unwrap();
        assert_eq!(ch.as_unitary(), Some(&gates::hadamard()));
        let ch = unitary_channel(&gates::ry(0.77)).unwrap();
        assert!(ch.cptp_error() < 1e-12);
        let bad = ComplexMatrix::real_square(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            unitary_channel(&bad).unwrap_err(),
            QforkError::NotUnitary(_)
        ));
    }

    #[test]
    fn dephasing_cases() {
        let mut rng = stream_rng(11, 0);
        let rho = random_density(2, 2, &mut rng);
        assert!(dephasing(0.0)
            .unwrap()
            .apply(&rho)
            .unwrap()
            .approx_eq(&rho, 1e-15));
        let out = dephasing(1.0).unwrap().apply(&plus()).unwrap();
        assert!(out.approx_eq(&half_identity(), 1e-15));
        let out = dephasing(0.3).unwrap().apply(&rho).unwrap();
        assert!((out[(0, 1)] - rho[(0, 1)] * 0.7).norm() < 1e-15);
        assert!((out[(0, 0)] - rho[(0, 0)]).norm() < 1e-15);
        assert!(dephasing(1.5).is_err());
        assert!(dephasing(-0.1).is_err());
    }

    #[test]
    fn qudit_dephasing_reduces_to_qubit_case() {
        let mut rng = stream_rng(12, 0);
        let rho = random_density(2, 2, &mut rng);
        let a = qudit_dephasing(2, 0.35).unwrap().apply(&rho).unwrap();
        let b = dephasing(0.35).unwrap().apply(&rho).unwrap();
        assert!(a.approx_eq(&b, 1e-14));
        let rho3 = random_density(3, 3, &mut rng);
        let out = qudit_dephasing(3, 0.4).unwrap().apply(&rho3).unwrap();
        assert!((out[(0, 2)] - rho3[(0, 2)] * 0.6).norm() < 1e-14);
        assert!((out[(1, 1)] - rho3[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn depolarizing_and_damping_cases() {
        let mut rng = stream_rng(13, 0);
        let rho = random_density(2, 2, &mut rng);
        assert!(depolarizing(0.0)
            .unwrap()
            .apply(&rho)
            .unwrap()
            .approx_eq(&rho, 1e-15));
        let zero = ComplexVector::basis(2, 0).projector();
        let out = depolarizing(0.4).unwrap().apply(&zero).unwrap();
        let z = out.trace_product(&gates::pauli_z()).unwrap().re;
        assert!((z - 0.6).abs() < 1e-15);
        assert!(depolarizing(1.0)
            .unwrap()
            .apply(&rho)
            .unwrap()
            .approx_eq(&half_identity(), 1e-15));
        let one = ComplexVector::basis(2, 1).projector();
        let out = amplitude_damping(1.0).unwrap().apply(&one).unwrap();
        assert!(out.approx_eq(&zero, 1e-15));
        assert!(amplitude_damping(2.0).is_err());
    }

    #[test]
    fn mixed_unitary_cases() {
        let mut rng = stream_rng(14, 0);
        let rho = random_density(2, 2, &mut rng);
        let id = mixed_unitary(&[1.0], &[gates::identity(2)]).unwrap();
        assert!(id.apply(&rho).unwrap().approx_eq(&rho, 1e-15));
        let deph = mixed_unitary(&[0.5, 0.5], &[gates::identity(2), gates::pauli_z()]).unwrap();
        let out = deph.apply(&plus()).unwrap();
        assert!(out.approx_eq(&half_identity(), 1e-15));
        let paulis = [
            gates::identity(2),
            gates::pauli_x(),
            gates::pauli_y(),
            gates::pauli_z(),
        ];
        let full = mixed_unitary(&[0.25; 4], &paulis).unwrap();
        assert!(full.apply(&rho).unwrap().approx_eq(&half_identity(), 1e-15));
        assert!(mixed_unitary(&[0.5, 0.6], &paulis[..2]).is_err());
        assert!(mixed_unitary(&[0.5, 0.5], &paulis[..1]).is_err());
    }

    #[test]
    fn mixed_unitary_matches_term_by_term_sum() {
        let mut rng = stream_rng(15, 0);
        for _ in 0..20 {
            let us: Vec<_> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
            let w = crate::random::random_weights(3, &mut rng);
            let rho = random_density(2, 2, &mut rng);
            let got = mixed_unitary(&w, &us).unwrap().apply(&rho).unwrap();
            let mut expect = ComplexMatrix::zeros(2, 2);
            for (p, u) in w.iter().zip(&us) {
                expect = &expect + &(&(u * &rho) * &u.dagger()).scale_real(*p);
            }
            assert!(got.approx_eq(&expect, 1e-10));
        }
    }

    #[test]
    fn compose_cases() {
        let mut rng = stream_rng(16, 0);
        let ch = random_channel(2, 3, &mut rng);
        let rho = random_density(2, 2, &mut rng);
        let comp = compose(&Channel::identity(2), &ch).unwrap();
        assert!(comp
            .apply(&rho)
            .unwrap()
            .approx_eq(&ch.apply(&rho).unwrap(), 1e-12));

        let (u, v) = (random_unitary(2, &mut rng), random_unitary(2, &mut rng));
        let comp = compose(&unitary_channel(&u).unwrap(), &unitary_channel(&v).unwrap()).unwrap();
        assert!(comp.as_unitary().unwrap().approx_eq(&(&v * &u), 1e-12));

        let both = compose(&dephasing(0.3).unwrap(), &dephasing(0.5).unwrap()).unwrap();
        let out = both.apply(&plus()).unwrap();
        assert!((out[(0, 1)].re - 0.5 * 0.7 * 0.5).abs() < 1e-15);
        assert!(compose(&ch, &Channel::identity(3)).is_err());
    }

    #[test]
    fn constructors_are_cptp() {
        let chans = [
            dephasing(0.2).unwrap(),
            qudit_dephasing(5, 0.9).unwrap(),
            depolarizing(0.7).unwrap(),
            amplitude_damping(0.45).unwrap(),
            mixed_unitary(&[0.3, 0.7], &[gates::hadamard(), gates::phase_s()]).unwrap(),
        ];
        for ch in &chans {
            assert!(ch.cptp_error() <= 1e-9, "{}", ch.label());
        }
        let not_tp = vec![gates::identity(2).scale_real(0.9)];
        assert!(matches!(
            Channel::new(not_tp).unwrap_err(),
            QforkError::NotCptp(_)
        ));
    }

    #[test]
    fn superoperator_matches_kraus_action() {
        let mut rng = stream_rng(17, 0);
        let ch = random_channel(2, 2, &mut rng);
        let rho = random_density(2, 2, &mut rng);
        let s = ch.superoperator();
        let vec_out = s
            .mul_vec(&ComplexVector::new(rho.data().to_vec()).unwrap())
            .unwrap();
        let direct = ch.apply(&rho).unwrap();
        for (a, b) in vec_out.data().iter().zip(direct.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_multipliers_detect_structure() {
        let m = dephasing(0.4).unwrap().diagonal_multipliers().unwrap();
        assert!((m[1] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((m[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(depolarizing(0.4).unwrap().diagonal_multipliers().is_none());
    }
}
