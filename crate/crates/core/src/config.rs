//! JSON fork specifications.
//!
//! ```json
//! {
//!   "d": 2, "q": 1, "slot_radix": 2,
//!   "control": {"type": "pure", "weights": [0.5, 0.5]},
//!   "target_state": {"basis": 0},
//!   "pipelines": [[[{"name": "hadamard"}], []]],
//!   "measurement": {"type": "expectation", "pauli": "Z"}
//! }
//! ```
//!
//! Matrices are arrays of rows; an entry is a real number or an `[re, im]`
//! pair. `ancilla_states`, `pipelines` and `control_pipeline` are optional.

use serde::Deserialize;

use crate::channel::{self, unitary_channel, Channel};
use crate::error::{QforkError, Result};
use crate::fork::{ControlSpec, ForkSpec, Measurement};
use crate::gates;
use crate::state::{DimensionCaps, QuantumState};
use crate::tensor::{c, ComplexMatrix, ComplexVector, C};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> C {
        match *self {
            Entry::Real(re) => c(re, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlJson {
    Pure {
        weights: Vec<f64>,
    },
    Mixed {
        weights: Vec<f64>,
    },
    Encoded {
        prep: MatrixJson,
        branches: Vec<Vec<usize>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateJson {
    Basis(usize),
    Ket(Vec<Entry>),
    Density(MatrixJson),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub name: Option<String>,
    pub param: Option<f64>,
    pub unitary: Option<MatrixJson>,
    pub kraus: Option<Vec<MatrixJson>>,
    pub label: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementJson {
    Expectation {
        pauli: Option<String>,
        observable: Option<MatrixJson>,
    },
    Projective {
        projectors: Vec<MatrixJson>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub d: usize,
    pub q: usize,
    pub slot_radix: usize,
    pub control: ControlJson,
    pub target_state: StateJson,
    #[serde(default)]
    pub ancilla_states: Option<Vec<StateJson>>,
    #[serde(default)]
    pub pipelines: Option<Vec<Vec<Vec<ChannelJson>>>>,
    #[serde(default)]
    pub control_pipeline: Vec<ChannelJson>,
    pub measurement: MeasurementJson,
}

fn in_field(field: &str, e: QforkError) -> QforkError {
    match e {
        QforkError::DimensionCap { .. } => e,
        QforkError::InvalidParameter { name, reason } if name == field => {
            QforkError::InvalidParameter { name, reason }
        }
        other => QforkError::param(field, other.to_string()),
    }
}

pub fn matrix(m: &MatrixJson, field: &str) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(QforkError::param(
            field,
            "matrix rows must be non-empty and of equal length",
        ));
    }
    let data = m.iter().flatten().map(Entry::value).collect();
    ComplexMatrix::new(rows, cols, data).map_err(|e| in_field(field, e))
}

fn state(s: &StateJson, radix: usize, field: &str) -> Result<QuantumState> {
    let built = match s {
        StateJson::Basis(k) => {
            if *k >= radix {
                return Err(QforkError::param(
                    field,
                    format!("basis index {k} out of range for radix {radix}"),
                ));
            }
            QuantumState::single_pure(ComplexVector::basis(radix, *k))
        }
        StateJson::Ket(v) => ComplexVector::new(v.iter().map(Entry::value).collect())
            .and_then(|v| QuantumState::single_pure(v.normalized())),
        StateJson::Density(m) => QuantumState::single_density(matrix(m, field)?),
    };
    built.map_err(|e| in_field(field, e))
}

fn named_channel(name: &str, param: Option<f64>, field: &str) -> Result<Channel> {
    let need =
        || param.ok_or_else(|| QforkError::param(field, format!("channel '{name}' needs a param")));
    let fixed = |m: ComplexMatrix, label: &str| unitary_channel(&m).map(|c| c.with_label(label));
    match name {
        "identity" => Ok(Channel::identity(2)),
        "hadamard" | "h" => fixed(gates::hadamard(), "H"),
        "x" => fixed(gates::pauli_x(), "X"),
        "y" => fixed(gates::pauli_y(), "Y"),
        "z" => fixed(gates::pauli_z(), "Z"),
        "s" => fixed(gates::phase_s(), "S"),
        "sdg" => fixed(gates::phase_s_dag(), "S†"),
        "rx" => need().and_then(|t| fixed(gates::rx(t), &format!("rx({t})"))),
        "ry" => need().and_then(|t| fixed(gates::ry(t), &format!("ry({t})"))),
        "rz" => need().and_then(|t| fixed(gates::rz(t), &format!("rz({t})"))),
        "dephasing" => need().and_then(channel::dephasing),
        "depolarizing" => need().and_then(channel::depolarizing),
        "amplitude_damping" => need().and_then(channel::amplitude_damping),
        other => Err(QforkError::param(
            field,
            format!("unknown channel '{other}'"),
        )),
    }
}

/// Builds a channel from a registry name or raw matrices. `dim` is the
/// dimension it must act on; `identity` adapts to it.
pub fn build_channel(ch: &ChannelJson, dim: usize, field: &str) -> Result<Channel> {
    let built = match (&ch.name, &ch.unitary, &ch.kraus) {
        (Some(name), None, None) if name == "identity" => Ok(Channel::identity(dim)),
        (Some(name), None, None) => named_channel(name, ch.param, field),
        (None, Some(u), None) => unitary_channel(&matrix(u, field)?),
        (None, None, Some(ks)) => ks
            .iter()
            .map(|k| matrix(k, field))
            .collect::<Result<Vec<_>>>()
            .and_then(Channel::new),
        _ => Err(QforkError::param(
            field,
            "give exactly one of name, unitary, kraus",
        )),
    }
    .map_err(|e| in_field(field, e))?;
    Ok(match &ch.label {
        Some(l) => built.with_label(l.clone()),
        None => built,
    })
}

/// Tensor product of Paulis named by a string such as `"ZZ"` or `"XIZ"`.
pub fn pauli_string(s: &str) -> Result<ComplexMatrix> {
    if s.is_empty() {
        return Err(QforkError::param("pauli", "empty Pauli string"));
    }
    let mut m = ComplexMatrix::identity(1);
    for ch in s.chars() {
        let p = match ch.to_ascii_uppercase() {
            'I' => gates::identity(2),
            'X' => gates::pauli_x(),
            'Y' => gates::pauli_y(),
            'Z' => gates::pauli_z(),
            other => {
                return Err(QforkError::param(
                    "pauli",
                    format!("unknown Pauli '{other}'"),
                ))
            }
        };
        m = m.kron(&p)?;
    }
    Ok(m)
}

impl SpecJson {
    pub fn build(&self, caps: DimensionCaps) -> Result<ForkSpec> {
        let r = self.slot_radix;
        let control = match &self.control {
            ControlJson::Pure { weights } => ControlSpec::PureWeights(weights.clone()),
            ControlJson::Mixed { weights } => ControlSpec::MixedWeights(weights.clone()),
            ControlJson::Encoded { prep, branches } => {
                ControlSpec::encoded(matrix(prep, "control.prep")?, branches.clone())
                    .map_err(|e| in_field("control", e))?
            }
        };
        control.validate().map_err(|e| in_field("control", e))?;
        let measurement = match &self.measurement {
            MeasurementJson::Expectation { pauli, observable } => match (pauli, observable) {
                (Some(p), None) => Measurement::Expectation(
                    pauli_string(p).map_err(|e| in_field("measurement.pauli", e))?,
                ),
                (None, Some(m)) => Measurement::Expectation(matrix(m, "measurement.observable")?),
                _ => {
                    return Err(QforkError::param(
                        "measurement",
                        "give exactly one of pauli, observable",
                    ))
                }
            },
            MeasurementJson::Projective { projectors } => Measurement::Projective(
                projectors
                    .iter()
                    .enumerate()
                    .map(|(i, p)| matrix(p, &format!("measurement.projectors[{i}]")))
                    .collect::<Result<_>>()?,
            ),
        };
        let target = state(&self.target_state, r, "target_state")?;
        let mut spec = ForkSpec::new(self.d, self.q, r, control, target, measurement)
            .map_err(|e| in_field("spec", e))?
            .with_caps(caps);
        if let Some(ancillas) = &self.ancilla_states {
            let built = ancillas
                .iter()
                .enumerate()
                .map(|(i, a)| state(a, r, &format!("ancilla_states[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            spec = spec
                .with_ancillas(built)
                .map_err(|e| in_field("ancilla_states", e))?;
        }
        if let Some(pipes) = &self.pipelines {
            if pipes.len() != self.q || pipes.iter().any(|p| p.len() != self.d) {
                return Err(QforkError::param(
                    "pipelines",
                    format!("expected {} copies of {} slot lists", self.q, self.d),
                ));
            }
            for (k, copy) in pipes.iter().enumerate() {
                for (s, list) in copy.iter().enumerate() {
                    let chans = list
                        .iter()
                        .enumerate()
                        .map(|(i, ch)| build_channel(ch, r, &format!("pipelines[{k}][{s}][{i}]")))
                        .collect::<Result<Vec<_>>>()?;
                    spec = spec
                        .with_pipeline(k, s, chans)
                        .map_err(|e| in_field(&format!("pipelines[{k}][{s}]"), e))?;
                }
            }
        }
        let dc = spec.control.control_dim();
        let cp = self
            .control_pipeline
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                let field = format!("control_pipeline[{i}]");
                match ch.name.as_deref() {
                    Some("dephasing") if dc != 2 => ch
                        .param
                        .ok_or_else(|| QforkError::param(&field, "dephasing needs a param"))
                        .and_then(|p| channel::qudit_dephasing(dc, p)),
                    _ => build_channel(ch, dc, &field),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        spec.with_control_pipeline(cp)
            .map_err(|e| in_field("control_pipeline", e))
    }
}

/// Parses and validates a fork specification.
pub fn parse_spec(json: &str, caps: DimensionCaps) -> Result<ForkSpec> {
    let raw: SpecJson =
        serde_json::from_str(json).map_err(|e| QforkError::param("spec", e.to_string()))?;
    raw.build(caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fork::run;

    const LINEAR: &str = r#"{
        "d": 2, "q": 1, "slot_radix": 2,
        "control": {"type": "pure", "weights": [0.5, 0.5]},
        "target_state": {"basis": 0},
        "ancilla_states": [{"ket": [1, [0, 1]]}],
        "pipelines": [[[{"name": "hadamard"}], []]],
        "measurement": {"type": "expectation", "pauli": "Z"}
    }"#;

    #[test]
    fn linear_example_runs() {
        let spec = parse_spec(LINEAR, DimensionCaps::default()).unwrap();
        assert!((run(&spec).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn raw_kraus_and_encoded_control() {
        let json = r#"{
            "d": 2, "q": 1, "slot_radix": 2,
            "control": {"type": "encoded", "prep": [[0.70710678118654752, 0.70710678118654752], [0.70710678118654752, -0.70710678118654752]], "branches": [[0], [1]]},
            "target_state": {"density": [[0.5, 0.5], [0.5, 0.5]]},
            "pipelines": [[[{"kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}], [{"name": "identity"}]]],
            "control_pipeline": [{"name": "dephasing", "param": 0.3}],
            "measurement": {"type": "projective", "projectors": [[[1, 0], [0, 0]]]}
        }"#;
        let spec = parse_spec(json, DimensionCaps::default()).unwrap();
        assert!((run(&spec).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = LINEAR.replace(
            r#"{"name": "hadamard"}"#,
            r#"{"name": "hadamard", "param": 1, "kraus": []}"#,
        );
        let err = parse_spec(&bad, DimensionCaps::default()).unwrap_err();
        assert!(err.to_string().contains("pipelines[0][0][0]"), "{err}");

        let bad = LINEAR.replace("[0.5, 0.5]", "[0.5, 0.6]");
        let err = parse_spec(&bad, DimensionCaps::default()).unwrap_err();
        assert!(err.to_string().contains("weights"), "{err}");

        let bad = LINEAR.replace(r#""q": 1,"#, r#""q": 1, "extra": 3,"#);
        let err = parse_spec(&bad, DimensionCaps::default()).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");

        let bad = LINEAR.replace(r#""pauli": "Z""#, r#""pauli": "ZZ""#);
        assert!(parse_spec(&bad, DimensionCaps::default()).is_err());

        let caps = DimensionCaps {
            max_pure: 4,
            max_density: 4,
        };
        let err = parse_spec(LINEAR, caps)
            .and_then(|s| crate::fork::run_with(&s, crate::fork::Backend::Dense));
        assert!(matches!(err, Err(QforkError::DimensionCap { .. })));
    }

    #[test]
    fn pauli_strings() {
        let zz = pauli_string("zz").unwrap();
        assert_eq!(zz, gates::pauli_z().kron(&gates::pauli_z()).unwrap());
        assert!(pauli_string("Q").is_err());
    }
}
