//! Browser bindings for the qfork demo page. Every export returns a JSON
//! string; failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qfork::channel::{self, Channel};
use qfork::format::round12;
use qfork::oracle;
use qfork::protocols::{self, Axis, PurityMode};
use qfork::tensor::{ComplexMatrix, ComplexVector};
use qfork::Result;

fn to_json(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn grid(steps: usize, max: f64) -> Vec<f64> {
    let n = steps.max(2);
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

pub fn axis_curve_value(axis: &str, steps: usize) -> Result<Value> {
    let axis: Axis = axis.parse()?;
    let thetas = protocols::theta_grid(steps.max(2));
    let exact = thetas
        .iter()
        .map(|&t| protocols::axis_discrimination(axis, t).map(round12))
        .collect::<Result<Vec<_>>>()?;
    let theory: Vec<_> = protocols::theory_curve(axis, &thetas)
        .into_iter()
        .map(round12)
        .collect();
    Ok(json!({
        "axis": axis.to_string(),
        "theta": thetas.into_iter().map(round12).collect::<Vec<_>>(),
        "exact": exact,
        "theory": theory,
    }))
}

/// v|Φ⁺⟩⟨Φ⁺| + (1 − v) I/4.
pub fn werner_state(visibility: f64) -> Result<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = ComplexVector::real(&[s, 0.0, 0.0, s])?.projector();
    Ok(&bell.scale_real(visibility)
        + &ComplexMatrix::identity(4).scale_real((1.0 - visibility) / 4.0))
}

pub fn witness_curve_value(steps: usize) -> Result<Value> {
    let vis = grid(steps, 1.0);
    let mut witness = Vec::with_capacity(vis.len());
    let mut direct = Vec::with_capacity(vis.len());
    let mut flagged = Vec::with_capacity(vis.len());
    for &v in &vis {
        let rho = werner_state(v)?;
        let report = protocols::teleportation_witness_qfs(&rho)?;
        witness.push(round12(report.witness_value));
        direct.push(round12(oracle::oracle_witness(&rho)?));
        flagged.push(report.entangled_flag);
    }
    Ok(json!({
        "visibility": vis.into_iter().map(round12).collect::<Vec<_>>(),
        "witness": witness,
        "oracle": direct,
        "entangled": flagged,
    }))
}

fn noise_channel(name: &str, p: f64) -> Result<Channel> {
    match name {
        "dephasing" => channel::dephasing(p),
        "amplitude_damping" => channel::amplitude_damping(p),
        _ => channel::depolarizing(p),
    }
}

pub fn purity_curve_value(channel: &str, mode: &str, steps: usize) -> Result<Value> {
    let mode: PurityMode = mode.parse()?;
    let noise = grid(steps, 1.0);
    let zero = ComplexVector::basis(2, 0).projector();
    let mut purity = Vec::with_capacity(noise.len());
    let mut trace = Vec::with_capacity(noise.len());
    for &p in &noise {
        let report = protocols::purity_qfs(&noise_channel(channel, p)?, &zero, mode)?;
        purity.push(round12(report.purity_sum));
        trace.push(round12(report.trace_purity));
    }
    Ok(json!({
        "channel": channel,
        "mode": mode.to_string(),
        "noise": noise.into_iter().map(round12).collect::<Vec<_>>(),
        "purity_sum": purity,
        "trace_purity": trace,
    }))
}

/// Exact and theoretical axis-discrimination curves over [0, 2π].
#[wasm_bindgen]
pub fn axis_curve(axis: &str, steps: usize) -> String {
    to_json(axis_curve_value(axis, steps))
}

/// Teleportation witness of Werner states against visibility.
#[wasm_bindgen]
pub fn witness_curve(steps: usize) -> String {
    to_json(witness_curve_value(steps))
}

/// Purity of a noisy |0⟩ as the noise strength goes from 0 to 1.
#[wasm_bindgen]
pub fn purity_curve(channel: &str, mode: &str, steps: usize) -> String {
    to_json(purity_curve_value(channel, mode, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn axis_curve_matches_theory() {
        let v = parse(axis_curve("y", 17));
        let exact = v["exact"].as_array().unwrap();
        assert_eq!(exact.len(), 17);
        assert_eq!(v["exact"], v["theory"]);
    }

    #[test]
    fn werner_threshold_at_one_third() {
        let v = parse(witness_curve(7));
        let vis: Vec<f64> = serde_json::from_value(v["visibility"].clone()).unwrap();
        let w: Vec<f64> = serde_json::from_value(v["witness"].clone()).unwrap();
        for (x, y) in vis.iter().zip(&w) {
            assert!((y - (0.25 - 0.75 * x)).abs() < 1e-9, "{x} {y}");
        }
        assert_eq!(v["witness"], v["oracle"]);
        let flags: Vec<bool> = serde_json::from_value(v["entangled"].clone()).unwrap();
        assert_eq!(flags, vec![false, false, false, true, true, true, true]);
    }

    #[test]
    fn depolarizing_purity_curve() {
        let v = parse(purity_curve("depolarizing", "qutrit", 6));
        let p: Vec<f64> = serde_json::from_value(v["purity_sum"].clone()).unwrap();
        for (i, x) in p.iter().enumerate() {
            let s = 1.0 - i as f64 / 5.0;
            assert!((x - s * s).abs() < 1e-9);
        }
        let encoded = parse(purity_curve("depolarizing", "two-qubit", 6));
        assert_eq!(v["purity_sum"], encoded["purity_sum"]);
    }

    #[test]
    fn errors_are_reported_as_json() {
        let v = parse(axis_curve("w", 5));
        assert!(v["error"].as_str().unwrap().contains("axis"));
        let v = parse(purity_curve("depolarizing", "nope", 5));
        assert!(v.get("error").is_some());
    }
}
