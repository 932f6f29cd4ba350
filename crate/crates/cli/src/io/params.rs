//! Model parameters as JSON.
//!
//! ```json
//! {"model_kind": "resdgcnrl", "phi": {"travel_time": -0.86}, "frozen": [],
//!  "mu": 1.0, "M": 1, "theta": [[[0.0, ...], ...]],
//!  "alpha": 1.0, "beta": 1.0, "gamma": 1.0, "nrl_gamma": {}}
//! ```
//!
//! Numbers are written as shortest round-trip decimals, so a save/load cycle
//! reproduces every bit.

use std::path::Path;

use reclogit_core::{DenseMatrix, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    model_kind: String,
    phi: Map<String, Value>,
    #[serde(default)]
    frozen: Vec<String>,
    #[serde(default = "one")]
    mu: f64,
    #[serde(rename = "M", default)]
    m: usize,
    #[serde(default)]
    theta: Vec<Vec<Vec<f64>>>,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    gamma: f64,
    #[serde(default)]
    nrl_gamma: Map<String, Value>,
}

fn one() -> f64 {
    1.0
}

fn number(what: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Input(format!("parameter '{what}' must be a finite number, got {v}")))
}

fn finite(what: &str, x: f64) -> Result<Value> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| CliError::Numeric(format!("parameter '{what}' is {x} and cannot be saved")))
}

pub fn params_to_json(p: &ModelParams) -> Result<Value> {
    let mut phi = Map::new();
    for (n, &x) in p.phi_names.iter().zip(&p.phi) {
        phi.insert(n.clone(), finite(n, x)?);
    }
    let mut nrl = Map::new();
    for (n, &x) in p.nrl_names.iter().zip(&p.nrl_gamma) {
        nrl.insert(n.clone(), finite(n, x)?);
    }
    if let Some(bad) = p.theta.iter().flat_map(|t| t.as_slice()).find(|x| !x.is_finite()) {
        return Err(CliError::Numeric(format!("residual weight is {bad} and cannot be saved")));
    }
    let doc = ParamsDoc {
        model_kind: p.kind.name().to_string(),
        phi,
        frozen: p.phi_names.iter().zip(&p.frozen).filter(|(_, &f)| f).map(|(n, _)| n.clone()).collect(),
        mu: p.mu,
        m: p.theta.len(),
        theta: p.theta.iter().map(DenseMatrix::to_rows).collect(),
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        nrl_gamma: nrl,
    };
    serde_json::to_value(doc).map_err(|e| CliError::Numeric(format!("cannot encode parameters: {e}")))
}

pub fn params_from_json(value: Value) -> Result<ModelParams> {
    let doc: ParamsDoc =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("parameter file: {e}")))?;
    let kind = ModelKind::parse(&doc.model_kind)
        .ok_or_else(|| CliError::Input(format!("unknown model_kind '{}'", doc.model_kind)))?;
    let mut phi = Vec::new();
    for (n, v) in &doc.phi {
        phi.push((n.as_str(), number(n, v)?));
    }
    let mut p = ModelParams::new(kind, &phi);
    for name in &doc.frozen {
        if !doc.phi.contains_key(name) {
            return Err(CliError::Input(format!("frozen coefficient '{name}' is not in phi")));
        }
        p = p.freeze(name);
    }
    let mut nrl = Vec::new();
    for (n, v) in &doc.nrl_gamma {
        nrl.push((n.as_str(), number(n, v)?));
    }
    p = p.with_nrl(&nrl);
    if doc.theta.len() != doc.m {
        return Err(CliError::Input(format!("M = {} but {} weight matrices are given", doc.m, doc.theta.len())));
    }
    for (m, rows) in doc.theta.iter().enumerate() {
        let t = DenseMatrix::from_rows(rows).map_err(|e| CliError::Input(format!("theta[{m}]: {e}")))?;
        if !t.is_square() {
            return Err(CliError::Input(format!("theta[{m}] is {}x{}, not square", t.rows(), t.cols())));
        }
        if t.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(CliError::Input(format!("theta[{m}] has a non-finite entry")));
        }
        p.theta.push(t);
    }
    for (name, x) in [("mu", doc.mu), ("alpha", doc.alpha), ("beta", doc.beta), ("gamma", doc.gamma)] {
        if !x.is_finite() {
            return Err(CliError::Input(format!("parameter '{name}' must be finite")));
        }
    }
    p.mu = doc.mu;
    p.alpha = doc.alpha;
    p.beta = doc.beta;
    p.gamma = doc.gamma;
    Ok(p)
}

pub fn save_params(path: &Path, p: &ModelParams) -> Result<()> {
    let text = serde_json::to_string_pretty(&params_to_json(p)?).expect("a JSON value always serialises");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))?;
    params_from_json(value).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Puts the coefficients in the order of `names` (the feature order of a
/// run); every name must be present exactly once.
pub fn align_phi(p: &ModelParams, names: &[&str]) -> Result<ModelParams> {
    if p.phi_names.len() != names.len() {
        return Err(CliError::Input(format!(
            "parameters have {} coefficients ({}), the configuration defines {} features ({})",
            p.phi_names.len(),
            p.phi_names.join(", "),
            names.len(),
            names.join(", ")
        )));
    }
    let mut out = p.clone();
    for (i, name) in names.iter().enumerate() {
        let j = p
            .phi_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::Input(format!("parameters have no coefficient for feature '{name}'")))?;
        out.phi_names[i] = p.phi_names[j].clone();
        out.phi[i] = p.phi[j];
        out.frozen[i] = p.frozen[j];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitwise_round_trip() {
        let mut p = ModelParams::new(ModelKind::ResDgcnRl, &[("tt", -0.1 - 1e-17), ("uturn", -20.0)])
            .freeze("uturn")
            .with_zero_layers(2, 3);
        p.theta[1][(0, 2)] = std::f64::consts::PI * 1e-300;
        p.theta[0][(1, 1)] = -1.0 / 3.0;
        p.alpha = 0.994_000_000_000_1;
        let back = params_from_json(params_to_json(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn m_must_match_theta() {
        let v = serde_json::json!({"model_kind": "resrl", "phi": {"tt": -1.0}, "M": 2, "theta": [[[0.0]]]});
        assert!(params_from_json(v).is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        let v = serde_json::json!({"model_kind": "rl", "phi": {"tt": -1.0}, "beta_t": 1});
        assert!(params_from_json(v).is_err());
    }
}
