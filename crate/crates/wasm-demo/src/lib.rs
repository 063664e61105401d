//! Browser bindings: κ splitting at a geometry, the threefold-limit sweep for
//! U(1), and the recovery-hypothesis check for a model given as JSON.
//! Results come back as JSON strings; the page in `www/` renders them.

use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;
use ymhlab::algebra::{CVec, GroupSpec, ModelSpec, RepSpec, Representation};
use ymhlab::geometry::{box_symbol_inv_closed, kappa_closed, DEFAULT_EPS0};
use ymhlab::interaction::threefold_sweep;
use ymhlab::recovery::check_faithful_recovery_precondition;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// κ₁..κ₃ and σ[□]⁻¹(η_(1k)), k = 2, 3, at (r, s).
#[wasm_bindgen]
pub fn kappa(r: f64, s: f64) -> Result<String, JsError> {
    let k = kappa_closed(r, s).map_err(js)?;
    let inv = |k| box_symbol_inv_closed(r, s, k).ok();
    Ok(json!({ "r": r, "s": s, "kappa": k, "inverse_symbol": { "eta12": inv(2), "eta13": inv(3) } }).to_string())
}

/// Υ̂_(123)(s) against its s → 0 limit for charge-1 U(1) sources.
#[wasm_bindgen]
pub fn threefold(b2: f64, b3: f64, re: f64, im: f64, s_list: Vec<f64>) -> Result<String, JsError> {
    let rep = Representation::new(&GroupSpec::u1(), RepSpec::Charge { n: 1 }).map_err(js)?;
    let ups = CVec::from_vec(vec![Complex64::new(re, im)]);
    let sweep = threefold_sweep(&rep, 0.0, &s_list, DEFAULT_EPS0, &[b2], &[b3], &ups).map_err(js)?;
    serde_json::to_string(&sweep).map_err(js)
}

/// The recovery hypotheses for `{"factors": [...], "rep": {...}}`.
#[wasm_bindgen]
pub fn classify(model_json: &str) -> Result<String, JsError> {
    let model: ModelSpec = serde_json::from_str(model_json).map_err(js)?;
    let report = check_faithful_recovery_precondition(&model).map_err(js)?;
    serde_json::to_string(&report).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn spot_kappa() {
        let v: Value = serde_json::from_str(&kappa(0.0, 0.6).unwrap()).unwrap();
        let k: Vec<f64> = serde_json::from_value(v["kappa"].clone()).unwrap();
        for (got, want) in k.iter().zip([-9.0, 5.0, 5.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((v["inverse_symbol"]["eta12"].as_f64().unwrap() - 1.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_limit() {
        let v: Value = serde_json::from_str(&threefold(2.0, -1.5, 1.0, 2.0, vec![0.1, 0.05]).unwrap()).unwrap();
        assert!((v["limit_norm"].as_f64().unwrap() - 6.0 * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classify_electroweak() {
        let v: Value = serde_json::from_str(&classify(r#"{"factors":["SU2","U1"],"rep":{"kind":"electroweak","nY":0}}"#).unwrap()).unwrap();
        assert_eq!(v["holds"], false);
        assert_eq!(v["fully_charged"], true);
    }
}
