//! wasm-bindgen entry points for the static demo page. Every function takes and
//! returns plain strings so the page only deals with JSON.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use viikit::cfpoly;
use viikit::fixtures::{self, FixtureKind};
use viikit::germ::{self, Germ};
use viikit::surface::{self, CurveConfiguration};
use viikit::Rational;

fn to_json(v: Result<Value, serde_json::Error>) -> Result<String, String> {
    v.and_then(|v| serde_json::to_string_pretty(&v)).map_err(|e| e.to_string())
}

fn input(src: &str) -> Result<Value, String> {
    serde_json::from_str(src).map_err(|e| format!("invalid JSON: {e}"))
}

/// Bundled configurations and germs, as `[{name, kind, payload}]`.
#[wasm_bindgen]
pub fn examples() -> String {
    let list: Vec<Value> = fixtures::bundled()
        .into_iter()
        .filter(|f| matches!(f.kind, FixtureKind::Configuration | FixtureKind::Germ))
        .map(|f| json!({"name": f.name, "kind": f.kind, "payload": f.payload}))
        .collect();
    Value::Array(list).to_string()
}

/// Full analysis report for a configuration, bare or wrapped in a fixture.
#[wasm_bindgen]
pub fn analyze_configuration(src: &str) -> Result<String, String> {
    let config: CurveConfiguration = fixtures::payload_from_value(&input(src)?).map_err(|e| e.to_string())?;
    let report = surface::analyze(&config).map_err(|e| e.to_string())?;
    to_json(serde_json::to_value(&report))
}

/// `P`, `Q` and `Δ` at a comma or space separated list of rationals.
#[wasm_bindgen]
pub fn evaluate_continuant(values: &str) -> Result<String, String> {
    let x = values
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Rational>().map_err(|_| format!("not a rational: {t}")))
        .collect::<Result<Vec<_>, _>>()?;
    let q = cfpoly::eval_q(&x).ok();
    let delta = cfpoly::eval_delta(&x).ok();
    Ok(json!({
        "x": x.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "p": cfpoly::eval_p(&x).to_string(),
        "q": q.map(|v| v.to_string()),
        "delta": delta.map(|v| v.to_string()),
    })
    .to_string())
}

/// Reduction report for a germ; `q = 0` reduces by the germ's own index.
#[wasm_bindgen]
pub fn reduce_germ(src: &str, q: u32) -> Result<String, String> {
    let g: Germ = fixtures::payload_from_value(&input(src)?).map_err(|e| e.to_string())?;
    g.validate().map_err(|e| e.to_string())?;
    let q = if q == 0 { g.index_m() } else { q };
    let report = germ::reduction_report(&g, q).map_err(|e| e.to_string())?;
    to_json(serde_json::to_value(&report).map(|mut out| {
        out["index_m"] = json!(g.index_m());
        out["p"] = json!(g.p_string());
        out
    }))
}
