//! Fixture files: a payload of one kind plus expected report values addressed
//! by JSON pointers.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::germ::{self, Germ, GermError};
use crate::series::{self, FactorizationFixture, SeriesError};
use crate::surface::{self, CurveConfiguration, SurfaceError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot parse fixture: {0}")]
    Parse(String),
    #[error("unknown fixture {0:?}")]
    UnknownReference(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Configuration,
    Germ,
    Factorization,
    Pairing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub field: String,
    pub value: Value,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureParams {
    /// Germ fixtures: reduce by this `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduce_q: Option<u32>,
    /// Germ fixtures: `[α₁]` or `[α₁, α₂]` for the sequence check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Vec<u32>>,
    /// Factorization fixtures: truncation degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Configuration fixtures: rediscover the payload by search.
    #[serde(default)]
    pub search: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    pub payload: Value,
    #[serde(default)]
    pub params: FixtureParams,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub field: String,
    pub expected: Value,
    pub actual: Option<Value>,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub kind: FixtureKind,
    pub report: Value,
    pub expectations: Vec<ExpectationResult>,
    pub passed: bool,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../../fixtures/", $name, ".json")))),*]
    };
}

/// Fixture sources shipped with the library.
pub const BUNDLED: &[(&str, &str)] = bundled!(
    "ex_4223",
    "app_ex1",
    "app_ex1_reduced",
    "app_ex2",
    "app_ex2_reduced",
    "app_ex1_germ",
    "app_ex2_germ",
    "pair_app_ex1",
    "pair_app_ex2",
    "pair_cross",
    "app_ex1_factorization",
    "app_ex2_factorization",
    "synthetic_pass",
    "synthetic_perturbed",
);

pub fn parse_fixture(src: &str) -> Result<Fixture, FixtureError> {
    serde_json::from_str(src).map_err(|e| FixtureError::Parse(e.to_string()))
}

pub fn bundled() -> Vec<Fixture> {
    BUNDLED
        .iter()
        .map(|(name, src)| parse_fixture(src).unwrap_or_else(|e| panic!("bundled fixture {name}: {e}")))
        .collect()
}

pub fn find_bundled(name: &str) -> Option<Fixture> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .and_then(|(_, src)| parse_fixture(src).ok())
}

fn payload<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, FixtureError> {
    serde_json::from_value(v.clone()).map_err(|e| FixtureError::Parse(e.to_string()))
}

/// Reads a payload from either a bare object or a fixture wrapper.
pub fn payload_from_value<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, FixtureError> {
    if v.get("kind").is_some() && v.get("payload").is_some() {
        payload(&v["payload"])
    } else {
        payload(v)
    }
}

/// Expectations attached to a fixture wrapper, if any.
pub fn expectations_from_value(v: &Value) -> Vec<Expectation> {
    v.get("expectations")
        .and_then(|e| serde_json::from_value(e.clone()).ok())
        .unwrap_or_default()
}

/// Extra report fields for a configuration fixture.
pub fn configuration_report(config: &CurveConfiguration, search: bool) -> Result<Value, FixtureError> {
    let report = surface::analyze(config)?;
    let mut value = serde_json::to_value(&report).map_err(|e| FixtureError::Parse(e.to_string()))?;
    if let Some(ac) = report.anticanonical.value() {
        let mut sorted = ac.lambda.clone();
        sorted.sort();
        value["lambda_multiset"] = json!(sorted);
        if search {
            let mut ints: Vec<i64> = config.cycle.iter().map(|c| c.self_intersection).collect();
            ints.extend(config.branches.iter().flat_map(|b| b.chain.iter().copied()));
            let found = surface::search_configurations(&ints, Some(&report.det), Some(&sorted))?;
            let key = surface::canonical_key(config);
            value["search"] = json!({
                "self_ints": ints,
                "count": found.len(),
                "contains_payload": found.iter().any(|m| surface::canonical_key(&m.configuration) == key),
            });
        }
    }
    Ok(value)
}

pub fn germ_report(g: &Germ, reduce_q: Option<u32>, bracket: Option<&[u32]>) -> Result<Value, FixtureError> {
    let violations = g.violations();
    let mut value = json!({
        "germ": g,
        "valid": violations.is_empty(),
        "violations": violations,
        "index_m": g.index_m(),
        "p": g.p_string(),
    });
    if let Some(q) = reduce_q {
        value["reduction"] = json!(germ::reduction_report(g, q)?);
    }
    if let Some(alpha) = bracket {
        let seq = match alpha {
            [a1] => germ::bracket_single(*a1, g.s, g.j),
            [a1, a2] => germ::bracket_double(*a1, *a2, g.s, g.j),
            _ => None,
        };
        value["bracket"] = json!(seq);
    }
    Ok(value)
}

/// Builds the report for a fixture; `resolve` looks up fixtures referenced by name.
pub fn report(fixture: &Fixture, resolve: &dyn Fn(&str) -> Option<Fixture>) -> Result<Value, FixtureError> {
    match fixture.kind {
        FixtureKind::Configuration => {
            configuration_report(&payload(&fixture.payload)?, fixture.params.search)
        }
        FixtureKind::Germ => germ_report(
            &payload(&fixture.payload)?,
            fixture.params.reduce_q,
            fixture.params.bracket.as_deref(),
        ),
        FixtureKind::Factorization => {
            let f: FactorizationFixture = payload(&fixture.payload)?;
            let order = fixture.params.order.unwrap_or(series::DEFAULT_ORDER);
            Ok(json!(series::verify_factorization(&f, order)?))
        }
        FixtureKind::Pairing => {
            let names: PairingPayload = payload(&fixture.payload)?;
            let lookup = |n: &str| resolve(n).ok_or_else(|| FixtureError::UnknownReference(n.to_string()));
            let config: CurveConfiguration = payload(&lookup(&names.configuration)?.payload)?;
            let g: Germ = payload(&lookup(&names.germ)?.payload)?;
            Ok(json!(germ::cross_check(&config, &g)))
        }
    }
}

#[derive(Debug, Deserialize)]
struct PairingPayload {
    configuration: String,
    germ: String,
}

pub fn check_expectations(report: &Value, expectations: &[Expectation]) -> Vec<ExpectationResult> {
    expectations
        .iter()
        .map(|e| {
            let actual = report.pointer(&e.field).cloned();
            ExpectationResult {
                field: e.field.clone(),
                passed: actual.as_ref() == Some(&e.value),
                expected: e.value.clone(),
                actual,
                note: e.note.clone(),
            }
        })
        .collect()
}

pub fn evaluate(fixture: &Fixture, resolve: &dyn Fn(&str) -> Option<Fixture>) -> Result<FixtureOutcome, FixtureError> {
    let report = report(fixture, resolve)?;
    let expectations = check_expectations(&report, &fixture.expectations);
    Ok(FixtureOutcome {
        name: fixture.name.clone(),
        kind: fixture.kind,
        passed: expectations.iter().all(|e| e.passed),
        report,
        expectations,
    })
}

/// Evaluates every bundled fixture.
pub fn run_bundled() -> Vec<Result<FixtureOutcome, (String, FixtureError)>> {
    bundled()
        .iter()
        .map(|f| evaluate(f, &find_bundled).map_err(|e| (f.name.clone(), e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_match_files() {
        let all = bundled();
        let mut names: Vec<_> = all.iter().map(|f| f.name.as_str()).collect();
        for (f, (file, _)) in all.iter().zip(BUNDLED) {
            assert_eq!(&f.name, file);
        }
        names.sort();
        names.dedup();
        assert_eq!(names.len(), BUNDLED.len());
    }

    #[test]
    fn every_bundled_fixture_meets_its_expectations() {
        for outcome in run_bundled() {
            let o = outcome.unwrap_or_else(|(n, e)| panic!("{n}: {e}"));
            for e in &o.expectations {
                assert!(e.passed, "{}: {} expected {} got {:?}", o.name, e.field, e.expected, e.actual);
            }
            assert!(o.passed);
        }
    }

    #[test]
    fn missing_reference_is_an_error() {
        let f = Fixture {
            name: "dangling".into(),
            kind: FixtureKind::Pairing,
            payload: json!({"configuration": "nope", "germ": "app_ex1_germ"}),
            params: FixtureParams::default(),
            expectations: vec![],
        };
        assert!(matches!(evaluate(&f, &find_bundled), Err(FixtureError::UnknownReference(_))));
    }

    #[test]
    fn bare_and_wrapped_payloads_load() {
        let wrapped: Value = serde_json::from_str(BUNDLED[1].1).unwrap();
        let a: CurveConfiguration = payload_from_value(&wrapped).unwrap();
        let b: CurveConfiguration = payload_from_value(&wrapped["payload"]).unwrap();
        assert_eq!(a, b);
        assert!(parse_fixture("{").is_err());
    }
}
