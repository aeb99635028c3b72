//! Browser bindings. Every entry point takes a JSON problem
//! `{"d": [..], "B": [[..], ..], "arrays": [["p/q", ..], ..]}` with each
//! array flattened in cell order (last variable fastest) and returns JSON.

use condcompat::{
    build_matrix, check_compatibility_oracle, symmetry_orbits, validate_problem, CheckOptions,
    ConditionalArray, EnumerationCaps, Limits, ProblemSpec, Rational, TheoremChecker,
    ValidatedProblem,
};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

// keeps the page responsive; larger problems belong on the CLI
const DEMO_CAPS: EnumerationCaps = EnumerationCaps {
    max_circuits: 20_000,
    max_length: None,
};

#[derive(Deserialize)]
struct Input {
    d: Vec<usize>,
    #[serde(rename = "B")]
    b: Vec<Vec<usize>>,
    #[serde(default)]
    arrays: Vec<Vec<String>>,
}

fn parse(text: &str) -> Result<(ValidatedProblem, Vec<Vec<String>>), String> {
    let input: Input = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let problem = validate_problem(&ProblemSpec::new(input.d, input.b), Limits::default())
        .map_err(|e| e.to_string())?;
    Ok((problem, input.arrays))
}

pub fn matrix_csv(text: &str) -> Result<String, String> {
    let (problem, _) = parse(text)?;
    Ok(build_matrix(&problem).map_err(|e| e.to_string())?.to_csv())
}

pub fn generator_summary(text: &str) -> Result<String, String> {
    let (problem, _) = parse(text)?;
    let set = condcompat::generators(&problem, DEMO_CAPS).map_err(|e| e.to_string())?;
    let orbits = symmetry_orbits(&set, &problem).map_err(|e| e.to_string())?;
    Ok(json!({
        "total": set.len(),
        "degree_histogram": set.degree_histogram(),
        "orbits": orbits.to_json(&set, &problem)["orbits"],
    })
    .to_string())
}

pub fn check(text: &str) -> Result<String, String> {
    let (problem, raw) = parse(text)?;
    if raw.len() != problem.m() {
        return Err(format!(
            "expected {} arrays, got {}",
            problem.m(),
            raw.len()
        ));
    }
    let mut arrays = Vec::with_capacity(raw.len());
    for (i, entries) in raw.iter().enumerate() {
        let entries = entries
            .iter()
            .map(|s| s.parse::<Rational>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("array {}: {e}", i + 1))?;
        arrays.push(ConditionalArray::new(i, entries));
    }
    let checker = TheoremChecker::new(&problem, DEMO_CAPS).map_err(|e| e.to_string())?;
    let verdict = checker
        .check(&arrays, CheckOptions::default())
        .map_err(|e| e.to_string())?;
    let oracle = check_compatibility_oracle(&arrays, &problem).map_err(|e| e.to_string())?;
    let mut out = verdict.to_json(&problem);
    out["oracle_agrees"] = json!(oracle.compatible == verdict.compatible);
    Ok(out.to_string())
}

#[wasm_bindgen(js_name = matrixCsv)]
pub fn matrix_csv_js(text: &str) -> Result<String, JsValue> {
    matrix_csv(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = generatorSummary)]
pub fn generator_summary_js(text: &str) -> Result<String, JsValue> {
    generator_summary(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = checkCompatibility)]
pub fn check_js(text: &str) -> Result<String, JsValue> {
    check(text).map_err(|e| JsValue::from_str(&e))
}
