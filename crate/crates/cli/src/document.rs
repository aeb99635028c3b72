//! JSON problem documents.
//!
//! ```json
//! {"d": [3, 3],
//!  "conditionals": [{"B": [2], "array": [["1/2", "1/2", "0"], ...]},
//!                   {"B": [1], "array": [...]}],
//!  "caps": {"maxCircuits": 100000, "maxLength": 12}}
//! ```
//!
//! Arrays are nested by variable, outermost index = variable 1. Entries are
//! `"p/q"` or integer strings (bare JSON integers are accepted too).

use condcompat::{
    validate_problem, ConditionalArray, Limits, ProblemSpec, Rational, ValidatedProblem,
};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub d: Vec<usize>,
    pub conditionals: Vec<ConditionalEntry>,
    #[serde(default)]
    pub caps: Option<CapsEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalEntry {
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    #[serde(default)]
    pub array: Option<Value>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CapsEntry {
    pub max_circuits: Option<usize>,
    pub max_length: Option<usize>,
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Invalid(format!("malformed problem document: {e}")))
    }

    pub fn problem(&self) -> Result<ValidatedProblem, CliError> {
        let spec = ProblemSpec::new(
            self.d.clone(),
            self.conditionals.iter().map(|c| c.b.clone()).collect(),
        );
        Ok(validate_problem(&spec, Limits::default())?)
    }

    /// Conditional arrays; every conditional must carry one.
    pub fn arrays(&self, problem: &ValidatedProblem) -> Result<Vec<ConditionalArray>, CliError> {
        self.conditionals
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let value = entry.array.as_ref().ok_or_else(|| {
                    CliError::Invalid(format!("conditional {} has no array", i + 1))
                })?;
                let mut entries = Vec::with_capacity(problem.cell_count());
                flatten(value, problem.dims(), &mut entries)
                    .map_err(|e| CliError::Invalid(format!("conditional {}: {e}", i + 1)))?;
                Ok(ConditionalArray::new(i, entries))
            })
            .collect()
    }
}

fn flatten(value: &Value, dims: &[usize], out: &mut Vec<Rational>) -> Result<(), String> {
    match dims.split_first() {
        None => {
            let q = match value {
                Value::String(s) => s.parse::<Rational>().map_err(|e| e.to_string())?,
                Value::Number(n) if n.is_i64() => Rational::from_integer(n.as_i64().unwrap()),
                Value::Number(n) => {
                    return Err(format!(
                        "number {n} is not an integer; write rationals as \"p/q\""
                    ))
                }
                other => return Err(format!("expected a rational, found {other}")),
            };
            out.push(q);
            Ok(())
        }
        Some((&d, rest)) => {
            let items = value
                .as_array()
                .ok_or_else(|| format!("expected a list of length {d}"))?;
            if items.len() != d {
                return Err(format!(
                    "expected a list of length {d}, found length {}",
                    items.len()
                ));
            }
            items.iter().try_for_each(|item| flatten(item, rest, out))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_arrays() {
        let doc = ProblemDocument::parse(
            r#"{"d": [2, 2], "conditionals": [
                {"B": [2], "array": [["1/2", "1/3"], ["1/2", "2/3"]]},
                {"B": [1], "array": [["1/4", 3], ["1/2", "1/2"]]}]}"#,
        )
        .unwrap();
        let p = doc.problem().unwrap();
        let arrays = doc.arrays(&p).unwrap();
        assert_eq!(arrays[0].entries()[1], Rational::new(1, 3));
        assert_eq!(arrays[1].entries()[1], Rational::from_integer(3));
    }

    #[test]
    fn rejects_bad_shapes_and_decimals() {
        let doc = ProblemDocument::parse(
            r#"{"d": [2], "conditionals": [{"B": [], "array": ["0.5", "1/2"]}]}"#,
        )
        .unwrap();
        let p = doc.problem().unwrap();
        assert!(matches!(doc.arrays(&p), Err(CliError::Invalid(m)) if m.contains("decimal")));
        let doc =
            ProblemDocument::parse(r#"{"d": [2], "conditionals": [{"B": [], "array": [0.5, 1]}]}"#)
                .unwrap();
        assert!(doc.arrays(&p).is_err());
        let doc =
            ProblemDocument::parse(r#"{"d": [2], "conditionals": [{"B": [], "array": ["1"]}]}"#)
                .unwrap();
        assert!(doc.arrays(&p).is_err());
        let doc = ProblemDocument::parse(r#"{"d": [2], "conditionals": [{"B": []}]}"#).unwrap();
        assert!(doc.arrays(&p).is_err());
        assert!(ProblemDocument::parse(r#"{"d": [2], "conditional": []}"#).is_err());
    }
}
