use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{execute, schema, Cache, Report, Request};
use crate::error::Result;

/// A presentation for the finite factor at `factor` (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationSpec {
    pub factor: usize,
    pub generators: Vec<String>,
    pub relators: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationFile {
    presentations: Vec<PresentationSpec>,
}

/// Accepts `{"presentations": [...]}` or a bare array.
pub(crate) fn parse_presentations(v: Value) -> Result<Vec<PresentationSpec>> {
    if v.is_array() {
        return typed(v, "presentations");
    }
    typed::<PresentationFile>(v, "presentation-file").map(|f| f.presentations)
}

/// Deserializes with the path of the offending field in the error.
pub(crate) fn typed<T: serde::de::DeserializeOwned>(v: Value, root: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { root.to_string() } else { format!("{root}.{path}") };
        schema(&field, e.into_inner().to_string())
    })
}

/// Values a problem file expects the report to reproduce.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default)]
    pub result: Option<Value>,
    #[serde(default)]
    pub gap: Option<i64>,
    #[serde(default)]
    pub adef: Option<i64>,
    /// Prime → row sum.
    #[serde(default)]
    pub per_prime: Option<BTreeMap<u64, usize>>,
    #[serde(default)]
    pub argmax: Option<Vec<u64>>,
    #[serde(default)]
    pub exit_code: Option<i32>,
}

/// A request plus optional expected values.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub request: Request,
    pub expected: Option<Expected>,
}

impl ProblemFile {
    pub fn from_value(v: Value) -> Result<Self> {
        let Value::Object(mut map) = v else { return Err(schema("file", "expected a JSON object")) };
        let expected = map.remove("expected").map(|e| typed(e, "expected")).transpose()?;
        let request = typed(Value::Object(map), "file")?;
        Ok(ProblemFile { request, expected })
    }
}

fn compare(name: &str, want: Value, got: Value, out: &mut Vec<Value>) -> bool {
    let holds = want == got;
    out.push(json!({"name": format!("expected {name}"), "holds": holds, "detail": format!("expected {want}, got {got}")}));
    holds
}

/// Runs the request and appends one check per expected value; a mismatch exits with 3.
pub(crate) fn run_problem_file(pf: &ProblemFile, cache: Option<&Cache>) -> Report {
    let mut report = execute(&pf.request, cache);
    report.details.insert("command".into(), json!(pf.request.command));
    report.command = "report".into();
    let Some(exp) = &pf.expected else { return report };
    let mut checks = Vec::new();
    let mut ok = true;
    if let Some(want) = &exp.result {
        ok &= compare("result", want.clone(), report.result.clone(), &mut checks);
    }
    for (name, want) in [("gap", exp.gap), ("adef", exp.adef)] {
        if let Some(want) = want {
            ok &= compare(name, json!(want), report.details.get(name).cloned().unwrap_or(Value::Null), &mut checks);
        }
    }
    if let Some(rows) = &exp.per_prime {
        for (p, sum) in rows {
            let got = report
                .per_prime
                .as_array()
                .and_then(|a| a.iter().find(|r| r["p"] == json!(p)))
                .map(|r| r["sum"].clone())
                .unwrap_or(Value::Null);
            ok &= compare(&format!("row at {p}"), json!(sum), got, &mut checks);
        }
    }
    if let Some(want) = &exp.argmax {
        ok &= compare("argmax", json!(want), report.details.get("argmax").cloned().unwrap_or(Value::Null), &mut checks);
    }
    if let Some(want) = exp.exit_code {
        ok &= compare("exit code", json!(want), json!(report.exit_code), &mut checks);
    } else if report.exit_code != 0 {
        ok = false;
    }
    report.details.insert("expectations".into(), Value::Array(checks));
    report.exit_code = if ok {
        0
    } else if report.exit_code != 0 && exp.exit_code.is_none() {
        report.exit_code
    } else {
        3
    };
    report
}
