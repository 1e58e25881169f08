use std::fmt::Write;

use serde_json::Value;

use super::Report;

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Human-readable summary with per-prime evidence.
pub fn render_table(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", r.command, r.problem);
    if let Some(e) = &r.error {
        let _ = writeln!(s, "error ({}): {}", e.kind, e.message);
        let _ = writeln!(s, "exit code {}", r.exit_code);
        return s;
    }
    let _ = writeln!(s, "result     {}  [{}]", text(&r.result), r.provenance);
    if let Some(rows) = r.per_prime.as_array().filter(|a| !a.is_empty()) {
        let _ = writeln!(s, "{:>10}  {:>5}  components", "p", "sum");
        for row in rows {
            let p = if row["generic"] == Value::Bool(true) { format!("{} (gen)", text(&row["p"])) } else { text(&row["p"]) };
            let _ = writeln!(s, "{:>10}  {:>5}  {}", p, text(&row["sum"]), text(&row["components"]));
        }
    }
    if let Some(hs) = r.hypotheses.as_array() {
        for h in hs {
            let mark = if h["holds"] == Value::Bool(true) { "ok  " } else { "FAIL" };
            let _ = writeln!(s, "[{mark}] {}: {}", text(&h["name"]), text(&h["detail"]));
        }
    }
    for key in ["gap", "adef", "argmax", "verdict", "expectations"] {
        if let Some(v) = r.details.get(key) {
            let _ = writeln!(s, "{key:<10} {v}");
        }
    }
    if let Some(c) = &r.certificate {
        let n = c["generators"].as_array().map_or(0, Vec::len);
        let _ = writeln!(s, "certificate: {n} generators, exponent bound {}", text(&c["exponent"]));
    }
    let _ = writeln!(s, "exit code {}", r.exit_code);
    s
}
