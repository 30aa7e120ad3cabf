//! Plot-ready CSV extracted from saved reports.

use serde_json::Value;

use crate::args::{Dataset, ExportArgs};
use crate::error::CliError;
use crate::report::{num, Table};

fn missing(what: Dataset) -> CliError {
    let name = match what {
        Dataset::Periods => "period",
        Dataset::Ladder => "ladder",
        Dataset::Cylinder => "cylinder",
    };
    CliError::usage(format!("report has no {name} data"))
}

fn f(v: &Value, key: &str) -> Option<f64> {
    v.get(key).and_then(Value::as_f64)
}

fn i(v: &Value, key: &str) -> Option<i64> {
    v.get(key).and_then(Value::as_i64)
}

/// (θ, T) for every torus with a finite period, in increasing θ.
fn periods(results: &Value) -> Option<Table> {
    let list = results
        .get("diamond_case_log")
        .or_else(|| results.get("tori"))
        .and_then(Value::as_array)?;
    let mut pts: Vec<(f64, f64, i64, i64)> = list
        .iter()
        .filter_map(|t| Some((f(t, "theta")?, f(t, "period")?, i(t, "p")?, i(t, "q")?)))
        .collect();
    if pts.is_empty() {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut table = Table::new(&["theta", "period", "p", "q"]);
    for (th, t, p, q) in pts {
        table.push(vec![num(th), num(t), p.to_string(), q.to_string()]);
    }
    Some(table)
}

fn ladder(results: &Value) -> Option<Table> {
    let list = results.get("ladder").and_then(Value::as_array)?;
    let mut table = Table::new(&["eigenvalue", "winding", "multiplicity"]);
    for r in list {
        table.push(vec![num(f(r, "eigenvalue")?), i(r, "winding")?.to_string(), i(r, "multiplicity")?.to_string()]);
    }
    Some(table)
}

fn cylinder(results: &Value) -> Option<Table> {
    let sol = results.get("solution")?;
    let col = |k: &str| -> Option<Vec<f64>> { sol.get(k)?.as_array()?.iter().map(Value::as_f64).collect() };
    let (s, a, r) = (col("s")?, col("alpha")?, col("rho")?);
    if s.len() != a.len() || s.len() != r.len() {
        return None;
    }
    let mut table = Table::new(&["s", "alpha", "rho"]);
    for k in 0..s.len() {
        table.push(vec![num(s[k]), num(a[k]), num(r[k])]);
    }
    Some(table)
}

pub fn extract(report: &Value, what: Dataset) -> Result<Table, CliError> {
    let results = report.get("results").ok_or_else(|| missing(what))?;
    match what {
        Dataset::Periods => periods(results),
        Dataset::Ladder => ladder(results),
        Dataset::Cylinder => cylinder(results),
    }
    .ok_or_else(|| missing(what))
}

pub fn load(args: &ExportArgs) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.report.display())))?;
    let report: Value = serde_json::from_str(&text)?;
    extract(&report, args.dataset)
}
