use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub tolerances: BTreeMap<&'static str, f64>,
}

pub fn provenance() -> Provenance {
    use reeblab::{index, profile, reeb, spectral, torsion};
    let tolerances = BTreeMap::from([
        ("contact_margin", profile::CONTACT_MARGIN),
        ("periodicity", profile::PERIODICITY_TOL),
        ("symmetry", profile::SYMMETRY_TOL),
        ("validation_grid", profile::DEFAULT_GRID as f64),
        ("reeb_degeneracy", reeb::DEGENERACY_TOL),
        ("monodromy_identity", reeb::IDENTITY_TOL),
        ("orbit_closure", reeb::CLOSURE_TOL),
        ("min_closure_time", reeb::MIN_CLOSURE_TIME),
        ("period_floor", torsion::PERIOD_FLOOR),
        ("special_period", 1e-9),
        ("spectral_tail", spectral::TAIL_TOL),
        ("spectral_min_modes", spectral::MIN_MODES as f64),
        ("shift_guard", spectral::SHIFT_GUARD),
        ("zero_eigenvalue", index::ZERO_EIGENVALUE_TOL),
        ("cr_residual", crate::commands::CR_RESIDUAL_TOL),
        ("energy", crate::commands::ENERGY_TOL),
        ("decay_linearized", crate::commands::DECAY_LINEAR_TOL),
        ("decay_operator", crate::commands::DECAY_OPERATOR_TOL),
    ]);
    Provenance {
        version: env!("CARGO_PKG_VERSION"),
        tolerances,
    }
}

/// Top-level report. Field order is the key order of the JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub provenance: Provenance,
    pub verdict: Verdict,
    pub results: Value,
}

/// Plain table written as CSV with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_file(&self, path: &Path) -> Result<(), CliError> {
        self.write(std::fs::File::create(path)?)
    }
}

/// Shortest round-trip form; empty for NaN so that CSV readers see a gap.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}
