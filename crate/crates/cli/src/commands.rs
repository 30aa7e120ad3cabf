use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use reeblab::cylinder::{
    cr_residual, cylinder_ode, decay_rate, dlambda_energy, linearized_decay_rate, CylinderOptions, CylinderSolution,
    DecayFit, End, EnergyEstimate,
};
use reeblab::index::{
    adjunction, closed_adjunction, closed_sphere_index, cover_index, even_punctures, fredholm_index, normal_chern,
    select_constraint, AdjunctionVerdict, PunctureClass, PunctureRecord, PuncturedCurveData,
};
use reeblab::profile::{make_oval_with, Beta, ContactModel, ProfileCurve};
use reeblab::reeb::{classify_theta, rational_tori};
use reeblab::spectral::{
    cz_path, cz_spectral, operator_from_orbit, spectrum, AsymptoticOperator, SpectralData, SpectralOptions, Sym2,
    SymplecticPath,
};
use reeblab::torsion::{verify_torsion_lemma, TorsionReport, Verdict as TorsionVerdict};

use crate::args::*;
use crate::error::CliError;
use crate::report::{num, opt, provenance, Report, Table, Verdict};

pub const CR_RESIDUAL_TOL: f64 = 1e-6;
pub const ENERGY_TOL: f64 = 1e-4;
/// Relative tolerances of the fitted decay rate.
pub const DECAY_LINEAR_TOL: f64 = 0.01;
pub const DECAY_OPERATOR_TOL: f64 = 0.05;

pub struct Outcome {
    pub report: Report,
    pub table: Table,
}

fn label<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn config_echo(cmd: &Command, format: Format) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(cmd)?;
    if let Value::Object(m) = &mut v {
        m.remove("command");
        m.insert("format".into(), serde_json::to_value(format)?);
    }
    Ok(v)
}

fn finish(name: &'static str, cmd: &Command, format: Format, ok: bool, results: Value, table: Table) -> Result<Outcome, CliError> {
    Ok(Outcome {
        report: Report {
            command: name,
            config: config_echo(cmd, format)?,
            provenance: provenance(),
            verdict: Verdict::from_bool(ok),
            results,
        },
        table,
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn curve(m: &ModelArgs) -> Result<ProfileCurve, CliError> {
    match m.model {
        ModelChoice::Oval => Ok(make_oval_with(m.epsilon, m.shoulder, m.grid_size)?),
        ModelChoice::Tight => Ok(ProfileCurve::tight(m.n)?.with_grid(m.grid_size)?),
        ModelChoice::Curve => {
            let path = m
                .curve
                .as_ref()
                .ok_or_else(|| CliError::usage("--model curve requires --curve <file>"))?;
            Ok(serde_json::from_str(&read_text(path)?)?)
        }
    }
}

pub fn model(m: &ModelArgs) -> Result<ContactModel, CliError> {
    Ok(ContactModel::new(curve(m)?)?)
}

fn beta(b: &BetaArgs) -> Result<Beta, CliError> {
    let beta = Beta {
        mean: b.beta_mean,
        amplitude: b.beta_amplitude,
        harmonic: b.beta_harmonic,
    };
    beta.validate()?;
    Ok(beta)
}

pub fn analyze(cmd: &Command, a: &AnalyzeArgs, format: Format) -> Result<Outcome, CliError> {
    let c = curve(&a.model)?;
    let validation = c.validate();
    let mut table = Table::new(&["theta0", "p", "q", "period", "classification"]);
    let mut results = Map::new();
    results.insert("shape".into(), serde_json::to_value(c.shape())?);
    results.insert("validation".into(), serde_json::to_value(&validation)?);
    if validation.pass && validation.convex {
        let model = ContactModel::new(c)?;
        let tori = rational_tori(&model, a.qmax)?;
        for t in &tori {
            table.push(vec![num(t.theta), t.p.to_string(), t.q.to_string(), num(t.period), label(&t.classification)]);
        }
        results.insert("tori".into(), serde_json::to_value(&tori)?);
    }
    finish("analyze", cmd, format, validation.pass, Value::Object(results), table)
}

fn torsion_table(rep: &TorsionReport) -> Table {
    let mut table = Table::new(&["theta", "p", "q", "period", "classification", "region", "bound", "bound_ok"]);
    for d in &rep.diamond_case_log {
        table.push(vec![
            num(d.theta),
            d.p.to_string(),
            d.q.to_string(),
            num(d.period),
            label(&d.classification),
            label(&d.region),
            num(d.bound),
            d.bound_ok.to_string(),
        ]);
    }
    table
}

pub fn torsion(cmd: &Command, t: &TorsionArgs, format: Format) -> Result<Outcome, CliError> {
    let rep = verify_torsion_lemma(&curve(&t.model)?, t.qmax)?;
    let table = torsion_table(&rep);
    finish("torsion", cmd, format, rep.verdict == TorsionVerdict::Pass, serde_json::to_value(&rep)?, table)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    samples: Vec<[f64; 3]>,
}

pub fn operator(o: &OperatorArgs) -> Result<AsymptoticOperator, CliError> {
    let given = [o.constant_s.is_some(), o.matrix.is_some(), o.operator.is_some(), o.orbit];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::usage("give exactly one of --constant-s, --matrix, --operator, --orbit"));
    }
    if let Some(s) = o.constant_s {
        return Ok(AsymptoticOperator::constant(Sym2::scalar(s)));
    }
    if let Some(m) = &o.matrix {
        if m.len() != 3 {
            return Err(CliError::usage("--matrix takes three values xx,xy,yy"));
        }
        return Ok(AsymptoticOperator::constant(Sym2::new(m[0], m[1], m[2])));
    }
    if let Some(path) = &o.operator {
        let doc: OperatorDoc = serde_json::from_str(&read_text(path)?)?;
        let samples: Vec<Sym2> = doc.samples.iter().map(|s| Sym2::new(s[0], s[1], s[2])).collect();
        return Ok(AsymptoticOperator::from_samples(&samples)?);
    }
    let model = model(&o.model)?;
    let qmax = o.p.unsigned_abs().max(o.q.unsigned_abs()).max(1);
    let qmax = u32::try_from(qmax).map_err(|_| CliError::usage("homology class too large"))?;
    let torus = rational_tori(&model, qmax)?
        .into_iter()
        .find(|t| (t.p, t.q) == (o.p, o.q))
        .ok_or_else(|| CliError::usage(format!("model has no torus of class ({}, {})", o.p, o.q)))?;
    Ok(operator_from_orbit(&model, &torus, &beta(&o.beta)?, o.cover)?)
}

fn ladder_table(data: &SpectralData) -> Table {
    let mut table = Table::new(&["eigenvalue", "winding", "multiplicity"]);
    for r in data.ladder() {
        table.push(vec![num(r.eigenvalue), r.winding.to_string(), r.multiplicity.to_string()]);
    }
    table
}

pub fn spectrum_cmd(cmd: &Command, s: &SpectrumArgs, format: Format) -> Result<Outcome, CliError> {
    let op = operator(&s.operator)?;
    let data = spectrum(&op, &SpectralOptions { n_modes: s.modes, window: s.window })?;
    let results = json!({
        "operator": op.source,
        "spectrum": data,
        "ladder": data.ladder(),
    });
    finish("spectrum", cmd, format, true, results, ladder_table(&data))
}

pub fn cz(cmd: &Command, c: &CzArgs, format: Format) -> Result<Outcome, CliError> {
    let op = operator(&c.operator)?;
    let data = spectrum(&op, &SpectralOptions { n_modes: c.modes, window: c.window })?;
    let spec = cz_spectral(&data, c.shift)?;
    // A - c has the path of S + c.
    let path = cz_path(&SymplecticPath::hamiltonian_flow(&op, c.shift, c.segments)?)?;
    let lower = 2 * spec.alpha_minus + spec.parity;
    let upper = 2 * spec.alpha_plus - spec.parity;
    let ok = spec.cz == path.cz && lower == spec.cz && upper == spec.cz;
    let mut table = Table::new(&["method", "alpha_minus", "alpha_plus", "parity", "cz"]);
    for r in [&spec, &path] {
        table.push(vec![
            label(&r.method),
            r.alpha_minus.to_string(),
            r.alpha_plus.to_string(),
            r.parity.to_string(),
            r.cz.to_string(),
        ]);
    }
    let results = json!({
        "operator": op.source,
        "shift": c.shift,
        "cz_spectral": spec.cz,
        "cz_path": path.cz,
        "spectral": spec,
        "path": path,
        "winding_identities": { "two_alpha_minus_plus_p": lower, "two_alpha_plus_minus_p": upper },
    });
    finish("cz", cmd, format, ok, results, table)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PunctureDoc {
    class: PunctureClass,
    wind_e: i64,
    #[serde(default)]
    spectrum_ref: Option<PathBuf>,
    #[serde(default)]
    alpha_minus: Option<i64>,
    #[serde(default)]
    parity: Option<i64>,
    #[serde(default)]
    weight: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDoc {
    genus: u32,
    wind_pi: i64,
    #[serde(default)]
    delta: i64,
    #[serde(default)]
    c1: i64,
    #[serde(default)]
    punctures: Vec<PunctureDoc>,
    #[serde(default = "yes")]
    simply_covered_distinct: bool,
    /// Self-intersection of a closed sphere; triggers the closed adjunction.
    #[serde(default)]
    v_dot_v: Option<i64>,
    /// Cover multiplicity for the cover index.
    #[serde(default)]
    cover: Option<u32>,
}

/// Spectrum stored in a spectrum report, or a bare spectrum document.
fn load_spectrum(path: &Path) -> Result<SpectralData, CliError> {
    let v: Value = serde_json::from_str(&read_text(path)?)?;
    let inner = v.pointer("/results/spectrum").cloned().unwrap_or(v);
    serde_json::from_value(inner)
        .map_err(|e| CliError::usage(format!("{} holds no spectrum: {e}", path.display())))
}

pub fn index(cmd: &Command, a: &IndexArgs, format: Format) -> Result<Outcome, CliError> {
    let doc: CurveDoc = serde_json::from_str(&read_text(&a.input)?)?;
    let base = a.input.parent().unwrap_or(Path::new("."));
    let mut records = Vec::with_capacity(doc.punctures.len());
    for (i, p) in doc.punctures.iter().enumerate() {
        let rec = match &p.spectrum_ref {
            Some(r) => {
                if p.alpha_minus.is_some() || p.parity.is_some() || p.weight.is_some() {
                    return Err(CliError::usage(format!(
                        "puncture {i}: spectrum_ref excludes alpha_minus, parity and weight"
                    )));
                }
                select_constraint(p.class, p.wind_e, &load_spectrum(&base.join(r))?)?
            }
            None => PunctureRecord {
                class: p.class,
                wind_e: p.wind_e,
                weight: p.weight,
                alpha_minus: p.alpha_minus,
                parity: p.parity,
            },
        };
        records.push(rec);
    }
    let data = PuncturedCurveData {
        genus: doc.genus,
        punctures: records,
        wind_pi: doc.wind_pi,
        delta: doc.delta,
        c1: doc.c1,
        simply_covered_distinct: doc.simply_covered_distinct,
    };
    let c_n = normal_chern(&data)?;
    let ind = fredholm_index(&data)?;
    let adj = adjunction(&data)?;
    let mut results = Map::new();
    results.insert("c_N".into(), json!(c_n));
    results.insert("ind".into(), json!(ind));
    results.insert("self_intersection".into(), json!(adj.self_intersection));
    results.insert("even_punctures".into(), json!(even_punctures(&data)?));
    results.insert("adjunction".into(), serde_json::to_value(adj)?);
    results.insert("punctures".into(), serde_json::to_value(&data.punctures)?);
    let mut ok = true;
    if let Some(vv) = doc.v_dot_v {
        let closed = closed_adjunction(vv, doc.c1);
        ok &= closed.verdict != AdjunctionVerdict::ParityViolation;
        results.insert(
            "closed_sphere".into(),
            json!({ "v_dot_v": vv, "c1": doc.c1, "index": closed_sphere_index(doc.c1), "adjunction": closed }),
        );
    }
    if let Some(k) = doc.cover {
        results.insert("cover".into(), json!({ "k": k, "index": cover_index(ind, k)? }));
    }
    let mut table = Table::new(&["puncture", "class", "wind_e", "weight", "alpha_minus", "parity"]);
    for (i, p) in data.punctures.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            label(&p.class),
            p.wind_e.to_string(),
            p.weight.map(num).unwrap_or_default(),
            opt(p.alpha_minus),
            opt(p.parity),
        ]);
    }
    finish("index", cmd, format, ok, Value::Object(results), table)
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderSummary {
    pub points: usize,
    pub cr_residual: f64,
    pub energy: EnergyEstimate,
    /// g(1/4) - g(3/4).
    pub energy_target: f64,
    pub decay_plus: DecayFit,
    pub decay_minus: DecayFit,
    pub linearized_plus: f64,
    pub linearized_minus: f64,
    /// Negative eigenvalue of the θ = 1/4 operator nearest the plus-end rate.
    pub operator_eigenvalue: Option<f64>,
    pub residual_ok: bool,
    pub energy_ok: bool,
    pub decay_linearized_ok: bool,
    pub decay_operator_ok: bool,
}

impl CylinderSummary {
    pub fn pass(&self) -> bool {
        self.residual_ok && self.energy_ok && self.decay_linearized_ok && self.decay_operator_ok
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn run_cylinder(
    model: &ContactModel,
    beta: &Beta,
    opts: &CylinderOptions,
    delta: f64,
) -> Result<(CylinderSummary, CylinderSolution), CliError> {
    let sol = cylinder_ode(model, opts)?;
    let residual = cr_residual(&sol, model, beta);
    let energy = dlambda_energy(&sol, model, delta)?;
    let target = model.evaluate(0.25).g - model.evaluate(0.75).g;
    let plus = decay_rate(&sol, End::Plus)?;
    let minus = decay_rate(&sol, End::Minus)?;
    let lin_plus = linearized_decay_rate(model, beta, End::Plus);
    let lin_minus = linearized_decay_rate(model, beta, End::Minus);
    let torus = rational_tori(model, 1)?
        .into_iter()
        .find(|t| (t.p, t.q) == (0, 1) && (t.theta - 0.25).abs() < 1e-9);
    let eigen = match torus {
        Some(t) => {
            let op = operator_from_orbit(model, &t, beta, 1)?;
            let data = spectrum(&op, &SpectralOptions::default())?;
            data.eigenvalues()
                .into_iter()
                .filter(|&mu| mu < 0.0)
                .min_by(|a, b| rel(plus.rate, *a).total_cmp(&rel(plus.rate, *b)))
        }
        None => None,
    };
    let summary = CylinderSummary {
        points: sol.s.len(),
        cr_residual: residual,
        energy_ok: (energy.extrapolated - target).abs() < ENERGY_TOL,
        energy,
        energy_target: target,
        decay_linearized_ok: rel(plus.rate, lin_plus) < DECAY_LINEAR_TOL && rel(minus.rate, lin_minus) < DECAY_LINEAR_TOL,
        decay_operator_ok: eigen.is_some_and(|mu| rel(plus.rate, mu) < DECAY_OPERATOR_TOL),
        decay_plus: plus,
        decay_minus: minus,
        linearized_plus: lin_plus,
        linearized_minus: lin_minus,
        operator_eigenvalue: eigen,
        residual_ok: residual < CR_RESIDUAL_TOL,
    };
    Ok((summary, sol))
}

fn cylinder_options(c: &CylinderArgs, beta: Beta) -> CylinderOptions {
    CylinderOptions {
        beta,
        rho_mid: c.rho_mid,
        points: c.points,
        a0: c.a0,
        x0: c.x0,
        ..CylinderOptions::default()
    }
}

pub fn cylinder(cmd: &Command, c: &CylinderArgs, format: Format) -> Result<Outcome, CliError> {
    if c.points < 16 {
        return Err(CliError::usage("--points must be at least 16"));
    }
    let model = model(&c.model)?;
    let beta = beta(&c.beta)?;
    let (summary, sol) = run_cylinder(&model, &beta, &cylinder_options(c, beta), c.delta)?;
    let mut table = Table::new(&["s", "alpha", "rho"]);
    for i in 0..sol.s.len() {
        table.push(vec![num(sol.s[i]), num(sol.alpha[i]), num(sol.rho[i])]);
    }
    let ok = summary.pass();
    let results = json!({ "summary": summary, "solution": sol });
    finish("cylinder", cmd, format, ok, results, table)
}

struct Row {
    ok: bool,
    fields: Vec<(&'static str, Value)>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map(num).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn scan_columns(target: ScanTarget) -> &'static [&'static str] {
    match target {
        ScanTarget::Torsion => &["verdict", "torus_count", "t_quarter", "t_three_quarter", "min_other_period"],
        ScanTarget::Period => &["classification", "p", "q", "period"],
        ScanTarget::Cylinder => &[
            "verdict",
            "cr_residual",
            "energy",
            "energy_target",
            "decay_plus",
            "linearized_plus",
            "operator_eigenvalue",
        ],
    }
}

fn scan_row(s: &ScanArgs, shared: Option<&ContactModel>, value: f64) -> Result<Row, CliError> {
    match s.target {
        ScanTarget::Torsion => {
            let rep = verify_torsion_lemma(&make_oval_with(value, s.model.shoulder, s.model.grid_size)?, s.qmax)?;
            let ok = rep.verdict == TorsionVerdict::Pass;
            Ok(Row {
                ok,
                fields: vec![
                    ("verdict", json!(rep.verdict)),
                    ("torus_count", json!(rep.torus_count)),
                    ("t_quarter", json!(rep.special_periods.0)),
                    ("t_three_quarter", json!(rep.special_periods.1)),
                    ("min_other_period", json!(rep.min_other_period)),
                ],
            })
        }
        ScanTarget::Period => {
            let model = shared.expect("period scans share one model");
            let (class, pq) = classify_theta(model, value, s.qmax)?;
            let pt = model.evaluate(value);
            let period = pq.map(|(p, q)| p as f64 * pt.f + q as f64 * pt.g);
            Ok(Row {
                ok: true,
                fields: vec![
                    ("classification", json!(class)),
                    ("p", json!(pq.map(|x| x.0))),
                    ("q", json!(pq.map(|x| x.1))),
                    ("period", json!(period)),
                ],
            })
        }
        ScanTarget::Cylinder => {
            let model = ContactModel::new(make_oval_with(value, s.model.shoulder, s.model.grid_size)?)?;
            let beta = beta(&s.beta)?;
            let opts = CylinderOptions {
                beta,
                points: s.points,
                ..CylinderOptions::default()
            };
            let (sum, _) = run_cylinder(&model, &beta, &opts, 1e-4)?;
            Ok(Row {
                ok: sum.pass(),
                fields: vec![
                    ("verdict", json!(Verdict::from_bool(sum.pass()))),
                    ("cr_residual", json!(sum.cr_residual)),
                    ("energy", json!(sum.energy.extrapolated)),
                    ("energy_target", json!(sum.energy_target)),
                    ("decay_plus", json!(sum.decay_plus.rate)),
                    ("linearized_plus", json!(sum.linearized_plus)),
                    ("operator_eigenvalue", json!(sum.operator_eigenvalue)),
                ],
            })
        }
    }
}

pub fn scan(cmd: &Command, s: &ScanArgs, format: Format) -> Result<Outcome, CliError> {
    if s.grid.is_empty() {
        return Err(CliError::usage("scan grid is empty"));
    }
    if s.grid.iter().any(|v| !v.is_finite()) {
        return Err(CliError::usage("scan grid values must be finite"));
    }
    let shared = match s.target {
        ScanTarget::Period => Some(model(&s.model)?),
        _ => None,
    };
    // Rows come back in grid order whatever order they finish in.
    let rows: Vec<Result<Row, CliError>> = s.grid.par_iter().map(|&v| scan_row(s, shared.as_ref(), v)).collect();

    let cols = scan_columns(s.target);
    let mut header = vec!["index", "value", "status"];
    header.extend_from_slice(cols);
    header.push("error");
    let mut table = Table::new(&header);
    let mut json_rows = Vec::with_capacity(rows.len());
    let mut all_ok = true;
    for (i, (v, r)) in s.grid.iter().zip(&rows).enumerate() {
        let mut obj = Map::new();
        obj.insert("index".into(), json!(i));
        obj.insert("value".into(), json!(v));
        let (status, fields, error) = match r {
            Ok(row) => (if row.ok { "pass" } else { "fail" }, Some(&row.fields), String::new()),
            Err(e) => ("error", None, e.to_string()),
        };
        all_ok &= status == "pass";
        obj.insert("status".into(), json!(status));
        let mut line = vec![i.to_string(), num(*v), status.to_string()];
        for c in cols {
            let val = fields
                .and_then(|f| f.iter().find(|(k, _)| k == c))
                .map(|(_, v)| v.clone())
                .unwrap_or(Value::Null);
            line.push(cell(&val));
            obj.insert((*c).into(), val);
        }
        line.push(error.clone());
        obj.insert("error".into(), if error.is_empty() { Value::Null } else { json!(error) });
        table.push(line);
        json_rows.push(Value::Object(obj));
    }
    let results = json!({ "target": s.target, "rows": json_rows });
    finish("scan", cmd, format, all_ok, results, table)
}
