use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "reeblab", version, about = "Reeb dynamics and index checks on torus-invariant contact models")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Directory receiving `<command>.json` (and `<command>.csv` with --format csv).
    /// Without it the report is written to stdout.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; REEBLAB_THREADS is used when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat key=value file supplying flag values; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Validate a profile curve and list its rational tori.
    Analyze(AnalyzeArgs),
    /// Check the oval torus: special orbits, Morse–Bott tori and the period bound.
    Torsion(TorsionArgs),
    /// Spectrum and eigenfunction windings of an asymptotic operator.
    Spectrum(SpectrumArgs),
    /// Conley–Zehnder index by the spectral and the path method.
    Cz(CzArgs),
    /// Normal Chern number, Fredholm index and adjunction for a punctured curve.
    Index(IndexArgs),
    /// Holomorphic cylinder between the orbits at θ = 1/4 and 3/4.
    Cylinder(CylinderArgs),
    /// Runs one computation per grid value in parallel; one CSV row each.
    Scan(ScanArgs),
    /// Plot-ready CSV extracted from a report.
    Export(ExportArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Oval,
    Tight,
    /// JSON curve document given by --curve.
    Curve,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::Oval)]
    pub model: ModelChoice,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Knee of the oval as a fraction of ε.
    #[arg(long, default_value_t = 0.5)]
    pub shoulder: f64,
    /// Turns of the tight torus.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    pub grid_size: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BetaArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta_mean: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta_amplitude: f64,
    #[arg(long, default_value_t = 1)]
    pub beta_harmonic: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    pub qmax: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TorsionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 50)]
    pub qmax: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OperatorArgs {
    /// S ≡ s·I.
    #[arg(long, allow_hyphen_values = true)]
    pub constant_s: Option<f64>,
    /// Constant S given as xx,xy,yy.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub matrix: Option<Vec<f64>>,
    /// JSON file {"samples": [[xx, xy, yy], ...]} of S on a uniform grid.
    #[arg(long)]
    pub operator: Option<PathBuf>,
    /// Operator of the orbit with homology (p, q) in the chosen model.
    #[arg(long)]
    pub orbit: bool,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub p: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub q: i64,
    #[arg(long, default_value_t = 1)]
    pub cover: u32,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub beta: BetaArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, default_value_t = 256)]
    pub modes: usize,
    #[arg(long, default_value_t = reeblab::spectral::DEFAULT_WINDOW)]
    pub window: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CzArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
    #[arg(long, default_value_t = 256)]
    pub modes: usize,
    #[arg(long, default_value_t = reeblab::spectral::DEFAULT_WINDOW)]
    pub window: f64,
    /// Output samples of the Hamiltonian path.
    #[arg(long, default_value_t = 1000)]
    pub segments: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IndexArgs {
    /// Punctured-curve JSON document.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CylinderArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = 0.5)]
    pub rho_mid: f64,
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Truncation of the energy integral at ρ = 1/4 + δ, 3/4 - δ.
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanTarget {
    /// Grid over ε.
    Torsion,
    /// Grid over θ: homology class and period of the torus at θ.
    Period,
    /// Grid over ε.
    Cylinder,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub target: ScanTarget,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', num_args = 0.., allow_negative_numbers = true)]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = 50)]
    pub qmax: u32,
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    /// (θ, T) from torsion and analyze reports.
    Periods,
    /// (eigenvalue, winding, multiplicity) from spectrum reports.
    Ladder,
    /// (s, alpha, rho) from cylinder reports.
    Cylinder,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum)]
    pub dataset: Dataset,
    /// Destination file; defaults to `<dataset>.csv` in --out-dir, else stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
