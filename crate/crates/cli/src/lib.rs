//! Command-line front end for reeblab: runs one pipeline per subcommand and
//! writes a JSON report plus optional CSV tables.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command, Format};
use crate::commands::Outcome;
use crate::error::{CliError, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use crate::report::{to_json, Verdict};

pub const THREADS_ENV: &str = "REEBLAB_THREADS";

/// --threads, then REEBLAB_THREADS, then all available cores.
fn threads(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(CliError::usage("thread count must be positive"));
    }
    Ok(n)
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let f = cli.output.format;
    let cmd = &cli.command;
    match cmd {
        Command::Analyze(a) => commands::analyze(cmd, a, f),
        Command::Torsion(a) => commands::torsion(cmd, a, f),
        Command::Spectrum(a) => commands::spectrum_cmd(cmd, a, f),
        Command::Cz(a) => commands::cz(cmd, a, f),
        Command::Index(a) => commands::index(cmd, a, f),
        Command::Cylinder(a) => commands::cylinder(cmd, a, f),
        Command::Scan(a) => commands::scan(cmd, a, f),
        Command::Export(_) => unreachable!("export writes no report"),
    }
}

fn emit(cli: &Cli, out: &Outcome) -> Result<(), CliError> {
    let name = out.report.command;
    match &cli.output.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.json")), to_json(&out.report)?)?;
            if cli.output.format == Format::Csv {
                out.table.to_file(&dir.join(format!("{name}.csv")))?;
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match cli.output.format {
                Format::Json => lock.write_all(to_json(&out.report)?.as_bytes())?,
                Format::Csv => out.table.write(&mut lock)?,
            }
        }
    }
    Ok(())
}

fn export(cli: &Cli, args: &args::ExportArgs) -> Result<i32, CliError> {
    let table = export::load(args)?;
    let name = match args.dataset {
        args::Dataset::Periods => "periods",
        args::Dataset::Ladder => "ladder",
        args::Dataset::Cylinder => "cylinder",
    };
    match (&args.output, &cli.output.out_dir) {
        (Some(p), _) => table.to_file(p)?,
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            table.to_file(&dir.join(format!("{name}.csv")))?
        }
        (None, None) => table.write(std::io::stdout().lock())?,
    }
    Ok(EXIT_PASS)
}

fn execute(argv: Vec<OsString>) -> Result<i32, CliError> {
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(cli.output.threads)?)
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    pool.install(|| {
        if let Command::Export(a) = &cli.command {
            return export(&cli, a);
        }
        let out = dispatch(&cli)?;
        emit(&cli, &out)?;
        Ok(match out.report.verdict {
            Verdict::Pass => EXIT_PASS,
            Verdict::Fail => EXIT_FAIL,
        })
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 pass, 1 verified failure, 2 usage error, 3 numerical resolution error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match execute(args.into_iter().map(Into::into).collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("reeblab: {e}");
            e.exit_code()
        }
    }
}
