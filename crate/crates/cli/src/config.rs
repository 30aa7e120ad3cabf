//! Flat `key = value` config files. Keys are long flag names without the
//! leading dashes; `command` names the subcommand when argv has none. Lines
//! starting with `#` are comments.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(CliError::usage(format!("config line {}: empty key", i + 1)));
        }
        if k == "config" {
            return Err(CliError::usage("config files cannot include other config files"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Value of `--config` in argv, if any.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = it.next().cloned();
        } else if let Some(rest) = s.strip_prefix("--config=") {
            found = Some(rest.into());
        }
    }
    found
}

/// Rewrites argv so that config entries come right after the subcommand and
/// explicit flags, which follow them, take precedence.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;

    let cli = Cli::command();
    let names: Vec<String> = cli.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let mut argv = argv;
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| names.iter().any(|n| a.to_string_lossy() == *n))
        .map(|p| p + 1);
    let pos = match pos {
        Some(p) => p,
        None => {
            let cmd = entries
                .iter()
                .find(|(k, _)| k == "command")
                .map(|(_, v)| v.clone())
                .ok_or_else(|| CliError::usage("no subcommand given on the command line or in the config"))?;
            argv.push(cmd.into());
            argv.len() - 1
        }
    };
    let sub_name = argv[pos].to_string_lossy().into_owned();
    let sub = cli
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::usage(format!("unknown subcommand {sub_name}")))?;

    let mut extra: Vec<OsString> = Vec::new();
    for (k, v) in entries.into_iter().filter(|(k, _)| k != "command") {
        let arg = sub
            .get_arguments()
            .chain(cli.get_arguments())
            .find(|a| a.get_long() == Some(k.as_str()))
            .ok_or_else(|| CliError::usage(format!("unknown config key {k}")))?;
        if arg.get_action().takes_values() {
            extra.push(format!("--{k}").into());
            extra.push(v.into());
        } else {
            match v.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{k}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(CliError::usage(format!("config key {k} expects true or false"))),
            }
        }
    }
    argv.splice(pos + 1..pos + 1, extra);
    Ok(argv)
}
