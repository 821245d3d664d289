//! `key=value` configuration files.
//!
//! Keys are the long flag names of the subcommand being run. Entries are
//! turned into flags and placed ahead of the user's own flags; since every
//! subcommand lets later occurrences of a flag override earlier ones, the
//! command line wins over the file and the file wins over built-in defaults.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

/// Parsed `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key=value, got '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!(
                "config line {}: empty key",
                lineno + 1
            )));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Value of `--config` among the arguments following the subcommand.
fn find_config(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Rewrites `args` (program name first) with the entries of the config
/// file, if one is given, spliced in right after the subcommand name.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let entries = parse(&text)?;

    let sub_name = args[1].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand '{sub_name}'")))?;

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Usage(
                "config files cannot include other config files".into(),
            ));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Usage(format!("unknown config key '{key}' for '{sub_name}'"))
            })?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}={value}").into());
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => {
                    return Err(CliError::Usage(format!(
                        "config key '{key}' is a switch; expected true or false, got '{value}'"
                    )))
                }
            }
        }
    }

    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.extend(args[..2].iter().cloned());
    out.extend(injected);
    out.extend(args[2..].iter().cloned());
    Ok(out)
}
