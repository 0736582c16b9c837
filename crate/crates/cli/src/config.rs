//! `key = value` config files, merged into the command line.
//!
//! Keys are the long flag names of the subcommand (`n_max` and `n-max` are
//! the same key). A `command` key names the subcommand when the command line
//! does not. Flags given on the command line win over the file.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::error::{CliError, CliResult};

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::validation("config", format!("line {}: expected key = value", i + 1)));
            };
            let key = k.trim().replace('_', "-");
            let value = v.trim().trim_matches('"').to_owned();
            if key.is_empty() {
                return Err(CliError::validation("config", format!("line {}: empty key", i + 1)));
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(CliError::validation(key, "given twice in the config file"));
            }
            entries.push((key, value));
        }
        Ok(ConfigFile { entries })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

const GLOBAL_WITH_VALUE: [&str; 2] = ["--config", "--workers"];

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Index of the subcommand token, skipping global options and their values.
fn subcommand_index(argv: &[OsString], names: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if names.iter().any(|n| *n == s) {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn given_on_command_line(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_eq = format!("--{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&with_eq)
    })
}

/// Returns `argv` with the config file's flags spliced in after the subcommand.
pub fn merge(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let config = ConfigFile::read(Path::new(&path))?;
    let cli = Cli::command();
    let names: Vec<String> = cli.get_subcommands().map(|c| c.get_name().to_owned()).collect();

    let mut argv = argv;
    let at = match subcommand_index(&argv, &names) {
        Some(i) => {
            if let Some(c) = config.get("command") {
                if c != argv[i].to_string_lossy() {
                    return Err(CliError::validation(
                        "command",
                        format!("config says `{c}` but the command line runs `{}`", argv[i].to_string_lossy()),
                    ));
                }
            }
            i
        }
        None => {
            let c = config
                .get("command")
                .ok_or_else(|| CliError::validation("command", "no subcommand on the command line or in the config"))?;
            if !names.iter().any(|n| n == c) {
                return Err(CliError::validation("command", format!("unknown subcommand `{c}`")));
            }
            argv.insert(1, c.into());
            1
        }
    };

    let sub = cli.find_subcommand(argv[at].to_string_lossy().as_ref()).expect("known subcommand");
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &config.entries {
        if key == "command" || key == "config" {
            continue;
        }
        if key == "workers" {
            if !given_on_command_line(&argv, "workers") && std::env::var_os("BRQW_WORKERS").is_none() {
                extra.push("--workers".into());
                extra.push(value.into());
            }
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::validation(key.clone(), format!("not a flag of `{}`", sub.get_name())))?;
        if given_on_command_line(&argv, key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => return Err(CliError::validation(key.clone(), format!("expected true or false, got `{other}`"))),
            },
            _ => extra.push(format!("--{key}={value}").into()),
        }
    }
    argv.splice(at + 1..at + 1, extra);
    Ok(argv)
}
