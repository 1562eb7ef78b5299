//! Run configuration: a key=value file merged under the command-line flags.
//!
//! A file line `key = value` applies to every subcommand that has a flag `--key`;
//! `subcommand.key = value` applies to one subcommand only. Boolean flags take
//! `true` or `false`. Later flags win, and the file's flags are placed first.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Command};
use serde::Serialize;

use crate::emit::Format;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "LMOMENTS_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    /// Every subcommand parameter after merging, defaults included, as given.
    pub params: BTreeMap<String, String>,
    pub format: Format,
    pub output: String,
    pub seed: u64,
    pub threads: usize,
    pub config_file: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigEntry {
    pub scope: Option<String>,
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        let (scope, key) = match k.split_once('.') {
            Some((s, k)) => (Some(s.to_string()), k.to_string()),
            None => (None, k.to_string()),
        };
        out.push(ConfigEntry {
            scope,
            key: key.replace('_', "-"),
            value: v.to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// Config path from `--config` in argv, else from the environment.
pub fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    std::env::var_os(CONFIG_ENV).filter(|s| !s.is_empty()).map(PathBuf::from)
}

pub fn load_config(path: &Path) -> Result<Vec<ConfigEntry>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Inserts flags from `entries` right after the subcommand token. Unscoped keys that the
/// subcommand does not know are skipped; scoped keys must exist.
pub fn merge_argv(argv: &[String], entries: &[ConfigEntry], root: &Command) -> Result<Vec<String>, String> {
    let Some(pos) = argv
        .iter()
        .skip(1)
        .position(|a| root.find_subcommand(a).is_some())
        .map(|p| p + 1)
    else {
        return Ok(argv.to_vec());
    };
    let sub = root.find_subcommand(&argv[pos]).expect("found above");
    let name = sub.get_name().to_string();
    let mut extra = Vec::new();
    for e in entries {
        if let Some(s) = &e.scope {
            if s != &name {
                continue;
            }
        }
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments().filter(|a| a.is_global_set()))
            .find(|a| a.get_long() == Some(e.key.as_str()));
        let Some(arg) = arg else {
            if e.scope.is_some() {
                return Err(format!("config line {}: `{name}` has no flag --{}", e.line, e.key));
            }
            continue;
        };
        if e.key == "config" {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match e.value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{}", e.key)),
                "false" | "0" | "no" => {}
                v => return Err(format!("config line {}: --{} takes true or false, got `{v}`", e.line, e.key)),
            },
            _ => extra.push(format!("--{}={}", e.key, e.value)),
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::{Arg, ArgAction};

    fn root() -> Command {
        Command::new("x")
            .args_override_self(true)
            .arg(Arg::new("threads").long("threads").global(true))
            .subcommand(
                Command::new("moment")
                    .arg(Arg::new("Q").long("Q"))
                    .arg(Arg::new("strict").long("strict").action(ArgAction::SetTrue)),
            )
            .subcommand(Command::new("tau").arg(Arg::new("limit").long("limit")))
    }

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parse_lines() {
        let e = parse_config("# c\n threads = 2\nmoment.Q=10 # trailing\n\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].scope.as_deref(), Some("moment"));
        assert_eq!((e[1].key.as_str(), e[1].value.as_str()), ("Q", "10"));
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let entries = parse_config("threads=2\nmoment.Q=10\nmoment.strict=true\nlimit=7").unwrap();
        let merged = merge_argv(&argv("lm moment --Q 12"), &entries, &root()).unwrap();
        assert_eq!(merged, argv("lm moment --threads=2 --Q=10 --strict --Q 12"));
        let m = root().try_get_matches_from(&merged).unwrap();
        let (_, sub) = m.subcommand().unwrap();
        assert_eq!(sub.get_one::<String>("Q").unwrap(), "12");
        let bad = parse_config("moment.limit=3").unwrap();
        assert!(merge_argv(&argv("lm moment"), &bad, &root()).is_err());
    }
}
