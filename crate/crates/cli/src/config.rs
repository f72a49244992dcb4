//! Merging a JSON config file into the command line.
//!
//! Config entries become flags inserted right after the subcommand name, so
//! anything given explicitly later on the command line overrides them.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches};
use serde_json::Value;

use crate::Cli;

/// Global flags that take a value, used to skip their values when locating
/// the subcommand.
const VALUE_FLAGS: [&str; 5] = ["--format", "--output", "-o", "--config", "--threads"];

fn command() -> clap::Command {
    Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true))
}

fn parse_args(args: &[OsString]) -> clap::error::Result<Cli> {
    let mut matches = command().try_get_matches_from(args)?;
    Cli::from_arg_matches_mut(&mut matches)
}

fn usage_error(msg: String) -> clap::Error {
    command().error(clap::error::ErrorKind::InvalidValue, msg)
}

/// Flags for one config entry; `null` and `false` contribute nothing.
fn flags_for(key: &str, value: &Value) -> clap::error::Result<Vec<OsString>> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(usage_error(format!("config key {key:?}: unsupported value {other}"))),
    };
    Ok(match value {
        Value::Null | Value::Bool(false) => Vec::new(),
        Value::Bool(true) => vec![flag.into()],
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<clap::error::Result<Vec<_>>>()?;
            vec![flag.into(), parts.join(",").into()]
        }
        v => vec![flag.into(), scalar(v)?.into()],
    })
}

fn subcommand_position(args: &[OsString], name: &str) -> Option<usize> {
    (1..args.len()).find(|&i| args[i] == name && !VALUE_FLAGS.iter().any(|f| args[i - 1] == *f))
}

/// The `--config` value, found without a full parse since required flags
/// may only be supplied by the config itself.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

pub fn parse(args: Vec<OsString>) -> clap::error::Result<Cli> {
    let Some(path) = config_path(&args) else {
        return parse_args(&args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage_error(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage_error(format!("config {} is not JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(usage_error(format!("config {} must be a JSON object", path.display())));
    };
    let mut inserted = Vec::new();
    for (key, value) in &map {
        if key == "config" {
            continue;
        }
        inserted.extend(flags_for(key, value)?);
    }
    let names: Vec<String> = command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(at) = names.iter().filter_map(|n| subcommand_position(&args, n)).min() else {
        return parse_args(&args);
    };
    let mut merged = args[..=at].to_vec();
    merged.extend(inserted);
    merged.extend_from_slice(&args[at + 1..]);
    parse_args(&merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Command;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_values_become_flags() {
        assert_eq!(flags_for("p_max", &Value::from(3)).unwrap(), os(&["--p-max", "3"]));
        assert_eq!(flags_for("augment", &Value::Bool(true)).unwrap(), os(&["--augment"]));
        assert!(flags_for("augment", &Value::Bool(false)).unwrap().is_empty());
        let list = serde_json::json!([1, -2, 1]);
        assert_eq!(flags_for("coeffs", &list).unwrap(), os(&["--coeffs", "1,-2,1"]));
        assert!(flags_for("x", &serde_json::json!({"a": 1})).is_err());
    }

    #[test]
    fn subcommand_is_found_after_global_values() {
        let args = os(&["hyperlinear", "--output", "suite", "suite", "--seed", "1"]);
        assert_eq!(subcommand_position(&args, "suite"), Some(3));
    }

    #[test]
    fn config_path_forms() {
        assert_eq!(config_path(&os(&["x", "suite", "--config", "c.json"])), Some(PathBuf::from("c.json")));
        assert_eq!(config_path(&os(&["x", "--config=d.json", "suite"])), Some(PathBuf::from("d.json")));
        assert_eq!(config_path(&os(&["x", "suite"])), None);
    }

    #[test]
    fn repeated_flags_keep_the_last() {
        let cli = parse_args(&os(&["hyperlinear", "approx-rep", "--n", "4", "--n", "8"])).unwrap();
        match cli.command {
            Command::ApproxRep(a) => assert_eq!(a.n, 8),
            other => panic!("{other:?}"),
        }
    }
}
