//! Config files: a JSON object whose keys are flag names. Its entries are
//! spliced in right after the subcommand so that later, explicit flags win.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

use crate::CliError;

const SUBCOMMANDS: [&str; 7] = [
    "spectrum",
    "gap-profile",
    "cheeger-audit",
    "baa-run",
    "evolve",
    "optimize-run",
    "scaling-study",
];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Flag arguments for one config entry.
fn entry_args(key: &str, value: &Value) -> Result<Vec<OsString>, CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    let bad = || CliError::Usage(format!("config key `{key}` has an unsupported value {value}"));
    Ok(match value {
        Value::Null | Value::Bool(false) => Vec::new(),
        Value::Bool(true) => vec![flag.into()],
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            vec![flag.into(), parts.ok_or_else(bad)?.join(",").into()]
        }
        Value::Object(_) => return Err(bad()),
        other => vec![flag.into(), scalar(other).ok_or_else(bad)?.into()],
    })
}

/// Returns `args` with the config file's entries inserted after the subcommand.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(path.clone(), e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Usage(format!("{}: config must be a JSON object", path.display())));
    };
    let Some(at) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (key, value) in &map {
        if key == "config" {
            continue;
        }
        extra.extend(entry_args(key, value)?);
    }
    let mut out = args[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}
