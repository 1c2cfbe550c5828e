//! `--config FILE` support.
//!
//! The file is a JSON object whose keys are long flag names (dashes or
//! underscores). Its entries are spliced into the argument list right after
//! the subcommand, ahead of the user's own flags; since later occurrences
//! of a flag override earlier ones, flags given on the command line win.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub const SUBCOMMANDS: &[&str] =
    &["encode", "shatter", "vc", "pac", "transversal", "rationalize", "construct", "replace"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn flag_tokens(key: &str, value: &Value) -> Result<Vec<String>> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| -> Result<String> {
        Ok(match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => bail!("config value for `{key}` must be a string, number, boolean or list"),
        })
    };
    Ok(match value {
        Value::Bool(true) => vec![flag],
        Value::Bool(false) | Value::Null => vec![],
        Value::Array(items) => {
            let mut out = Vec::new();
            for v in items {
                out.push(flag.clone());
                out.push(scalar(v)?);
            }
            out
        }
        v => vec![flag, scalar(v)?],
    })
}

/// Arguments with the config file's entries spliced in.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("config {} is not JSON", path.display()))?;
    let Value::Object(map) = value else { bail!("config {} must hold a JSON object", path.display()) };
    let mut injected = Vec::new();
    for (key, v) in &map {
        if key == "command" || key == "config" {
            continue;
        }
        injected.extend(flag_tokens(key, v)?);
    }
    let pos = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let mut out = args;
    let at = match pos {
        Some(p) => p + 1,
        None => match map.get("command").and_then(Value::as_str) {
            Some(cmd) if SUBCOMMANDS.contains(&cmd) => {
                out.push(cmd.into());
                out.len()
            }
            _ => bail!("no subcommand given on the command line or in the config"),
        },
    };
    let tail = out.split_off(at);
    out.extend(injected.into_iter().map(OsString::from));
    out.extend(tail);
    Ok(out)
}
