//! `--config FILE`: flat `key = value` lines whose keys are long flag names.
//!
//! The file is turned into extra command-line flags appended after the user's
//! own, skipping every key the user already set (directly or through the other
//! flag of a rate/spread pair), so explicit flags always win.

use std::ffi::OsString;

use crate::error::CliError;

/// Flags that set the same quantity; giving one on the command line masks
/// the others in the file.
const EXCLUSIVE: [&[&str]; 3] = [
    &["borrow-rate", "borrow-spread"],
    &["repo-rate", "repo-spread"],
    &["rebate-rate", "rebate-spread"],
];

fn peers(key: &str) -> Vec<&str> {
    EXCLUSIVE
        .iter()
        .find(|group| group.contains(&key))
        .map(|group| group.to_vec())
        .unwrap_or_else(|| vec![key])
}

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(n, _)| n))
}

/// Parses the file body into `(key, value)` pairs.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage("--config", format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(CliError::usage("--config", format!("line {}: invalid key '{key}'", i + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Removes `--config FILE` from `argv` and appends the file's settings.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        match arg.to_str() {
            Some("--config") => {
                let value = iter
                    .next()
                    .ok_or_else(|| CliError::usage("--config", "missing file name"))?;
                path = Some(value);
            }
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => out.push(arg),
        }
    }
    let Some(path) = path else {
        return Ok(out);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::usage("--config", format!("cannot read {}: {e}", path.to_string_lossy())))?;

    let given: Vec<String> = out
        .iter()
        .filter_map(|a| a.to_str().and_then(flag_name).map(str::to_string))
        .collect();
    for (key, value) in parse(&text)? {
        if peers(&key).iter().any(|p| given.iter().any(|g| g == p)) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}
