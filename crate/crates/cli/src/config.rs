//! `--config FILE`: flat `key = value` defaults spliced in ahead of the
//! command-line flags, which therefore take precedence.

use std::fs;

use clap::Command;

fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("config line {}: empty key or value", i + 1));
        }
        pairs.push((key, value.to_string()));
    }
    Ok(pairs)
}

/// Removes `--config FILE` from `argv` and inserts the file's entries as
/// `--key=value` right after the subcommand name.
pub fn expand(argv: Vec<String>, cli: &Command) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| format!("cannot read config '{path}': {e}"))?;
    let pairs = parse(&text)?;
    let Some(pos) = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 1)
    else {
        return Err("--config given without a subcommand".into());
    };
    let name = rest[pos].clone();
    let sub = cli
        .find_subcommand(&name)
        .ok_or_else(|| format!("unknown subcommand '{name}'"))?;
    let known: Vec<&str> = sub
        .get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "config" && *l != "help")
        .collect();
    let mut inserted = Vec::with_capacity(pairs.len());
    for (key, value) in pairs {
        if !known.contains(&key.as_str()) {
            return Err(format!("unknown config key '{key}' for '{name}'"));
        }
        inserted.push(format!("--{key}={value}"));
    }
    rest.splice(pos + 1..pos + 1, inserted);
    Ok(rest)
}
