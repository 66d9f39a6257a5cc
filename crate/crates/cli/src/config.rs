//! `--config FILE`: `key = value` lines merged into the command line.
//!
//! Each line becomes `--key value` and is placed right after the
//! subcommand path, ahead of the user's own flags, so an explicit flag
//! overrides the file. `true`/`false` values toggle switches. Keys are
//! checked by the argument parser, so unknown keys are rejected there.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

const SUBCOMMANDS: &[&str] = &["construct", "scan", "estimate", "verify", "sweep"];
const GLOBAL_WITH_VALUE: &[&str] = &["--out", "--format", "--workers", "--max-precision", "--config"];
const VERIFY_TARGETS: &[&str] = &["tc", "cond1", "lemmaA", "lemmaB", "relations", "jarnik"];

/// Finds `--config FILE` or `--config=FILE`.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key = value", no + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k.contains(char::is_whitespace) {
            return Err(format!("config line {}: bad key {k:?}", no + 1));
        }
        if k == "config" {
            return Err(format!("config line {}: nested config files are not supported", no + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn to_flags(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

/// Position right after the subcommand path (`verify` takes a target).
fn insertion_point(args: &[OsString]) -> Option<usize> {
    let mut pos = None;
    let mut k = 1;
    while k < args.len() {
        let s = args[k].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            k += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&s.as_ref()) {
            pos = Some(k);
            break;
        }
        k += 1;
    }
    let pos = pos?;
    if args[pos] == "verify" {
        if let Some(next) = args.get(pos + 1) {
            if VERIFY_TARGETS.contains(&next.to_string_lossy().as_ref()) {
                return Some(pos + 2);
            }
        }
    }
    Some(pos + 1)
}

/// Returns the argument list with config entries spliced in.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let flags = to_flags(&parse_config(&text)?);
    let Some(at) = insertion_point(&args) else {
        return Ok(args);
    };
    let mut out = args[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_lines() {
        let c = parse_config("# comment\nmu = 7\n\nR=12/5\nverify = true\n").unwrap();
        assert_eq!(
            c,
            vec![
                ("mu".to_string(), "7".to_string()),
                ("R".to_string(), "12/5".to_string()),
                ("verify".to_string(), "true".to_string())
            ]
        );
        assert!(parse_config("novalue").is_err());
        assert!(parse_config("--mu = 3").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let args = os(&["dioph", "verify", "tc", "--mu", "9"]);
        assert_eq!(insertion_point(&args), Some(3));
        let flags = to_flags(&[("mu".into(), "7".into()), ("verify".into(), "true".into())]);
        assert_eq!(flags, os(&["--mu", "7", "--verify"]));
        assert_eq!(insertion_point(&os(&["dioph", "--workers", "2", "scan"])), Some(4));
        assert_eq!(insertion_point(&os(&["dioph", "--out", "scan", "scan"])), Some(4));
    }
}
