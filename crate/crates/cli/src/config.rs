//! Key-value config files.
//!
//! One `key = value` per line, keys spelled like the long flags without
//! the leading dashes. `#` starts a comment. Boolean flags take `true` or
//! `false`. Entries are spliced in right after the subcommand, so flags on
//! the command line come later and win.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", i + 1);
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') {
            bail!("config line {}: bad key {k:?}", i + 1);
        }
        if k == "config" {
            bail!("config line {}: config files cannot include other config files", i + 1);
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

fn to_flags(pairs: &[(String, String)]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    out
}

/// Returns `args` with the contents of any `--config FILE` spliced in.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            path = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (path, sub) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config file {path}"))?;
    let flags = to_flags(&parse(&text)?);
    let mut out = args[..=sub].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let p = parse("# sweep\nscenario = cumulative\nn = 8,16 # sizes\n\nfit = true\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("scenario".into(), "cumulative".into()),
                ("n".into(), "8,16".into()),
                ("fit".into(), "true".into()),
            ]
        );
        assert!(parse("oops").is_err());
        assert!(parse("config = x").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.conf");
        fs::write(&f, "seed = 3\ntiming = false\nfit = true\n").unwrap();
        let args: Vec<String> = ["metabio", "--config", f.to_str().unwrap(), "evolve", "--seed", "9"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand(args).unwrap();
        assert_eq!(&out[3..], ["evolve", "--seed=3", "--fit", "--seed", "9"]);
    }
}
