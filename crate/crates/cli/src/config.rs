//! `--config path` support: `key=value` lines are spliced into the argument
//! list right after the subcommand, so flags given on the command line win.

use std::fs;

use anyhow::{Context, Result};
use clap::CommandFactory;
use solvency_core::Error;

use crate::Cli;

/// Returns `args` with the config file's settings inserted.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read config file {path}"))?;
    let Some(sub_pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&args[sub_pos]) else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!("{path}:{}: expected key=value", lineno + 1)).into());
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let known = |c: &clap::Command| c.get_arguments().any(|a| a.get_long() == Some(key.as_str()));
        if !known(sub) {
            if cmd.get_subcommands().any(known) {
                // belongs to another subcommand
                continue;
            }
            return Err(Error::Parse(format!("{path}:{}: unknown key {key:?}", lineno + 1)).into());
        }
        match value {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            _ => {
                injected.push(format!("--{key}"));
                injected.push(value.to_string());
            }
        }
    }
    let mut out = args[..=sub_pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_pos + 1..]);
    Ok(out)
}

fn subcommand_position(args: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            i += 2;
        } else if args[i].starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}
