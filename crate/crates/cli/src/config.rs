//! Scenario files: a JSON document listing subcommand invocations.
//!
//! ```json
//! {"version": 1, "scenarios": [
//!   {"name": "bce", "command": "trajectory", "output": "out/bce.csv",
//!    "parameters": {"u0": 0.5, "norm": 0.7, "p": 0.5, "t_end": 10}}
//! ]}
//! ```
//!
//! Each parameter becomes the flag of the same name (underscores read as
//! dashes), so a scenario accepts exactly what the subcommand accepts.
//! Relative paths are resolved against the directory of the config file.
//! With `--out-dir`, outputs (`output` and `dataset_out`) go there instead,
//! while inputs keep resolving against the config file.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::commands::Command;
use crate::fail::invalid;
use crate::output::Format;

pub const CONFIG_VERSION: u32 = 1;

const INPUT_PATHS: [&str; 2] = ["dataset", "dataset_in"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: u32,
    #[serde(default)]
    scenarios: Vec<ScenarioEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    name: String,
    command: String,
    #[serde(default)]
    parameters: Map<String, Value>,
    output: PathBuf,
    #[serde(default)]
    format: Format,
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct ScenarioLine {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
}

fn resolve(base: &Path, p: &str) -> String {
    let path = Path::new(p);
    if path.is_absolute() {
        p.to_string()
    } else {
        base.join(path).display().to_string()
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Command-line words equivalent to one scenario entry.
fn to_args(entry: &ScenarioEntry, inputs: &Path, outputs: &Path) -> Result<Vec<String>> {
    let name = &entry.name;
    let mut params = entry.parameters.clone();
    let mut args = vec![entry.command.clone()];
    if entry.command == "simulate" {
        match params.remove("experiment") {
            Some(Value::String(e)) => args.push(e),
            _ => return Err(invalid(format!("scenario '{name}': simulate needs a string parameter `experiment`"))),
        }
    }
    for (key, value) in &params {
        if key == "out" || key == "format" {
            return Err(invalid(format!(
                "scenario '{name}': set `{}` on the scenario, not in parameters",
                if key == "out" { "output" } else { "format" }
            )));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            Value::Bool(true) => {
                args.push(flag);
                continue;
            }
            Value::Bool(false) => continue,
            Value::Array(items) => items
                .iter()
                .map(scalar)
                .collect::<Option<Vec<_>>>()
                .map(|v| v.join(",")),
            Value::String(s) if key == "dataset_out" => Some(resolve(outputs, s)),
            Value::String(s) if INPUT_PATHS.contains(&key.as_str()) => Some(resolve(inputs, s)),
            v => scalar(v),
        }
        .ok_or_else(|| invalid(format!("scenario '{name}': parameter `{key}` must be a number, string, boolean or list")))?;
        args.push(format!("{flag}={text}"));
    }
    args.push(format!("--out={}", resolve(outputs, &entry.output.display().to_string())));
    args.push(format!("--format={}", entry.format.as_str()));
    Ok(args)
}

/// Parses and validates every scenario, failing on the first bad one.
pub fn load_config(path: &Path, out_dir: Option<&Path>) -> Result<Vec<Scenario>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ConfigFile =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if file.version != CONFIG_VERSION {
        return Err(invalid(format!(
            "{}: unsupported version {} (expected {CONFIG_VERSION})",
            path.display(),
            file.version
        )));
    }
    let config_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_base = out_dir.map_or_else(|| config_dir.clone(), Path::to_path_buf);
    let mut names = HashSet::new();
    let mut outputs = HashSet::new();
    let mut scenarios = Vec::with_capacity(file.scenarios.len());
    for entry in &file.scenarios {
        let name = &entry.name;
        if !names.insert(name.clone()) {
            return Err(invalid(format!("duplicate scenario name '{name}'")));
        }
        let args = to_args(entry, &config_dir, &out_base)?;
        let line = ScenarioLine::try_parse_from(&args).map_err(|e| {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default();
            invalid(format!("scenario '{name}': {}", first.trim_start_matches("error: ")))
        })?;
        let command = line.command;
        let out = command.output().out.clone().expect("always set from the scenario");
        if !outputs.insert(out.clone()) {
            return Err(invalid(format!("scenario '{name}': output {} is used twice", out.display())));
        }
        command
            .validate()
            .map_err(|e| invalid(format!("scenario '{name}': {e:#}")))?;
        scenarios.push(Scenario {
            name: name.clone(),
            command,
        });
    }
    Ok(scenarios)
}

/// Runs and writes one command; returns the summary line.
pub fn execute(command: &Command) -> Result<String> {
    let start = Instant::now();
    let out = command.run()?;
    command.output().write(&out.table)?;
    let mut line = format!(
        "{}: {} rows -> {} in {:.3}s",
        command.name(),
        out.table.len(),
        command.output().destination(),
        start.elapsed().as_secs_f64()
    );
    if let Some(note) = out.note {
        line.push_str("; ");
        line.push_str(&note);
    }
    Ok(line)
}

/// Runs all scenarios in parallel. Summaries are printed in file order;
/// the first failure is returned after every scenario has finished.
pub fn run_scenarios(scenarios: &[Scenario]) -> Result<()> {
    let start = Instant::now();
    let results: Vec<Result<String>> = scenarios.par_iter().map(|s| execute(&s.command)).collect();
    let mut first_err = None;
    for (s, r) in scenarios.iter().zip(results) {
        match r {
            Ok(line) => eprintln!("[{}] {line}", s.name),
            Err(e) => {
                eprintln!("[{}] failed: {e:#}", s.name);
                first_err.get_or_insert(e.context(format!("scenario '{}'", s.name)));
            }
        }
    }
    eprintln!(
        "ran {} scenarios in {:.3}s",
        scenarios.len(),
        start.elapsed().as_secs_f64()
    );
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
