//! `fatcantor` command line.
//!
//! Every subcommand takes its settings as `--key value` flags or from a flat
//! config file (`--config FILE`, grammar in [`config`]). The JSON report goes to
//! stdout or `--out`; CSV and JSON artifacts go to `--csv` and `--artifact`.
//!
//! Exit codes: 0 pass, 1 report-level failure, 2 usage or config error,
//! 3 resource exhaustion.

mod commands;
mod config;
mod inputs;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};
use serde_json::json;

use config::{RunConfig, COMMANDS};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Resource(m) => write!(f, "resource: {m}"),
        }
    }
}

fn cli() -> Command {
    let mut cmd = Command::new("fatcantor")
        .version(fatcantor::VERSION)
        .about("Slalom fatness, tree-condition fusion and Cantor-set translate avoidance")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in COMMANDS {
        let mut sub = Command::new(c.name).about(c.about).arg(
            Arg::new("config").long("config").value_name("FILE").help("flat key = value config file"),
        );
        for k in c.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").action(ArgAction::Set).help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn run(argv: Vec<OsString>) -> u8 {
    let matches = match cli().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let command = config::command(name).expect("registered subcommand");
    let flags: BTreeMap<String, String> = command
        .keys
        .iter()
        .filter_map(|k| sub.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    let file = match sub.get_one::<String>("config").map(fs::read_to_string).transpose() {
        Ok(f) => f,
        Err(e) => return fail(&CliError::Usage(format!("cannot read config: {e}"))),
    };
    let cfg = match RunConfig::new(command, file.as_deref(), flags) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let report = json!({
        "command": command.name,
        "version": fatcantor::VERSION,
        "configDigest": cfg.digest(),
        "config": cfg.effective(),
        "status": if outcome.passed { "PASS" } else { "FAIL" },
        "result": outcome.result,
    });
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    let writes = [("out", Some(text.clone())), ("csv", outcome.csv), ("artifact", outcome.artifact)];
    for (key, body) in writes {
        if let (Some(path), Some(body)) = (cfg.get(key), body) {
            if let Err(e) = fs::write(inputs::out_path(path), body) {
                return fail(&CliError::Resource(format!("cannot write {path}: {e}")));
            }
        }
    }
    if cfg.get("out").is_none() {
        print!("{text}");
    }
    if outcome.passed { 0 } else { 1 }
}

fn fail(e: &CliError) -> u8 {
    eprintln!("fatcantor: {e}");
    e.code()
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
