//! `gadgetlab` command-line driver. Each subcommand reads its keys from
//! defaults, an optional `--config` file and `--key=value` overrides (in that
//! order of precedence), runs one experiment and writes CSV files plus a
//! JSON manifest into `$GADGETLAB_OUT` (default: the current directory).
//!
//! Exit codes: 0 success, 1 runtime or domain error, 2 configuration error.

mod commands;
mod output;
mod schema;

use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

use output::Writer;
use schema::{subcommands, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Run(#[from] gadgetlab::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

fn cli() -> Command {
    let mut cmd = Command::new("gadgetlab")
        .about("Perturbative gadget and ferromagnet-mediated toric code experiments")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in subcommands() {
        let mut c = Command::new(sub.name).about(sub.about).arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("FILE")
                .help("flat `key = value` file; command-line keys override it"),
        );
        for k in sub.keys {
            let long: &'static str = Box::leak(k.name.replace('_', "-").into_boxed_str());
            let mut arg = Arg::new(k.name)
                .long(long)
                .value_name(k.unit)
                .action(ArgAction::Set)
                .help(format!("{} [{}] (default {})", k.help, k.unit, k.default));
            if long != k.name {
                arg = arg.alias(k.name);
            }
            c = c.arg(arg);
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

fn run() -> Result<(), CliError> {
    let matches = cli().get_matches();
    let (name, sub_m) = matches.subcommand().expect("subcommand required");
    let sub = subcommands()
        .into_iter()
        .find(|s| s.name == name)
        .expect("known subcommand");

    let file = match sub_m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            Some((path.clone(), text))
        }
        None => None,
    };
    let overrides: Vec<(&'static str, String)> = sub
        .keys
        .iter()
        .filter_map(|k| sub_m.get_one::<String>(k.name).map(|v| (k.name, v.clone())))
        .collect();
    let params = Params::resolve(
        sub.keys,
        file.as_ref().map(|(p, t)| (p.as_str(), t.as_str())),
        &overrides,
    )?;

    let seed = sub
        .keys
        .iter()
        .any(|k| k.name == "seed")
        .then(|| params.u64("seed"))
        .transpose()?;
    let mut out = Writer::new(name, params.record(), seed)?;
    match name {
        "gadget-verify" => commands::gadget_verify(&params, &mut out)?,
        "gadget-sweep" => commands::gadget_sweep(&params, &mut out)?,
        "susceptibility" => commands::susceptibility(&params, &mut out)?,
        "coupling-matrix" => commands::coupling(&params, &mut out)?,
        "thermo" => commands::thermo(&params, &mut out)?,
        "metropolis-fig4" => commands::metropolis(&params, &mut out)?,
        "backaction" => commands::backaction(&params, &mut out)?,
        other => unreachable!("unhandled subcommand {other}"),
    }
    out.finish()
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gadgetlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
