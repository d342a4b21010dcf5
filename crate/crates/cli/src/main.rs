use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use qcis_cli::commands::{dispatch, SUBCOMMANDS};
use qcis_cli::config::KNOWN_KEYS;
use qcis_cli::output::RunContext;
use qcis_cli::{CliError, Config};

fn cli() -> Command {
    let common = [
        Arg::new("config").long("config").value_name("PATH").help("flat key = value config file"),
        Arg::new("seed").long("seed").value_name("U64").help("master random seed"),
        Arg::new("out").long("out").value_name("DIR").help("output directory (default: out)"),
        Arg::new("threads").long("threads").value_name("N").help("worker threads"),
    ];
    let key_args: Vec<Arg> = KNOWN_KEYS
        .iter()
        .filter(|(k, _)| !matches!(*k, "seed" | "threads"))
        .map(|(k, help)| {
            Arg::new(*k)
                .long(*k)
                .value_name("VALUE")
                .help(*help)
                .help_heading("Config keys")
        })
        .collect();
    let mut cmd = Command::new("qcis")
        .about("Learn Gaussian optical states through qubit transduction and classical shadows")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(Command::new(*name).about(*about).args(common.clone()).args(key_args.clone()));
    }
    cmd
}

fn build_config(m: &ArgMatches) -> Result<Config, CliError> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => Config::load(&PathBuf::from(p))?,
        None => Config::default(),
    };
    for (k, _) in KNOWN_KEYS {
        if let Ok(Some(v)) = m.try_get_one::<String>(k) {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}

fn execute(name: &str, m: &ArgMatches) -> Result<i32, CliError> {
    let cfg = build_config(m)?;
    let seed = cfg.get_or("seed", 0u64)?;
    if let Some(t) = cfg.get::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = m.get_one::<String>("out").map(String::as_str).unwrap_or("out");
    let mut ctx = RunContext::new(out, seed)?;
    let outcome = dispatch(name, &cfg, &mut ctx)?;
    print!("{}", outcome.report);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match execute(name, sub) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qcis {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
