mod artifact;
mod config;
mod pipeline;

use std::process::ExitCode;

use clap::Parser;
use ils_core::ErrorKind;

use crate::config::{Cli, RunConfig, OUT_DIR_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ils_core::Error),
}

impl From<ils_core::Error> for CliError {
    fn from(e: ils_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Input => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Infeasible => 4,
            },
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(Into::into);
    let cfg = RunConfig::resolve(cli.command, cli.flags, env_out)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {:?} worker threads: {e}", cfg.threads)))?;
    let written = pool.install(|| pipeline::run(&cfg))?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ils: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
