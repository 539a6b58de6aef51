mod args;
mod commands;
mod output;
mod settings;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Verb};
use settings::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] sos_rates::scenarios::ScenarioError),
    #[error(transparent)]
    Certify(#[from] sos_rates::certify::CertifyError),
    #[error(transparent)]
    Oracle(#[from] sos_rates::oracle::OracleError),
    #[error("solver: {0}")]
    Solver(#[from] sos_rates::certsearch::CertSearchError),
    #[error("infeasible SDP: {0}")]
    Infeasible(String),
    #[error("numerical trouble: {0}")]
    NumericalTrouble(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 configuration, 3 infeasible SDP, 4 numerical trouble, 5 failed
    /// verification, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Scenario(_) | CliError::Certify(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::NumericalTrouble(_) | CliError::Solver(_) => 4,
            CliError::Verification(_) => 5,
            CliError::Oracle(_) | CliError::Io { .. } => 1,
        }
    }
}

fn execute(cli: &Cli) -> Result<Option<CliError>, CliError> {
    let flags = &cli.flags;
    let config = flags
        .config
        .as_ref()
        .map(|p| fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source }))
        .transpose()?;
    let settings = Settings::from_flags(flags, config.as_deref())?;
    let outcome = match cli.verb {
        Verb::Rate => commands::rate(&settings, flags)?,
        Verb::Verify => commands::verify(&settings, flags)?,
        Verb::Sweep => commands::sweep(&settings, flags)?,
        Verb::Simulate => commands::simulate(&settings, flags)?,
    };
    match &flags.out {
        Some(path) => fs::write(path, &outcome.text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io { path: "stdout".into(), source })?;
        }
    }
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) | Err(failure) => {
            eprintln!("sosrate: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_distinguish_failure_kinds() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Infeasible("x".into()).exit_code(), 3);
        assert_eq!(CliError::NumericalTrouble("x".into()).exit_code(), 4);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 5);
    }
}
