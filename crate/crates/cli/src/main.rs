mod args;
mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Common};
use darwin::DarwinError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<DarwinError> for CliError {
    fn from(e: DarwinError) -> Self {
        match e {
            DarwinError::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Data(m) => ("data", m),
        };
        format!("darwin: error[{kind}]: {}", msg.replace(['\n', '\r'], " "))
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Simulate { common, .. }
        | Command::Fit { common, .. }
        | Command::Stability { common, .. }
        | Command::Wald { common, .. }
        | Command::Calibrate { common, .. }
        | Command::Theory { common, .. }
        | Command::McTable { common, .. }
        | Command::McPower { common, .. }
        | Command::McHist { common, .. }
        | Command::CltCheck { common, .. }
        | Command::DarFit { common, .. }
        | Command::Volatility { common, .. }
        | Command::Man { common } => common,
    }
}

fn configure_workers(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("DARWIN_WORKERS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("DARWIN_WORKERS must be a positive integer (got '{v}')")))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("worker count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = common(&cli.command).clone();
    configure_workers(common.workers)?;
    let start = Instant::now();
    let report = commands::dispatch(cli.command)?;
    let wall = common.timing.then(|| start.elapsed().as_secs_f64());
    if let Some(t) = wall {
        eprintln!("darwin: wall time {t:.3} s");
    }
    let bytes = report.render(common.format, wall)?;
    output::write_out(&bytes, common.output.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            _ => {
                let rendered = e.to_string();
                let first = rendered.lines().next().unwrap_or("invalid arguments");
                let msg = first.trim_start_matches("error: ").to_string();
                eprintln!("{}", CliError::Usage(msg).line());
                return ExitCode::from(1);
            }
        },
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code())
        }
    }
}
