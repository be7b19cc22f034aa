//! Library behind the `remest` binary: argument handling, commands,
//! output encodings and validation suites.

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod output;
pub mod reference;
pub mod suites;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

use args::{Cli, Command, Format, Suite};
use output::OutputRecord;
use suites::{McSettings, Status};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags or an invalid model instance.
    Usage(String),
    /// A solver or the simulator failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<remest_core::Error> for CliError {
    fn from(e: remest_core::Error) -> Self {
        match e {
            remest_core::Error::InvalidArgument(_) | remest_core::Error::InvalidSpec(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Exit status plus everything the process would print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Outcome {
    fn error(e: &CliError) -> Self {
        Outcome {
            code: e.exit_code(),
            stdout: Vec::new(),
            stderr: format!("{e}\n"),
        }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = args.into_iter().map(Into::into);
    let expanded = match argfile::expand_args_from(args, argfile::parse_fromfile, argfile::PREFIX) {
        Ok(a) => a,
        Err(e) => return Outcome::error(&CliError::Usage(format!("reading argument file: {e}"))),
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: Vec::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_SUCCESS,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                }
            };
        }
    };
    let pool = match (cli.output.serial, cli.output.threads) {
        (true, _) => Some(1),
        (false, Some(0)) => {
            return Outcome::error(&CliError::Usage("--threads must be at least 1".into()))
        }
        (false, Some(n)) => Some(n),
        (false, None) => None,
    };
    let parallel = !cli.output.serial;
    let execute = || execute(&cli, parallel);
    let result = match pool {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(execute),
            Err(e) => Err(CliError::Numerical(format!("starting thread pool: {e}"))),
        },
        None => execute(),
    };
    match result {
        Err(e) => Outcome::error(&e),
        Ok((record, code, stderr)) => {
            let bytes = match cli.output.format {
                Format::Csv => record.to_csv(),
                Format::Json => record.to_json(),
            };
            match &cli.output.out {
                None => Outcome {
                    code,
                    stdout: bytes,
                    stderr,
                },
                Some(path) => match std::fs::write(path, &bytes) {
                    Ok(()) => Outcome {
                        code,
                        stdout: Vec::new(),
                        stderr,
                    },
                    Err(e) => {
                        Outcome::error(&CliError::Usage(format!("writing {}: {e}", path.display())))
                    }
                },
            }
        }
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::TableI => "tableI",
        Suite::ClosedForms => "closed-forms",
        Suite::Scaling => "scaling",
        Suite::Renewal => "renewal",
        Suite::Dp => "dp",
        Suite::Baselines => "baselines",
        Suite::All => "all",
    }
}

/// Record, exit status and diagnostics for a parsed invocation.
fn execute(cli: &Cli, parallel: bool) -> Result<(OutputRecord, i32, String), CliError> {
    match &cli.command {
        Command::Table(a) => Ok((commands::cmd_table(a)?, EXIT_SUCCESS, String::new())),
        Command::Curve(a) => {
            let (rec, warnings) = commands::cmd_curve(a)?;
            let stderr: String = warnings.iter().map(|w| format!("{w}\n")).collect();
            Ok((rec, EXIT_SUCCESS, stderr))
        }
        Command::Solve(a) => Ok((commands::cmd_solve(a)?, EXIT_SUCCESS, String::new())),
        Command::Simulate(a) => Ok((
            commands::cmd_simulate(a, parallel)?,
            EXIT_SUCCESS,
            String::new(),
        )),
        Command::Validate(a) => {
            if a.reps == 0 || a.horizon == 0 {
                return Err(CliError::Usage(
                    "--reps and --horizon must be at least 1".into(),
                ));
            }
            let mc = McSettings {
                seed: a.seed,
                replications: a.reps,
                horizon: a.horizon,
                parallel,
            };
            let checks = suites::run_suite(a.suite, &mc);
            let command = format!(
                "validate --suite {} --seed {} --reps {} --horizon {}",
                suite_name(a.suite),
                a.seed,
                a.reps,
                a.horizon
            );
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| c.status == Status::Fail)
                .map(|c| format!("FAIL {} / {}: {}\n", c.suite, c.name, c.claim))
                .collect();
            let code = if failed.is_empty() {
                EXIT_SUCCESS
            } else {
                EXIT_VALIDATION
            };
            Ok((
                suites::checks_to_record(command, &checks, &mc),
                code,
                failed.concat(),
            ))
        }
    }
}
