//! Command implementations behind the `microagg` binary.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use microagg::Algorithm;

pub mod anonymize;
pub mod bench;
pub mod synth;
pub mod verify;

#[derive(Debug, Parser)]
#[command(
    name = "microagg",
    version,
    about = "k-anonymous, t-close microaggregation of numerical CSV data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anonymize a CSV file and write the release plus a JSON report.
    Anonymize(RunConfig),
    /// Generate a synthetic data set with a chosen QI/confidential correlation.
    Synth(SynthArgs),
    /// Check a release against its original for k-anonymity and t-closeness.
    Verify(VerifyArgs),
    /// Run a k x t x algorithm grid and write one CSV row per cell.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Original data, CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Roles file with `column=qi|confidential|ignore` lines.
    #[arg(long)]
    pub roles: PathBuf,
    #[arg(long, default_value = "tfirst")]
    pub algorithm: Algorithm,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: f64,
    /// Recorded in the report; the algorithms themselves are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Anonymized CSV, with a trailing cluster_id column.
    #[arg(long)]
    pub output: PathBuf,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Skip records with blank cells instead of failing.
    #[arg(long)]
    pub drop_missing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1080)]
    pub n: usize,
    /// Number of quasi-identifier columns.
    #[arg(long, default_value_t = 2)]
    pub qi: usize,
    /// Target correlation between the confidential column and the QIs.
    #[arg(long, default_value_t = 0.52)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write the matching roles file.
    #[arg(long)]
    pub roles: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Original data.
    #[arg(long)]
    pub input: PathBuf,
    /// Release written by `anonymize`.
    #[arg(long)]
    pub anonymized: PathBuf,
    #[arg(long)]
    pub roles: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: f64,
    /// Must match the flag used when anonymizing.
    #[arg(long)]
    pub drop_missing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Data file; synthetic data is generated when omitted.
    #[arg(long, requires = "roles")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub roles: Option<PathBuf>,
    #[arg(long)]
    pub drop_missing: bool,
    #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
    pub grid_k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25")]
    pub grid_t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "merge,kfirst,tfirst")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 1080)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub qi: usize,
    #[arg(long, default_value_t = 0.52)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Aggregate CSV of run reports.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<microagg::Error> for Failure {
    fn from(e: microagg::Error) -> Self {
        use microagg::Error as E;
        let msg = e.to_string();
        match e {
            E::Parameter { .. } | E::Roles(_) => Failure::Usage(msg),
            E::Io { .. }
            | E::Csv(_)
            | E::EmptyTable
            | E::RowWidth { .. }
            | E::UnknownColumn(_)
            | E::MissingColumn(_)
            | E::Parse { .. }
            | E::MissingValue { .. }
            | E::NoSurvivingRows => Failure::Io(msg),
            _ => Failure::Verification(msg),
        }
    }
}

pub(crate) fn io_failure(what: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{what}: {e}"))
}

pub(crate) fn emit(out: &mut dyn Write, line: std::fmt::Arguments) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| io_failure("stdout", e))
}

/// Checks shared by every command that takes k and t.
pub(crate) fn check_k_t(k: usize, t: f64) -> Result<(), Failure> {
    if k < 2 {
        return Err(Failure::Usage(format!("invalid parameter k: need k >= 2, got {k}")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Failure::Usage(format!("invalid parameter t: need 0 < t <= 1, got {t}")));
    }
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Anonymize(cfg) => anonymize::cmd_anonymize(&cfg, out),
        Command::Synth(args) => synth::cmd_synth(&args, out),
        Command::Verify(args) => verify::cmd_verify(&args, out),
        Command::Bench(args) => bench::cmd_bench(&args, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_errors_are_usage_errors() {
        let e: Failure = "x".parse::<Algorithm>().unwrap_err().into();
        assert_eq!(e.exit_code(), 1);
        assert!(check_k_t(1, 0.1).unwrap_err().to_string().contains("parameter k"));
        assert!(check_k_t(2, 0.0).is_err());
        assert!(check_k_t(2, 1.0).is_ok());
    }

    #[test]
    fn input_problems_are_io_errors() {
        let e: Failure = microagg::Error::MissingColumn("cluster_id".into()).into();
        assert_eq!(e.exit_code(), 3);
        let e: Failure = microagg::Error::InvalidPartition("gap".into()).into();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "microagg",
            "bench",
            "--grid-k",
            "2,5",
            "--grid-t",
            "0.1,0.2",
            "--algorithms",
            "merge",
            "--output",
            "b.csv",
        ])
        .unwrap();
        let Command::Bench(b) = cli.command else {
            panic!("expected bench")
        };
        assert_eq!(b.grid_k, [2, 5]);
        assert_eq!(b.grid_t, [0.1, 0.2]);
        assert_eq!(b.algorithms, [Algorithm::Merge]);
        assert!(b.input.is_none());
    }
}
