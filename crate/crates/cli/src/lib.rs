//! Command-line front end for `wsl-core`.
//!
//! [`execute`] parses arguments, runs one command and returns its exit code
//! together with everything it would print, so that the binary stays a thin
//! wrapper and the commands can be tested in-process.

mod commands;
mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use wsl_core::Error;

pub use commands::figure_codes;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code when a self-test check fails.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for usage and validation errors.
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding every enumeration cap.
pub const ENUM_CAP_ENV: &str = "WSL_ENUM_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "wsl",
    version,
    about = "Wiretap secrecy analysis for polar, PAC and multi-kernel codes on the binary erasure wiretap channel"
)]
pub struct Cli {
    /// Worker threads for Monte-Carlo runs (default: all cores). Never
    /// changes the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    AllPast,
    MessagePast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Bound1,
    Bound2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a generator matrix and print it with its rank and row weights.
    Construct {
        /// Spec file, bundled spec name (e.g. n128_mkpac) or inline JSON.
        #[arg(long)]
        spec: String,
    },
    /// Per-index bit-channel erasure probabilities and TVDs.
    Bitchannels {
        #[arg(long, required_unless_present = "figure")]
        spec: Option<String>,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
        #[arg(long, default_value_t = 2023)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ConditioningArg::AllPast)]
        conditioning: ConditioningArg,
        /// 1-based message positions for message-past conditioning. If
        /// omitted, the greedy selection at --delta is used.
        #[arg(long, value_delimiter = ',')]
        message_set: Option<Vec<usize>>,
        /// Leakage budget used to pick the message set when none is given.
        #[arg(long, default_value_t = 0.001)]
        delta: f64,
        /// Enumerate all erasure patterns instead of sampling.
        #[arg(long)]
        exact: bool,
        /// Order rows by ascending TVD.
        #[arg(long)]
        sorted: bool,
        /// Emit the data of a published figure (only 1 is a bit-channel figure).
        #[arg(long, conflicts_with = "spec")]
        figure: Option<u8>,
    },
    /// Rate table: converse, random-coding achievability, normal
    /// approximation and greedy code rates.
    Rates {
        /// Code specs; one row per spec. Without specs, only the
        /// code-independent bounds are reported for each --n.
        #[arg(long)]
        spec: Vec<String>,
        /// Blocklengths for code-independent rows.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        #[arg(long, default_value_t = 0.001)]
        delta: f64,
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
        #[arg(long, default_value_t = 2023)]
        seed: u64,
        #[arg(long)]
        exact: bool,
        /// Select with `p̃ - 3·std_err` instead of `p̃`.
        #[arg(long)]
        conservative: bool,
        #[arg(long, value_enum, default_value_t = BoundArg::Bound2)]
        bound: BoundArg,
        /// Reproduce a published rate figure: 2 (δ = 0.001) or 3 (δ = 0.01).
        #[arg(long, conflicts_with_all = ["spec", "n", "delta"])]
        figure: Option<u8>,
        /// Floor negative normal-approximation rates at zero.
        #[arg(long)]
        clamp: bool,
    },
    /// Exact leakage of a wiretap code by enumerating erasure patterns.
    LeakageExact {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        /// 1-based message positions. If omitted, the greedy selection at
        /// --delta from exact bit-channel probabilities is used.
        #[arg(long, value_delimiter = ',')]
        message_set: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.001)]
        delta: f64,
    },
    /// Raw evaluation of g_n, h_n and the converse/achievability bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        /// Evaluate g_n and h_n at these log2(γ) values instead of the
        /// per-k table.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        log2_gamma: Vec<f64>,
    },
    /// Run the oracle checks.
    Selftest {
        /// Only the n ≤ 8 subset.
        #[arg(long)]
        quick: bool,
        /// Kernel fixture to verify instead of the bundled one.
        #[arg(long)]
        kernel_fixture: Option<PathBuf>,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, message: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    run(cli)
}

/// Runs an already parsed command line.
pub fn run(cli: Cli) -> Outcome {
    let result = match cli.threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli.command)),
            Err(e) => Err(CliError::usage(e.to_string())),
        },
        None => commands::dispatch(&cli.command),
    };
    match result {
        Ok((code, text)) => match &cli.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome {
                    code,
                    stdout: String::new(),
                    stderr: format!("wrote {}\n", path.display()),
                },
                Err(e) => Outcome::error(EXIT_USAGE, format!("cannot write {}: {e}", path.display())),
            },
            None => Outcome {
                code,
                stdout: text,
                stderr: String::new(),
            },
        },
        Err(e) => Outcome::error(e.code, e.message),
    }
}
