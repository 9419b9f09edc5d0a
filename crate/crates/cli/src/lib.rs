//! The `pq-sap` command line: key generation, sending, scanning and the
//! scan-time benchmark.

pub mod bench;
mod commands;
pub mod error;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pq_sap::lattice::ParamSet;
use pq_sap::sap::ViewTagWidth;

pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "pq-sap", version, about = "Post-quantum stealth addresses on LWE, Ring-LWE and Module-LWE")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a recipient: private keys, viewing key and public meta-address
    Keygen(KeygenArgs),
    /// Pay to a meta-address: append an announcement and print the stealth address
    Send(SendArgs),
    /// Find announcements addressed to a viewing key
    Scan(ScanArgs),
    /// Time registry scans over synthetic fixtures
    Bench(BenchArgs),
    /// Run the built-in consistency checks
    Selftest(SelftestArgs),
}

fn parse_params(s: &str) -> Result<ParamSet, String> {
    ParamSet::by_name(s).map_err(|e| e.to_string())
}

fn parse_width(s: &str) -> Result<ViewTagWidth, String> {
    s.parse().map_err(|e: pq_sap::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct KeygenArgs {
    #[arg(long, env = "PQSAP_PARAMSET", default_value = "kyber512", value_parser = parse_params)]
    pub paramset: ParamSet,
    /// Seed string; omit for fresh OS randomness
    #[arg(long, env = "PQSAP_SEED")]
    pub seed: Option<String>,
    /// Output prefix; writes PREFIX.meta.toml, PREFIX.view.toml, PREFIX.private.toml
    #[arg(long, env = "PQSAP_OUT", default_value = "pqsap")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SendArgs {
    #[arg(long, env = "PQSAP_META")]
    pub meta: PathBuf,
    /// Registry file; created if missing
    #[arg(long, env = "PQSAP_REGISTRY")]
    pub registry: PathBuf,
    /// View tag mode; defaults to the registry's, or 1byte for a new registry
    #[arg(long, env = "PQSAP_VIEW_TAG", value_parser = parse_width)]
    pub view_tag: Option<ViewTagWidth>,
    /// Entropy seed string; omit for fresh OS randomness
    #[arg(long, env = "PQSAP_SEED")]
    pub seed: Option<String>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Viewing-key or private key file
    #[arg(long, env = "PQSAP_VIEWING_KEY")]
    pub viewing_key: PathBuf,
    #[arg(long, env = "PQSAP_REGISTRY")]
    pub registry: PathBuf,
    /// Index of the first announcement to examine
    #[arg(long, env = "PQSAP_CURSOR", default_value_t = 0)]
    pub cursor: u64,
    #[arg(long, env = "PQSAP_THREADS", default_value_t = 1)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, env = "PQSAP_PARAMSET", default_value = "kyber512", value_parser = parse_params)]
    pub paramset: ParamSet,
    /// Comma-separated registry sizes
    #[arg(
        long,
        env = "PQSAP_ANNOUNCEMENTS",
        value_delimiter = ',',
        default_value = "5000,10000,20000,40000,80000"
    )]
    pub announcements: Vec<usize>,
    #[arg(long, env = "PQSAP_VIEW_TAG", default_value = "1byte", value_parser = parse_width)]
    pub view_tag: ViewTagWidth,
    #[arg(long, env = "PQSAP_REPEATS", default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, env = "PQSAP_SEED", default_value = "bench")]
    pub seed: String,
    #[arg(long, env = "PQSAP_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, env = "PQSAP_FORMAT", value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write the fixture registry here (single size only)
    #[arg(long, env = "PQSAP_REGISTRY")]
    pub registry: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<selftest::Fault>,
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
