//! `slag`: batch front end for the constant chain, the isotropic census and
//! the Harish-Chandra quadrature.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "slag", version, about = "Exponent chain, isotropic census and Harish-Chandra decay for SO(p,q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact constant chain ending in the two δ variants.
    Constants(ConstantsArgs),
    /// Count primitive isotropic vectors with bounded projection norm.
    Census(CensusArgs),
    /// Sample Ξ(a_t) and fit its decay rate.
    Xi(XiArgs),
    /// Restricted root datum of so(p,q).
    Roots(RootsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Both,
    Section5,
    Eq22,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    /// Integrability exponent p(π); overrides the table.
    #[arg(long = "p-pi")]
    p_pi: Option<u32>,
    /// JSON array of [p, q, p_pi] triples added to the built-in table.
    #[arg(long = "pi-table")]
    pi_table: Option<std::path::PathBuf>,
    /// Exponent of the cusp integrability, as "num/den".
    #[arg(long = "p-cusp")]
    p_cusp: Option<String>,
    #[arg(long, value_enum, default_value_t = Variant::Both)]
    variant: Variant,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Lattice as `+`-joined blocks, e.g. "2U", "U+E8m", "3U+2E8m".
    #[arg(long, default_value = "2U")]
    lattice: String,
    /// Comma-separated ascending bounds.
    #[arg(long = "v", value_delimiter = ',', conflicts_with = "vmax")]
    v: Option<Vec<f64>>,
    /// Largest bound; with --vpoints, halves down from it.
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long, default_value_t = 1, requires = "vmax")]
    vpoints: u32,
    /// Explicit plane, e.g. "e1+e2,e3+e4"; overrides --seed.
    #[arg(long)]
    plane: Option<String>,
    /// Seed for a generic plane.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time in elapsed_ms (breaks byte-identical reruns).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct XiArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    #[arg(long = "t-min", default_value_t = 6.0)]
    t_min: f64,
    #[arg(long = "t-max", default_value_t = 12.0)]
    t_max: f64,
    #[arg(long, default_value_t = 13)]
    samples: usize,
    /// Quadrature nodes per circle.
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RootsArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure and the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// Validation error attributed to a flag; exit code 2.
    pub fn flag(flag: &str, message: impl std::fmt::Display) -> Self {
        Self { code: 2, message: format!("{flag}: {message}") }
    }

    pub fn runtime(message: impl std::fmt::Display) -> Self {
        Self { code: 1, message: message.to_string() }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SLAG_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::flag("SLAG_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::runtime)
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (text, output) = match &cli.command {
        Command::Constants(a) => (commands::constants(a, a.output.format)?, &a.output),
        Command::Census(a) => (commands::census(a, a.output.format)?, &a.output),
        Command::Xi(a) => (commands::xi(a, a.output.format)?, &a.output),
        Command::Roots(a) => (commands::roots(a, a.output.format)?, &a.output),
    };
    output::emit(&text, output.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
