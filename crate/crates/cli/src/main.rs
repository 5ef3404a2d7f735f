#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nftlab::darboux::{DarbouxMethod, InftOptions, SynthesisRoute};
use nftlab::forward::Scheme;
use nftlab::Mode;

#[derive(Parser, Debug)]
#[command(name = "nftlab", version, about = "Fast nonlinear Fourier transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a potential from a spectrum file
    Inft(InftArgs),
    /// Forward transform of a sampled potential
    Nft(NftArgs),
    /// Error and observed order over a sweep of N
    Convergence(ConvergenceArgs),
    /// Estimate the computational window for a spectrum
    Domain(DomainArgs),
    /// Wall-clock medians over a sweep of N
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Tr)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = LpArg::Fast)]
    pub lp: LpArg,
    #[arg(long, value_enum, default_value_t = SynthArg::Direct)]
    pub synth: SynthArg,
    #[arg(long, value_enum, default_value_t = DtArg::Cdt)]
    pub dt: DtArg,
    #[arg(long = "n-os", default_value_t = nftlab::synthesis::DEFAULT_OVERSAMPLING)]
    pub n_os: usize,
}

impl MethodArgs {
    pub fn inft_options(&self) -> InftOptions {
        InftOptions {
            n_os: self.n_os,
            route: match self.synth {
                SynthArg::Direct => SynthesisRoute::Direct,
                SynthArg::Rh => SynthesisRoute::RiemannHilbert,
            },
            lp: self.mode(),
            dt: match self.dt {
                DtArg::Cdt => DarbouxMethod::Classical,
                DtArg::Fdt => DarbouxMethod::Fast,
                DtArg::FdtPf => DarbouxMethod::FastPreconditioned,
            },
        }
    }

    pub fn mode(&self) -> Mode {
        match self.lp {
            LpArg::Seq => Mode::Sequential,
            LpArg::Fast => Mode::Fast,
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeArg::Tr => Scheme::Trapezoidal,
            SchemeArg::Ia1 => Scheme::ImplicitAdams(1),
            SchemeArg::Ia2 => Scheme::ImplicitAdams(2),
            SchemeArg::Ia3 => Scheme::ImplicitAdams(3),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scheme": self.scheme.name(),
            "lp": self.lp.to_possible_value().unwrap().get_name(),
            "synth": self.synth.to_possible_value().unwrap().get_name(),
            "dt": self.dt.to_possible_value().unwrap().get_name(),
            "n_os": self.n_os,
        })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    Tr,
    Ia1,
    Ia2,
    Ia3,
}

impl SchemeArg {
    pub fn name(self) -> &'static str {
        match self {
            SchemeArg::Tr => "tr",
            SchemeArg::Ia1 => "ia1",
            SchemeArg::Ia2 => "ia2",
            SchemeArg::Ia3 => "ia3",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpArg {
    Seq,
    Fast,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthArg {
    Direct,
    Rh,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtArg {
    Cdt,
    Fdt,
    FdtPf,
}

#[derive(Args, Debug, Clone)]
pub struct InftArgs {
    /// Spectrum JSON file
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Number of layers (samples minus one)
    #[arg(long = "N", default_value_t = 4096)]
    pub n: usize,
    /// Tail tolerance used to size the window
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Explicit window `T1,T2` instead of the estimate
    #[arg(long, value_parser = setup::parse_window)]
    pub window: Option<(f64, f64)>,
    /// Seed for QPSK symbols when the spectrum file draws them
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct NftArgs {
    /// Potential CSV (`t,re_q,im_q`) or `sech:AMP` sampled on the window
    #[arg(long)]
    pub signal: String,
    /// Number of layers for a closed-form signal
    #[arg(long = "N", default_value_t = 4096)]
    pub n: usize,
    /// Window `T1,T2` for a closed-form signal
    #[arg(long, value_parser = setup::parse_window, default_value = "-30,30")]
    pub window: (f64, f64),
    /// Eigenvalue `re,im` whose norming constant is reported; repeatable
    #[arg(long = "zeta", value_parser = setup::parse_complex)]
    pub zeta: Vec<nftlab::Complex64>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ConvergenceArgs {
    /// Spectrum JSON file (inverse transform sweep)
    #[arg(long, conflicts_with = "signal", required_unless_present = "signal")]
    pub spectrum: Option<PathBuf>,
    /// `sech:AMP` closed-form potential (forward transform sweep)
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192,16384")]
    pub sweep: Vec<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long, value_parser = setup::parse_window)]
    pub window: Option<(f64, f64)>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long = "N", default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also search T by numerical tail quadrature (raised-cosine spectra)
    #[arg(long)]
    pub numeric: bool,
    /// Directory for domain.json; stdout only when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchTarget {
    Lp,
    Nft,
    Inft,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchTarget::Lp)]
    pub target: BenchTarget,
    #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192")]
    pub sweep: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Failure classes mapped to exit codes 2 and 3.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl From<nftlab::Error> for CliError {
    fn from(e: nftlab::Error) -> Self {
        if e.is_numerical() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Inft(a) => commands::inft(a),
        Command::Nft(a) => commands::nft(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Domain(a) => commands::domain(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
