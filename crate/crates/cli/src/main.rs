mod commands;
mod config;
mod output;
mod parse;

use clap::{Args, Parser, Subcommand};
use dioph::bestapprox::{Kind, Side, Weights};
use dioph::exponents::ExtendedReal;
use num_rational::BigRational;
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dioph", version, about = "Weighted Diophantine approximation experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads for scans and sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Bits of precision allowed when certifying floors.
    #[arg(long = "max-precision", global = true, default_value_t = 4096)]
    pub max_precision: u32,
    /// File of key = value lines, read as if given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print errors to stderr as JSON.
    #[arg(long = "error-json", global = true)]
    pub error_json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a (mu, R) sequence pair and the theta it defines.
    Construct(ConstructArgs),
    /// Best-approximation records of one functional.
    Scan(ScanArgs),
    /// Exponent estimates from chains or multiplicative searches.
    Estimate(EstimateArgs),
    /// Check predictions and relations.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Closed forms along a grid of the prescribed-omega-hat family.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    /// Primes of the first sequence, comma separated.
    #[arg(long = "S", value_delimiter = ',', required = true)]
    pub s: Vec<u64>,
    /// Primes of the second sequence, comma separated.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    pub t: Vec<u64>,
    #[arg(long, value_parser = parse::rational)]
    pub mu: BigRational,
    #[arg(long = "R", value_parser = parse::rational)]
    pub r: BigRational,
    #[arg(long, value_parser = parse::rational, default_value = "1")]
    pub a: BigRational,
    /// Number of terms.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Random sign pattern from this seed (all + by default).
    #[arg(long = "signs-seed", conflicts_with = "alternating_signs")]
    pub signs_seed: Option<u64>,
    /// Signs (-1)^n in both columns.
    #[arg(long = "alternating-signs")]
    pub alternating_signs: bool,
    /// Truncation level of the theta summary (default n - 1).
    #[arg(long)]
    pub trunc: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ThetaArgs {
    /// A murseq/1 file or a pair a,b (p/q, decimal, or sqrt(n)-k).
    #[arg(long)]
    pub theta: String,
    /// Bits for square-root coordinates.
    #[arg(long = "theta-bits", default_value_t = 200)]
    pub theta_bits: u32,
    /// First truncation level used for pair-defined theta.
    #[arg(long = "trunc-start", default_value_t = 1)]
    pub trunc_start: usize,
    #[arg(long, value_parser = parse::weights, default_value = "1/2,1/2")]
    pub weights: Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    Lambda,
    Omega,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Lambda => Kind::Lambda,
            KindArg::Omega => Kind::Omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Sublattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SideArg {
    Bn,
    An1,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Bn => Side::BnDivisible,
            SideArg::An1 => Side::An1Divisible,
        }
    }
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[command(flatten)]
    pub theta: ThetaArgs,
    /// Height cap: N <= cap.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub strategy: StrategyArg,
    /// Sequence index of the sublattice.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Largest multiple on the sublattice (defaults to --cap).
    #[arg(long = "m-cap")]
    pub m_cap: Option<u64>,
    /// First multiple on the sublattice (defaults to the anchor).
    #[arg(long = "m-start")]
    pub m_start: Option<u64>,
    #[arg(long, value_enum, default_value = "bn")]
    pub side: SideArg,
    /// Re-check the chain against the whole region.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long, value_enum, default_value = "omega")]
    pub kind: KindArg,
    #[command(flatten)]
    pub theta: ThetaArgs,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Use the predicted chain of a pair file instead of a scan.
    #[arg(long)]
    pub predicted: bool,
    /// Multiplicative search over --h-grid.
    #[arg(long, conflicts_with = "predicted")]
    pub multiplicative: bool,
    #[arg(long = "h-grid", value_delimiter = ',')]
    pub h_grid: Option<Vec<u64>>,
    #[arg(long = "drop-first", default_value_t = 2)]
    pub drop_first: usize,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, value_parser = parse::rational)]
    pub mu: BigRational,
    #[arg(long = "R", value_parser = parse::rational)]
    pub r: BigRational,
    #[arg(long, value_parser = parse::weights, default_value = "1/2,1/2")]
    pub weights: Weights,
}

#[derive(Subcommand, Debug)]
pub enum VerifyTarget {
    /// Closed-form exponents with relation checks.
    Tc {
        #[command(flatten)]
        p: McArgs,
        /// Evaluate even when the admissibility conditions fail.
        #[arg(long = "allow-outside")]
        allow_outside: bool,
    },
    /// Admissibility conditions.
    Cond1 {
        #[command(flatten)]
        p: McArgs,
    },
    /// Predicted linear-form chain against an exhaustive scan.
    #[command(name = "lemmaA")]
    LemmaA {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        cap: u64,
        /// Last index of predicted points (default: all resolvable).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse::weights, default_value = "1/2,1/2")]
        weights: Weights,
    },
    /// Simultaneous anchors and sublattice record bounds.
    #[command(name = "lemmaB")]
    LemmaB {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Exhaustive simultaneous scan cap (skipped when absent).
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long = "m-cap", default_value_t = 100_000)]
        m_cap: u64,
        #[arg(long = "m-start")]
        m_start: Option<u64>,
        #[arg(long, value_enum, default_value = "bn")]
        side: SideArg,
    },
    /// Spectrum relations for a quadruple (values may be inf).
    Relations {
        #[arg(long, value_parser = parse::extended)]
        omega: ExtendedReal,
        #[arg(long = "omega-hat", value_parser = parse::extended)]
        omega_hat: ExtendedReal,
        #[arg(long, value_parser = parse::extended)]
        lambda: ExtendedReal,
        #[arg(long = "lambda-hat", value_parser = parse::extended)]
        lambda_hat: ExtendedReal,
        #[arg(long, value_parser = parse::weights, default_value = "1/2,1/2")]
        weights: Weights,
        /// Slack allowed in every clause.
        #[arg(long, value_parser = parse::rational, default_value = "0")]
        tol: BigRational,
    },
    /// lambda_hat + 1/omega_hat - 1.
    Jarnik {
        #[arg(long = "omega-hat", value_parser = parse::extended)]
        omega_hat: ExtendedReal,
        #[arg(long = "lambda-hat", value_parser = parse::extended)]
        lambda_hat: ExtendedReal,
    },
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse::weights, default_value = "1/2,1/2")]
    pub weights: Weights,
    /// Prescribed omega_hat (must exceed 6i).
    #[arg(long = "what", value_parser = parse::rational)]
    pub w_hat: BigRational,
    /// start:stop:step inside (0, 1), or a single value.
    #[arg(long = "t-grid", default_value = "0.1:0.9:0.1")]
    pub t_grid: String,
}

fn report_error(e: &dioph::Error, as_json: bool) {
    if as_json {
        let v = serde_json::json!({
            "error": e.kind(),
            "message": e.to_string(),
            "exit_code": e.exit_code(),
        });
        eprintln!("{v}");
    } else {
        eprintln!("error: {e}");
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report_error(&e, cli.global.error_json);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
