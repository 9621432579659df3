mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "schlomilch", version, about = "Simplex distribution families: densities, samplers, moments and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Family parameter document (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    pub params: Option<PathBuf>,

    /// Master RNG seed
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of samples (sample, Monte Carlo methods)
    #[arg(long, global = true)]
    pub count: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub output: Option<Output>,

    /// Relative tolerance override
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Log-density at simplex points
    Pdf {
        /// Points file (CSV rows or a JSON array); stdin when neither this nor --point is given
        #[arg(long, value_name = "PATH")]
        points: Option<PathBuf>,
        /// Inline point, comma separated; repeatable
        #[arg(long = "point", value_name = "X1,X2,...", allow_hyphen_values = true)]
        point: Vec<String>,
    },
    /// Seeded samples
    Sample,
    /// Means and covariance, or selected mixed moments E prod X_i^l_i
    Moments {
        /// Multi-index l, comma separated; repeatable
        #[arg(long, value_name = "L1,L2,...")]
        ell: Vec<String>,
        #[arg(long, value_enum, default_value_t = MomentRoute::Auto)]
        method: MomentRoute,
    },
    /// Log-ratio means and covariances
    Logratio {
        /// Index quadruple i,j,k,l (1-based) for Cov[ln(Xi/Xj), ln(Xk/Xl)]; repeatable.
        /// Default: all pairs over the last coordinate as common denominator.
        #[arg(long, value_name = "I,J,K,L")]
        pair: Vec<String>,
        /// Add Monte Carlo estimates with standard errors
        #[arg(long)]
        mc: bool,
    },
    /// Complete homogeneous symmetric polynomials h and symmetric means q
    Poly {
        /// Variables gamma (defaults to the params document's gamma)
        #[arg(long, value_name = "G1,G2,...", allow_hyphen_values = true)]
        x: Option<String>,
        /// Weights alpha (default all ones, or the params document's alpha when --x is absent)
        #[arg(long, value_name = "A1,A2,...")]
        alpha: Option<String>,
        /// Degree; non-integer or negative degrees need unit weights
        #[arg(long, allow_hyphen_values = true)]
        degree: f64,
    },
    /// Normalization constant I_n^sigma(alpha, gamma) by every applicable method
    Norm,
    /// Run invariant suites
    Verify {
        /// Suite name; repeatable (default: all)
        #[arg(long)]
        suite: Vec<String>,
        /// Multiplier on the default number of draws and samples
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MomentRoute {
    Auto,
    Closed,
    Continuation,
    Integral1d,
    Quadrature,
    Mc,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Data or verification failure: exit 1.
    Data(String),
    /// Usage or parameter error: exit 2.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Data(m) | Failure::Usage(m) if !m.is_empty() => eprintln!("error: {m}"),
                _ => {}
            }
            ExitCode::from(f.code())
        }
    }
}
