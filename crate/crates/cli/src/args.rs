use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use truncgauss::moments::log_grid;
use truncgauss::Spectrum;

use crate::output::Format;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "tg", version, about = "Moments of a Gaussian conditioned to a Euclidean ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ball integral alpha for one multi-index.
    Integral(IntegralArgs),
    /// Conditional second and fourth moments, Delta_n and Gamma_nn.
    Moments(MomentsArgs),
    /// Coefficient functions eta_k.
    Eta(EtaArgs),
    /// Figure data as CSV.
    Figure(FigureArgs),
    /// Convergence estimate table (same as `figure cp-table`).
    CpTable(CpArgs),
    /// Verification suites with a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Dimension; must match the number of variances when both are given.
    #[arg(long = "v")]
    pub v: Option<usize>,
    /// Comma-separated variances.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Squared radius.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Radius grid `min:max:points:scale` with scale `lin` or `log`.
    #[arg(long)]
    pub rho_range: Option<String>,
    /// Output format; csv by default, json for `verify`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IntegralArgs {
    #[command(flatten)]
    pub common: Common,
    /// Multi-index `i:k,j:k` (1-based directions); empty for alpha itself.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub index: String,
    /// Monte Carlo sample count; quadrature when absent.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaMethod {
    Combinatorial,
    Fd,
}

#[derive(Args, Debug)]
pub struct EtaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Highest order k.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = EtaMethod::Combinatorial)]
    pub method: EtaMethod,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// delta-grid, gamma-curves, gamma-convergence or cp-table.
    pub id: String,
    #[command(flatten)]
    pub common: Common,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Direction (1-based) for gamma-convergence.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p_min: usize,
    #[arg(long, default_value_t = 100)]
    pub p_max: usize,
}

#[derive(Args, Debug)]
pub struct CpArgs {
    /// Single dimension; all of 2..=6 when absent.
    #[arg(long = "v")]
    pub v: Option<u32>,
    #[arg(long, default_value_t = 50)]
    pub p_min: usize,
    #[arg(long, default_value_t = 100)]
    pub p_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// structural, inequalities, eta, asymptotic, xi or all.
    pub suite: String,
    #[command(flatten)]
    pub common: Common,
    /// Highest order for the exponent-vector scans.
    #[arg(long, default_value_t = 6)]
    pub qmax: usize,
    /// Highest multi-index order for the structural identities.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    /// Smaller grids.
    #[arg(long)]
    pub quick: bool,
}

pub fn parse_lambdas(text: &str, v: Option<usize>) -> Result<Spectrum, CliError> {
    let lambdas: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("variance '{s}' is not a number"))))
        .collect::<Result<_, _>>()?;
    if let Some(v) = v {
        if v != lambdas.len() {
            return Err(CliError::Usage(format!("--v {v} but {} variances given", lambdas.len())));
        }
    }
    Ok(Spectrum::new(lambdas)?)
}

impl Common {
    pub fn table_format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        let text = self.lambda.as_deref().ok_or_else(|| CliError::Usage("--lambda is required".into()))?;
        parse_lambdas(text, self.v)
    }

    pub fn spectrum_or(&self, default: &[f64]) -> Result<Spectrum, CliError> {
        match &self.lambda {
            Some(text) => parse_lambdas(text, self.v),
            None => Ok(Spectrum::new(default.to_vec())?),
        }
    }

    /// The radius values: `--rho`, `--rho-range`, or an error when neither or both are given.
    pub fn rhos(&self) -> Result<Vec<f64>, CliError> {
        match (self.rho, &self.rho_range) {
            (Some(r), None) => Ok(vec![r]),
            (None, Some(spec)) => parse_range(spec),
            (Some(_), Some(_)) => Err(CliError::Usage("give either --rho or --rho-range, not both".into())),
            (None, None) => Err(CliError::Usage("--rho or --rho-range is required".into())),
        }
    }
}

/// `min:max:points:scale`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("range '{spec}' is not min:max:points:scale"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let min: f64 = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if points < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
        return Err(CliError::Usage(format!("range '{spec}' needs min < max and at least 2 points")));
    }
    match parts[3] {
        "lin" => Ok((0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect()),
        "log" if min > 0.0 => Ok(log_grid(min, max, points)),
        "log" => Err(CliError::Usage(format!("log range '{spec}' needs min > 0"))),
        _ => Err(bad()),
    }
}
