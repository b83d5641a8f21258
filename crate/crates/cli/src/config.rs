//! Sweep configuration: command-line flags layered over an optional TOML file.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use maxbound_core::extreme::Tolerance;
use maxbound_core::EnsembleSize;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gaussian,
    Walk,
    Tails,
    Experts,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Gaussian => "gaussian",
            Suite::Walk => "walk",
            Suite::Tails => "tails",
            Suite::Experts => "experts",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const PRECEDENCE: &str = "\
Configuration precedence: command-line flags override values from --config,
which override the built-in defaults. Grids are comma-separated lists whose
tokens are numbers (2, 1e12), inclusive integer ranges (7..60) or, for the
d grid, natural powers (e^30).";

/// Flags shared by every subcommand. All are optional so that the
/// configuration file can supply them.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Families to sweep [default: gaussian,walk,tails]
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<Suite>>,
    /// Ensemble sizes d [default: 2..64,100,1e4,1e6,1e9,1e12]
    #[arg(long = "d-grid", value_delimiter = ',')]
    pub d_grid: Option<Vec<String>>,
    /// Walk lengths / rounds n [default: 7..60]
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<String>>,
    /// Gaussian standard deviations [default: 0.5,1,3]
    #[arg(long = "sigma-grid", value_delimiter = ',')]
    pub sigma_grid: Option<Vec<String>>,
    /// Monte Carlo replicates [default: 10000]
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Master seed for every random stream [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Learning rate for exponential weights [default: sqrt(8 ln d / n)]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Absolute comparison slack [default: 1e-9]
    #[arg(long = "tolerance-abs")]
    pub tolerance_abs: Option<f64>,
    /// Relative comparison slack [default: 1e-6]
    #[arg(long = "tolerance-rel")]
    pub tolerance_rel: Option<f64>,
    /// TOML file with any of the keys above (snake_case)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format [default: csv; experts always writes json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Raise every lower bound by this fraction of its magnitude (testing aid)
    #[arg(long = "inject-lower-inflation", hide = true)]
    pub inject_lower_inflation: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Token {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Token {
    fn into_string(self) -> String {
        match self {
            Token::Int(v) => v.to_string(),
            Token::Float(v) => format!("{v:e}"),
            Token::Text(s) => s,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    families: Option<Vec<Suite>>,
    d_grid: Option<Vec<Token>>,
    n_grid: Option<Vec<Token>>,
    sigma_grid: Option<Vec<Token>>,
    replicates: Option<u64>,
    seed: Option<u64>,
    eta: Option<f64>,
    tolerance_abs: Option<f64>,
    tolerance_rel: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub families: Vec<Suite>,
    pub d_grid: Vec<EnsembleSize>,
    pub n_grid: Vec<u64>,
    pub sigma_grid: Vec<f64>,
    pub replicates: u64,
    pub seed: u64,
    pub eta: Option<f64>,
    pub tolerance: Tolerance,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub lower_inflation: f64,
}

const DEFAULT_D: &[&str] = &["2..64", "100", "1e4", "1e6", "1e9", "1e12"];
const DEFAULT_N: &[&str] = &["7..60"];
const DEFAULT_SIGMA: &[&str] = &["0.5", "1", "3"];

/// Grid defaults, which differ between subcommands.
#[derive(Debug, Clone, Copy)]
pub struct GridDefaults {
    pub d: &'static [&'static str],
    pub n: &'static [&'static str],
}

pub const SWEEP_DEFAULTS: GridDefaults = GridDefaults {
    d: DEFAULT_D,
    n: DEFAULT_N,
};

/// A single experts run: 20 rounds, 4 actions.
pub const EXPERTS_DEFAULTS: GridDefaults = GridDefaults { d: &["4"], n: &["20"] };

impl Default for SweepConfig {
    fn default() -> Self {
        Self::resolve(SweepArgs::default()).expect("defaults are valid")
    }
}

impl SweepConfig {
    /// Merge flags over the file named by `--config` over the sweep defaults.
    pub fn resolve(args: SweepArgs) -> Result<Self> {
        Self::resolve_with(args, SWEEP_DEFAULTS)
    }

    pub fn resolve_with(args: SweepArgs, defaults: GridDefaults) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let tokens = |flag: Option<Vec<String>>, file: Option<Vec<Token>>, default: &[&str]| {
            flag.or_else(|| file.map(|v| v.into_iter().map(Token::into_string).collect()))
                .unwrap_or_else(|| default.iter().map(|s| s.to_string()).collect())
        };

        let mut families = args
            .family
            .or(file.families)
            .unwrap_or_else(|| vec![Suite::Gaussian, Suite::Walk, Suite::Tails]);
        families.sort();
        families.dedup();

        let d_grid = parse_d_grid(&tokens(args.d_grid, file.d_grid, defaults.d)).context("invalid d grid")?;
        let n_grid = parse_n_grid(&tokens(args.n_grid, file.n_grid, defaults.n)).context("invalid n grid")?;
        let sigma_grid =
            parse_sigma_grid(&tokens(args.sigma_grid, file.sigma_grid, DEFAULT_SIGMA)).context("invalid sigma grid")?;

        let replicates = args.replicates.or(file.replicates).unwrap_or(10_000);
        ensure!(replicates >= 2, "replicates must be at least 2, got {replicates}");
        let eta = args.eta.or(file.eta);
        if let Some(eta) = eta {
            ensure!(eta.is_finite() && eta > 0.0, "eta must be positive, got {eta}");
        }
        let tolerance = Tolerance {
            abs: args.tolerance_abs.or(file.tolerance_abs).unwrap_or(1e-9),
            rel: args.tolerance_rel.or(file.tolerance_rel).unwrap_or(1e-6),
        };
        ensure!(
            tolerance.abs >= 0.0 && tolerance.rel >= 0.0 && tolerance.abs.is_finite() && tolerance.rel.is_finite(),
            "tolerances must be finite and nonnegative"
        );
        let lower_inflation = args.inject_lower_inflation.unwrap_or(0.0);
        ensure!(lower_inflation.is_finite(), "inflation must be finite");

        Ok(Self {
            families,
            d_grid,
            n_grid,
            sigma_grid,
            replicates,
            seed: args.seed.or(file.seed).unwrap_or(0),
            eta,
            tolerance,
            out: args.out.or(file.out),
            format: args.format.or(file.format).unwrap_or_default(),
            lower_inflation,
        })
    }

    pub fn has(&self, suite: Suite) -> bool {
        self.families.contains(&suite)
    }

    /// `lower + inflation |lower|`; the identity unless the testing hook is set.
    pub fn inflate(&self, lower: f64) -> f64 {
        lower + self.lower_inflation * lower.abs()
    }
}

fn range(token: &str) -> Result<Option<(u64, u64)>> {
    let Some((a, b)) = token.split_once("..") else {
        return Ok(None);
    };
    let a: u64 = a
        .trim()
        .parse()
        .with_context(|| format!("bad range start in {token:?}"))?;
    let b: u64 = b
        .trim()
        .parse()
        .with_context(|| format!("bad range end in {token:?}"))?;
    ensure!(a <= b, "empty range {token:?}");
    ensure!(b - a <= 1_000_000, "range {token:?} is too long");
    Ok(Some((a, b)))
}

fn non_empty<T>(v: Vec<T>) -> Result<Vec<T>> {
    ensure!(!v.is_empty(), "grid is empty");
    Ok(v)
}

pub fn parse_d_grid(tokens: &[String]) -> Result<Vec<EnsembleSize>> {
    let mut out = Vec::new();
    for token in tokens.iter().map(|t| t.trim()) {
        if let Some((a, b)) = range(token)? {
            for d in a..=b {
                out.push(EnsembleSize::try_from(d)?);
            }
        } else if let Some(exponent) = token.strip_prefix("e^") {
            let x: f64 = exponent.parse().with_context(|| format!("bad exponent in {token:?}"))?;
            out.push(EnsembleSize::from_ln(x)?);
        } else {
            let d: f64 = token.parse().with_context(|| format!("bad ensemble size {token:?}"))?;
            out.push(EnsembleSize::new(d)?);
        }
    }
    non_empty(out)
}

pub fn parse_n_grid(tokens: &[String]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for token in tokens.iter().map(|t| t.trim()) {
        match range(token)? {
            Some((a, b)) => out.extend(a..=b),
            None => out.push(token.parse().with_context(|| format!("bad length {token:?}"))?),
        }
    }
    if out.contains(&0) {
        bail!("lengths must be positive");
    }
    non_empty(out)
}

pub fn parse_sigma_grid(tokens: &[String]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for token in tokens.iter().map(|t| t.trim()) {
        let s: f64 = token.parse().with_context(|| format!("bad sigma {token:?}"))?;
        ensure!(s.is_finite() && s > 0.0, "sigma must be positive, got {token}");
        out.push(s);
    }
    non_empty(out)
}
