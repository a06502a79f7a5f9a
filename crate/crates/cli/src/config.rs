use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "gbq", version, about = "Verification suites for Gauss-Bonnet curvature quotients")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or all built-in verification suites.
    Verify(Opts),
    /// Quotient, extremum and Hessian checks on a slice `{r0} x N`.
    Slice(Opts),
    /// Horizon, warping profile and log-convexity of a Kottler space.
    Kottler(Opts),
    /// Quotient oscillation of `r0 + eps psi` over a list of `eps`.
    Perturb(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Self::Verify(o) | Self::Slice(o) | Self::Kottler(o) | Self::Perturb(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Verify(_) => "verify",
            Self::Slice(_) => "slice",
            Self::Kottler(_) => "kottler",
            Self::Perturb(_) => "perturb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Variation,
    Hypersurface,
    Kottler,
    Perturb,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identities => "identities",
            Self::Variation => "variation",
            Self::Hypersurface => "hypersurface",
            Self::Kottler => "kottler",
            Self::Perturb => "perturb",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Suite to run (verify only).
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Ambient model: euclid, hyperbolic-horo, hyperbolic-cosh or kottler.
    #[arg(long)]
    pub preset: Option<String>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Order of the curvature quotient.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fiber curvature in {-1, 0, 1}; overrides the preset default.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<i32>,
    /// Kottler mass parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Slice height, or outer radius of the Kottler report.
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    /// Comma-separated perturbation amplitudes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
    /// Grid resolution per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed of the random variation fields in the variation suite.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance of the primary check of slice and kottler runs.
    #[arg(long)]
    pub tol: Option<f64>,
    /// JSON report path; standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV of the check list.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// CSV of the per-node or per-radius data of slice, kottler and perturb runs.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Require `lambda lambda'' - lambda'^2 >= -tol` in kottler runs.
    #[arg(long)]
    pub check_logconvex: bool,
    /// Dimension of the algebraic identity suite.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Perturbation shape: single-cosine or two-mode.
    #[arg(long)]
    pub mode: Option<String>,
    /// File of `key = value` lines supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "suite", "preset", "n", "k", "kappa", "mass", "r0", "eps", "grid", "seed", "tol", "report", "csv", "dump",
    "check-logconvex", "dim", "mode",
];

/// Reads `key = value` lines; `#` starts a comment. Keys are flag names
/// without the leading dashes, underscores allowed for dashes.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Inserts the config-file entries right after the subcommand so that
/// explicit flags, which come later, override them.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (key, value) in read_config(Path::new(&path))? {
        if key == "check-logconvex" {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push("--check-logconvex".to_string()),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::Config(format!("check-logconvex expects true or false, got `{value}`"))),
            }
        } else {
            injected.push(format!("--{key}={value}"));
        }
    }
    let at = args.len().min(2);
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

pub fn parse_args(args: Vec<String>) -> Result<Cli, CliError> {
    let args = expand_args(args)?;
    Cli::try_parse_from(args).map_err(CliError::Usage)
}
