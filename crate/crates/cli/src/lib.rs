//! Command-line driver: parses options, builds ambient models, runs the
//! verification suites and writes JSON and CSV reports.

use std::path::PathBuf;
use std::sync::Arc;

use gbq_core::kottler::{lambda_profile, KottlerSpace};
use gbq_core::rigidity::RigidityReport;
use gbq_core::warped_geometry::{Cosh, Exponential, Linear, WarpedProduct};
use gbq_core::GeometryError;

pub mod config;
pub mod suites;

pub use config::{parse_args, Cli, Command, Opts, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Tolerance of the Kottler profile construction when `--tol` is absent.
pub const KOTTLER_TOL: f64 = 1e-8;

/// Builds a preset ambient space. `kappa` overrides the preset's fiber
/// curvature; `mass` and `r_max` only apply to `kottler`.
pub fn preset_ambient(preset: &str, n: usize, kappa: Option<i32>, mass: f64, r_max: f64) -> Result<WarpedProduct> {
    let (warping, default_kappa): (Arc<dyn gbq_core::warped_geometry::Warping>, i32) = match preset {
        "euclid" => (Arc::new(Linear), 1),
        "hyperbolic-horo" => (Arc::new(Exponential), 0),
        "hyperbolic-cosh" => (Arc::new(Cosh), 0),
        "kottler" => {
            let ks = KottlerSpace::new(n, kappa.unwrap_or(-1), mass)?;
            return Ok(lambda_profile(&ks, r_max, KOTTLER_TOL)?.warped_product()?);
        }
        other => {
            return Err(CliError::Parameter(format!(
                "unknown preset `{other}` (expected euclid, hyperbolic-horo, hyperbolic-cosh or kottler)"
            )))
        }
    };
    Ok(WarpedProduct::new(n, kappa.unwrap_or(default_kappa), warping)?)
}

/// Runs a parsed command and returns its report.
pub fn run(command: &Command) -> Result<RigidityReport> {
    let mut report = RigidityReport::new();
    report.param("command", command.name())?;
    match command {
        Command::Verify(o) => suites::verify(o, &mut report)?,
        Command::Slice(o) => suites::slice(o, &mut report)?,
        Command::Kottler(o) => suites::kottler(o, &mut report)?,
        Command::Perturb(o) => suites::perturb(o, &mut report)?,
    }
    if !report.sections.contains_key("golden_refs") {
        report.sections.insert("golden_refs".into(), serde_json::Value::Object(Default::default()));
    }
    Ok(report)
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Writes the JSON report (to `--report` or standard output) and the check
/// CSV when `--csv` is set.
pub fn emit(report: &RigidityReport, opts: &Opts) -> Result<()> {
    let json = report.to_json_string()?;
    match &opts.report {
        Some(path) => write_file(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(path) = &opts.csv {
        let mut buf = Vec::new();
        report.write_checks_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}

pub(crate) fn write_dump<F>(opts: &Opts, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> gbq_core::Result<()>,
{
    if let Some(path) = &opts.dump {
        let mut buf = Vec::new();
        f(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(())
}
