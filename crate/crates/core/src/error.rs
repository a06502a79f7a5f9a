use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("index lists have different lengths ({upper} upper, {lower} lower)")]
    LengthMismatch { upper: usize, lower: usize },

    #[error("order k = {k} not admissible in dimension {dim} (need {requirement})")]
    InvalidOrder { k: usize, dim: usize, requirement: &'static str },

    #[error("P_(k) is undefined for k = 0")]
    UndefinedForKZero,

    #[error("metric is singular or not positive-definite{}", node_suffix(.node))]
    NotPositiveDefinite { node: Option<Vec<usize>> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("star-shapedness violated at node {node:?}: <d/dr, nu> = {angle}")]
    NotStarShaped { node: Vec<usize>, angle: f64 },

    #[error("H_2k vanishes at node {node:?} (value {value})")]
    VanishingH2k { node: Vec<usize>, value: f64 },

    #[error("H_2k is not positive at node {node:?} (value {value})")]
    NonPositiveH2k { node: Vec<usize>, value: f64 },

    #[error("radius {r} outside the warping domain [{lo}, {hi})")]
    OutsideDomain { r: f64, lo: f64, hi: f64 },

    #[error("no positive horizon: mass {mass} with kappa {kappa} in dimension {n} (critical mass m_c = {critical})")]
    NoHorizon { n: usize, kappa: i32, mass: f64, critical: f64 },

    #[error("profile undefined at the critical mass m_c = {critical}: the horizon is a double root and r(rho) diverges")]
    DegenerateHorizon { critical: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn node_suffix(node: &Option<Vec<usize>>) -> String {
    match node {
        Some(n) => format!(" at node {n:?}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;
