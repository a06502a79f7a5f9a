//! Numerical consequences of the rigidity argument for the quotient
//! `H_{2k+1}/H_2k`: definiteness of `E_(k)`, inequalities at height extrema,
//! the elliptic identity, perturbation scans and report emission.

mod definiteness;
mod diagnostics;
mod report;

pub use definiteness::{classify_definiteness, generalized_eigenvalues, Definiteness, DEFINITENESS_TOL};
pub use diagnostics::{
    bernstein_hypothesis_check, elliptic_residual, extremal_node, extremum_diagnostics, oscillation,
    perturbation_scan, richardson_slope, BernsteinReport, CosineGraph, ExtremumDiagnostics, PerturbationMode, ScanEntry,
    BERNSTEIN_TOL, MODE_LIBRARY_VERSION,
};
pub use report::{analyze_graph, Check, DefinitenessCounts, GraphAnalysis, QuotientStats, RigidityReport};
