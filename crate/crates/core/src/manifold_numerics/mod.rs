//! Finite-difference geometry of metric fields on the unit-period torus.

mod fd;
mod grid;
pub mod metrics;

pub use fd::{fd_curvature, FdGeometry};
pub use grid::{PeriodicGrid, PeriodicMetricField, VariationField};
mod variation;

pub use variation::{
    curvature_evolution_residual, divergence_free_check, first_variation_check, lovelock_field, total_lk,
    write_field_csv, DivergenceReport, FirstVariation, LovelockField,
};
