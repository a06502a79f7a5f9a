//! Gauss-Bonnet curvatures, generalized Einstein tensors and the curvature
//! quotients `H_{2k+1} / H_{2k}` of hypersurfaces in warped product manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor_core`]: pointwise multilinear algebra (generalized Kronecker
//!   delta, Lovelock tensors, shape-operator correspondences).
//! * [`manifold_numerics`]: curvature of metric fields on periodic grids and
//!   finite-difference checks of the variational formulas.
//! * [`warped_geometry`]: warped product ambients, graph hypersurfaces and
//!   their `H_{2k}` / `H_{2k+1}` fields.
//! * [`kottler`]: Kottler-Schwarzschild warping profiles.
//! * [`rigidity`]: diagnostics for the rigidity statements (definiteness,
//!   extremum inequalities, perturbation scans) and the JSON/CSV report.
//!
//! # Conventions
//!
//! Riemann tensors are stored fully lowered with the sign fixed so that
//! `R_{ijij}` is the sectional curvature of the coordinate plane when the frame
//! is orthonormal. The unit round sphere therefore has `R_{ijkl} = g_{ik}g_{jl}
//! - g_{il}g_{jk}`, `Ric = (d-1) g` and `Scal = d(d-1)`. Ricci is
//! `Ric_{ij} = g^{kl} R_{kilj}`.
//!
//! The second fundamental form `h` of a hypersurface is taken with respect to
//! the inner normal, so a slice `{r0} x N` of a warped product has
//! `h = (λ'/λ) g`.
//!
//! All index arguments are zero-based.

pub mod error;
pub mod kottler;
pub mod manifold_numerics;
pub mod numerics;
pub mod rigidity;
pub mod tensor_core;
pub mod warped_geometry;

pub use error::{GeometryError, Result};
