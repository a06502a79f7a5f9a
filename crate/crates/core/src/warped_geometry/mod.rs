//! Warped products `dr^2 + lambda(r)^2 g_N` and graph hypersurfaces over
//! their fibers.

mod ambient;
mod graph;
mod hessian;

pub use ambient::{
    ambient_geometry, AmbientCurvature, Cosh, Exponential, Linear, Sinh, WarpedProduct, Warping, DERIVATIVE_CHECK_TOL,
    PHI_TOL,
};
pub use graph::{
    point_data, quotient_field, write_hypersurface_csv, FiberChart, GraphHypersurface, HypersurfacePointData,
    STEREOGRAPHIC_SCALE, VANISHING_RELATIVE,
};
pub(crate) use graph::quotients_from;
pub(crate) use hessian::hessian_nodes_from;
pub use hessian::{hessian_identity_nodes, hessian_identity_residuals, HessianResiduals, NodeHessianResiduals};
