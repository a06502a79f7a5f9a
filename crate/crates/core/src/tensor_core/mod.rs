//! Pointwise multilinear algebra: generalized Kronecker delta, algebraic
//! curvature tensors, Lovelock tensors `L_k`, `E_(k)`, `P_(k)` and the
//! flat-ambient correspondence with elementary symmetric functions.

mod curvature;
mod delta;
mod lovelock;
mod shape;

pub use curvature::{
    contractions, einstein_closed_form, quadratic_gauss_bonnet, random_algebraic_curvature, shape_to_curvature, space_form, AlgebraicCurvature,
    Contractions, SymmetryDefects, Tensor4,
};
pub use delta::{gen_delta, DeltaTable};
pub use lovelock::{einstein_decomposition_residual, lovelock, LovelockData, LovelockEvaluator};
pub use shape::{euclidean_correspondence, random_shape_operator, sigma_newton, EuclideanCorrespondence, ShapeOperator, SigmaNewton};
