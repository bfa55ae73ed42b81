//! Ground states of `−Δ_g u = f(r, u)` on rotationally symmetric Riemannian models.

// `!(x > 0.0)` is used on purpose throughout so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature_ode;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod nonlinearity;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod symmetry;
pub mod variational;

pub use discretization::{AxisymmetricField, DiscreteGeometry, RadialField};
pub use error::{Error, Result};
pub use geometry::{GrowthLaw, ManifoldModel, PsiProfile};
pub use nonlinearity::{Nonlinearity, PowerLaw, WeightSpec};
pub use report::{Check, ConditionReport};
pub use variational::{solve_ground_state, GroundStateResult, Initialization, SolverConfig};
