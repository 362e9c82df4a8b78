//! Moment Lyapunov exponents of one-dimensional diffusions with additive
//! functionals, computed three ways: Monte Carlo on the twisted semigroup,
//! a principal eigenvalue solve of the twisted generator, and analytic
//! upper and lower bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod field;
pub mod fkmc;
pub mod model;
pub mod pathsim;
pub mod spectral;

pub use error::{AnalysisError, BoundsError, Error, FkmcError, ModelError, SpectralError};
pub use field::{Poly, ScalarField, TrigPoly};
pub use model::{build_model, project_linear_2d, twisted_coefficients, ModelSpec, SdeModel, StateSpace};
