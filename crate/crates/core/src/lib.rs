//! Axisymmetric incompressible Navier-Stokes with swirl in the exterior of a
//! cylinder `{r > r_min}` under slip boundary conditions, in
//! stream-function / vorticity form, together with the machinery that
//! measures the flow's a priori bounds.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod inequalities;
pub mod mms;
pub mod picard;
pub mod semigroup;
pub mod simulation;
mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use field::{AxisymState, BoundaryKind, ScalarField};
pub use grid::{Exponent, Grid, Operator};
