//! Semi-inner-product calculus on finite-dimensional weighted ℓᵖ spaces and
//! a representer-theorem solver for regularised interpolation
//!
//! ```text
//! min { Ω(f) : [f, x_i] = y_i, i = 1..m }
//! ```
//!
//! * [`space`]: norm, semi-inner product, duality map and its inverse,
//!   James orthogonality, metric projection, smoothness probes.
//! * [`regulariser`]: radial profiles, admissibility probes, radial
//!   mollification.
//! * [`solver`]: minimal-norm interpolation through an m-dimensional smooth
//!   dual problem, with peaking and representer certificates.
//! * [`oracle`]: brute-force penalty and grid solvers over the full space,
//!   kept independent of the dual machinery.

pub mod error;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod regulariser;
pub mod sampling;
pub mod solver;
pub mod space;
pub mod suite;

pub use error::{Error, Result};
pub use regulariser::{ProbeReport, RadialProfile, Regulariser, RegulariserSpec, Verdict};
pub use solver::{InterpolationProblem, Solution, SolverConfig};
pub use space::{DualVector, Space, SpaceConfig, Vector};
