//! Numerical toolkit for the spectral gap of killed symmetric α-stable
//! semigroups on planar domains.
//!
//! The crate assembles the discrete nonlocal Dirichlet form of the killed
//! process on a cell grid, computes eigenpairs, heat kernels and Green
//! matrices, and checks the explicit constants, closed-form kernels,
//! variational identities and gap bounds against each other. A Monte Carlo
//! path sampler serves as an independent stochastic oracle.

pub mod bounds;
pub mod constants;
pub mod eigencheck;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lapack;
pub mod mc;
pub mod operator;
pub mod partition;
pub mod quad;
pub mod solver;
pub mod special;
pub mod variational;

pub use bounds::{verify_bounds, BoundEntry, GapReport};
pub use constants::AlphaParams;
pub use error::{Error, Result};
pub use geometry::{CellGrid, Domain, Rectangle};
pub use operator::{assemble, DiscreteForm};
pub use solver::{eigenpairs, Spectrum};
