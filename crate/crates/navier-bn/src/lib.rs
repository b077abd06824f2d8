//! Numerical laboratory for the biharmonic Brezis-Nirenberg quotient on
//! balls under Navier boundary conditions.
//!
//! The crate evaluates the quotient functional, builds bubble projections,
//! computes biharmonic Green/Robin functions, verifies the bubble-energy
//! expansions, and fits the small-perturbation asymptotics of the minimal
//! energy by direct minimization over radial fields.
//!
//! Numerical backbone: a log-radius grid whose quadrature carries the
//! omega_n r^{n-1} measure exactly per interval, banded finite-difference
//! solvers for the radial Poisson and Navier-bilaplacian problems, and a
//! "deflection form" evaluation of every energy difference. The gaps of
//! interest sit as far as 1e-22 below the Sobolev constant, so they are
//! assembled from small integrals with expm1/log1p algebra; the code never
//! subtracts two O(S2) quantities to obtain them.

pub mod asymptotics;
pub mod banded;
pub mod bubble;
pub mod bubblefun;
pub mod config;
pub mod fitting;
pub mod dimconsts;
pub mod error;
pub mod greenrobin;
pub mod minimizer;
pub mod output;
pub mod potential;
pub mod quad;
pub mod radial;
pub mod special;

pub use dimconsts::{make_dims, DimParams};
pub use error::{Error, Result};
