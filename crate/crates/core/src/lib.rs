//! First eigenvalues of the p-Laplacian and of coupled (p, q)-Laplacian
//! systems on geodesic balls and planar domains, with numerical checks of
//! eigenvalue comparison inequalities.

pub mod cheeger;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod ode;
pub mod rearrangement;
pub mod shooting;
pub mod variational;

pub use eigen::{EigenResult, Exponents, Normalization};
pub use error::{Error, Result};
pub use geometry::{RadialDomain, RadialManifold, SpaceForm};
