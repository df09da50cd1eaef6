//! Low-order virtual element (VEM) and node-based uniform strain virtual
//! element (NVEM) solvers for two-dimensional linear elasticity on arbitrary
//! polygonal meshes.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: polygonal meshes, generators, element geometry and nodal patches
//! - [`material`]: isotropic constitutive matrices and the modified matrices
//!   used by the stabilisation terms
//! - [`element`]: element-level VEM operators (strain, projection, stiffness,
//!   loads, projected basis and mass)
//! - [`nodal`]: the nodal averaging operator and every nodal operator built on it
//! - [`assembly`]: global sparse assembly, Dirichlet elimination, static solve,
//!   eigen-spectrum and Rayleigh damping
//! - [`dynamics`]: HHT-α time integration
//! - [`benchmarks`]: exact solutions, error norms and convergence drivers
//! - [`export`]: legacy VTK and CSV writers

pub mod assembly;
pub mod benchmarks;
pub mod dynamics;
pub mod element;
pub mod error;
pub mod export;
pub mod material;
pub mod mesh;
pub mod nodal;
pub mod problem;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};

/// Dense matrix type used for element and patch level operators.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense vector type used for element, patch and global vectors.
pub type Vector = nalgebra::DVector<f64>;
/// A point in the plane.
pub type Point = nalgebra::Point2<f64>;
/// A 2-vector (force, traction, displacement at a point).
pub type Vec2 = nalgebra::Vector2<f64>;
/// A Voigt 3-vector `(e11, e22, 2 e12)` or `(s11, s22, s12)`.
pub type Voigt = nalgebra::Vector3<f64>;
/// A 3×3 matrix in Voigt ordering.
pub type Mat3 = nalgebra::Matrix3<f64>;
