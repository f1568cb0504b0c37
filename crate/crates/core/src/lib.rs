//! Finite elements for Laplace boundary-value problems on rough domains.
//!
//! The crate builds rough planar domains (a union of shrinking rectangles,
//! a logarithmic spiral) together with their explicit charts, meshes them
//! with P1 triangles, assembles the stiffness, mass and boundary forms, and
//! solves Dirichlet, Neumann and Robin problems, the associated generalized
//! eigenproblems, and truncated exterior problems in axisymmetric form.

pub mod cg;
pub mod eigen;
pub mod error;
pub mod exterior;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod runs;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
