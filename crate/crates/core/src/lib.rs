//! Second-kind boundary integral equation `(I + T) u = f` for the
//! double-layer potential of Laplace's equation on polygons.
//!
//! The crate provides corner-graded meshes, piecewise-constant Galerkin and
//! modified projection solvers with their iterated post-processing,
//! multi-parameter extrapolation, and a convergence harness built on a
//! manufactured-solution oracle.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod mesh;
pub mod operators;
pub mod point;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, BoundarySample, PartitionSpec, Polygon};
pub use mesh::{GradedMesh, GradedMeshSpec, Panel, Side};
pub use point::Point2;
pub use scalar::Real;

pub type Point64 = Point2<f64>;
pub type Polygon64 = Polygon<f64>;
pub type PartitionSpec64 = PartitionSpec<f64>;
pub type GradedMesh64 = GradedMesh<f64>;
pub type GradedMeshSpec64 = GradedMeshSpec<f64>;
pub type Discretization64 = operators::Discretization<f64>;
pub type Density64 = operators::Density<f64>;
pub type Problem64 = harness::Problem<f64>;

pub type Point32 = Point2<f32>;
pub type Polygon32 = Polygon<f32>;
pub type GradedMesh32 = GradedMesh<f32>;
pub type Discretization32 = operators::Discretization<f32>;
