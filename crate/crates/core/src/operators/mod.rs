//! Projection, operator assembly, and the Galerkin and modified projection
//! solvers with their iterated post-processing.

mod assemble;
mod density;
pub mod grid;
pub mod linalg;

pub use assemble::{
    assemble_a, assemble_c, project, BoundaryFn, Discretization, GalerkinMatrix, IteratedKernelMatrix,
    PiecewiseConstant, SampledFn,
};
pub use density::{
    evaluate_density, evaluate_density_at, interior_potential, iterate, solve_galerkin, solve_modified,
    CompositeDensity, Density, IteratedDensity,
};
pub use grid::{BoundaryRule, GridNode};
pub use linalg::{DenseMatrix, LuFactors};

#[cfg(test)]
mod tests;
