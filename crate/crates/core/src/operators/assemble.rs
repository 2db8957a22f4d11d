use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::kernel::{adjoint_panel_integral, kernel_between, panel_angle_on_boundary};
use crate::mesh::GradedMesh;
use crate::scalar::{compensated_sum, Real};

use super::grid::BoundaryRule;
use super::linalg::DenseMatrix;

/// Boundary function in corner-accurate coordinates.
pub type BoundaryFn<T> = Arc<dyn Fn(&BoundaryPoint<T>) -> T + Send + Sync>;

/// Member of the piecewise-constant space on a mesh.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant<T> {
    mesh: Arc<GradedMesh<T>>,
    coeffs: Vec<T>,
}

impl<T: Real> PiecewiseConstant<T> {
    pub fn new(mesh: Arc<GradedMesh<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != mesh.num_panels() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} panels",
                coeffs.len(),
                mesh.num_panels()
            )));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn constant(mesh: Arc<GradedMesh<T>>, value: T) -> Self {
        let n = mesh.num_panels();
        Self {
            mesh,
            coeffs: vec![value; n],
        }
    }

    pub fn mesh(&self) -> &Arc<GradedMesh<T>> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn sup_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Value at arclength `s`; breakpoints are rejected.
    pub fn value_at(&self, s: T) -> Result<T> {
        Ok(self.coeffs[self.mesh.panel_at(s)?])
    }
}

/// Matrix of `P T` on piecewise constants:
/// `A[i][j] = (1/|tau_i|) integral over tau_i of (T chi_j)`.
#[derive(Debug, Clone)]
pub struct GalerkinMatrix<T> {
    pub a: DenseMatrix<T>,
}

/// `C[i][j] = (1/|tau_i|) integral over tau_i of T(T chi_j)`.
#[derive(Debug, Clone)]
pub struct IteratedKernelMatrix<T> {
    pub c: DenseMatrix<T>,
}

/// Nodal values of a function together with the function itself.
#[derive(Clone)]
pub struct SampledFn<T> {
    pub f: BoundaryFn<T>,
    pub nodes: Arc<Vec<T>>,
}

/// Everything a solve on one mesh needs: the quadrature grid, the exact
/// angle matrix `B[m][j] = (T chi_j)(t_m)` on grid nodes, the Galerkin
/// matrix, and (on demand) the adjoint averages and `C`.
pub struct Discretization<T: Real> {
    mesh: Arc<GradedMesh<T>>,
    grid: BoundaryRule<T>,
    angles: DenseMatrix<T>,
    galerkin: GalerkinMatrix<T>,
    adjoint: OnceLock<DenseMatrix<T>>,
    iterated: OnceLock<IteratedKernelMatrix<T>>,
}

impl<T: Real> std::fmt::Debug for Discretization<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("panels", &self.mesh.num_panels())
            .field("nodes", &self.grid.len())
            .finish()
    }
}

impl<T: Real> Discretization<T> {
    pub fn new(mesh: Arc<GradedMesh<T>>, order: usize) -> Result<Self> {
        let grid = BoundaryRule::new(&mesh, order)?;
        let polygon = mesh.polygon().clone();
        let panels = mesh.panels();
        let n = panels.len();
        let angles = DenseMatrix::from_row_fn(grid.len(), n, |m, row| {
            let obs = &grid.nodes()[m].point;
            for (v, p) in row.iter_mut().zip(panels) {
                *v = panel_angle_on_boundary(&polygon, obs, p);
            }
        });
        let a = DenseMatrix::from_row_fn(n, n, |i, row| {
            let r = grid.panel_range(i);
            for m in r {
                let w = grid.nodes()[m].weight;
                for (v, b) in row.iter_mut().zip(angles.row(m)) {
                    *v = *v + w * *b;
                }
            }
            let inv = grid.panel_measure(i).recip();
            row.iter_mut().for_each(|v| *v = *v * inv);
        });
        Ok(Self {
            mesh,
            grid,
            angles,
            galerkin: GalerkinMatrix { a },
            adjoint: OnceLock::new(),
            iterated: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Arc<GradedMesh<T>> {
        &self.mesh
    }

    pub fn grid(&self) -> &BoundaryRule<T> {
        &self.grid
    }

    pub fn num_panels(&self) -> usize {
        self.mesh.num_panels()
    }

    /// `(T chi_j)` at grid nodes, one row per node.
    pub fn angles(&self) -> &DenseMatrix<T> {
        &self.angles
    }

    pub fn galerkin(&self) -> &GalerkinMatrix<T> {
        &self.galerkin
    }

    /// `K[i][m] = w_m / |tau_i| * integral over tau_i of k(x(s), y_m) ds`,
    /// so that `K g` are the panel averages of `T g` for nodal values `g`.
    pub fn adjoint(&self) -> &DenseMatrix<T> {
        self.adjoint.get_or_init(|| {
            let polygon = self.mesh.polygon().clone();
            let panels = self.mesh.panels();
            let nodes = self.grid.nodes();
            DenseMatrix::from_row_fn(panels.len(), nodes.len(), |i, row| {
                let inv = self.grid.panel_measure(i).recip();
                for (v, node) in row.iter_mut().zip(nodes) {
                    *v = node.weight * inv * adjoint_panel_integral(&polygon, &node.point, &panels[i]);
                }
            })
        })
    }

    /// `C = K B`: the middle integral runs over grid nodes and the outer
    /// average over `tau_i` is done in closed form by the adjoint.
    pub fn iterated_kernel(&self) -> &IteratedKernelMatrix<T> {
        self.iterated.get_or_init(|| IteratedKernelMatrix {
            c: self.adjoint().matmul(&self.angles),
        })
    }

    /// Evaluates `f` at every grid node.
    pub fn sample(&self, f: BoundaryFn<T>) -> SampledFn<T> {
        let nodes: Vec<T> = self.grid.nodes().par_iter().map(|n| f(&n.point)).collect();
        SampledFn {
            f,
            nodes: Arc::new(nodes),
        }
    }

    /// Like [`Discretization::sample`] but stops at the first non-finite value.
    pub fn try_sample(&self, f: BoundaryFn<T>) -> Result<SampledFn<T>> {
        let nodes: Vec<T> = self
            .grid
            .nodes()
            .par_iter()
            .map(|n| {
                let v = f(&n.point);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteIntegrand {
                        at: n.point.s.to_f64_lossy(),
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(SampledFn {
            f,
            nodes: Arc::new(nodes),
        })
    }

    /// Panel averages of nodal values.
    pub fn project_nodal(&self, values: &[T]) -> PiecewiseConstant<T> {
        let coeffs = (0..self.num_panels())
            .map(|i| self.grid.panel_average(i, values))
            .collect();
        PiecewiseConstant {
            mesh: self.mesh.clone(),
            coeffs,
        }
    }

    /// Expands panel coefficients to grid nodes.
    pub fn expand(&self, coeffs: &[T]) -> Vec<T> {
        self.grid.nodes().iter().map(|n| coeffs[n.panel]).collect()
    }

    /// `(T v)` at grid nodes for a piecewise-constant `v`, exact per node.
    pub fn apply_pc_at_nodes(&self, coeffs: &[T]) -> Vec<T> {
        self.angles.matvec(coeffs)
    }

    /// `(T g)(p)` for nodal values `g` by the grid rule.
    pub fn apply_t_nodal(&self, values: &[T], p: &BoundaryPoint<T>) -> T {
        let polygon = self.mesh.polygon();
        compensated_sum(
            self.grid
                .nodes()
                .iter()
                .zip(values)
                .map(|(n, v)| n.weight * kernel_between(polygon, p, &n.point) * *v),
        )
    }

    /// `P T g` for nodal values `g`.
    pub fn average_of_t(&self, values: &[T]) -> Vec<T> {
        self.adjoint().matvec(values)
    }
}

/// Panel averages `(1/|tau|) integral over tau of f`.
pub fn project<T: Real>(disc: &Discretization<T>, f: BoundaryFn<T>) -> PiecewiseConstant<T> {
    let sampled = disc.sample(f);
    disc.project_nodal(&sampled.nodes)
}

pub fn assemble_a<T: Real>(mesh: Arc<GradedMesh<T>>, order: usize) -> Result<GalerkinMatrix<T>> {
    Ok(Discretization::new(mesh, order)?.galerkin.clone())
}

pub fn assemble_c<T: Real>(mesh: Arc<GradedMesh<T>>, order: usize) -> Result<IteratedKernelMatrix<T>> {
    Ok(Discretization::new(mesh, order)?.iterated_kernel().clone())
}
