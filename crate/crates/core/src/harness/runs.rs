use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::mesh::{GradedMesh, GradedMeshSpec};
use crate::operators::{
    interior_potential, solve_galerkin, solve_modified, Density, Discretization, SampledFn,
};
use crate::scalar::Real;

use super::problem::{harmonic_value, Problem, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Galerkin,
    IteratedGalerkin,
    Modified,
    IteratedModified,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Galerkin,
        Method::IteratedGalerkin,
        Method::Modified,
        Method::IteratedModified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::IteratedGalerkin => "iterated_galerkin",
            Method::Modified => "modified",
            Method::IteratedModified => "iterated_modified",
        }
    }

    pub fn is_iterated(self) -> bool {
        matches!(self, Method::IteratedGalerkin | Method::IteratedModified)
    }

    fn needs_modified(self) -> bool {
        matches!(self, Method::Modified | Method::IteratedModified)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Outcome of one method on one mesh.
#[derive(Clone)]
pub struct MethodRun<T: Real> {
    pub spec: GradedMeshSpec<T>,
    pub method: Method,
    pub density: Density<T>,
    /// Density values on the problem's evaluation grid (empty for harmonic
    /// problems).
    pub grid_values: Vec<T>,
    pub sup_error: T,
    pub wall_time: f64,
}

impl<T: Real> fmt::Debug for MethodRun<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MethodRun")
            .field("n", &self.spec.n)
            .field("method", &self.method)
            .field("sup_error", &self.sup_error)
            .finish()
    }
}

/// Assembled operators and sampled data for one problem on one mesh,
/// shared by all methods.
pub struct Solver<T: Real> {
    problem: Problem<T>,
    disc: Arc<Discretization<T>>,
    rhs: SampledFn<T>,
    galerkin: OnceLock<Result<Density<T>>>,
    modified: OnceLock<Result<Density<T>>>,
}

impl<T: Real> Solver<T> {
    pub fn new(problem: &Problem<T>, mesh: GradedMesh<T>, order: usize) -> Result<Self> {
        let disc = Arc::new(Discretization::new(Arc::new(mesh), order)?);
        let rhs = disc.try_sample(problem.rhs().clone())?;
        Ok(Self {
            problem: problem.clone(),
            disc,
            rhs,
            galerkin: OnceLock::new(),
            modified: OnceLock::new(),
        })
    }

    pub fn discretization(&self) -> &Arc<Discretization<T>> {
        &self.disc
    }

    pub fn rhs(&self) -> &SampledFn<T> {
        &self.rhs
    }

    pub fn density(&self, method: Method) -> Result<Density<T>> {
        let base = if method.needs_modified() {
            self.modified
                .get_or_init(|| {
                    let c = self.disc.iterated_kernel();
                    Ok(Density::Modified(solve_modified(&self.disc, c, &self.rhs)?))
                })
                .clone()?
        } else {
            self.galerkin
                .get_or_init(|| {
                    let pf = self.disc.project_nodal(&self.rhs.nodes);
                    Ok(Density::Galerkin(solve_galerkin(self.disc.galerkin(), &pf)?, self.disc.clone()))
                })
                .clone()?
        };
        Ok(if method.is_iterated() {
            base.iterated(&self.rhs)
        } else {
            base
        })
    }

    /// Density values on the evaluation grid, reusing the cached grid
    /// right-hand side.
    pub fn grid_values(&self, density: &Density<T>) -> Result<Vec<T>> {
        let grid = self.problem.grid();
        let f = self.problem.grid_rhs();
        grid.par_iter()
            .zip(f.par_iter())
            .map(|(p, fp)| value_with_rhs(density, p, *fp))
            .collect()
    }

    pub fn run(&self, method: Method) -> Result<MethodRun<T>> {
        let start = Instant::now();
        let density = self.density(method)?;
        let (grid_values, sup_error) = match self.problem.kind() {
            ProblemKind::Manufactured { u_exact } => {
                let values = self.grid_values(&density)?;
                let err = self
                    .problem
                    .grid()
                    .iter()
                    .zip(&values)
                    .map(|(p, v)| (*v - u_exact(p)).abs())
                    .fold(T::zero(), |m, e| if e > m || e.is_nan() { e } else { m });
                (values, err)
            }
            ProblemKind::Harmonic { x_ext, checkpoints } => {
                let mut err = T::zero();
                for x in checkpoints {
                    let v = interior_potential(&density, *x)?;
                    let e = (v - harmonic_value(*x_ext, *x)).abs();
                    if e > err || e.is_nan() {
                        err = e;
                    }
                }
                (Vec::new(), err)
            }
        };
        if !sup_error.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: f64::NAN });
        }
        Ok(MethodRun {
            spec: self.disc.mesh().spec().clone(),
            method,
            density,
            grid_values,
            sup_error,
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}

/// Density value at `p` given `f(p)`.
pub fn value_with_rhs<T: Real>(density: &Density<T>, p: &BoundaryPoint<T>, fp: T) -> Result<T> {
    match density {
        Density::Galerkin(pc, _) => pc.value_at(p.s),
        Density::Modified(c) => {
            let mesh = c.discretization().mesh();
            let i = mesh.panel_of(p)?;
            let ty = crate::kernel::apply_t_pc_at(mesh.polygon(), mesh.panels(), c.y.coeffs(), p);
            Ok(c.y.coeffs()[i] + (fp - c.pf.coeffs()[i]) - (ty - c.ay.coeffs()[i]))
        }
        Density::Iterated(it) => Ok(fp - it.base().apply_t_boundary(p)),
    }
}

/// Solves `problem` on `mesh` with one method.
pub fn run_method<T: Real>(problem: &Problem<T>, mesh: GradedMesh<T>, method: Method, order: usize) -> Result<MethodRun<T>> {
    Solver::new(problem, mesh, order)?.run(method)
}

/// Several methods on one mesh sharing assembly; results in input order.
pub fn run_methods<T: Real>(
    problem: &Problem<T>,
    mesh: GradedMesh<T>,
    methods: &[Method],
    order: usize,
) -> Result<Vec<MethodRun<T>>> {
    let solver = Solver::new(problem, mesh, order)?;
    methods.iter().map(|m| solver.run(*m)).collect()
}
