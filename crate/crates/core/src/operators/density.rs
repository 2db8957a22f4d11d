use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::kernel::{apply_t_pc, apply_t_pc_at, kernel_from_point, Observer};
use crate::point::Point2;
use crate::scalar::{compensated_sum, Real};

use super::assemble::{BoundaryFn, Discretization, GalerkinMatrix, IteratedKernelMatrix, PiecewiseConstant, SampledFn};
use super::linalg::{DenseMatrix, LuFactors};

/// Solves `(I + A) c = pf`.
pub fn solve_galerkin<T: Real>(a: &GalerkinMatrix<T>, pf: &PiecewiseConstant<T>) -> Result<PiecewiseConstant<T>> {
    let n = a.a.rows();
    let m = DenseMatrix::identity(n).add(&a.a);
    let c = LuFactors::factor(&m)?.solve(pf.coeffs());
    PiecewiseConstant::new(pf.mesh().clone(), c)
}

/// Modified projection solution `u = y + z` with `y` piecewise constant and
/// `z = (I - P)(f - T y)` kept as nodal values plus a closed formula.
#[derive(Clone)]
pub struct CompositeDensity<T: Real> {
    disc: Arc<Discretization<T>>,
    pub y: PiecewiseConstant<T>,
    pub pf: PiecewiseConstant<T>,
    pub ay: PiecewiseConstant<T>,
    f: SampledFn<T>,
    z_nodes: Vec<T>,
}

/// Solves `(I + T_M) u = f` for the modified projection operator
/// `T_M = PTP + PT(I-P) + (I-P)TP`.
///
/// With `y = Pu`, `z = (I-P)u` the operator equation splits into
///
/// ```text
/// y + PTy + PTz = Pf
/// z = (I-P)(f - Ty)
/// ```
///
/// Substituting `z` and writing `A = PT`, `C = PTT`, `b1 = PTf` on the
/// piecewise constants gives `(I + A - C + A^2) y = Pf - b1 + A Pf`.
pub fn solve_modified<T: Real>(
    disc: &Arc<Discretization<T>>,
    c: &IteratedKernelMatrix<T>,
    f: &SampledFn<T>,
) -> Result<CompositeDensity<T>> {
    let a = &disc.galerkin().a;
    let n = a.rows();
    let a2 = a.matmul(a);
    let m = DenseMatrix::identity(n).add(a).sub(&c.c).add(&a2);
    let pf = disc.project_nodal(&f.nodes);
    let b1 = disc.average_of_t(&f.nodes);
    let apf = a.matvec(pf.coeffs());
    let rhs: Vec<T> = (0..n).map(|i| pf.coeffs()[i] - b1[i] + apf[i]).collect();
    let y = LuFactors::factor(&m)?.solve(&rhs);
    let ay = a.matvec(&y);
    let ty = disc.apply_pc_at_nodes(&y);
    let z_nodes = disc
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, node)| (f.nodes[k] - pf.coeffs()[node.panel]) - (ty[k] - ay[node.panel]))
        .collect();
    let mesh = disc.mesh().clone();
    Ok(CompositeDensity {
        disc: disc.clone(),
        y: PiecewiseConstant::new(mesh.clone(), y)?,
        pf,
        ay: PiecewiseConstant::new(mesh, ay)?,
        f: f.clone(),
        z_nodes,
    })
}

impl<T: Real> CompositeDensity<T> {
    pub fn discretization(&self) -> &Arc<Discretization<T>> {
        &self.disc
    }

    /// `z` at the grid nodes.
    pub fn z_nodes(&self) -> &[T] {
        &self.z_nodes
    }

    /// `z(s) = (f(s) - Pf) - (Ty(s) - Ay)` on the panel containing `s`.
    pub fn z_at(&self, p: &BoundaryPoint<T>) -> Result<T> {
        let mesh = self.disc.mesh();
        let i = mesh.panel_of(p)?;
        let ty = apply_t_pc_at(mesh.polygon(), mesh.panels(), self.y.coeffs(), p);
        Ok(((self.f.f)(p) - self.pf.coeffs()[i]) - (ty - self.ay.coeffs()[i]))
    }

    pub fn value_at(&self, p: &BoundaryPoint<T>) -> Result<T> {
        let i = self.disc.mesh().panel_of(p)?;
        Ok(self.y.coeffs()[i] + self.z_at(p)?)
    }

    /// Values of `y + z` at the grid nodes.
    pub fn node_values(&self) -> Vec<T> {
        self.disc
            .grid()
            .nodes()
            .iter()
            .zip(&self.z_nodes)
            .map(|(n, z)| self.y.coeffs()[n.panel] + *z)
            .collect()
    }
}

/// `f - T d` for a base density `d`.
#[derive(Clone)]
pub struct IteratedDensity<T: Real> {
    base: Box<Density<T>>,
    f: SampledFn<T>,
    disc: Arc<Discretization<T>>,
    nodes: Arc<OnceLock<Vec<T>>>,
}

impl<T: Real> IteratedDensity<T> {
    pub fn base(&self) -> &Density<T> {
        &self.base
    }

    /// Values at the grid nodes, computed once.
    pub fn node_values(&self) -> &[T] {
        self.nodes.get_or_init(|| {
            let t = self.base.apply_t_nodes();
            self.f.nodes.iter().zip(t).map(|(f, t)| *f - t).collect()
        })
    }
}

/// Boundary density produced by one of the four methods.
#[derive(Clone)]
pub enum Density<T: Real> {
    /// Galerkin solution `u_h`, piecewise constant.
    Galerkin(PiecewiseConstant<T>, Arc<Discretization<T>>),
    /// Modified projection solution `y + z`.
    Modified(CompositeDensity<T>),
    /// Iterated solution `f - T d`.
    Iterated(IteratedDensity<T>),
}

impl<T: Real> Density<T> {
    pub fn discretization(&self) -> &Arc<Discretization<T>> {
        match self {
            Density::Galerkin(_, d) => d,
            Density::Modified(c) => &c.disc,
            Density::Iterated(it) => &it.disc,
        }
    }

    /// Sloan iterate `f - T d`.
    pub fn iterated(self, f: &SampledFn<T>) -> Density<T> {
        let disc = self.discretization().clone();
        Density::Iterated(IteratedDensity {
            base: Box::new(self),
            f: f.clone(),
            disc,
            nodes: Arc::new(OnceLock::new()),
        })
    }

    /// Values at the grid nodes of the discretization.
    pub fn node_values(&self) -> Vec<T> {
        match self {
            Density::Galerkin(pc, d) => d.expand(pc.coeffs()),
            Density::Modified(c) => c.node_values(),
            Density::Iterated(it) => it.node_values().to_vec(),
        }
    }

    /// `(T d)` at the grid nodes.
    pub fn apply_t_nodes(&self) -> Vec<T> {
        let disc = self.discretization();
        let quad = |values: &[T]| -> Vec<T> {
            disc.grid()
                .nodes()
                .par_iter()
                .map(|n| disc.apply_t_nodal(values, &n.point))
                .collect()
        };
        match self {
            Density::Galerkin(pc, _) => disc.apply_pc_at_nodes(pc.coeffs()),
            Density::Modified(c) => {
                let pc = disc.apply_pc_at_nodes(c.y.coeffs());
                pc.into_iter().zip(quad(&c.z_nodes)).map(|(a, b)| a + b).collect()
            }
            Density::Iterated(it) => quad(it.node_values()),
        }
    }

    /// `(T d)` at a boundary point that is not a corner.
    pub fn apply_t_boundary(&self, p: &BoundaryPoint<T>) -> T {
        match self {
            Density::Galerkin(pc, d) => apply_t_pc_at(d.mesh().polygon(), d.mesh().panels(), pc.coeffs(), p),
            Density::Modified(c) => {
                let mesh = c.disc.mesh();
                apply_t_pc_at(mesh.polygon(), mesh.panels(), c.y.coeffs(), p)
                    + c.disc.apply_t_nodal(&c.z_nodes, p)
            }
            Density::Iterated(it) => it.disc.apply_t_nodal(it.node_values(), p),
        }
    }
}

fn nodal_t_plane<T: Real>(disc: &Discretization<T>, values: &[T], x: Point2<T>) -> T {
    let polygon = disc.mesh().polygon();
    compensated_sum(
        disc.grid()
            .nodes()
            .iter()
            .zip(values)
            .map(|(n, v)| n.weight * kernel_from_point(polygon, x, &n.point) * *v),
    )
}

fn check_arclength<T: Real>(d: &Density<T>, s: T) -> Result<BoundaryPoint<T>> {
    let polygon = d.discretization().mesh().polygon();
    if polygon.is_corner(s) {
        return Err(Error::EvaluationAtBreakpoint(s.to_f64_lossy()));
    }
    Ok(polygon.locate(s))
}

/// Value of the density at arclength `s`.
pub fn evaluate_density<T: Real>(d: &Density<T>, s: T) -> Result<T> {
    let p = check_arclength(d, s)?;
    evaluate_density_at(d, &p)
}

/// Value of the density at a boundary point.
pub fn evaluate_density_at<T: Real>(d: &Density<T>, p: &BoundaryPoint<T>) -> Result<T> {
    match d {
        Density::Galerkin(pc, _) => pc.value_at(p.s),
        Density::Modified(c) => c.value_at(p),
        Density::Iterated(it) => {
            let base = it.base.apply_t_boundary(p);
            Ok((it.f.f)(p) - base)
        }
    }
}

/// `f(s) - (T d)(s)`.
pub fn iterate<T: Real>(d: &Density<T>, f: &BoundaryFn<T>, s: T) -> Result<T> {
    let p = check_arclength(d, s)?;
    Ok(f(&p) - d.apply_t_boundary(&p))
}

/// Double-layer potential of the density at an interior point.
pub fn interior_potential<T: Real>(d: &Density<T>, x: Point2<T>) -> Result<T> {
    let disc = d.discretization();
    let mesh = disc.mesh();
    if mesh.polygon().winding_number(x) != T::one() {
        return Err(Error::PointNotInterior {
            x: x.x.to_f64_lossy(),
            y: x.y.to_f64_lossy(),
        });
    }
    match d {
        Density::Galerkin(pc, _) => apply_t_pc(mesh, pc.coeffs(), Observer::Plane(x)),
        Density::Modified(c) => {
            let pc = apply_t_pc(mesh, c.y.coeffs(), Observer::Plane(x))?;
            Ok(pc + nodal_t_plane(disc, &c.z_nodes, x))
        }
        Density::Iterated(it) => Ok(nodal_t_plane(disc, it.node_values(), x)),
    }
}
