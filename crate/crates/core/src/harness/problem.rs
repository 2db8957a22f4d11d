use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, PartitionSpec, Polygon};
use crate::kernel::apply_t_pc_at;
use crate::operators::{BoundaryFn, PiecewiseConstant};
use crate::point::Point2;
use crate::scalar::Real;

use super::grid::evaluation_grid;
use super::oracle::apply_t_oracle;

/// Shape of a manufactured density.
#[derive(Clone)]
pub enum Profile<T> {
    /// `cos(2 pi s / L)`.
    Smooth,
    /// Smooth part plus `d_j^{alpha_j^* + 0.05}` near every corner.
    CornerSingular,
    /// Any density given in corner-accurate coordinates.
    Custom(BoundaryFn<T>),
}

impl<T> std::fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Profile::Smooth => f.write_str("Smooth"),
            Profile::CornerSingular => f.write_str("CornerSingular"),
            Profile::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Clone)]
pub enum ProblemKind<T: Real> {
    /// Known density `u_exact`; `f = u_exact + T u_exact`.
    Manufactured { u_exact: BoundaryFn<T> },
    /// `f = g` on the boundary with `g(x) = ln|x - x_ext|`, checked at
    /// interior points against `g`.
    Harmonic {
        x_ext: Point2<T>,
        checkpoints: Vec<Point2<T>>,
    },
}

/// A right-hand side together with the means to measure errors.
#[derive(Clone)]
pub struct Problem<T: Real> {
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    kind: ProblemKind<T>,
    f: BoundaryFn<T>,
    oracle_tol: T,
    grid: Arc<Vec<BoundaryPoint<T>>>,
    grid_f: Arc<OnceLock<Vec<T>>>,
}

impl<T: Real> std::fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("corners", &self.polygon.num_corners())
            .field("harmonic", &self.is_harmonic())
            .field("oracle_tol", &self.oracle_tol)
            .finish()
    }
}

impl<T: Real> Problem<T> {
    fn build(polygon: Arc<Polygon<T>>, partition: Arc<PartitionSpec<T>>, kind: ProblemKind<T>, f: BoundaryFn<T>, oracle_tol: T) -> Self {
        let grid = Arc::new(evaluation_grid(&polygon, &partition));
        Self {
            polygon,
            partition,
            kind,
            f,
            oracle_tol,
            grid,
            grid_f: Arc::new(OnceLock::new()),
        }
    }

    /// Manufactured problem with an explicitly known right-hand side.
    pub fn with_data(
        polygon: Arc<Polygon<T>>,
        partition: Arc<PartitionSpec<T>>,
        u_exact: BoundaryFn<T>,
        f: BoundaryFn<T>,
    ) -> Self {
        Self::build(polygon, partition, ProblemKind::Manufactured { u_exact }, f, T::zero())
    }

    pub fn polygon(&self) -> &Arc<Polygon<T>> {
        &self.polygon
    }

    pub fn partition(&self) -> &Arc<PartitionSpec<T>> {
        &self.partition
    }

    pub fn kind(&self) -> &ProblemKind<T> {
        &self.kind
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self.kind, ProblemKind::Harmonic { .. })
    }

    pub fn oracle_tol(&self) -> T {
        self.oracle_tol
    }

    pub fn rhs(&self) -> &BoundaryFn<T> {
        &self.f
    }

    pub fn u_exact(&self) -> Option<&BoundaryFn<T>> {
        match &self.kind {
            ProblemKind::Manufactured { u_exact } => Some(u_exact),
            ProblemKind::Harmonic { .. } => None,
        }
    }

    /// Evaluation grid shared by every mesh of this problem.
    pub fn grid(&self) -> &[BoundaryPoint<T>] {
        &self.grid
    }

    /// Right-hand side on the evaluation grid, computed once.
    pub fn grid_rhs(&self) -> &[T] {
        self.grid_f
            .get_or_init(|| self.grid.par_iter().map(|p| (self.f)(p)).collect())
    }

    /// Oracle `(T g)(p)` at the problem's tolerance.
    pub fn apply_t_oracle(&self, g: &BoundaryFn<T>, p: &BoundaryPoint<T>) -> Result<T> {
        apply_t_oracle(&self.polygon, g.as_ref(), p, self.oracle_tol)
    }

    /// Copy with a different oracle tolerance (right-hand side rebuilt).
    pub fn with_oracle_tol(&self, tol: T) -> Self {
        match &self.kind {
            ProblemKind::Manufactured { u_exact } => {
                manufactured_from(self.polygon.clone(), self.partition.clone(), u_exact.clone(), tol)
            }
            ProblemKind::Harmonic { .. } => {
                let mut p = self.clone();
                p.oracle_tol = tol;
                p
            }
        }
    }
}

fn manufactured_from<T: Real>(
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    u_exact: BoundaryFn<T>,
    tol: T,
) -> Problem<T> {
    let poly = polygon.clone();
    let u = u_exact.clone();
    // Meshes of one study share most quadrature nodes bit for bit, so oracle
    // values are memoized by exact boundary coordinates.
    let cache: Mutex<HashMap<(usize, [u64; 3]), T>> = Mutex::new(HashMap::new());
    let f: BoundaryFn<T> = Arc::new(move |p: &BoundaryPoint<T>| {
        let bits = |v: T| v.to_f64_lossy().to_bits();
        let key = (p.edge, [bits(p.from_start), bits(p.from_end), bits(p.s)]);
        if let Some(v) = cache.lock().expect("cache lock").get(&key) {
            return *v;
        }
        // A failed oracle surfaces as a non-finite value downstream.
        let tu = apply_t_oracle(&poly, u.as_ref(), p, tol).unwrap_or_else(|_| T::nan());
        let v = u(p) + tu;
        cache.lock().expect("cache lock").insert(key, v);
        v
    });
    Problem::build(polygon, partition, ProblemKind::Manufactured { u_exact }, f, tol)
}

/// `C^infinity` cutoff: 1 on `[0, 1/2]`, 0 on `[1, inf)`.
fn cutoff<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x <= half {
        return T::one();
    }
    if x >= T::one() {
        return T::zero();
    }
    let t = (x - half) / half;
    let a = (-T::one() / t).exp();
    let b = (-T::one() / (T::one() - t)).exp();
    b / (a + b)
}

fn smooth_part<T: Real>(perimeter: T) -> impl Fn(&BoundaryPoint<T>) -> T + Send + Sync {
    move |p: &BoundaryPoint<T>| (T::TAU() * p.s / perimeter).cos()
}

/// Manufactured problem for a density profile; `f` is evaluated on demand
/// through the adaptive oracle at tolerance `oracle_tol`.
pub fn make_manufactured<T: Real>(
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    profile: Profile<T>,
    oracle_tol: T,
) -> Problem<T> {
    let perimeter = polygon.perimeter();
    let u_exact: BoundaryFn<T> = match profile {
        Profile::Smooth => Arc::new(smooth_part(perimeter)),
        Profile::CornerSingular => {
            let r = polygon.num_corners();
            let exps: Vec<T> = polygon.alpha_star().iter().map(|a| *a + T::lit(0.05)).collect();
            let before: Vec<T> = (0..r).map(|j| partition.before_len(j)).collect();
            let after: Vec<T> = (0..r).map(|j| partition.after_len(j)).collect();
            let smooth = smooth_part(perimeter);
            Arc::new(move |p: &BoundaryPoint<T>| {
                // Edge e leaves corner e and arrives at corner e + 1.
                let e = p.edge;
                let next = (e + 1) % r;
                let leaving = p.from_start.powf(exps[e]) * cutoff(p.from_start / after[e]);
                let arriving = p.from_end.powf(exps[next]) * cutoff(p.from_end / before[next]);
                smooth(p) + leaving + arriving
            })
        }
        Profile::Custom(u) => u,
    };
    manufactured_from(polygon, partition, u_exact, oracle_tol)
}

/// Manufactured problem whose density is piecewise constant on `pc`'s
/// mesh; `T u` is exact by angle sums, so no oracle is involved.
pub fn make_piecewise_constant<T: Real>(pc: &PiecewiseConstant<T>, partition: Arc<PartitionSpec<T>>) -> Problem<T> {
    let mesh = pc.mesh().clone();
    let coeffs: Arc<Vec<T>> = Arc::new(pc.coeffs().to_vec());
    let (m, c) = (mesh.clone(), coeffs.clone());
    let u: BoundaryFn<T> = Arc::new(move |p: &BoundaryPoint<T>| m.panel_of(p).map_or_else(|_| T::nan(), |i| c[i]));
    let u2 = u.clone();
    let f: BoundaryFn<T> = Arc::new(move |p: &BoundaryPoint<T>| {
        u2(p) + apply_t_pc_at(mesh.polygon(), mesh.panels(), &coeffs, p)
    });
    Problem::with_data(pc.mesh().polygon().clone(), partition, u, f)
}

/// Interior Dirichlet problem with data `g(x) = ln|x - x_ext|`.
pub fn make_harmonic<T: Real>(
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    x_ext: Point2<T>,
    checkpoints: Vec<Point2<T>>,
    oracle_tol: T,
) -> Result<Problem<T>> {
    if polygon.winding_number(x_ext) != T::zero() {
        return Err(Error::PointPlacement(format!(
            "exterior point ({}, {}) is not outside the polygon",
            x_ext.x, x_ext.y
        )));
    }
    if let Some(c) = checkpoints.iter().find(|c| polygon.winding_number(**c) != T::one()) {
        return Err(Error::PointPlacement(format!(
            "checkpoint ({}, {}) is not inside the polygon",
            c.x, c.y
        )));
    }
    let poly = polygon.clone();
    let f: BoundaryFn<T> = Arc::new(move |p: &BoundaryPoint<T>| (poly.position(p) - x_ext).norm().ln());
    Ok(Problem::build(
        polygon,
        partition,
        ProblemKind::Harmonic { x_ext, checkpoints },
        f,
        oracle_tol,
    ))
}

/// `g(x) = ln|x - x_ext|`.
pub fn harmonic_value<T: Real>(x_ext: Point2<T>, x: Point2<T>) -> T {
    (x - x_ext).norm().ln()
}
