//! Double-layer kernel `k(x, y) = (1/pi) n_y . (y - x) / |y - x|^2`.
//!
//! With counterclockwise orientation and outward normals this reproduces
//! the positive corner form `sin(p pi)/pi * a / (a^2 + b^2 + 2ab cos(p pi))`.
//! On the boundary the operator takes its direct value: sources on the
//! observation point's own edge contribute nothing.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Polygon};
use crate::mesh::{GradedMesh, Panel};
use crate::point::{signed_angle, Point2};
use crate::scalar::Real;

/// Kernel between two boundary points; zero when they share an edge.
pub fn kernel_between<T: Real>(polygon: &Polygon<T>, obs: &BoundaryPoint<T>, src: &BoundaryPoint<T>) -> T {
    if obs.edge == src.edge {
        return T::zero();
    }
    let d = polygon.separation(src, obs);
    polygon.outward_normal(src.edge).dot(d) / (T::PI() * d.norm_squared())
}

/// Kernel from a plane point to a boundary source point.
pub fn kernel_from_point<T: Real>(polygon: &Polygon<T>, x: Point2<T>, src: &BoundaryPoint<T>) -> T {
    let d = polygon.position(src) - x;
    polygon.outward_normal(src.edge).dot(d) / (T::PI() * d.norm_squared())
}

/// `k(x(s), x(t))` for arclengths `s` (observation) and `t` (source).
pub fn kernel_eval<T: Real>(polygon: &Polygon<T>, s: T, t: T) -> Result<T> {
    if polygon.modular_distance(s, t) <= T::lit(1e-14) * polygon.perimeter() {
        return Err(Error::CoincidentPoints(s.to_f64_lossy()));
    }
    if polygon.is_corner(t) {
        return Err(Error::CornerSource(t.to_f64_lossy()));
    }
    Ok(kernel_between(polygon, &polygon.locate(s), &polygon.locate(t)))
}

/// Closed form of the kernel across corner `j` with parameter `p`, for an
/// observation point at distance `a` and a source at distance `b` from the
/// corner on the opposite edge.
pub fn corner_kernel<T: Real>(p: T, a: T, b: T) -> Result<T> {
    if !(p.abs() < T::one()) {
        return Err(Error::InvalidCornerParam(p.to_f64_lossy()));
    }
    let angle = p * T::PI();
    let two = T::lit(2.0);
    Ok(angle.sin() / T::PI() * a / (a * a + b * b + two * a * b * angle.cos()))
}

/// Subtended angle over pi: `integral over the panel of k(x_obs, y) ds_y`.
pub fn panel_angle_integral<T: Real>(x_obs: Point2<T>, panel: &Panel<T>) -> Result<T> {
    let v1 = panel.endpoints_plane[0] - x_obs;
    let v2 = panel.endpoints_plane[1] - x_obs;
    let cross = v1.cross(v2);
    let dot = v1.dot(v2);
    if cross == T::zero() && dot <= T::zero() {
        return Err(Error::ObservationOnPanel {
            panel: usize::MAX,
        });
    }
    Ok(cross.atan2(dot) / T::PI())
}

/// Direct boundary value of the subtended angle of `panel` seen from `obs`.
pub fn panel_angle_on_boundary<T: Real>(polygon: &Polygon<T>, obs: &BoundaryPoint<T>, panel: &Panel<T>) -> T {
    if obs.edge == panel.edge_index {
        return T::zero();
    }
    let v1 = polygon.separation(&panel.lo, obs);
    let v2 = polygon.separation(&panel.hi, obs);
    signed_angle(v1, v2) / T::PI()
}

/// Adjoint panel integral `integral over the panel of k(x(s), y) ds` for a
/// fixed boundary source `y`, in closed form.
///
/// With `d0 = y - P`, `d1 = y - Q` for the panel endpoints `P`, `Q`, unit
/// tangent `e` and `e_perp` its left normal:
/// `integral of (y - x)/|y - x|^2 ds = ln(|d0|/|d1|) e + angle(d0, d1) e_perp`.
pub fn adjoint_panel_integral<T: Real>(polygon: &Polygon<T>, src: &BoundaryPoint<T>, panel: &Panel<T>) -> T {
    if src.edge == panel.edge_index {
        return T::zero();
    }
    let d0 = polygon.separation(src, &panel.lo);
    let d1 = polygon.separation(src, &panel.hi);
    let e = polygon.tangent(panel.edge_index);
    let n = polygon.outward_normal(src.edge);
    let log_term = (d0.norm() / d1.norm()).ln();
    let angle = signed_angle(d0, d1);
    (log_term * n.dot(e) + angle * n.dot(e.rot_ccw())) / T::PI()
}

/// Where a double-layer of a piecewise-constant density is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observer<T> {
    Plane(Point2<T>),
    /// Boundary arclength (direct value).
    Boundary(T),
}

/// `(T v)(x)` for a piecewise-constant density `v` given by panel coefficients.
pub fn apply_t_pc<T: Real>(mesh: &GradedMesh<T>, coeffs: &[T], observer: Observer<T>) -> Result<T> {
    if coeffs.len() != mesh.num_panels() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} panels",
            coeffs.len(),
            mesh.num_panels()
        )));
    }
    let polygon = mesh.polygon();
    match observer {
        Observer::Plane(x) => {
            let mut terms = Vec::with_capacity(coeffs.len());
            for (i, (panel, c)) in mesh.panels().iter().zip(coeffs).enumerate() {
                let a = panel_angle_integral(x, panel).map_err(|_| Error::ObservationOnPanel { panel: i })?;
                terms.push(*c * a);
            }
            Ok(crate::scalar::compensated_sum(terms))
        }
        Observer::Boundary(s) => {
            let obs = polygon.locate(s);
            if obs.from_start == T::zero() {
                // The panel ending at this corner would be seen edge-on.
                let n = mesh.num_panels();
                let next = mesh.panels().partition_point(|p| p.t_lo < obs.s) % n;
                return Err(Error::ObservationOnPanel {
                    panel: (next + n - 1) % n,
                });
            }
            Ok(apply_t_pc_at(polygon, mesh.panels(), coeffs, &obs))
        }
    }
}

/// Boundary evaluation of a piecewise-constant double layer at `obs`.
pub fn apply_t_pc_at<T: Real>(
    polygon: &Polygon<T>,
    panels: &[Panel<T>],
    coeffs: &[T],
    obs: &BoundaryPoint<T>,
) -> T {
    crate::scalar::compensated_sum(
        panels
            .iter()
            .zip(coeffs)
            .map(|(p, c)| *c * panel_angle_on_boundary(polygon, obs, p)),
    )
}
