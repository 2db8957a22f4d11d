use crate::error::Result;
use crate::geometry::{BoundaryPoint, Polygon};
use crate::kernel::kernel_between;
use crate::quadrature::{AdaptiveIntegrator, DEFAULT_ORDER};
use crate::scalar::Real;

/// Ratio between consecutive corner-anchored oracle pieces.
const PIECE_RATIO: f64 = 8.0;

/// Integration pieces on one half of edge `e`, as distances from the anchor
/// vertex: geometric toward the anchor down to `floor`, then `[0, floor]`.
fn half_edge_pieces<T: Real>(half: T, floor: T) -> Vec<(T, T)> {
    let ratio = T::lit(PIECE_RATIO);
    let mut pieces = Vec::new();
    let mut hi = half;
    while hi > floor && pieces.len() < 64 {
        let lo = hi / ratio;
        pieces.push((lo, hi));
        hi = lo;
    }
    pieces.push((T::zero(), hi));
    pieces
}

/// Brute-force `(T u)(obs)` by adaptive quadrature over every other edge.
///
/// Each edge is split at its midpoint; each half is parametrized by the
/// distance to its own vertex and cut geometrically toward it, so corner
/// structure is handled by the adaptive rule at the correct relative scale.
pub fn apply_t_oracle<T: Real, U>(polygon: &Polygon<T>, u: &U, obs: &BoundaryPoint<T>, tol: T) -> Result<T>
where
    U: Fn(&BoundaryPoint<T>) -> T + ?Sized,
{
    let integrator = AdaptiveIntegrator::<T>::new(DEFAULT_ORDER)?;
    let r = polygon.num_corners();
    let milli = T::lit(1e-3);
    let mut pieces = Vec::new();
    let mut anchors = Vec::new();
    for e in 0..r {
        if e == obs.edge {
            continue;
        }
        let half = polygon.edge_length(e) / T::lit(2.0);
        for from_start in [true, false] {
            // Across a shared vertex the kernel varies on the scale of the
            // observation point's own distance to that vertex.
            let floor = if from_start && e == polygon.next_edge(obs.edge) {
                milli * obs.from_end
            } else if !from_start && e == polygon.prev_edge(obs.edge) {
                milli * obs.from_start
            } else {
                milli * half
            };
            for p in half_edge_pieces(half, floor) {
                pieces.push(p);
                anchors.push((e, from_start));
            }
        }
    }
    let f = |k: usize, d: T| {
        let (e, from_start) = anchors[k];
        let src = if from_start {
            polygon.from_start(e, d)
        } else {
            polygon.from_end(e, d)
        };
        kernel_between(polygon, obs, &src) * u(&src)
    };
    Ok(integrator.integrate_pieces(f, &pieces, tol)?.value)
}

/// Brute-force average `(1/|I|) integral over I of g` on a stretch of edge `e`
/// given as distances `[a, b]` from its start vertex, refined toward the
/// nearer vertex.
pub fn edge_average_oracle<T: Real, G>(polygon: &Polygon<T>, e: usize, a: T, b: T, g: &G, tol: T) -> Result<T>
where
    G: Fn(&BoundaryPoint<T>) -> T + ?Sized,
{
    let integrator = AdaptiveIntegrator::<T>::new(DEFAULT_ORDER)?;
    let len = polygon.edge_length(e);
    let half = len / T::lit(2.0);
    // (anchor_start, near, far) spans by distance from the anchor vertex
    let mut spans = Vec::new();
    if b <= half {
        spans.push((true, a, b));
    } else if a >= half {
        spans.push((false, len - b, len - a));
    } else {
        spans.push((true, a, half));
        spans.push((false, len - b, half));
    }
    let mut pieces = Vec::new();
    let mut anchors = Vec::new();
    for (anchor, near, far) in spans {
        let mut hi = far;
        let ratio = T::lit(PIECE_RATIO);
        while hi / ratio > near && pieces.len() < 64 {
            pieces.push((hi / ratio, hi));
            anchors.push(anchor);
            hi = hi / ratio;
        }
        pieces.push((near, hi));
        anchors.push(anchor);
    }
    let f = |k: usize, d: T| {
        let p = if anchors[k] {
            polygon.from_start(e, d)
        } else {
            polygon.from_end(e, d)
        };
        g(&p)
    };
    Ok(integrator.integrate_pieces(f, &pieces, tol)?.value / (b - a))
}
