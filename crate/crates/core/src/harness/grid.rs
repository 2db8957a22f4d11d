use crate::geometry::{BoundaryPoint, PartitionSpec, Polygon};
use crate::scalar::Real;

/// Points per half-segment.
pub const GRID_POINTS: usize = 33;
/// Grading exponent of the grid toward each corner.
pub const GRID_GRADING: f64 = 7.0;
/// Offset from corners and partition points, relative to the perimeter.
pub const GRID_OFFSET: f64 = 2e-6;

/// Mesh-independent evaluation points.
///
/// On each half-segment of length `l` the points sit at distances
/// `delta + (i/32)^7 (l - 2 delta)` from the corner with
/// `delta = 2e-6 L`, so none is closer than `delta` to a corner or to a
/// partition point. Ordered by segment, then before/after half, then
/// distance from the corner.
pub fn evaluation_grid<T: Real>(polygon: &Polygon<T>, partition: &PartitionSpec<T>) -> Vec<BoundaryPoint<T>> {
    let r = polygon.num_corners();
    let delta = T::lit(GRID_OFFSET) * polygon.perimeter();
    let q = T::lit(GRID_GRADING);
    let last = T::from_count(GRID_POINTS - 1);
    let mut out = Vec::with_capacity(2 * r * GRID_POINTS);
    for j in 0..r {
        for (len, before) in [(partition.before_len(j), true), (partition.after_len(j), false)] {
            for i in 0..GRID_POINTS {
                let d = delta + (T::from_count(i) / last).powf(q) * (len - delta - delta);
                out.push(if before {
                    polygon.from_end(polygon.prev_edge(j), d)
                } else {
                    polygon.from_start(j, d)
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polygon, default_partition};

    #[test]
    fn square_grid_has_264_points_away_from_corners() {
        let sq = build_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let part = default_partition(&sq);
        let g = evaluation_grid(&sq, &part);
        assert_eq!(g.len(), 264);
        let l = sq.perimeter();
        for p in &g {
            assert!(p.corner_distance() >= 1e-6 * l);
            for gam in part.gamma() {
                assert!(sq.modular_distance(p.s, *gam) >= 1e-6 * l * 0.999);
            }
        }
    }
}
