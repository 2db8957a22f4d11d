use std::ops::Range;

use crate::error::Result;
use crate::geometry::{BoundaryPoint, Polygon};
use crate::mesh::GradedMesh;
use crate::quadrature::{gauss_rule, QuadratureRule};
use crate::scalar::Real;

/// Halvings toward a corner inside a panel that touches it.
pub const CORNER_LEVELS: usize = 30;

/// One quadrature node on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNode<T> {
    pub point: BoundaryPoint<T>,
    pub weight: T,
    pub panel: usize,
}

/// Composite Gauss rule over every panel of a mesh.
///
/// Each panel is cut into pieces whose far/near ratio, measured from the
/// closest corner, is at most two, so integrands with corner-relative
/// structure (the kernel across a corner, graded densities) are resolved
/// at every scale. Panels touching a corner get [`CORNER_LEVELS`] dyadic
/// pieces. Nodes of a panel are contiguous.
#[derive(Debug, Clone)]
pub struct BoundaryRule<T> {
    nodes: Vec<GridNode<T>>,
    ranges: Vec<Range<usize>>,
    measures: Vec<T>,
    order: usize,
}

#[derive(Clone, Copy)]
enum Anchor {
    Start,
    End,
}

fn geometric_pieces<T: Real>(near: T, far: T, out: &mut Vec<(T, T)>) {
    let two = T::lit(2.0);
    if near == T::zero() {
        let mut hi = far;
        for _ in 0..CORNER_LEVELS {
            let lo = hi / two;
            out.push((lo, hi));
            hi = lo;
        }
        out.push((T::zero(), hi));
        return;
    }
    let ratio = far / near;
    let k = ratio.log2().ceil().to_f64_lossy().max(1.0) as usize;
    let rho = ratio.powf(T::from_count(k).recip());
    let mut lo = near;
    for i in 1..=k {
        let hi = if i == k { far } else { near * rho.powi(i as i32) };
        out.push((lo, hi));
        lo = hi;
    }
}

impl<T: Real> BoundaryRule<T> {
    pub fn new(mesh: &GradedMesh<T>, order: usize) -> Result<Self> {
        let rule = gauss_rule::<T>(order)?;
        let polygon = mesh.polygon();
        let mut nodes = Vec::new();
        let mut ranges = Vec::with_capacity(mesh.num_panels());
        let mut measures = Vec::with_capacity(mesh.num_panels());
        let mut pieces = Vec::new();
        for (i, panel) in mesh.panels().iter().enumerate() {
            let e = panel.edge_index;
            let half = polygon.edge_length(e) / T::lit(2.0);
            let start = nodes.len();
            let mut measure = Vec::new();
            let spans: Vec<(Anchor, T, T)> = if panel.hi.from_start <= half {
                vec![(Anchor::Start, panel.lo.from_start, panel.hi.from_start)]
            } else if panel.lo.from_start >= half {
                vec![(Anchor::End, panel.hi.from_end, panel.lo.from_end)]
            } else {
                let l = polygon.edge_length(e);
                vec![
                    (Anchor::Start, panel.lo.from_start, half),
                    (Anchor::End, panel.hi.from_end, l - half),
                ]
            };
            for (anchor, near, far) in spans {
                pieces.clear();
                geometric_pieces(near, far, &mut pieces);
                for &(a, b) in &pieces {
                    push_piece(polygon, &rule, e, anchor, a, b, i, &mut nodes, &mut measure);
                }
            }
            measures.push(measure.into_iter().sum());
            ranges.push(start..nodes.len());
        }
        Ok(Self {
            nodes,
            ranges,
            measures,
            order,
        })
    }

    pub fn nodes(&self) -> &[GridNode<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Node indices belonging to panel `i`.
    pub fn panel_range(&self, i: usize) -> Range<usize> {
        self.ranges[i].clone()
    }

    /// Sum of the weights on panel `i` (its length up to rounding).
    pub fn panel_measure(&self, i: usize) -> T {
        self.measures[i]
    }

    /// Panel average of nodal values.
    pub fn panel_average(&self, i: usize, values: &[T]) -> T {
        let r = self.panel_range(i);
        let s = self.nodes[r.clone()]
            .iter()
            .zip(&values[r])
            .fold(T::zero(), |acc, (n, v)| acc + n.weight * *v);
        s / self.measures[i]
    }

    /// Integral over the whole boundary of nodal values.
    pub fn integrate(&self, values: &[T]) -> T {
        self.nodes
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (n, v)| acc + n.weight * *v)
    }
}

#[allow(clippy::too_many_arguments)]
fn push_piece<T: Real>(
    polygon: &Polygon<T>,
    rule: &QuadratureRule<T>,
    edge: usize,
    anchor: Anchor,
    a: T,
    b: T,
    panel: usize,
    nodes: &mut Vec<GridNode<T>>,
    measure: &mut Vec<T>,
) {
    let w = b - a;
    measure.push(w);
    for (x, wx) in rule.nodes().iter().zip(rule.weights()) {
        let d = a + w * *x;
        let point = match anchor {
            Anchor::Start => polygon.from_start(edge, d),
            Anchor::End => polygon.from_end(edge, d),
        };
        nodes.push(GridNode {
            point,
            weight: w * *wx,
            panel,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polygon, default_partition};
    use crate::mesh::GradedMeshSpec;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn mesh(coords: &[[f64; 2]], n: usize, q: f64) -> GradedMesh<f64> {
        let poly = Arc::new(build_polygon(coords).unwrap());
        let part = Arc::new(default_partition(&poly));
        let r = poly.num_corners();
        GradedMesh::new(poly, part, GradedMeshSpec::uniform(r, n, q).unwrap()).unwrap()
    }

    #[test]
    fn measures_match_panel_widths() {
        let m = mesh(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]], 4, 7.0);
        let g = BoundaryRule::new(&m, 10).unwrap();
        for (i, p) in m.panels().iter().enumerate() {
            assert_relative_eq!(g.panel_measure(i), p.width, max_relative = 1e-12);
            for node in &g.nodes()[g.panel_range(i)] {
                assert_eq!(node.panel, i);
                assert_eq!(node.point.edge, p.edge_index);
                assert!(node.point.from_start > p.lo.from_start - 1e-15);
                assert!(node.point.from_start < p.hi.from_start + 1e-15);
            }
        }
        let total: f64 = (0..m.num_panels()).map(|i| g.panel_measure(i)).sum();
        assert_relative_eq!(total, m.polygon().perimeter(), max_relative = 1e-14);
    }

    #[test]
    fn integrates_corner_relative_power() {
        // integral of d^{-1/2} over the panel touching corner 0 on edge 0
        let m = mesh(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 2, 2.0);
        let g = BoundaryRule::new(&m, 10).unwrap();
        let r = g.panel_range(0);
        let vals: Vec<f64> = g.nodes()[r.clone()].iter().map(|n| n.point.from_start.powf(-0.5)).collect();
        let s: f64 = g.nodes()[r].iter().zip(&vals).map(|(n, v)| n.weight * v).sum();
        let w = m.panels()[0].width;
        assert_relative_eq!(s, 2.0 * w.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn pieces_have_bounded_ratio() {
        let mut out = Vec::new();
        geometric_pieces(1e-12, 1.0, &mut out);
        for (a, b) in &out {
            assert!(b / a <= 2.0 + 1e-12);
        }
        assert_eq!(out.last().unwrap().1, 1.0);
    }
}
