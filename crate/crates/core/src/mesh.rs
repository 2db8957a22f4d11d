//! Corner-graded meshes.
//!
//! Segment `j` is split at its corner into the half `[gamma_{j-1}, s_j]`
//! (side [`Side::Before`]) and `[s_j, gamma_j]` (side [`Side::After`]),
//! each carrying `n_j` panels whose breakpoints follow the power law
//! `(i / n_j)^{q_j}` in the distance to the corner.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, PartitionSpec, Polygon};
use crate::point::Point2;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `[gamma_{j-1}, s_j]`, on the edge arriving at the corner.
    Before,
    /// `[s_j, gamma_j]`, on the edge leaving the corner.
    After,
}

/// Panel counts and grading exponents, one of each per corner segment.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMeshSpec<T> {
    pub n: Vec<usize>,
    pub q: Vec<T>,
}

impl<T: Real> GradedMeshSpec<T> {
    pub fn new(n: Vec<usize>, q: Vec<T>) -> Result<Self> {
        let spec = Self { n, q };
        spec.check(spec.n.len())?;
        Ok(spec)
    }

    /// Same `n` and `q` on all `r` segments.
    pub fn uniform(r: usize, n: usize, q: T) -> Result<Self> {
        Self::new(vec![n; r], vec![q; r])
    }

    fn check(&self, r: usize) -> Result<()> {
        if self.n.len() != r || self.q.len() != r {
            return Err(Error::InvalidSpec(format!(
                "expected {r} entries for n and q, got {} and {}",
                self.n.len(),
                self.q.len()
            )));
        }
        if let Some(j) = self.n.iter().position(|n| *n < 1) {
            return Err(Error::InvalidSpec(format!("n[{j}] must be at least 1")));
        }
        if let Some(j) = self.q.iter().position(|q| !(*q >= T::one())) {
            return Err(Error::InvalidSpec(format!(
                "q[{j}] = {} must be at least 1",
                self.q[j]
            )));
        }
        Ok(())
    }

    /// Spec with every `n_j` multiplied by `2^levels`.
    pub fn doubled(&self, levels: u32) -> Self {
        Self {
            n: self.n.iter().map(|n| n << levels).collect(),
            q: self.q.clone(),
        }
    }

    /// `max_j 1 / n_j`.
    pub fn h_max(&self) -> T {
        let n_min = self.n.iter().copied().min().unwrap_or(1);
        T::from_count(n_min).recip()
    }
}

/// Straight boundary panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel<T> {
    pub t_lo: T,
    pub t_hi: T,
    pub width: T,
    pub edge_index: usize,
    pub endpoints_plane: [Point2<T>; 2],
    pub midpoint_arclength: T,
    pub lo: BoundaryPoint<T>,
    pub hi: BoundaryPoint<T>,
    pub segment: usize,
    pub side: Side,
}

#[derive(Debug, Clone)]
pub struct GradedMesh<T> {
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    spec: GradedMeshSpec<T>,
    panels: Vec<Panel<T>>,
    h_max: T,
    ranges: Vec<[Range<usize>; 2]>,
}

fn graded_distances<T: Real>(n: usize, q: T, len: T) -> Vec<T> {
    let nf = T::from_count(n);
    (0..=n)
        .map(|i| (T::from_count(i) / nf).powf(q) * len)
        .collect()
}

impl<T: Real> GradedMesh<T> {
    pub fn new(
        polygon: Arc<Polygon<T>>,
        partition: Arc<PartitionSpec<T>>,
        spec: GradedMeshSpec<T>,
    ) -> Result<Self> {
        let r = polygon.num_corners();
        spec.check(r)?;
        if partition.num_segments() != r {
            return Err(Error::InvalidSpec(format!(
                "partition has {} segments, polygon has {r} corners",
                partition.num_segments()
            )));
        }

        let total: usize = spec.n.iter().map(|n| 2 * n).sum();
        let mut panels = Vec::with_capacity(total);
        let mut ranges = vec![[0..0, 0..0]; r];
        let two = T::lit(2.0);

        let push = |panels: &mut Vec<Panel<T>>,
                    lo: BoundaryPoint<T>,
                    hi: BoundaryPoint<T>,
                    width: T,
                    t_lo: T,
                    t_hi: T,
                    segment: usize,
                    side: Side| {
            panels.push(Panel {
                t_lo,
                t_hi,
                width,
                edge_index: lo.edge,
                endpoints_plane: [polygon.position(&lo), polygon.position(&hi)],
                midpoint_arclength: (t_lo + t_hi) / two,
                lo,
                hi,
                segment,
                side,
            });
        };

        for e in 0..r {
            let s_start = polygon.corner_arclengths()[e];
            let s_end = polygon.edge_end_arclength(e);

            // After-half of the segment centred at the start of this edge.
            let j = e;
            let start = panels.len();
            let c = graded_distances(spec.n[j], spec.q[j], partition.after_len(j));
            for i in 0..spec.n[j] {
                let lo = polygon.from_start(e, c[i]);
                let hi = polygon.from_start(e, c[i + 1]);
                push(
                    &mut panels,
                    lo,
                    hi,
                    c[i + 1] - c[i],
                    s_start + c[i],
                    s_start + c[i + 1],
                    j,
                    Side::After,
                );
            }
            ranges[j][1] = start..panels.len();

            // Before-half of the segment centred at the end of this edge.
            let k = polygon.next_edge(e);
            let start = panels.len();
            let d = graded_distances(spec.n[k], spec.q[k], partition.before_len(k));
            for i in (0..spec.n[k]).rev() {
                let lo = polygon.from_end(e, d[i + 1]);
                let hi = polygon.from_end(e, d[i]);
                push(
                    &mut panels,
                    lo,
                    hi,
                    d[i + 1] - d[i],
                    s_end - d[i + 1],
                    s_end - d[i],
                    k,
                    Side::Before,
                );
            }
            ranges[k][0] = start..panels.len();
        }

        let h_max = spec.h_max();
        Ok(Self {
            polygon,
            partition,
            spec,
            panels,
            h_max,
            ranges,
        })
    }

    pub fn polygon(&self) -> &Arc<Polygon<T>> {
        &self.polygon
    }

    pub fn partition(&self) -> &Arc<PartitionSpec<T>> {
        &self.partition
    }

    pub fn spec(&self) -> &GradedMeshSpec<T> {
        &self.spec
    }

    pub fn panels(&self) -> &[Panel<T>] {
        &self.panels
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    /// `max_j 1 / n_j`.
    pub fn h_max(&self) -> T {
        self.h_max
    }

    pub fn segment_of_panel(&self, i: usize) -> (usize, Side) {
        (self.panels[i].segment, self.panels[i].side)
    }

    /// Panel indices of one half of segment `j`, ordered by arclength.
    pub fn half_segment(&self, j: usize, side: Side) -> Range<usize> {
        match side {
            Side::Before => self.ranges[j][0].clone(),
            Side::After => self.ranges[j][1].clone(),
        }
    }

    /// Breakpoints `t_{j,0..2n_j}` of segment `j` as arclengths, with the
    /// before-half expressed relative to `s_j` (negative for segment 0).
    pub fn segment_nodes(&self, j: usize) -> Vec<T> {
        let s_j = self.polygon.corner_arclengths()[j];
        let d = graded_distances(self.spec.n[j], self.spec.q[j], self.partition.before_len(j));
        let c = graded_distances(self.spec.n[j], self.spec.q[j], self.partition.after_len(j));
        d.iter()
            .rev()
            .map(|d| s_j - *d)
            .chain(c.iter().skip(1).map(|c| s_j + *c))
            .collect()
    }

    /// Index of the panel whose interior contains arclength `s`.
    pub fn panel_at(&self, s: T) -> Result<usize> {
        let s = self.polygon.wrap(s);
        let idx = self.panels.partition_point(|p| p.t_lo <= s);
        if idx == 0 {
            return Err(Error::EvaluationAtBreakpoint(s.to_f64_lossy()));
        }
        let i = idx - 1;
        if self.panels[i].t_lo == s {
            return Err(Error::EvaluationAtBreakpoint(s.to_f64_lossy()));
        }
        Ok(i)
    }

    /// Panel containing a boundary point, located by edge and distance to
    /// the nearer edge end so that points next to a corner resolve exactly.
    pub fn panel_of(&self, p: &BoundaryPoint<T>) -> Result<usize> {
        let on_edge = |q: &Panel<T>| q.edge_index == p.edge;
        let first = self.panels.partition_point(|q| q.edge_index < p.edge);
        let count = self.panels[first..].iter().take_while(|q| on_edge(q)).count();
        let edge_panels = &self.panels[first..first + count];
        let k = if p.from_start <= p.from_end {
            edge_panels.partition_point(|q| q.lo.from_start < p.from_start)
        } else {
            edge_panels.partition_point(|q| q.lo.from_end > p.from_end)
        };
        let breakpoint = || Error::EvaluationAtBreakpoint(p.s.to_f64_lossy());
        if k == 0 {
            return Err(breakpoint());
        }
        let q = &edge_panels[k - 1];
        let at_hi = if p.from_start <= p.from_end {
            p.from_start >= q.hi.from_start
        } else {
            p.from_end <= q.hi.from_end
        };
        if at_hi {
            return Err(breakpoint());
        }
        Ok(first + k - 1)
    }

    /// New mesh with `n_j` doubled; all other segments are rebuilt identically.
    pub fn refine_segment(&self, j: usize) -> Result<Self> {
        let r = self.polygon.num_corners();
        if j >= r {
            return Err(Error::SegmentOutOfRange { index: j, count: r });
        }
        let mut spec = self.spec.clone();
        spec.n[j] *= 2;
        Self::new(self.polygon.clone(), self.partition.clone(), spec)
    }
}

pub fn build_graded_mesh<T: Real>(
    polygon: Arc<Polygon<T>>,
    partition: Arc<PartitionSpec<T>>,
    spec: GradedMeshSpec<T>,
) -> Result<GradedMesh<T>> {
    GradedMesh::new(polygon, partition, spec)
}

/// Grading exponents `q_j = m (1 + |p_j|) + 1` for expansion order `m`.
///
/// Strictly exceeds `m / alpha_j^*`, so `q_j > m / alpha_j` holds for some
/// admissible `alpha_j < alpha_j^*`.
pub fn recommend_grading<T: Real>(polygon: &Polygon<T>, expansion_order: usize) -> Result<Vec<T>> {
    if expansion_order != 2 && expansion_order != 4 {
        return Err(Error::UnsupportedOrder(expansion_order));
    }
    let m = T::from_count(expansion_order);
    Ok(polygon
        .corner_params()
        .iter()
        .map(|p| m * (T::one() + p.abs()) + T::one())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polygon, default_partition};
    use approx::assert_abs_diff_eq;

    fn square_mesh(n: usize, q: f64) -> GradedMesh<f64> {
        let poly = Arc::new(build_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap());
        let part = Arc::new(default_partition(&poly));
        GradedMesh::new(poly, part, GradedMeshSpec::uniform(4, n, q).unwrap()).unwrap()
    }

    /// Segment with gamma at distance 1 on both sides of the corner.
    fn unit_segment_mesh(n: usize, q: f64) -> GradedMesh<f64> {
        let poly = Arc::new(build_polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]).unwrap());
        let part = Arc::new(default_partition(&poly));
        GradedMesh::new(poly, part, GradedMeshSpec::uniform(4, n, q).unwrap()).unwrap()
    }

    #[test]
    fn node_formula_examples() {
        let m = unit_segment_mesh(2, 2.0);
        let nodes = m.segment_nodes(1);
        let expect = [-1.0, -0.25, 0.0, 0.25, 1.0];
        for (a, b) in nodes.iter().zip(expect) {
            assert_abs_diff_eq!(*a - 2.0, b, epsilon = 1e-15);
        }
        let m = unit_segment_mesh(2, 1.0);
        let nodes: Vec<f64> = m.segment_nodes(0);
        assert_eq!(nodes, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let m = unit_segment_mesh(1, 3.0);
        assert_eq!(m.segment_nodes(2), vec![3.0, 4.0, 5.0]);
        assert_eq!(m.num_panels(), 8);
    }

    #[test]
    fn panels_tile_boundary_in_order() {
        let m = square_mesh(5, 3.0);
        assert_eq!(m.num_panels(), 40);
        let panels = m.panels();
        assert_eq!(panels[0].t_lo, 0.0);
        assert_eq!(panels.last().unwrap().t_hi, 4.0);
        for w in panels.windows(2) {
            assert!(w[0].t_lo < w[0].t_hi);
            assert_abs_diff_eq!(w[0].t_hi, w[1].t_lo, epsilon = 1e-15);
        }
        let total: f64 = panels.iter().map(|p| p.width).sum();
        assert_abs_diff_eq!(total, 4.0, epsilon = 1e-12);
        for p in panels {
            assert_eq!(p.lo.edge, p.hi.edge);
            assert_eq!(p.edge_index, m.polygon().edge_at(p.midpoint_arclength));
        }
    }

    #[test]
    fn widths_grow_away_from_corner() {
        let m = square_mesh(6, 4.0);
        for j in 0..4 {
            let after: Vec<f64> = m.half_segment(j, Side::After).map(|i| m.panels()[i].width).collect();
            assert!(after.windows(2).all(|w| w[0] < w[1]));
            let before: Vec<f64> = m.half_segment(j, Side::Before).map(|i| m.panels()[i].width).collect();
            assert!(before.windows(2).all(|w| w[0] > w[1]));
            let smallest = (1.0f64 / 6.0).powf(4.0) * 0.5;
            assert_abs_diff_eq!(after[0], smallest, epsilon = 1e-14 * smallest);
            assert_abs_diff_eq!(*before.last().unwrap(), smallest, epsilon = 1e-14 * smallest);
        }
    }

    #[test]
    fn refine_segment_doubles_one_count() {
        let m = square_mesh(4, 7.0);
        let r = m.refine_segment(0).unwrap();
        assert_eq!(r.spec().n, vec![8, 4, 4, 4]);
        assert_eq!(r.num_panels(), 40);
        for j in 1..4 {
            for side in [Side::Before, Side::After] {
                let a: Vec<_> = m.half_segment(j, side).map(|i| m.panels()[i].clone()).collect();
                let b: Vec<_> = r.half_segment(j, side).map(|i| r.panels()[i].clone()).collect();
                assert_eq!(a, b);
            }
        }
        let twice = r.refine_segment(0).unwrap();
        assert_eq!(twice.spec().n[0], 16);
        let all = (0..4).try_fold(m.clone(), |acc, j| acc.refine_segment(j)).unwrap();
        assert_eq!(all.panels(), square_mesh(8, 7.0).panels());
        assert_eq!(
            m.refine_segment(4).unwrap_err(),
            Error::SegmentOutOfRange { index: 4, count: 4 }
        );
    }

    #[test]
    fn spec_validation() {
        assert!(GradedMeshSpec::new(vec![4, 0], vec![1.0, 1.0]).is_err());
        assert!(GradedMeshSpec::new(vec![4, 4], vec![1.0, 0.5]).is_err());
        let poly = Arc::new(build_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap());
        let part = Arc::new(default_partition(&poly));
        let spec = GradedMeshSpec::uniform(4, 2, 1.0).unwrap();
        assert!(matches!(GradedMesh::new(poly, part, spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn grading_recommendations() {
        let sq = build_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        for q in recommend_grading(&sq, 4).unwrap() {
            assert_abs_diff_eq!(q, 7.0, epsilon = 1e-14);
        }
        for q in recommend_grading(&sq, 2).unwrap() {
            assert_abs_diff_eq!(q, 4.0, epsilon = 1e-14);
        }
        let l = build_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [0.0, -1.0]]).unwrap();
        let q = recommend_grading(&l, 4).unwrap();
        assert_abs_diff_eq!(q[0], 7.0, epsilon = 1e-14);
        assert!(q[0] > 4.0 / l.alpha_star()[0]);
        assert_eq!(recommend_grading(&sq, 3).unwrap_err(), Error::UnsupportedOrder(3));
    }

    #[test]
    fn panel_lookup() {
        let m = square_mesh(2, 1.0);
        assert_eq!(m.panel_at(0.1).unwrap(), 0);
        assert_eq!(m.panel_at(3.9).unwrap(), 15);
        assert_eq!(m.panel_at(4.1).unwrap(), 0);
        assert!(matches!(m.panel_at(0.25), Err(Error::EvaluationAtBreakpoint(_))));
        assert!(matches!(m.panel_at(0.0), Err(Error::EvaluationAtBreakpoint(_))));
    }

    #[test]
    fn panel_lookup_near_corners() {
        let m = square_mesh(4, 7.0);
        let poly = m.polygon().clone();
        for e in 0..4 {
            for d in [1e-300, 1e-12, 0.013, 0.4] {
                for p in [poly.from_start(e, d), poly.from_end(e, d)] {
                    let i = m.panel_of(&p).unwrap();
                    let q = &m.panels()[i];
                    assert_eq!(q.edge_index, e);
                    assert!(q.lo.from_start < p.from_start || q.hi.from_end < p.from_end);
                }
            }
            let b = m.panels().iter().find(|q| q.edge_index == e).unwrap().hi;
            assert!(matches!(m.panel_of(&b), Err(Error::EvaluationAtBreakpoint(_))));
        }
    }
}
