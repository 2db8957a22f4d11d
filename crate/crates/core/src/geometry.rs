//! Polygon boundaries parametrized by arclength.
//!
//! Corner `j` sits at vertex `j` and edge `j` runs from vertex `j` to vertex
//! `j + 1`. Arclength starts at vertex 0 and is periodic with the perimeter.
//!
//! Points close to a corner lose relative precision when stored as a raw
//! arclength, so boundary locations are carried as [`BoundaryPoint`]s that
//! keep the distance to both ends of their edge. Difference vectors between
//! boundary points are formed from those distances, which keeps kernel
//! evaluations accurate on strongly graded meshes.

use crate::error::{Error, Result};
use crate::point::Point2;
use crate::scalar::Real;

/// Location on the boundary with edge-local offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint<T> {
    pub edge: usize,
    /// Distance from the starting vertex of `edge`.
    pub from_start: T,
    /// Distance to the ending vertex of `edge`.
    pub from_end: T,
    /// Arclength in `[0, L)`.
    pub s: T,
}

impl<T: Real> BoundaryPoint<T> {
    /// Distance to the nearer end of the edge.
    pub fn corner_distance(&self) -> T {
        self.from_start.min(self.from_end)
    }
}

/// Point, frame and edge of an arclength sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample<T> {
    pub s: T,
    pub point: Point2<T>,
    pub edge_index: usize,
    pub outward_normal: Point2<T>,
    pub tangent: Point2<T>,
    /// `s` coincides with a corner; the sample describes the departing edge.
    pub at_corner: bool,
}

/// Simply connected polygon with counterclockwise orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    vertices: Vec<Point2<T>>,
    edge_lengths: Vec<T>,
    tangents: Vec<Point2<T>>,
    perimeter: T,
    corner_arclengths: Vec<T>,
    interior_angles: Vec<T>,
    corner_params: Vec<T>,
}

fn segments_intersect<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let orient = |p: Point2<T>, q: Point2<T>, r: Point2<T>| (q - p).cross(r - p);
    let on_segment = |p: Point2<T>, q: Point2<T>, r: Point2<T>| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let zero = T::zero();
    if ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero))
        && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero))
    {
        return true;
    }
    (d1 == zero && on_segment(c, d, a))
        || (d2 == zero && on_segment(c, d, b))
        || (d3 == zero && on_segment(a, b, c))
        || (d4 == zero && on_segment(a, b, d))
}

impl<T: Real> Polygon<T> {
    /// Builds a polygon from its vertex loop.
    ///
    /// Clockwise input is reversed while keeping the first vertex in place,
    /// so arclength zero always sits at the first input vertex.
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self> {
        let r = vertices.len();
        if r < 3 {
            return Err(Error::TooFewVertices(r));
        }
        for e in 0..r {
            if vertices[e] == vertices[(e + 1) % r] {
                return Err(Error::DegenerateEdge { edge: e });
            }
        }

        let twice_area: T = (0..r)
            .map(|i| vertices[i].cross(vertices[(i + 1) % r]))
            .sum();
        let vertices = if twice_area < T::zero() {
            let mut v = Vec::with_capacity(r);
            v.push(vertices[0]);
            v.extend(vertices[1..].iter().rev().copied());
            v
        } else {
            vertices
        };

        let edge_vec = |e: usize| vertices[(e + 1) % r] - vertices[e];
        let edge_lengths: Vec<T> = (0..r).map(|e| edge_vec(e).norm()).collect();
        if let Some(e) = edge_lengths.iter().position(|l| *l <= T::zero()) {
            return Err(Error::DegenerateEdge { edge: e });
        }
        let tangents: Vec<Point2<T>> = (0..r)
            .map(|e| edge_vec(e).scale(edge_lengths[e].recip()))
            .collect();

        let mut interior_angles = Vec::with_capacity(r);
        let mut corner_params = Vec::with_capacity(r);
        let collinear_tol = T::lit(1e-12);
        for j in 0..r {
            let t_in = tangents[(j + r - 1) % r];
            let t_out = tangents[j];
            let cross = t_in.cross(t_out);
            let dot = t_in.dot(t_out);
            if cross.abs() <= collinear_tol {
                if dot > T::zero() {
                    return Err(Error::CollinearCorner { vertex: j });
                }
                // Zero interior angle: the loop folds back on itself.
                return Err(Error::SelfIntersection {
                    first: (j + r - 1) % r,
                    second: j,
                });
            }
            let turning = cross.atan2(dot);
            interior_angles.push(T::PI() - turning);
            corner_params.push(turning / T::PI());
        }

        for a in 0..r {
            for b in (a + 1)..r {
                let adjacent = b == a + 1 || (a == 0 && b == r - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(
                    vertices[a],
                    vertices[(a + 1) % r],
                    vertices[b],
                    vertices[(b + 1) % r],
                ) {
                    return Err(Error::SelfIntersection { first: a, second: b });
                }
            }
        }

        let mut corner_arclengths = Vec::with_capacity(r);
        let mut acc = T::zero();
        for l in &edge_lengths {
            corner_arclengths.push(acc);
            acc = acc + *l;
        }

        Ok(Self {
            vertices,
            edge_lengths,
            tangents,
            perimeter: acc,
            corner_arclengths,
            interior_angles,
            corner_params,
        })
    }

    pub fn from_coords(coords: &[[T; 2]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point2::new(c[0], c[1])).collect())
    }

    pub fn num_corners(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn vertex(&self, j: usize) -> Point2<T> {
        self.vertices[j % self.vertices.len()]
    }

    pub fn edge_lengths(&self) -> &[T] {
        &self.edge_lengths
    }

    pub fn edge_length(&self, e: usize) -> T {
        self.edge_lengths[e]
    }

    pub fn perimeter(&self) -> T {
        self.perimeter
    }

    pub fn corner_arclengths(&self) -> &[T] {
        &self.corner_arclengths
    }

    pub fn interior_angles(&self) -> &[T] {
        &self.interior_angles
    }

    pub fn corner_params(&self) -> &[T] {
        &self.corner_params
    }

    /// Regularity threshold `1 / (1 + |p_j|)` of each corner.
    pub fn alpha_star(&self) -> Vec<T> {
        self.corner_params
            .iter()
            .map(|p| (T::one() + p.abs()).recip())
            .collect()
    }

    pub fn tangent(&self, e: usize) -> Point2<T> {
        self.tangents[e]
    }

    /// Outward unit normal of edge `e` (tangent rotated by -pi/2).
    pub fn outward_normal(&self, e: usize) -> Point2<T> {
        self.tangents[e].rot_cw()
    }

    pub fn next_edge(&self, e: usize) -> usize {
        (e + 1) % self.num_corners()
    }

    pub fn prev_edge(&self, e: usize) -> usize {
        (e + self.num_corners() - 1) % self.num_corners()
    }

    /// Arclength where edge `e` ends (`L` for the last edge).
    pub fn edge_end_arclength(&self, e: usize) -> T {
        if e + 1 == self.num_corners() {
            self.perimeter
        } else {
            self.corner_arclengths[e + 1]
        }
    }

    /// Reduces `s` into `[0, L)` with a single shift of the perimeter when possible.
    pub fn wrap(&self, s: T) -> T {
        let l = self.perimeter;
        let mut w = if s >= l {
            s - l
        } else if s < T::zero() {
            s + l
        } else {
            s
        };
        if w >= l || w < T::zero() {
            w = s - (s / l).floor() * l;
            if w >= l {
                w = w - l;
            }
        }
        w
    }

    /// Length of the shorter boundary arc between two arclengths.
    pub fn modular_distance(&self, s: T, t: T) -> T {
        let d = self.wrap(s - t);
        d.min(self.perimeter - d)
    }

    /// Edge containing wrapped arclength `s` (departing edge at corners).
    pub fn edge_at(&self, s: T) -> usize {
        let s = self.wrap(s);
        self.corner_arclengths.partition_point(|c| *c <= s) - 1
    }

    pub fn locate(&self, s: T) -> BoundaryPoint<T> {
        let s = self.wrap(s);
        let edge = self.edge_at(s);
        let from_start = s - self.corner_arclengths[edge];
        let from_end = self.edge_end_arclength(edge) - s;
        BoundaryPoint {
            edge,
            from_start,
            from_end,
            s,
        }
    }

    /// Point at distance `d` from the start of edge `e`.
    pub fn from_start(&self, e: usize, d: T) -> BoundaryPoint<T> {
        BoundaryPoint {
            edge: e,
            from_start: d,
            from_end: self.edge_lengths[e] - d,
            s: self.corner_arclengths[e] + d,
        }
    }

    /// Point at distance `d` before the end of edge `e`.
    pub fn from_end(&self, e: usize, d: T) -> BoundaryPoint<T> {
        let s = self.edge_end_arclength(e) - d;
        BoundaryPoint {
            edge: e,
            from_start: self.edge_lengths[e] - d,
            from_end: d,
            s: if s >= self.perimeter { s - self.perimeter } else { s },
        }
    }

    /// Plane position, measured from the nearer vertex of the edge.
    pub fn position(&self, p: &BoundaryPoint<T>) -> Point2<T> {
        if p.from_start <= p.from_end {
            self.vertices[p.edge] + self.tangents[p.edge].scale(p.from_start)
        } else {
            self.vertex(p.edge + 1) - self.tangents[p.edge].scale(p.from_end)
        }
    }

    /// Difference vector `x(p) - x(q)`.
    ///
    /// Points on the same or on adjacent edges are differenced through
    /// their offsets from the shared vertex, so the result keeps full
    /// relative precision arbitrarily close to a corner.
    pub fn separation(&self, p: &BoundaryPoint<T>, q: &BoundaryPoint<T>) -> Point2<T> {
        if p.edge == q.edge {
            let t = self.tangents[p.edge];
            if p.from_start + q.from_start <= p.from_end + q.from_end {
                t.scale(p.from_start - q.from_start)
            } else {
                t.scale(q.from_end - p.from_end)
            }
        } else if q.edge == self.next_edge(p.edge) {
            -(self.tangents[p.edge].scale(p.from_end) + self.tangents[q.edge].scale(q.from_start))
        } else if q.edge == self.prev_edge(p.edge) {
            self.tangents[p.edge].scale(p.from_start) + self.tangents[q.edge].scale(q.from_end)
        } else {
            self.position(p) - self.position(q)
        }
    }

    pub fn point_at(&self, s: T) -> BoundarySample<T> {
        let bp = self.locate(s);
        BoundarySample {
            s: bp.s,
            point: self.position(&bp),
            edge_index: bp.edge,
            outward_normal: self.outward_normal(bp.edge),
            tangent: self.tangent(bp.edge),
            at_corner: bp.from_start == T::zero(),
        }
    }

    /// Whether `s` is exactly a corner arclength (after wrapping).
    pub fn is_corner(&self, s: T) -> bool {
        self.locate(s).from_start == T::zero()
    }

    /// Winding number of the boundary around `x` off the boundary:
    /// exactly 0 outside and 1 inside.
    pub fn winding_number(&self, x: Point2<T>) -> T {
        let r = self.num_corners();
        let total: T = (0..r)
            .map(|e| crate::point::signed_angle(self.vertices[e] - x, self.vertex(e + 1) - x))
            .sum();
        (total / (T::PI() + T::PI())).round()
    }
}

/// Points `gamma_j` splitting the boundary into corner-centred segments.
///
/// Segment `j` is `[gamma_{j-1}, gamma_j]` and contains corner `j`;
/// `gamma_j` lies strictly inside edge `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec<T> {
    gamma: Vec<T>,
    before_len: Vec<T>,
    after_len: Vec<T>,
}

impl<T: Real> PartitionSpec<T> {
    pub fn new(polygon: &Polygon<T>, gamma: Vec<T>) -> Result<Self> {
        let r = polygon.num_corners();
        if gamma.len() != r {
            return Err(Error::InvalidPartition(format!(
                "expected {r} gamma values, got {}",
                gamma.len()
            )));
        }
        let margin = T::lit(1e-9) * polygon.perimeter();
        for (j, g) in gamma.iter().enumerate() {
            let lo = polygon.corner_arclengths()[j];
            let hi = polygon.edge_end_arclength(j);
            if !(*g > lo + margin && *g < hi - margin) {
                return Err(Error::InvalidPartition(format!(
                    "gamma[{j}] = {g} must lie strictly inside edge {j} ({lo}, {hi})"
                )));
            }
        }
        let after_len = (0..r)
            .map(|j| gamma[j] - polygon.corner_arclengths()[j])
            .collect();
        let before_len = (0..r)
            .map(|j| {
                let e = polygon.prev_edge(j);
                polygon.edge_end_arclength(e) - gamma[e]
            })
            .collect();
        Ok(Self {
            gamma,
            before_len,
            after_len,
        })
    }

    /// Edge midpoints.
    pub fn default_for(polygon: &Polygon<T>) -> Self {
        let two = T::lit(2.0);
        let gamma = (0..polygon.num_corners())
            .map(|j| (polygon.corner_arclengths()[j] + polygon.edge_end_arclength(j)) / two)
            .collect();
        Self::new(polygon, gamma).expect("edge midpoints form a valid partition")
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn num_segments(&self) -> usize {
        self.gamma.len()
    }

    /// Length of `[gamma_{j-1}, s_j]`, on edge `j - 1`.
    pub fn before_len(&self, j: usize) -> T {
        self.before_len[j]
    }

    /// Length of `[s_j, gamma_j]`, on edge `j`.
    pub fn after_len(&self, j: usize) -> T {
        self.after_len[j]
    }
}

/// Partition with every `gamma_j` at the midpoint of edge `j`.
pub fn default_partition<T: Real>(polygon: &Polygon<T>) -> PartitionSpec<T> {
    PartitionSpec::default_for(polygon)
}

/// Builds a polygon from its vertices.
pub fn build_polygon<T: Real>(vertices: &[[T; 2]]) -> Result<Polygon<T>> {
    Polygon::from_coords(vertices)
}
