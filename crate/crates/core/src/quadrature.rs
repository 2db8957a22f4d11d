//! Gauss-Legendre rules, composite panel integration and a globally
//! adaptive integrator used as the reference oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Real};

pub const DEFAULT_ORDER: usize = 10;
pub const MAX_ORDER: usize = 64;
const MAX_DEPTH: u32 = 60;
const MAX_INTERVALS: usize = 20_000;

/// Gauss-Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    order: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: Fn(T) -> T>(&self, a: T, b: T, f: F) -> T {
        let w = b - a;
        compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(x, wt)| *wt * f(a + w * *x)),
        ) * w
    }
}

/// Gauss-Legendre rule of the given order, mapped to `[0, 1]`.
///
/// Nodes are roots of `P_order`: Newton iteration on `x = cos(theta)` from
/// the Tricomi initial guesses, then polished in double-double arithmetic so
/// nodes and weights are correctly rounded in `f64`.
pub fn gauss_rule<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..(n + 1) / 2 {
        let mut theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        for _ in 0..100 {
            let x = theta.cos();
            let (p, p_prev) = legendre(n, Dd::from(x));
            // d/dtheta P_n(cos theta) = n (x P_n - P_{n-1}) / sin(theta)
            let d = nf * (x * p.hi - p_prev.hi) / theta.sin();
            let step = p.hi / d;
            theta -= step;
            if step.abs() <= f64::EPSILON * theta {
                break;
            }
        }
        let mut x = Dd::from(theta.cos());
        let mut p_prev = Dd::from(0.0);
        for _ in 0..3 {
            let (p, pm) = legendre(n, x);
            let dp = nf * (x.hi * p.hi - pm.hi) / (x.hi * x.hi - 1.0);
            x = x.add(Dd::from(-p.hi / dp));
            p_prev = pm;
        }
        let one = Dd::from(1.0);
        let one_minus = one.add(x.neg());
        let one_plus = one.add(x);
        // w = 2 (1 - x^2) / (n P_{n-1})^2, halved for [0, 1]
        let denom = p_prev.mul_f(nf);
        let w = one_minus.mul(one_plus).div(denom.mul(denom));
        nodes[i] = T::lit(one_minus.mul_f(0.5).to_f64());
        nodes[n - 1 - i] = T::lit(one_plus.mul_f(0.5).to_f64());
        weights[i] = T::lit(w.to_f64());
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::lit(0.5);
    }
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
    })
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre(n: usize, x: Dd) -> (Dd, Dd) {
    let mut p0 = Dd::from(1.0);
    let mut p1 = x;
    if n == 0 {
        return (p0, Dd::from(0.0));
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = x.mul(p1).mul_f(2.0 * kf - 1.0).add(p0.mul_f(-(kf - 1.0))).div_f(kf);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Unevaluated sum `hi + lo` of two `f64`s.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn norm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        Self::norm(s, e + self.lo + o.lo)
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Self::norm(p, e + self.lo * b)
    }

    fn div_f(self, b: f64) -> Self {
        let q = self.hi / b;
        let r = self.add(Dd::from(q).mul_f(b).neg());
        Self::norm(q, r.hi / b)
    }

    fn div(self, o: Self) -> Self {
        let q = self.hi / o.hi;
        let r = self.add(o.mul_f(q).neg());
        Self::norm(q, r.hi / o.hi)
    }
}

/// `sum over intervals of width * sum_k w_k f(lo + x_k width)`.
pub fn composite_integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    intervals: &[(T, T)],
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let mut terms = Vec::with_capacity(intervals.len() * rule.order());
    for &(lo, hi) in intervals {
        let w = hi - lo;
        for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
            let t = lo + w * *x;
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: t.to_f64_lossy() });
            }
            terms.push(*wt * w * v);
        }
    }
    Ok(compensated_sum(terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub subdivisions: usize,
}

struct Interval<T> {
    lo: T,
    hi: T,
    piece: usize,
    depth: u32,
    value: T,
    error: T,
    seq: usize,
}

impl<T: Real> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Interval<T> {}
impl<T: Real> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Interval<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Globally adaptive integrator with an embedded Gauss pair of orders `g`
/// and `2g`; the interval with the largest error estimate is bisected until
/// the estimates sum to at most the tolerance.
#[derive(Debug, Clone)]
pub struct AdaptiveIntegrator<T> {
    low: QuadratureRule<T>,
    high: QuadratureRule<T>,
}

impl<T: Real> AdaptiveIntegrator<T> {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Self {
            low: gauss_rule(order)?,
            high: gauss_rule(2 * order)?,
        })
    }

    fn estimate<F: Fn(usize, T) -> T>(&self, f: &F, piece: usize, lo: T, hi: T) -> Result<(T, T)> {
        let w = hi - lo;
        let eval = |rule: &QuadratureRule<T>| -> Result<T> {
            let mut acc = Vec::with_capacity(rule.order());
            for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
                let t = lo + w * *x;
                let v = f(piece, t);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand { at: t.to_f64_lossy() });
                }
                acc.push(*wt * v);
            }
            Ok(compensated_sum(acc) * w)
        };
        let coarse = eval(&self.low)?;
        let fine = eval(&self.high)?;
        Ok((fine, (fine - coarse).abs()))
    }

    /// Integrates `f(k, t)` over each piece `k` and sums the results.
    ///
    /// The heap orders ties by creation sequence, so the subdivision order
    /// (and hence the result) is deterministic.
    pub fn integrate_pieces<F: Fn(usize, T) -> T>(
        &self,
        f: F,
        pieces: &[(T, T)],
        tol: T,
    ) -> Result<AdaptiveResult<T>> {
        let mut heap = BinaryHeap::new();
        let mut seq = 0usize;
        for (k, &(lo, hi)) in pieces.iter().enumerate() {
            if hi == lo {
                continue;
            }
            let (value, error) = self.estimate(&f, k, lo, hi)?;
            heap.push(Interval {
                lo,
                hi,
                piece: k,
                depth: 0,
                value,
                error,
                seq,
            });
            seq += 1;
        }
        let mut subdivisions = 0;
        let mut running = compensated_sum(heap.iter().map(|iv: &Interval<T>| iv.error));
        loop {
            if running <= tol || heap.is_empty() {
                // Drift in the running total could stop early; confirm exactly.
                let total_err = compensated_sum(heap.iter().map(|iv: &Interval<T>| iv.error));
                if total_err <= tol || heap.is_empty() {
                    let mut items: Vec<&Interval<T>> = heap.iter().collect();
                    items.sort_by_key(|iv| iv.seq);
                    let value = compensated_sum(items.iter().map(|iv| iv.value));
                    return Ok(AdaptiveResult {
                        value,
                        error_estimate: total_err,
                        subdivisions,
                    });
                }
                running = total_err;
            }
            let worst = heap.pop().expect("nonempty heap");
            if worst.depth >= MAX_DEPTH || heap.len() >= MAX_INTERVALS {
                return Err(Error::MaxDepthExceeded {
                    at: worst.lo.to_f64_lossy(),
                });
            }
            let mid = worst.lo + (worst.hi - worst.lo) * T::lit(0.5);
            if mid <= worst.lo || mid >= worst.hi {
                return Err(Error::MaxDepthExceeded {
                    at: worst.lo.to_f64_lossy(),
                });
            }
            running = running - worst.error;
            for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
                let (value, error) = self.estimate(&f, worst.piece, lo, hi)?;
                running = running + error;
                heap.push(Interval {
                    lo,
                    hi,
                    piece: worst.piece,
                    depth: worst.depth + 1,
                    value,
                    error,
                    seq,
                });
                seq += 1;
            }
            subdivisions += 1;
        }
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T, tol: T) -> Result<AdaptiveResult<T>> {
        self.integrate_pieces(|_, t| f(t), &[(a, b)], tol)
    }
}

/// Adaptive integration of `f` over `[a, b]` with the default Gauss pair.
pub fn adaptive_integrate<T: Real, F: Fn(T) -> T>(f: F, interval: (T, T), tol: T) -> Result<AdaptiveResult<T>> {
    AdaptiveIntegrator::new(DEFAULT_ORDER)?.integrate(f, interval.0, interval.1, tol)
}
