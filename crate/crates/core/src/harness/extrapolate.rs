use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{GradedMesh, GradedMeshSpec};
use crate::scalar::Real;

use super::problem::{Problem, ProblemKind};
use super::runs::{Method, MethodRun, Solver};

/// Combination weights for `r` refined runs eliminating an `h^p` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Coefficients {
    pub r: usize,
    pub p: u32,
    /// `2^p / (2^p - 1)` on every refined run.
    pub fine: (i64, i64),
    /// `1 - r 2^p / (2^p - 1)` on the base run.
    pub base: (i64, i64),
}

impl Coefficients {
    pub fn new(r: usize, p: u32) -> Result<Self> {
        if p != 2 && p != 4 {
            return Err(Error::UnsupportedOrder(p as usize));
        }
        let two_p = Ratio::from_integer(1i64 << p);
        let fine = two_p / (two_p - Ratio::from_integer(1));
        let base = Ratio::from_integer(1) - Ratio::from_integer(r as i64) * fine;
        Ok(Self {
            r,
            p,
            fine: (*fine.numer(), *fine.denom()),
            base: (*base.numer(), *base.denom()),
        })
    }

    pub fn fine_value<T: Real>(&self) -> T {
        T::lit(self.fine.0 as f64) / T::lit(self.fine.1 as f64)
    }

    pub fn base_value<T: Real>(&self) -> T {
        T::lit(self.base.0 as f64) / T::lit(self.base.1 as f64)
    }

    /// `"a/b"` form.
    pub fn fine_str(&self) -> String {
        format!("{}/{}", self.fine.0, self.fine.1)
    }

    pub fn base_str(&self) -> String {
        format!("{}/{}", self.base.0, self.base.1)
    }
}

/// Base run, one run per refined segment, and their combination.
#[derive(Debug, Clone)]
pub struct ExtrapolationSet<T: Real> {
    pub base: MethodRun<T>,
    pub refined: Vec<MethodRun<T>>,
    pub coefficients: Coefficients,
    /// Combined values on the evaluation grid.
    pub combined: Vec<T>,
    pub sup_error: T,
}

/// Pointwise combination `c_base v_0 + c_fine sum_j v_j`, folded in run order.
pub fn combine<T: Real>(coeffs: &Coefficients, base: &[T], refined: &[&[T]]) -> Vec<T> {
    let cb = coeffs.base_value::<T>();
    let cf = coeffs.fine_value::<T>();
    (0..base.len())
        .map(|k| {
            let fine = refined.iter().fold(T::zero(), |acc, v| acc + v[k]);
            cb * base[k] + cf * fine
        })
        .collect()
}

/// Runs the base mesh and each single-segment refinement, then combines.
pub fn extrapolate<T: Real>(
    problem: &Problem<T>,
    base_mesh: &GradedMesh<T>,
    method: Method,
    p: u32,
    order: usize,
) -> Result<ExtrapolationSet<T>> {
    Coefficients::new(base_mesh.polygon().num_corners(), p)?;
    let (base, refined) = extrapolation_runs(problem, base_mesh, method, order)?;
    combine_runs(problem, base, refined, p)
}

/// The `r + 1` solves of one extrapolation: the base run, then one run per
/// segment with that segment halved.  Runs execute concurrently; results
/// are returned in run-index order.
pub fn extrapolation_runs<T: Real>(
    problem: &Problem<T>,
    base_mesh: &GradedMesh<T>,
    method: Method,
    order: usize,
) -> Result<(MethodRun<T>, Vec<MethodRun<T>>)> {
    if !method.is_iterated() {
        return Err(Error::InvalidSpec(format!(
            "extrapolation needs an iterated method, got {method}"
        )));
    }
    if problem.is_harmonic() {
        return Err(Error::InvalidSpec("extrapolation requires a manufactured problem".into()));
    }
    let r = base_mesh.polygon().num_corners();
    let mut meshes = vec![base_mesh.clone()];
    for j in 0..r {
        meshes.push(base_mesh.refine_segment(j)?);
    }
    let runs: Vec<MethodRun<T>> = meshes
        .into_par_iter()
        .map(|m| Solver::new(problem, m, order)?.run(method))
        .collect::<Result<_>>()?;
    let mut runs = runs.into_iter();
    let base = runs.next().expect("base run");
    Ok((base, runs.collect()))
}

/// Combines finished runs with the order-`p` coefficients.
pub fn combine_runs<T: Real>(
    problem: &Problem<T>,
    base: MethodRun<T>,
    refined: Vec<MethodRun<T>>,
    p: u32,
) -> Result<ExtrapolationSet<T>> {
    let u_exact = match problem.kind() {
        ProblemKind::Manufactured { u_exact } => u_exact.clone(),
        ProblemKind::Harmonic { .. } => {
            return Err(Error::InvalidSpec("extrapolation requires a manufactured problem".into()))
        }
    };
    let coefficients = Coefficients::new(refined.len(), p)?;
    let refs: Vec<&[T]> = refined.iter().map(|r| r.grid_values.as_slice()).collect();
    let combined = combine(&coefficients, &base.grid_values, &refs);
    let sup_error = problem
        .grid()
        .iter()
        .zip(&combined)
        .map(|(pt, v)| (*v - u_exact(pt)).abs())
        .fold(T::zero(), |m, e| if e > m || e.is_nan() { e } else { m });
    if !sup_error.is_finite() {
        return Err(Error::NonFiniteIntegrand { at: f64::NAN });
    }
    Ok(ExtrapolationSet {
        base,
        refined,
        coefficients,
        combined,
        sup_error,
    })
}

/// Mesh spec of the `j`-th refined run.
pub fn refined_spec<T: Real>(spec: &GradedMeshSpec<T>, j: usize) -> GradedMeshSpec<T> {
    let mut s = spec.clone();
    s.n[j] *= 2;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_coefficients() {
        let c = Coefficients::new(4, 2).unwrap();
        assert_eq!((c.fine_str(), c.base_str()), ("4/3".into(), "-13/3".into()));
        let c = Coefficients::new(4, 4).unwrap();
        assert_eq!((c.fine_str(), c.base_str()), ("16/15".into(), "-49/15".into()));
        assert!(Coefficients::new(4, 3).is_err());
    }

    #[test]
    fn coefficients_normalize_exactly() {
        for r in 1..12usize {
            for p in [2, 4] {
                let c = Coefficients::new(r, p).unwrap();
                let fine = Ratio::new(c.fine.0, c.fine.1);
                let base = Ratio::new(c.base.0, c.base.1);
                assert_eq!(base + fine * Ratio::from_integer(r as i64), Ratio::from_integer(1));
            }
        }
    }

    #[test]
    fn identical_runs_combine_to_common_value() {
        let c = Coefficients::new(4, 2).unwrap();
        let v = vec![1.0, 1.0];
        let out = combine(&c, &v, &[&v, &v, &v, &v]);
        for x in out {
            assert!((x - 1.0f64).abs() < 1e-14);
        }
    }
}
