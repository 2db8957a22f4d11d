use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::apply_t_pc_at;
use crate::mesh::{GradedMesh, GradedMeshSpec};
use crate::operators::Discretization;
use crate::scalar::Real;

use super::problem::{Problem, ProblemKind};
use super::runs::{Method, Solver};

use std::sync::Arc;

/// `log2(e_k / e_{k+1})` for consecutive levels.
pub fn eoc<T: Real>(errors: &[T]) -> Result<Vec<T>> {
    if errors.len() < 2 {
        return Err(Error::InvalidSpec("eoc needs at least two levels".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > T::zero())) {
        return Err(Error::NonPositiveError(e.to_f64_lossy()));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// EOC column aligned with `errors`: blank on the first entry and wherever
/// an error is not positive.
pub fn eoc_column<T: Real>(errors: &[T]) -> Vec<Option<T>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        out.push(if w[0] > T::zero() && w[1] > T::zero() {
            Some((w[0] / w[1]).log2())
        } else {
            None
        });
    }
    out.truncate(errors.len());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: Vec<usize>,
    pub h_max: f64,
    pub panels: usize,
    pub method: Method,
    pub sup_error: f64,
    pub eoc: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub vertices: Vec<[f64; 2]>,
    pub q: Vec<f64>,
    pub quadrature_order: usize,
    pub oracle_tolerance: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub metadata: ReportMetadata,
}

impl ConvergenceReport {
    /// Rows of one method in level order.
    pub fn method_rows(&self, method: Method) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }

    /// EOC of the last two levels of a method.
    pub fn final_eoc(&self, method: Method) -> Option<f64> {
        self.method_rows(method).last().and_then(|r| r.eoc)
    }
}

pub fn metadata<T: Real>(problem: &Problem<T>, spec: &GradedMeshSpec<T>, order: usize) -> ReportMetadata {
    ReportMetadata {
        vertices: problem
            .polygon()
            .vertices()
            .iter()
            .map(|v| [v.x.to_f64_lossy(), v.y.to_f64_lossy()])
            .collect(),
        q: spec.q.iter().map(|q| q.to_f64_lossy()).collect(),
        quadrature_order: order,
        oracle_tolerance: problem.oracle_tol().to_f64_lossy(),
        seed: 0,
    }
}

/// Runs every method on `levels` meshes, doubling all `n_j` per level.
pub fn convergence_study<T: Real>(
    problem: &Problem<T>,
    base: &GradedMeshSpec<T>,
    levels: usize,
    methods: &[Method],
    order: usize,
) -> Result<ConvergenceReport> {
    let mut per_level = Vec::with_capacity(levels);
    for level in 0..levels {
        let spec = base.doubled(level as u32);
        let mesh = GradedMesh::new(problem.polygon().clone(), problem.partition().clone(), spec)?;
        let panels = mesh.num_panels();
        let solver = Solver::new(problem, mesh, order)?;
        let runs = methods.iter().map(|m| solver.run(*m)).collect::<Result<Vec<_>>>()?;
        per_level.push((panels, runs));
    }
    let mut rows = Vec::new();
    for (mi, method) in methods.iter().enumerate() {
        let errors: Vec<T> = per_level.iter().map(|(_, runs)| runs[mi].sup_error).collect();
        let eocs = eoc_column(&errors);
        for (level, ((panels, runs), e)) in per_level.iter().zip(eocs).enumerate() {
            let run = &runs[mi];
            rows.push(ConvergenceRow {
                level,
                n: run.spec.n.clone(),
                h_max: run.spec.h_max().to_f64_lossy(),
                panels: *panels,
                method: *method,
                sup_error: run.sup_error.to_f64_lossy(),
                eoc: e.map(|v| v.to_f64_lossy()),
                wall_time: run.wall_time,
            });
        }
    }
    Ok(ConvergenceReport {
        rows,
        metadata: metadata(problem, base, order),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub level: usize,
    pub n: Vec<usize>,
    pub h_max: f64,
    pub panels: usize,
    /// `sup |T (I - P) u|` on the evaluation grid.
    pub single: f64,
    /// `sup |T (I - P) T (I - P) u|` on the evaluation grid.
    pub double: f64,
    pub eoc_single: Option<f64>,
    pub eoc_double: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    pub metadata: ReportMetadata,
}

/// Both operator diagnostics on one mesh.
fn diagnostics_on<T: Real>(problem: &Problem<T>, disc: &Arc<Discretization<T>>) -> Result<(T, T)> {
    let u_exact = match problem.kind() {
        ProblemKind::Manufactured { u_exact } => u_exact.clone(),
        ProblemKind::Harmonic { .. } => {
            return Err(Error::InvalidSpec("diagnostics require manufactured u_exact".into()))
        }
    };
    let mesh = disc.mesh();
    let polygon = mesh.polygon();
    let grid = problem.grid();
    // T u = f - u on the grid and at the nodes.
    let tu_grid: Vec<T> = grid
        .iter()
        .zip(problem.grid_rhs())
        .map(|(p, f)| *f - u_exact(p))
        .collect();
    let u_nodes = disc.sample(u_exact.clone());
    let f_nodes = disc.sample(problem.rhs().clone());
    let pu = disc.project_nodal(&u_nodes.nodes);
    let tpu_nodes = disc.apply_pc_at_nodes(pu.coeffs());
    // w = T (I - P) u at the nodes
    let w: Vec<T> = f_nodes
        .nodes
        .iter()
        .zip(u_nodes.nodes.iter())
        .zip(&tpu_nodes)
        .map(|((f, u), tpu)| (*f - *u) - *tpu)
        .collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIntegrand { at: f64::NAN });
    }
    let pw = disc.project_nodal(&w);
    let (single, double) = grid
        .par_iter()
        .zip(tu_grid.par_iter())
        .map(|(p, tu)| {
            let d1 = *tu - apply_t_pc_at(polygon, mesh.panels(), pu.coeffs(), p);
            let d2 = disc.apply_t_nodal(&w, p) - apply_t_pc_at(polygon, mesh.panels(), pw.coeffs(), p);
            (d1.abs(), d2.abs())
        })
        .reduce(|| (T::zero(), T::zero()), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok((single, double))
}

/// `sup |T (I - P) u_exact|` and `sup |T (I - P) T (I - P) u_exact|` per mesh.
pub fn operator_diagnostics<T: Real>(
    problem: &Problem<T>,
    specs: &[GradedMeshSpec<T>],
    order: usize,
) -> Result<DiagnosticsReport> {
    if problem.is_harmonic() {
        return Err(Error::InvalidSpec("diagnostics require manufactured u_exact".into()));
    }
    let mut values = Vec::new();
    for spec in specs {
        let mesh = GradedMesh::new(problem.polygon().clone(), problem.partition().clone(), spec.clone())?;
        let disc = Arc::new(Discretization::new(Arc::new(mesh), order)?);
        let (a, b) = diagnostics_on(problem, &disc)?;
        values.push((spec.clone(), disc.num_panels(), a, b));
    }
    let singles: Vec<T> = values.iter().map(|v| v.2).collect();
    let doubles: Vec<T> = values.iter().map(|v| v.3).collect();
    let e1 = eoc_column(&singles);
    let e2 = eoc_column(&doubles);
    let rows = values
        .iter()
        .enumerate()
        .map(|(level, (spec, panels, a, b))| DiagnosticsRow {
            level,
            n: spec.n.clone(),
            h_max: spec.h_max().to_f64_lossy(),
            panels: *panels,
            single: a.to_f64_lossy(),
            double: b.to_f64_lossy(),
            eoc_single: e1[level].map(|v| v.to_f64_lossy()),
            eoc_double: e2[level].map(|v| v.to_f64_lossy()),
        })
        .collect();
    let first = specs
        .first()
        .ok_or_else(|| Error::InvalidSpec("no mesh specs".into()))?;
    Ok(DiagnosticsReport {
        rows,
        metadata: metadata(problem, first, order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eoc_examples() {
        assert_abs_diff_eq!(eoc(&[1e-2, 2.5e-3]).unwrap()[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eoc(&[1e-2, 1.25e-3]).unwrap()[0], 3.0, epsilon = 1e-14);
        assert_eq!(eoc(&[0.3, 0.3]).unwrap()[0], 0.0);
        assert!(matches!(eoc(&[1e-2, 0.0]), Err(Error::NonPositiveError(_))));
        assert!(eoc(&[1e-2]).is_err());
    }

    #[test]
    fn eoc_column_is_blank_first() {
        let c = eoc_column(&[4.0, 1.0, 0.25]);
        assert_eq!(c, vec![None, Some(2.0), Some(2.0)]);
    }
}
