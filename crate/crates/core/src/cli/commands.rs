use std::path::Path;

use serde::Serialize;

use crate::harness::{
    combine_runs, convergence_study, eoc_column, extrapolation_runs, metadata, operator_diagnostics,
    ConvergenceRow, DiagnosticsRow, Method, ReportMetadata,
};
use crate::mesh::GradedMesh;

use super::config::{ConfigError, Resolved, RunConfig};
use super::output::{n_spec, sci, sci_opt, write_csv, write_json};
use super::CliError;

pub const CONVERGENCE_HEADER: [&str; 7] = ["level", "n_spec", "h_max", "panels", "method", "sup_error", "eoc"];

pub const EXTRAPOLATION_HEADER: [&str; 11] = [
    "level",
    "n_spec",
    "h_max",
    "method",
    "p",
    "base_error",
    "extrapolated_error",
    "base_eoc",
    "extrapolated_eoc",
    "c_fine",
    "c_base",
];

pub const DIAGNOSTICS_HEADER: [&str; 8] = [
    "level",
    "n_spec",
    "h_max",
    "panels",
    "single",
    "double",
    "eoc_single",
    "eoc_double",
];

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    partition: Vec<f64>,
    metadata: ReportMetadata,
    rows: R,
}

fn report<'a, R: Serialize>(command: &'static str, config: &'a RunConfig, resolved: &Resolved, rows: R) -> Report<'a, R> {
    Report {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        partition: resolved.partition.gamma().to_vec(),
        metadata: metadata(&resolved.problem, &resolved.base, config.quadrature_order),
        rows,
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Output(e)
}

pub fn cmd_convergence(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let resolved = config.resolve()?;
    let methods = config.plain_methods();
    if methods.is_empty() {
        return Err(ConfigError::Validation {
            field: "methods",
            message: "convergence needs at least one non-extrapolated method".into(),
        }
        .into());
    }
    let study = convergence_study(
        &resolved.problem,
        &resolved.base,
        config.levels,
        &methods,
        config.quadrature_order,
    )?;
    let rows: Vec<Vec<String>> = study.rows.iter().map(convergence_record).collect();
    write_csv(&out.join("convergence.csv"), &CONVERGENCE_HEADER, &rows).map_err(io)?;
    write_json(&out.join("report.json"), &report("convergence", config, &resolved, &study.rows)).map_err(io)
}

fn convergence_record(r: &ConvergenceRow) -> Vec<String> {
    vec![
        r.level.to_string(),
        n_spec(&r.n),
        sci(r.h_max),
        r.panels.to_string(),
        r.method.to_string(),
        sci(r.sup_error),
        sci_opt(r.eoc),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtrapolationRow {
    pub level: usize,
    pub n: Vec<usize>,
    pub h_max: f64,
    pub method: Method,
    pub p: u32,
    pub base_error: f64,
    pub extrapolated_error: f64,
    pub base_eoc: Option<f64>,
    pub extrapolated_eoc: Option<f64>,
    pub c_fine: String,
    pub c_base: String,
    pub refined_errors: Vec<f64>,
}

pub fn cmd_extrapolate(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let resolved = config.resolve()?;
    if !config.has_extrapolated() {
        return Err(ConfigError::Validation {
            field: "methods",
            message: "extrapolate needs \"extrapolated\" among the methods".into(),
        }
        .into());
    }
    let methods: Vec<Method> = config.plain_methods().into_iter().filter(|m| m.is_iterated()).collect();
    if methods.is_empty() {
        return Err(ConfigError::Validation {
            field: "methods",
            message: "extrapolate needs a base method: iterated_galerkin or iterated_modified".into(),
        }
        .into());
    }
    if resolved.problem.is_harmonic() {
        return Err(ConfigError::Validation {
            field: "problem",
            message: "extrapolation requires manufactured u_exact".into(),
        }
        .into());
    }
    let orders = config.extrapolation_orders();
    let mut rows = Vec::new();
    for method in &methods {
        // per level: one set of r + 1 runs shared by every p
        let mut per_p: Vec<Vec<ExtrapolationRow>> = vec![Vec::new(); orders.len()];
        for level in 0..config.levels {
            let spec = resolved.base.doubled(level as u32);
            let mesh = GradedMesh::new(resolved.polygon.clone(), resolved.partition.clone(), spec.clone())?;
            let (base, refined) = extrapolation_runs(&resolved.problem, &mesh, *method, config.quadrature_order)?;
            for (k, p) in orders.iter().enumerate() {
                let set = combine_runs(&resolved.problem, base.clone(), refined.clone(), *p)?;
                per_p[k].push(ExtrapolationRow {
                    level,
                    n: spec.n.clone(),
                    h_max: spec.h_max(),
                    method: *method,
                    p: *p,
                    base_error: set.base.sup_error,
                    extrapolated_error: set.sup_error,
                    base_eoc: None,
                    extrapolated_eoc: None,
                    c_fine: set.coefficients.fine_str(),
                    c_base: set.coefficients.base_str(),
                    refined_errors: set.refined.iter().map(|r| r.sup_error).collect(),
                });
            }
        }
        for mut series in per_p {
            let base: Vec<f64> = series.iter().map(|r| r.base_error).collect();
            let extra: Vec<f64> = series.iter().map(|r| r.extrapolated_error).collect();
            for ((row, b), e) in series.iter_mut().zip(eoc_column(&base)).zip(eoc_column(&extra)) {
                row.base_eoc = b;
                row.extrapolated_eoc = e;
            }
            rows.extend(series);
        }
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                n_spec(&r.n),
                sci(r.h_max),
                r.method.to_string(),
                r.p.to_string(),
                sci(r.base_error),
                sci(r.extrapolated_error),
                sci_opt(r.base_eoc),
                sci_opt(r.extrapolated_eoc),
                r.c_fine.clone(),
                r.c_base.clone(),
            ]
        })
        .collect();
    write_csv(&out.join("extrapolation.csv"), &EXTRAPOLATION_HEADER, &records).map_err(io)?;
    write_json(&out.join("report.json"), &report("extrapolate", config, &resolved, &rows)).map_err(io)
}

pub fn cmd_diagnostics(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let resolved = config.resolve()?;
    if resolved.problem.is_harmonic() {
        return Err(ConfigError::Validation {
            field: "problem",
            message: "diagnostics require manufactured u_exact".into(),
        }
        .into());
    }
    let specs: Vec<_> = (0..config.levels).map(|l| resolved.base.doubled(l as u32)).collect();
    let diag = operator_diagnostics(&resolved.problem, &specs, config.quadrature_order)?;
    let rows: Vec<Vec<String>> = diag.rows.iter().map(diagnostics_record).collect();
    write_csv(&out.join("diagnostics.csv"), &DIAGNOSTICS_HEADER, &rows).map_err(io)?;
    write_json(&out.join("report.json"), &report("diagnostics", config, &resolved, &diag.rows)).map_err(io)
}

fn diagnostics_record(r: &DiagnosticsRow) -> Vec<String> {
    vec![
        r.level.to_string(),
        n_spec(&r.n),
        sci(r.h_max),
        r.panels.to_string(),
        sci(r.single),
        sci(r.double),
        sci_opt(r.eoc_single),
        sci_opt(r.eoc_double),
    ]
}
