//! Test problems, the brute-force oracle, convergence studies,
//! multi-parameter extrapolation and operator diagnostics.

mod extrapolate;
mod grid;
pub mod oracle;
mod problem;
mod report;
mod runs;

pub use extrapolate::{combine, combine_runs, extrapolate, extrapolation_runs, refined_spec, Coefficients, ExtrapolationSet};
pub use grid::{evaluation_grid, GRID_GRADING, GRID_OFFSET, GRID_POINTS};
pub use oracle::{apply_t_oracle, edge_average_oracle};
pub use problem::{harmonic_value, make_harmonic, make_manufactured, make_piecewise_constant, Problem, ProblemKind, Profile};
pub use report::{
    convergence_study, eoc, eoc_column, metadata, operator_diagnostics, ConvergenceReport, ConvergenceRow,
    DiagnosticsReport, DiagnosticsRow, ReportMetadata,
};
pub use runs::{run_method, run_methods, value_with_rhs, Method, MethodRun, Solver};
