use std::sync::Arc;

use corner_bie::geometry::{build_polygon, default_partition};
use corner_bie::harness::{
    convergence_study, extrapolate, make_manufactured, Method, Problem, Profile, Solver,
};
use corner_bie::mesh::{GradedMesh, GradedMeshSpec};

fn smooth_problem(coords: &[[f64; 2]], tol: f64) -> Problem<f64> {
    let poly = Arc::new(build_polygon(coords).unwrap());
    let part = Arc::new(default_partition(&poly));
    make_manufactured(poly, part, Profile::Smooth, tol)
}

const SQUARE: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
const L_SHAPE: [[f64; 2]; 6] = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];

fn mesh(problem: &Problem<f64>, n: usize, q: f64) -> GradedMesh<f64> {
    let r = problem.polygon().num_corners();
    GradedMesh::new(
        problem.polygon().clone(),
        problem.partition().clone(),
        GradedMeshSpec::uniform(r, n, q).unwrap(),
    )
    .unwrap()
}

#[test]
fn methods_are_ordered_by_accuracy() {
    let problem = smooth_problem(&SQUARE, 1e-12);
    let solver = Solver::new(&problem, mesh(&problem, 16, 7.0), 10).unwrap();
    let e = |m| solver.run(m).unwrap().sup_error;
    let (ig, m, im) = (e(Method::IteratedGalerkin), e(Method::Modified), e(Method::IteratedModified));
    assert!(im < m && m < ig, "{im} {m} {ig}");
    assert!(e(Method::Galerkin) > ig);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = {
        let p = smooth_problem(&L_SHAPE, 1e-12);
        Solver::new(&p, mesh(&p, 4, 4.0), 10).unwrap().run(Method::IteratedModified).unwrap()
    };
    let b = {
        let p = smooth_problem(&L_SHAPE, 1e-12);
        Solver::new(&p, mesh(&p, 4, 4.0), 10).unwrap().run(Method::IteratedModified).unwrap()
    };
    assert_eq!(a.sup_error.to_bits(), b.sup_error.to_bits());
    assert!(a.grid_values.iter().zip(&b.grid_values).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn errors_decrease_under_refinement() {
    for coords in [&SQUARE[..], &L_SHAPE[..]] {
        let problem = smooth_problem(coords, 1e-12);
        let r = problem.polygon().num_corners();
        let base = GradedMeshSpec::uniform(r, 4, 7.0).unwrap();
        let report = convergence_study(&problem, &base, 3, &Method::ALL, 10).unwrap();
        for m in Method::ALL {
            let rows = report.method_rows(m);
            for (k, w) in rows.windows(2).enumerate() {
                // 10% slack only at the coarsest step
                let slack = if k == 0 { 1.1 } else { 1.0 };
                assert!(w[1].sup_error <= slack * w[0].sup_error, "{m}: {:?}", rows);
            }
        }
    }
}

#[test]
fn oracle_tolerance_does_not_move_errors() {
    let tight = smooth_problem(&SQUARE, 1e-12);
    let tighter = tight.with_oracle_tol(5e-13);
    for m in [Method::IteratedGalerkin, Method::IteratedModified] {
        let a = Solver::new(&tight, mesh(&tight, 8, 7.0), 10).unwrap().run(m).unwrap().sup_error;
        let b = Solver::new(&tighter, mesh(&tighter, 8, 7.0), 10).unwrap().run(m).unwrap().sup_error;
        assert!((a - b).abs() < 0.01 * a, "{m}: {a} vs {b}");
    }
    let loose = tight.with_oracle_tol(1e-10);
    for p in tight.grid().iter().step_by(17) {
        assert!(((tight.rhs())(p) - (loose.rhs())(p)).abs() <= 1e-9);
    }
}

#[test]
fn extrapolation_beats_its_base() {
    let problem = smooth_problem(&SQUARE, 1e-12);
    for method in [Method::IteratedGalerkin, Method::IteratedModified] {
        let set = extrapolate(&problem, &mesh(&problem, 4, 7.0), method, 2, 10).unwrap();
        assert!(set.sup_error < set.base.sup_error, "{method}");
        assert_eq!(set.refined.len(), 4);
    }
    assert!(extrapolate(&problem, &mesh(&problem, 4, 7.0), Method::Modified, 2, 10).is_err());
}

#[test]
fn corner_singular_profile_converges() {
    let poly = Arc::new(build_polygon(&L_SHAPE).unwrap());
    let part = Arc::new(default_partition(&poly));
    let problem = make_manufactured(poly, part, Profile::CornerSingular, 1e-12);
    let base = GradedMeshSpec::uniform(6, 4, 7.0).unwrap();
    let report = convergence_study(&problem, &base, 3, &[Method::IteratedGalerkin], 10).unwrap();
    let eoc = report.final_eoc(Method::IteratedGalerkin).unwrap();
    assert!(eoc > 1.5, "{:?}", report.rows);
}
