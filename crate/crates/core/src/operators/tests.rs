use std::sync::Arc;

use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{build_polygon, default_partition, BoundaryPoint};
use crate::harness::{apply_t_oracle, edge_average_oracle};
use crate::kernel::kernel_between;
use crate::mesh::{GradedMesh, GradedMeshSpec, Side};
use crate::point::Point2;

const SQUARE: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
const L_SHAPE: [[f64; 2]; 6] = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];

fn disc(coords: &[[f64; 2]], n: usize, q: f64) -> Arc<Discretization<f64>> {
    let poly = Arc::new(build_polygon(coords).unwrap());
    let part = Arc::new(default_partition(&poly));
    let r = poly.num_corners();
    let mesh = GradedMesh::new(poly, part, GradedMeshSpec::uniform(r, n, q).unwrap()).unwrap();
    Arc::new(Discretization::new(Arc::new(mesh), 10).unwrap())
}

fn constant(v: f64) -> BoundaryFn<f64> {
    Arc::new(move |_| v)
}

fn smooth() -> BoundaryFn<f64> {
    Arc::new(|p: &BoundaryPoint<f64>| (0.7 * p.s).sin() + 0.3 * (2.1 * p.s).cos())
}

#[test]
fn row_sums_are_one() {
    for (coords, n, q) in [(&SQUARE[..], 4, 1.0), (&L_SHAPE[..], 4, 7.0), (&SQUARE[..], 8, 7.0)] {
        let d = disc(coords, n, q);
        let a = &d.galerkin().a;
        let c = &d.iterated_kernel().c;
        for i in 0..a.rows() {
            assert_abs_diff_eq!(a.row(i).iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(c.row(i).iter().sum::<f64>(), 1.0, epsilon = 1e-8);
        }
    }
}

#[test]
fn same_edge_entries_vanish() {
    let d = disc(&L_SHAPE, 3, 2.0);
    let panels = d.mesh().panels();
    for (i, pi) in panels.iter().enumerate() {
        for (j, pj) in panels.iter().enumerate() {
            if pi.edge_index == pj.edge_index {
                assert_eq!(d.galerkin().a.get(i, j), 0.0);
            }
        }
    }
}

/// `(1/|tau_i|) int_{tau_i} int_{tau_j} k` by nested adaptive quadrature.
fn a_entry_oracle(d: &Discretization<f64>, i: usize, j: usize) -> f64 {
    let poly = d.mesh().polygon().clone();
    let (pi, pj) = (&d.mesh().panels()[i], &d.mesh().panels()[j]);
    let wj = pj.hi.from_start - pj.lo.from_start;
    let inner = |x: &BoundaryPoint<f64>| {
        let k = |y: &BoundaryPoint<f64>| kernel_between(&poly, x, y);
        wj * edge_average_oracle(&poly, pj.edge_index, pj.lo.from_start, pj.hi.from_start, &k, 1e-13).unwrap()
    };
    edge_average_oracle(&poly, pi.edge_index, pi.lo.from_start, pi.hi.from_start, &inner, 1e-12).unwrap()
}

#[test]
fn a_entries_match_adaptive_oracle() {
    let d = disc(&SQUARE, 4, 1.0);
    let n = d.num_panels();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..8 {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        assert_abs_diff_eq!(d.galerkin().a.get(i, j), a_entry_oracle(&d, i, j), epsilon = 1e-8);
    }
    // adjacent panels meeting at a corner
    assert_abs_diff_eq!(d.galerkin().a.get(0, n - 1), a_entry_oracle(&d, 0, n - 1), epsilon = 1e-8);
}

#[test]
fn c_differs_from_a_squared() {
    let d = disc(&SQUARE, 2, 1.0);
    let a = &d.galerkin().a;
    let diff = d.iterated_kernel().c.sub(&a.matmul(a)).norm_inf();
    assert!(diff > 1e-3, "{diff}");
}

#[test]
fn c_commutes_with_pairwise_merging() {
    // C = P T T on piecewise constants has no inner projection, so merging
    // panels pairwise (width-weighted rows, summed columns) reproduces C
    // of the coarse mesh; A^2 does not have this property.
    let fine = disc(&SQUARE, 4, 1.0);
    let coarse = disc(&SQUARE, 2, 1.0);
    let nc = coarse.num_panels();
    let w: Vec<f64> = fine.mesh().panels().iter().map(|p| p.width).collect();
    let merge = |m: &DenseMatrix<f64>| {
        DenseMatrix::from_row_fn(nc, nc, |big_i, row| {
            for (big_j, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in [2 * big_i, 2 * big_i + 1] {
                    acc += w[i] * (m.get(i, 2 * big_j) + m.get(i, 2 * big_j + 1));
                }
                *v = acc / (w[2 * big_i] + w[2 * big_i + 1]);
            }
        })
    };
    let c_merged = merge(&fine.iterated_kernel().c);
    assert!(c_merged.max_abs_diff(&coarse.iterated_kernel().c) < 1e-10);
    let a = &fine.galerkin().a;
    let a2_merged = merge(&a.matmul(a));
    let ac = &coarse.galerkin().a;
    assert!(a2_merged.max_abs_diff(&ac.matmul(ac)) > 1e-4);
}

#[test]
fn c_entries_match_nested_oracle() {
    let d = disc(&SQUARE, 2, 1.0);
    let mesh = d.mesh().clone();
    let poly = mesh.polygon().clone();
    for (i, j) in [(0usize, 5usize), (3, 12), (7, 9)] {
        let pj = mesh.panels()[j].clone();
        let pi = &mesh.panels()[i];
        let tchi = |y: &BoundaryPoint<f64>| crate::kernel::panel_angle_on_boundary(&poly, y, &pj);
        let poly2 = mesh.polygon().clone();
        let middle = |x: &BoundaryPoint<f64>| apply_t_oracle(&poly2, &tchi, x, 1e-11).unwrap();
        let v = edge_average_oracle(mesh.polygon(), pi.edge_index, pi.lo.from_start, pi.hi.from_start, &middle, 1e-10)
            .unwrap();
        assert_abs_diff_eq!(d.iterated_kernel().c.get(i, j), v, epsilon = 1e-8);
    }
}

#[test]
fn projection_properties() {
    let d = disc(&L_SHAPE, 4, 3.0);
    let p3 = project(&d, constant(3.0));
    assert!(p3.coeffs().iter().all(|c| *c == 3.0 || (c - 3.0).abs() < 1e-15));
    let coeffs: Vec<f64> = (0..d.num_panels()).map(|i| (i as f64 * 0.37).sin()).collect();
    let mesh = d.mesh().clone();
    let cc = coeffs.clone();
    let m2 = mesh.clone();
    let aligned: BoundaryFn<f64> = Arc::new(move |p| cc[m2.panel_at(p.s).unwrap()]);
    let back = project(&d, aligned);
    for (a, b) in back.coeffs().iter().zip(&coeffs) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }
    let pf = project(&d, smooth());
    assert!(pf.sup_norm() <= 1.3 + 1e-12);
}

#[test]
fn constant_data_gives_unit_density() {
    let d = disc(&SQUARE, 4, 1.0);
    let f = d.sample(constant(2.0));
    let pf = d.project_nodal(&f.nodes);
    let g = solve_galerkin(d.galerkin(), &pf).unwrap();
    assert!(g.coeffs().iter().all(|c| (c - 1.0).abs() < 1e-10));
    let zero = solve_galerkin(d.galerkin(), &PiecewiseConstant::constant(d.mesh().clone(), 0.0)).unwrap();
    assert!(zero.coeffs().iter().all(|c| *c == 0.0));

    let m = solve_modified(&d, d.iterated_kernel(), &f).unwrap();
    assert!(m.y.coeffs().iter().all(|c| (c - 1.0).abs() < 1e-9));
    assert!(m.z_nodes().iter().all(|z| z.abs() < 1e-9));
    let dens = Density::Modified(m);
    for s in [0.3, 1.77, 3.999] {
        assert_abs_diff_eq!(evaluate_density(&dens, s).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(iterate(&dens, &f.f, s).unwrap(), 1.0, epsilon = 1e-9);
    }
    let it = dens.iterated(&f);
    assert_abs_diff_eq!(evaluate_density(&it, 2.5).unwrap(), 1.0, epsilon = 1e-9);
}

#[test]
fn galerkin_value_is_panel_coefficient() {
    let d = disc(&SQUARE, 4, 2.0);
    let f = d.sample(smooth());
    let g = solve_galerkin(d.galerkin(), &d.project_nodal(&f.nodes)).unwrap();
    let dens = Density::Galerkin(g.clone(), d.clone());
    for (i, p) in d.mesh().panels().iter().enumerate() {
        let s = 0.5 * (p.t_lo + p.t_hi);
        assert_eq!(evaluate_density(&dens, s).unwrap(), g.coeffs()[i]);
    }
    let t0 = d.mesh().panels()[3].t_lo;
    assert!(matches!(evaluate_density(&dens, t0), Err(crate::Error::EvaluationAtBreakpoint(_))));
}

#[test]
fn z_has_vanishing_panel_averages() {
    let d = disc(&L_SHAPE, 6, 7.0);
    let f = d.sample(smooth());
    let m = solve_modified(&d, d.iterated_kernel(), &f).unwrap();
    let avg = d.project_nodal(m.z_nodes());
    assert!(avg.sup_norm() < 1e-9, "{}", avg.sup_norm());
    // nodal z agrees with the closed formula
    for k in (0..d.grid().len()).step_by(97) {
        let node = &d.grid().nodes()[k];
        assert_abs_diff_eq!(m.z_at(&node.point).unwrap(), m.z_nodes()[k], epsilon = 1e-12);
    }
}

#[test]
fn piecewise_constant_data_reduces_b1() {
    let d = disc(&SQUARE, 4, 2.0);
    let coeffs: Vec<f64> = (0..d.num_panels()).map(|i| 1.0 + (i % 5) as f64).collect();
    let f_nodes = d.expand(&coeffs);
    let b1 = d.average_of_t(&f_nodes);
    let apf = d.galerkin().a.matvec(&coeffs);
    for (a, b) in b1.iter().zip(&apf) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }
}

#[test]
fn block_equation_residual_is_small() {
    // u + PTu + TPu - PTPu - f at 5 points per panel, with every T applied
    // by the oracle or exact angles independently of the solve.
    let d = disc(&SQUARE, 8, 7.0);
    let f = d.sample(smooth());
    let m = solve_modified(&d, d.iterated_kernel(), &f).unwrap();
    let mesh = d.mesh().clone();
    let poly = mesh.polygon().clone();
    let z_fn = {
        let m = m.clone();
        move |p: &BoundaryPoint<f64>| m.z_at(p).unwrap()
    };
    // P T z on each panel: since Pz = 0, PTu = A y + PTz, TPu = Ty, PTPu = Ay.
    let ptz: Vec<f64> = d.average_of_t(m.z_nodes());
    let f_sup = 1.3;
    let mut worst: f64 = 0.0;
    for (i, p) in mesh.panels().iter().enumerate().step_by(3) {
        for k in 1..=5 {
            let d_from = p.lo.from_start + (p.hi.from_start - p.lo.from_start) * (k as f64) / 6.0;
            let x = poly.from_start(p.edge_index, d_from);
            let u = m.y.coeffs()[i] + z_fn(&x);
            let ty = crate::kernel::apply_t_pc_at(&poly, mesh.panels(), m.y.coeffs(), &x);
            let res = u + (m.ay.coeffs()[i] + ptz[i]) + ty - m.ay.coeffs()[i] - (f.f)(&x);
            worst = worst.max(res.abs());
        }
    }
    assert!(worst <= 1e-7 * f_sup, "{worst}");
}

#[test]
fn interior_potential_winding() {
    let d = disc(&L_SHAPE, 4, 3.0);
    let one = Density::Galerkin(PiecewiseConstant::constant(d.mesh().clone(), 1.0), d.clone());
    let zero = Density::Galerkin(PiecewiseConstant::constant(d.mesh().clone(), 0.0), d.clone());
    for x in [Point2::new(0.5, 0.5), Point2::new(1.5, 0.2), Point2::new(0.3, 1.9)] {
        assert_abs_diff_eq!(interior_potential(&one, x).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(interior_potential(&zero, x).unwrap(), 0.0);
    }
    assert!(matches!(
        interior_potential(&one, Point2::new(1.5, 1.5)),
        Err(crate::Error::PointNotInterior { .. })
    ));
}

#[test]
fn galerkin_sup_norm_bounds() {
    let d = disc(&SQUARE, 8, 7.0);
    let a = &d.galerkin().a;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = d.mesh();
    let p = mesh.polygon().corner_params()[0].abs();
    for _ in 0..100 {
        let v: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let v: Vec<f64> = v.iter().map(|x| x / sup).collect();
        let av = a.matvec(&v);
        assert!(av.iter().all(|x| x.abs() <= 1.0 + 1e-8));
        for j in 0..mesh.polygon().num_corners() {
            for i in mesh.half_segment(j, Side::Before) {
                let local: f64 = mesh
                    .half_segment(j, Side::After)
                    .map(|k| a.get(i, k) * v[k])
                    .sum();
                assert!(local.abs() <= p + 0.05);
            }
        }
    }
}
