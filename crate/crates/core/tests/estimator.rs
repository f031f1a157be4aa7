mod common;

use aw_core::awfem::solve;
use aw_core::benchmarks::{strain, Benchmark, BenchmarkName};
use aw_core::estimator::{
    boundary_expression, check_representation_identity, estimate, interior_edge_terms, EpsField, IdentityError,
    JumpForm, ScalarJet,
};
use aw_core::jet::Jet;
use aw_core::material::LameParameters;
use aw_core::mesh::Triangulation;
use aw_core::quadrature::{integrate_edge, integrate_triangle, EdgeRule};
use common::*;
use std::f64::consts::PI;

fn cubic_u(x: Jet, y: Jet) -> [Jet; 2] {
    [
        x * x * y - 0.5 * (y * y * y) + 0.25 * x + 0.1,
        0.3 * (x * x * x) - x * y * y + 2.0 * (x * y),
    ]
}

fn barycentric(p: &[[f64; 2]; 3], x: Jet, y: Jet) -> [Jet; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    // signed area of (x, a, b) over the total
    let lam = |a: [f64; 2], b: [f64; 2]| (1.0 / det) * ((x - a[0]) * (y - b[1]) - (x - b[0]) * (y - a[1]));
    [lam(p[1], p[2]), lam(p[2], p[0]), lam(p[0], p[1])]
}

#[test]
fn barycentric_helper() {
    let p = [[0.1, 0.2], [1.3, 0.1], [0.4, 0.9]];
    for (k, v) in p.iter().enumerate() {
        let (x, y) = Jet::variables(*v);
        let l = barycentric(&p, x, y);
        for i in 0..3 {
            assert!((l[i].v - if i == k { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }
}

#[test]
fn representation_identity_with_smooth_test_function() {
    // vertices on the grid lines, where sin(2πx) sin(2πy) vanishes
    for (n, k) in [(2, 2.0), (4, 4.0), (2, 4.0)] {
        let mesh = square_mesh(n, [false; 4], 0.0);
        let eps = random_eps(&mesh, n as u64);
        let phi = |_: usize, p: [f64; 2]| {
            let (x, y) = Jet::variables(p);
            to_scalar((k * PI * x).sin() * (k * PI * y).sin())
        };
        let diff = check_representation_identity(&mesh, &eps, &phi).unwrap();
        assert!(diff <= 1e-10, "n = {n}: {diff}");
    }
}

#[test]
fn representation_identity_with_bubbles() {
    let mesh = square_mesh(3, [false; 4], 0.6);
    let eps = random_eps(&mesh, 7);
    // squared element bubble times a quadratic on one triangle
    for t in [0, 5, 11] {
        let p = mesh.triangle_points(t);
        let phi = move |s: usize, q: [f64; 2]| {
            if s != t {
                return ScalarJet::default();
            }
            let (x, y) = Jet::variables(q);
            let l = barycentric(&p, x, y);
            let b = l[0] * l[1] * l[2];
            to_scalar(b * b * (1.0 + 0.5 * x - 2.0 * (x * y)))
        };
        let diff = check_representation_identity(&mesh, &eps, &phi).unwrap();
        assert!(diff <= 1e-10, "triangle {t}: {diff}");
    }
    // squared edge bubble times the signed distance to an interior edge:
    // globally C¹ on the edge patch
    for (e, edge) in mesh.edges().iter().enumerate().filter(|(_, e)| e.minus.is_some()).take(6) {
        let f = mesh.edge_frame(e);
        let patch = [edge.plus, edge.minus.unwrap()];
        let ends = edge.vertices;
        let points: Vec<[[f64; 2]; 3]> = patch.iter().map(|&t| mesh.triangle_points(t)).collect();
        let tris: Vec<[usize; 3]> = patch.iter().map(|&t| mesh.triangles()[t]).collect();
        let phi = move |s: usize, q: [f64; 2]| {
            let Some(k) = patch.iter().position(|&t| t == s) else {
                return ScalarJet::default();
            };
            let (x, y) = Jet::variables(q);
            let l = barycentric(&points[k], x, y);
            let la = l[tris[k].iter().position(|&v| v == ends[0]).unwrap()];
            let lb = l[tris[k].iter().position(|&v| v == ends[1]).unwrap()];
            let d = f.nu[0] * (x - f.mid[0]) + f.nu[1] * (y - f.mid[1]);
            let b = la * lb;
            to_scalar(b * b * d * (2.0 - y + x * x))
        };
        let diff = check_representation_identity(&mesh, &eps, &phi).unwrap();
        assert!(diff <= 1e-10, "edge {e}: {diff}");
    }
}

#[test]
fn identity_requires_vanishing_vertex_values() {
    let mesh = square_mesh(2, [false; 4], 0.0);
    let eps = random_eps(&mesh, 1);
    let phi = |_: usize, _: [f64; 2]| ScalarJet {
        value: 1.0,
        ..Default::default()
    };
    assert!(matches!(
        check_representation_identity(&mesh, &eps, &phi),
        Err(IdentityError::NonzeroAtVertex { .. })
    ));
}

/// `(ε(v), Curl²φ)` by quadrature.
fn strain_pairing(mesh: &Triangulation, m: &Manufactured, phi: &dyn Fn([f64; 2]) -> ScalarJet) -> f64 {
    (0..mesh.num_triangles())
        .map(|t| {
            integrate_triangle(
                &mesh.triangle_points(t),
                |x| strain(&m.jet(x)).colon(phi(x).curl_curl()),
                30,
            )
            .unwrap()
        })
        .sum()
}

#[test]
fn boundary_identity_for_dirichlet_data() {
    let m = Manufactured::new(unit_params(), cubic_u);
    let m2 = Manufactured::new(unit_params(), |x, y| [(x + 2.0 * y).sin(), x * (y * y).cos()]);
    for problem in [&m, &m2] {
        // clamped everywhere
        let mesh = square_mesh(2, [false; 4], 0.0);
        let phi = |p: [f64; 2]| {
            let (x, y) = Jet::variables(p);
            to_scalar((2.0 * PI * x).sin() * (2.0 * PI * y).sin())
        };
        let lhs = strain_pairing(&mesh, problem, &phi);
        let rhs = boundary_expression(&mesh, problem, &|_, p| phi(p)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
        // traction on the right side, where φ and ∇φ vanish
        let mesh = square_mesh(2, [false, true, false, false], 0.0);
        let phi = |p: [f64; 2]| {
            let (x, y) = Jet::variables(p);
            let s = (2.0 * PI * x).sin();
            to_scalar(s * s * (2.0 * PI * y).sin())
        };
        let lhs = strain_pairing(&mesh, problem, &phi);
        let rhs = boundary_expression(&mesh, problem, &|_, p| phi(p)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }
}

#[test]
fn estimator_vanishes_for_reproduced_solutions() {
    let params = unit_params();
    let m = Manufactured::new(params, cubic_u);
    for bc in [[false; 4], [false, true, true, false], [true, false, true, false]] {
        let mesh = square_mesh(3, bc, 0.5);
        let (space, sol) = solve(&mesh, &params, &m).unwrap();
        let eps = EpsField::from_solution(&sol, &params);
        let br = estimate(&mesh, &eps, &space.neumann, &m).unwrap();
        let norm = l2_norm(&mesh, |t, x| sol.stress_at(t, x));
        assert!(br.eta() <= 1e-9 * norm, "{bc:?}: {} vs {norm}", br.eta());
        assert!(br.osc_ud_sq().sqrt() <= 1e-9 * norm);
    }
}

#[test]
fn indicators_partition_the_estimate() {
    for name in BenchmarkName::ALL {
        let b = Benchmark::new(name, LameParameters::from_young_poisson(1e5, 0.3).unwrap());
        let (space, sol) = solve(&b.mesh, &b.params, &b).unwrap();
        let eps = EpsField::from_solution(&sol, &b.params);
        let br = estimate(&b.mesh, &eps, &space.neumann, &b).unwrap();
        let sum: f64 = br.indicators(&b.mesh).iter().sum();
        assert!((sum - br.total_sq()).abs() <= 1e-12 * br.total_sq(), "{name}");
    }
}

#[test]
fn tangential_derivative_of_normal_jump_vanishes() {
    for name in [BenchmarkName::Academic, BenchmarkName::LShape, BenchmarkName::Cook] {
        let b = Benchmark::new(name, LameParameters::from_young_poisson(1e5, 0.3).unwrap());
        let (_, sol) = solve(&b.mesh, &b.params, &b).unwrap();
        let eps = EpsField::from_solution(&sol, &b.params);
        let mesh = &b.mesh;
        let (mut full, mut simple, mut tang, mut scale) = (0.0, 0.0, 0.0, 0.0);
        for e in 0..mesh.num_edges() {
            let Some(p) = interior_edge_terms(mesh, &eps, e, JumpForm::Full).unwrap() else { continue };
            full += p[1];
            simple += interior_edge_terms(mesh, &eps, e, JumpForm::Simplified).unwrap().unwrap()[1];
            tang += interior_edge_terms(mesh, &eps, e, JumpForm::TangentialJump).unwrap().unwrap()[1];
            // size of the one-sided derivatives entering the jump
            let f = mesh.edge_frame(e);
            let t = mesh.edge(e).plus;
            scale += f.h.powi(3)
                * integrate_edge(f.start, f.end, |x, _| eps.directional(t, x, f.tau).norm_sq(), 6).unwrap();
        }
        assert!(tang.sqrt() <= 1e-10 * scale.sqrt(), "{name}: {tang} vs {scale}");
        assert!((full.sqrt() - simple.sqrt()).abs() <= 1e-10 * scale.sqrt(), "{name}");
    }
}

/// `τ·[rot ε] − ∂_s(ν·[ε]τ)` evaluated pointwise from the one-sided fields.
#[test]
fn pointwise_jump_grouping_matches_edge_term() {
    let b = Benchmark::cook(LameParameters::from_young_poisson(1e5, 0.3).unwrap());
    let (_, sol) = solve(&b.mesh, &b.params, &b).unwrap();
    let eps = EpsField::from_solution(&sol, &b.params);
    let mesh = &b.mesh;
    let rule = EdgeRule::get(12).unwrap();
    for e in 0..mesh.num_edges() {
        let edge = mesh.edge(e);
        let Some(m) = edge.minus else { continue };
        let f = mesh.edge_frame(e);
        let mut pointwise = 0.0;
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let x = f.point(s);
            let (rp, rm) = (eps.rot_at(edge.plus, x), eps.rot_at(m, x));
            let rot = f.tau[0] * (rp[0] - rm[0]) + f.tau[1] * (rp[1] - rm[1]);
            let ds = (eps.directional(edge.plus, x, f.tau) - eps.directional(m, x, f.tau)).bilinear(f.nu, f.tau);
            pointwise += w * (rot - ds).powi(2);
        }
        pointwise *= f.h.powi(4);
        let eq = interior_edge_terms(mesh, &eps, e, JumpForm::Full).unwrap().unwrap()[1];
        assert!((pointwise - eq).abs() <= 1e-10 * eq.max(1e-300), "edge {e}: {pointwise} vs {eq}");
    }
}

#[test]
fn estimator_is_homogeneous_in_the_stress() {
    let b = Benchmark::lshape(LameParameters::from_young_poisson(1e5, 0.3).unwrap());
    let (space, sol) = solve(&b.mesh, &b.params, &b).unwrap();
    let eps = EpsField::from_solution(&sol, &b.params);
    let scaled = EpsField::new(eps.frames.clone(), eps.eps.iter().map(|e| e.scale(3.0)).collect());
    let a = estimate(&b.mesh, &eps, &space.neumann, &b).unwrap();
    let c = estimate(&b.mesh, &scaled, &space.neumann, &b).unwrap();
    assert!((c.volume_sq() - 9.0 * a.volume_sq()).abs() <= 1e-12 * c.volume_sq());
    assert!((c.interior_sq() - 9.0 * a.interior_sq()).abs() <= 1e-12 * c.interior_sq());
    assert_eq!(a.osc_g, c.osc_g);
}
