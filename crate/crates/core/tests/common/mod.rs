#![allow(dead_code)]

use aw_core::benchmarks::{div_stress, strain};
use aw_core::estimator::{EpsField, ScalarJet};
use aw_core::jet::Jet;
use aw_core::material::{LameParameters, SymMat2};
use aw_core::mesh::{BoundaryLabel, Triangulation};
use aw_core::problem::{ProblemData, VectorJet};
use aw_core::poly::{dim, LocalFrame, Poly, SymPoly};
use aw_core::quadrature::{integrate_triangle, TRIANGLE_DEGREE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outward normals of the unit-square sides: bottom, right, top, left.
pub const SQUARE_NORMALS: [[f64; 2]; 4] = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];

/// `n × n` grid on the unit square, each cell split along a diagonal that
/// alternates between cells. Interior vertices are moved by up to `jitter`
/// times the spacing. Side `k` (bottom, right, top, left) gets segment id `k`.
pub fn square_mesh(n: usize, neumann: [bool; 4], jitter: f64) -> Triangulation {
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [i as f64 * h, j as f64 * h];
            if i > 0 && i < n && j > 0 && j < n {
                // deterministic pseudo-random offsets
                let a = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
                let b = ((i * 5 + j * 3) % 7) as f64 / 7.0 - 0.5;
                p[0] += jitter * h * a;
                p[1] += jitter * h * b;
            }
            vertices.push(p);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let label = |k: usize| {
        if neumann[k] {
            BoundaryLabel::neumann(k as u32)
        } else {
            BoundaryLabel::dirichlet(k as u32)
        }
    };
    let mut boundary = Vec::new();
    for i in 0..n {
        boundary.push((id(i, 0), id(i + 1, 0), label(0)));
        boundary.push((id(n, i), id(n, i + 1), label(1)));
        boundary.push((id(i + 1, n), id(i, n), label(2)));
        boundary.push((id(0, i + 1), id(0, i), label(3)));
    }
    Triangulation::build(vertices, triangles, &boundary).expect("valid square mesh")
}

/// Problem data generated from a displacement field; tractions use the
/// unit-square normals.
pub struct Manufactured {
    pub params: LameParameters,
    pub u: fn(Jet, Jet) -> [Jet; 2],
}

impl Manufactured {
    pub fn new(params: LameParameters, u: fn(Jet, Jet) -> [Jet; 2]) -> Self {
        Self { params, u }
    }

    pub fn jet(&self, p: [f64; 2]) -> VectorJet {
        let (x, y) = Jet::variables(p);
        let u = (self.u)(x, y);
        VectorJet {
            value: [u[0].v, u[1].v],
            grad: [u[0].d, u[1].d],
            hess: [u[0].h, u[1].h],
        }
    }

    pub fn stress(&self, p: [f64; 2]) -> SymMat2 {
        self.params.apply_c(strain(&self.jet(p)))
    }
}

impl ProblemData for Manufactured {
    fn body_force(&self, x: [f64; 2]) -> [f64; 2] {
        let d = div_stress(&self.params, &self.jet(x));
        [-d[0], -d[1]]
    }

    fn traction(&self, x: [f64; 2], segment: u32) -> [f64; 2] {
        self.stress(x).mul_vec(SQUARE_NORMALS[segment as usize])
    }

    fn dirichlet(&self, x: [f64; 2], _segment: u32) -> VectorJet {
        self.jet(x)
    }
}

pub fn unit_params() -> LameParameters {
    LameParameters::new(1.0, 1.0).unwrap()
}

/// `‖σ‖_{L²}` of a piecewise field given per triangle.
pub fn l2_norm(mesh: &Triangulation, f: impl Fn(usize, [f64; 2]) -> SymMat2) -> f64 {
    (0..mesh.num_triangles())
        .map(|t| integrate_triangle(&mesh.triangle_points(t), |x| f(t, x).norm_sq(), TRIANGLE_DEGREE).unwrap())
        .sum::<f64>()
        .sqrt()
}

/// A few points inside triangle `t`, including points near its edges.
pub fn sample_points(mesh: &Triangulation, t: usize) -> Vec<[f64; 2]> {
    let p = mesh.triangle_points(t);
    [
        [1.0 / 3.0, 1.0 / 3.0],
        [0.8, 0.1],
        [0.1, 0.8],
        [0.1, 0.1],
        [0.5, 0.49],
        [0.0, 0.5],
        [0.999, 0.0],
    ]
    .iter()
    .map(|&[a, b]| {
        let c = 1.0 - a - b;
        [
            c * p[0][0] + a * p[1][0] + b * p[2][0],
            c * p[0][1] + a * p[1][1] + b * p[2][1],
        ]
    })
    .collect()
}

pub fn frames(mesh: &Triangulation) -> Vec<LocalFrame> {
    (0..mesh.num_triangles())
        .map(|t| LocalFrame {
            center: mesh.centroid(t),
            h: mesh.diameter(t),
        })
        .collect()
}

pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Poly {
    Poly::from_coeffs(degree, (0..dim(degree)).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Discontinuous piecewise cubic symmetric field with unit-size coefficients.
pub fn random_eps(mesh: &Triangulation, seed: u64) -> EpsField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = (0..mesh.num_triangles())
        .map(|_| SymPoly {
            xx: random_poly(&mut rng, 3),
            xy: random_poly(&mut rng, 3),
            yy: random_poly(&mut rng, 3),
        })
        .collect();
    EpsField::new(frames(mesh), eps)
}

pub fn to_scalar(j: Jet) -> ScalarJet {
    ScalarJet {
        value: j.v,
        grad: j.d,
        hess: j.h,
    }
}

/// `Π₁f` on a triangle by solving the P1 mass system.
pub fn project_p1(mesh: &Triangulation, t: usize, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> impl Fn([f64; 2]) -> [f64; 2] {
    let pts = mesh.triangle_points(t);
    let c = mesh.centroid(t);
    let basis = move |x: [f64; 2]| [1.0, x[0] - c[0], x[1] - c[1]];
    let mut mass = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Matrix3x2::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            mass[(i, j)] = integrate_triangle(&pts, |x| basis(x)[i] * basis(x)[j], 2).unwrap();
        }
        for k in 0..2 {
            rhs[(i, k)] = integrate_triangle(&pts, |x| basis(x)[i] * f(x)[k], TRIANGLE_DEGREE).unwrap();
        }
    }
    let coef = mass.lu().solve(&rhs).unwrap();
    move |x| {
        let b = basis(x);
        let mut out = [0.0; 2];
        for k in 0..2 {
            out[k] = (0..3).map(|i| coef[(i, k)] * b[i]).sum();
        }
        out
    }
}
