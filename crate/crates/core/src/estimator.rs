//! Explicit residual-based error estimator for the AW stress.
//!
//! Everything is computed from `ε_h = C⁻¹σ_h`:
//!
//! ```text
//! η² = Σ_T h_T⁴ ‖rot rot ε_h‖²_T + osc²(f) + osc²(g − g_h)
//!    + Σ_{E interior} h_E ‖τ·[ε_h]τ‖²_E + h_E³ ‖τ·([rot ε_h] − ∂_s([ε_h]ν))‖²_E
//!    + Σ_{E ⊂ Γ_D}    h_E ‖τ·(ε_h τ − ∂_s u_D)‖²_E
//!                   + h_E³ ‖τ·rot ε_h − ν·(∂_s(ε_h τ) − ∂²_s u_D)‖²_E
//! ```
//!
//! `rot` acts row-wise, `rot Φ = ∂₁Φ₂ − ∂₂Φ₁`. The Dirichlet data
//! oscillations are reported separately and are not part of `η`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::awfem::{AwError, NeumannData, Solution};
use crate::material::{LameParameters, SymMat2};
use crate::mesh::Triangulation;
use crate::poly::{LocalFrame, Poly, SymPoly};
use crate::problem::ProblemData;
use crate::quadrature::{
    barycentric_to_point, EdgeRule, QuadratureError, TriangleRule, EDGE_DEGREE, TRIANGLE_DEGREE,
};

/// Degree of the edge projection in the Dirichlet data oscillations.
pub const OSC_PROJECTION_DEGREE: usize = 3;
/// Quadrature degree for non-polynomial edge data.
const DATA_EDGE_DEGREE: usize = 20;

/// `C⁻¹` applied to the coefficients of a symmetric field.
pub fn apply_cinv_poly(params: &LameParameters, s: &SymPoly) -> SymPoly {
    let [a, b] = params.cinv_coefficients();
    let mut tr = s.xx.clone();
    tr.axpy(1.0, &s.yy);
    let mut xx = s.xx.scale(a);
    xx.axpy(b, &tr);
    let mut yy = s.yy.scale(a);
    yy.axpy(b, &tr);
    SymPoly {
        xx,
        xy: s.xy.scale(a),
        yy,
    }
}

/// Row-wise `rot` of a symmetric field: `(∂₁ε₁₂ − ∂₂ε₁₁, ∂₁ε₂₂ − ∂₂ε₁₂)`.
pub fn rot(frame: &LocalFrame, e: &SymPoly) -> [Poly; 2] {
    [
        &frame.dx(&e.xy) - &frame.dy(&e.xx),
        &frame.dx(&e.yy) - &frame.dy(&e.xy),
    ]
}

/// `rot rot ε = ∂₁₁ε₂₂ − 2∂₁₂ε₁₂ + ∂₂₂ε₁₁`.
pub fn rot_rot(frame: &LocalFrame, e: &SymPoly) -> Poly {
    let r = rot(frame, e);
    &frame.dx(&r[1]) - &frame.dy(&r[0])
}

/// `Curl φ = (−∂₂φ, ∂₁φ)` of a scalar.
pub fn curl(frame: &LocalFrame, phi: &Poly) -> [Poly; 2] {
    [frame.dy(phi).scale(-1.0), frame.dx(phi)]
}

/// Piecewise polynomial strain `ε_h = C⁻¹σ_h` with cached derivatives.
#[derive(Clone, Debug)]
pub struct EpsField {
    pub frames: Vec<LocalFrame>,
    pub eps: Vec<SymPoly>,
    dx: Vec<SymPoly>,
    dy: Vec<SymPoly>,
    rot: Vec<[Poly; 2]>,
    rotrot: Vec<Poly>,
}

fn sym_dx(frame: &LocalFrame, s: &SymPoly) -> SymPoly {
    SymPoly {
        xx: frame.dx(&s.xx),
        xy: frame.dx(&s.xy),
        yy: frame.dx(&s.yy),
    }
}

fn sym_dy(frame: &LocalFrame, s: &SymPoly) -> SymPoly {
    SymPoly {
        xx: frame.dy(&s.xx),
        xy: frame.dy(&s.xy),
        yy: frame.dy(&s.yy),
    }
}

impl EpsField {
    /// Wraps a piecewise polynomial strain given per triangle.
    pub fn new(frames: Vec<LocalFrame>, eps: Vec<SymPoly>) -> Self {
        let dx = frames.iter().zip(&eps).map(|(f, e)| sym_dx(f, e)).collect();
        let dy = frames.iter().zip(&eps).map(|(f, e)| sym_dy(f, e)).collect();
        let rot = frames.iter().zip(&eps).map(|(f, e)| rot(f, e)).collect();
        let rotrot = frames.iter().zip(&eps).map(|(f, e)| rot_rot(f, e)).collect();
        Self {
            frames,
            eps,
            dx,
            dy,
            rot,
            rotrot,
        }
    }

    pub fn from_stress(frames: Vec<LocalFrame>, sigma: &[SymPoly], params: &LameParameters) -> Self {
        let eps = sigma.iter().map(|s| apply_cinv_poly(params, s)).collect();
        Self::new(frames, eps)
    }

    pub fn from_solution(sol: &Solution, params: &LameParameters) -> Self {
        Self::from_stress(sol.frames.clone(), &sol.sigma, params)
    }

    pub fn eval(&self, t: usize, x: [f64; 2]) -> SymMat2 {
        SymMat2::from_array(self.eps[t].eval_local(self.frames[t].to_local(x)))
    }

    /// Derivative of `ε_h|_T` along `d`.
    pub fn directional(&self, t: usize, x: [f64; 2], d: [f64; 2]) -> SymMat2 {
        let xi = self.frames[t].to_local(x);
        let gx = SymMat2::from_array(self.dx[t].eval_local(xi));
        let gy = SymMat2::from_array(self.dy[t].eval_local(xi));
        d[0] * gx + d[1] * gy
    }

    pub fn rot_at(&self, t: usize, x: [f64; 2]) -> [f64; 2] {
        let xi = self.frames[t].to_local(x);
        [self.rot[t][0].eval(xi[0], xi[1]), self.rot[t][1].eval(xi[0], xi[1])]
    }

    pub fn rot_rot_poly(&self, t: usize) -> &Poly {
        &self.rotrot[t]
    }

    pub fn rot_rot_at(&self, t: usize, x: [f64; 2]) -> f64 {
        let xi = self.frames[t].to_local(x);
        self.rotrot[t].eval(xi[0], xi[1])
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `h_T⁴ ∫_T (rot rot ε_h)²`.
pub fn volume_term(mesh: &Triangulation, eps: &EpsField, t: usize) -> Result<f64, QuadratureError> {
    let h = mesh.diameter(t);
    let pts = mesh.triangle_points(t);
    let rr = eps.rot_rot_poly(t);
    let frame = eps.frames[t];
    let val = crate::quadrature::integrate_triangle(
        &pts,
        |x| {
            let xi = frame.to_local(x);
            rr.eval(xi[0], xi[1]).powi(2)
        },
        4,
    )?;
    Ok(h.powi(4) * val)
}

/// Which form of the second interior-edge residual to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpForm {
    /// `τ·([rot ε_h] − ∂_s([ε_h]ν))`.
    Full,
    /// `τ·[rot ε_h]`, valid when `τ·∂_s([ε_h]ν) = 0`.
    Simplified,
    /// `τ·∂_s([ε_h]ν)` alone.
    TangentialJump,
}

/// `(h_E ‖τ·[ε_h]τ‖², h_E³ ‖second residual‖²)` on an interior edge; `None` on boundary edges.
pub fn interior_edge_terms(
    mesh: &Triangulation,
    eps: &EpsField,
    e: usize,
    form: JumpForm,
) -> Result<Option<[f64; 2]>, QuadratureError> {
    let edge = mesh.edge(e);
    let Some(minus) = edge.minus else {
        return Ok(None);
    };
    let plus = edge.plus;
    let f = mesh.edge_frame(e);
    let (nu, tau) = (f.nu, f.tau);
    let rule = EdgeRule::get(EDGE_DEGREE)?;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for (&s, &w) in rule.points.iter().zip(&rule.weights) {
        let x = f.point(s);
        let jump = eps.eval(plus, x) - eps.eval(minus, x);
        t1 += w * jump.bilinear(tau, tau).powi(2);
        let rp = eps.rot_at(plus, x);
        let rm = eps.rot_at(minus, x);
        let rot_jump = dot(tau, [rp[0] - rm[0], rp[1] - rm[1]]);
        let ds = eps.directional(plus, x, tau) - eps.directional(minus, x, tau);
        let tang = ds.bilinear(tau, nu);
        let r = match form {
            JumpForm::Full => rot_jump - tang,
            JumpForm::Simplified => rot_jump,
            JumpForm::TangentialJump => tang,
        };
        t2 += w * r * r;
    }
    Ok(Some([f.h * f.h * t1, f.h.powi(4) * t2]))
}

/// `(h_E ‖τ·(ε_hτ − ∂_s u_D)‖², h_E³ ‖τ·rot ε_h − ν·(∂_s(ε_hτ) − ∂²_s u_D)‖²)` on a Dirichlet edge.
pub fn dirichlet_edge_terms(
    mesh: &Triangulation,
    eps: &EpsField,
    e: usize,
    problem: &dyn ProblemData,
) -> Result<Option<[f64; 2]>, QuadratureError> {
    let edge = mesh.edge(e);
    let Some(label) = edge.label.filter(|l| l.is_dirichlet()) else {
        return Ok(None);
    };
    let t = edge.plus;
    let f = mesh.edge_frame(e);
    let (nu, tau) = (f.nu, f.tau);
    let rule = EdgeRule::get(DATA_EDGE_DEGREE)?;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for (&s, &w) in rule.points.iter().zip(&rule.weights) {
        let x = f.point(s);
        let jet = problem.dirichlet(x, label.segment);
        let du = jet.directional(tau);
        let ddu = jet.second_directional(tau);
        let et = eps.eval(t, x).mul_vec(tau);
        t1 += w * dot(tau, [et[0] - du[0], et[1] - du[1]]).powi(2);
        let r = dot(tau, eps.rot_at(t, x));
        let dset = eps.directional(t, x, tau).mul_vec(tau);
        t2 += w * (r - dot(nu, [dset[0] - ddu[0], dset[1] - ddu[1]])).powi(2);
    }
    Ok(Some([f.h * f.h * t1, f.h.powi(4) * t2]))
}

/// `h_T² ‖f − Π₁f‖²_T` for the L² projection onto `P1(T; R²)`.
pub fn osc_f_term(mesh: &Triangulation, t: usize, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Result<f64, QuadratureError> {
    let pts = mesh.triangle_points(t);
    let area = mesh.area(t);
    let h = mesh.diameter(t);
    let frame = LocalFrame {
        center: mesh.centroid(t),
        h,
    };
    let rule = TriangleRule::get(TRIANGLE_DEGREE)?;
    let xs: Vec<[f64; 2]> = rule.map_points(&pts);
    let fs: Vec<[f64; 2]> = xs.iter().map(|x| f(*x)).collect();
    let basis = |x: [f64; 2]| {
        let xi = frame.to_local(x);
        [1.0, xi[0], xi[1]]
    };
    let mut mass = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Matrix3x2::<f64>::zeros();
    for ((x, fx), &w) in xs.iter().zip(&fs).zip(&rule.weights) {
        let p = nalgebra::Vector3::from(basis(*x));
        mass += w * area * p * p.transpose();
        for c in 0..2 {
            for i in 0..3 {
                rhs[(i, c)] += w * area * p[i] * fx[c];
            }
        }
    }
    let coef = mass.lu().solve(&rhs).unwrap_or_else(nalgebra::Matrix3x2::zeros);
    let mut sum = 0.0;
    for ((x, fx), &w) in xs.iter().zip(&fs).zip(&rule.weights) {
        let p = basis(*x);
        for c in 0..2 {
            let proj = p[0] * coef[(0, c)] + p[1] * coef[(1, c)] + p[2] * coef[(2, c)];
            sum += w * area * (fx[c] - proj).powi(2);
        }
    }
    Ok(h * h * sum)
}

/// `h_E ‖g − g_h‖²_E` on a Neumann edge.
pub fn osc_g_term(
    mesh: &Triangulation,
    e: usize,
    neumann: &crate::awfem::NeumannEdge,
    problem: &dyn ProblemData,
) -> Result<f64, QuadratureError> {
    let f = mesh.edge_frame(e);
    let rule = EdgeRule::get(DATA_EDGE_DEGREE)?;
    let mut s = 0.0;
    for (&t, &w) in rule.points.iter().zip(&rule.weights) {
        let g = problem.traction(f.point(t), neumann.segment);
        let gh = neumann.eval(t);
        s += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
    }
    Ok(f.h * f.h * s)
}

/// Squared L² norm on `[0, 1]` of `(1 − Π_m) v` for samples `v` at the rule points.
fn projection_defect(rule: &EdgeRule, v: &[f64], m: usize) -> f64 {
    // orthonormal shifted Legendre polynomials on [0, 1]
    let legendre = |n: usize, t: f64| {
        let x = 2.0 * t - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        let p = match n {
            0 => 1.0,
            1 => x,
            _ => {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                p1
            }
        };
        p * ((2 * n + 1) as f64).sqrt()
    };
    let mut coef = vec![0.0; m + 1];
    for (n, c) in coef.iter_mut().enumerate() {
        *c = rule
            .points
            .iter()
            .zip(&rule.weights)
            .zip(v)
            .map(|((&t, &w), &vi)| w * vi * legendre(n, t))
            .sum();
    }
    rule.points
        .iter()
        .zip(&rule.weights)
        .zip(v)
        .map(|((&t, &w), &vi)| {
            let p: f64 = coef.iter().enumerate().map(|(n, c)| c * legendre(n, t)).sum();
            w * (vi - p).powi(2)
        })
        .sum()
}

/// `(h_E ‖(1 − Π₃)∂_s(u_D·τ)‖², h_E³ ‖(1 − Π₃)∂²_s(u_D·ν)‖²)` on a Dirichlet edge.
pub fn osc_dirichlet_terms(
    mesh: &Triangulation,
    e: usize,
    problem: &dyn ProblemData,
) -> Result<Option<[f64; 2]>, QuadratureError> {
    let Some(label) = mesh.edge(e).label.filter(|l| l.is_dirichlet()) else {
        return Ok(None);
    };
    let f = mesh.edge_frame(e);
    let rule = EdgeRule::get(DATA_EDGE_DEGREE)?;
    let mut first = Vec::with_capacity(rule.len());
    let mut second = Vec::with_capacity(rule.len());
    for &t in &rule.points {
        let jet = problem.dirichlet(f.point(t), label.segment);
        first.push(dot(jet.directional(f.tau), f.tau));
        second.push(dot(jet.second_directional(f.tau), f.nu));
    }
    let o1 = projection_defect(rule, &first, OSC_PROJECTION_DEGREE);
    let o2 = projection_defect(rule, &second, OSC_PROJECTION_DEGREE);
    Ok(Some([f.h * f.h * o1, f.h.powi(4) * o2]))
}

/// Every contribution of the estimator, per triangle and per edge (all squared).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimatorBreakdown {
    pub volume: Vec<f64>,
    pub osc_f: Vec<f64>,
    /// Per edge; zero on boundary edges.
    pub interior: Vec<[f64; 2]>,
    /// Per edge; zero off the Dirichlet boundary.
    pub dirichlet: Vec<[f64; 2]>,
    /// Per edge; zero off the Neumann boundary.
    pub osc_g: Vec<f64>,
    /// `(osc_I², osc_II²)` per edge; zero off the Dirichlet boundary.
    pub osc_ud: Vec<[f64; 2]>,
}

impl EstimatorBreakdown {
    pub fn volume_sq(&self) -> f64 {
        self.volume.iter().sum()
    }

    pub fn interior_sq(&self) -> f64 {
        self.interior.iter().map(|p| p[0] + p[1]).sum()
    }

    pub fn dirichlet_sq(&self) -> f64 {
        self.dirichlet.iter().map(|p| p[0] + p[1]).sum()
    }

    pub fn osc_f_sq(&self) -> f64 {
        self.osc_f.iter().sum()
    }

    pub fn osc_g_sq(&self) -> f64 {
        self.osc_g.iter().sum()
    }

    pub fn osc_ud_sq(&self) -> f64 {
        self.osc_ud.iter().map(|p| p[0] + p[1]).sum()
    }

    /// `η²`, without the Dirichlet data oscillations.
    pub fn total_sq(&self) -> f64 {
        self.volume_sq() + self.osc_f_sq() + self.osc_g_sq() + self.interior_sq() + self.dirichlet_sq()
    }

    pub fn eta(&self) -> f64 {
        self.total_sq().sqrt()
    }

    /// `η²(T)`: triangle terms, half of each interior edge, all of each boundary edge.
    pub fn indicators(&self, mesh: &Triangulation) -> Vec<f64> {
        let mut out: Vec<f64> = self.volume.iter().zip(&self.osc_f).map(|(a, b)| a + b).collect();
        for (e, edge) in mesh.edges().iter().enumerate() {
            let int = self.interior[e][0] + self.interior[e][1];
            match edge.minus {
                Some(m) => {
                    out[edge.plus] += 0.5 * int;
                    out[m] += 0.5 * int;
                }
                None => {
                    out[edge.plus] += self.dirichlet[e][0] + self.dirichlet[e][1] + self.osc_g[e];
                }
            }
        }
        out
    }
}

/// `η` from a list of squared parts.
pub fn total(parts: &[f64]) -> f64 {
    parts.iter().sum::<f64>().sqrt()
}

/// Evaluates all estimator terms for a solved problem.
pub fn estimate(
    mesh: &Triangulation,
    eps: &EpsField,
    neumann: &NeumannData,
    problem: &dyn ProblemData,
) -> Result<EstimatorBreakdown, AwError> {
    let f = |x: [f64; 2]| problem.body_force(x);
    let tri: Vec<(f64, f64)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| Ok((volume_term(mesh, eps, t)?, osc_f_term(mesh, t, &f)?)))
        .collect::<Result<_, QuadratureError>>()?;
    let by_edge: HashMap<usize, &crate::awfem::NeumannEdge> =
        neumann.edges.iter().map(|n| (n.edge, n)).collect();
    type EdgeParts = ([f64; 2], [f64; 2], f64, [f64; 2]);
    let edges: Vec<EdgeParts> = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| {
            let int = interior_edge_terms(mesh, eps, e, JumpForm::Full)?.unwrap_or([0.0; 2]);
            let dir = dirichlet_edge_terms(mesh, eps, e, problem)?.unwrap_or([0.0; 2]);
            let og = match by_edge.get(&e) {
                Some(n) => osc_g_term(mesh, e, n, problem)?,
                None => 0.0,
            };
            let ou = osc_dirichlet_terms(mesh, e, problem)?.unwrap_or([0.0; 2]);
            Ok((int, dir, og, ou))
        })
        .collect::<Result<_, QuadratureError>>()?;
    Ok(EstimatorBreakdown {
        volume: tri.iter().map(|p| p.0).collect(),
        osc_f: tri.iter().map(|p| p.1).collect(),
        interior: edges.iter().map(|p| p.0).collect(),
        dirichlet: edges.iter().map(|p| p.1).collect(),
        osc_g: edges.iter().map(|p| p.2).collect(),
        osc_ud: edges.iter().map(|p| p.3).collect(),
    })
}

/// Value, gradient and Hessian of a scalar test function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl ScalarJet {
    /// `Curl Curl φ = (∂₂₂φ, −∂₁₂φ; −∂₁₂φ, ∂₁₁φ)`.
    pub fn curl_curl(&self) -> SymMat2 {
        SymMat2::new(self.hess[1][1], -self.hess[0][1], self.hess[0][0])
    }
}

/// Failure of a representation-formula check.
#[derive(Debug, Clone, PartialEq)]
pub enum IdentityError {
    NonzeroAtVertex { vertex: usize, value: f64 },
    Quadrature(QuadratureError),
}

impl From<QuadratureError> for IdentityError {
    fn from(e: QuadratureError) -> Self {
        IdentityError::Quadrature(e)
    }
}

fn check_vertices(
    mesh: &Triangulation,
    phi: &dyn Fn(usize, [f64; 2]) -> ScalarJet,
) -> Result<(), IdentityError> {
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            let value = phi(t, mesh.vertices()[v]).value;
            if value.abs() > 1e-12 {
                return Err(IdentityError::NonzeroAtVertex { vertex: v, value });
            }
        }
    }
    Ok(())
}

const IDENTITY_DEGREE: usize = 30;

/// Both sides of the representation formula
///
/// ```text
/// (ε_h, Curl²φ) = (rot rot ε_h, φ)
///   + Σ_{E interior} (τ·[ε_h]τ, ∂_νφ)_E − (([rot ε_h] − ∂_s[ε_h]ν)·τ, φ)_E
///   + Σ_{E boundary} (τ·ε_hτ, ∂_νφ)_E − ((rot ε_h − ∂_s ε_hν)·τ, φ)_E
/// ```
///
/// for `φ` piecewise smooth, globally `H²`, vanishing at every vertex.
/// `phi(t, x)` evaluates `φ|_T`. Returns `(lhs, rhs)`.
pub fn representation_sides(
    mesh: &Triangulation,
    eps: &EpsField,
    phi: &dyn Fn(usize, [f64; 2]) -> ScalarJet,
) -> Result<(f64, f64), IdentityError> {
    check_vertices(mesh, phi)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let rule = TriangleRule::get(IDENTITY_DEGREE)?;
    for t in 0..mesh.num_triangles() {
        let pts = mesh.triangle_points(t);
        let area = mesh.area(t);
        for (b, &w) in rule.points.iter().zip(&rule.weights) {
            let x = barycentric_to_point(&pts, b);
            let j = phi(t, x);
            lhs += w * area * eps.eval(t, x).colon(j.curl_curl());
            rhs += w * area * eps.rot_rot_at(t, x) * j.value;
        }
    }
    let erule = EdgeRule::get(IDENTITY_DEGREE)?;
    for (e, edge) in mesh.edges().iter().enumerate() {
        let f = mesh.edge_frame(e);
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = f.point(s);
            let j = phi(edge.plus, x);
            let dnu = dot(j.grad, f.nu);
            let (jump, rot_jump, ds) = match edge.minus {
                Some(m) => {
                    let rp = eps.rot_at(edge.plus, x);
                    let rm = eps.rot_at(m, x);
                    (
                        eps.eval(edge.plus, x) - eps.eval(m, x),
                        [rp[0] - rm[0], rp[1] - rm[1]],
                        eps.directional(edge.plus, x, f.tau) - eps.directional(m, x, f.tau),
                    )
                }
                None => (
                    eps.eval(edge.plus, x),
                    eps.rot_at(edge.plus, x),
                    eps.directional(edge.plus, x, f.tau),
                ),
            };
            let dsn = ds.mul_vec(f.nu);
            let second = dot([rot_jump[0] - dsn[0], rot_jump[1] - dsn[1]], f.tau);
            rhs += w * f.h * (jump.bilinear(f.tau, f.tau) * dnu - second * j.value);
        }
    }
    Ok((lhs, rhs))
}

/// `|LHS − RHS|` of the representation formula.
pub fn check_representation_identity(
    mesh: &Triangulation,
    eps: &EpsField,
    phi: &dyn Fn(usize, [f64; 2]) -> ScalarJet,
) -> Result<f64, IdentityError> {
    let (l, r) = representation_sides(mesh, eps, phi)?;
    Ok((l - r).abs())
}

/// The boundary expression `Σ_{E ⊂ Γ_D} (∂_s u_D, ∂_νφ τ)_E + (∂²_s u_D, φν)_E`,
/// which equals `(ε(v), Curl²φ)` when `v = u_D` on `Γ_D` and `φ, ∇φ` vanish on `Γ_N`.
pub fn boundary_expression(
    mesh: &Triangulation,
    problem: &dyn ProblemData,
    phi: &dyn Fn(usize, [f64; 2]) -> ScalarJet,
) -> Result<f64, IdentityError> {
    check_vertices(mesh, phi)?;
    let rule = EdgeRule::get(IDENTITY_DEGREE)?;
    let mut sum = 0.0;
    for (e, edge, label) in mesh.boundary_edges() {
        if !label.is_dirichlet() {
            continue;
        }
        let f = mesh.edge_frame(e);
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let x = f.point(s);
            let jet = problem.dirichlet(x, label.segment);
            let j = phi(edge.plus, x);
            let du = jet.directional(f.tau);
            let ddu = jet.second_directional(f.tau);
            sum += w * f.h * (dot(du, f.tau) * dot(j.grad, f.nu) + dot(ddu, f.nu) * j.value);
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryLabel, Triangulation};

    fn reference() -> Triangulation {
        let d = BoundaryLabel::dirichlet(0);
        Triangulation::build(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            &[(0, 1, d), (1, 2, d), (2, 0, d)],
        )
        .unwrap()
    }

    fn frame_of(mesh: &Triangulation, t: usize) -> LocalFrame {
        LocalFrame {
            center: mesh.centroid(t),
            h: mesh.diameter(t),
        }
    }

    #[test]
    fn volume_term_of_quadratic_strain() {
        // ε = diag(y², x²): rot rot ε = ∂₁₁ε₂₂ + ∂₂₂ε₁₁ = 4
        let mesh = reference();
        let fr = frame_of(&mesh, 0);
        let y = fr.affine(0.0, [0.0, 1.0]);
        let x = fr.affine(0.0, [1.0, 0.0]);
        let e = SymPoly {
            xx: &y * &y,
            xy: Poly::zero(2),
            yy: &x * &x,
        };
        let field = EpsField::new(vec![fr], vec![e]);
        assert!((field.rot_rot_at(0, [0.2, 0.3]) - 4.0).abs() < 1e-12);
        let v = volume_term(&mesh, &field, 0).unwrap();
        assert!((v - 32.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn rot_curl_is_laplacian() {
        let fr = LocalFrame {
            center: [0.3, -0.1],
            h: 0.7,
        };
        let p = Poly::from_coeffs(3, vec![1.0, 0.5, -2.0, 0.3, 1.1, -0.7, 0.2, 0.4, -0.6, 0.9]);
        let c = curl(&fr, &p);
        let rot_c = &fr.dx(&c[1]) - &fr.dy(&c[0]);
        let lap = &fr.dx(&fr.dx(&p)) + &fr.dy(&fr.dy(&p));
        let diff = &rot_c - &lap;
        assert!(diff.max_abs_coeff() < 1e-12);
        let k = SymPoly {
            xx: Poly::constant(2.0),
            xy: Poly::constant(-1.0),
            yy: Poly::constant(5.0),
        };
        let r = rot(&fr, &k);
        assert!(r[0].max_abs_coeff() == 0.0 && r[1].max_abs_coeff() == 0.0);
    }

    #[test]
    fn rot_rot_annihilates_symmetric_gradients() {
        let fr = LocalFrame {
            center: [0.1, 0.2],
            h: 1.3,
        };
        let mut seed = 1u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let v1 = Poly::from_coeffs(4, (0..15).map(|_| next()).collect());
        let v2 = Poly::from_coeffs(4, (0..15).map(|_| next()).collect());
        let e = SymPoly {
            xx: fr.dx(&v1),
            xy: (&fr.dy(&v1) + &fr.dx(&v2)).scale(0.5),
            yy: fr.dy(&v2),
        };
        assert!(rot_rot(&fr, &e).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn cinv_on_coefficients() {
        let p = LameParameters::new(3.0, 2.0).unwrap();
        let s = SymPoly {
            xx: Poly::constant(1.0),
            xy: Poly::constant(0.0),
            yy: Poly::constant(1.0),
        };
        let e = apply_cinv_poly(&p, &s);
        let want = 1.0 / (2.0 * (3.0 + 2.0));
        assert!((e.xx.coeff(0, 0) - want).abs() < 1e-15);
        assert!((e.yy.coeff(0, 0) - want).abs() < 1e-15);
    }

    #[test]
    fn projection_defect_of_polynomials_vanishes() {
        let rule = EdgeRule::get(DATA_EDGE_DEGREE).unwrap();
        let cubic: Vec<f64> = rule.points.iter().map(|t| 1.0 - 2.0 * t + 3.0 * t.powi(3)).collect();
        assert!(projection_defect(rule, &cubic, 3) < 1e-26);
        // t⁴ − Π₃t⁴ = P̃₄/70 (shifted Legendre), norm² = 1/(70²·9)
        let quartic: Vec<f64> = rule.points.iter().map(|t| t.powi(4)).collect();
        let d = projection_defect(rule, &quartic, 3);
        assert!((d - 1.0 / (4900.0 * 9.0)).abs() < 1e-14, "{d}");
    }

    #[test]
    fn total_of_parts() {
        assert_eq!(total(&[0.0, 0.0]), 0.0);
        assert_eq!(total(&[1.0, 4.0, 4.0]), 3.0);
    }
}
