//! Essential traction conditions: the discrete data `g_h` and the dofs it fixes.
//!
//! On a Neumann edge the normal trace of an AW field is a cubic determined by
//! its values at the two endpoints and its moments of degree 0 and 1. The
//! moments are taken from `g`, so `g − g_h ⊥ P1(E)`. Endpoint values come from
//! `g` at the vertex, or from a prescribed stress at corners.

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use crate::material::SymMat2;
use crate::mesh::Triangulation;
use crate::problem::ProblemData;
use crate::quadrature::{EdgeRule, EDGE_DEGREE};

use super::dofmap::DofMap;
use super::AwError;

/// How the three stress dofs of a vertex are expressed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexMode {
    /// `(σ₁₁, σ₁₂, σ₂₂)`.
    Cartesian,
    /// `(σνν, σντ, σττ)` in the frame of the adjacent straight Neumann boundary.
    Frame { nu: [f64; 2], tau: [f64; 2] },
}

impl VertexMode {
    /// Columns map frame components to Cartesian ones: `cart = R · frame`.
    pub fn to_cartesian(&self) -> [[f64; 3]; 3] {
        match *self {
            VertexMode::Cartesian => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            VertexMode::Frame { nu: n, tau: t } => [
                [n[0] * n[0], 2.0 * n[0] * t[0], t[0] * t[0]],
                [n[0] * n[1], n[0] * t[1] + n[1] * t[0], t[0] * t[1]],
                [n[1] * n[1], 2.0 * n[1] * t[1], t[1] * t[1]],
            ],
        }
    }
}

/// `g_h` on one Neumann edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeumannEdge {
    pub edge: usize,
    pub segment: u32,
    /// `g_h` at the start and end vertex.
    pub end_values: [[f64; 2]; 2],
    /// `(1/h)∫ g ds` and `(1/h)∫ g (2t − 1) ds`.
    pub moments: [[f64; 2]; 2],
}

impl NeumannEdge {
    /// `g_h` at the fraction `t ∈ [0, 1]` along the edge.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let s = 2.0 * t - 1.0;
        let mut out = [0.0; 2];
        for c in 0..2 {
            let (g0, g1) = (self.end_values[0][c], self.end_values[1][c]);
            let (m0, m1) = (self.moments[0][c], self.moments[1][c]);
            // g = a + b s + c s² + d s³ on s ∈ [−1, 1]
            let p = 0.5 * (g0 + g1);
            let q = 0.5 * (g1 - g0);
            let c2 = 1.5 * (p - m0);
            let a = p - c2;
            let b = 7.5 * (m1 - q / 5.0);
            let d = q - b;
            out[c] = a + s * (b + s * (c2 + s * d));
        }
        out
    }
}

/// Dofs fixed by the traction condition plus the vertex dof representation.
#[derive(Clone, Debug)]
pub struct NeumannData {
    pub modes: Vec<VertexMode>,
    /// Prescribed value per stress dof (`None` for free dofs).
    pub fixed: Vec<Option<f64>>,
    pub edges: Vec<NeumannEdge>,
    /// Vertices whose stress was prescribed by an override.
    pub overridden: Vec<usize>,
}

impl NeumannData {
    pub fn num_fixed(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_some()).count()
    }

    pub fn edge_data(&self, e: usize) -> Option<&NeumannEdge> {
        self.edges.iter().find(|n| n.edge == e)
    }
}

fn close(a: [f64; 2], b: [f64; 2], scale: f64) -> bool {
    (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-10 * scale
}

/// Builds `g_h` from the traction data of `problem`.
pub fn interpolate_neumann(
    mesh: &Triangulation,
    problem: &dyn ProblemData,
) -> Result<NeumannData, AwError> {
    let dofs = DofMap::new(mesh);
    let mut modes = vec![VertexMode::Cartesian; mesh.num_vertices()];
    let mut fixed = vec![None; dofs.num_stress()];
    let mut overridden = Vec::new();

    // (normal, traction) pairs seen from each Neumann edge at each vertex
    let mut at_vertex: HashMap<usize, Vec<([f64; 2], [f64; 2])>> = HashMap::new();
    for (e, edge, label) in mesh.boundary_edges() {
        if !label.is_neumann() {
            continue;
        }
        let nu = mesh.edge_frame(e).nu;
        for &v in &edge.vertices {
            let g = problem.traction(mesh.vertices()[v], label.segment);
            at_vertex.entry(v).or_default().push((nu, g));
        }
    }

    let extent = mesh
        .vertices()
        .iter()
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1.0);
    let overrides = problem.corner_overrides();

    let mut vertices: Vec<usize> = at_vertex.keys().copied().collect();
    vertices.sort_unstable();
    for v in vertices {
        let list = &at_vertex[&v];
        let x = mesh.vertices()[v];
        if let Some((_, s)) = overrides.iter().find(|(p, _)| close(*p, x, extent)) {
            for (c, val) in s.to_array().into_iter().enumerate() {
                fixed[dofs.vertex(v, c)] = Some(val);
            }
            overridden.push(v);
            continue;
        }
        let gscale = list
            .iter()
            .fold(1.0f64, |m, (_, g)| m.max(g[0].abs()).max(g[1].abs()));
        let nu0 = list[0].0;
        let parallel = list
            .iter()
            .all(|(n, _)| (n[0] * nu0[1] - n[1] * nu0[0]).abs() < 1e-10);
        if parallel {
            let tau0 = [-nu0[1], nu0[0]];
            let mut snn = 0.0;
            let mut snt = 0.0;
            for (n, g) in list {
                let s = n[0] * nu0[0] + n[1] * nu0[1];
                // σν₀ = s·g
                snn += s * (g[0] * nu0[0] + g[1] * nu0[1]);
                snt += s * (g[0] * tau0[0] + g[1] * tau0[1]);
            }
            snn /= list.len() as f64;
            snt /= list.len() as f64;
            for (n, g) in list {
                let s = n[0] * nu0[0] + n[1] * nu0[1];
                let pred = [
                    s * (snn * nu0[0] + snt * tau0[0]),
                    s * (snn * nu0[1] + snt * tau0[1]),
                ];
                if !close(pred, *g, gscale * 1e1) {
                    return Err(AwError::ConflictingCorner { vertex: v, position: x });
                }
            }
            modes[v] = VertexMode::Frame { nu: nu0, tau: tau0 };
            fixed[dofs.vertex(v, 0)] = Some(snn);
            fixed[dofs.vertex(v, 1)] = Some(snt);
        } else {
            // least squares for σ from σν_i = g_i
            let mut ata = Matrix3::zeros();
            let mut atb = Vector3::zeros();
            for (n, g) in list {
                let rows = [([n[0], n[1], 0.0], g[0]), ([0.0, n[0], n[1]], g[1])];
                for (r, b) in rows {
                    let r = Vector3::from(r);
                    ata += r * r.transpose();
                    atb += r * b;
                }
            }
            let sol = ata
                .lu()
                .solve(&atb)
                .ok_or(AwError::ConflictingCorner { vertex: v, position: x })?;
            let s = SymMat2::new(sol[0], sol[1], sol[2]);
            for (n, g) in list {
                if !close(s.mul_vec(*n), *g, gscale * 1e1) {
                    return Err(AwError::ConflictingCorner { vertex: v, position: x });
                }
            }
            for (c, val) in s.to_array().into_iter().enumerate() {
                fixed[dofs.vertex(v, c)] = Some(val);
            }
        }
    }

    let rule = EdgeRule::get(EDGE_DEGREE)?;
    let mut edges = Vec::new();
    for (e, edge, label) in mesh.boundary_edges() {
        if !label.is_neumann() {
            continue;
        }
        let frame = mesh.edge_frame(e);
        let mut moments = [[0.0; 2]; 2];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let g = problem.traction(frame.point(t), label.segment);
            for c in 0..2 {
                moments[0][c] += w * g[c];
                moments[1][c] += w * g[c] * (2.0 * t - 1.0);
            }
        }
        for c in 0..2 {
            fixed[dofs.edge(e, c)] = Some(moments[0][c]);
            fixed[dofs.edge(e, 2 + c)] = Some(moments[1][c]);
        }
        let mut end_values = [[0.0; 2]; 2];
        for (k, &v) in edge.vertices.iter().enumerate() {
            end_values[k] = match modes[v] {
                VertexMode::Cartesian => {
                    let s = SymMat2::new(
                        fixed[dofs.vertex(v, 0)].unwrap(),
                        fixed[dofs.vertex(v, 1)].unwrap(),
                        fixed[dofs.vertex(v, 2)].unwrap(),
                    );
                    s.mul_vec(frame.nu)
                }
                VertexMode::Frame { nu, tau } => {
                    let s = frame.nu[0] * nu[0] + frame.nu[1] * nu[1];
                    let snn = fixed[dofs.vertex(v, 0)].unwrap();
                    let snt = fixed[dofs.vertex(v, 1)].unwrap();
                    [s * (snn * nu[0] + snt * tau[0]), s * (snn * nu[1] + snt * tau[1])]
                }
            };
        }
        edges.push(NeumannEdge {
            edge: e,
            segment: label.segment,
            end_values,
            moments,
        });
    }

    Ok(NeumannData {
        modes,
        fixed,
        edges,
        overridden,
    })
}
