//! Arnold-Winther mixed finite elements (lowest order) for linear elasticity.
//!
//! Stress in the AW space with P3 symmetric fields and P1 divergence,
//! displacement piecewise P1 and discontinuous. Traction conditions are
//! essential and eliminated from the system; displacement conditions enter
//! the right-hand side.

mod basis;
mod dofmap;
mod neumann;
mod solve;

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::Triangulation;
use crate::poly::{LocalFrame, Poly, SymPoly};
use crate::problem::ProblemData;
use crate::quadrature::QuadratureError;

pub use basis::{
    apply_dofs, divergence, nodal_basis, normal_trace, shape_space, ElementGeometry, EDGE_DOFS,
    INTERIOR_DOFS, LOCAL_DOFS, VERTEX_DOFS,
};
pub use dofmap::DofMap;
pub use neumann::{interpolate_neumann, NeumannData, NeumannEdge, VertexMode};
pub use solve::{assemble, solve, solve_system, LocalSystem, SaddleSystem, Solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AwError {
    #[error("no Dirichlet boundary: rigid body motions are not controlled")]
    NoDirichletBoundary,
    #[error("conflicting traction data at corner vertex {vertex} {position:?} and no override")]
    ConflictingCorner { vertex: usize, position: [f64; 2] },
    #[error("degenerate element {0}: dof matrix is singular")]
    DegenerateElement(usize),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve residual {0:e} above tolerance")]
    Residual(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Geometry of triangle `t` with the global edge frames.
pub fn element_geometry(mesh: &Triangulation, t: usize) -> ElementGeometry {
    let e = mesh.triangle_edges(t);
    ElementGeometry {
        frame: LocalFrame {
            center: mesh.centroid(t),
            h: mesh.diameter(t),
        },
        vertices: mesh.triangle_points(t),
        edges: [mesh.edge_frame(e[0]), mesh.edge_frame(e[1]), mesh.edge_frame(e[2])],
    }
}

/// Local bases of all triangles, adapted to the traction constraints.
#[derive(Clone, Debug)]
pub struct AwSpace {
    pub dofs: DofMap,
    pub neumann: NeumannData,
    frames: Vec<LocalFrame>,
    bases: Vec<Vec<SymPoly>>,
    local_dofs: Vec<[usize; LOCAL_DOFS]>,
}

impl AwSpace {
    pub fn new(mesh: &Triangulation, problem: &dyn ProblemData) -> Result<Self, AwError> {
        let neumann = interpolate_neumann(mesh, problem)?;
        Self::with_neumann(mesh, neumann)
    }

    pub fn with_neumann(mesh: &Triangulation, neumann: NeumannData) -> Result<Self, AwError> {
        let dofs = DofMap::new(mesh);
        let built: Result<Vec<_>, AwError> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let geom = element_geometry(mesh, t);
                let mut basis = nodal_basis(&geom).ok_or(AwError::DegenerateElement(t))?;
                // vertex dofs in a boundary frame: φ'_d = Σ_c R_cd φ_c
                for (i, &v) in mesh.triangles()[t].iter().enumerate() {
                    if let VertexMode::Frame { .. } = neumann.modes[v] {
                        let r = neumann.modes[v].to_cartesian();
                        let old: Vec<SymPoly> = basis[3 * i..3 * i + 3].to_vec();
                        for d in 0..3 {
                            let mut phi = SymPoly::zero(3);
                            for c in 0..3 {
                                phi.axpy(r[c][d], &old[c]);
                            }
                            basis[3 * i + d] = phi;
                        }
                    }
                }
                Ok((geom.frame, basis, dofs.local_stress(mesh, t)))
            })
            .collect();
        let mut frames = Vec::with_capacity(mesh.num_triangles());
        let mut bases = Vec::with_capacity(mesh.num_triangles());
        let mut local_dofs = Vec::with_capacity(mesh.num_triangles());
        for (f, b, l) in built? {
            frames.push(f);
            bases.push(b);
            local_dofs.push(l);
        }
        Ok(Self {
            dofs,
            neumann,
            frames,
            bases,
            local_dofs,
        })
    }

    pub fn frame(&self, t: usize) -> &LocalFrame {
        &self.frames[t]
    }

    pub fn basis(&self, t: usize) -> &[SymPoly] {
        &self.bases[t]
    }

    pub fn local_dofs(&self, t: usize) -> &[usize; LOCAL_DOFS] {
        &self.local_dofs[t]
    }

    pub fn num_triangles(&self) -> usize {
        self.frames.len()
    }

    /// `σ_h` on triangle `t` in local coordinates.
    pub fn local_field(&self, t: usize, coeffs: &[f64]) -> SymPoly {
        let mut s = SymPoly::zero(3);
        for (phi, &g) in self.bases[t].iter().zip(&self.local_dofs[t]) {
            let a = coeffs[g];
            if a != 0.0 {
                s.axpy(a, phi);
            }
        }
        s
    }

    /// Interpolates a smooth stress field by its degrees of freedom.
    pub fn interpolate<F>(&self, mesh: &Triangulation, sigma: F) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> [f64; 3] + Sync,
    {
        let mut out = vec![0.0; self.dofs.num_stress()];
        let rule = crate::quadrature::EdgeRule::get(crate::quadrature::EDGE_DEGREE)
            .expect("edge rule");
        for (v, x) in mesh.vertices().iter().enumerate() {
            let s = sigma(*x);
            let vals = match self.neumann.modes[v] {
                VertexMode::Cartesian => s,
                VertexMode::Frame { nu, tau } => {
                    let m = crate::material::SymMat2::from_array(s);
                    [m.bilinear(nu, nu), m.bilinear(nu, tau), m.bilinear(tau, tau)]
                }
            };
            for c in 0..3 {
                out[self.dofs.vertex(v, c)] = vals[c];
            }
        }
        for e in 0..mesh.num_edges() {
            let f = mesh.edge_frame(e);
            for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                let sn = normal_trace(sigma(f.point(t)), f.nu);
                for c in 0..2 {
                    out[self.dofs.edge(e, c)] += w * sn[c];
                    out[self.dofs.edge(e, 2 + c)] += w * sn[c] * (2.0 * t - 1.0);
                }
            }
        }
        let rule = crate::quadrature::TriangleRule::get(crate::quadrature::TRIANGLE_DEGREE)
            .expect("triangle rule");
        for t in 0..mesh.num_triangles() {
            let p = mesh.triangle_points(t);
            for (b, &w) in rule.points.iter().zip(&rule.weights) {
                let s = sigma(crate::quadrature::barycentric_to_point(&p, b));
                for c in 0..3 {
                    out[self.dofs.interior(t, c)] += w * s[c];
                }
            }
        }
        out
    }
}

/// Displacement basis `v_m`, `m = 3c + p`, monomial `p ∈ {1, ξ, η}` in component `c`.
pub fn displacement_basis(m: usize) -> (usize, Poly) {
    let p = match m % 3 {
        0 => Poly::constant(1.0),
        1 => Poly::linear(0.0, 1.0, 0.0),
        _ => Poly::linear(0.0, 0.0, 1.0),
    };
    (m / 3, p)
}
