//! Assembly and solution of the discrete saddle point problem.
//!
//! Find `σ_h` (with the prescribed traction dofs) and `u_h` such that
//!
//! ```text
//! (C⁻¹σ_h, τ) + (u_h, div τ) = ∫_{Γ_D} u_D · τν ds   for all τ with τν = 0 on Γ_N
//! (div σ_h, v)               = −(f, v)               for all v ∈ P1(T; R²)
//! ```
//!
//! The first block row is multiplied by `2μ` and `u_h` is divided by it, which
//! keeps the system symmetric and both blocks of comparable size.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use rayon::prelude::*;

use crate::material::{LameParameters, SymMat2};
use crate::mesh::Triangulation;
use crate::poly::{LocalFrame, SymPoly};
use crate::problem::ProblemData;
use crate::quadrature::{barycentric_to_point, EdgeRule, TriangleRule, EDGE_DEGREE, TRIANGLE_DEGREE};

use super::basis::{divergence, normal_trace, LOCAL_DOFS};
use super::{displacement_basis, AwError, AwSpace};

/// Element contributions before elimination of the traction dofs.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    /// `a[i][j] = ∫ C⁻¹φ_j : φ_i`.
    pub a: [[f64; LOCAL_DOFS]; LOCAL_DOFS],
    /// `b[m][j] = ∫ v_m · div φ_j`.
    pub b: [[f64; LOCAL_DOFS]; 6],
    /// `∫_{Γ_D ∩ ∂T} u_D · φ_i ν ds`.
    pub r1: [f64; LOCAL_DOFS],
    /// `−∫ f · v_m`.
    pub r2: [f64; 6],
}

pub fn local_system(
    mesh: &Triangulation,
    space: &AwSpace,
    t: usize,
    params: &LameParameters,
    problem: &dyn ProblemData,
) -> Result<LocalSystem, AwError> {
    let frame = space.frame(t);
    let basis = space.basis(t);
    let pts = mesh.triangle_points(t);
    let area = mesh.area(t);
    let [ca, cb] = params.cinv_coefficients();

    let mut a = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
    let rule = TriangleRule::get(6)?;
    let mut vals = [[0.0; 3]; LOCAL_DOFS];
    for (bary, &w) in rule.points.iter().zip(&rule.weights) {
        let xi = frame.to_local(barycentric_to_point(&pts, bary));
        for (v, phi) in vals.iter_mut().zip(basis) {
            *v = phi.eval_local(xi);
        }
        let wa = w * area;
        for i in 0..LOCAL_DOFS {
            let si = vals[i];
            let tri = si[0] + si[2];
            for j in i..LOCAL_DOFS {
                let sj = vals[j];
                let colon = si[0] * sj[0] + 2.0 * si[1] * sj[1] + si[2] * sj[2];
                a[i][j] += wa * (ca * colon + cb * tri * (sj[0] + sj[2]));
            }
        }
    }
    for i in 0..LOCAL_DOFS {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }

    let mut b = [[0.0; LOCAL_DOFS]; 6];
    let divs: Vec<_> = basis.iter().map(|phi| divergence(frame, phi)).collect();
    let rule = TriangleRule::get(4)?;
    for (bary, &w) in rule.points.iter().zip(&rule.weights) {
        let xi = frame.to_local(barycentric_to_point(&pts, bary));
        for m in 0..6 {
            let (c, p) = displacement_basis(m);
            let vm = p.eval(xi[0], xi[1]);
            for j in 0..LOCAL_DOFS {
                b[m][j] += w * area * vm * divs[j][c].eval(xi[0], xi[1]);
            }
        }
    }

    let mut r2 = [0.0; 6];
    let rule = TriangleRule::get(TRIANGLE_DEGREE)?;
    for (bary, &w) in rule.points.iter().zip(&rule.weights) {
        let x = barycentric_to_point(&pts, bary);
        let xi = frame.to_local(x);
        let f = problem.body_force(x);
        for (m, r) in r2.iter_mut().enumerate() {
            let (c, p) = displacement_basis(m);
            *r -= w * area * f[c] * p.eval(xi[0], xi[1]);
        }
    }

    let mut r1 = [0.0; LOCAL_DOFS];
    let erule = EdgeRule::get(EDGE_DEGREE)?;
    for e in mesh.triangle_edges(t) {
        let edge = mesh.edge(e);
        let Some(label) = edge.label else { continue };
        if !label.is_dirichlet() {
            continue;
        }
        let ef = mesh.edge_frame(e);
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = ef.point(s);
            let xi = frame.to_local(x);
            let ud = problem.dirichlet(x, label.segment).value;
            for (r, phi) in r1.iter_mut().zip(basis) {
                let sn = normal_trace(phi.eval_local(xi), ef.nu);
                *r += w * ef.h * (ud[0] * sn[0] + ud[1] * sn[1]);
            }
        }
    }

    Ok(LocalSystem { a, b, r1, r2 })
}

/// The reduced symmetric indefinite system in the free stress and displacement dofs.
pub struct SaddleSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// Free stress dofs in the order of the unknown vector.
    pub free: Vec<usize>,
    /// Stress coefficients with the prescribed values filled in.
    pub prescribed: Vec<f64>,
    /// `2μ`, the factor applied to the first block row.
    pub scale: f64,
}

impl SaddleSystem {
    pub fn num_unknowns(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_free_stress(&self) -> usize {
        self.free.len()
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.matrix.as_ref();
        let (sym, val) = m.parts();
        let col_ptr = sym.col_ptr();
        let row_idx = sym.row_idx();
        let mut y = vec![0.0; x.len()];
        for j in 0..x.len() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for k in col_ptr[j]..col_ptr[j + 1] {
                y[row_idx[k]] += val[k] * xj;
            }
        }
        y
    }

    /// Entry `(i, j)` of the matrix, zero if not stored.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let m = self.matrix.as_ref();
        let (sym, val) = m.parts();
        let col_ptr = sym.col_ptr();
        let rows = &sym.row_idx()[col_ptr[j]..col_ptr[j + 1]];
        match rows.binary_search(&i) {
            Ok(k) => val[col_ptr[j] + k],
            Err(_) => 0.0,
        }
    }
}

pub fn assemble(
    mesh: &Triangulation,
    space: &AwSpace,
    params: &LameParameters,
    problem: &dyn ProblemData,
) -> Result<SaddleSystem, AwError> {
    if !mesh.has_dirichlet() {
        return Err(AwError::NoDirichletBoundary);
    }
    let dofs = &space.dofs;
    let ns = dofs.num_stress();
    let mut free_index = vec![usize::MAX; ns];
    let mut free = Vec::new();
    let mut prescribed = vec![0.0; ns];
    for (g, f) in space.neumann.fixed.iter().enumerate() {
        match f {
            Some(v) => prescribed[g] = *v,
            None => {
                free_index[g] = free.len();
                free.push(g);
            }
        }
    }
    let nf = free.len();
    let n = nf + dofs.num_displacement();
    let scale = 2.0 * params.mu;

    let locals: Vec<LocalSystem> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| local_system(mesh, space, t, params, problem))
        .collect::<Result<_, _>>()?;

    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * (LOCAL_DOFS * LOCAL_DOFS + 12 * LOCAL_DOFS));
    for (t, loc) in locals.iter().enumerate() {
        let ids = space.local_dofs(t);
        for i in 0..LOCAL_DOFS {
            let fi = free_index[ids[i]];
            if fi == usize::MAX {
                continue;
            }
            rhs[fi] += scale * loc.r1[i];
            for j in 0..LOCAL_DOFS {
                let fj = free_index[ids[j]];
                let v = scale * loc.a[i][j];
                if fj == usize::MAX {
                    rhs[fi] -= v * prescribed[ids[j]];
                } else if v != 0.0 {
                    triplets.push(Triplet::new(fi, fj, v));
                }
            }
        }
        for m in 0..6 {
            let row = nf + dofs.displacement(t, m);
            rhs[row] += loc.r2[m];
            for j in 0..LOCAL_DOFS {
                let v = loc.b[m][j];
                let fj = free_index[ids[j]];
                if fj == usize::MAX {
                    rhs[row] -= v * prescribed[ids[j]];
                } else if v != 0.0 {
                    triplets.push(Triplet::new(row, fj, v));
                    triplets.push(Triplet::new(fj, row, v));
                }
            }
        }
    }
    let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| AwError::Factorization(format!("{e:?}")))?;
    Ok(SaddleSystem {
        matrix,
        rhs,
        free,
        prescribed,
        scale,
    })
}

/// Discrete stress and displacement.
#[derive(Clone, Debug)]
pub struct Solution {
    /// Global stress coefficients (vertex dofs in the frame of their [`super::VertexMode`]).
    pub stress: Vec<f64>,
    /// `u_h` coefficients, 6 per triangle (see [`displacement_basis`]).
    pub displacement: Vec<f64>,
    /// `σ_h` per triangle in local coordinates.
    pub sigma: Vec<SymPoly>,
    pub frames: Vec<LocalFrame>,
    /// Stress plus displacement dofs, including the prescribed ones.
    pub ndof: usize,
    /// Relative algebraic residual of the reduced system.
    pub residual: f64,
}

impl Solution {
    pub fn stress_at(&self, t: usize, x: [f64; 2]) -> SymMat2 {
        SymMat2::from_array(self.sigma[t].eval_local(self.frames[t].to_local(x)))
    }

    pub fn displacement_at(&self, t: usize, x: [f64; 2]) -> [f64; 2] {
        let xi = self.frames[t].to_local(x);
        let mut u = [0.0; 2];
        for m in 0..6 {
            let (c, p) = displacement_basis(m);
            u[c] += self.displacement[6 * t + m] * p.eval(xi[0], xi[1]);
        }
        u
    }

    /// Physical divergence of `σ_h` on triangle `t`.
    pub fn divergence(&self, t: usize) -> [crate::poly::Poly; 2] {
        divergence(&self.frames[t], &self.sigma[t])
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the reduced system by sparse LU with iterative refinement.
pub fn solve_system(space: &AwSpace, system: &SaddleSystem) -> Result<Solution, AwError> {
    const TOL: f64 = 1e-10;
    let n = system.num_unknowns();
    let bnorm = norm(&system.rhs);
    let mut x = vec![0.0; n];
    let mut residual = 0.0;
    if bnorm > 0.0 {
        faer::set_global_parallelism(Par::Seq);
        let lu = system
            .matrix
            .sp_lu()
            .map_err(|e| AwError::Factorization(format!("{e:?}")))?;
        let mut r = system.rhs.clone();
        for _ in 0..4 {
            let rhs = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
            let dx = lu.solve(&rhs);
            for i in 0..n {
                x[i] += dx[(i, 0)];
            }
            let mx = system.apply(&x);
            for i in 0..n {
                r[i] = system.rhs[i] - mx[i];
            }
            residual = norm(&r) / bnorm;
            if !residual.is_finite() {
                return Err(AwError::Factorization("non-finite solution".into()));
            }
            if residual <= 1e-3 * TOL {
                break;
            }
        }
        if residual > TOL {
            return Err(AwError::Residual(residual));
        }
    }

    let mut stress = system.prescribed.clone();
    for (k, &g) in system.free.iter().enumerate() {
        stress[g] = x[k];
    }
    let nf = system.num_free_stress();
    let displacement: Vec<f64> = x[nf..].iter().map(|u| u / system.scale).collect();
    let sigma = (0..space.num_triangles())
        .into_par_iter()
        .map(|t| space.local_field(t, &stress))
        .collect();
    let frames = (0..space.num_triangles()).map(|t| *space.frame(t)).collect();
    Ok(Solution {
        stress,
        displacement,
        sigma,
        frames,
        ndof: space.dofs.num_total(),
        residual,
    })
}

/// Builds the space, assembles and solves.
pub fn solve(
    mesh: &Triangulation,
    params: &LameParameters,
    problem: &dyn ProblemData,
) -> Result<(AwSpace, Solution), AwError> {
    if !mesh.has_dirichlet() {
        return Err(AwError::NoDirichletBoundary);
    }
    let space = AwSpace::new(mesh, problem)?;
    let system = assemble(mesh, &space, params, problem)?;
    let sol = solve_system(&space, &system)?;
    Ok((space, sol))
}
