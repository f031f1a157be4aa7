//! Local Arnold-Winther shape functions of lowest order.
//!
//! The shape space is `{τ ∈ P3(T; S) : div τ ∈ P1(T; R²)}`, which is all of
//! `P2(T; S)` plus six cubic fields. The nodal basis is obtained by inverting
//! the matrix of degrees of freedom applied to that spanning set.

use nalgebra::DMatrix;

use crate::mesh::EdgeFrame;
use crate::poly::{index, LocalFrame, Poly, SymPoly};
use crate::quadrature::{EdgeRule, TriangleRule};

pub const LOCAL_DOFS: usize = 24;
/// Local dofs `0..9`: vertex `i`, component `c` at `3i + c` (`xx`, `xy`, `yy`).
pub const VERTEX_DOFS: usize = 9;
/// Local dofs `9..21`: edge `k` at `9 + 4k + j`, `j = 2·moment + component`.
pub const EDGE_DOFS: usize = 12;
/// Local dofs `21..24`: averages of the three components.
pub const INTERIOR_DOFS: usize = 3;

/// Geometry of a triangle as needed by the degrees of freedom.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub frame: LocalFrame,
    pub vertices: [[f64; 2]; 3],
    /// Global frames of the edges; edge `k` is opposite vertex `k`.
    pub edges: [EdgeFrame; 3],
}

/// A spanning set of the shape space in local coordinates.
pub fn shape_space() -> Vec<SymPoly> {
    let mut out = Vec::with_capacity(LOCAL_DOFS);
    for comp in 0..3 {
        for n in 0..=2 {
            for j in 0..=n {
                let mut s = SymPoly::zero(3);
                let p = Poly::monomial(n - j, j).with_degree(3);
                match comp {
                    0 => s.xx = p,
                    1 => s.xy = p,
                    _ => s.yy = p,
                }
                out.push(s);
            }
        }
    }
    // Cubic parts a (xx), b (xy), c (yy) with coefficients of x³, x²y, xy², y³.
    // div τ ∈ P1 forces b1 = −3a0, a1 = −b2, a2 = −3b3, c1 = −3b0, c2 = 3a0, c3 = −b2/3.
    let cubic = |a: [f64; 4], b: [f64; 4], c: [f64; 4]| {
        let build = |k: [f64; 4]| {
            let mut coeffs = vec![0.0; 10];
            coeffs[index(3, 0)] = k[0];
            coeffs[index(2, 1)] = k[1];
            coeffs[index(1, 2)] = k[2];
            coeffs[index(0, 3)] = k[3];
            Poly::from_coeffs(3, coeffs)
        };
        SymPoly {
            xx: build(a),
            xy: build(b),
            yy: build(c),
        }
    };
    // free a0
    out.push(cubic([1.0, 0.0, 0.0, 0.0], [0.0, -3.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0]));
    // free a3
    out.push(cubic([0.0, 0.0, 0.0, 1.0], [0.0; 4], [0.0; 4]));
    // free b0
    out.push(cubic([0.0; 4], [1.0, 0.0, 0.0, 0.0], [0.0, -3.0, 0.0, 0.0]));
    // free b2
    out.push(cubic([0.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0 / 3.0]));
    // free b3
    out.push(cubic([0.0, 0.0, -3.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0; 4]));
    // free c0
    out.push(cubic([0.0; 4], [0.0; 4], [1.0, 0.0, 0.0, 0.0]));
    out
}

/// Physical divergence `(∂₁τ₁₁ + ∂₂τ₁₂, ∂₁τ₁₂ + ∂₂τ₂₂)` of a local field.
pub fn divergence(frame: &LocalFrame, s: &SymPoly) -> [Poly; 2] {
    let d0 = &frame.dx(&s.xx) + &frame.dy(&s.xy);
    let d1 = &frame.dx(&s.xy) + &frame.dy(&s.yy);
    [d0, d1]
}

/// `τν` for symmetric `τ = (xx, xy, yy)`.
#[inline]
pub fn normal_trace(s: [f64; 3], nu: [f64; 2]) -> [f64; 2] {
    [s[0] * nu[0] + s[1] * nu[1], s[1] * nu[0] + s[2] * nu[1]]
}

/// The 24 degrees of freedom of a local field.
pub fn apply_dofs(geom: &ElementGeometry, s: &SymPoly) -> [f64; LOCAL_DOFS] {
    let mut out = [0.0; LOCAL_DOFS];
    for (i, v) in geom.vertices.iter().enumerate() {
        let val = s.eval_local(geom.frame.to_local(*v));
        out[3 * i..3 * i + 3].copy_from_slice(&val);
    }
    let rule = EdgeRule::get(5).expect("edge rule of degree 5");
    for (k, e) in geom.edges.iter().enumerate() {
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let val = s.eval_local(geom.frame.to_local(e.point(t)));
            let sn = normal_trace(val, e.nu);
            let base = VERTEX_DOFS + 4 * k;
            for c in 0..2 {
                out[base + c] += w * sn[c];
                out[base + 2 + c] += w * sn[c] * (2.0 * t - 1.0);
            }
        }
    }
    let rule = TriangleRule::get(3).expect("triangle rule of degree 3");
    for (b, &w) in rule.points.iter().zip(&rule.weights) {
        let x = crate::quadrature::barycentric_to_point(&geom.vertices, b);
        let val = s.eval_local(geom.frame.to_local(x));
        for c in 0..3 {
            out[VERTEX_DOFS + EDGE_DOFS + c] += w * val[c];
        }
    }
    out
}

/// Nodal basis dual to [`apply_dofs`]; `None` if the dof matrix is singular.
pub fn nodal_basis(geom: &ElementGeometry) -> Option<Vec<SymPoly>> {
    let span = shape_space();
    let mut d = DMatrix::<f64>::zeros(LOCAL_DOFS, LOCAL_DOFS);
    for (j, s) in span.iter().enumerate() {
        let col = apply_dofs(geom, s);
        for i in 0..LOCAL_DOFS {
            d[(i, j)] = col[i];
        }
    }
    let inv = d.try_inverse()?;
    if inv.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut basis = Vec::with_capacity(LOCAL_DOFS);
    for j in 0..LOCAL_DOFS {
        let mut phi = SymPoly::zero(3);
        for (k, s) in span.iter().enumerate() {
            let a = inv[(k, j)];
            if a != 0.0 {
                phi.axpy(a, s);
            }
        }
        basis.push(phi);
    }
    Some(basis)
}
