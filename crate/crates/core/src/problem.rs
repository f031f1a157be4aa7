//! Data of a boundary value problem as seen by the solver and the estimator.

use crate::material::SymMat2;

/// Value, gradient and Hessian of a vector field at a point.
///
/// `grad[i][j] = ∂_j u_i` and `hess[i][j][k] = ∂_j ∂_k u_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VectorJet {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub hess: [[[f64; 2]; 2]; 2],
}

impl VectorJet {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Derivative along the direction `d`.
    pub fn directional(&self, d: [f64; 2]) -> [f64; 2] {
        [
            self.grad[0][0] * d[0] + self.grad[0][1] * d[1],
            self.grad[1][0] * d[0] + self.grad[1][1] * d[1],
        ]
    }

    /// Second derivative along the direction `d`.
    pub fn second_directional(&self, d: [f64; 2]) -> [f64; 2] {
        let q = |h: &[[f64; 2]; 2]| {
            h[0][0] * d[0] * d[0] + 2.0 * h[0][1] * d[0] * d[1] + h[1][1] * d[1] * d[1]
        };
        [q(&self.hess[0]), q(&self.hess[1])]
    }
}

/// Volume force, traction and Dirichlet data of a problem.
///
/// Boundary data receive the segment id of the edge label so that data may
/// jump between segments meeting at a corner.
pub trait ProblemData: Sync {
    /// `f` in `−div σ = f`.
    fn body_force(&self, x: [f64; 2]) -> [f64; 2];

    /// `g = σν` on the Neumann segment `segment`.
    fn traction(&self, x: [f64; 2], segment: u32) -> [f64; 2];

    /// `u_D` on the Dirichlet segment `segment`, with its first and second derivatives.
    fn dirichlet(&self, x: [f64; 2], segment: u32) -> VectorJet;

    /// Stress values imposed at Neumann corners, keyed by vertex position.
    fn corner_overrides(&self) -> Vec<([f64; 2], SymMat2)> {
        Vec::new()
    }
}
