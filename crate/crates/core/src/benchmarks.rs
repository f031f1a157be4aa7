//! The four test problems: a smooth academic example, a rigid circular
//! inclusion, an L-shaped domain with a corner singularity and Cook's membrane.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::awfem::Solution;
use crate::jet::Jet;
use crate::material::{LameParameters, SymMat2};
use crate::mesh::{BoundaryLabel, CircleArc, MeshError, Refined, Triangulation};
use crate::problem::{ProblemData, VectorJet};
use crate::quadrature::{integrate_triangle_safeguarded, QuadratureError, TRIANGLE_DEGREE};

/// Young's modulus used in all examples.
pub const YOUNG: f64 = 1e5;
/// Radius of the inclusion.
pub const INCLUSION_RADIUS: f64 = 0.25;
/// Exponent of the L-shape singularity.
pub const LSHAPE_ALPHA: f64 = 0.544483736782;
/// Half the interior angle at the re-entrant corner.
pub const LSHAPE_OMEGA: f64 = 3.0 * PI / 4.0;
/// Stress prescribed at corner B(48, 44) of Cook's membrane.
pub const COOK_SIGMA_B: SymMat2 = SymMat2::new(0.2491, 0.7283, 0.6676);
/// Stress prescribed at corner C(48, 60) of Cook's membrane.
pub const COOK_SIGMA_C: SymMat2 = SymMat2::new(3.0 / 20.0, 11.0 / 20.0, 11.0 / 60.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchmarkName {
    Academic,
    Inclusion,
    LShape,
    Cook,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 4] = [
        BenchmarkName::Academic,
        BenchmarkName::Inclusion,
        BenchmarkName::LShape,
        BenchmarkName::Cook,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkName::Academic => "academic",
            BenchmarkName::Inclusion => "inclusion",
            BenchmarkName::LShape => "lshape",
            BenchmarkName::Cook => "cook",
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownBenchmark(pub String);

impl fmt::Display for UnknownBenchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown benchmark `{}` (expected academic | inclusion | lshape | cook)", self.0)
    }
}

impl std::error::Error for UnknownBenchmark {}

impl FromStr for BenchmarkName {
    type Err = UnknownBenchmark;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchmarkName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| UnknownBenchmark(s.to_string()))
    }
}

/// Displacement jets, strain, stress and divergence from a displacement `u`.
fn vector_jet(u: [Jet; 2]) -> VectorJet {
    VectorJet {
        value: [u[0].v, u[1].v],
        grad: [u[0].d, u[1].d],
        hess: [u[0].h, u[1].h],
    }
}

/// `ε(u)` from the gradient.
pub fn strain(u: &VectorJet) -> SymMat2 {
    SymMat2::new(
        u.grad[0][0],
        0.5 * (u.grad[0][1] + u.grad[1][0]),
        u.grad[1][1],
    )
}

/// `div C ε(u) = μ Δu + (λ + μ) ∇ div u`.
pub fn div_stress(params: &LameParameters, u: &VectorJet) -> [f64; 2] {
    let (l, m) = (params.lambda, params.mu);
    let lap = |i: usize| u.hess[i][0][0] + u.hess[i][1][1];
    // ∂_i div u = ∂_i∂_0 u_0 + ∂_i∂_1 u_1
    let grad_div = |i: usize| u.hess[0][i][0] + u.hess[1][i][1];
    [
        m * lap(0) + (l + m) * grad_div(0),
        m * lap(1) + (l + m) * grad_div(1),
    ]
}

#[derive(Clone, Debug)]
enum Kind {
    Academic,
    Inclusion { kappa: f64, gamma: f64, a: f64 },
    LShape { alpha: f64, c1: f64, c2: f64 },
    Cook,
}

/// A test problem with its initial mesh and data.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: BenchmarkName,
    pub params: LameParameters,
    /// Initial triangulation, refined once uniformly.
    pub mesh: Triangulation,
    /// Curved Dirichlet boundary onto which new vertices are projected.
    pub curve: Option<CircleArc>,
    overrides: Vec<([f64; 2], SymMat2)>,
    kind: Kind,
}

/// Segment ids of the inclusion boundary.
pub mod inclusion_segments {
    pub const ARC: u32 = 0;
    pub const BOTTOM: u32 = 1;
    pub const RIGHT: u32 = 2;
    pub const TOP: u32 = 3;
    pub const LEFT: u32 = 4;
}

/// Segment ids of Cook's membrane.
pub mod cook_segments {
    pub const DA: u32 = 0;
    pub const AB: u32 = 1;
    pub const BC: u32 = 2;
    pub const CD: u32 = 3;
}

impl Benchmark {
    pub fn new(name: BenchmarkName, params: LameParameters) -> Self {
        match name {
            BenchmarkName::Academic => Self::academic(params),
            BenchmarkName::Inclusion => Self::circular_inclusion(params),
            BenchmarkName::LShape => Self::lshape(params),
            BenchmarkName::Cook => Self::cook(params),
        }
    }

    /// Unit square, clamped, smooth divergence-free solution.
    pub fn academic(params: LameParameters) -> Self {
        let d = BoundaryLabel::dirichlet(0);
        let mesh = Triangulation::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            &[(0, 1, d), (1, 2, d), (2, 3, d), (3, 0, d)],
        )
        .expect("valid square mesh");
        Self {
            name: BenchmarkName::Academic,
            params,
            mesh: mesh.refine_uniform(),
            curve: None,
            overrides: Vec::new(),
            kind: Kind::Academic,
        }
    }

    /// Square `(0,1)²` minus the quarter disk `r < 1/4`.
    ///
    /// Arc, bottom and left are clamped with the exact displacement (zero on
    /// the arc); right and top carry the exact traction.
    pub fn circular_inclusion(params: LameParameters) -> Self {
        use inclusion_segments::*;
        let a = INCLUSION_RADIUS;
        let (_, nu) = params.young_poisson();
        let layers = [0.0, 0.2, 0.5, 1.0];
        let rays = 5;
        let mut vertices = Vec::new();
        for j in 0..rays {
            let phi = j as f64 * PI / 8.0;
            let inner = [a * phi.cos(), a * phi.sin()];
            let outer = if j <= 2 {
                [1.0, phi.tan().min(1.0)]
            } else {
                [(PI / 2.0 - phi).tan(), 1.0]
            };
            for &t in &layers {
                vertices.push([
                    inner[0] + t * (outer[0] - inner[0]),
                    inner[1] + t * (outer[1] - inner[1]),
                ]);
            }
        }
        let nl = layers.len();
        let id = |j: usize, k: usize| j * nl + k;
        let mut triangles = Vec::new();
        for j in 0..rays - 1 {
            for k in 0..nl - 1 {
                triangles.push([id(j, k), id(j, k + 1), id(j + 1, k + 1)]);
                triangles.push([id(j, k), id(j + 1, k + 1), id(j + 1, k)]);
            }
        }
        let mut boundary = Vec::new();
        for j in 0..rays - 1 {
            boundary.push((id(j + 1, 0), id(j, 0), BoundaryLabel::dirichlet(ARC)));
            let label = if j < 2 {
                BoundaryLabel::neumann(RIGHT)
            } else {
                BoundaryLabel::neumann(TOP)
            };
            boundary.push((id(j, nl - 1), id(j + 1, nl - 1), label));
        }
        for k in 0..nl - 1 {
            boundary.push((id(0, k), id(0, k + 1), BoundaryLabel::dirichlet(BOTTOM)));
            boundary.push((id(rays - 1, k + 1), id(rays - 1, k), BoundaryLabel::dirichlet(LEFT)));
        }
        let mesh = Triangulation::build(vertices, triangles, &boundary).expect("valid inclusion mesh");
        let curve = CircleArc {
            center: [0.0, 0.0],
            radius: a,
            segment: ARC,
        };
        let mesh = mesh
            .refine_uniform()
            .project_boundary(&curve)
            .expect("projection of the first refinement");
        Self {
            name: BenchmarkName::Inclusion,
            params,
            mesh,
            curve: Some(curve),
            overrides: Vec::new(),
            kind: Kind::Inclusion {
                kappa: 3.0 - 4.0 * nu,
                gamma: 2.0 * nu - 1.0,
                a,
            },
        }
    }

    /// Rotated L-shape with traction-free edges at the re-entrant corner.
    pub fn lshape(params: LameParameters) -> Self {
        let (alpha, omega) = (LSHAPE_ALPHA, LSHAPE_OMEGA);
        let c1 = -((alpha + 1.0) * omega).cos() / ((alpha - 1.0) * omega).cos();
        let c2 = 2.0 * (params.lambda + 2.0 * params.mu) / (params.lambda + params.mu);
        let vertices = vec![
            [0.0, 0.0],
            [-1.0, -1.0],
            [0.0, -2.0],
            [2.0, 0.0],
            [0.0, 2.0],
            [-1.0, 1.0],
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]];
        let n = BoundaryLabel::neumann(0);
        let d = BoundaryLabel::dirichlet(1);
        let boundary = [(0, 1, n), (1, 2, d), (2, 3, d), (3, 4, d), (4, 5, d), (5, 0, n)];
        let mesh = Triangulation::build(vertices, triangles, &boundary).expect("valid L-shape mesh");
        Self {
            name: BenchmarkName::LShape,
            params,
            mesh: mesh.refine_uniform(),
            curve: None,
            overrides: Vec::new(),
            kind: Kind::LShape { alpha, c1, c2 },
        }
    }

    /// Tapered panel A(0,0), B(48,44), C(48,60), D(0,44), clamped on DA.
    pub fn cook(params: LameParameters) -> Self {
        use cook_segments::*;
        let vertices = vec![[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]];
        let triangles = vec![[0, 1, 2], [0, 2, 3]];
        let boundary = [
            (3, 0, BoundaryLabel::dirichlet(DA)),
            (0, 1, BoundaryLabel::neumann(AB)),
            (1, 2, BoundaryLabel::neumann(BC)),
            (2, 3, BoundaryLabel::neumann(CD)),
        ];
        let mesh = Triangulation::build(vertices, triangles, &boundary).expect("valid Cook mesh");
        Self {
            name: BenchmarkName::Cook,
            params,
            mesh: mesh.refine_uniform(),
            curve: None,
            overrides: vec![([48.0, 44.0], COOK_SIGMA_B), ([48.0, 60.0], COOK_SIGMA_C)],
            kind: Kind::Cook,
        }
    }

    pub fn has_exact_solution(&self) -> bool {
        !matches!(self.kind, Kind::Cook)
    }

    /// Exact displacement with derivatives.
    pub fn exact_displacement(&self, p: [f64; 2]) -> Option<VectorJet> {
        let (x, y) = Jet::variables(p);
        let mu = self.params.mu;
        let u = match self.kind {
            Kind::Academic => {
                let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
                let (cx, cy) = ((PI * x).cos(), (PI * y).cos());
                let common = PI * (sx * sy);
                [common * (cy * sx), -1.0 * (common * (cx * sy))]
            }
            Kind::Inclusion { kappa, gamma, a } => {
                let r = (x * x + y * y).sqrt();
                let phi = Jet::atan2(y, x);
                let (a2, a4) = (a * a, a.powi(4));
                let r2 = r * r;
                let pre = (8.0 * mu * r).recip();
                let ur = pre
                    * ((kappa - 1.0) * r2
                        + 2.0 * gamma * a2
                        + (2.0 * r2 - 2.0 * (kappa + 1.0) * a2 / kappa + (2.0 * a4 / kappa) * r2.recip())
                            * (2.0 * phi).cos());
                let uphi = -1.0
                    * pre
                    * ((2.0 * r2 - 2.0 * (kappa - 1.0) * a2 / kappa - (2.0 * a4 / kappa) * r2.recip())
                        * (2.0 * phi).sin());
                polar_to_cartesian(ur, uphi, phi)
            }
            Kind::LShape { alpha, c1, c2 } => {
                let r = (x * x + y * y).sqrt();
                let phi = Jet::atan2(y, x);
                let pre = (1.0 / (2.0 * mu)) * r.powf(alpha);
                let ur = pre
                    * (-(alpha + 1.0) * ((alpha + 1.0) * phi).cos()
                        + ((c2 - alpha - 1.0) * c1) * ((alpha - 1.0) * phi).cos());
                let uphi = pre
                    * ((alpha + 1.0) * ((alpha + 1.0) * phi).sin()
                        + ((c2 + alpha - 1.0) * c1) * ((alpha - 1.0) * phi).sin());
                polar_to_cartesian(ur, uphi, phi)
            }
            Kind::Cook => return None,
        };
        Some(vector_jet(u))
    }

    /// Exact stress `C ε(u)`.
    pub fn exact_stress(&self, p: [f64; 2]) -> Option<SymMat2> {
        self.exact_displacement(p)
            .map(|u| self.params.apply_c(strain(&u)))
    }

    /// Computes the exact `div σ` by differentiation of the exact displacement.
    pub fn exact_div_stress(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        self.exact_displacement(p).map(|u| div_stress(&self.params, &u))
    }

    /// L-shape constants `(C₁, C₂)`.
    pub fn lshape_constants(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::LShape { c1, c2, .. } => Some((c1, c2)),
            _ => None,
        }
    }

    /// Inclusion constants `(κ, γ)`.
    pub fn inclusion_constants(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Inclusion { kappa, gamma, .. } => Some((kappa, gamma)),
            _ => None,
        }
    }

    /// Refines the marked triangles and projects new vertices onto the curve.
    pub fn refine(&self, mesh: &Triangulation, marked: &[usize]) -> Result<Refined, MeshError> {
        self.project(mesh.refine_with_parents(marked))
    }

    pub fn refine_uniform(&self, mesh: &Triangulation) -> Result<Refined, MeshError> {
        self.project(mesh.refine_uniform_with_parents())
    }

    fn project(&self, r: Refined) -> Result<Refined, MeshError> {
        match &self.curve {
            Some(c) => Ok(Refined {
                mesh: r.mesh.project_boundary(c)?,
                parent: r.parent,
            }),
            None => Ok(r),
        }
    }
}

fn polar_to_cartesian(ur: Jet, uphi: Jet, phi: Jet) -> [Jet; 2] {
    let (c, s) = (phi.cos(), phi.sin());
    [ur * c - uphi * s, ur * s + uphi * c]
}

impl ProblemData for Benchmark {
    fn body_force(&self, p: [f64; 2]) -> [f64; 2] {
        match self.kind {
            Kind::Academic => {
                let f1 = |x: f64, y: f64| {
                    -2.0 * self.params.mu
                        * PI.powi(3)
                        * (PI * y).cos()
                        * (PI * y).sin()
                        * (2.0 * (2.0 * PI * x).cos() - 1.0)
                };
                [f1(p[0], p[1]), -f1(p[1], p[0])]
            }
            _ => [0.0, 0.0],
        }
    }

    fn traction(&self, x: [f64; 2], segment: u32) -> [f64; 2] {
        match self.kind {
            Kind::Cook => {
                if segment == cook_segments::BC {
                    [0.0, 1.0]
                } else {
                    [0.0, 0.0]
                }
            }
            Kind::LShape { .. } => [0.0, 0.0],
            Kind::Inclusion { .. } => {
                let nu = if segment == inclusion_segments::RIGHT {
                    [1.0, 0.0]
                } else {
                    [0.0, 1.0]
                };
                self.exact_stress(x).map(|s| s.mul_vec(nu)).unwrap_or([0.0; 2])
            }
            Kind::Academic => [0.0, 0.0],
        }
    }

    fn dirichlet(&self, x: [f64; 2], segment: u32) -> VectorJet {
        match self.kind {
            Kind::Cook => VectorJet::zero(),
            // the displacement vanishes on the true circle
            Kind::Inclusion { .. } if segment == inclusion_segments::ARC => VectorJet::zero(),
            _ => self.exact_displacement(x).unwrap_or_default(),
        }
    }

    fn corner_overrides(&self) -> Vec<([f64; 2], SymMat2)> {
        self.overrides.clone()
    }
}

/// `‖σ − σ_h‖_{L²}` with one level of subdivision where the rule is unresolved.
pub fn stress_error<F>(mesh: &Triangulation, sol: &Solution, exact: F, degree: usize) -> Result<f64, QuadratureError>
where
    F: Fn([f64; 2]) -> SymMat2 + Sync,
{
    let parts: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let pts = mesh.triangle_points(t);
            integrate_triangle_safeguarded(
                &pts,
                |x| (exact(x) - sol.stress_at(t, x)).norm_sq(),
                degree,
                1e-8,
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `‖σ‖_{L²}` of a field.
pub fn stress_norm<F>(mesh: &Triangulation, exact: F) -> Result<f64, QuadratureError>
where
    F: Fn([f64; 2]) -> SymMat2 + Sync,
{
    let parts: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            integrate_triangle_safeguarded(&mesh.triangle_points(t), |x| exact(x).norm_sq(), TRIANGLE_DEGREE, 1e-8)
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}
