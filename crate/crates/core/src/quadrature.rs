//! Gauss rules on triangles and edges.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules. They are not the most economical rules for a given degree, but the
//! weights are positive and the construction works for any degree.

use std::sync::OnceLock;

use thiserror::Error;

/// Highest polynomial degree for which rules are tabulated.
pub const MAX_DEGREE: usize = 40;

/// Default degree for element integrals of products of cubic fields.
pub const TRIANGLE_DEGREE: usize = 10;
/// Default degree for edge integrals.
pub const EDGE_DEGREE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature degree {0} is not supported (max {MAX_DEGREE})")]
    UnsupportedDegree(usize),
}

/// Rule on the reference triangle, in barycentric coordinates.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    /// Weights sum to one; multiply by the physical area.
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    /// Weights sum to one; multiply by the edge length.
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_n'(z)
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn build_edge_rule(degree: usize) -> EdgeRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    EdgeRule {
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|wi| 0.5 * wi).collect(),
        degree,
    }
}

fn build_triangle_rule(degree: usize) -> TriangleRule {
    // p(u, (1-u) v) (1-u) has degree `degree + 1` in u.
    let n = (degree + 2).div_ceil(2).max(1);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (xu, wu) in x.iter().zip(&w) {
        let u = 0.5 * (xu + 1.0);
        for (xv, wv) in x.iter().zip(&w) {
            let v = 0.5 * (xv + 1.0);
            let px = u;
            let py = (1.0 - u) * v;
            points.push([1.0 - px - py, px, py]);
            // 0.25 from the interval maps, 2 normalizes the reference area 1/2
            weights.push(0.5 * wu * wv * (1.0 - u));
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

fn triangle_table() -> &'static [TriangleRule] {
    static TABLE: OnceLock<Vec<TriangleRule>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=MAX_DEGREE).map(build_triangle_rule).collect())
}

fn edge_table() -> &'static [EdgeRule] {
    static TABLE: OnceLock<Vec<EdgeRule>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=MAX_DEGREE).map(build_edge_rule).collect())
}

impl TriangleRule {
    pub fn get(degree: usize) -> Result<&'static TriangleRule, QuadratureError> {
        triangle_table()
            .get(degree)
            .ok_or(QuadratureError::UnsupportedDegree(degree))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical quadrature points of the triangle `v`.
    pub fn map_points(&self, v: &[[f64; 2]; 3]) -> Vec<[f64; 2]> {
        self.points.iter().map(|b| barycentric_to_point(v, b)).collect()
    }
}

impl EdgeRule {
    pub fn get(degree: usize) -> Result<&'static EdgeRule, QuadratureError> {
        edge_table()
            .get(degree)
            .ok_or(QuadratureError::UnsupportedDegree(degree))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn barycentric_to_point(v: &[[f64; 2]; 3], b: &[f64; 3]) -> [f64; 2] {
    [
        b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0],
        b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1],
    ]
}

pub fn triangle_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

/// `∫_T f dx`, exact for polynomials of total degree `<= degree`.
pub fn integrate_triangle<F>(v: &[[f64; 2]; 3], f: F, degree: usize) -> Result<f64, QuadratureError>
where
    F: Fn([f64; 2]) -> f64,
{
    let rule = TriangleRule::get(degree)?;
    let area = triangle_area(v).abs();
    let s: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(b, w)| w * f(barycentric_to_point(v, b)))
        .sum();
    Ok(area * s)
}

/// `∫_E f ds` on the segment `a -> b`; `f` receives the point and the arclength from `a`.
pub fn integrate_edge<F>(a: [f64; 2], b: [f64; 2], f: F, degree: usize) -> Result<f64, QuadratureError>
where
    F: Fn([f64; 2], f64) -> f64,
{
    let rule = EdgeRule::get(degree)?;
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let s: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&t, w)| {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            w * f(x, t * len)
        })
        .sum();
    Ok(len * s)
}

/// The four children of `v` under midpoint subdivision.
pub fn subdivide(v: &[[f64; 2]; 3]) -> [[[f64; 2]; 3]; 4] {
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let m01 = mid(v[0], v[1]);
    let m12 = mid(v[1], v[2]);
    let m20 = mid(v[2], v[0]);
    [
        [v[0], m01, m20],
        [m01, v[1], m12],
        [m20, m12, v[2]],
        [m01, m12, m20],
    ]
}

/// Integral of a possibly non-smooth integrand with one level of subdivision.
///
/// The plain rule is compared with the rule applied on the four midpoint
/// children; if they differ by more than `rel_tol` the subdivided value is
/// returned.
pub fn integrate_triangle_safeguarded<F>(
    v: &[[f64; 2]; 3],
    f: F,
    degree: usize,
    rel_tol: f64,
) -> Result<f64, QuadratureError>
where
    F: Fn([f64; 2]) -> f64,
{
    let coarse = integrate_triangle(v, &f, degree)?;
    let mut fine = 0.0;
    for child in subdivide(v) {
        fine += integrate_triangle(&child, &f, degree)?;
    }
    if (fine - coarse).abs() > rel_tol * fine.abs().max(f64::MIN_POSITIVE) {
        Ok(fine)
    } else {
        Ok(coarse)
    }
}
