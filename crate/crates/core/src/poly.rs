//! Dense bivariate polynomials.
//!
//! Element fields (stress, strain, test functions) are stored as polynomials in
//! scaled local coordinates `ξ = (x - center) / h`. The scaling keeps the
//! coefficients of order one regardless of the element size.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Number of monomials of total degree at most `degree`.
pub const fn dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Position of `x^i y^j` in the coefficient vector (graded ordering).
#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

/// Polynomial `Σ c_ij x^i y^j` with `i + j <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; dim(degree)],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// `c0 + cx x + cy y`.
    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        Self {
            degree: 1,
            coeffs: vec![c0, cx, cy],
        }
    }

    pub fn monomial(i: usize, j: usize) -> Self {
        let mut p = Self::zero(i + j);
        p.coeffs[index(i, j)] = 1.0;
        p
    }

    /// Builds a polynomial from graded coefficients; the length must be `dim(degree)`.
    pub fn from_coeffs(degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), dim(degree), "coefficient count mismatch");
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.degree {
            0.0
        } else {
            self.coeffs[index(i, j)]
        }
    }

    /// Re-embeds the coefficients in a space of (at least) the given degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Self::zero(degree.max(self.degree));
        out.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in y inside Horner in x would need a different layout; the
        // degrees involved are small so explicit powers are fine.
        let mut xp = [1.0; 16];
        let mut yp = [1.0; 16];
        let d = self.degree;
        if d < 16 {
            for k in 1..=d {
                xp[k] = xp[k - 1] * x;
                yp[k] = yp[k - 1] * y;
            }
            let mut s = 0.0;
            for n in 0..=d {
                let base = n * (n + 1) / 2;
                for j in 0..=n {
                    s += self.coeffs[base + j] * xp[n - j] * yp[j];
                }
            }
            s
        } else {
            let mut s = 0.0;
            for n in 0..=d {
                for j in 0..=n {
                    s += self.coeffs[index(n - j, j)] * x.powi((n - j) as i32) * y.powi(j as i32);
                }
            }
            s
        }
    }

    pub fn dx(&self) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.degree - 1);
        for n in 1..=self.degree {
            for j in 0..n {
                let i = n - j;
                out.coeffs[index(i - 1, j)] = i as f64 * self.coeffs[index(i, j)];
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.degree - 1);
        for n in 1..=self.degree {
            for j in 1..=n {
                let i = n - j;
                out.coeffs[index(i, j - 1)] = j as f64 * self.coeffs[index(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Poly) {
        if other.degree > self.degree {
            *self = self.with_degree(other.degree);
        }
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }

    pub fn mul(&self, other: &Poly) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for n in 0..=self.degree {
            for j in 0..=n {
                let a = self.coeffs[index(n - j, j)];
                if a == 0.0 {
                    continue;
                }
                for m in 0..=other.degree {
                    for l in 0..=m {
                        out.coeffs[index(n - j + m - l, j + l)] += a * other.coeffs[index(m - l, l)];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        self.axpy(1.0, rhs);
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

/// Scaled local coordinates of an element: `ξ = (x - center) / h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFrame {
    pub center: [f64; 2],
    pub h: f64,
}

impl LocalFrame {
    pub fn to_local(&self, x: [f64; 2]) -> [f64; 2] {
        [(x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h]
    }

    pub fn to_global(&self, xi: [f64; 2]) -> [f64; 2] {
        [self.center[0] + self.h * xi[0], self.center[1] + self.h * xi[1]]
    }

    /// The affine function `c0 + g·x` written in local coordinates.
    pub fn affine(&self, c0: f64, g: [f64; 2]) -> Poly {
        Poly::linear(
            c0 + g[0] * self.center[0] + g[1] * self.center[1],
            g[0] * self.h,
            g[1] * self.h,
        )
    }

    /// Evaluates a local polynomial at a physical point.
    pub fn eval(&self, p: &Poly, x: [f64; 2]) -> f64 {
        let xi = self.to_local(x);
        p.eval(xi[0], xi[1])
    }

    /// Physical `∂/∂x` of a local polynomial.
    pub fn dx(&self, p: &Poly) -> Poly {
        p.dx().scale(1.0 / self.h)
    }

    /// Physical `∂/∂y` of a local polynomial.
    pub fn dy(&self, p: &Poly) -> Poly {
        p.dy().scale(1.0 / self.h)
    }

    /// Physical directional derivative `d·∇p`.
    pub fn directional(&self, p: &Poly, d: [f64; 2]) -> Poly {
        let mut out = p.dx().scale(d[0] / self.h);
        out.axpy(d[1] / self.h, &p.dy());
        out
    }
}

/// Symmetric-matrix-valued polynomial field with components `(xx, xy, yy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPoly {
    pub xx: Poly,
    pub xy: Poly,
    pub yy: Poly,
}

impl SymPoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            xx: Poly::zero(degree),
            xy: Poly::zero(degree),
            yy: Poly::zero(degree),
        }
    }

    pub fn components(&self) -> [&Poly; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    pub fn axpy(&mut self, a: f64, other: &SymPoly) {
        self.xx.axpy(a, &other.xx);
        self.xy.axpy(a, &other.xy);
        self.yy.axpy(a, &other.yy);
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            xx: self.xx.scale(a),
            xy: self.xy.scale(a),
            yy: self.yy.scale(a),
        }
    }

    pub fn eval_local(&self, xi: [f64; 2]) -> [f64; 3] {
        [
            self.xx.eval(xi[0], xi[1]),
            self.xy.eval(xi[0], xi[1]),
            self.yy.eval(xi[0], xi[1]),
        ]
    }
}
