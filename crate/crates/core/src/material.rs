//! Isotropic elasticity tensor and its inverse on symmetric 2×2 matrices.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("Lamé parameters must be positive (lambda = {lambda}, mu = {mu})")]
    NonPositive { lambda: f64, mu: f64 },
    #[error("Young's modulus must be positive, got {0}")]
    Young(f64),
    #[error("Poisson ratio must lie in (0, 1/2), got {0}")]
    Poisson(f64),
}

/// Symmetric 2×2 matrix stored as `(xx, xy, yy)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.xx, self.xy, self.yy]
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius product `A : B`.
    pub fn colon(self, other: SymMat2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    pub fn norm_sq(self) -> f64 {
        self.colon(self)
    }

    pub fn mul_vec(self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// `a · M b`.
    pub fn bilinear(self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mb = self.mul_vec(b);
        a[0] * mb[0] + a[1] * mb[1]
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<SymMat2> for f64 {
    type Output = SymMat2;
    fn mul(self, m: SymMat2) -> SymMat2 {
        SymMat2::new(self * m.xx, self * m.xy, self * m.yy)
    }
}

/// Lamé pair of an isotropic material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LameParameters {
    pub lambda: f64,
    pub mu: f64,
}

impl LameParameters {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, MaterialError> {
        if !(lambda > 0.0 && mu > 0.0) {
            return Err(MaterialError::NonPositive { lambda, mu });
        }
        Ok(Self { lambda, mu })
    }

    /// `λ = Eν/((1+ν)(1−2ν))`, `μ = E/(2(1+ν))`.
    pub fn from_young_poisson(young: f64, nu: f64) -> Result<Self, MaterialError> {
        if !(young > 0.0) {
            return Err(MaterialError::Young(young));
        }
        if !(nu > 0.0 && nu < 0.5) {
            return Err(MaterialError::Poisson(nu));
        }
        let lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = young / (2.0 * (1.0 + nu));
        Self::new(lambda, mu)
    }

    /// Inverse of [`LameParameters::from_young_poisson`]; returns `(E, ν)`.
    pub fn young_poisson(&self) -> (f64, f64) {
        let nu = self.lambda / (2.0 * (self.lambda + self.mu));
        (2.0 * self.mu * (1.0 + nu), nu)
    }

    /// `C E = 2μ E + λ tr(E) 1`.
    pub fn apply_c(&self, e: SymMat2) -> SymMat2 {
        let t = self.lambda * e.trace();
        SymMat2::new(2.0 * self.mu * e.xx + t, 2.0 * self.mu * e.xy, 2.0 * self.mu * e.yy + t)
    }

    /// `C⁻¹ S = (S − λ/(2(λ+μ)) tr(S) 1) / (2μ)`.
    pub fn apply_cinv(&self, s: SymMat2) -> SymMat2 {
        let [a, b] = self.cinv_coefficients();
        let t = b * s.trace();
        SymMat2::new(a * s.xx + t, a * s.xy, a * s.yy + t)
    }

    /// `C⁻¹ S = a S + b tr(S) 1`, returned as `[a, b]`.
    pub fn cinv_coefficients(&self) -> [f64; 2] {
        let a = 1.0 / (2.0 * self.mu);
        let b = -a * self.lambda / (2.0 * (self.lambda + self.mu));
        [a, b]
    }
}
