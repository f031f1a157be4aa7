//! Second-order forward differentiation in two variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and Hessian of a scalar function of `(x, y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; 2],
            h: [[0.0; 2]; 2],
        }
    }

    /// The coordinate functions `x` and `y` at a point.
    pub fn variables(p: [f64; 2]) -> (Self, Self) {
        (
            Self {
                v: p[0],
                d: [1.0, 0.0],
                h: [[0.0; 2]; 2],
            },
            Self {
                v: p[1],
                d: [0.0, 1.0],
                h: [[0.0; 2]; 2],
            },
        )
    }

    /// `g ∘ self` given `g`, `g'` and `g''` at `self.v`.
    fn chain(self, g: f64, g1: f64, g2: f64) -> Self {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = g1 * self.h[i][j] + g2 * self.d[i] * self.d[j];
            }
        }
        Self {
            v: g,
            d: [g1 * self.d[0], g1 * self.d[1]],
            h,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn powf(self, p: f64) -> Self {
        let v = self.v;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    pub fn powi(self, n: i32) -> Self {
        let v = self.v;
        let nf = n as f64;
        self.chain(v.powi(n), nf * v.powi(n - 1), nf * (nf - 1.0) * v.powi(n - 2))
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let v = self.v;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Angle of `(x, y)`, with the same branch as `f64::atan2`.
    pub fn atan2(y: Jet, x: Jet) -> Self {
        let q = x.v * x.v + y.v * y.v;
        let ty = x.v / q;
        let tx = -y.v / q;
        let q2 = q * q;
        let tyy = -2.0 * x.v * y.v / q2;
        let txx = 2.0 * x.v * y.v / q2;
        let txy = (y.v * y.v - x.v * x.v) / q2;
        let mut out = Self {
            v: y.v.atan2(x.v),
            d: [0.0; 2],
            h: [[0.0; 2]; 2],
        };
        for i in 0..2 {
            out.d[i] = ty * y.d[i] + tx * x.d[i];
            for j in 0..2 {
                out.h[i][j] = ty * y.h[i][j]
                    + tx * x.h[i][j]
                    + tyy * y.d[i] * y.d[j]
                    + txx * x.d[i] * x.d[j]
                    + txy * (x.d[i] * y.d[j] + y.d[i] * x.d[j]);
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut h = self.h;
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] += o.h[i][j];
            }
        }
        Jet {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
            h,
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -1.0 * self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.d[i] * o.d[j]
                    + self.d[j] * o.d[i];
            }
        }
        Jet {
            v: self.v * o.v,
            d: [self.v * o.d[0] + o.v * self.d[0], self.v * o.d[1] + o.v * self.d[1]],
            h,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        let mut h = j.h;
        for row in &mut h {
            for x in row {
                *x *= self;
            }
        }
        Jet {
            v: self * j.v,
            d: [self * j.d[0], self * j.d[1]],
            h,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet { v: self.v - c, ..self }
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        -j + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet, Jet) -> Jet, p: [f64; 2]) {
        let (x, y) = Jet::variables(p);
        let j = f(x, y);
        let val = |q: [f64; 2]| {
            let (x, y) = Jet::variables(q);
            f(x, y)
        };
        let eps = 1e-5;
        for i in 0..2 {
            let mut a = p;
            let mut b = p;
            a[i] += eps;
            b[i] -= eps;
            let (ja, jb) = (val(a), val(b));
            let d = (ja.v - jb.v) / (2.0 * eps);
            assert!((d - j.d[i]).abs() < 1e-7 * (1.0 + d.abs()), "d{i}: {d} vs {}", j.d[i]);
            for k in 0..2 {
                let h = (ja.d[k] - jb.d[k]) / (2.0 * eps);
                assert!((h - j.h[i][k]).abs() < 1e-6 * (1.0 + h.abs()), "h{i}{k}: {h} vs {}", j.h[i][k]);
            }
        }
        assert!((j.h[0][1] - j.h[1][0]).abs() < 1e-12 * (1.0 + j.h[0][1].abs()));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        fd_check(|x, y| (x * y).sin() + x.cos() * y.powi(3), [0.3, -0.7]);
        fd_check(|x, y| (x * x + y * y).sqrt().powf(0.6), [0.4, 0.9]);
        fd_check(|x, y| Jet::atan2(y, x) * (x - y).recip(), [-0.5, 0.8]);
        fd_check(|x, y| (2.0 * x + 1.0) / (y * y + 3.0), [1.1, 0.2]);
    }

    #[test]
    fn atan2_branch() {
        let (x, y) = Jet::variables([-1.0, -1e-9]);
        assert!(Jet::atan2(y, x).v < -3.0);
    }
}
