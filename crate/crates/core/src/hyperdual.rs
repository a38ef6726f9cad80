//! Hyper-dual numbers `v + a ε₁ + b ε₂ + ab ε₁ε₂` with `ε₁² = ε₂² = 0`.
//!
//! Seeding `ε₁` along `e_i` and `ε₂` along `e_j` yields `f`, `∂_i f`, `∂_j f`
//! and `∂_i∂_j f` without truncation error.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual {
    pub v: f64,
    pub a: f64,
    pub b: f64,
    pub ab: f64,
}

impl HyperDual {
    pub const ZERO: HyperDual = HyperDual {
        v: 0.0,
        a: 0.0,
        b: 0.0,
        ab: 0.0,
    };

    pub fn constant(v: f64) -> Self {
        HyperDual { v, ..Self::ZERO }
    }

    pub fn seeded(v: f64, da: f64, db: f64) -> Self {
        HyperDual {
            v,
            a: da,
            b: db,
            ab: 0.0,
        }
    }

    /// Applies a scalar function given its value and first two derivatives.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        HyperDual {
            v: f,
            a: df * self.a,
            b: df * self.b,
            ab: df * self.ab + d2f * self.a * self.b,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        HyperDual {
            v: c * self.v,
            a: c * self.a,
            b: c * self.b,
            ab: c * self.ab,
        }
    }

    pub fn square(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    /// `√u` for a nonnegative `u` that may vanish to second order together
    /// with its first two derivatives; the vanishing case returns zero.
    pub fn sqrt_guarded(self, floor: f64) -> Self {
        if self.v <= floor {
            HyperDual::ZERO
        } else {
            self.sqrt()
        }
    }

    pub fn powf(self, r: f64) -> Self {
        let p = self.v.powf(r);
        self.chain(p, r * p / self.v, r * (r - 1.0) * p / (self.v * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, o: HyperDual) -> HyperDual {
        HyperDual {
            v: self.v + o.v,
            a: self.a + o.a,
            b: self.b + o.b,
            ab: self.ab + o.ab,
        }
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, o: HyperDual) -> HyperDual {
        self + (-o)
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> HyperDual {
        self.scale(-1.0)
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        HyperDual {
            v: self.v * o.v,
            a: self.a * o.v + self.v * o.a,
            b: self.b * o.v + self.v * o.b,
            ab: self.ab * o.v + self.a * o.b + self.b * o.a + self.v * o.ab,
        }
    }
}

impl Div for HyperDual {
    type Output = HyperDual;
    fn div(self, o: HyperDual) -> HyperDual {
        self * o.recip()
    }
}
