//! C^∞ transition functions and a small second-order jet type.
//!
//! `Jet` carries (value, first derivative, second derivative) through
//! arithmetic so that closed-form profiles get exact derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// e^{-1/t} for t > 0, zero otherwise.
pub fn sigma(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C^∞ in between.
pub fn step(t: f64) -> f64 {
    let a = sigma(t);
    let b = sigma(1.0 - t);
    if a + b == 0.0 {
        return if t >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Smooth step rising from 0 at `lo` to 1 at `hi`, with exact derivatives.
pub fn step_jet(r: Jet, lo: f64, hi: f64) -> Jet {
    let t = (r - lo) / (hi - lo);
    let a = sigma_jet(t);
    let b = sigma_jet(Jet::constant(1.0) - t);
    if t.v <= 0.0 {
        return Jet::constant(0.0);
    }
    if t.v >= 1.0 {
        return Jet::constant(1.0);
    }
    a / (a + b)
}

fn sigma_jet(t: Jet) -> Jet {
    if t.v <= 0.0 {
        return Jet::constant(0.0);
    }
    (Jet::constant(-1.0) / t).exp()
}

/// Value with first and second derivative with respect to one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    pub fn variable(v: f64) -> Self {
        Self { v, d1: 1.0, d2: 0.0 }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Self { v: e, d1: e * self.d1, d2: e * (self.d2 + self.d1 * self.d1) }
    }

    pub fn ln(self) -> Self {
        Self { v: self.v.ln(), d1: self.d1 / self.v, d2: self.d2 / self.v - (self.d1 / self.v).powi(2) }
    }

    pub fn scale(self, c: f64) -> Self {
        Self { v: c * self.v, d1: c * self.d1, d2: c * self.d2 }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1, d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2 }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv_v = 1.0 / o.v;
        let inv = Jet { v: inv_v, d1: -o.d1 * inv_v * inv_v, d2: (2.0 * o.d1 * o.d1 * inv_v - o.d2) * inv_v * inv_v };
        self * inv
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
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

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}
