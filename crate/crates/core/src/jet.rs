//! Second-order forward-mode differentiation of complex functions of one real
//! variable. A `Jet` carries a value together with its first and second
//! derivatives and propagates them exactly through arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub const ZERO: Jet = Jet::constant(Complex64::new(0.0, 0.0));
    pub const ONE: Jet = Jet::constant(Complex64::new(1.0, 0.0));

    pub const fn constant(value: Complex64) -> Self {
        Self {
            value,
            d1: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    /// `cos(a x)` and `sin(a x)` as jets at `x`.
    pub fn cos_sin_linear(a: f64, x: f64) -> (Jet, Jet) {
        let (s, c) = (a * x).sin_cos();
        let re = |v: f64| Complex64::new(v, 0.0);
        let cos = Jet {
            value: re(c),
            d1: re(-a * s),
            d2: re(-a * a * c),
        };
        let sin = Jet {
            value: re(s),
            d1: re(a * c),
            d2: re(-a * a * s),
        };
        (cos, sin)
    }

    pub fn scale(self, k: Complex64) -> Self {
        Jet {
            value: self.value * k,
            d1: self.d1 * k,
            d2: self.d2 * k,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet {
            value: self.value + rhs.value,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            value: -self.value,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet {
            value: self.value * rhs.value,
            d1: self.d1 * rhs.value + self.value * rhs.d1,
            d2: self.d2 * rhs.value + 2.0 * self.d1 * rhs.d1 + self.value * rhs.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let h = self.value / rhs.value;
        let h1 = (self.d1 - h * rhs.d1) / rhs.value;
        let h2 = (self.d2 - 2.0 * h1 * rhs.d1 - h * rhs.d2) / rhs.value;
        Jet {
            value: h,
            d1: h1,
            d2: h2,
        }
    }
}
