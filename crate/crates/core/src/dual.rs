//! Forward-mode dual numbers over `Complex64`, used to differentiate Frobenius
//! coefficients with respect to the exponent.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: Complex64,
    pub d: Complex64,
}

impl Dual {
    pub fn new(v: Complex64, d: Complex64) -> Self {
        Dual { v, d }
    }

    pub fn constant(v: Complex64) -> Self {
        Dual { v, d: Complex64::new(0.0, 0.0) }
    }

    pub fn real(v: f64) -> Self {
        Dual::constant(Complex64::new(v, 0.0))
    }

    /// The independent variable itself, at value `v`.
    pub fn variable(v: f64) -> Self {
        Dual::new(Complex64::new(v, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Dual::real(0.0)
    }

    pub fn magnitude(&self) -> f64 {
        self.v.norm().max(self.d.norm())
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let inv = o.v.inv();
        Dual::new(self.v * inv, (self.d * o.v - self.v * o.d) * inv * inv)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, o: f64) -> Dual {
        Dual::new(self.v + o, self.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual::new(self.v * o, self.d * o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_rule() {
        // f(ρ) = (ρ + 2)/(ρ² + 1) at ρ = 0.5 → f' = (1·1.25 − 2.5·1)/1.25²
        let r = Dual::variable(0.5);
        let f = (r + 2.0) / (r * r + 1.0);
        assert!((f.v.re - 2.0).abs() < 1e-15);
        assert!((f.d.re - (1.25 - 2.5) / 1.5625).abs() < 1e-15);
    }
}
