//! Double-double scalar.
//!
//! Addition, multiplication and square root come from `twofloat`. Its
//! double-double quotient skips the fused residual in the reciprocal step and
//! comes out only double accurate (`3 * (1/3) - 1 = -5.6e-17`), so division
//! here uses long division with two correction terms instead.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Dd(TwoFloat);

impl Dd {
    /// Normalized sum `hi + lo`.
    pub fn new(hi: f64, lo: f64) -> Self {
        Dd(TwoFloat::new_add(hi, lo))
    }

    pub fn hi(&self) -> f64 {
        self.0.hi()
    }

    pub fn lo(&self) -> f64 {
        self.0.lo()
    }

    pub fn sqrt(self) -> Self {
        Dd(self.0.sqrt())
    }

    pub fn trunc(self) -> Self {
        Dd(self.0.trunc())
    }

    pub fn pi() -> Self {
        Dd(twofloat::consts::PI)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd(TwoFloat::from(x))
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi(), self.lo())
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi() + self.lo())
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0 + rhs.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0 - rhs.0)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        Dd(self.0 * rhs.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi() / rhs.hi();
        let r = self.0 - rhs.0 * q1;
        let q2 = r.hi() / rhs.hi();
        let r = r - rhs.0 * q2;
        let q3 = r.hi() / rhs.hi();
        Dd(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        self - (self / rhs).trunc() * rhs
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd(TwoFloat::from(0.0))
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd(TwoFloat::from(1.0))
    }
}

impl Num for Dd {
    type FromStrRadixErr = ();

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ()> {
        if radix != 10 {
            return Err(());
        }
        s.parse::<f64>().map(Dd::from).map_err(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_is_double_double_accurate() {
        let third = Dd::one() / Dd::from(3.0);
        let resid = third * Dd::from(3.0) - Dd::one();
        assert!(resid.hi().abs() < 1e-31);
        let x = Dd::new(0.7, 1e-18);
        let y = Dd::new(-1.3, 2e-19);
        let back = (x / y) * y - x;
        assert!(back.hi().abs() < 1e-31);
    }

    #[test]
    fn remainder() {
        let r = Dd::from(7.5) % Dd::from(2.0);
        assert_eq!(r, Dd::from(1.5));
    }
}
