//! Configurable-precision real scalars.
//!
//! Every algorithm in this crate is generic over [`Real`]. Three backends
//! are provided:
//!
//! * `f64`, hardware double (53-bit significand), the default;
//! * [`Dd`], double-double (106-bit significand), fast enough for grid work;
//! * [`Mp<BITS>`], multiprecision floats with a fixed significand width.
//!
//! Complex quantities are `num_complex::Complex<T>`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_complex::Complex;
use num_traits::{Num, One, ToPrimitive, Zero};

pub use crate::dd::Dd;

/// A real scalar with a known significand width.
pub trait Real:
    Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Significand width in bits.
    const BITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn sin_cos(&self) -> (Self, Self);
    fn ln(&self) -> Self;
    fn pi() -> Self;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Unit roundoff scale, `2^(1 - BITS)`.
    fn epsilon() -> Self {
        Self::from_f64(libm::ldexp(1.0, 1 - Self::BITS as i32))
    }

    fn from_i64(n: i64) -> Self {
        // Split so both halves are exact in f64.
        let hi = (n >> 26) as f64 * 67_108_864.0;
        let lo = (n & 0x3ff_ffff) as f64;
        Self::from_f64(hi) + Self::from_f64(lo)
    }

    /// `num / den` rounded to this precision.
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let shift = Self::BITS as u64 + 64;
        let int_part = num / den;
        let frac_num = num % den;
        let scaled = (frac_num << shift) / den;
        from_biguint::<Self>(&int_part) + scaled_biguint::<Self>(&scaled, shift)
    }
}

fn from_biguint<T: Real>(n: &BigUint) -> T {
    scaled_biguint(n, 0)
}

/// `n * 2^-shift`, summing 32-bit limbs so every partial term is exact.
fn scaled_biguint<T: Real>(n: &BigUint, shift: u64) -> T {
    let mut acc = T::zero();
    for (i, limb) in n.iter_u32_digits().enumerate() {
        if limb == 0 {
            continue;
        }
        let exp = 32 * i as i64 - shift as i64;
        acc = acc + mul_pow2(T::from_f64(limb as f64), exp);
    }
    acc
}

fn mul_pow2<T: Real>(x: T, mut exp: i64) -> T {
    let mut x = x;
    while exp > 600 {
        x = x * T::from_f64(libm::ldexp(1.0, 600));
        exp -= 600;
    }
    while exp < -600 {
        x = x * T::from_f64(libm::ldexp(1.0, -600));
        exp += 600;
    }
    x * T::from_f64(libm::ldexp(1.0, exp as i32))
}

impl Real for f64 {
    const BITS: u32 = 53;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn sin_cos(&self) -> (Self, Self) {
        libm::sincos(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn pi() -> Self {
        core::f64::consts::PI
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for Dd {
    const BITS: u32 = 106;

    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn to_f64(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn sqrt(&self) -> Self {
        Dd::sqrt(*self)
    }
    fn sin_cos(&self) -> (Self, Self) {
        // Go through a multiprecision evaluation: the double-double
        // trig kernels lose a few bits near quadrant boundaries.
        let v = Mp::<192>::from_dd(*self);
        let (s, c) = v.sin_cos();
        (s.to_dd(), c.to_dd())
    }
    fn ln(&self) -> Self {
        Mp::<192>::from_dd(*self).ln().to_dd()
    }
    fn pi() -> Self {
        Dd::pi()
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Multiprecision float with a `BITS`-bit significand.
#[derive(Clone)]
pub struct Mp<const BITS: usize>(BigFloat);

impl<const BITS: usize> Mp<BITS> {
    pub fn new(x: BigFloat) -> Self {
        let mut x = x;
        if x.precision() != Some(BITS) {
            // Precision only ever grows or shrinks to BITS; failure is an allocation error.
            let _ = x.set_precision(BITS, RM);
        }
        Mp(x)
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn from_dd(x: Dd) -> Self {
        Mp(BigFloat::from_f64(x.hi(), BITS).add(&BigFloat::from_f64(x.lo(), BITS), BITS, RM))
    }

    fn to_dd(&self) -> Dd {
        let hi = self.to_f64();
        let rest = self.0.sub(&BigFloat::from_f64(hi, BITS), BITS, RM);
        let lo = Mp::<BITS>(rest).to_f64();
        Dd::new(hi, lo)
    }
}

fn consts() -> Consts {
    Consts::new().expect("allocating multiprecision constant cache")
}

impl<const BITS: usize> Real for Mp<BITS> {
    const BITS: u32 = BITS as u32;

    fn from_f64(x: f64) -> Self {
        Mp(BigFloat::from_f64(x, BITS))
    }

    fn to_f64(&self) -> f64 {
        match self.0.as_raw_parts() {
            Some((words, _, sign, exp, _)) => {
                let top = match words.last() {
                    Some(&w) => w,
                    None => return 0.0,
                };
                if top == 0 {
                    return 0.0;
                }
                let mag = libm::ldexp(top as f64, exp - 64);
                if sign == Sign::Neg {
                    -mag
                } else {
                    mag
                }
            }
            None => f64::NAN,
        }
    }

    fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(BITS, RM))
    }

    fn sin_cos(&self) -> (Self, Self) {
        let mut cc = consts();
        let p = BITS + 64;
        let s = self.0.sin(p, RM, &mut cc);
        let c = self.0.cos(p, RM, &mut cc);
        (Mp::new(s), Mp::new(c))
    }

    fn ln(&self) -> Self {
        let mut cc = consts();
        Mp::new(self.0.ln(BITS + 64, RM, &mut cc))
    }

    fn pi() -> Self {
        let mut cc = consts();
        Mp(cc.pi(BITS, RM))
    }

    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }
}

impl<const BITS: usize> fmt::Debug for Mp<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp<{}>({:e})", BITS, self.to_f64())
    }
}

impl<const BITS: usize> PartialEq for Mp<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl<const BITS: usize> PartialOrd for Mp<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<const BITS: usize> $tr for Mp<BITS> {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                let f: fn(&BigFloat, &BigFloat) -> BigFloat = $body;
                Mp(f(&self.0, &rhs.0))
            }
        }
    };
}

mp_binop!(Add, add, |a, b| a.add(b, BITS, RM));
mp_binop!(Sub, sub, |a, b| a.sub(b, BITS, RM));
mp_binop!(Mul, mul, |a, b| a.mul(b, BITS, RM));
mp_binop!(Div, div, |a, b| a.div(b, BITS, RM));
mp_binop!(Rem, rem, |a, b| a.rem(b));

impl<const BITS: usize> Neg for Mp<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Mp(self.0.neg())
    }
}

impl<const BITS: usize> Zero for Mp<BITS> {
    fn zero() -> Self {
        Mp(BigFloat::from_f64(0.0, BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const BITS: usize> One for Mp<BITS> {
    fn one() -> Self {
        Mp(BigFloat::from_f64(1.0, BITS))
    }
}

impl<const BITS: usize> Num for Mp<BITS> {
    type FromStrRadixErr = ();

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ()> {
        let radix = match radix {
            2 => astro_float::Radix::Bin,
            8 => astro_float::Radix::Oct,
            10 => astro_float::Radix::Dec,
            16 => astro_float::Radix::Hex,
            _ => return Err(()),
        };
        let mut cc = consts();
        let v = BigFloat::parse(s, radix, BITS, RM, &mut cc);
        if v.is_nan() {
            Err(())
        } else {
            Ok(Mp(v))
        }
    }
}

/// Modulus of a complex scalar.
pub fn cabs<T: Real>(z: &Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// `e^{i theta}`.
pub fn cis<T: Real>(theta: &T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

/// `e^{2 pi i x}`.
pub fn turn<T: Real>(x: &T) -> Complex<T> {
    let two = T::one() + T::one();
    cis(&(two * T::pi() * x.clone()))
}

#[inline]
pub fn to_c64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

/// Natural log of a big integer, in double precision.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return libm::log(n.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact_for_dyadic() {
        let v: f64 = Real::from_ratio(&BigUint::from(3u32), &BigUint::from(8u32));
        assert_eq!(v, 0.375);
        let m: Mp<256> = Real::from_ratio(&BigUint::from(3u32), &BigUint::from(8u32));
        assert_eq!(m.to_f64(), 0.375);
    }

    #[test]
    fn ratio_resolves_beyond_double() {
        // 1/3 at 256 bits: 3 * x - 1 must vanish far below f64 epsilon.
        let third: Mp<256> = Real::from_ratio(&BigUint::from(1u32), &BigUint::from(3u32));
        let resid = third * Mp::from_f64(3.0) - Mp::one();
        assert!(resid.abs().to_f64() < 1e-70);
    }

    #[test]
    fn dd_trig_agrees_with_mp() {
        let x = Dd::from(0.7) + Dd::from(1e-20);
        let (s, c) = Real::sin_cos(&x);
        let one = s * s + c * c - Dd::from(1.0);
        assert!(one.hi().abs() < 1e-30);
        assert!((s.hi() - 0.7f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn mp_pi_and_epsilon() {
        let pi = <Mp<128> as Real>::pi();
        assert!((pi.to_f64() - core::f64::consts::PI).abs() < 1e-15);
        let eps = <Mp<128> as Real>::epsilon();
        assert_eq!(eps.to_f64(), libm::ldexp(1.0, -127));
    }

    #[test]
    fn from_i64_is_exact() {
        let n = (1i64 << 60) + 12345;
        let v = <Mp<128> as Real>::from_i64(n);
        let back = v - <Mp<128> as Real>::from_f64((1i64 << 60) as f64);
        assert_eq!(back.to_f64(), 12345.0);
    }

    #[test]
    fn ln_of_huge_integer() {
        let n = BigUint::from(1u32) << 3000u32;
        assert!((ln_biguint(&n) - 3000.0 * core::f64::consts::LN_2).abs() < 1e-9);
    }
}
