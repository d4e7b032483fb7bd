//! Truncated power-series algebra of germs fixing the origin.
//!
//! A [`TruncatedGerm`] stores `a_1, ..., a_N` for `f(z) = a_1 z + ... + a_N z^N`.
//! All binary operations truncate to the smaller order; nothing ever
//! extends the order silently.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// Default coefficient tolerance for formal comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default truncation order for formal checks.
pub const DEFAULT_ORDER: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedGerm<T: Real = f64> {
    coeffs: Vec<Complex<T>>,
    degree: usize,
    tag: Option<String>,
}

/// Result of [`TruncatedGerm::tangency_order`].
#[derive(Clone, Debug, PartialEq)]
pub enum Tangency<T: Real = f64> {
    /// All coefficients past `z` vanish to tolerance through the truncation order.
    Identity,
    /// `g(z) = z + c_d z^{d+1} + O(z^{d+2})`.
    Parabolic { d: usize, c_d: Complex<T> },
}

impl<T: Real> TruncatedGerm<T> {
    /// Builds a germ from `a_1..a_N`.
    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::OrderTooSmall(coeffs.len()));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if !(c.re.to_f64().is_finite() && c.im.to_f64().is_finite()) {
                return Err(Error::NonFinite(i + 1));
            }
        }
        if coeffs[0].is_zero() {
            return Err(Error::ZeroMultiplier);
        }
        let degree = effective_degree(&coeffs);
        Ok(Self {
            coeffs,
            degree,
            tag: None,
        })
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    /// The identity germ `z` at the given order.
    pub fn identity(order: usize) -> Result<Self> {
        Self::linear(Complex::one(), order)
    }

    /// `c z` at the given order.
    pub fn linear(c: Complex<T>, order: usize) -> Result<Self> {
        let mut coeffs = vec![Complex::zero(); order];
        if let Some(first) = coeffs.first_mut() {
            *first = c;
        }
        Self::new(coeffs)
    }

    /// Builds a germ from sparse `(power, coefficient)` terms.
    pub fn from_terms(order: usize, terms: &[(usize, Complex<T>)]) -> Result<Self> {
        let mut coeffs = vec![Complex::zero(); order];
        for (k, c) in terms {
            if *k == 0 || *k > order {
                return Err(Error::InvalidInput(alloc::format!(
                    "term z^{k} outside 1..={order}"
                )));
            }
            coeffs[k - 1] = &coeffs[k - 1] + c;
        }
        Self::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_1..a_N`.
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero outside `1..=N`.
    pub fn coeff(&self, k: usize) -> Complex<T> {
        if k == 0 || k > self.order() {
            Complex::zero()
        } else {
            self.coeffs[k - 1].clone()
        }
    }

    #[inline]
    pub fn multiplier(&self) -> &Complex<T> {
        &self.coeffs[0]
    }

    /// Highest power with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        let order = order.min(self.order());
        let mut g = Self::new(self.coeffs[..order].to_vec())?;
        g.tag = self.tag.clone();
        Ok(g)
    }

    /// Converts the coefficients to another scalar type.
    pub fn cast<U: Real>(&self) -> TruncatedGerm<U> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Complex::new(U::from_f64(c.re.to_f64()), U::from_f64(c.im.to_f64())))
            .collect::<Vec<_>>();
        let degree = effective_degree(&coeffs);
        TruncatedGerm {
            coeffs,
            degree,
            tag: self.tag.clone(),
        }
    }

    /// Horner evaluation of the truncated polynomial.
    #[inline]
    pub fn evaluate(&self, z: &Complex<T>) -> Complex<T> {
        let mut acc = self.coeffs[self.degree - 1].clone();
        for c in self.coeffs[..self.degree - 1].iter().rev() {
            acc = &(&acc * z) + c;
        }
        &acc * z
    }

    /// `(f(z), f'(z))`.
    #[inline]
    pub fn evaluate_with_derivative(&self, z: &Complex<T>) -> (Complex<T>, Complex<T>) {
        // p(z) = f(z)/z, f = z p, f' = p + z p'.
        let mut p = self.coeffs[self.degree - 1].clone();
        let mut dp: Complex<T> = Complex::zero();
        for c in self.coeffs[..self.degree - 1].iter().rev() {
            dp = &(&dp * z) + &p;
            p = &(&p * z) + c;
        }
        let value = &p * z;
        let deriv = &p + &(&dp * z);
        (value, deriv)
    }

    /// `f(g(z))`, truncated to `min(order(f), order(g))`.
    pub fn compose(&self, g: &Self) -> Self {
        let n = self.order().min(g.order());
        let gp = power_indexed(&g.coeffs, n);
        let top = self.degree.min(n);
        // P_k = a_k + g P_{k+1}, kept to degree n - k since the result is g^k P_k + ...
        let mut acc: Vec<Complex<T>> = vec![self.coeffs[top - 1].clone()];
        for k in (1..top).rev() {
            let keep = n - k;
            let mut next = mul_trunc(&acc, &gp, keep);
            next[0] = &next[0] + &self.coeffs[k - 1];
            acc = next;
        }
        let full = mul_trunc(&acc, &gp, n);
        self.rewrap(full[1..].to_vec())
    }

    /// Compositional inverse to truncation order.
    pub fn invert(&self) -> Result<Self> {
        let a1 = self.multiplier().clone();
        if a1.is_zero() {
            return Err(Error::ZeroMultiplier);
        }
        let n = self.order();
        let mut table = PowerTable::new(n, self.degree);
        table.push(Complex::<T>::one() / &a1);
        for k in 2..=n {
            table.fill_column(k);
            let mut c: Complex<T> = Complex::zero();
            for j in 2..=self.degree.min(k) {
                c = &c + &(&self.coeffs[j - 1] * table.get(j, k));
            }
            table.push(-(c / &a1));
        }
        Ok(self.rewrap(table.series()))
    }

    /// `phi ∘ f ∘ phi^{-1}` with `self` as `phi`.
    pub fn conjugate(&self, f: &Self) -> Result<Self> {
        let inv = self.invert()?;
        Ok(self.compose(&f.compose(&inv)))
    }

    /// `f ∘ g ∘ f^{-1} ∘ g^{-1}` with `self` as `f`.
    pub fn commutator(&self, g: &Self) -> Result<Self> {
        let fi = self.invert()?;
        let gi = g.invert()?;
        Ok(self.compose(&g.compose(&fi.compose(&gi))))
    }

    /// Reads off `g(z) = z + c_d z^{d+1} + ...` for a germ tangent to the identity.
    pub fn tangency_order(&self, tol: f64) -> Result<Tangency<T>> {
        let deviation = cabs(&(self.multiplier() - Complex::<T>::one())).to_f64();
        if deviation > tol {
            return Err(Error::NotTangent { deviation, tol });
        }
        for k in 2..=self.order() {
            let c = &self.coeffs[k - 1];
            if cabs(c).to_f64() > tol {
                return Ok(Tangency::Parabolic {
                    d: k - 1,
                    c_d: c.clone(),
                });
            }
        }
        Ok(Tangency::Identity)
    }

    /// Largest coefficient modulus among `z^from..=z^to`.
    pub fn max_coeff(&self, from: usize, to: usize) -> f64 {
        (from.max(1)..=to.min(self.order()))
            .map(|k| cabs(&self.coeffs[k - 1]).to_f64())
            .fold(0.0, f64::max)
    }

    /// Coefficientwise maximum modulus of `self - other` over the common order.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| cabs(&(a - b)).to_f64())
            .fold(0.0, f64::max)
    }

    /// Radius estimate `1 / limsup |a_k|^{1/k}` from the upper half of the coefficients.
    pub fn coefficient_radius(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for k in (n / 2).max(2)..=n {
            let m = cabs(&self.coeffs[k - 1]).to_f64();
            if m > 0.0 {
                worst = worst.max(libm::pow(m, 1.0 / k as f64));
            }
        }
        if worst == 0.0 {
            f64::INFINITY
        } else {
            1.0 / worst
        }
    }

    fn rewrap(&self, coeffs: Vec<Complex<T>>) -> Self {
        let degree = effective_degree(&coeffs);
        TruncatedGerm {
            coeffs,
            degree,
            tag: None,
        }
    }
}

fn effective_degree<T: Real>(coeffs: &[Complex<T>]) -> usize {
    coeffs
        .iter()
        .rposition(|c| !c.is_zero())
        .map(|i| i + 1)
        .unwrap_or(1)
}

/// `[0, a_1, ..., a_n]`, zero padded.
pub(crate) fn power_indexed<T: Real>(coeffs: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); n + 1];
    for (k, c) in coeffs.iter().take(n).enumerate() {
        out[k + 1] = c.clone();
    }
    out
}

/// Product of power-indexed series truncated at degree `n`.
pub(crate) fn mul_trunc<T: Real>(a: &[Complex<T>], b: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] = &out[i + j] + &(ai * bj);
        }
    }
    out
}

/// Coefficients of the powers `h^j` of a series `h = h_1 z + h_2 z^2 + ...`
/// whose coefficients become known one at a time.
///
/// `(h^j)_k` for `j >= 2` only involves `h_1..h_{k-1}`, so column `k` can be
/// filled before `h_k` is solved for.
pub(crate) struct PowerTable<T: Real> {
    n: usize,
    max_power: usize,
    // rows[j - 1][k] = (h^j)_k
    rows: Vec<Vec<Complex<T>>>,
    known: usize,
}

impl<T: Real> PowerTable<T> {
    pub(crate) fn new(n: usize, max_power: usize) -> Self {
        let max_power = max_power.max(1);
        Self {
            n,
            max_power,
            rows: vec![vec![Complex::zero(); n + 1]; max_power],
            known: 0,
        }
    }

    pub(crate) fn get(&self, j: usize, k: usize) -> &Complex<T> {
        &self.rows[j - 1][k]
    }

    /// Fills `(h^j)_k` for `2 <= j <= min(k, max_power)`.
    pub(crate) fn fill_column(&mut self, k: usize) {
        debug_assert_eq!(self.known, k - 1);
        for j in 2..=self.max_power.min(k) {
            let mut s: Complex<T> = Complex::zero();
            for i in 1..=(k + 1 - j) {
                let hi = &self.rows[0][i];
                if hi.is_zero() {
                    continue;
                }
                s = &s + &(hi * &self.rows[j - 2][k - i]);
            }
            self.rows[j - 1][k] = s;
        }
    }

    /// Records the next coefficient `h_k`.
    pub(crate) fn push(&mut self, hk: Complex<T>) {
        self.known += 1;
        let k = self.known;
        debug_assert!(k <= self.n);
        self.rows[0][k] = hk;
    }

    /// `h_1..h_n`.
    pub(crate) fn series(self) -> Vec<Complex<T>> {
        self.rows.into_iter().next().unwrap_or_default()[1..].to_vec()
    }
}

/// How backward orbit steps invert a germ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseMode {
    /// Evaluate the truncated compositional inverse as a polynomial.
    Series,
    /// Start from the truncated inverse and polish with Newton steps on `f(z) = w`.
    Newton { max_steps: usize },
}

impl Default for InverseMode {
    fn default() -> Self {
        InverseMode::Newton { max_steps: 12 }
    }
}

/// Pointwise inverse of a germ on a trusted disk.
#[derive(Clone, Debug)]
pub struct InverseMap<T: Real = f64> {
    forward: TruncatedGerm<T>,
    series: TruncatedGerm<T>,
    mode: InverseMode,
    tol: T,
    settle: T,
}

impl<T: Real> InverseMap<T> {
    pub fn new(forward: &TruncatedGerm<T>, mode: InverseMode) -> Result<Self> {
        let series = forward.invert()?;
        let tol = T::epsilon() * T::from_f64(64.0);
        let settle = tol.sqrt() / T::from_f64(64.0);
        Ok(Self {
            forward: forward.clone(),
            series,
            mode,
            tol,
            settle,
        })
    }

    pub fn mode(&self) -> InverseMode {
        self.mode
    }

    pub fn series(&self) -> &TruncatedGerm<T> {
        &self.series
    }

    /// Preimage of `w` near the origin, `None` when Newton does not converge.
    #[inline]
    pub fn apply(&self, w: &Complex<T>) -> Option<Complex<T>> {
        match self.mode {
            InverseMode::Series => Some(self.series.evaluate(w)),
            InverseMode::Newton { max_steps } => self
                .newton(w, self.series.evaluate(w), max_steps)
                .or_else(|| self.newton(w, w / self.forward.multiplier(), 4 * max_steps)),
        }
    }

    #[inline]
    fn newton(&self, w: &Complex<T>, start: Complex<T>, steps: usize) -> Option<Complex<T>> {
        let mut z = start;
        let scale2 = w.norm_sqr() + T::from_f64(1e-300);
        // Newton converges quadratically, so a step below `settle` leaves an
        // error below roundoff and the next step can be skipped.
        let settle2 = self.settle.clone() * self.settle.clone() * scale2.clone();
        for _ in 0..steps {
            let (fz, dfz) = self.forward.evaluate_with_derivative(&z);
            if dfz.is_zero() {
                return None;
            }
            let step = (fz - w) / dfz;
            z = &z - &step;
            if step.norm_sqr() <= settle2 {
                return Some(z);
            }
        }
        let resid = (self.forward.evaluate(&z) - w).norm_sqr();
        let tol = self.tol.clone() * T::from_f64(16.0);
        if resid <= tol.clone() * tol * scale2 {
            Some(z)
        } else {
            None
        }
    }
}
