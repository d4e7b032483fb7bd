//! Continued fractions of rotation numbers in `(0, 1)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ln_biguint, turn, Real};

/// Precision recorded on a rotation number when none is requested.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Partial quotients are capped at this many bits by the Liouville builder.
pub const LIOUVILLE_CAP_BITS: u64 = 4096;

/// Largest `q_k` for which explicit rotation orbits are formed.
pub const MAX_ORBIT_DENOMINATOR: u64 = 1 << 24;

/// `α = [0; a_1, a_2, ..., a_K]` with its exact convergents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationNumber {
    pq: Vec<BigUint>,
    // (p_k, q_k) for k = 0..=K
    convergents: Vec<(BigUint, BigUint)>,
    precision_bits: u32,
    capped_at: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiouvilleGrowth {
    /// `a_{k+1} >= e^{q_k}`.
    Exp,
    /// `a_{k+1} >= q_k^{q_k}`.
    Tower,
}

impl FromStr for LiouvilleGrowth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Self::Exp),
            "tower" => Ok(Self::Tower),
            other => Err(Error::InvalidInput(format!("unknown growth {other:?}"))),
        }
    }
}

/// Exact convergents of `[a_0; a_1, ...]`.
///
/// The recursion starts from `(p_{-1}, q_{-1}) = (1, 0)` and
/// `(p_0, q_0) = (a_0, 1)`.
pub fn convergents(pq: &[BigUint]) -> Result<Vec<(BigUint, BigUint)>> {
    let Some(a0) = pq.first() else {
        return Err(Error::InvalidInput("empty continued fraction".into()));
    };
    if let Some(index) = pq.iter().skip(1).position(Zero::is_zero) {
        return Err(Error::NonPositiveQuotient { index: index + 1 });
    }
    let mut out = Vec::with_capacity(pq.len());
    let mut prev = (BigUint::one(), BigUint::zero());
    let mut cur = (a0.clone(), BigUint::one());
    out.push(cur.clone());
    for a in &pq[1..] {
        let next = (a * &cur.0 + &prev.0, a * &cur.1 + &prev.1);
        prev = core::mem::replace(&mut cur, next);
        out.push(cur.clone());
    }
    Ok(out)
}

impl RotationNumber {
    pub fn new(pq: Vec<BigUint>) -> Result<Self> {
        if pq.len() < 2 {
            return Err(Error::InvalidInput(
                "need a_0 and at least one partial quotient".into(),
            ));
        }
        if !pq[0].is_zero() {
            return Err(Error::NonzeroIntegerPart);
        }
        let convergents = convergents(&pq)?;
        Ok(Self {
            pq,
            convergents,
            precision_bits: DEFAULT_PRECISION_BITS,
            capped_at: None,
        })
    }

    pub fn from_quotients(pq: &[u64]) -> Result<Self> {
        Self::new(pq.iter().map(|&a| BigUint::from(a)).collect())
    }

    /// `[0; 1, 1, ..., 1]` with `depth` ones.
    pub fn golden_mean(depth: usize) -> Self {
        let mut pq = vec![1u64; depth.max(1) + 1];
        pq[0] = 0;
        Self::from_quotients(&pq).expect("ones are valid quotients")
    }

    /// Liouville-type number with partial quotients forced by the previous denominator.
    ///
    /// Quotients that would exceed [`LIOUVILLE_CAP_BITS`] bits are replaced by
    /// `2^LIOUVILLE_CAP_BITS` and the first such index is recorded.
    pub fn liouville(depth: usize, growth: LiouvilleGrowth) -> Self {
        let depth = depth.max(2);
        let mut pq = vec![BigUint::zero(), BigUint::one()];
        let (mut q_prev, mut q) = (BigUint::one(), BigUint::one());
        let mut capped_at = None;
        for k in 1..depth {
            let (a, capped) = match growth {
                LiouvilleGrowth::Exp => exp_ceiling(&q),
                LiouvilleGrowth::Tower => self_power(&q),
            };
            if capped && capped_at.is_none() {
                capped_at = Some(k + 1);
            }
            let next = &a * &q + &q_prev;
            q_prev = core::mem::replace(&mut q, next);
            pq.push(a);
        }
        let mut r = Self::new(pq).expect("builder produces positive quotients");
        r.capped_at = capped_at;
        r
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    /// Bits of precision consumers should read `α` at.
    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Index of the first quotient truncated by the Liouville cap, if any.
    pub fn capped_at(&self) -> Option<usize> {
        self.capped_at
    }

    pub fn partial_quotients(&self) -> &[BigUint] {
        &self.pq
    }

    pub fn convergents(&self) -> &[(BigUint, BigUint)] {
        &self.convergents
    }

    /// Largest stored convergent index `K`.
    pub fn depth(&self) -> usize {
        self.pq.len() - 1
    }

    pub fn p(&self, k: usize) -> Result<&BigUint> {
        self.convergent(k).map(|(p, _)| p)
    }

    pub fn q(&self, k: usize) -> Result<&BigUint> {
        self.convergent(k).map(|(_, q)| q)
    }

    fn convergent(&self, k: usize) -> Result<&(BigUint, BigUint)> {
        self.convergents.get(k).ok_or(Error::DepthExceeded {
            requested: k,
            depth: self.depth(),
        })
    }

    /// `q_k` as `u64` when it fits.
    pub fn q_u64(&self, k: usize) -> Result<Option<u64>> {
        Ok(self.q(k)?.to_u64())
    }

    /// `α = p_K / q_K`, rounded to the precision of `T`.
    pub fn value<T: Real>(&self) -> T {
        let (p, q) = self.convergents.last().expect("non-empty");
        T::from_ratio(p, q)
    }

    /// `e^{2πiα}` at the precision of `T`.
    pub fn multiplier<T: Real>(&self) -> Complex<T> {
        turn(&self.value::<T>())
    }

    /// `Σ_{k=0}^{K-1} ln(q_{k+1}) / q_k`.
    pub fn brjuno_sum(&self, terms: usize) -> Result<f64> {
        if terms > self.depth() {
            return Err(Error::DepthExceeded {
                requested: terms,
                depth: self.depth(),
            });
        }
        Ok(self
            .convergents
            .windows(2)
            .take(terms)
            .map(|w| {
                let qk = w[0].1.to_f64().unwrap_or(f64::INFINITY);
                ln_biguint(&w[1].1) / qk
            })
            .sum())
    }

    /// Checks the determinant identity and the approximation bound
    /// `|α - p_k/q_k| < 1/(q_k q_{k+1})` exactly, with `α = p_K/q_K`.
    ///
    /// The bound is attained at `k = K - 1` because `α` is the last convergent.
    pub fn check_invariants(&self) -> bool {
        let (p_last, q_last) = self.convergents.last().expect("non-empty");
        let det_ok = self.convergents.windows(2).enumerate().all(|(k, w)| {
            let (a, b) = (&w[1].0 * &w[0].1, &w[0].0 * &w[1].1);
            // p_{k+1} q_k - p_k q_{k+1} = (-1)^k
            if k % 2 == 0 {
                a == b + 1u32
            } else {
                b == a + 1u32
            }
        });
        // Strict for k < K - 1; equality at k = K - 1 since α is p_K/q_K itself.
        let last = self.depth() - 1;
        let approx_ok = self.convergents.windows(2).enumerate().all(|(k, w)| {
            let (p, q) = &w[0];
            let q_next = &w[1].1;
            let lhs = p_last * q;
            let rhs = p * q_last;
            let gap = if lhs > rhs { lhs - rhs } else { rhs - lhs };
            let scaled = gap * q_next;
            if k == last {
                scaled == *q_last
            } else {
                scaled < *q_last
            }
        });
        det_ok && approx_ok
    }

    /// Fractional turns `m α mod 1` for `m = 0..=q_k`, computed exactly from
    /// `p_K/q_K` and rounded once.
    pub fn orbit_turns(&self, k: usize) -> Result<Vec<f64>> {
        let qk = self
            .q(k)?
            .to_u64()
            .filter(|&q| q <= MAX_ORBIT_DENOMINATOR)
            .ok_or(Error::DenominatorTooLarge { index: k })?;
        let (p, q) = self.convergents.last().expect("non-empty");
        let mut num = BigUint::zero();
        let mut out = Vec::with_capacity(qk as usize + 1);
        for _ in 0..=qk {
            out.push(f64::from_ratio(&num, q));
            num += p;
            if num >= *q {
                num -= q;
            }
        }
        Ok(out)
    }

    /// Covering radius of the first `q_k + 1` rotation iterates of `w` on
    /// the circle `|z| = |w|`.
    ///
    /// The circle is sampled at `16 q_k` points. Returns
    /// [`Error::NetBoundViolated`] when the gap exceeds `4π|w|/q_k`.
    pub fn rotation_net_gap(&self, k: usize, w: Complex<f64>) -> Result<f64> {
        let radius = w.norm();
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput("rotation net needs w != 0".into()));
        }
        let mut turns = self.orbit_turns(k)?;
        let qk = (turns.len() - 1) as f64;
        turns.sort_by(f64::total_cmp);
        turns.dedup();
        let samples = 16 * (turns.len() - 1).max(1);
        // Orbit turns are relative to arg(w); sampling starts at w.
        let mut worst: f64 = 0.0;
        for j in 0..samples {
            let s = j as f64 / samples as f64;
            worst = worst.max(circular_distance(&turns, s));
        }
        let gap = 2.0 * radius * libm::sin(PI * worst);
        let bound = 4.0 * PI * radius / qk;
        if gap > bound {
            return Err(Error::NetBoundViolated { gap, bound });
        }
        Ok(gap)
    }
}

/// Distance in turns from `s` to the nearest element of the sorted list.
fn circular_distance(sorted: &[f64], s: f64) -> f64 {
    let i = sorted.partition_point(|&t| t < s);
    let after = sorted.get(i).copied().unwrap_or(sorted[0] + 1.0);
    let before = if i == 0 {
        sorted[sorted.len() - 1] - 1.0
    } else {
        sorted[i - 1]
    };
    (after - s).min(s - before)
}

/// Smallest convenient integer `>= e^q`, with a cap flag.
fn exp_ceiling(q: &BigUint) -> (BigUint, bool) {
    let cap = || (BigUint::one() << LIOUVILLE_CAP_BITS, true);
    let Some(qf) = q.to_f64() else { return cap() };
    if qf <= 700.0 {
        // Inflate past the rounding error of exp before taking the ceiling.
        let v = libm::ceil(libm::exp(qf) * (1.0 + 1e-13));
        let mut n = BigUint::from(1u32);
        if v > 1.0 {
            n = float_to_biguint(v);
        }
        return (n, false);
    }
    let bits = libm::ceil(qf * core::f64::consts::LOG2_E) as u64 + 1;
    if bits > LIOUVILLE_CAP_BITS {
        return cap();
    }
    (BigUint::one() << bits, false)
}

fn self_power(q: &BigUint) -> (BigUint, bool) {
    let Some(qs) = q.to_u32() else {
        return (BigUint::one() << LIOUVILLE_CAP_BITS, true);
    };
    if qs as f64 * libm::log2(qs.max(1) as f64) > LIOUVILLE_CAP_BITS as f64 {
        return (BigUint::one() << LIOUVILLE_CAP_BITS, true);
    }
    (q.pow(qs), false)
}

fn float_to_biguint(v: f64) -> BigUint {
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    if exp >= 0 {
        BigUint::from(mant) << exp as u64
    } else {
        BigUint::from(mant >> (-exp) as u64)
    }
}

impl FromStr for RotationNumber {
    type Err = Error;

    /// Parses a comma-separated list `0,a_1,a_2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let pq = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigUint>()
                    .map_err(|_| Error::InvalidInput(format!("bad partial quotient {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pq)
    }
}
