//! Small-divisor normal forms and formal commutation checks.
//!
//! For `f(z) = λz + a_2 z^2 + ...` with `|λ| = 1`, the change of variables
//! `φ(w) = w + h_2 w^2 + ...` with `φ^{-1} ∘ f ∘ φ = λw + O(w^N)` solves
//!
//! ```text
//! h_k (λ^k - λ) = Σ_{j=2}^{k} a_j (φ^j)_k,    k = 2, ..., N - 1.
//! ```
//!
//! All of this is formal: success to order `N` says nothing about whether
//! the full series converges.

use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};
use crate::series::{PowerTable, TruncatedGerm, DEFAULT_TOL};

/// Attached to every normal-form report.
pub const FORMAL_NOTE: &str = "formal reduction to truncation order only; \
    it does not decide whether the germ is linearizable";

/// Tolerance on `||λ| - 1|`.
pub const INDIFFERENCE_TOL: f64 = 1e-9;

/// Thresholds for the divisors `|λ^k - λ| = |λ^{k-1} - 1|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivisorPolicy {
    /// Below this the multiplier is treated as a root of unity and the recursion refuses.
    pub resonance: f64,
    /// Below this (and above `resonance`) the caller must retry at higher precision.
    pub floor: f64,
}

impl DivisorPolicy {
    /// Hardware doubles treat anything below `1e-12` as resonant. Extended
    /// backends only call exact zero resonant and ask for more precision
    /// once fewer than 24 significant bits would survive the division.
    pub fn for_precision<T: Real>() -> Self {
        if T::BITS <= 53 {
            Self {
                resonance: 1e-12,
                floor: 1e-12,
            }
        } else {
            Self {
                resonance: 0.0,
                floor: libm::ldexp(1.0, -(T::BITS as i32 - 24)),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormResult<T: Real = f64> {
    /// Tangent-to-identity change of variables.
    pub phi: TruncatedGerm<T>,
    /// `φ^{-1} ∘ f ∘ φ`, equal to `λz + O(z^N)`.
    pub reduced: TruncatedGerm<T>,
    /// `|λ^k - λ|` for `k = 2..N-1`.
    pub small_divisors: Vec<f64>,
    /// `N`: the reduced germ agrees with `λz` below degree `N`.
    pub order_achieved: usize,
    /// Largest `|reduced_k|` over `k = 2..N-1`.
    pub residual: f64,
}

impl<T: Real> NormalFormResult<T> {
    pub fn note(&self) -> &'static str {
        FORMAL_NOTE
    }

    /// Smallest recorded divisor and its power `k`.
    pub fn smallest_divisor(&self) -> Option<(usize, f64)> {
        self.small_divisors
            .iter()
            .enumerate()
            .map(|(i, &d)| (i + 2, d))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Conjugates `f` to `λz + O(z^n)`; `n` may be at most `order(f) + 1`.
pub fn reduce_to_order<T: Real>(f: &TruncatedGerm<T>, n: usize) -> Result<NormalFormResult<T>> {
    reduce_with_policy(f, n, DivisorPolicy::for_precision::<T>())
}

/// Formal linearization through the full truncation order.
pub fn linearize<T: Real>(f: &TruncatedGerm<T>) -> Result<NormalFormResult<T>> {
    reduce_to_order(f, f.order() + 1)
}

pub fn reduce_with_policy<T: Real>(
    f: &TruncatedGerm<T>,
    n: usize,
    policy: DivisorPolicy,
) -> Result<NormalFormResult<T>> {
    let order = f.order();
    if n > order + 1 || n < 2 {
        return Err(Error::ReductionOrder {
            requested: n,
            order,
        });
    }
    let lam = f.multiplier().clone();
    let modulus = cabs(&lam).to_f64();
    if (modulus - 1.0).abs() > INDIFFERENCE_TOL {
        return Err(Error::NotIndifferent(modulus));
    }

    // Powers λ^k and divisors λ^k - λ for k = 2..n-1.
    let mut divisors: Vec<Complex<T>> = Vec::with_capacity(n.saturating_sub(2));
    let mut small_divisors = Vec::with_capacity(n.saturating_sub(2));
    let mut power = lam.clone();
    for k in 2..n {
        power = &power * &lam;
        let d = &power - &lam;
        let size = cabs(&d).to_f64();
        if size <= policy.resonance {
            return Err(Error::Resonant { k: k - 1, value: size });
        }
        if size < policy.floor {
            return Err(Error::DivisorUnderflow {
                k,
                value: size,
                floor: policy.floor,
            });
        }
        small_divisors.push(size);
        divisors.push(d);
    }

    let mut table = PowerTable::new(order, f.degree());
    table.push(Complex::one());
    for k in 2..=order {
        if k >= n {
            table.push(Complex::zero());
            continue;
        }
        table.fill_column(k);
        let mut rhs: Complex<T> = Complex::zero();
        for j in 2..=f.degree().min(k) {
            rhs = &rhs + &(&f.coeffs()[j - 1] * table.get(j, k));
        }
        table.push(rhs / &divisors[k - 2]);
    }
    let phi = TruncatedGerm::new(table.series())?.with_tag("normal-form-phi");
    let reduced = phi.invert()?.compose(&f.compose(&phi));
    // The multiplier is carried over exactly; composition only rounds it.
    let mut coeffs = reduced.coeffs().to_vec();
    coeffs[0] = lam;
    let reduced = TruncatedGerm::new(coeffs)?.with_tag("normal-form");
    let residual = reduced.max_coeff(2, n - 1);
    Ok(NormalFormResult {
        phi,
        reduced,
        small_divisors,
        order_achieved: n,
        residual,
    })
}

/// Checks that `f = λz + O(z^n)`, i.e. coefficients `2..n-1` are below `tol`.
pub fn ensure_reduced<T: Real>(f: &TruncatedGerm<T>, n: usize, tol: f64) -> Result<()> {
    for k in 2..n.min(f.order() + 1) {
        let value = cabs(&f.coeff(k)).to_f64();
        if value > tol {
            return Err(Error::NotReduced { index: k, value });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommutationVerdict<T: Real = f64> {
    /// The commutator is the identity through the truncation order.
    Commute { order: usize },
    /// First coefficient of `[f, g] - id` above tolerance.
    Obstruction { d: usize, c_d: Complex<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutationReport<T: Real = f64> {
    pub commutator: TruncatedGerm<T>,
    pub verdict: CommutationVerdict<T>,
    /// `|[f, g]'(0) - 1|`.
    pub multiplier_defect: f64,
    /// `|[f, g]_k - δ_{k1}| / scale_k` for `k = 1..N`.
    pub relative_deviation: Vec<f64>,
    pub tol: f64,
}

impl<T: Real> CommutationReport<T> {
    pub fn commutes(&self) -> bool {
        matches!(self.verdict, CommutationVerdict::Commute { .. })
    }

    /// Largest relative deviation from the identity.
    pub fn max_deviation(&self) -> f64 {
        self.relative_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Computes `[f, g] = f ∘ g ∘ f^{-1} ∘ g^{-1}` and its first obstruction to
/// being the identity.
///
/// Coefficient `k` is compared against `tol · scale_k`, where `scale_k` is
/// the largest degree-`k` coefficient among `f, g, f^{-1}, g^{-1}` (at
/// least 1). Inverse coefficients grow geometrically, and rounding in the
/// commutator grows with them.
pub fn formal_commutation_check<T: Real>(
    f: &TruncatedGerm<T>,
    g: &TruncatedGerm<T>,
    tol: f64,
) -> Result<CommutationReport<T>> {
    let fi = f.invert()?;
    let gi = g.invert()?;
    let commutator = f.compose(&g.compose(&fi.compose(&gi)));
    let one = Complex::<T>::one();
    let multiplier_defect = cabs(&(commutator.multiplier() - one.clone())).to_f64();
    let relative_deviation: Vec<f64> = (1..=commutator.order())
        .map(|k| {
            let scale = [f, g, &fi, &gi]
                .iter()
                .map(|h| cabs(&h.coeff(k)).to_f64())
                .fold(1.0, f64::max);
            let mut c = commutator.coeff(k);
            if k == 1 {
                c = c - one.clone();
            }
            cabs(&c).to_f64() / scale
        })
        .collect();
    let verdict = match relative_deviation
        .iter()
        .skip(1)
        .position(|&dev| dev > tol)
    {
        None => CommutationVerdict::Commute {
            order: commutator.order(),
        },
        Some(i) => CommutationVerdict::Obstruction {
            d: i + 1,
            c_d: commutator.coeff(i + 2),
        },
    };
    Ok(CommutationReport {
        commutator,
        verdict,
        multiplier_defect,
        relative_deviation,
        tol,
    })
}

/// [`formal_commutation_check`] at the default tolerance.
pub fn commutation_check<T: Real>(
    f: &TruncatedGerm<T>,
    g: &TruncatedGerm<T>,
) -> Result<CommutationReport<T>> {
    formal_commutation_check(f, g, DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::{LiouvilleGrowth, RotationNumber};
    use crate::scalar::{turn, Dd, Mp};
    use crate::series::testing::random_germ;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn golden() -> Complex<f64> {
        RotationNumber::golden_mean(40).multiplier::<f64>()
    }

    fn quad(lam: Complex<f64>, order: usize) -> TruncatedGerm<f64> {
        TruncatedGerm::from_terms(order, &[(1, lam), (2, c(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn rotation_is_fixed() {
        let f = TruncatedGerm::linear(golden(), 10).unwrap();
        let nf = linearize(&f).unwrap();
        assert_eq!(nf.phi, TruncatedGerm::identity(10).unwrap().with_tag("normal-form-phi"));
        assert!(nf.reduced.distance(&f) == 0.0);
    }

    #[test]
    fn second_coefficient_by_hand() {
        // φ(w) = w + h w^2: f(φ(w)) = λw + (λh + a_2) w^2 + ..., φ(λw) = λw + hλ^2 w^2.
        let lam = golden();
        let a2 = c(0.7, -0.3);
        let f = TruncatedGerm::from_terms(3, &[(1, lam), (2, a2)]).unwrap();
        let nf = reduce_to_order(&f, 3).unwrap();
        let h2 = a2 / (lam * lam - lam);
        assert!((nf.phi.coeff(2) - h2).norm() < 1e-15);
        assert!(nf.reduced.coeff(2).norm() < 1e-14);
        assert_eq!(nf.reduced.multiplier(), &lam);
    }

    #[test]
    fn quadratic_golden_order_12() {
        let f = quad(golden(), 12);
        let nf = reduce_to_order(&f, 12).unwrap();
        assert!(nf.residual < 1e-9);
        assert_eq!(nf.order_achieved, 12);
        assert_eq!(nf.small_divisors.len(), 10);
        let back = nf.phi.conjugate(&nf.reduced).unwrap();
        assert!(back.distance(&f) < 1e-8);
    }

    #[test]
    fn linearize_golden_quadratic() {
        let lam = golden();
        let nf = linearize(&quad(lam, 25)).unwrap();
        assert!((nf.phi.coeff(2) - c(1.0, 0.0) / (lam * lam - lam)).norm() < 1e-14);
        assert!(nf.phi.coeffs().iter().all(|h| h.norm().is_finite()));
        // |h_k| grows to ~1e9 by k = 25; double rounding leaves ~1e-4 in the
        // top reduced coefficients, double-double does not.
        let lam_dd = RotationNumber::golden_mean(40).multiplier::<Dd>();
        let one = Complex::new(Dd::one(), Dd::zero());
        let f_dd = TruncatedGerm::from_terms(25, &[(1, lam_dd), (2, one)]).unwrap();
        let nf_dd = linearize(&f_dd).unwrap();
        assert!(nf_dd.reduced.max_coeff(2, 25) < 1e-9);
        assert!(nf_dd.phi.cast::<f64>().distance(&nf.phi) < 1e-6 * nf.phi.max_coeff(2, 25));
    }

    #[test]
    fn quadratic_round_trip_order_15() {
        let f = quad(golden(), 15);
        let nf = reduce_to_order(&f, 15).unwrap();
        assert!(nf.residual < 1e-9);
        assert!(nf.phi.conjugate(&nf.reduced).unwrap().distance(&f) < 1e-8);
    }

    #[test]
    fn order_bounds() {
        let f = quad(golden(), 6);
        assert!(matches!(reduce_to_order(&f, 8), Err(Error::ReductionOrder { .. })));
        let off = TruncatedGerm::from_terms(4, &[(1, c(1.1, 0.0))]).unwrap();
        assert!(matches!(linearize(&off), Err(Error::NotIndifferent(_))));
    }

    #[test]
    fn resonant_multiplier_refused() {
        let f = quad(turn(&0.2f64), 10);
        match reduce_to_order(&f, 10) {
            Err(Error::Resonant { k, .. }) => assert_eq!(k, 5),
            other => panic!("{other:?}"),
        }
        // λ = 1/5 turn only resonates at k - 1 = 5, so order 6 is fine.
        assert!(reduce_to_order(&f, 6).is_ok());
    }

    #[test]
    fn liouville_needs_more_than_256_bits() {
        // q_3 = 221, so |λ^222 - λ| = |λ^221 - 1| ≈ 2π/q_4 ≈ 3e-98.
        let alpha = RotationNumber::liouville(4, LiouvilleGrowth::Exp);
        let lam256 = alpha.multiplier::<Mp<256>>();
        let one = Complex::new(Mp::<256>::one(), Mp::zero());
        let f = TruncatedGerm::from_terms(223, &[(1, lam256), (2, one)]).unwrap();
        match linearize(&f) {
            Err(Error::DivisorUnderflow { k, value, .. }) => {
                assert_eq!(k, 222);
                assert!(value < 1e-30);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn liouville_divisor_recorded_at_512_bits() {
        let alpha = RotationNumber::liouville(4, LiouvilleGrowth::Exp);
        let lam = alpha.multiplier::<Mp<512>>();
        let one = Complex::new(Mp::<512>::one(), Mp::zero());
        let f = TruncatedGerm::from_terms(223, &[(1, lam), (2, one)]).unwrap();
        let nf = reduce_to_order(&f, 223).unwrap();
        let (k, d) = nf.smallest_divisor().unwrap();
        assert_eq!(k, 222);
        assert!(d < 1e-30 && d > 0.0);
        // Oracle: 2π q_3 |α - p_3/q_3| with |α - p_3/q_3| ≈ 1/(q_3 q_4).
        let q4 = num_traits::ToPrimitive::to_f64(alpha.q(4).unwrap()).unwrap();
        let predicted = 2.0 * core::f64::consts::PI / q4;
        assert!((d / predicted - 1.0).abs() < 1e-2);
    }

    #[test]
    fn ensure_reduced_detects_terms() {
        let f = TruncatedGerm::from_terms(6, &[(1, golden()), (5, c(1.0, 0.0))]).unwrap();
        assert!(ensure_reduced(&f, 5, 1e-9).is_ok());
        assert_eq!(
            ensure_reduced(&f, 6, 1e-9),
            Err(Error::NotReduced { index: 5, value: 1.0 })
        );
    }

    #[test]
    fn powers_commute() {
        let f = quad(golden(), 20);
        let ff = f.compose(&f);
        let fff = ff.compose(&f);
        let report = commutation_check(&ff, &fff).unwrap();
        assert!(report.commutes(), "{:?}", report.verdict);
        assert!(commutation_check(&f, &ff).unwrap().commutes());
    }

    #[test]
    fn irrational_rotation_against_parabolic() {
        // Oracle at order 3 for f = λz + z^2, g = z + z^2:
        // [f, g] = z + (1 - λ)/λ z^2 + O(z^3), obtained by composing the
        // explicit inverses f^{-1} = z/λ - z^2/λ^3, g^{-1} = z - z^2.
        let lam = golden();
        let f = quad(lam, 4);
        let g = quad(c(1.0, 0.0), 4);
        let report = commutation_check(&f, &g).unwrap();
        match report.verdict {
            CommutationVerdict::Obstruction { d, c_d } => {
                assert_eq!(d, 1);
                let expect = (c(1.0, 0.0) - lam) / lam;
                assert!((c_d - expect).norm() < 1e-14, "{c_d} vs {expect}");
            }
            other => panic!("{other:?}"),
        }
        assert!(report.multiplier_defect < 1e-15);
    }

    #[test]
    fn generic_conjugates_do_not_commute() {
        let f = quad(golden(), 10);
        let phi = TruncatedGerm::from_terms(10, &[(1, c(1.0, 0.0)), (2, c(0.2, 0.0))]).unwrap();
        let g = phi.conjugate(&f).unwrap();
        assert!(!commutation_check(&f, &g).unwrap().commutes());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn round_trip_recovers_input(seed in 0u64..10_000, n in 3usize..=15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random_germ(&mut rng, 15);
            let mut coeffs = f.coeffs().to_vec();
            coeffs[0] = golden();
            f = TruncatedGerm::new(coeffs).unwrap();
            let nf = reduce_to_order(&f, n).unwrap();
            prop_assert_eq!(nf.reduced.multiplier(), f.multiplier());
            prop_assert!(nf.residual < 1e-9 * (1.0 + nf.phi.max_coeff(2, 15).powi(2)));
            let back = nf.phi.conjugate(&nf.reduced).unwrap();
            let scale = 1.0 + nf.phi.max_coeff(2, 15).max(nf.phi.invert().unwrap().max_coeff(2, 15));
            prop_assert!(back.distance(&f) < 1e-8 * scale);
            prop_assert!(nf.small_divisors.iter().all(|&d| d > 1e-12));
        }
    }
}
