//! Orbit iteration near an indifferent fixed point and the iterate-count and
//! rotation-shadowing harnesses.
//!
//! For `f(z) = λz + O(z^N)`, orbits starting at `|z| = r` stay within `2r`
//! for at least `C r^{-(N-1)}` steps, and for that long
//! `|f^k(z) - λ^k z| <= k C_2 r^N`. Both are one-sided: the harnesses measure
//! exit times and shadowing errors and compare their scaling with these
//! exponents.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fit::{fit_log_log, median};
use crate::normal_form::ensure_reduced;
use crate::report::{Sample, VerificationReport};
use crate::rotation::RotationNumber;
use crate::scalar::{cabs, from_c64, to_c64, Real};
use crate::series::{TruncatedGerm, DEFAULT_TOL};

/// How an orbit ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    /// First `k` with `|f^k(z)| > R_exit`.
    At(u64),
    /// Still inside after `k_max` steps.
    Survived,
}

impl Exit {
    pub fn steps(self) -> Option<u64> {
        match self {
            Exit::At(k) => Some(k),
            Exit::Survived => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord<T: Real = f64> {
    pub start: Complex<T>,
    /// `f^0(z), f^1(z), ...` up to and including the exit point.
    pub points: Vec<Complex<T>>,
    pub exit: Exit,
    pub r_exit: f64,
}

impl<T: Real> OrbitRecord<T> {
    /// Checks `|f^k(z)| <= R_exit` for every `k` before the exit.
    pub fn envelope_holds(&self) -> bool {
        let before = match self.exit {
            Exit::At(k) => k as usize,
            Exit::Survived => self.points.len(),
        };
        self.points[..before]
            .iter()
            .all(|p| cabs(p).to_f64() <= self.r_exit)
    }
}

/// Iterates `f` from `z` until `|f^k(z)| > r_exit` or `k = k_max`, keeping the orbit.
pub fn iterate_until_exit<T: Real>(
    f: &TruncatedGerm<T>,
    z: Complex<T>,
    r_exit: f64,
    k_max: u64,
) -> Result<OrbitRecord<T>> {
    if cabs(&z).to_f64() >= r_exit {
        return Err(Error::InvalidInput(format!(
            "start |z| = {} is not inside R_exit = {r_exit}",
            cabs(&z).to_f64()
        )));
    }
    let mut points = alloc::vec![z.clone()];
    let mut cur = z.clone();
    let limit = r_exit * r_exit;
    let mut exit = Exit::Survived;
    for k in 1..=k_max {
        cur = f.evaluate(&cur);
        points.push(cur.clone());
        if cur.norm_sqr().to_f64() > limit {
            exit = Exit::At(k);
            break;
        }
    }
    Ok(OrbitRecord {
        start: z,
        points,
        exit,
        r_exit,
    })
}

/// Exit time and the largest `|f^k(z)| / |z|` seen before it, without storing the orbit.
pub fn exit_time<T: Real>(f: &TruncatedGerm<T>, z: &Complex<T>, r_exit: f64, k_max: u64) -> (Exit, f64) {
    let r0 = cabs(z).to_f64();
    let limit = r_exit * r_exit;
    let mut cur = z.clone();
    let mut peak = r0 * r0;
    for k in 1..=k_max {
        cur = f.evaluate(&cur);
        let m = cur.norm_sqr().to_f64();
        if m > limit || !m.is_finite() {
            return (Exit::At(k), libm::sqrt(peak) / r0);
        }
        peak = peak.max(m);
    }
    (Exit::Survived, libm::sqrt(peak) / r0)
}

/// Iterates all starting points in lockstep and returns the first step at
/// which any of them leaves `|z| <= r_exit`, with the largest
/// `|f^k(z)| / |z|` seen before that step.
pub fn first_exit<T: Real>(f: &TruncatedGerm<T>, starts: &[Complex<T>], r_exit: f64, k_max: u64) -> (Option<u64>, f64) {
    let limit = r_exit * r_exit;
    let mut points = starts.to_vec();
    let mut peak: f64 = 1.0;
    let inv_r2: Vec<f64> = starts.iter().map(|z| 1.0 / z.norm_sqr().to_f64()).collect();
    for k in 1..=k_max {
        let mut step_peak: f64 = 0.0;
        let mut exited = false;
        for (p, &s) in points.iter_mut().zip(&inv_r2) {
            *p = f.evaluate(p);
            let m = p.norm_sqr().to_f64();
            if m > limit || !m.is_finite() {
                exited = true;
            } else {
                step_peak = step_peak.max(m * s);
            }
        }
        if exited {
            return (Some(k), libm::sqrt(peak));
        }
        peak = peak.max(step_peak);
    }
    (None, libm::sqrt(peak))
}

/// Points `r e^{2πi(j + offset)/count}`.
pub fn circle_points(r: f64, count: usize, offset: f64) -> impl Iterator<Item = Complex<f64>> {
    (0..count).map(move |j| Complex::from_polar(r, TAU * (j as f64 + offset) / count as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateCountConfig {
    pub samples_per_radius: usize,
    pub k_max: u64,
    pub slope_tolerance: f64,
    /// Fewer exiting radii than this cannot support a fit.
    pub min_radii: usize,
    pub reduced_tol: f64,
}

impl Default for IterateCountConfig {
    fn default() -> Self {
        Self {
            samples_per_radius: 64,
            k_max: 200_000,
            slope_tolerance: 0.3,
            min_radii: 6,
            reduced_tol: DEFAULT_TOL,
        }
    }
}

/// Largest radius at which evaluating the truncated germ is trusted.
pub fn trusted_radius<T: Real>(f: &TruncatedGerm<T>) -> f64 {
    0.25 * f.coefficient_radius()
}

/// Measures `M(r)`, the smallest exit time from `|z| <= 2r` over points on
/// `|z| = r`, and fits `ln M` against `ln r`. Expected slope `-(N - 1)`.
pub fn verify_iterate_count<T: Real>(
    f: &TruncatedGerm<T>,
    n: usize,
    radii: &[f64],
    config: &IterateCountConfig,
) -> Result<VerificationReport> {
    ensure_reduced(f, n, config.reduced_tol)?;
    check_radii(f, radii)?;
    let expected = -((n - 1) as f64);
    let mut report = VerificationReport::new("iterate-count", "exit_time_constant", expected, config.slope_tolerance);
    let mut exits = Vec::new();
    let mut envelope_ok = true;
    let mut peak_ratio: f64 = 0.0;
    let mut c_min = f64::INFINITY;
    for &r in radii {
        let starts: Vec<Complex<T>> = circle_points(r, config.samples_per_radius, 0.5)
            .map(from_c64::<T>)
            .collect();
        let (m_min, peak) = first_exit(f, &starts, 2.0 * r, config.k_max);
        peak_ratio = peak_ratio.max(peak);
        envelope_ok &= peak <= 2.0;
        let constant = m_min.map(|m| m as f64 * libm::pow(r, (n - 1) as f64));
        if let Some(c) = constant {
            c_min = c_min.min(c);
            exits.push((r, m_min.unwrap_or(0) as f64));
        }
        report.samples.push(Sample {
            r,
            m: m_min,
            value: constant,
            ceiling: None,
            pass: true,
        });
    }
    report.sort_samples();
    report.measured_constants.push(("max_envelope_ratio".into(), peak_ratio));
    report.measured_constants.push(("k_max".into(), config.k_max as f64));
    if !envelope_ok {
        report.notes.push("pre-exit iterate left the 2|z| envelope".into());
    }
    if exits.is_empty() {
        report.degenerate = true;
        // Only the rotation itself has M = infinity; otherwise nothing was measured.
        let linear = f.coeffs()[1..].iter().all(|a| to_c64(a).norm_sqr() == 0.0);
        report.pass = envelope_ok && linear;
        report.notes.push(format!(
            "every orbit stayed within 2|z| for {} steps; M is unbounded at this cap",
            config.k_max
        ));
        if !linear {
            report.notes.push("no exit times measured for a nonlinear germ; slope untested".into());
        }
        return Ok(report);
    }
    report.measured_constants.push(("C".into(), c_min));
    report.fitted_slope = fit_log_log(exits.iter().copied()).map(|fit| fit.slope);
    if exits.len() < config.min_radii {
        report.notes.push(format!(
            "only {} of {} radii exited within {} steps; at least {} needed for a fit",
            exits.len(),
            radii.len(),
            config.k_max,
            config.min_radii
        ));
        report.pass = false;
        return Ok(report);
    }
    report.pass = envelope_ok && report.slope_ok();
    Ok(report)
}

fn check_radii<T: Real>(f: &TruncatedGerm<T>, radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive and non-empty".into()));
    }
    let trusted = trusted_radius(f);
    if let Some(&r) = radii.iter().find(|&&r| r > trusted) {
        return Err(Error::InvalidInput(format!(
            "radius {r} exceeds the trusted evaluation radius {trusted:.4}"
        )));
    }
    Ok(())
}

/// `|f^k(z) - λ^k z|` with `λ` read from `alpha` at the precision of `T`.
///
/// Fails if the orbit leaves `|w| <= 2|z|` before step `k`.
pub fn shadowing_error<T: Real>(
    f: &TruncatedGerm<T>,
    alpha: &RotationNumber,
    z: &Complex<T>,
    k: u64,
) -> Result<f64> {
    let lam = alpha.multiplier::<T>();
    Ok(shadowing_errors(f, &lam, z, &[k])?[0])
}

/// Shadowing errors at every step in `ks` (ascending) along one orbit.
pub fn shadowing_errors<T: Real>(
    f: &TruncatedGerm<T>,
    lam: &Complex<T>,
    z: &Complex<T>,
    ks: &[u64],
) -> Result<Vec<f64>> {
    let limit = 2.0 * cabs(z).to_f64();
    let mut orbit = z.clone();
    let mut rotated = z.clone();
    let mut out = Vec::with_capacity(ks.len());
    let mut step = 0u64;
    for &k in ks {
        while step < k {
            orbit = f.evaluate(&orbit);
            rotated = lam * &rotated;
            step += 1;
            if cabs(&orbit).to_f64() > limit {
                return Err(Error::OrbitExited {
                    step: step as usize,
                    wanted: k as usize,
                });
            }
        }
        out.push(cabs(&(&orbit - &rotated)).to_f64());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowingConfig {
    pub samples_per_radius: usize,
    /// Steps `k` at which errors are read; ascending.
    pub ks: Vec<u64>,
    pub slope_tolerance: f64,
    /// Rounding allowance in the ceiling comparison, in units of
    /// `k 2^{-bits} r`: computing `f^k(z) - λ^k z` cancels two numbers of
    /// size `r`, so smaller errors are not resolved.
    pub rounding_ulps: f64,
    pub reduced_tol: f64,
}

impl ShadowingConfig {
    /// About `count` geometrically spaced steps from 1 to `k_max`.
    pub fn geometric(k_max: u64, count: usize) -> Self {
        let mut ks: Vec<u64> = (0..count)
            .map(|i| {
                let t = i as f64 / (count.max(2) - 1) as f64;
                libm::round(libm::pow(k_max as f64, t)) as u64
            })
            .collect();
        ks.dedup();
        Self {
            samples_per_radius: 8,
            ks,
            slope_tolerance: 0.2,
            rounding_ulps: 16.0,
            reduced_tol: DEFAULT_TOL,
        }
    }
}

impl Default for ShadowingConfig {
    fn default() -> Self {
        Self::geometric(1000, 16)
    }
}

/// Calibrates `C_2 = max error/(k r^N)` on one set of circle points, then
/// checks `error <= k C_2 r^N` on a disjoint set and fits `ln error`
/// against `ln k` per starting point. Expected slope 1.
pub fn verify_shadowing<T: Real>(
    f: &TruncatedGerm<T>,
    alpha: &RotationNumber,
    n: usize,
    radii: &[f64],
    config: &ShadowingConfig,
) -> Result<VerificationReport> {
    ensure_reduced(f, n, config.reduced_tol)?;
    check_radii(f, radii)?;
    if config.ks.is_empty() || config.ks.windows(2).any(|w| w[0] >= w[1]) || config.ks[0] == 0 {
        return Err(Error::InvalidInput("ks must be positive and strictly increasing".into()));
    }
    let lam = alpha.multiplier::<T>();
    let nf = n as f64;
    let mut report = VerificationReport::new("shadowing", "shadowing_error", 1.0, config.slope_tolerance);
    let bits = T::BITS.min(alpha.precision_bits());
    report.measured_constants.push(("precision_bits".into(), bits as f64));
    let ulp = libm::ldexp(1.0, -(bits as i32));

    // Calibration on the half-offset points.
    let mut c2: f64 = 0.0;
    for &r in radii {
        for z in circle_points(r, config.samples_per_radius, 0.25) {
            let errs = shadowing_errors(f, &lam, &from_c64::<T>(z), &config.ks)?;
            for (&k, e) in config.ks.iter().zip(errs) {
                c2 = c2.max(e / (k as f64 * libm::pow(r, nf)));
            }
        }
    }
    report.measured_constants.push(("C2".into(), c2));

    let mut slopes = Vec::new();
    for &r in radii {
        for z in circle_points(r, config.samples_per_radius, 0.75) {
            let errs = shadowing_errors(f, &lam, &from_c64::<T>(z), &config.ks)?;
            for (&k, &e) in config.ks.iter().zip(&errs) {
                let ceiling = k as f64 * c2 * libm::pow(r, nf);
                report.samples.push(Sample {
                    r,
                    m: Some(k),
                    value: Some(e),
                    ceiling: Some(ceiling),
                    pass: e <= ceiling + config.rounding_ulps * k as f64 * ulp * r,
                });
            }
            if let Some(fit) = fit_log_log(config.ks.iter().map(|&k| k as f64).zip(errs)) {
                slopes.push(fit.slope);
            }
        }
    }
    report.sort_samples();
    report.fitted_slope = median(&slopes);
    if let (Some(lo), Some(hi)) = (
        slopes.iter().copied().reduce(f64::min),
        slopes.iter().copied().reduce(f64::max),
    ) {
        report.measured_constants.push(("slope_min".into(), lo));
        report.measured_constants.push(("slope_max".into(), hi));
    }
    if c2 == 0.0 {
        report.degenerate = true;
        report.notes.push("all shadowing errors vanish; f agrees with the rotation".to_string());
        report.pass = report.ceilings_ok();
        return Ok(report);
    }
    report.pass = report.ceilings_ok() && report.slope_ok();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::turn;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn model(lam: Complex<f64>, n: usize) -> TruncatedGerm<f64> {
        TruncatedGerm::from_terms(n, &[(1, lam), (n, c(1.0, 0.0))]).unwrap()
    }

    fn golden() -> RotationNumber {
        RotationNumber::golden_mean(40)
    }

    fn radii(from: f64, to: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| from * libm::pow(to / from, i as f64 / (count - 1) as f64))
            .collect()
    }

    #[test]
    fn rotation_never_exits() {
        let f = TruncatedGerm::linear(golden().multiplier::<f64>(), 4).unwrap();
        let rec = iterate_until_exit(&f, c(0.3, 0.1), 2.0 * c(0.3, 0.1).norm(), 5000).unwrap();
        assert_eq!(rec.exit, Exit::Survived);
        assert!(rec.envelope_holds());
        assert_eq!(rec.points.len(), 5001);
    }

    #[test]
    fn doubling_exits_at_once() {
        let f = TruncatedGerm::linear(c(2.0, 0.0), 2).unwrap();
        let rec = iterate_until_exit(&f, c(0.1, 0.0), 0.15, 10).unwrap();
        assert_eq!(rec.exit, Exit::At(1));
        assert_eq!(rec.points[1], c(0.2, 0.0));
        assert!(rec.envelope_holds());
        assert!(iterate_until_exit(&f, c(0.2, 0.0), 0.15, 10).is_err());
    }

    #[test]
    fn orbit_records_consecutive_images() {
        let f = model(golden().multiplier(), 5);
        let rec = iterate_until_exit(&f, c(0.05, 0.0), 0.1, 100).unwrap();
        for w in rec.points.windows(2) {
            assert_eq!(f.evaluate(&w[0]), w[1]);
        }
    }

    #[test]
    fn iterate_count_rotation_is_degenerate_pass() {
        let f = TruncatedGerm::linear(golden().multiplier::<f64>(), 6).unwrap();
        let cfg = IterateCountConfig {
            k_max: 2000,
            ..Default::default()
        };
        let report = verify_iterate_count(&f, 6, &radii(0.1, 0.01, 6), &cfg).unwrap();
        assert!(report.degenerate && report.pass);
        assert!(report.fitted_slope.is_none());
    }

    #[test]
    fn iterate_count_without_exits_fails_for_nonlinear_germ() {
        let f = TruncatedGerm::from_terms(6, &[(1, golden().multiplier()), (6, c(1.0, 0.0))]).unwrap();
        let cfg = IterateCountConfig {
            k_max: 10,
            ..Default::default()
        };
        let report = verify_iterate_count(&f, 6, &radii(0.1, 0.01, 6), &cfg).unwrap();
        assert!(report.degenerate && !report.pass);
    }

    #[test]
    fn iterate_count_rejects_unreduced() {
        let f = TruncatedGerm::from_terms(5, &[(1, golden().multiplier()), (2, c(1.0, 0.0))]).unwrap();
        let err = verify_iterate_count(&f, 5, &[0.05], &Default::default()).unwrap_err();
        assert!(matches!(err, Error::NotReduced { index: 2, .. }));
    }

    #[test]
    fn iterate_count_resonant_control_has_the_predicted_slope() {
        // λ^{N-1} = 1 makes the z^N term accumulate: f^{N-1}(z) = z + (N-1) z^N + ...,
        // so orbits escape after ~ r^{-(N-1)} steps.
        // Exits happen only near the repelling directions of f^{N-1}, so the
        // circle has to be sampled finely enough to come close to them.
        for (n, alpha, samples) in [(3usize, 0.5f64, 64), (5, 0.25, 512)] {
            let f = model(turn(&alpha), n);
            let cfg = IterateCountConfig {
                k_max: 5_000_000,
                samples_per_radius: samples,
                ..Default::default()
            };
            let rs = radii(0.1, 0.03, 6);
            let report = verify_iterate_count(&f, n, &rs, &cfg).unwrap();
            let slope = report.fitted_slope.unwrap();
            assert!(
                (slope + (n - 1) as f64).abs() < 0.3,
                "n = {n}: slope {slope}"
            );
            assert!(report.pass);
            assert!(report.constant("C").unwrap() > 0.0);
        }
    }

    #[test]
    fn shadowing_exact_cases() {
        let alpha = golden();
        let f = TruncatedGerm::linear(alpha.multiplier::<f64>(), 5).unwrap();
        for k in [0, 1, 10, 1000] {
            assert_eq!(shadowing_error(&f, &alpha, &c(0.03, 0.01), k).unwrap(), 0.0);
        }
        let g = model(alpha.multiplier(), 5);
        assert_eq!(shadowing_error(&g, &alpha, &c(0.03, 0.0), 0).unwrap(), 0.0);
        // One step: f(z) - λz = z^5 exactly.
        let e1 = shadowing_error(&g, &alpha, &c(0.03, 0.0), 1).unwrap();
        assert!((e1 / libm::pow(0.03, 5.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shadowing_reports_exit() {
        let alpha = RotationNumber::from_quotients(&[0, 2]).unwrap();
        let f = model(turn(&0.5f64), 3);
        // f∘f(z) = z - 2z^3 + ..., repelling along the imaginary axis.
        let err = shadowing_error(&f, &alpha, &c(0.0, 0.1), 10_000).unwrap_err();
        assert!(matches!(err, Error::OrbitExited { .. }));
    }

    #[test]
    fn shadowing_resonant_control_grows_linearly() {
        // λ = -1, N = 3: f^k(z) - (-1)^k z ≈ ±k z^3 for k r^2 small.
        let alpha = RotationNumber::from_quotients(&[0, 2]).unwrap();
        let f = model(alpha.multiplier(), 3);
        let report = verify_shadowing(&f, &alpha, 3, &[0.01, 0.02], &ShadowingConfig::geometric(200, 12)).unwrap();
        let slope = report.fitted_slope.unwrap();
        assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
        assert!(report.ceilings_ok());
        assert!(report.pass);
    }

    #[test]
    fn shadowing_rotation_is_degenerate() {
        let alpha = golden();
        let f = TruncatedGerm::linear(alpha.multiplier::<f64>(), 5).unwrap();
        let report = verify_shadowing(&f, &alpha, 5, &[0.03], &ShadowingConfig::default()).unwrap();
        assert!(report.degenerate && report.pass);
        assert!(report.samples.iter().all(|s| s.value == Some(0.0)));
    }

    #[test]
    fn shadowing_ceiling_holds_for_golden_model() {
        let alpha = golden();
        let f = model(alpha.multiplier(), 5);
        let report = verify_shadowing(&f, &alpha, 5, &[0.03, 0.05], &ShadowingConfig::default()).unwrap();
        assert!(report.ceilings_ok());
        assert!(report.constant("C2").unwrap() > 0.0);
    }

    #[test]
    fn shadowing_ceiling_allows_rounding_at_tiny_errors() {
        // At r = 0.01 the one-step error |z^6| = 1e-12 is a difference of two
        // numbers of size 0.01, so it carries about 1e-6 relative rounding.
        let alpha = golden();
        let f = model(alpha.multiplier(), 6);
        let radii = [0.01, 0.0215, 0.0464, 0.1];
        let report = verify_shadowing(&f, &alpha, 6, &radii, &ShadowingConfig::geometric(1000, 16)).unwrap();
        assert!(report.ceilings_ok());
    }

    #[test]
    fn shadowing_ceiling_catches_an_undercalibrated_constant() {
        // One step of λz + z^6 + i z^7 misses by r^6 |1 + iz|: 0.9 r^6 at the
        // calibration angle π/2, 1.1 r^6 at the checked angle 3π/2.
        let alpha = golden();
        let f = TruncatedGerm::from_terms(7, &[(1, alpha.multiplier()), (6, c(1.0, 0.0)), (7, c(0.0, 1.0))]).unwrap();
        let config = ShadowingConfig {
            samples_per_radius: 1,
            ks: vec![1],
            ..ShadowingConfig::default()
        };
        let report = verify_shadowing(&f, &alpha, 6, &[0.1], &config).unwrap();
        assert!(!report.ceilings_ok());
        assert!(!report.pass);
    }
}
