//! Convergent probe: does the forward orbit of an invariant compact meet a
//! shrinking ball `B_n` around `z_n`?
//!
//! For each convergent `p_k/q_k` the probe takes the first `z_n` with
//! `|z_n| < q_k^{-1/(d+1)}`, a point `w` of the compact on the circle
//! `|z| = |z_n|`, the rotation power `λ^m w` (`m <= q_k`) closest to `z_n`,
//! and checks whether `f^m(w)` lands in `B_n`. Rotation nets of mesh
//! `~ |z_n| / q_k` make this succeed once `q_k` is large, provided the
//! radii of `B_n` are at least a fixed multiple of `|z_n|^{d+1}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex;

use crate::compacta::CompactApprox;
use crate::error::{Error, Result};
use crate::fit::median;
use crate::normal_form::ensure_reduced;
use crate::rotation::RotationNumber;
use crate::scalar::{from_c64, to_c64, Real};
use crate::series::TruncatedGerm;

/// Largest `q_k` the exhaustive search over `m` accepts.
pub const MAX_PROBE_DENOMINATOR: u64 = 100_000;

/// Floor used for the ball-radius hypothesis: the smallest
/// `radius_n / |z_n|^{d+1}` must be at least this fraction of the median.
pub const HYPOTHESIS_FLOOR: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    /// Degree `d` in the ball scale `|z_n|^{d+1}`.
    pub d: usize,
    /// Order `N` the germ is reduced to; at least `2d + 3`.
    pub n: usize,
    /// Convergent indices to probe, ascending.
    pub convergents: Vec<usize>,
    /// Failures at indices `<= k0` do not fail the report.
    pub k0: usize,
    pub reduced_tol: f64,
}

impl ProbeConfig {
    /// `N = 2d + 5`.
    pub fn new(d: usize, convergents: Vec<usize>) -> Self {
        Self {
            d,
            n: 2 * d + 5,
            convergents,
            k0: 1,
            reduced_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOutcome {
    pub k: usize,
    pub q: u64,
    /// First index with `|z_n| < q^{-1/(d+1)}`.
    pub n: usize,
    pub z_n: Complex<f64>,
    pub radius: f64,
    /// Point of the compact on `|z| = |z_n|`.
    pub w: Complex<f64>,
    /// Power minimizing `|z_n - λ^m w|`.
    pub m: u64,
    /// `|z_n - λ^m w|`.
    pub rotation_gap: f64,
    /// `f^m(w)`.
    pub landed: Complex<f64>,
    /// `|f^m(w) - z_n|`.
    pub distance: f64,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub outcomes: Vec<ProbeOutcome>,
    pub k0: usize,
    /// `min |z_{n+1}| / |z_n|`.
    pub epsilon: f64,
    /// `min radius_n / |z_n|^{d+1}`.
    pub radius_constant: f64,
    /// The radii stay above a fixed multiple of `|z_n|^{d+1}` (see [`HYPOTHESIS_FLOOR`]).
    pub hypothesis_ok: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Runs the probe. `zn` and `radii` are index-aligned; the compact must be
/// in the coordinates of `f`.
pub fn verify_probe<T: Real>(
    f: &TruncatedGerm<T>,
    alpha: &RotationNumber,
    compact: &CompactApprox,
    zn: &[Complex<f64>],
    radii: &[f64],
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let d = config.d;
    if d == 0 {
        return Err(Error::InvalidInput("degree d must be at least 1".into()));
    }
    if config.n < 2 * d + 3 {
        return Err(Error::InvalidInput(format!(
            "reduction order {} is below 2d + 3 = {}",
            config.n,
            2 * d + 3
        )));
    }
    ensure_reduced(f, config.n, config.reduced_tol)?;
    if zn.is_empty() || zn.len() != radii.len() {
        return Err(Error::InvalidInput("zn and radii must be non-empty and of equal length".into()));
    }
    if zn.iter().any(|z| !(z.norm() > 0.0)) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput("zn must be nonzero and radii positive".into()));
    }
    let epsilon = zn
        .windows(2)
        .map(|w| w[1].norm() / w[0].norm())
        .fold(f64::INFINITY, f64::min);
    if epsilon == 0.0 {
        return Err(Error::InvalidInput("zn ratio |z_(n+1)|/|z_n| has no positive floor".into()));
    }
    let ratios: Vec<f64> = zn
        .iter()
        .zip(radii)
        .map(|(z, &r)| r / libm::pow(z.norm(), (d + 1) as f64))
        .collect();
    let radius_constant = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hypothesis_ok = median(&ratios).is_some_and(|m| radius_constant >= HYPOTHESIS_FLOOR * m);

    let lam = alpha.multiplier::<T>();
    let mut outcomes = Vec::with_capacity(config.convergents.len());
    for &k in &config.convergents {
        let q = alpha
            .q_u64(k)?
            .filter(|&q| q <= MAX_PROBE_DENOMINATOR)
            .ok_or(Error::DenominatorTooLarge { index: k })?;
        let threshold = libm::pow(q as f64, -1.0 / (d + 1) as f64);
        let n = zn.iter().position(|z| z.norm() < threshold).ok_or_else(|| {
            Error::InvalidInput(format!("no z_n below q_{k}^(-1/(d+1)) = {threshold:.3e}"))
        })?;
        let z = zn[n];
        let w = circle_point(compact, z)?;
        outcomes.push(probe_once(f, &lam, k, q, n, z, radii[n], w));
    }
    let pass = outcomes.iter().filter(|o| o.k > config.k0).all(|o| o.success);
    let mut notes = Vec::new();
    if !hypothesis_ok {
        notes.push(format!(
            "ball radii shrink faster than |z_n|^{}: min ratio {radius_constant:.3e} below {HYPOTHESIS_FLOOR} x median; failures reflect the hypothesis, not the construction",
            d + 1
        ));
    }
    Ok(ProbeReport {
        outcomes,
        k0: config.k0,
        epsilon,
        radius_constant,
        hypothesis_ok,
        pass,
        notes,
    })
}

#[allow(clippy::too_many_arguments)]
fn probe_once<T: Real>(
    f: &TruncatedGerm<T>,
    lam: &Complex<T>,
    k: usize,
    q: u64,
    n: usize,
    z: Complex<f64>,
    radius: f64,
    w: Complex<f64>,
) -> ProbeOutcome {
    let target = from_c64::<T>(z);
    let start = from_c64::<T>(w);
    let mut rotated = start.clone();
    let (mut best_m, mut best) = (0u64, (&target - &rotated).norm_sqr().to_f64());
    for m in 1..=q {
        rotated = lam * &rotated;
        let gap = (&target - &rotated).norm_sqr().to_f64();
        if gap < best {
            best = gap;
            best_m = m;
        }
    }
    let mut cur = start;
    for _ in 0..best_m {
        cur = f.evaluate(&cur);
    }
    let landed = to_c64(&cur);
    let distance = (landed - z).norm();
    ProbeOutcome {
        k,
        q,
        n,
        z_n: z,
        radius,
        w,
        m: best_m,
        rotation_gap: libm::sqrt(best),
        landed,
        distance,
        success: distance <= radius,
    }
}

/// A point of the compact on `|z| = |z_n|`, as far in angle from `z_n`
/// as the compact allows, so the rotation search has to do the work.
fn circle_point(compact: &CompactApprox, z: Complex<f64>) -> Result<Complex<f64>> {
    let rho = z.norm();
    let half_diag = compact.grid.cell() * core::f64::consts::FRAC_1_SQRT_2;
    let target = z.arg();
    compact
        .centers()
        .filter(|c| (c.norm() - rho).abs() <= half_diag && c.norm() > 0.0)
        .map(|c| {
            let mut sep = (c.arg() - target).rem_euclid(TAU);
            if sep > PI {
                sep = TAU - sep;
            }
            (sep, c.arg())
        })
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)))
        .map(|(_, theta)| Complex::from_polar(rho, theta))
        .ok_or(Error::CompactMissesCircle { radius: rho })
}
