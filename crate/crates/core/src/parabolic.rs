//! Germs tangent to the identity, `T(z) = z + c_d z^{d+1} + ...`: petal
//! axes, Fatou coordinates, backward tracking of small disks, and the
//! boundary-distance harness.
//!
//! Fatou coordinates solve `χ(T(z)) = χ(z) + 1`. The formal solution
//! `χ(z) = β log z + Σ_{n >= -d} c_n z^n` (with `c_{-d} = -1/(d c_d)`) is
//! only asymptotic, so it is evaluated far along the orbit:
//! `χ(z) = χ_asym(T^n z) - n` in an attracting petal and
//! `χ(z) = χ_asym(T^{-n} z) + n` in a repelling one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::compacta::{component_of_zero, escape_field, AdmissibleDomain, CompactApprox, GridSpec};
use crate::error::{Error, Result};
use crate::fit::{fit_log_log, median};
use crate::report::{Sample, VerificationReport};
use crate::series::{InverseMap, InverseMode, Tangency, TruncatedGerm, DEFAULT_TOL};

type C64 = Complex<f64>;

/// Default orbit length for Fatou coordinates.
pub const DEFAULT_REFINE_DEPTH: u64 = 1000;

/// Default number of expansion orders beyond the leading term.
pub const DEFAULT_EXPANSION_ORDER: usize = 8;

/// Dominance ratio defining the petal radius.
pub const PETAL_DOMINANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Attracting,
    Repelling,
}

impl core::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attracting" => Ok(Direction::Attracting),
            "repelling" => Ok(Direction::Repelling),
            other => Err(Error::InvalidInput(format!("unknown petal direction '{other}'"))),
        }
    }
}

/// Reads off `(d, c_d)`; the identity has no petals.
pub fn tangency(t: &TruncatedGerm<f64>) -> Result<(usize, C64)> {
    match t.tangency_order(DEFAULT_TOL)? {
        Tangency::Identity => Err(Error::IdentityGerm),
        Tangency::Parabolic { d, c_d } => Ok((d, c_d)),
    }
}

/// Directions `θ` where `c_d e^{i d θ}` is real negative (attracting) or
/// positive (repelling), in `[0, 2π)`.
pub fn axis_angles(d: usize, c_d: C64, direction: Direction) -> Vec<f64> {
    let target = match direction {
        Direction::Attracting => PI,
        Direction::Repelling => 0.0,
    };
    (0..d)
        .map(|j| ((target - c_d.arg() + TAU * j as f64) / d as f64).rem_euclid(TAU))
        .collect()
}

/// Unsigned angle between two directions, in `[0, π]`.
fn angle_between(a: f64, b: f64) -> f64 {
    let s = (a - b).rem_euclid(TAU);
    if s > PI {
        TAU - s
    } else {
        s
    }
}

/// Formal Fatou coordinate `β log z + Σ_{n=-d}^{M} c_n z^n`, `c_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FatouExpansion {
    pub d: usize,
    /// `c_{-d}, ..., c_M`; entry `i` is `c_{i - d}`.
    pub coeffs: Vec<C64>,
    pub log_coeff: C64,
}

impl FatouExpansion {
    /// Solves `χ(T z) - χ(z) - 1 = 0` order by order through `z^{order}`.
    /// `order = 0` keeps the leading term only.
    pub fn solve(t: &TruncatedGerm<f64>, order: usize) -> Result<Self> {
        let (d, c_d) = tangency(t)?;
        // T(z) = z (1 + u(z)), u = c_d z^d + ...
        let len = order + 2 * d + 1;
        let mut u = vec![C64::zero(); len];
        for (j, slot) in u.iter_mut().enumerate().skip(1) {
            *slot = t.coeff(j + 1);
        }
        let log_u = log1p(&u);
        let lo = -(d as i64);
        let mut coeffs = vec![C64::zero(); order + d + 1];
        let mut log_coeff = C64::zero();
        // P_n = (1 + u)^n - 1, cached per solved n.
        let mut powers: Vec<(i64, Vec<C64>)> = Vec::new();
        for m in 0..=(order + d) as i64 {
            let mut rest = if m == 0 { -C64::one() } else { C64::zero() };
            for (n, p) in &powers {
                let j = (m - n) as usize;
                if j < p.len() {
                    rest += coeffs[(n - lo) as usize] * p[j];
                }
            }
            if m > d as i64 && (m as usize) < log_u.len() {
                rest += log_coeff * log_u[m as usize];
            }
            let n = m - d as i64;
            if n == 0 {
                log_coeff = -rest / c_d;
            } else {
                let c = -rest / (c_d * n as f64);
                coeffs[(n - lo) as usize] = c;
                let mut p = exp_series(&log_u.iter().map(|&l| l * n as f64).collect::<Vec<_>>());
                p[0] -= C64::one();
                powers.push((n, p));
            }
        }
        Ok(Self { d, coeffs, log_coeff })
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[0]
    }

    /// Evaluates with the logarithm's branch cut opposite `axis`.
    pub fn evaluate(&self, z: C64, axis: f64) -> C64 {
        let inv = C64::one() / z;
        let mut acc = C64::zero();
        // Negative powers.
        let mut p = C64::one();
        for k in 1..=self.d {
            p *= inv;
            acc += self.coeffs[self.d - k] * p;
        }
        let mut p = C64::one();
        for c in &self.coeffs[self.d + 1..] {
            p *= z;
            acc += c * p;
        }
        if !self.log_coeff.is_zero() {
            let rotated = z * C64::from_polar(1.0, -axis);
            let log = C64::new(z.norm().ln(), axis + rotated.arg());
            acc += self.log_coeff * log;
        }
        acc
    }
}

/// `log(1 + u)` for `u(0) = 0`.
fn log1p(u: &[C64]) -> Vec<C64> {
    let len = u.len();
    let mut l = vec![C64::zero(); len];
    // (1 + u) L' = u'
    for k in 1..len {
        let mut s = u[k] * k as f64;
        for j in 1..k {
            s -= l[j] * u[k - j] * j as f64;
        }
        l[k] = s / k as f64;
    }
    l
}

/// `exp(a)` for `a(0) = 0`.
fn exp_series(a: &[C64]) -> Vec<C64> {
    let len = a.len();
    let mut e = vec![C64::zero(); len];
    e[0] = C64::one();
    for k in 1..len {
        let mut s = C64::zero();
        for j in 1..=k {
            s += a[j] * e[k - j] * j as f64;
        }
        e[k] = s / k as f64;
    }
    e
}

/// Petal data and Fatou coordinate for one direction of a parabolic germ.
#[derive(Clone, Debug)]
pub struct FatouChart {
    pub d: usize,
    pub c_d: C64,
    pub direction: Direction,
    pub axis_angles: Vec<f64>,
    /// Leading coefficient `-1/(d c_d)`.
    pub chi0_scale: C64,
    pub refine_depth: u64,
    /// Largest radius where the leading term dominates the rest of `T(z) - z`.
    pub petal_radius: f64,
    pub expansion: FatouExpansion,
    germ: TruncatedGerm<f64>,
    inverse: InverseMap<f64>,
}

/// Petal axes and Fatou chart of `T` in one direction.
pub fn petal_axes(t: &TruncatedGerm<f64>, direction: Direction) -> Result<FatouChart> {
    FatouChart::new(t, direction, DEFAULT_REFINE_DEPTH, DEFAULT_EXPANSION_ORDER)
}

/// Value of a Fatou coordinate and its Abel-equation residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FatouPoint {
    pub chi: C64,
    /// `χ(T z) - χ(z) - 1` (attracting) or `χ(T^{-1} z) - χ(z) + 1` (repelling).
    pub residual: C64,
}

impl FatouChart {
    pub fn new(t: &TruncatedGerm<f64>, direction: Direction, refine_depth: u64, expansion_order: usize) -> Result<Self> {
        let (d, c_d) = tangency(t)?;
        let expansion = FatouExpansion::solve(t, expansion_order)?;
        let axis_angles = axis_angles(d, c_d, direction);
        let petal_radius = petal_radius(t, d, c_d);
        Ok(Self {
            d,
            c_d,
            direction,
            axis_angles,
            chi0_scale: -C64::one() / (c_d * d as f64),
            refine_depth,
            petal_radius,
            expansion,
            germ: t.clone(),
            inverse: InverseMap::new(t, InverseMode::default())?,
        })
    }

    pub fn with_refine_depth(mut self, depth: u64) -> Self {
        self.refine_depth = depth;
        self
    }

    /// Half-opening of each petal sector.
    pub fn sector_half_angle(&self) -> f64 {
        PI / (2 * self.d) as f64
    }

    /// `-1/(d c_d z^d)`.
    pub fn leading_term(&self, z: C64) -> C64 {
        self.chi0_scale / z.powu(self.d as u32)
    }

    /// Nearest axis of this direction.
    pub fn nearest_axis(&self, z: C64) -> f64 {
        let theta = z.arg();
        self.axis_angles
            .iter()
            .copied()
            .min_by(|a, b| angle_between(theta, *a).total_cmp(&angle_between(theta, *b)))
            .expect("d >= 1")
    }

    pub fn in_sector(&self, z: C64, axis: f64) -> bool {
        angle_between(z.arg(), axis) <= self.sector_half_angle() + 1e-12
    }

    fn step(&self, z: C64, step: usize) -> Result<C64> {
        match self.direction {
            Direction::Attracting => Ok(self.germ.evaluate(&z)),
            Direction::Repelling => self.inverse.apply(&z).ok_or(Error::InverseFailed { step }),
        }
    }

    /// `χ_asym(T^{±n} z) ∓ n` along an orbit that must stay in the sector of `axis`.
    fn chi_along(&self, z: C64, axis: f64) -> Result<C64> {
        let mut cur = z;
        for k in 1..=self.refine_depth as usize {
            cur = self.step(cur, k)?;
            if !self.in_sector(cur, axis) || !cur.is_finite() {
                return Err(Error::LeftSector { step: k });
            }
        }
        let n = self.refine_depth as f64;
        let shift = match self.direction {
            Direction::Attracting => -n,
            Direction::Repelling => n,
        };
        Ok(self.expansion.evaluate(cur, axis) + shift)
    }

    /// Fatou coordinate at `z` with its residual.
    pub fn fatou_coordinate(&self, z: C64) -> Result<FatouPoint> {
        let axis = self.nearest_axis(z);
        if !self.in_sector(z, axis) || z.norm() > self.petal_radius || z.is_zero() {
            return Err(Error::LeftSector { step: 0 });
        }
        let chi = self.chi_along(z, axis)?;
        let next = self.step(z, 1)?;
        let chi_next = self.chi_along(next, axis)?;
        let residual = match self.direction {
            Direction::Attracting => chi_next - chi - 1.0,
            Direction::Repelling => chi_next - chi + 1.0,
        };
        Ok(FatouPoint { chi, residual })
    }
}

/// Largest `r` (up to `min(0.5, trusted radius)`) such that
/// `|T(z) - z - c_d z^{d+1}| <= 0.1 |c_d z^{d+1}|` on every sampled point of
/// the petal sectors with `|z| <= r`.
pub fn petal_radius(t: &TruncatedGerm<f64>, d: usize, c_d: C64) -> f64 {
    const RADII: usize = 64;
    const ANGLES: usize = 16;
    let r_max = (0.25 * t.coefficient_radius()).min(0.5);
    let half = PI / (2 * d) as f64;
    let mut axes = axis_angles(d, c_d, Direction::Attracting);
    axes.extend(axis_angles(d, c_d, Direction::Repelling));
    let mut good = 0.0;
    for i in 1..=RADII {
        let r = r_max * i as f64 / RADII as f64;
        let ok = axes.iter().all(|&axis| {
            (0..=ANGLES).all(|j| {
                let theta = axis - half + 2.0 * half * j as f64 / ANGLES as f64;
                let z = C64::from_polar(r, theta);
                let lead = c_d * z.powu(d as u32 + 1);
                (t.evaluate(&z) - z - lead).norm() <= PETAL_DOMINANCE * lead.norm()
            })
        });
        if !ok {
            break;
        }
        good = r;
    }
    good
}

/// Polygon approximating `∂B_n = T^{-n}(∂B_0)`, with `z_n = T^{-n}(z_0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedDomain {
    pub n: usize,
    pub basepoint: C64,
    pub vertices: Vec<C64>,
}

impl TrackedDomain {
    /// Distance from the basepoint to the polygon boundary.
    pub fn boundary_distance(&self) -> f64 {
        let p = self.basepoint;
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    fn edges(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd test.
    pub fn contains(&self, p: C64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.im > p.im) != (b.im > p.im) {
                let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if p.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// First pair of non-adjacent edges that cross, if any.
    pub fn self_intersection(&self) -> Option<(usize, usize)> {
        let v = &self.vertices;
        let n = v.len();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (v[j], v[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Tracked domains, possibly cut short.
#[derive(Clone, Debug, PartialEq)]
pub struct Tracking {
    pub domains: Vec<TrackedDomain>,
    /// Why tracking stopped before `n_max`, if it did.
    pub stopped: Option<Error>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackConfig {
    /// Initial vertex count on `∂B_0`.
    pub vertices: usize,
    /// An edge is split when longer than this multiple of the mean edge.
    pub stretch: f64,
    pub max_vertices: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            vertices: 64,
            stretch: 3.0,
            max_vertices: 4096,
        }
    }
}

/// Pushes the disk `|z - z0| <= rho` through `T^{-1}` step by step.
pub fn track_backward(t: &TruncatedGerm<f64>, z0: C64, rho: f64, n_max: usize, config: &TrackConfig) -> Result<Tracking> {
    if !(rho > 0.0) || config.vertices < 3 {
        return Err(Error::InvalidInput("disk radius must be positive and the polygon needs 3 vertices".into()));
    }
    let inverse = InverseMap::new(t, InverseMode::default())?;
    let boundary = |s: f64| z0 + C64::from_polar(rho, TAU * s);
    // (parameter on ∂B_0, current point)
    let mut verts: Vec<(f64, C64)> = (0..config.vertices)
        .map(|i| {
            let s = i as f64 / config.vertices as f64;
            (s, boundary(s))
        })
        .collect();
    let mut base = z0;
    let mut domains = vec![TrackedDomain {
        n: 0,
        basepoint: base,
        vertices: verts.iter().map(|v| v.1).collect(),
    }];
    let pull = |z: C64, steps: usize, at: usize| -> Result<C64> {
        let mut w = z;
        for _ in 0..steps {
            w = inverse.apply(&w).ok_or(Error::InverseFailed { step: at })?;
        }
        Ok(w)
    };
    for n in 1..=n_max {
        let step = (|| -> Result<()> {
            base = pull(base, 1, n)?;
            for v in verts.iter_mut() {
                v.1 = pull(v.1, 1, n)?;
            }
            refine(&mut verts, config, |s| pull(boundary(s), n, n))?;
            Ok(())
        })();
        if let Err(e) = step {
            return Ok(Tracking {
                domains,
                stopped: Some(e),
            });
        }
        let domain = TrackedDomain {
            n,
            basepoint: base,
            vertices: verts.iter().map(|v| v.1).collect(),
        };
        if domain.self_intersection().is_some() {
            return Ok(Tracking {
                domains,
                stopped: Some(Error::SelfIntersection { step: n }),
            });
        }
        domains.push(domain);
    }
    Ok(Tracking { domains, stopped: None })
}

/// Splits edges longer than `stretch` times the mean edge, placing new
/// vertices at the image of the parameter midpoint.
fn refine(
    verts: &mut Vec<(f64, C64)>,
    config: &TrackConfig,
    mut image: impl FnMut(f64) -> Result<C64>,
) -> Result<()> {
    loop {
        let n = verts.len();
        let perimeter: f64 = (0..n).map(|i| (verts[(i + 1) % n].1 - verts[i].1).norm()).sum();
        let limit = config.stretch * perimeter / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut split = false;
        for i in 0..n {
            let (s0, a) = verts[i];
            let (mut s1, b) = verts[(i + 1) % n];
            out.push((s0, a));
            if (b - a).norm() > limit && out.len() + n - i < config.max_vertices {
                if s1 <= s0 {
                    s1 += 1.0;
                }
                let mid = (0.5 * (s0 + s1)).rem_euclid(1.0);
                out.push((mid, image(mid)?));
                split = true;
            }
        }
        *verts = out;
        if !split {
            return Ok(());
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDistanceConfig {
    /// Steps `n` at which `d(z_n, ∂B_n)` is sampled, ascending.
    pub ns: Vec<usize>,
    pub slope_tolerance: f64,
    /// Required `min ratio / median ratio`.
    pub floor_fraction: f64,
    pub track: TrackConfig,
}

impl BoundaryDistanceConfig {
    /// About `count` geometrically spaced steps in `[lo, hi]`.
    pub fn geometric(lo: usize, hi: usize, count: usize) -> Self {
        let mut ns: Vec<usize> = (0..count)
            .map(|i| {
                let t = i as f64 / (count.max(2) - 1) as f64;
                libm::round(lo as f64 * libm::pow(hi as f64 / lo.max(1) as f64, t)) as usize
            })
            .collect();
        ns.dedup();
        Self {
            ns,
            slope_tolerance: 0.2,
            floor_fraction: 0.1,
            track: TrackConfig::default(),
        }
    }
}

/// Tracks `B_n = T^{-n}(B_0)` and measures `d(z_n, ∂B_n) / |z_n|^{d+1}`.
/// Passes when the smallest ratio stays above `floor_fraction` times the
/// median and `ln d(z_n, ∂B_n)` against `ln |z_n|` has slope `d + 1`.
pub fn verify_boundary_distance(
    t: &TruncatedGerm<f64>,
    z0: C64,
    rho: f64,
    config: &BoundaryDistanceConfig,
) -> Result<VerificationReport> {
    let (d, _) = tangency(t)?;
    if config.ns.is_empty() || config.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("sample steps must be non-empty and increasing".into()));
    }
    let n_max = *config.ns.last().expect("non-empty");
    let tracking = track_backward(t, z0, rho, n_max, &config.track)?;
    if let Some(e) = tracking.stopped {
        return Err(e);
    }
    let expected = (d + 1) as f64;
    let mut report = VerificationReport::new("boundary-distance", "boundary_distance", expected, config.slope_tolerance);
    let mut ratios = Vec::new();
    let mut points = Vec::new();
    for &n in &config.ns {
        let dom = &tracking.domains[n];
        let r = dom.basepoint.norm();
        let dist = dom.boundary_distance();
        ratios.push(dist / libm::pow(r, expected));
        points.push((r, dist));
        report.samples.push(Sample {
            r,
            m: Some(n as u64),
            value: Some(dist),
            ceiling: None,
            pass: dom.contains(dom.basepoint),
        });
    }
    let floor = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let med = median(&ratios).unwrap_or(0.0);
    report.measured_constants.push(("ratio_floor".into(), floor));
    report.measured_constants.push(("ratio_median".into(), med));
    report.measured_constants.push((
        "max_vertices".into(),
        tracking.domains.iter().map(|dm| dm.vertices.len()).max().unwrap_or(0) as f64,
    ));
    let floor_ok = floor > 0.0 && floor >= config.floor_fraction * med;
    if !floor_ok {
        report.notes.push(format!(
            "ratio collapses: min {floor:.3e} below {} x median {med:.3e}",
            config.floor_fraction
        ));
    }
    report.sort_samples();
    report.fitted_slope = if points.len() >= 2 {
        fit_log_log(points.iter().copied()).map(|f| f.slope)
    } else {
        None
    };
    let slope_ok = report.fitted_slope.is_none() || report.slope_ok();
    if report.fitted_slope.is_none() {
        report.notes.push("a single sample: no slope to fit".into());
    }
    report.pass = floor_ok && slope_ok && report.ceilings_ok();
    Ok(report)
}

/// Non-escaping compact of a parabolic germ with petal diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowerReport {
    pub compact: CompactApprox,
    /// Fraction of sampled points on attracting axes that lie in the mask.
    pub attracting_density: Option<f64>,
    pub repelling_density: Option<f64>,
    /// Same along the directions halfway between attracting and repelling axes.
    pub bisector_density: Option<f64>,
    /// Hausdorff distance in cells between the mask and its complex conjugate.
    pub conjugation_distance: f64,
    /// Hausdorff distance in cells between the mask and its image under `z -> -z`.
    pub reflection_distance: f64,
}

const RAY_SAMPLES: usize = 256;

fn ray_density(k: &CompactApprox, angles: &[f64], radius: f64) -> f64 {
    let hits = angles
        .iter()
        .flat_map(|&theta| {
            (1..=RAY_SAMPLES).map(move |i| C64::from_polar(radius * i as f64 / RAY_SAMPLES as f64, theta))
        })
        .filter(|&z| k.contains(z))
        .count();
    hits as f64 / (angles.len() * RAY_SAMPLES) as f64
}

/// Renders the compact of `T` on a disk and measures petal structure.
pub fn fatou_flower(t: &TruncatedGerm<f64>, domain: &AdmissibleDomain, grid: &GridSpec) -> Result<FlowerReport> {
    let compact = component_of_zero(&escape_field(t, domain, grid, InverseMode::default())?)?;
    flower_report(t, compact, domain.radius())
}

/// Petal diagnostics for an already computed compact.
pub fn flower_report(t: &TruncatedGerm<f64>, compact: CompactApprox, radius: f64) -> Result<FlowerReport> {
    let (attracting_density, repelling_density, bisector_density) = match tangency(t) {
        Ok((d, c_d)) => {
            let att = axis_angles(d, c_d, Direction::Attracting);
            let rep = axis_angles(d, c_d, Direction::Repelling);
            let half = PI / (2 * d) as f64;
            let bis: Vec<f64> = att.iter().flat_map(|&a| [a + half, a - half]).collect();
            (
                Some(ray_density(&compact, &att, radius)),
                Some(ray_density(&compact, &rep, radius)),
                Some(ray_density(&compact, &bis, radius)),
            )
        }
        Err(Error::IdentityGerm) => (None, None, None),
        Err(e) => return Err(e),
    };
    let conjugation_distance = compact.mask.hausdorff(&compact.mask.conjugate_reflection());
    let reflection_distance = compact.mask.hausdorff(&compact.mask.point_reflection());
    Ok(FlowerReport {
        compact,
        attracting_density,
        repelling_density,
        bisector_density,
        conjugation_distance,
        reflection_distance,
    })
}
