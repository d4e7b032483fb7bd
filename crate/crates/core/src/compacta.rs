//! Grid approximations of invariant compacta.
//!
//! A pixel is kept when the orbit of its centre stays in the closed domain
//! for `max_iter` steps forward and `max_iter` steps backward. The compact
//! is the 4-connected component of the pixel of 0. Finite `max_iter`
//! over-approximates the non-escaping set; more iterations only remove
//! pixels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::normal_form::{formal_commutation_check, CommutationReport};
use crate::raster::Mask;
use crate::scalar::{from_c64, to_c64, Real};
use crate::series::{InverseMap, InverseMode, TruncatedGerm};

/// Closed disk `|z| <= radius`, with germ evaluation trusted up to `margin`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibleDomain {
    radius: f64,
    margin: f64,
}

impl AdmissibleDomain {
    pub fn new(radius: f64, margin: f64) -> Result<Self> {
        if !(radius > 0.0 && margin > radius && margin.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "domain needs 0 < radius < margin, got radius {radius}, margin {margin}"
            )));
        }
        Ok(Self { radius, margin })
    }

    /// Margin twice the radius.
    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(radius, 2.0 * radius)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }
}

/// `n × n` pixels with centres `(j - n/2) h`, `h = 2 extent / n`, so the
/// centre pixel sits exactly on 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub extent: f64,
    pub max_iter: u32,
}

pub const MIN_RESOLUTION: usize = 64;

/// Default orbit cap: `10^4` up to 512², `10^5` from 2048².
pub fn default_max_iter(resolution: usize) -> u32 {
    match resolution {
        0..=512 => 10_000,
        513..=2047 => 30_000,
        _ => 100_000,
    }
}

impl GridSpec {
    pub fn new(resolution: usize, extent: f64, max_iter: u32) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Grid(format!(
                "resolution {resolution} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::Grid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self {
            resolution,
            extent,
            max_iter,
        })
    }

    /// Extent `1.25 radius`.
    pub fn for_radius(radius: f64, resolution: usize, max_iter: u32) -> Result<Self> {
        Self::new(resolution, 1.25 * radius, max_iter)
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell() * self.cell()
    }

    pub fn zero_pixel(&self) -> (usize, usize) {
        (self.resolution / 2, self.resolution / 2)
    }

    pub fn center(&self, row: usize, col: usize) -> Complex<f64> {
        let half = (self.resolution / 2) as f64;
        let h = self.cell();
        Complex::new((col as f64 - half) * h, (row as f64 - half) * h)
    }

    /// Nearest pixel, `None` off the grid.
    pub fn pixel_of(&self, z: Complex<f64>) -> Option<(usize, usize)> {
        let half = (self.resolution / 2) as f64;
        let h = self.cell();
        let col = libm::round(z.re / h + half);
        let row = libm::round(z.im / h + half);
        let n = self.resolution as f64;
        if !(row >= 0.0 && col >= 0.0 && row < n && col < n) {
            return None;
        }
        Some((row as usize, col as usize))
    }

    fn check_covers(&self, bound: f64) -> Result<()> {
        // The largest centre on either axis is `extent - h`.
        if bound > self.extent {
            return Err(Error::Grid(format!(
                "grid extent {} does not cover the domain bound {bound}",
                self.extent
            )));
        }
        Ok(())
    }
}

/// A closed region the orbits must stay in.
pub trait Region {
    fn contains(&self, z: Complex<f64>) -> bool;
    /// Radius of a centred disk containing the region.
    fn bound(&self) -> f64;
}

/// Closed disk about 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk(pub f64);

impl Region for Disk {
    #[inline]
    fn contains(&self, z: Complex<f64>) -> bool {
        z.norm_sqr() <= self.0 * self.0
    }

    fn bound(&self) -> f64 {
        self.0
    }
}

/// Image `φ(D)` of the closed disk `D = {|z| <= radius}`, tested by
/// inverting `φ` pointwise.
#[derive(Clone, Debug)]
pub struct ImageDomain {
    inverse: InverseMap<f64>,
    radius: f64,
    bound: f64,
    /// `|z|` below this is inside without inverting: the disk misses `φ(∂D)`
    /// and contains `φ(0) = 0`.
    inner: f64,
}

const BOUNDARY_SAMPLES: usize = 4096;

impl ImageDomain {
    pub fn new(phi: &TruncatedGerm<f64>, radius: f64) -> Result<Self> {
        let inverse = InverseMap::new(phi, InverseMode::default())?;
        // Maximum modulus sits on the boundary circle.
        let (lo, hi) = (0..BOUNDARY_SAMPLES)
            .map(|j| {
                let z = Complex::from_polar(radius, TAU * j as f64 / BOUNDARY_SAMPLES as f64);
                phi.evaluate(&z).norm()
            })
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
        // Chord sag between samples.
        Ok(Self {
            inverse,
            radius,
            bound: hi * (1.0 + 1e-6),
            inner: lo * (1.0 - 1e-6),
        })
    }
}

impl Region for ImageDomain {
    #[inline]
    fn contains(&self, z: Complex<f64>) -> bool {
        let m = z.norm_sqr();
        if m < self.inner * self.inner {
            return true;
        }
        m <= self.bound * self.bound
            && self
                .inverse
                .apply(&z)
                .is_some_and(|w| w.norm_sqr() <= self.radius * self.radius)
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

/// Per-pixel escape test for one germ on one region.
#[derive(Clone, Debug)]
pub struct EscapeEngine<T: Real, R: Region> {
    forward: TruncatedGerm<T>,
    inverse: InverseMap<T>,
    /// Largest `|w|` at which a series-mode backward step is accepted.
    series_limit: f64,
    region: R,
    margin: f64,
    max_iter: u32,
}

impl<T: Real, R: Region> EscapeEngine<T, R> {
    pub fn new(f: &TruncatedGerm<T>, region: R, margin: f64, max_iter: u32, mode: InverseMode) -> Result<Self> {
        if margin < region.bound() {
            return Err(Error::InvalidInput(format!(
                "margin {margin} is smaller than the region bound {}",
                region.bound()
            )));
        }
        let inverse = InverseMap::new(f, mode)?;
        let series_limit = inverse.series().coefficient_radius();
        Ok(Self {
            forward: f.clone(),
            inverse,
            series_limit,
            region,
            margin,
            max_iter,
        })
    }

    pub fn region(&self) -> &R {
        &self.region
    }

    #[inline]
    fn inside(&self, z: Complex<f64>) -> bool {
        z.norm_sqr() <= self.margin * self.margin && self.region.contains(z)
    }

    #[inline]
    fn step_back(&self, w: &Complex<T>) -> Option<Complex<T>> {
        if self.inverse.mode() == InverseMode::Series && to_c64(w).norm() > self.series_limit {
            return None;
        }
        self.inverse.apply(w)
    }

    #[inline]
    fn advance(&self, cur: &Complex<T>, forward: bool) -> Option<Complex<T>> {
        let next = if forward {
            Some(self.forward.evaluate(cur))
        } else {
            self.step_back(cur)
        };
        next.filter(|w| self.inside(to_c64(w)))
    }

    /// Steps survived in one direction (`max_iter` if the orbit never left),
    /// continuing an orbit that has already made `done` steps.
    fn resume(&self, mut cur: Complex<T>, done: u32, forward: bool) -> u32 {
        for k in done + 1..=self.max_iter {
            match self.advance(&cur, forward) {
                Some(w) => cur = w,
                None => return k - 1,
            }
        }
        self.max_iter
    }

    fn run(&self, z: Complex<f64>, forward: bool) -> u32 {
        self.resume(from_c64(z), 0, forward)
    }

    /// `run` for two orbits in lockstep. The chains are independent, so
    /// interleaving them hides much of the latency of each step. Results
    /// are identical to two separate runs.
    fn run_pair(&self, a: Complex<f64>, b: Complex<f64>, forward: bool) -> (u32, u32) {
        let (mut ca, mut cb) = (from_c64::<T>(a), from_c64::<T>(b));
        for k in 1..=self.max_iter {
            match (self.advance(&ca, forward), self.advance(&cb, forward)) {
                (Some(x), Some(y)) => (ca, cb) = (x, y),
                (Some(x), None) => return (self.resume(x, k, forward), k - 1),
                (None, Some(y)) => return (k - 1, self.resume(y, k, forward)),
                (None, None) => return (k - 1, k - 1),
            }
        }
        (self.max_iter, self.max_iter)
    }

    /// `run` over a batch of starting points, two at a time.
    fn run_all(&self, points: &[Complex<f64>], forward: bool) -> Vec<u32> {
        let mut out = Vec::with_capacity(points.len());
        let mut pairs = points.chunks_exact(2);
        for pair in &mut pairs {
            let (a, b) = self.run_pair(pair[0], pair[1], forward);
            out.extend([a, b]);
        }
        out.extend(pairs.remainder().iter().map(|&z| self.run(z, forward)));
        out
    }

    /// `(kept, steps)` for the pixel centred at `z`. The backward orbit is
    /// only run when the forward one survives.
    pub fn classify(&self, z: Complex<f64>) -> (bool, u32) {
        if !self.inside(z) {
            return (false, 0);
        }
        let fwd = self.run(z, true);
        if fwd < self.max_iter {
            return (false, fwd);
        }
        let back = self.run(z, false);
        (back == self.max_iter, fwd + back)
    }

    /// `classify` for every pixel of a row, with orbits batched in pairs.
    pub fn classify_row(&self, grid: &GridSpec, row: usize) -> Vec<(bool, u32)> {
        let mut out = vec![(false, 0); grid.resolution];
        let cols: Vec<usize> = (0..grid.resolution)
            .filter(|&col| self.inside(grid.center(row, col)))
            .collect();
        let starts: Vec<Complex<f64>> = cols.iter().map(|&col| grid.center(row, col)).collect();
        let fwd = self.run_all(&starts, true);
        let survivors: Vec<usize> = (0..cols.len()).filter(|&i| fwd[i] == self.max_iter).collect();
        for (&i, &f) in cols.iter().zip(&fwd) {
            out[i] = (false, f);
        }
        let back_starts: Vec<Complex<f64>> = survivors.iter().map(|&i| starts[i]).collect();
        let back = self.run_all(&back_starts, false);
        for (&i, &b) in survivors.iter().zip(&back) {
            out[cols[i]] = (b == self.max_iter, self.max_iter + b);
        }
        out
    }

    /// Pixel centres lying in the region.
    pub fn domain_mask(&self, grid: &GridSpec) -> Mask {
        Mask::from_fn(grid.resolution, |r, c| self.inside(grid.center(r, c)))
    }

    /// Sequential field over the whole grid.
    pub fn field(&self, grid: &GridSpec) -> Result<EscapeField> {
        let rows = (0..grid.resolution).map(|row| self.classify_row(grid, row)).collect();
        self.assemble(grid, rows)
    }

    /// Builds the field from rows computed elsewhere, in row order.
    pub fn assemble(&self, grid: &GridSpec, rows: Vec<Vec<(bool, u32)>>) -> Result<EscapeField> {
        if grid.max_iter != self.max_iter {
            return Err(Error::Grid("engine and grid disagree on max_iter".into()));
        }
        grid.check_covers(self.region.bound())?;
        let n = grid.resolution;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Grid("row data does not match the resolution".into()));
        }
        let (flags, iterations): (Vec<bool>, Vec<u32>) = rows.into_iter().flatten().unzip();
        Ok(EscapeField {
            grid: *grid,
            flags: Mask::from_cells(n, flags),
            domain: self.domain_mask(grid),
            iterations,
        })
    }
}

/// Pixels whose orbits never left the domain within `max_iter` steps each way.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeField {
    pub grid: GridSpec,
    pub flags: Mask,
    /// Pixel centres inside the domain.
    pub domain: Mask,
    /// Forward plus backward steps taken, per pixel.
    pub iterations: Vec<u32>,
}

impl EscapeField {
    pub fn count(&self) -> usize {
        self.flags.count()
    }
}

/// Escape field of `f` on a disk domain, computed sequentially.
pub fn escape_field<T: Real>(
    f: &TruncatedGerm<T>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
) -> Result<EscapeField> {
    disk_engine(f, domain, grid, mode)?.field(grid)
}

/// Engine for a disk domain.
pub fn disk_engine<T: Real>(
    f: &TruncatedGerm<T>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
) -> Result<EscapeEngine<T, Disk>> {
    grid.check_covers(domain.radius)?;
    EscapeEngine::new(f, Disk(domain.radius), domain.margin, grid.max_iter, mode)
}

/// Component of 0 in an escape field.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactApprox {
    pub grid: GridSpec,
    pub mask: Mask,
    /// Some mask pixel has a neighbour (8-connectivity) outside the domain.
    pub contact: bool,
    pub area: f64,
    /// Area of mask pixels whose eight neighbours are in the mask.
    pub interior_area: f64,
}

pub fn component_of_zero(field: &EscapeField) -> Result<CompactApprox> {
    let (r0, c0) = field.grid.zero_pixel();
    if !field.flags.get(r0, c0) {
        return Err(Error::ZeroEscaped);
    }
    let mask = field.flags.component(r0, c0);
    let contact = mask.iter_set().any(|(r, c)| {
        (-1isize..=1).any(|dr| {
            (-1isize..=1).any(|dc| !field.domain.get_signed(r as isize + dr, c as isize + dc))
        })
    });
    let cell_area = field.grid.cell_area();
    Ok(CompactApprox {
        grid: field.grid,
        contact,
        area: mask.count() as f64 * cell_area,
        interior_area: mask.interior().count() as f64 * cell_area,
        mask,
    })
}

impl CompactApprox {
    /// Whether the pixel nearest to `z` is in the mask.
    pub fn contains(&self, z: Complex<f64>) -> bool {
        self.grid
            .pixel_of(z)
            .is_some_and(|(r, c)| self.mask.get(r, c))
    }

    /// Centres of the mask pixels.
    pub fn centers(&self) -> impl Iterator<Item = Complex<f64>> + '_ {
        self.mask.iter_set().map(|(r, c)| self.grid.center(r, c))
    }

    /// Largest `|z|` over mask pixel centres.
    pub fn reach(&self) -> f64 {
        self.centers().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Rasterized image of the mask under `map`: each centre's image stamps
    /// its nearest pixel. Returns the stamp and the number of images that
    /// fell off the grid or could not be computed.
    pub fn stamp(&self, mut map: impl FnMut(Complex<f64>) -> Option<Complex<f64>>) -> (Mask, usize) {
        let mut out = Mask::new(self.grid.resolution);
        let mut lost = 0;
        for z in self.centers() {
            match map(z).and_then(|w| self.grid.pixel_of(w)) {
                Some((r, c)) => out.set(r, c, true),
                None => lost += 1,
            }
        }
        (out, lost)
    }
}

/// Distance in cells between a mask and the rasterized image of another set.
///
/// The image stamp is 1-dilated before measuring how far the mask is from
/// it (stamping a non-area-preserving map leaves holes); the undilated
/// stamp is measured against the mask.
pub fn image_distance(mask: &Mask, stamp: &Mask) -> f64 {
    let to_image = mask.directed_distance(&stamp.dilate());
    let from_image = stamp.directed_distance(mask);
    to_image.max(from_image)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    /// Distance in cells between `K` and `f(K)`.
    pub forward: f64,
    /// Distance in cells between `K` and `f^{-1}(K)`.
    pub backward: f64,
    /// Mask images that left the grid or failed to invert.
    pub lost: usize,
}

impl InvarianceReport {
    pub fn distance(&self) -> f64 {
        if self.lost > 0 {
            f64::INFINITY
        } else {
            self.forward.max(self.backward)
        }
    }
}

/// Grid distance between `K` and its images under `f` and `f^{-1}`.
pub fn invariance_check<T: Real>(k: &CompactApprox, f: &TruncatedGerm<T>, mode: InverseMode) -> Result<InvarianceReport> {
    let inverse = InverseMap::new(f, mode)?;
    let (fwd, lost_f) = k.stamp(|z| Some(to_c64(&f.evaluate(&from_c64::<T>(z)))));
    let (back, lost_b) = k.stamp(|z| inverse.apply(&from_c64::<T>(z)).map(|w| to_c64(&w)));
    Ok(InvarianceReport {
        forward: image_distance(&k.mask, &fwd),
        backward: image_distance(&k.mask, &back),
        lost: lost_f + lost_b,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestedFamily {
    pub radii: Vec<f64>,
    pub compacta: Vec<CompactApprox>,
    /// `(i, j, pixels of K_i outside the dilation of K_j)` for each violating pair `i < j`.
    pub violations: Vec<(usize, usize, usize)>,
    /// Hausdorff distance in cells between consecutive members.
    pub steps: Vec<f64>,
}

impl NestedFamily {
    pub fn nested(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `K(U_t)` for increasing disk radii on one grid, with the nesting check
/// `K_i ⊆ dilate(K_j)` for `i < j`.
pub fn nested_family<T: Real>(
    f: &TruncatedGerm<T>,
    radii: &[f64],
    margin: f64,
    grid: &GridSpec,
    mode: InverseMode,
) -> Result<NestedFamily> {
    nested_family_with(radii, margin, |domain| escape_field(f, domain, grid, mode))
}

/// [`nested_family`] with a caller-supplied field builder (e.g. parallel).
pub fn nested_family_with(
    radii: &[f64],
    margin: f64,
    mut field: impl FnMut(&AdmissibleDomain) -> Result<EscapeField>,
) -> Result<NestedFamily> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("radii must be non-empty and strictly increasing".into()));
    }
    let compacta = radii
        .iter()
        .map(|&r| {
            let domain = AdmissibleDomain::new(r, margin)?;
            component_of_zero(&field(&domain)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for j in 1..compacta.len() {
        let grown = compacta[j].mask.dilate();
        for (i, ki) in compacta[..j].iter().enumerate() {
            let outside = ki.mask.difference_count(&grown);
            if outside > 0 {
                violations.push((i, j, outside));
            }
        }
    }
    let steps = compacta
        .windows(2)
        .map(|w| w[0].mask.hausdorff(&w[1].mask))
        .collect();
    Ok(NestedFamily {
        radii: radii.to_vec(),
        compacta,
        violations,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardReport {
    /// Distance in cells between `φ(K_f(U))` and `K_g(φ(U))`.
    pub distance: f64,
    pub source: CompactApprox,
    pub target: CompactApprox,
    /// Radius of a disk containing `φ(U)`.
    pub image_bound: f64,
    /// Mask images that left the grid.
    pub lost: usize,
}

/// Compares `φ(K_f(U))` with the compact of `g = φ ∘ f ∘ φ^{-1}` on `φ(U)`.
pub fn pushforward_check(
    phi: &TruncatedGerm<f64>,
    f: &TruncatedGerm<f64>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
) -> Result<PushforwardReport> {
    pushforward_check_with(phi, f, domain, grid, mode, |e| e.field(grid), |e| e.field(grid))
}

/// [`pushforward_check`] with caller-supplied field builders (e.g. parallel).
pub fn pushforward_check_with(
    phi: &TruncatedGerm<f64>,
    f: &TruncatedGerm<f64>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
    source_field: impl FnOnce(&EscapeEngine<f64, Disk>) -> Result<EscapeField>,
    target_field: impl FnOnce(&EscapeEngine<f64, ImageDomain>) -> Result<EscapeField>,
) -> Result<PushforwardReport> {
    let image = ImageDomain::new(phi, domain.radius)?;
    let image_bound = image.bound();
    if image_bound > grid.extent {
        return Err(Error::DomainOutsideGrid);
    }
    let g = phi.conjugate(f)?;
    let source = component_of_zero(&source_field(&disk_engine(f, domain, grid, mode)?)?)?;
    let margin = domain.margin.max(image_bound * domain.margin / domain.radius);
    let engine = EscapeEngine::new(&g, image, margin, grid.max_iter, mode)?;
    let target = component_of_zero(&target_field(&engine)?)?;
    let (pushed, lost) = source.stamp(|z| Some(phi.evaluate(&z)));
    Ok(PushforwardReport {
        distance: image_distance(&target.mask, &pushed),
        source,
        target,
        image_bound,
        lost,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommonHedgehogReport<T: Real = f64> {
    /// Distance in cells between `K_f` and `g(K_f)`.
    pub invariance_under_g: f64,
    /// Hausdorff distance in cells between `K_f` and `K_g`.
    pub compact_distance: f64,
    pub commutation: CommutationReport<T>,
    /// `K_f` images under `g` that left the grid.
    pub lost: usize,
}

/// Whether `K_f(U)` is (approximately) `g`-invariant and equal to
/// `K_g(U)`, paired with the formal commutation verdict.
pub fn common_hedgehog_check<T: Real>(
    f: &TruncatedGerm<T>,
    g: &TruncatedGerm<T>,
    domain: &AdmissibleDomain,
    grid: &GridSpec,
    mode: InverseMode,
    tol: f64,
) -> Result<CommonHedgehogReport<T>> {
    let kf = component_of_zero(&escape_field(f, domain, grid, mode)?)?;
    let kg = component_of_zero(&escape_field(g, domain, grid, mode)?)?;
    let (image, lost) = kf.stamp(|z| Some(to_c64(&g.evaluate(&from_c64::<T>(z)))));
    Ok(CommonHedgehogReport {
        invariance_under_g: image_distance(&kf.mask, &image),
        compact_distance: kf.mask.hausdorff(&kg.mask),
        commutation: formal_commutation_check(f, g, tol)?,
        lost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::RotationNumber;
    use crate::scalar::turn;
    use crate::series::DEFAULT_TOL;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn golden_lambda() -> Complex<f64> {
        RotationNumber::golden_mean(40).multiplier()
    }

    fn rotation(order: usize) -> TruncatedGerm<f64> {
        TruncatedGerm::linear(golden_lambda(), order).unwrap()
    }

    fn quadratic(order: usize) -> TruncatedGerm<f64> {
        TruncatedGerm::from_terms(order, &[(1, golden_lambda()), (2, c(1.0, 0.0))]).unwrap()
    }

    fn grid(radius: f64, n: usize, max_iter: u32) -> GridSpec {
        GridSpec::for_radius(radius, n, max_iter).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = GridSpec::new(64, 1.0, 10).unwrap();
        assert_eq!(g.center(32, 32), c(0.0, 0.0));
        assert_eq!(g.pixel_of(c(0.0, 0.0)), Some((32, 32)));
        let z = g.center(10, 50);
        assert_eq!(g.pixel_of(z), Some((10, 50)));
        // Mirror pixels j and n - j are negatives of each other.
        assert_eq!(g.center(10, 50), -g.center(54, 14));
        assert_eq!(g.pixel_of(c(2.0, 0.0)), None);
        assert!(GridSpec::new(32, 1.0, 10).is_err());
    }

    #[test]
    fn rotation_keeps_the_whole_disk() {
        let f = rotation(8);
        let domain = AdmissibleDomain::disk(0.2).unwrap();
        let g = grid(0.2, 64, 200);
        let field = escape_field(&f, &domain, &g, InverseMode::default()).unwrap();
        assert_eq!(field.flags, field.domain);
        let k = component_of_zero(&field).unwrap();
        assert_eq!(k.mask, field.domain);
        assert!(k.contact);
        let inv = invariance_check(&k, &f, InverseMode::default()).unwrap();
        assert!(inv.distance() <= 1.0, "{inv:?}");
    }

    #[test]
    fn doubling_keeps_only_the_origin() {
        let f = TruncatedGerm::linear(c(2.0, 0.0), 4).unwrap();
        let domain = AdmissibleDomain::disk(0.2).unwrap();
        let g = grid(0.2, 64, 50);
        let field = escape_field(&f, &domain, &g, InverseMode::default()).unwrap();
        assert_eq!(field.count(), 1);
        let k = component_of_zero(&field).unwrap();
        assert_eq!(k.mask.count(), 1);
        assert!(!k.contact);
    }

    #[test]
    fn flags_stay_inside_the_domain() {
        let f = quadratic(12);
        let domain = AdmissibleDomain::disk(0.2).unwrap();
        let g = grid(0.2, 64, 300);
        let field = escape_field(&f, &domain, &g, InverseMode::default()).unwrap();
        assert!(field.flags.is_subset(&field.domain));
    }

    #[test]
    fn annulus_cut_separates_the_component() {
        let g = GridSpec::new(64, 1.0, 1).unwrap();
        let domain = Mask::from_fn(64, |r, col| g.center(r, col).norm() <= 0.9);
        let flags = Mask::from_fn(64, |r, col| {
            let m = g.center(r, col).norm();
            m <= 0.9 && !(0.4..=0.5).contains(&m)
        });
        let field = EscapeField {
            grid: g,
            flags,
            domain,
            iterations: vec![0; 64 * 64],
        };
        let k = component_of_zero(&field).unwrap();
        assert!(!k.contact);
        assert!(k.reach() < 0.45);
        assert!(k.mask.is_connected());
        assert!(k.interior_area > 0.0 && k.interior_area < k.area);
    }

    #[test]
    fn escaped_origin_is_reported() {
        let g = GridSpec::new(64, 1.0, 1).unwrap();
        let field = EscapeField {
            grid: g,
            flags: Mask::new(64),
            domain: Mask::new(64),
            iterations: vec![0; 64 * 64],
        };
        assert_eq!(component_of_zero(&field), Err(Error::ZeroEscaped));
    }

    #[test]
    fn identity_is_invariant() {
        let f = TruncatedGerm::<f64>::identity(6).unwrap();
        let domain = AdmissibleDomain::disk(0.3).unwrap();
        let g = grid(0.3, 64, 5);
        let k = component_of_zero(&escape_field(&f, &domain, &g, InverseMode::default()).unwrap()).unwrap();
        let inv = invariance_check(&k, &f, InverseMode::default()).unwrap();
        assert_eq!(inv.distance(), 0.0);
    }

    #[test]
    fn more_iterations_only_remove_pixels() {
        let f = quadratic(12);
        let domain = AdmissibleDomain::disk(0.3).unwrap();
        let mut last: Option<EscapeField> = None;
        for max_iter in [50, 100, 200, 400] {
            let field = escape_field(&f, &domain, &grid(0.3, 64, max_iter), InverseMode::default()).unwrap();
            if let Some(prev) = &last {
                assert!(field.flags.is_subset(&prev.flags));
            }
            last = Some(field);
        }
    }

    #[test]
    fn rotation_family_is_nested_disks() {
        let f = rotation(6);
        let g = grid(0.2, 64, 20);
        let fam = nested_family(&f, &[0.1, 0.15, 0.2], 0.4, &g, InverseMode::default()).unwrap();
        assert!(fam.nested());
        for w in fam.compacta.windows(2) {
            assert!(w[0].mask.is_subset(&w[1].mask));
        }
        let single = nested_family(&f, &[0.2], 0.4, &g, InverseMode::default()).unwrap();
        assert_eq!(single.compacta.len(), 1);
        assert!(single.steps.is_empty());
        assert!(nested_family(&f, &[0.2, 0.1], 0.4, &g, InverseMode::default()).is_err());
    }

    #[test]
    fn quadratic_family_is_nested() {
        let f = quadratic(12);
        let g = grid(0.2, 96, 1000);
        let fam = nested_family(&f, &[0.1, 0.15, 0.2], 0.4, &g, InverseMode::default()).unwrap();
        assert!(fam.nested(), "{:?}", fam.violations);
        assert!(fam.compacta.windows(2).all(|w| w[0].area <= w[1].area));
    }

    #[test]
    fn pushforward_by_identity_and_rotation() {
        let f = rotation(8);
        let domain = AdmissibleDomain::disk(0.2).unwrap();
        let g = grid(0.2, 64, 50);
        let id = TruncatedGerm::<f64>::identity(8).unwrap();
        let rep = pushforward_check(&id, &f, &domain, &g, InverseMode::default()).unwrap();
        assert_eq!(rep.distance, 0.0);
        let spin = TruncatedGerm::linear(turn(&0.1), 8).unwrap();
        let rep = pushforward_check(&spin, &f, &domain, &g, InverseMode::default()).unwrap();
        assert!(rep.distance <= 1.0, "{}", rep.distance);
    }

    #[test]
    fn pushforward_outside_grid_is_an_error() {
        let f = rotation(8);
        let domain = AdmissibleDomain::disk(0.2).unwrap();
        let g = grid(0.2, 64, 10);
        let grow = TruncatedGerm::linear(c(1.5, 0.0), 8).unwrap();
        assert_eq!(
            pushforward_check(&grow, &f, &domain, &g, InverseMode::default()).unwrap_err(),
            Error::DomainOutsideGrid
        );
    }

    #[test]
    fn image_domain_of_a_scaling() {
        let phi = TruncatedGerm::linear(c(0.5, 0.0), 4).unwrap();
        let d = ImageDomain::new(&phi, 0.2).unwrap();
        assert!(d.contains(c(0.099, 0.0)));
        assert!(!d.contains(c(0.101, 0.0)));
        assert!((d.bound() - 0.1).abs() < 1e-6);
    }

    #[test]
    fn image_domain_shortcut_agrees_with_inversion() {
        let phi = TruncatedGerm::from_terms(12, &[(1, c(1.0, 0.0)), (2, c(0.1, 0.0))]).unwrap();
        let d = ImageDomain::new(&phi, 0.2).unwrap();
        assert!(d.inner > 0.19 && d.inner < d.bound);
        for i in 0..400 {
            for j in 0..64 {
                let z = Complex::from_polar(0.18 + 0.03 * i as f64 / 400.0, TAU * j as f64 / 64.0);
                let exact = d.inverse.apply(&z).is_some_and(|w| w.norm() <= 0.2);
                assert_eq!(d.contains(z), exact, "{z}");
            }
        }
    }

    #[test]
    fn series_and_newton_backward_steps_agree_inside_the_series_radius() {
        // The inverse of λz + z² has radius 1/4; stay well inside it.
        let f = quadratic(24);
        let domain = AdmissibleDomain::new(0.08, 0.12).unwrap();
        let g = grid(0.08, 64, 300);
        let newton = escape_field(&f, &domain, &g, InverseMode::default()).unwrap();
        let series = escape_field(&f, &domain, &g, InverseMode::Series).unwrap();
        let differ = newton.flags.difference_count(&series.flags) + series.flags.difference_count(&newton.flags);
        assert!(differ <= newton.count() / 100, "{differ} pixels differ");
    }

    #[test]
    fn common_hedgehog_of_a_power() {
        let f = quadratic(12);
        let ff = f.compose(&f);
        let domain = AdmissibleDomain::disk(0.15).unwrap();
        let g = grid(0.15, 64, 300);
        let same = common_hedgehog_check(&f, &f, &domain, &g, InverseMode::default(), DEFAULT_TOL).unwrap();
        assert_eq!(same.invariance_under_g, 0.0_f64.max(same.invariance_under_g));
        assert_eq!(same.compact_distance, 0.0);
        assert!(same.commutation.commutes());
        let pow = common_hedgehog_check(&f, &ff, &domain, &g, InverseMode::default(), DEFAULT_TOL).unwrap();
        assert!(pow.invariance_under_g <= 2.0, "{}", pow.invariance_under_g);
        assert!(pow.commutation.commutes());
        let phi = TruncatedGerm::from_terms(12, &[(1, c(1.0, 0.0)), (2, c(0.2, 0.0))]).unwrap();
        let h = phi.conjugate(&f).unwrap();
        let other = common_hedgehog_check(&f, &h, &domain, &g, InverseMode::default(), DEFAULT_TOL).unwrap();
        assert!(!other.commutation.commutes());
    }

    #[test]
    fn batched_rows_match_single_pixels() {
        let f = quadratic(12);
        let g = grid(0.2, 65, 300);
        for mode in [InverseMode::default(), InverseMode::Series] {
            let engine = disk_engine(&f, &AdmissibleDomain::disk(0.2).unwrap(), &g, mode).unwrap();
            for row in 0..65 {
                let single: Vec<_> = (0..65).map(|col| engine.classify(g.center(row, col))).collect();
                assert_eq!(engine.classify_row(&g, row), single, "row {row}");
            }
        }
    }
}
