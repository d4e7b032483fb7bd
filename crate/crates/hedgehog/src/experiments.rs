//! Multi-step grid experiments shared by the CLI and the acceptance suite.

use std::time::Instant;

use hedgehog_core::compacta::{
    component_of_zero, invariance_check, nested_family_with, pushforward_check_with, AdmissibleDomain, CompactApprox,
    GridSpec, InvarianceReport, NestedFamily, PushforwardReport,
};
use hedgehog_core::normal_form::reduce_to_order;
use hedgehog_core::probe::{verify_probe, ProbeConfig, ProbeReport, MAX_PROBE_DENOMINATOR};
use hedgehog_core::{InverseMode, RotationNumber, TruncatedGerm};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::parallel;

/// `λz + z^2` with the golden-mean multiplier.
pub fn golden_quadratic(order: usize) -> Result<(RotationNumber, TruncatedGerm<f64>)> {
    let alpha = RotationNumber::golden_mean(crate::config::GOLDEN_DEPTH);
    let f = TruncatedGerm::from_terms(order, &[(1, alpha.multiplier()), (2, Complex::new(1.0, 0.0))])?;
    Ok((alpha, f.with_tag("quad")))
}

/// Compact, invariance, nesting and push-forward on one grid.
#[derive(Clone, Debug)]
pub struct HedgehogSuite {
    /// Compact for the largest radius.
    pub compact: CompactApprox,
    pub invariance: InvarianceReport,
    pub nested: NestedFamily,
    pub pushforward: PushforwardReport,
    pub seconds: f64,
}

/// Runs the grid checks for `f` on disks of the given (increasing) radii,
/// all on the grid of the largest one. The largest field is computed once
/// and reused as the push-forward source.
pub fn hedgehog_suite(
    f: &TruncatedGerm<f64>,
    phi: &TruncatedGerm<f64>,
    radii: &[f64],
    resolution: usize,
    max_iter: u32,
    mode: InverseMode,
) -> Result<HedgehogSuite> {
    let start = Instant::now();
    let &outer = radii
        .last()
        .ok_or_else(|| Error::Config("at least one radius".into()))?;
    let domain = AdmissibleDomain::disk(outer)?;
    let grid = GridSpec::for_radius(outer, resolution, max_iter)?;
    let outer_field = parallel::escape_field(f, &domain, &grid, mode)?;
    let nested = nested_family_with(radii, domain.margin(), |d| {
        if d.radius() == outer {
            Ok(outer_field.clone())
        } else {
            parallel::escape_field(f, d, &grid, mode).map_err(core_error)
        }
    })?;
    let compact = component_of_zero(&outer_field)?;
    let invariance = invariance_check(&compact, f, mode)?;
    let pushforward = pushforward_check_with(
        phi,
        f,
        &domain,
        &grid,
        mode,
        |_| Ok(outer_field.clone()),
        |engine| parallel::field(engine, &grid).map_err(core_error),
    )?;
    Ok(HedgehogSuite {
        compact,
        invariance,
        nested,
        pushforward,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// The core callbacks speak core errors; grid work never produces others.
fn core_error(e: Error) -> hedgehog_core::Error {
    match e {
        Error::Core(e) => e,
        other => hedgehog_core::Error::InvalidInput(other.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaRow {
    pub resolution: usize,
    pub area: f64,
    pub interior_area: f64,
    /// Area of two rows of cells at this resolution.
    pub row_slack: f64,
    pub seconds: f64,
}

/// Area and interior area of `K(U)` at each resolution, same `max_iter`.
pub fn area_sequence(
    f: &TruncatedGerm<f64>,
    radius: f64,
    resolutions: &[usize],
    max_iter: u32,
    mode: InverseMode,
) -> Result<Vec<AreaRow>> {
    let domain = AdmissibleDomain::disk(radius)?;
    resolutions
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let grid = GridSpec::for_radius(radius, n, max_iter)?;
            let k = component_of_zero(&parallel::escape_field(f, &domain, &grid, mode)?)?;
            Ok(AreaRow {
                resolution: n,
                area: k.area,
                interior_area: k.interior_area,
                row_slack: 2.0 * n as f64 * grid.cell_area(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Interior area never grows by more than two cell rows of the coarser grid.
pub fn interior_non_increasing(rows: &[AreaRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].interior_area <= w[0].interior_area + w[0].row_slack)
}

/// Interior area positive throughout, with the last refinement changing it
/// by at most two cell rows of the coarser grid.
pub fn interior_stabilizes(rows: &[AreaRow]) -> bool {
    rows.iter().all(|r| r.interior_area > 0.0)
        && rows
            .windows(2)
            .last()
            .is_some_and(|w| (w[1].interior_area - w[0].interior_area).abs() <= w[0].row_slack)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSetup {
    /// Truncation order of the germ before reduction.
    pub order: usize,
    pub d: usize,
    pub radius: f64,
    pub resolution: usize,
    pub max_iter: u32,
    pub zn_start: Complex<f64>,
    pub zn_ratio: f64,
    pub zn_count: usize,
    /// Ball radii `ball_constant |z_n|^{d+1}`.
    pub ball_constant: f64,
    /// Convergent indices probed (all reported).
    pub convergents: Vec<usize>,
    /// Number of convergents that decide the verdict.
    pub decisive: usize,
    pub k0: usize,
}

impl Default for ProbeSetup {
    fn default() -> Self {
        Self {
            order: 16,
            d: 1,
            radius: 0.2,
            resolution: 256,
            max_iter: 2000,
            zn_start: Complex::from_polar(0.15, 1.0),
            zn_ratio: 0.9,
            zn_count: 200,
            ball_constant: 1.0,
            convergents: (1..=24).collect(),
            decisive: 5,
            k0: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeRun {
    pub reduced: TruncatedGerm<f64>,
    pub compact: CompactApprox,
    pub report: ProbeReport,
    /// Convergents with `q_k^{-1/(d+1)} < |z_0|`, so that `n_k >= 1`.
    pub decisive: Vec<usize>,
    pub pass: bool,
    pub seconds: f64,
}

/// Convergent indices whose threshold `q_k^{-1/(d+1)}` lies below `|z_0|`,
/// i.e. the first qualifying `z_n` is preceded by a larger one.
pub fn reaching_convergents(alpha: &RotationNumber, ks: &[usize], d: usize, z0: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &k in ks {
        match alpha.q_u64(k)? {
            Some(q) if q <= MAX_PROBE_DENOMINATOR => {
                if (q as f64).powf(-1.0 / (d + 1) as f64) < z0 {
                    out.push(k);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Reduce the golden quadratic to order `2d + 5`, render its compact, and
/// probe every listed convergent. The verdict uses the first `decisive`
/// convergents whose thresholds fall inside the `z_n` sequence.
pub fn probe_pipeline(setup: &ProbeSetup) -> Result<ProbeRun> {
    let start = Instant::now();
    let (alpha, f) = golden_quadratic(setup.order)?;
    let config = ProbeConfig {
        k0: setup.k0,
        ..ProbeConfig::new(setup.d, Vec::new())
    };
    let reduced = reduce_to_order(&f, config.n)?.reduced;
    let domain = AdmissibleDomain::disk(setup.radius)?;
    let grid = GridSpec::for_radius(setup.radius, setup.resolution, setup.max_iter)?;
    let compact = component_of_zero(&parallel::escape_field(&reduced, &domain, &grid, InverseMode::default())?)?;
    let zn: Vec<Complex<f64>> = (0..setup.zn_count)
        .map(|i| setup.zn_start * setup.zn_ratio.powi(i as i32))
        .collect();
    let radii: Vec<f64> = zn
        .iter()
        .map(|z| setup.ball_constant * z.norm().powi(setup.d as i32 + 1))
        .collect();
    let usable: Vec<usize> = setup
        .convergents
        .iter()
        .copied()
        .filter(|&k| matches!(alpha.q_u64(k), Ok(Some(q)) if q <= MAX_PROBE_DENOMINATOR))
        .collect();
    let report = verify_probe(
        &reduced,
        &alpha,
        &compact,
        &zn,
        &radii,
        &ProbeConfig {
            convergents: usable.clone(),
            ..config
        },
    )?;
    let decisive: Vec<usize> = reaching_convergents(&alpha, &usable, setup.d, setup.zn_start.norm())?
        .into_iter()
        .filter(|&k| k > setup.k0)
        .take(setup.decisive)
        .collect();
    let pass = decisive.len() == setup.decisive
        && report.hypothesis_ok
        && report
            .outcomes
            .iter()
            .filter(|o| decisive.contains(&o.k))
            .all(|o| o.success);
    Ok(ProbeRun {
        reduced,
        compact,
        report,
        decisive,
        pass,
        seconds: start.elapsed().as_secs_f64(),
    })
}
