//! One function per CLI command. Each takes the merged configuration and
//! returns whether the run passed, a one-line summary and the files written.

use std::path::{Path, PathBuf};

use hedgehog_core::compacta::{component_of_zero, default_max_iter, AdmissibleDomain, GridSpec};
use hedgehog_core::normal_form::{ensure_reduced, formal_commutation_check, reduce_to_order};
use hedgehog_core::orbit::{verify_iterate_count, verify_shadowing, IterateCountConfig, ShadowingConfig};
use hedgehog_core::parabolic::{
    flower_report, tangency, track_backward, verify_boundary_distance, BoundaryDistanceConfig, TrackConfig,
};
use hedgehog_core::probe::{verify_probe, ProbeConfig, MAX_PROBE_DENOMINATOR};
use hedgehog_core::report::VerificationReport;
use hedgehog_core::series::DEFAULT_TOL;
use hedgehog_core::{Real, TruncatedGerm};
use num_complex::Complex;
use serde_json::json;

use crate::config::{parse_index_list, parse_list, ExperimentConfig};
use crate::error::{Error, Result};
use crate::formats::{self, CompactSidecar, GermJson};
use crate::{parallel, with_real};

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Harness {
    IterateCount,
    Shadowing,
    BoundaryDistance,
    Probe,
}

impl std::str::FromStr for Harness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterate-count" => Ok(Harness::IterateCount),
            "shadowing" => Ok(Harness::Shadowing),
            "boundary-distance" => Ok(Harness::BoundaryDistance),
            "probe" => Ok(Harness::Probe),
            other => Err(Error::Config(format!(
                "unknown harness '{other}' (iterate-count, shadowing, boundary-distance, probe)"
            ))),
        }
    }
}

impl Harness {
    pub fn name(self) -> &'static str {
        match self {
            Harness::IterateCount => "iterate-count",
            Harness::Shadowing => "shadowing",
            Harness::BoundaryDistance => "boundary-distance",
            Harness::Probe => "probe",
        }
    }

    pub fn defaults(self) -> ExperimentConfig {
        let base = ExperimentConfig {
            out: Some(PathBuf::from(self.name())),
            ..Default::default()
        };
        match self {
            Harness::IterateCount => ExperimentConfig {
                germ: Some("power".into()),
                radii: Some("0.1:-0.01:8".into()),
                samples: Some(64),
                k_max: Some(200_000),
                slope_tolerance: Some(0.3),
                ..base
            },
            Harness::Shadowing => ExperimentConfig {
                germ: Some("power".into()),
                radii: Some("0.03,0.04,0.05".into()),
                ks: Some("1,2,5,10,20,50,100,200,500,1000".into()),
                samples: Some(8),
                slope_tolerance: Some(0.2),
                ..base
            },
            Harness::BoundaryDistance => ExperimentConfig {
                germ: Some("parabolic".into()),
                z0: Some([0.2, 0.0]),
                rho: Some(0.05),
                n_range: Some("50:50:10".into()),
                vertices: Some(64),
                slope_tolerance: Some(0.2),
                ..base
            },
            Harness::Probe => ExperimentConfig {
                germ: Some("reduced".into()),
                d: Some(1),
                order: Some(16),
                zn_start: Some([0.15 * 1f64.cos(), 0.15 * 1f64.sin()]),
                zn_ratio: Some(0.9),
                zn_count: Some(200),
                ball_constant: Some(1.0),
                convergents: Some("1:1:24".into()),
                k0: Some(1),
                ..base
            },
        }
    }
}

fn domain_and_grid(cfg: &ExperimentConfig) -> Result<(AdmissibleDomain, GridSpec)> {
    let radius = ExperimentConfig::require(&cfg.radius, "radius")?;
    let domain = match cfg.margin {
        Some(m) => AdmissibleDomain::new(radius, m)?,
        None => AdmissibleDomain::disk(radius)?,
    };
    let res = ExperimentConfig::require(&cfg.resolution, "res")?;
    let max_iter = cfg.max_iter.unwrap_or_else(|| default_max_iter(res));
    Ok((domain, GridSpec::for_radius(radius, res, max_iter)?))
}

fn out_path(cfg: &ExperimentConfig) -> Result<PathBuf> {
    ExperimentConfig::require(&cfg.out, "out")
}

pub fn render_defaults() -> ExperimentConfig {
    ExperimentConfig {
        germ: Some("quad".into()),
        radius: Some(0.2),
        resolution: Some(512),
        ..Default::default()
    }
}

/// Escape field, compact of 0, mask image and sidecar.
pub fn render(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = out_path(cfg)?;
    let (domain, grid) = domain_and_grid(cfg)?;
    let mode = cfg.inverse_mode()?;
    let mut cfg = cfg.clone();
    cfg.max_iter = Some(grid.max_iter);
    let (field, germ) = with_real!(cfg.precision(), T => {
        let f = cfg.germ::<T>(None)?;
        (parallel::escape_field(&f, &domain, &grid, mode)?, GermJson::from_germ(&f))
    });
    let k = component_of_zero(&field)?;
    let mut side = CompactSidecar::new(&k, domain.radius(), &out, cfg.to_json());
    side.germ = Some(germ);
    side.extra = json!({
        "pixels": k.mask.count(),
        "reach": k.reach(),
        "flagged": field.count(),
        "alpha": formats::rotation_json(&cfg.alpha()?),
    });
    let mut files = vec![out.clone(), formats::write_compact(&out, &side, &k)?];
    if cfg.heatmap == Some(true) {
        let heat = heatmap_path(&out);
        formats::write_heatmap_ppm(&heat, &field)?;
        files.push(heat);
    }
    Ok(Outcome {
        pass: true,
        summary: format!(
            "compact: {} pixels, area {:.6e}, interior area {:.6e}, contact {}",
            k.mask.count(),
            k.area,
            k.interior_area,
            k.contact
        ),
        files,
    })
}

fn heatmap_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("compact");
    out.with_file_name(format!("{stem}-iterations.ppm"))
}

pub fn flower_defaults() -> ExperimentConfig {
    ExperimentConfig {
        germ: Some("parabolic".into()),
        radius: Some(0.3),
        resolution: Some(512),
        ..Default::default()
    }
}

/// Compact of a parabolic germ with petal densities and symmetry distances.
pub fn flower(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = out_path(cfg)?;
    let (domain, grid) = domain_and_grid(cfg)?;
    let mut cfg = cfg.clone();
    cfg.max_iter = Some(grid.max_iter);
    let f = cfg.germ::<f64>(None)?;
    let field = parallel::escape_field(&f, &domain, &grid, cfg.inverse_mode()?)?;
    let rep = flower_report(&f, component_of_zero(&field)?, domain.radius())?;
    let mut side = CompactSidecar::new(&rep.compact, domain.radius(), &out, cfg.to_json());
    side.germ = Some(GermJson::from_germ(&f));
    side.extra = json!({
        "attracting_density": rep.attracting_density,
        "repelling_density": rep.repelling_density,
        "bisector_density": rep.bisector_density,
        "conjugation_distance": rep.conjugation_distance,
        "reflection_distance": rep.reflection_distance,
    });
    let files = vec![out.clone(), formats::write_compact(&out, &side, &rep.compact)?];
    Ok(Outcome {
        pass: true,
        summary: format!(
            "flower: {} pixels; density on attracting axes {:?}, on bisectors {:?}",
            rep.compact.mask.count(),
            rep.attracting_density,
            rep.bisector_density
        ),
        files,
    })
}

pub fn track_defaults() -> ExperimentConfig {
    ExperimentConfig {
        germ: Some("parabolic".into()),
        z0: Some([0.2, 0.0]),
        rho: Some(0.05),
        steps: Some(500),
        vertices: Some(64),
        ..Default::default()
    }
}

/// Backward images of a small disk, as polygons.
pub fn track(cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = out_path(cfg)?;
    let f = cfg.germ::<f64>(None)?;
    let [re, im] = ExperimentConfig::require(&cfg.z0, "z0")?;
    let rho = ExperimentConfig::require(&cfg.rho, "rho")?;
    let steps = ExperimentConfig::require(&cfg.steps, "steps")?;
    let track_cfg = TrackConfig {
        vertices: cfg.vertices.unwrap_or(64),
        ..TrackConfig::default()
    };
    let tracking = track_backward(&f, Complex::new(re, im), rho, steps, &track_cfg)?;
    let stopped = tracking.stopped.as_ref().map(|e| e.to_string());
    formats::write_json(&out, &formats::tracking_json(&tracking.domains, stopped.clone(), &cfg.to_json()))?;
    Ok(Outcome {
        pass: stopped.is_none(),
        summary: match stopped {
            None => format!("tracked {} steps", steps),
            Some(e) => format!("stopped after {} steps: {e}", tracking.domains.len() - 1),
        },
        files: vec![out],
    })
}

fn write_report(cfg: &ExperimentConfig, report: &VerificationReport) -> Result<Outcome> {
    let out = out_path(cfg)?;
    let (json_path, csv_path) = formats::paired_paths(&out);
    formats::write_json(&json_path, &formats::report_json(report, &cfg.to_json()))?;
    formats::write_report_csv(&csv_path, report)?;
    let slope = report
        .fitted_slope
        .map_or("none".to_string(), |s| format!("{s:.3}"));
    Ok(Outcome {
        pass: report.pass,
        summary: format!(
            "{}: slope {slope} (expected {} ± {}), {}",
            report.harness,
            report.expected_slope,
            report.slope_tolerance,
            if report.pass { "pass" } else { "FAIL" }
        ),
        files: vec![json_path, csv_path],
    })
}

pub fn verify(harness: Harness, cfg: &ExperimentConfig) -> Result<Outcome> {
    match harness {
        Harness::IterateCount => {
            let n = ExperimentConfig::require(&cfg.n, "N")?;
            let radii = parse_list(&ExperimentConfig::require(&cfg.radii, "radii")?)?;
            let ic = IterateCountConfig {
                samples_per_radius: cfg.samples.unwrap_or(64),
                k_max: cfg.k_max.unwrap_or(200_000),
                slope_tolerance: cfg.slope_tolerance.unwrap_or(0.3),
                reduced_tol: cfg.tol.unwrap_or(DEFAULT_TOL),
                ..IterateCountConfig::default()
            };
            let report = with_real!(cfg.precision(), T => {
                let f = cfg.germ::<T>(None)?;
                verify_iterate_count(&f, n, &radii, &ic)?
            });
            write_report(cfg, &report)
        }
        Harness::Shadowing => {
            let n = ExperimentConfig::require(&cfg.n, "N")?;
            let radii = parse_list(&ExperimentConfig::require(&cfg.radii, "radii")?)?;
            let ks: Vec<u64> = parse_index_list(&ExperimentConfig::require(&cfg.ks, "ks")?)?
                .into_iter()
                .map(|k| k as u64)
                .collect();
            let sc = ShadowingConfig {
                samples_per_radius: cfg.samples.unwrap_or(8),
                ks,
                slope_tolerance: cfg.slope_tolerance.unwrap_or(0.2),
                reduced_tol: cfg.tol.unwrap_or(DEFAULT_TOL),
                ..ShadowingConfig::default()
            };
            let alpha = cfg.alpha()?;
            let report = with_real!(cfg.precision(), T => {
                let f = cfg.germ::<T>(None)?;
                verify_shadowing(&f, &alpha, n, &radii, &sc)?
            });
            write_report(cfg, &report)
        }
        Harness::BoundaryDistance => {
            let f = cfg.germ::<f64>(None)?;
            let [re, im] = ExperimentConfig::require(&cfg.z0, "z0")?;
            let rho = ExperimentConfig::require(&cfg.rho, "rho")?;
            let ns = parse_index_list(&ExperimentConfig::require(&cfg.n_range, "n-range")?)?;
            let bd = BoundaryDistanceConfig {
                ns,
                slope_tolerance: cfg.slope_tolerance.unwrap_or(0.2),
                floor_fraction: 0.1,
                track: TrackConfig {
                    vertices: cfg.vertices.unwrap_or(64),
                    ..TrackConfig::default()
                },
            };
            let report = verify_boundary_distance(&f, Complex::new(re, im), rho, &bd)?;
            write_report(cfg, &report)
        }
        Harness::Probe => probe(cfg),
    }
}

fn probe(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sidecar = cfg
        .compact
        .clone()
        .ok_or_else(|| Error::Precondition("probe needs compact approximation: render one and pass --compact".into()))?;
    let (_, compact) = formats::read_compact(&sidecar)?;
    let d = ExperimentConfig::require(&cfg.d, "d")?;
    let mut cfg = cfg.clone();
    if cfg.n.is_none() {
        cfg.n = Some(2 * d + 5);
    }
    let alpha = cfg.alpha()?;
    let f = cfg.germ::<f64>(None)?;
    let [re, im] = ExperimentConfig::require(&cfg.zn_start, "zn-start")?;
    let ratio = ExperimentConfig::require(&cfg.zn_ratio, "zn-ratio")?;
    let count = ExperimentConfig::require(&cfg.zn_count, "zn-count")?;
    let c = ExperimentConfig::require(&cfg.ball_constant, "ball-constant")?;
    let zn: Vec<Complex<f64>> = (0..count)
        .map(|i| Complex::new(re, im) * ratio.powi(i as i32))
        .collect();
    let radii: Vec<f64> = zn.iter().map(|z| c * z.norm().powi(d as i32 + 1)).collect();
    let convergents: Vec<usize> = parse_index_list(&ExperimentConfig::require(&cfg.convergents, "convergents")?)?
        .into_iter()
        .filter(|&k| matches!(alpha.q_u64(k), Ok(Some(q)) if q <= MAX_PROBE_DENOMINATOR))
        .collect();
    let pc = ProbeConfig {
        n: cfg.n.expect("set above"),
        k0: cfg.k0.unwrap_or(1),
        reduced_tol: cfg.tol.unwrap_or(1e-9),
        ..ProbeConfig::new(d, convergents)
    };
    let report = verify_probe(&f, &alpha, &compact, &zn, &radii, &pc)?;
    let out = out_path(&cfg)?;
    let (json_path, csv_path) = formats::paired_paths(&out);
    formats::write_json(&json_path, &formats::probe_json(&report, &cfg.to_json()))?;
    formats::write_probe_csv(&csv_path, &report)?;
    let hits = report.outcomes.iter().filter(|o| o.success).count();
    Ok(Outcome {
        pass: report.pass,
        summary: format!(
            "probe: {hits}/{} convergents landed; {}",
            report.outcomes.len(),
            if report.pass { "pass" } else { "FAIL" }
        ),
        files: vec![json_path, csv_path],
    })
}

pub fn normal_form_defaults() -> ExperimentConfig {
    ExperimentConfig {
        germ: Some("quad".into()),
        n: Some(12),
        ..Default::default()
    }
}

fn emit(cfg: &ExperimentConfig, value: &serde_json::Value) -> Result<Vec<PathBuf>> {
    match &cfg.out {
        Some(p) => {
            formats::write_json(p, value)?;
            Ok(vec![p.clone()])
        }
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("json"));
            Ok(Vec::new())
        }
    }
}

/// Reduces to `λz + O(z^N)` and checks the reduced coefficients `2..N-1`.
pub fn normal_form(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = ExperimentConfig::require(&cfg.n, "N")?;
    let tol = cfg.tol.unwrap_or(1e-9);
    let (value, ok, achieved) = with_real!(cfg.precision(), T => {
        let f = cfg.germ::<T>(None)?;
        let nf = reduce_to_order(&f, n)?;
        let ok = ensure_reduced(&nf.reduced, n, tol).is_ok();
        (formats::normal_form_json(&nf), ok, nf.order_achieved)
    });
    let mut value = value;
    value["self_check"] = json!({ "reduced_below": tol, "pass": ok });
    value["config"] = cfg.to_json();
    let files = emit(cfg, &value)?;
    Ok(Outcome {
        pass: ok,
        summary: format!("reduced to order {achieved}; coefficients 2..{} below {tol}: {ok}", n - 1),
        files,
    })
}

pub fn commutator_defaults() -> ExperimentConfig {
    ExperimentConfig {
        f: Some("quad".into()),
        g: Some("quad-squared".into()),
        ..Default::default()
    }
}

/// `[f, g]` and its first obstruction. Both verdicts are successful runs.
pub fn commutator(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f_name = ExperimentConfig::require(&cfg.f, "f")?;
    let g_name = ExperimentConfig::require(&cfg.g, "g")?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let (value, summary) = with_real!(cfg.precision(), T => {
        let f = cfg.germ::<T>(Some(&f_name))?;
        let g = cfg.germ::<T>(Some(&g_name))?;
        commutator_value(&f, &g, tol)?
    });
    let mut value = value;
    value["config"] = cfg.to_json();
    let files = emit(cfg, &value)?;
    Ok(Outcome {
        pass: true,
        summary,
        files,
    })
}

fn commutator_value<T: Real>(f: &TruncatedGerm<T>, g: &TruncatedGerm<T>, tol: f64) -> Result<(serde_json::Value, String)> {
    let report = formal_commutation_check(f, g, tol)?;
    let mut value = formats::commutation_json(&report);
    // Name the parabolic scenario when one side is tangent to the identity.
    for (name, h) in [("f", f), ("g", g)] {
        if let Ok((d, _)) = tangency(&h.cast::<f64>()) {
            value["parabolic"] = json!({ "germ": name, "d": d });
        }
    }
    let summary = value["summary"].as_str().unwrap_or_default().to_string();
    Ok((value, summary))
}
