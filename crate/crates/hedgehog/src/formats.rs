//! JSON, CSV and PPM artifacts.
//!
//! Masks are written top row first with the imaginary axis pointing up, so
//! grid row `n - 1` is the first image row.

use std::fs;
use std::path::{Path, PathBuf};

use hedgehog_core::compacta::{CompactApprox, EscapeField, GridSpec};
use hedgehog_core::normal_form::{CommutationReport, CommutationVerdict, NormalFormResult};
use hedgehog_core::parabolic::TrackedDomain;
use hedgehog_core::probe::ProbeReport;
use hedgehog_core::raster::Mask;
use hedgehog_core::report::VerificationReport;
use hedgehog_core::scalar::{from_c64, to_c64};
use hedgehog_core::{Real, RotationNumber, TruncatedGerm};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, Luma, Rgb, RgbImage};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    text.push('\n');
    fs::write(path, text).map_err(Error::io(path))
}

fn pair(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

/// `{ "order": N, "coeffs": [[re, im], ...], "tag": string }`, coefficients
/// of `z^1..z^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermJson {
    pub order: usize,
    pub coeffs: Vec<[f64; 2]>,
    #[serde(default)]
    pub tag: String,
}

impl GermJson {
    pub fn from_germ<T: Real>(g: &TruncatedGerm<T>) -> Self {
        Self {
            order: g.order(),
            coeffs: g.coeffs().iter().map(|c| pair(to_c64(c))).collect(),
            tag: g.tag().unwrap_or_default().to_string(),
        }
    }

    pub fn to_germ<T: Real>(&self) -> Result<TruncatedGerm<T>> {
        if self.coeffs.len() != self.order {
            return Err(Error::Config(format!(
                "germ order {} but {} coefficients",
                self.order,
                self.coeffs.len()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|&[re, im]| from_c64::<T>(Complex::new(re, im)))
            .collect();
        let g = TruncatedGerm::new(coeffs)?;
        Ok(if self.tag.is_empty() { g } else { g.with_tag(self.tag.clone()) })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(Error::json(path))
    }
}

/// `{ "pq": [0, a1, ...], "precision_bits": B }`; quotients beyond `u64`
/// are written as decimal strings.
pub fn rotation_json(alpha: &RotationNumber) -> Value {
    let pq: Vec<Value> = alpha
        .partial_quotients()
        .iter()
        .map(|a| {
            let s = a.to_string();
            s.parse::<u64>().map(Value::from).unwrap_or(Value::String(s))
        })
        .collect();
    json!({ "pq": pq, "precision_bits": alpha.precision_bits() })
}

pub fn normal_form_json<T: Real>(nf: &NormalFormResult<T>) -> Value {
    json!({
        "order_achieved": nf.order_achieved,
        "small_divisors": nf.small_divisors,
        "phi": GermJson::from_germ(&nf.phi),
        "reduced": GermJson::from_germ(&nf.reduced),
        "residual": nf.residual,
        "note": nf.note(),
    })
}

pub fn commutation_json<T: Real>(report: &CommutationReport<T>) -> Value {
    let verdict = match &report.verdict {
        CommutationVerdict::Commute { order } => json!({ "commute": true, "order": order }),
        CommutationVerdict::Obstruction { d, c_d } => {
            json!({ "commute": false, "d": d, "c_d": pair(to_c64(c_d)) })
        }
    };
    json!({
        "verdict": verdict,
        "summary": match &report.verdict {
            CommutationVerdict::Commute { order } => format!("commute to order {order}"),
            CommutationVerdict::Obstruction { d, c_d } => {
                let c = to_c64(c_d);
                format!("obstruction: commutator is z + ({:.6e} {:+.6e}i) z^{} + ...", c.re, c.im, d + 1)
            }
        },
        "multiplier_defect": report.multiplier_defect,
        "max_relative_deviation": report.max_deviation(),
        "relative_deviation": report.relative_deviation,
        "tol": report.tol,
        "commutator": GermJson::from_germ(&report.commutator),
    })
}

pub fn report_json(report: &VerificationReport, config: &Value) -> Value {
    let samples: Vec<Value> = report
        .samples
        .iter()
        .map(|s| json!({ "r": s.r, "M": s.m, "value": s.value, "ceiling": s.ceiling, "pass": s.pass }))
        .collect();
    let constants: serde_json::Map<String, Value> = report
        .measured_constants
        .iter()
        .map(|(k, v)| (k.clone(), json_f64(*v)))
        .collect();
    json!({
        "harness": report.harness,
        "quantity": report.quantity,
        "pass": report.pass,
        "degenerate": report.degenerate,
        "fitted_slope": report.fitted_slope,
        "expected_slope": report.expected_slope,
        "slope_tolerance": report.slope_tolerance,
        "measured_constants": constants,
        "notes": report.notes,
        "samples": samples,
        "config": config,
    })
}

/// Infinite values become strings; JSON has no infinity.
fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn probe_json(report: &ProbeReport, config: &Value) -> Value {
    let outcomes: Vec<Value> = report
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "k": o.k, "q": o.q, "n": o.n,
                "z_n": pair(o.z_n), "radius": o.radius, "w": pair(o.w), "m": o.m,
                "rotation_gap": o.rotation_gap, "landed": pair(o.landed),
                "distance": o.distance, "success": o.success,
            })
        })
        .collect();
    json!({
        "harness": "probe",
        "pass": report.pass,
        "k0": report.k0,
        "epsilon": report.epsilon,
        "radius_constant": report.radius_constant,
        "hypothesis_ok": report.hypothesis_ok,
        "notes": report.notes,
        "outcomes": outcomes,
        "config": config,
    })
}

#[derive(Serialize)]
struct CsvRow {
    r: f64,
    #[serde(rename = "M")]
    m: Option<u64>,
    error_k: Option<f64>,
    ceilings: Option<f64>,
    pass: bool,
}

fn write_rows(path: &Path, rows: impl Iterator<Item = CsvRow>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(Error::io(path))
}

/// Columns `r, M, error_k, ceilings, pass`; `error_k` is the measured quantity.
pub fn write_report_csv(path: &Path, report: &VerificationReport) -> Result<()> {
    write_rows(
        path,
        report.samples.iter().map(|s| CsvRow {
            r: s.r,
            m: s.m,
            error_k: s.value,
            ceilings: s.ceiling,
            pass: s.pass,
        }),
    )
}

/// Probe rows: `r = |z_n|`, `M = m`, `error_k = |f^m(w) - z_n|`, `ceilings` the ball radius.
pub fn write_probe_csv(path: &Path, report: &ProbeReport) -> Result<()> {
    write_rows(
        path,
        report.outcomes.iter().map(|o| CsvRow {
            r: o.z_n.norm(),
            m: Some(o.m),
            error_k: Some(o.distance),
            ceilings: Some(o.radius),
            pass: o.success,
        }),
    )
}

/// `base.json` and `base.csv` next to each other.
pub fn paired_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("json"), out.with_extension("csv"))
}

/// Binary PGM (P5), set cells white.
pub fn write_mask_pgm(path: &Path, mask: &Mask) -> Result<()> {
    let n = mask.size() as u32;
    let img = GrayImage::from_fn(n, n, |x, y| {
        let row = (n - 1 - y) as usize;
        Luma([if mask.get(row, x as usize) { 255 } else { 0 }])
    });
    write_pnm(path, img.as_raw(), n, ExtendedColorType::L8, PnmSubtype::Graymap(SampleEncoding::Binary))
}

/// Binary PPM (P6) heatmap of orbit lengths on a log scale; kept pixels white.
pub fn write_heatmap_ppm(path: &Path, field: &EscapeField) -> Result<()> {
    let n = field.grid.resolution as u32;
    let scale = ((2 * field.grid.max_iter) as f64 + 1.0).ln();
    let img = RgbImage::from_fn(n, n, |x, y| {
        let row = (n - 1 - y) as usize;
        let col = x as usize;
        if field.flags.get(row, col) {
            return Rgb([255, 255, 255]);
        }
        if !field.domain.get(row, col) {
            return Rgb([0, 0, 0]);
        }
        let t = (field.iterations[row * n as usize + col] as f64 + 1.0).ln() / scale;
        let v = (255.0 * t) as u8;
        Rgb([v, v / 2, 255 - v])
    });
    write_pnm(path, img.as_raw(), n, ExtendedColorType::Rgb8, PnmSubtype::Pixmap(SampleEncoding::Binary))
}

fn write_pnm(path: &Path, data: &[u8], n: u32, color: ExtendedColorType, subtype: PnmSubtype) -> Result<()> {
    let file = std::fs::File::create(path).map_err(Error::io(path))?;
    PnmEncoder::new(std::io::BufWriter::new(file))
        .with_subtype(subtype)
        .write_image(data, n, n, color)
        .map_err(|source| Error::Image {
            path: path.into(),
            source,
        })
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.into(),
            source,
        })?
        .to_luma8();
    if img.width() != img.height() {
        return Err(Error::Precondition(format!("{}: mask image is not square", path.display())));
    }
    let n = img.width() as usize;
    Ok(Mask::from_fn(n, |row, col| img.get_pixel(col as u32, (n - 1 - row) as u32)[0] >= 128))
}

/// JSON sidecar written next to a mask image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactSidecar {
    pub radius: f64,
    pub resolution: usize,
    pub max_iter: u32,
    pub extent: f64,
    pub area: f64,
    pub interior_area: f64,
    pub contact: bool,
    /// Mask image, relative to the sidecar.
    pub mask: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germ: Option<GermJson>,
    #[serde(default)]
    pub extra: Value,
    #[serde(default)]
    pub config: Value,
}

impl CompactSidecar {
    pub fn new(k: &CompactApprox, radius: f64, mask: &Path, config: Value) -> Self {
        Self {
            radius,
            resolution: k.grid.resolution,
            max_iter: k.grid.max_iter,
            extent: k.grid.extent,
            area: k.area,
            interior_area: k.interior_area,
            contact: k.contact,
            mask: mask.file_name().map(PathBuf::from).unwrap_or_else(|| mask.into()),
            germ: None,
            extra: Value::Null,
            config,
        }
    }
}

/// Writes `out` (mask image) and `out.json`; returns the sidecar path.
pub fn write_compact(out: &Path, sidecar: &CompactSidecar, k: &CompactApprox) -> Result<PathBuf> {
    write_mask_pgm(out, &k.mask)?;
    let side = out.with_extension("json");
    write_json(&side, sidecar)?;
    Ok(side)
}

/// Reloads a compact from its sidecar and mask image.
pub fn read_compact(sidecar: &Path) -> Result<(CompactSidecar, CompactApprox)> {
    let text = fs::read_to_string(sidecar)
        .map_err(|e| Error::Precondition(format!("needs compact approximation: {}: {e}", sidecar.display())))?;
    let meta: CompactSidecar = serde_json::from_str(&text).map_err(Error::json(sidecar))?;
    let image = sidecar.parent().unwrap_or(Path::new(".")).join(&meta.mask);
    let mask = read_mask(&image)?;
    if mask.size() != meta.resolution {
        return Err(Error::Precondition(format!(
            "{}: image is {}² but the sidecar says {}²",
            image.display(),
            mask.size(),
            meta.resolution
        )));
    }
    let grid = GridSpec::new(meta.resolution, meta.extent, meta.max_iter)?;
    let cell_area = grid.cell_area();
    let k = CompactApprox {
        grid,
        contact: meta.contact,
        area: mask.count() as f64 * cell_area,
        interior_area: mask.interior().count() as f64 * cell_area,
        mask,
    };
    Ok((meta, k))
}

pub fn tracking_json(domains: &[TrackedDomain], stopped: Option<String>, config: &Value) -> Value {
    let polys: Vec<Value> = domains
        .iter()
        .map(|d| {
            json!({
                "n": d.n,
                "basepoint": pair(d.basepoint),
                "boundary_distance": d.boundary_distance(),
                "vertices": d.vertices.iter().map(|&v| pair(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "domains": polys, "stopped": stopped, "config": config })
}
