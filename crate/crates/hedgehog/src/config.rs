//! Experiment configuration: JSON files, command-line overrides and the
//! named germ families.
//!
//! Precedence is flags, then the config file, then per-command defaults.
//! The merged configuration is echoed into every output.

use std::fs;
use std::path::{Path, PathBuf};

use hedgehog_core::normal_form::reduce_to_order;
use hedgehog_core::rotation::LiouvilleGrowth;
use hedgehog_core::scalar::from_c64;
use hedgehog_core::{InverseMode, Real, RotationNumber, TruncatedGerm};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::GermJson;

/// Depth of the default golden-mean rotation number.
pub const GOLDEN_DEPTH: usize = 40;

pub const DEFAULT_ORDER: usize = 20;

/// Every knob a command may read. Unset fields fall through to the next
/// source.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named family (see [`GERM_FAMILIES`]) or `file`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub germ: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub germ_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Reduction order, or the exponent of the `power` family.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_cf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_liouville: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<u32>,
    /// `newton` or `series`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Tracking steps sampled by the boundary-distance harness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,

    /// Sidecar of a rendered compact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compact: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergents: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zn_start: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zn_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zn_count: Option<usize>,
    /// Ball radii are `ball_constant |z_n|^{d+1}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<bool>,
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills unset fields from `lower`.
    pub fn or(mut self, lower: &ExperimentConfig) -> Self {
        fill!(self, lower;
            germ, germ_file, order, n, alpha_cf, alpha_liouville, precision_bits,
            radius, margin, resolution, max_iter, inverse,
            d, radii, ks, samples, k_max, slope_tolerance, tol,
            n_range, z0, rho, steps, vertices,
            compact, convergents, zn_start, zn_ratio, zn_count, ball_constant, k0,
            f, g, out, heatmap,
        );
        self
    }

    /// Flags over an optional file over `defaults`.
    pub fn layered(flags: ExperimentConfig, file: Option<&Path>, defaults: &ExperimentConfig) -> Result<Self> {
        let from_file = match file {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        Ok(flags.or(&from_file).or(defaults))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn precision(&self) -> u32 {
        self.precision_bits.unwrap_or(53)
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_ORDER)
    }

    pub fn inverse_mode(&self) -> Result<InverseMode> {
        match self.inverse.as_deref() {
            None | Some("newton") => Ok(InverseMode::default()),
            Some("series") => Ok(InverseMode::Series),
            Some(other) => Err(Error::Config(format!("unknown inverse mode '{other}' (newton|series)"))),
        }
    }

    pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
        value.clone().ok_or_else(|| Error::Config(format!("missing --{name}")))
    }

    pub fn alpha(&self) -> Result<RotationNumber> {
        let alpha = match (&self.alpha_cf, &self.alpha_liouville) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either --alpha-cf or --alpha-liouville".into()));
            }
            (Some(cf), None) => cf
                .parse::<RotationNumber>()
                .map_err(|e| Error::Config(format!("--alpha-cf: {e}")))?,
            (None, Some(spec)) => parse_liouville(spec)?,
            (None, None) => RotationNumber::golden_mean(GOLDEN_DEPTH),
        };
        Ok(match self.precision_bits {
            Some(bits) => alpha.with_precision(bits),
            None => alpha,
        })
    }

    /// The germ named by `germ` (or `name` when given).
    pub fn germ<T: Real>(&self, name: Option<&str>) -> Result<TruncatedGerm<T>> {
        let name = match name {
            Some(n) => n.to_string(),
            None => Self::require(&self.germ, "germ")?,
        };
        build_germ(&name, self)
    }
}

/// Parses `depth=4,growth=exp` (growth `exp` or `tower`).
pub fn parse_liouville(spec: &str) -> Result<RotationNumber> {
    let mut depth = None;
    let mut growth = LiouvilleGrowth::Exp;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in '{part}'")))?;
        match key.trim() {
            "depth" => {
                depth = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad depth '{value}'")))?,
                )
            }
            "growth" => growth = value.trim().parse().map_err(|e: hedgehog_core::Error| Error::Config(e.to_string()))?,
            other => return Err(Error::Config(format!("unknown Liouville key '{other}'"))),
        }
    }
    let depth = depth.ok_or_else(|| Error::Config("Liouville spec needs depth=".into()))?;
    Ok(RotationNumber::liouville(depth, growth))
}

/// `start:step:count` (arithmetic) or a comma-separated list.
pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad list '{spec}' (start:step:count or a,b,c)"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, count] => {
            let start: f64 = start.parse().map_err(|_| bad())?;
            let step: f64 = step.parse().map_err(|_| bad())?;
            let count: usize = count.parse().map_err(|_| bad())?;
            if count == 0 {
                return Err(bad());
            }
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        [single] => single
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

/// [`parse_list`] for non-negative integers.
pub fn parse_index_list(spec: &str) -> Result<Vec<usize>> {
    parse_list(spec)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::Config(format!("'{spec}' must list non-negative integers")))
            }
        })
        .collect()
}

/// Names accepted by `--germ`, `--f` and `--g`.
pub const GERM_FAMILIES: &[(&str, &str)] = &[
    ("quad", "λz + z^2"),
    ("quad-squared", "(λz + z^2)∘(λz + z^2)"),
    ("rotation", "λz"),
    ("power", "λz + z^N"),
    ("reduced", "λz + z^2 conjugated to λz + O(z^N)"),
    ("parabolic", "z + z^2"),
    ("parabolic-cubic", "z - z^3"),
    ("mobius", "z/(1 - z)"),
    ("file", "coefficients from --germ-file"),
];

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    from_c64(Complex::new(re, im))
}

pub fn build_germ<T: Real>(name: &str, cfg: &ExperimentConfig) -> Result<TruncatedGerm<T>> {
    let order = cfg.order();
    let lam = || -> Result<Complex<T>> { Ok(cfg.alpha()?.multiplier::<T>()) };
    let one = c::<T>(1.0, 0.0);
    let quad = || -> Result<TruncatedGerm<T>> { Ok(TruncatedGerm::from_terms(order, &[(1, lam()?), (2, one.clone())])?) };
    let germ = match name {
        "quad" => quad()?,
        "quad-squared" => {
            let q = quad()?;
            q.compose(&q)
        }
        "rotation" => TruncatedGerm::linear(lam()?, order)?,
        "power" => {
            let n = ExperimentConfig::require(&cfg.n, "N")?;
            if n < 2 || n > order {
                return Err(Error::Config(format!("power germ needs 2 <= N <= order, got N = {n}")));
            }
            TruncatedGerm::from_terms(order, &[(1, lam()?), (n, one.clone())])?
        }
        "reduced" => {
            let n = ExperimentConfig::require(&cfg.n, "N")?;
            reduce_to_order(&quad()?, n)?.reduced
        }
        "parabolic" => TruncatedGerm::from_terms(order, &[(1, one.clone()), (2, one.clone())])?,
        "parabolic-cubic" => TruncatedGerm::from_terms(order, &[(1, one.clone()), (3, c(-1.0, 0.0))])?,
        "mobius" => TruncatedGerm::new(vec![one.clone(); order])?,
        "file" => {
            let path = ExperimentConfig::require(&cfg.germ_file, "germ-file")?;
            GermJson::load(&path)?.to_germ::<T>()?
        }
        other => {
            let names: Vec<&str> = GERM_FAMILIES.iter().map(|(n, _)| *n).collect();
            return Err(Error::Config(format!("unknown germ '{other}'; known: {}", names.join(", "))));
        }
    };
    Ok(germ.with_tag(name))
}

/// Runs `$body` with `$T` bound to the narrowest scalar carrying `$bits`.
#[macro_export]
macro_rules! with_real {
    ($bits:expr, $T:ident => $body:expr) => {{
        let bits: u32 = $bits;
        if bits <= 53 {
            type $T = f64;
            $body
        } else if bits <= 106 {
            type $T = $crate::hedgehog_core::Dd;
            $body
        } else if bits <= 128 {
            type $T = $crate::hedgehog_core::Mp<128>;
            $body
        } else if bits <= 256 {
            type $T = $crate::hedgehog_core::Mp<256>;
            $body
        } else if bits <= 512 {
            type $T = $crate::hedgehog_core::Mp<512>;
            $body
        } else {
            type $T = $crate::hedgehog_core::Mp<1024>;
            $body
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("0.1:0.02:3").unwrap().len(), 3);
        assert!((parse_list("0.1:0.02:3").unwrap()[2] - 0.14).abs() < 1e-15);
        assert_eq!(parse_list("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_index_list("50:50:3").unwrap(), vec![50, 100, 150]);
        assert!(parse_list("1:2").is_err());
        assert!(parse_index_list("0.5").is_err());
    }

    #[test]
    fn precedence() {
        let flags = ExperimentConfig {
            radius: Some(0.3),
            ..Default::default()
        };
        let file = ExperimentConfig {
            radius: Some(0.1),
            resolution: Some(128),
            ..Default::default()
        };
        let defaults = ExperimentConfig {
            radius: Some(0.2),
            resolution: Some(512),
            max_iter: Some(100),
            ..Default::default()
        };
        let merged = flags.or(&file).or(&defaults);
        assert_eq!(merged.radius, Some(0.3));
        assert_eq!(merged.resolution, Some(128));
        assert_eq!(merged.max_iter, Some(100));
    }

    #[test]
    fn families() {
        let cfg = ExperimentConfig {
            n: Some(5),
            order: Some(8),
            ..Default::default()
        };
        for (name, _) in GERM_FAMILIES.iter().filter(|(n, _)| *n != "file") {
            let g = build_germ::<f64>(name, &cfg).unwrap();
            assert_eq!(g.tag(), Some(*name));
        }
        let p = build_germ::<f64>("power", &cfg).unwrap();
        assert_eq!(p.coeff(5), Complex::new(1.0, 0.0));
        assert!(build_germ::<f64>("nope", &cfg).is_err());
        let liou = parse_liouville("depth=4,growth=exp").unwrap();
        assert_eq!(liou.depth(), 4);
    }
}
