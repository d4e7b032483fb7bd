//! Measured-versus-expected reports shared by the verification harnesses.

use alloc::string::String;
use alloc::vec::Vec;

/// One measurement at radius (or `|z_n|`) `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub r: f64,
    /// Iterate count: exit time, shadowing step `k`, or tracking step `n`.
    pub m: Option<u64>,
    /// The measured quantity (see [`VerificationReport::quantity`]).
    pub value: Option<f64>,
    pub ceiling: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// Harness name, e.g. `"iterate-count"`.
    pub harness: String,
    /// Meaning of [`Sample::value`].
    pub quantity: String,
    /// Sorted by `r`, then `m`.
    pub samples: Vec<Sample>,
    pub fitted_slope: Option<f64>,
    pub expected_slope: f64,
    pub slope_tolerance: f64,
    pub measured_constants: Vec<(String, f64)>,
    /// Nothing to fit because every orbit survived; passes vacuously.
    pub degenerate: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(harness: &str, quantity: &str, expected_slope: f64, slope_tolerance: f64) -> Self {
        Self {
            harness: harness.into(),
            quantity: quantity.into(),
            samples: Vec::new(),
            fitted_slope: None,
            expected_slope,
            slope_tolerance,
            measured_constants: Vec::new(),
            degenerate: false,
            pass: false,
            notes: Vec::new(),
        }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.measured_constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn slope_ok(&self) -> bool {
        self.fitted_slope
            .is_some_and(|s| (s - self.expected_slope).abs() <= self.slope_tolerance)
    }

    pub fn ceilings_ok(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }

    pub(crate) fn sort_samples(&mut self) {
        self.samples
            .sort_by(|a, b| a.r.total_cmp(&b.r).then(a.m.cmp(&b.m)));
    }
}
