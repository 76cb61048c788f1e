//! Run records and deterministic fingerprints.
//!
//! Every experiment emits one self-describing record with a fixed field set
//! plus experiment-specific details, and a fingerprint: a hash of all
//! emitted numbers rounded to 1e-12, stable across runs of an identical
//! configuration.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::error::Result;
use crate::metrics::{CurvatureReport, MetricDensity};

#[derive(Debug, Default)]
pub struct Fingerprint {
    hasher: Sha256,
}

impl Fingerprint {
    pub fn new() -> Self {
        Fingerprint {
            hasher: Sha256::new(),
        }
    }

    /// Record one labelled number, rounded to 1e-12.
    pub fn push(&mut self, label: &str, value: f64) {
        self.hasher.update(label.as_bytes());
        self.hasher.update(b"=");
        let scaled = value * 1e12;
        if scaled.is_finite() && scaled.abs() < 9.0e18 {
            self.hasher.update((scaled.round() as i64).to_le_bytes());
        } else {
            self.hasher.update(format!("{value:e}").as_bytes());
        }
        self.hasher.update(b";");
    }

    pub fn push_complex(&mut self, label: &str, value: num_complex::Complex64) {
        self.push(&format!("{label}.re"), value.re);
        self.push(&format!("{label}.im"), value.im);
    }

    pub fn push_int(&mut self, label: &str, value: i64) {
        self.push(label, value as f64);
    }

    pub fn finish(self) -> String {
        let digest = self.hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The per-run record written next to any grids the experiment produced.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub experiment: String,
    pub status: String,
    pub sup_error: Option<f64>,
    pub residual_norm: Option<f64>,
    pub iterations: Option<u64>,
    pub degree_used: Option<u64>,
    pub curvature_max_dev: Option<f64>,
    pub fingerprint: String,
    pub toolkit_version: String,
    pub wall_time_ms: u64,
    pub config: BTreeMap<String, String>,
    pub details: BTreeMap<String, serde_json::Value>,
}

impl RunRecord {
    pub fn new(experiment: &str, config: BTreeMap<String, String>) -> Self {
        RunRecord {
            experiment: experiment.to_string(),
            status: "ok".to_string(),
            sup_error: None,
            residual_norm: None,
            iterations: None,
            degree_used: None,
            curvature_max_dev: None,
            fingerprint: String::new(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: 0,
            config,
            details: BTreeMap::new(),
        }
    }

    pub fn detail(&mut self, key: &str, value: serde_json::Value) {
        self.details.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialization")
    }
}

/// Write a density grid as CSV rows "x,y,value" with a one-line header.
pub fn density_csv(density: &MetricDensity) -> String {
    let mut out = String::from("x,y,value\n");
    for (_, _, z, v) in density.valid_cells() {
        out.push_str(&format!("{},{},{}\n", z.re, z.im, v));
    }
    out
}

/// Write a curvature grid as CSV rows "x,y,value" with a one-line header.
pub fn curvature_csv(report: &CurvatureReport) -> String {
    let mut out = String::from("x,y,value\n");
    for (z, v) in report.cells() {
        out.push_str(&format!("{},{},{}\n", z.re, z.im, v));
    }
    out
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}
