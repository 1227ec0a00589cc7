use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use kelab_core::{ComplexPoint, DomainModel};
use serde::Serialize;
use serde_json::Value;

/// One evaluated sample: where it was taken and the named residuals there.
#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub point: Option<ComplexPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub residuals: BTreeMap<String, f64>,
}

impl Sample {
    pub fn at(point: ComplexPoint) -> Self {
        Sample { point: Some(point), label: None, residuals: BTreeMap::new() }
    }

    pub fn labelled(label: impl Into<String>) -> Self {
        Sample { point: None, label: Some(label.into()), residuals: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.residuals.insert(name.to_string(), value);
        self
    }

    fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, &v| if v.is_nan() { f64::NAN } else { m.max(v) })
    }
}

/// A CSV file written next to the report, named `<report stem>.<suffix>`.
#[derive(Clone, Debug)]
pub struct SideFile {
    pub suffix: String,
    pub contents: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub domain: Option<DomainModel>,
    pub params: BTreeMap<String, Value>,
    pub samples: Vec<Sample>,
    pub max_residual: f64,
    pub pass: bool,
    pub runtime_ms: u64,
    #[serde(skip)]
    pub side_files: Vec<SideFile>,
}

impl VerificationReport {
    /// Builds the report; `pass` holds iff every residual is finite and at most `tol`.
    pub fn new(
        suite: &str,
        domain: Option<DomainModel>,
        params: BTreeMap<String, Value>,
        samples: Vec<Sample>,
        tol: f64,
    ) -> Self {
        let max_residual = samples.iter().map(Sample::max_residual).fold(0.0, |m: f64, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v)
            }
        });
        VerificationReport {
            suite: suite.to_string(),
            domain,
            params,
            samples,
            max_residual,
            pass: max_residual <= tol,
            runtime_ms: 0,
            side_files: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Writes the JSON report to `path` and the side files beside it; returns every path written.
    pub fn write(&self, path: &Path) -> io::Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json() + "\n")?;
        let mut written = vec![path.to_path_buf()];
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| self.suite.clone());
        for side in &self.side_files {
            let p = path.with_file_name(format!("{stem}.{}", side.suffix));
            fs::write(&p, &side.contents)?;
            written.push(p);
        }
        Ok(written)
    }
}
