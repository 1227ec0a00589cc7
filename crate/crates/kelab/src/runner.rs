use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::suites::{run_suite, suite_info, RunError, SuiteConfig, SUITES};

/// Batch configuration (TOML). Top-level `seed`, `samples`, `ricci` and `tol`
/// apply to every suite; `[suites.<name>]` tables override them per suite.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunAllConfig {
    /// Report directory, relative to the config file; defaults to `reports`.
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    #[serde(alias = "K")]
    pub ricci: Option<f64>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub suites: BTreeMap<String, SuiteConfig>,
}

impl RunAllConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunAllConfig =
            toml::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn base(&self) -> SuiteConfig {
        SuiteConfig { seed: self.seed, samples: self.samples, ricci: self.ricci, tol: self.tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.base().validate()?;
        for (name, cfg) in &self.suites {
            suite_info(name).ok_or_else(|| RunError::UnknownSuite(name.clone()))?;
            cfg.validate().map_err(|e| RunError::Config(format!("[suites.{name}] {e}")))?;
        }
        Ok(())
    }

    /// The effective configuration of `suite`, with `seed_override` taking precedence over any seed in the file.
    pub fn suite_config(&self, suite: &str, seed_override: Option<u64>) -> SuiteConfig {
        let mut cfg = self.suites.get(suite).cloned().unwrap_or_default().or(&self.base());
        if seed_override.is_some() {
            cfg.seed = seed_override;
        }
        cfg
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub statement: String,
    pub pass: bool,
    pub max_residual: Option<f64>,
    pub report: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunAllOutcome {
    pub pass: bool,
    pub suites: Vec<SuiteSummary>,
    #[serde(skip)]
    pub summary_path: PathBuf,
    #[serde(skip)]
    pub exit_code: u8,
}

/// Runs every suite (at most `jobs` at a time), writes one report per suite and
/// `summary.json` into the output directory.
pub fn run_all(config_path: &Path, jobs: Option<usize>, seed_override: Option<u64>) -> Result<RunAllOutcome, RunError> {
    let cfg = RunAllConfig::load(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let out_dir = base_dir.join(cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("reports")));
    fs::create_dir_all(&out_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(RunError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| RunError::Config(e.to_string()))?;
    let results: Vec<(SuiteSummary, u8)> = pool.install(|| {
        SUITES
            .par_iter()
            .map(|info| {
                let suite_cfg = cfg.suite_config(info.name, seed_override);
                let outcome = run_suite(info.name, &suite_cfg).and_then(|report| {
                    let file = format!("{}.json", info.name);
                    report.write(&out_dir.join(&file))?;
                    Ok((report, file))
                });
                match outcome {
                    Ok((report, file)) => (
                        SuiteSummary {
                            suite: info.name.into(),
                            statement: info.statement.into(),
                            pass: report.pass,
                            max_residual: Some(report.max_residual),
                            report: Some(file),
                            error: None,
                        },
                        if report.pass { 0 } else { 1 },
                    ),
                    Err(e) => (
                        SuiteSummary {
                            suite: info.name.into(),
                            statement: info.statement.into(),
                            pass: false,
                            max_residual: None,
                            report: None,
                            error: Some(e.to_string()),
                        },
                        e.exit_code(),
                    ),
                }
            })
            .collect()
    });
    let exit_code = results.iter().map(|(_, c)| *c).max().unwrap_or(0);
    let suites: Vec<SuiteSummary> = results.into_iter().map(|(s, _)| s).collect();
    let outcome = RunAllOutcome {
        pass: suites.iter().all(|s| s.pass),
        suites,
        summary_path: out_dir.join("summary.json"),
        exit_code,
    };
    fs::write(&outcome.summary_path, serde_json::to_string_pretty(&outcome).expect("summary serializes") + "\n")?;
    Ok(outcome)
}
