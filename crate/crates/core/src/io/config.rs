//! `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Unknown or repeated keys are
//! errors. Values given later through [`ConfigEntries::set`] (command-line
//! flags) replace file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::sources::Scenario;
use crate::timestepper::DomainMode;

/// β values of the stabilization sweep used when no list is configured.
pub const DEFAULT_BETA_LIST: [f64; 6] = [0.0, 1e-5, 1e-4, 3.12e-4, 6.25e-4, 1e-3];

pub const KNOWN_KEYS: [&str; 19] = [
    "rho",
    "mu",
    "lambda",
    "mu1",
    "mu2",
    "mu_vis",
    "kappa",
    "alpha",
    "beta",
    "dt",
    "p0",
    "h",
    "mesh_n",
    "n_steps",
    "domain_mode",
    "output_dir",
    "output_formats",
    "beta_list",
    "scenario",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl OutputFormat {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "vtk" => Some(OutputFormat::Vtk),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Vtk => "vtk",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub mesh_n: usize,
    pub n_steps: usize,
    pub domain_mode: DomainMode,
    pub output_dir: PathBuf,
    pub output_formats: Vec<OutputFormat>,
    pub beta_list: Vec<f64>,
    pub scenario: Scenario,
    /// Grid size for the 1D analyses; defaults to √2 / mesh_n.
    pub h: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            mesh_n: 10,
            n_steps: 1,
            domain_mode: DomainMode::Fixed,
            output_dir: PathBuf::from("out"),
            output_formats: vec![OutputFormat::Csv],
            beta_list: DEFAULT_BETA_LIST.to_vec(),
            scenario: Scenario::PaperBodyForce,
            h: None,
        }
    }
}

impl RunConfig {
    /// Grid size used by the 1D analyses.
    pub fn analysis_h(&self) -> f64 {
        self.h.unwrap_or(2f64.sqrt() / self.mesh_n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.mesh_n < 2 {
            return Err(Error::InvalidInput(format!(
                "mesh_n must be >= 2, got {}",
                self.mesh_n
            )));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidInput("n_steps must be >= 1".into()));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
            }
        }
        if self.beta_list.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidInput(
                "beta_list entries must be finite and >= 0".into(),
            ));
        }
        if self.beta_list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "beta_list must be sorted ascending".into(),
            ));
        }
        if self.output_formats.is_empty() {
            return Err(Error::InvalidInput(
                "output_formats must name at least one format".into(),
            ));
        }
        Ok(())
    }
}

/// Where a configuration value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Line(usize),
    Override,
}

/// Raw key/value pairs before conversion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigEntries {
    map: BTreeMap<String, (String, Origin)>,
}

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("missing value for `{key}`"),
                });
            }
            if let Some((_, Origin::Line(first))) = map.get(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            map.insert(key.to_string(), (value.to_string(), Origin::Line(line)));
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Sets or replaces a value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::InvalidInput(format!("unknown key `{key}`")));
        }
        self.map.insert(
            key.to_string(),
            (value.trim().to_string(), Origin::Override),
        );
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    /// Converts to a validated configuration.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let p = &mut cfg.params;
        for (key, (value, origin)) in &self.map {
            let bad = |what: &str| {
                let message = format!("invalid value `{value}` for `{key}`: expected {what}");
                match origin {
                    Origin::Line(line) => Error::Parse {
                        line: *line,
                        message,
                    },
                    Origin::Override => Error::InvalidInput(message),
                }
            };
            let real = || value.parse::<f64>().map_err(|_| bad("a number"));
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad("a non-negative integer"))
            };
            match key.as_str() {
                "rho" => p.rho = real()?,
                "mu" => p.mu = real()?,
                "lambda" => p.lambda = real()?,
                "mu1" => p.mu1 = real()?,
                "mu2" => p.mu2 = real()?,
                "mu_vis" => {
                    if self.map.contains_key("mu1") || self.map.contains_key("mu2") {
                        return Err(Error::InvalidInput(
                            "mu_vis cannot be combined with mu1 or mu2".into(),
                        ));
                    }
                    let v = real()?;
                    p.mu1 = 0.5 * v;
                    p.mu2 = 0.5 * v;
                }
                "kappa" => p.kappa = real()?,
                "alpha" => p.alpha = real()?,
                "beta" => p.beta = real()?,
                "dt" => p.dt = real()?,
                "p0" => p.p0 = real()?,
                "h" => cfg.h = Some(real()?),
                "mesh_n" => cfg.mesh_n = count()?,
                "n_steps" => cfg.n_steps = count()?,
                "domain_mode" => {
                    cfg.domain_mode =
                        DomainMode::from_name(value).ok_or_else(|| bad("fixed or moving"))?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "output_formats" => {
                    let mut f = split_list(value)
                        .map(|s| {
                            OutputFormat::from_name(s).ok_or_else(|| bad("a list of csv, vtk"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    f.sort();
                    f.dedup();
                    cfg.output_formats = f;
                }
                "beta_list" => {
                    cfg.beta_list = split_list(value)
                        .map(|s| {
                            s.parse::<f64>()
                                .map_err(|_| bad("a comma-separated list of numbers"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                }
                "scenario" => {
                    cfg.scenario = Scenario::from_name(value)
                        .ok_or_else(|| bad("paper_bodyforce or unforced"))?
                }
                other => unreachable!("key `{other}` passed the known-key check"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    ConfigEntries::load(path)?.resolve()
}
