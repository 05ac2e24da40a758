//! Run configuration files: a strict sectioned key-value format.
//!
//! ```text
//! # full-line comments only (values may contain ';' and '#')
//! [run]
//! scenario = gaussian
//! dims = 1
//! resolution = 64
//! steps = 32
//!
//! [scenario]
//! sigma_fraction = 0.0625
//!
//! [constants]
//! charge = 1.0
//!
//! [tetrad]
//! kind = rotating
//! ```
//!
//! Sections are `[run]`, `[scenario]`, `[constants]`, and `[tetrad]`; every
//! key is whitelisted and duplicates are rejected, both by name, so a typo
//! can never silently fall back to a default.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::scenario::ScenarioKind;
use crate::teleparallel::TetradKind;
use crate::verify::SUITES;

/// Keys accepted in `[run]`.
const RUN_KEYS: [&str; 14] = [
    "scenario",
    "dims",
    "resolution",
    "resolutions",
    "extent",
    "dt",
    "steps",
    "stride",
    "out_dir",
    "suites",
    "tolerance_scale",
    "seed_points",
    "streamline_step_fraction",
    "streamline_steps",
];

/// Keys accepted in `[scenario]` (the union over all scenario kinds; each
/// kind reads the subset it documents and defaults the rest).
const SCENARIO_KEYS: [&str; 8] = [
    "cycles",
    "alpha",
    "sigma_fraction",
    "b0",
    "seed",
    "band",
    "radius_fraction",
    "pitch_fraction",
];

/// Keys accepted in `[constants]`.
const CONSTANTS_KEYS: [&str; 4] = ["hbar", "mass", "charge", "light_speed"];

/// Keys accepted in `[tetrad]`.
const TETRAD_KEYS: [&str; 3] = ["kind", "resolution", "coupling"];

/// A fully parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Scenario name (see the scenario catalog).
    pub scenario: String,
    /// Active spatial dimensions of the periodic grid (1-3).
    pub dims: usize,
    /// Points per active axis for single-resolution commands.
    pub resolution: usize,
    /// Refinement ladder for verification suites.
    pub resolutions: Vec<usize>,
    /// Box length per active axis.
    pub extent: f64,
    /// Time step; `None` selects 0.4 x the stability bound of the grid.
    pub dt: Option<f64>,
    pub steps: usize,
    /// Snapshot cadence in steps.
    pub stride: usize,
    pub out_dir: PathBuf,
    /// Verification suites to run.
    pub suites: Vec<String>,
    /// Multiplier applied to every verification error tolerance.
    pub tolerance_scale: f64,
    /// Streamline starting points.
    pub seed_points: Vec<[f64; 3]>,
    /// Streamline arc step as a fraction of the grid spacing.
    pub streamline_step_fraction: f64,
    /// Streamline step count; 0 sizes the trace to one design loop where the
    /// scenario defines one.
    pub streamline_steps: usize,
    /// Named scenario parameters, passed through to the scenario builder.
    pub scenario_params: BTreeMap<String, f64>,
    pub constants: PhysicalConstants,
    /// 4D frame-catalog member name.
    pub tetrad: String,
    /// Points per active axis of the 4D patch.
    pub tetrad_resolution: usize,
    /// Coupling constant dividing the derived stress tensor.
    pub coupling: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "gaussian".into(),
            dims: 1,
            resolution: 64,
            resolutions: vec![32, 48, 64],
            extent: std::f64::consts::TAU,
            dt: None,
            steps: 32,
            stride: 8,
            out_dir: PathBuf::from("out"),
            suites: vec!["all".into()],
            tolerance_scale: 1.0,
            seed_points: Vec::new(),
            streamline_step_fraction: 1.0 / 3.0,
            streamline_steps: 0,
            scenario_params: BTreeMap::new(),
            constants: PhysicalConstants::default(),
            tetrad: "rotating".into(),
            tetrad_resolution: 16,
            coupling: 1.0,
        }
    }
}

impl RunConfig {
    /// Parse a configuration file from disk.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse configuration text. Unknown sections, unknown keys, duplicate
    /// keys, and malformed values are all rejected by name.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<&str> = None;
        let mut seen: BTreeSet<String> = BTreeSet::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err_at(lineno, "unterminated section header"))?
                    .trim();
                section = Some(match name {
                    "run" => "run",
                    "scenario" => "scenario",
                    "constants" => "constants",
                    "tetrad" => "tetrad",
                    other => {
                        return Err(err_at(
                            lineno,
                            &format!(
                                "unknown section '[{other}]'; expected [run], [scenario], \
                                 [constants], or [tetrad]"
                            ),
                        ))
                    }
                });
                continue;
            }
            let section = section
                .ok_or_else(|| err_at(lineno, "key appears before any section header"))?;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err_at(lineno, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err_at(lineno, "empty key"));
            }
            if !seen.insert(format!("{section}.{key}")) {
                return Err(err_at(
                    lineno,
                    &format!("duplicate key '{key}' in section [{section}]"),
                ));
            }
            match section {
                "run" => cfg.set_run_key(lineno, key, value)?,
                "scenario" => {
                    if !SCENARIO_KEYS.contains(&key) {
                        return Err(err_at(
                            lineno,
                            &format!(
                                "unknown key '{key}' in [scenario]; known: {}",
                                SCENARIO_KEYS.join(", ")
                            ),
                        ));
                    }
                    cfg.scenario_params
                        .insert(key.to_string(), parse_f64(lineno, key, value)?);
                }
                "constants" => {
                    let v = parse_f64(lineno, key, value)?;
                    match key {
                        "hbar" => cfg.constants.hbar = v,
                        "mass" => cfg.constants.mass = v,
                        "charge" => cfg.constants.charge = v,
                        "light_speed" => cfg.constants.light_speed = v,
                        other => {
                            return Err(err_at(
                                lineno,
                                &format!(
                                    "unknown key '{other}' in [constants]; known: {}",
                                    CONSTANTS_KEYS.join(", ")
                                ),
                            ))
                        }
                    }
                }
                "tetrad" => match key {
                    "kind" => cfg.tetrad = value.to_string(),
                    "resolution" => cfg.tetrad_resolution = parse_usize(lineno, key, value)?,
                    "coupling" => cfg.coupling = parse_f64(lineno, key, value)?,
                    other => {
                        return Err(err_at(
                            lineno,
                            &format!(
                                "unknown key '{other}' in [tetrad]; known: {}",
                                TETRAD_KEYS.join(", ")
                            ),
                        ))
                    }
                },
                _ => unreachable!("section names are filtered above"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set_run_key(&mut self, lineno: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = value.to_string(),
            "dims" => self.dims = parse_usize(lineno, key, value)?,
            "resolution" => self.resolution = parse_usize(lineno, key, value)?,
            "resolutions" => {
                self.resolutions = value
                    .split(',')
                    .map(|s| parse_usize(lineno, key, s.trim()))
                    .collect::<Result<_>>()?;
            }
            "extent" => self.extent = parse_f64(lineno, key, value)?,
            "dt" => self.dt = Some(parse_f64(lineno, key, value)?),
            "steps" => self.steps = parse_usize(lineno, key, value)?,
            "stride" => self.stride = parse_usize(lineno, key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "suites" => {
                self.suites = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "tolerance_scale" => self.tolerance_scale = parse_f64(lineno, key, value)?,
            "seed_points" => self.seed_points = parse_seed_points(value)?,
            "streamline_step_fraction" => {
                self.streamline_step_fraction = parse_f64(lineno, key, value)?;
            }
            "streamline_steps" => self.streamline_steps = parse_usize(lineno, key, value)?,
            other => {
                return Err(err_at(
                    lineno,
                    &format!("unknown key '{other}' in [run]; known: {}", RUN_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Cross-field validation, run after parsing and again by commands that
    /// assemble a config programmatically.
    pub fn validate(&self) -> Result<()> {
        ScenarioKind::from_name(&self.scenario)
            .map_err(|e| Error::Config(e.to_string()))?;
        TetradKind::from_name(&self.tetrad).map_err(|e| Error::Config(e.to_string()))?;
        if !(1..=3).contains(&self.dims) {
            return Err(Error::Config(format!(
                "dims must be 1, 2, or 3, got {}",
                self.dims
            )));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::Config(format!(
                "extent must be positive, got {}",
                self.extent
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if self.steps == 0 || self.stride == 0 {
            return Err(Error::Config("steps and stride must be at least 1".into()));
        }
        if !(self.tolerance_scale.is_finite() && self.tolerance_scale > 0.0) {
            return Err(Error::Config(format!(
                "tolerance_scale must be positive, got {}",
                self.tolerance_scale
            )));
        }
        if !(self.streamline_step_fraction.is_finite() && self.streamline_step_fraction > 0.0) {
            return Err(Error::Config(format!(
                "streamline_step_fraction must be positive, got {}",
                self.streamline_step_fraction
            )));
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "unknown suite '{s}'; known: {}",
                    SUITES.join(", ")
                )));
            }
        }
        for c in [
            ("hbar", self.constants.hbar),
            ("mass", self.constants.mass),
            ("light_speed", self.constants.light_speed),
        ] {
            if !(c.1.is_finite() && c.1 > 0.0) {
                return Err(Error::Config(format!("{} must be positive, got {}", c.0, c.1)));
            }
        }
        if !self.constants.charge.is_finite() {
            return Err(Error::Config("charge must be finite".into()));
        }
        if !(self.coupling.is_finite() && self.coupling != 0.0) {
            return Err(Error::Config(format!(
                "coupling must be finite and nonzero, got {}",
                self.coupling
            )));
        }
        Ok(())
    }
}

fn err_at(lineno: usize, msg: &str) -> Error {
    Error::Config(format!("line {}: {msg}", lineno + 1))
}

fn parse_f64(lineno: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| err_at(lineno, &format!("key '{key}': '{value}' is not a number")))
}

fn parse_usize(lineno: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| err_at(lineno, &format!("key '{key}': '{value}' is not a whole number")))
}

/// Parse streamline seeds `x,y,z;x,y,z;...` (spaces allowed around numbers).
pub fn parse_seed_points(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::new();
    for (i, point) in text.split(';').enumerate() {
        let point = point.trim();
        if point.is_empty() {
            continue;
        }
        let comps: Vec<&str> = point.split(',').map(str::trim).collect();
        if comps.len() != 3 {
            return Err(Error::Config(format!(
                "seed point {} ('{point}') needs exactly 3 comma-separated coordinates",
                i + 1
            )));
        }
        let mut p = [0.0; 3];
        for (c, comp) in comps.iter().enumerate() {
            p[c] = comp.parse::<f64>().map_err(|_| {
                Error::Config(format!(
                    "seed point {}: '{comp}' is not a number",
                    i + 1
                ))
            })?;
        }
        out.push(p);
    }
    Ok(out)
}
