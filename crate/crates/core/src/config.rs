//! Run configuration and its flat `key = value` file format.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Every key is optional and falls back to the value of [`FlowConfig::default`].
//!
//! | key              | default | meaning                                        |
//! |------------------|---------|------------------------------------------------|
//! | `phi`            | 100     | flux of the base Hagen-Poiseuille flow         |
//! | `n_r`            | 64      | radial collocation nodes                       |
//! | `n_z`            | 256     | axial samples (power of two)                   |
//! | `half_period`    | 16      | axial domain is `[-half_period, half_period)`  |
//! | `picard_tol`     | 1e-10   | stopping threshold on the iterate difference   |
//! | `picard_max_iter`| 200     | iteration cap                                  |
//! | `relaxation`     | 1       | damping factor of the fixed-point update       |
//! | `dealias`        | true    | 2/3-rule on axial modes of nonlinear products  |
//! | `c1_cal`         | 1       | calibrated stream-solve constant               |
//! | `c2_cal`         | 1       | calibrated swirl-solve constant                |
//! | `seed`           | 1729    | seed of the run's random generator             |

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PipeError, Result};
use crate::grid::{ModeSet, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub phi: f64,
    pub n_r: usize,
    pub n_z: usize,
    pub half_period: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub relaxation: f64,
    pub dealias: bool,
    pub c1_cal: f64,
    pub c2_cal: f64,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            phi: 100.0,
            n_r: 64,
            n_z: 256,
            half_period: 16.0,
            picard_tol: 1e-10,
            picard_max_iter: 200,
            relaxation: 1.0,
            dealias: true,
            c1_cal: 1.0,
            c2_cal: 1.0,
            seed: 1729,
        }
    }
}

fn invariant(key: &'static str, message: &str) -> PipeError {
    PipeError::Invariant {
        key,
        message: message.to_string(),
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0) || !self.phi.is_finite() {
            return Err(invariant("phi", "must be positive"));
        }
        if self.n_r < 8 {
            return Err(invariant("n_r", "must be at least 8"));
        }
        if self.n_z < 8 || !self.n_z.is_power_of_two() {
            return Err(invariant("n_z", "must be a power of two and at least 8"));
        }
        if !(self.half_period > 0.0) || !self.half_period.is_finite() {
            return Err(invariant("half_period", "must be positive"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(invariant("picard_tol", "must be positive"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(invariant("relaxation", "must lie in (0, 1]"));
        }
        if !(self.c1_cal > 0.0) || !(self.c2_cal > 0.0) {
            return Err(invariant("c1_cal", "calibration constants must be positive"));
        }
        Ok(())
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| PipeError::ConfigValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "phi" => self.phi = parse(key, value)?,
            "n_r" => self.n_r = parse(key, value)?,
            "n_z" => self.n_z = parse(key, value)?,
            "half_period" | "L_z" => self.half_period = parse(key, value)?,
            "picard_tol" => self.picard_tol = parse(key, value)?,
            "picard_max_iter" => self.picard_max_iter = parse(key, value)?,
            "relaxation" => self.relaxation = parse(key, value)?,
            "dealias" => self.dealias = parse(key, value)?,
            "c1_cal" => self.c1_cal = parse(key, value)?,
            "c2_cal" => self.c2_cal = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => {
                return Err(PipeError::ConfigUnknownKey {
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.n_r)
    }

    pub fn mode_set(&self) -> Result<ModeSet> {
        ModeSet::new(self.n_z, self.half_period)
    }

    /// Render in the file format accepted by [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "phi = {:e}", self.phi);
        let _ = writeln!(s, "n_r = {}", self.n_r);
        let _ = writeln!(s, "n_z = {}", self.n_z);
        let _ = writeln!(s, "half_period = {:e}", self.half_period);
        let _ = writeln!(s, "picard_tol = {:e}", self.picard_tol);
        let _ = writeln!(s, "picard_max_iter = {}", self.picard_max_iter);
        let _ = writeln!(s, "relaxation = {:e}", self.relaxation);
        let _ = writeln!(s, "dealias = {}", self.dealias);
        let _ = writeln!(s, "c1_cal = {:e}", self.c1_cal);
        let _ = writeln!(s, "c2_cal = {:e}", self.c2_cal);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

/// Parse configuration text, filling unspecified keys with defaults.
pub fn parse_config(text: &str) -> Result<FlowConfig> {
    let mut cfg = FlowConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| PipeError::ConfigSyntax {
            line: idx + 1,
            text: raw.to_string(),
        })?;
        cfg.set(key.trim(), value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<FlowConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PipeError::ConfigIo {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
