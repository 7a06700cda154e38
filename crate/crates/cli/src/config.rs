//! Sweep configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! eta_min = 0.001
//! eta_max = 0.1
//! eta_steps = 100
//! q_values = 0, 0.15, 0.25
//! mode = map              # map | circuit | pulse | tomography
//! delta_r = 0.0005
//! shots = 1000000
//! seed = 1
//! output_path = sweep.csv
//! threshold_rule = delta-d  # delta-d | difference
//! env_flavor = classical    # classical | entangled
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nmr_collision::resolution::ThresholdRule;
use nmr_collision::EnvFlavor;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Closed Kraus maps.
    Map,
    /// Global unitary on system and environment plus partial trace.
    Circuit,
    /// Compiled NMR pulse programs.
    Pulse,
    /// Circuit states read out by finite-shot tomography.
    Tomography,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map" => Ok(Mode::Map),
            "circuit" => Ok(Mode::Circuit),
            "pulse" => Ok(Mode::Pulse),
            "tomography" => Ok(Mode::Tomography),
            other => Err(CliError::Usage(format!("unknown mode '{other}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Map => "map",
            Mode::Circuit => "circuit",
            Mode::Pulse => "pulse",
            Mode::Tomography => "tomography",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_steps: usize,
    pub q_values: Vec<f64>,
    pub mode: Mode,
    /// Bloch-vector uncertainty.
    pub delta_r: f64,
    /// Shots per Pauli axis in tomography mode.
    pub shots: u64,
    pub seed: u64,
    pub output_path: PathBuf,
    pub threshold_rule: ThresholdRule,
    pub env_flavor: EnvFlavor,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eta_min: 0.001,
            eta_max: 0.1,
            eta_steps: 100,
            q_values: vec![0.0, 0.15, 0.25],
            mode: Mode::Map,
            delta_r: 5e-4,
            shots: 1_000_000,
            seed: 1,
            output_path: PathBuf::from("sweep.csv"),
            threshold_rule: ThresholdRule::DeltaD,
            env_flavor: EnvFlavor::Classical,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !self.eta_min.is_finite() || !self.eta_max.is_finite() {
            return usage("eta bounds must be finite".into());
        }
        if self.eta_min > self.eta_max {
            return usage(format!("eta_min {} > eta_max {}", self.eta_min, self.eta_max));
        }
        if self.eta_steps == 0 {
            return usage("eta_steps must be at least 1".into());
        }
        if self.q_values.is_empty() {
            return usage("q_values is empty".into());
        }
        if let Some(q) = self.q_values.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return usage(format!("q = {q} outside [0, 1]"));
        }
        if !(self.delta_r >= 0.0 && self.delta_r.is_finite()) {
            return usage(format!("delta_r = {} must be >= 0", self.delta_r));
        }
        if self.shots == 0 {
            return usage("shots must be at least 1".into());
        }
        Ok(())
    }

    /// Collision strengths, evenly spaced and inclusive of both ends.
    pub fn eta_grid(&self) -> Vec<f64> {
        if self.eta_steps == 1 {
            return vec![self.eta_min];
        }
        let step = (self.eta_max - self.eta_min) / (self.eta_steps - 1) as f64;
        (0..self.eta_steps)
            .map(|i| {
                if i + 1 == self.eta_steps {
                    self.eta_max
                } else {
                    self.eta_min + i as f64 * step
                }
            })
            .collect()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "eta_min" => self.eta_min = parse_num(key, value)?,
            "eta_max" => self.eta_max = parse_num(key, value)?,
            "eta_steps" => self.eta_steps = parse_num(key, value)?,
            "q_values" => self.q_values = parse_list(value)?,
            "mode" => self.mode = value.parse()?,
            "delta_r" => self.delta_r = parse_num(key, value)?,
            "shots" => self.shots = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output_path" => self.output_path = PathBuf::from(value),
            "threshold_rule" => {
                self.threshold_rule = value
                    .parse()
                    .map_err(|e: nmr_collision::Error| CliError::Usage(e.to_string()))?
            }
            "env_flavor" => {
                self.env_flavor = match value {
                    "classical" => EnvFlavor::Classical,
                    "entangled" => EnvFlavor::Entangled,
                    other => return Err(CliError::Usage(format!("unknown env_flavor '{other}'"))),
                }
            }
            other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected 'key = value'", idx + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| CliError::Usage(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(cfg)
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: cannot parse '{value}': {e}")))
}

pub fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num("q_values", s))
        .collect()
}
