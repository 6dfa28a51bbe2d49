//! Run configuration: a JSON document with a version field. Unknown fields
//! are rejected.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::medium::{Layer, StructureSpec};
use crate::scatter::FrequencyGrid;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub structure: StructureConfig,
    #[serde(default = "default_exterior")]
    pub exterior_index: f64,
    pub omega: GridConfig,
    /// Clock splittings `Ω`; `0` stands for the weak-clock limit.
    #[serde(default)]
    pub clock: Vec<f64>,
    #[serde(default)]
    pub bell: Option<BellConfig>,
    #[serde(default)]
    pub paths: Option<PathsConfig>,
    #[serde(default)]
    pub polarimetry: Option<PolarimetryConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_exterior() -> f64 {
    1.0
}

/// Exactly one of the three forms.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureConfig {
    Layers(Vec<LayerConfig>),
    Periodic {
        n1: f64,
        d1: f64,
        n2: f64,
        d2: f64,
        #[serde(rename = "N")]
        count: usize,
    },
    QuarterWave {
        n1: f64,
        n2: f64,
        omega_c: f64,
        periods: usize,
        /// Close the stack with an extra `n1` layer.
        #[serde(default)]
        symmetric: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub n: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellConfig {
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathsTruncation {
    MaxBounces(u32),
    MaxDelay(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub truncation: PathsTruncation,
    #[serde(default = "default_term_cap")]
    pub term_cap: usize,
}

fn default_term_cap() -> usize {
    crate::paths::DEFAULT_TERM_CAP
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarimetryConfig {
    /// Frequency of the polarizer and fringe curves.
    pub omega: f64,
    pub omega_split: f64,
    #[serde(default = "default_angles")]
    pub angles: usize,
    pub dx: GridConfig,
    #[serde(default)]
    pub delta_phi: f64,
    /// Registered read-out names evaluated across the frequency grid.
    #[serde(default = "default_readouts")]
    pub readouts: Vec<String>,
}

fn default_angles() -> usize {
    180
}

fn default_readouts() -> Vec<String> {
    ["phase-limit", "phase", "orth", "interferometer", "main-axis"]
        .map(String::from)
        .to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl GridConfig {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        if self.points == 0 {
            return Err(Error::Config("grid needs at least one point".into()));
        }
        if self.points > 1 && !(self.max > self.min) {
            return Err(Error::Config(format!(
                "grid max {} must exceed min {}",
                self.max, self.min
            )));
        }
        FrequencyGrid::linspace(self.min, self.max, self.points)
    }

    fn values(&self) -> Result<Vec<f64>> {
        Ok(self.grid()?.values().to_vec())
    }
}

impl StructureConfig {
    pub fn build(&self, exterior_index: f64) -> Result<StructureSpec> {
        let s = match *self {
            StructureConfig::Layers(ref layers) => {
                let layers = layers
                    .iter()
                    .map(|l| Layer::new(l.n, l.d))
                    .collect::<Result<Vec<_>>>()?;
                StructureSpec::new(layers, exterior_index)?
            }
            StructureConfig::Periodic { n1, d1, n2, d2, count } => {
                StructureSpec::periodic(Layer::new(n1, d1)?, Layer::new(n2, d2)?, count)?
                    .with_exterior(exterior_index)?
            }
            StructureConfig::QuarterWave {
                n1,
                n2,
                omega_c,
                periods,
                symmetric,
            } => {
                let s = if symmetric {
                    StructureSpec::symmetric_quarter_wave_stack(n1, n2, omega_c, periods)?
                } else {
                    StructureSpec::quarter_wave_stack(n1, n2, omega_c, periods)?
                };
                s.with_exterior(exterior_index)?
            }
        };
        Ok(s)
    }
}

impl RunConfig {
    /// Parses and validates a configuration; errors name the offending field
    /// and position.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let forms = serde_json::from_str::<serde_json::Value>(text)
                .ok()
                .and_then(|v| v.get("structure")?.as_object().map(|m| m.len()));
            match forms {
                Some(k) if path == "structure" && k != 1 => Error::Config(format!(
                    "at `structure`: exactly one of `layers`, `periodic`, `quarter_wave` is required, found {k} (line {} column {})",
                    inner.line(),
                    inner.column()
                )),
                _ => Error::Config(format!("at `{path}`: {inner}")),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        self.structure()?;
        let grid = self.omega.grid()?;
        let omega_min = grid.values()[0];
        if !(omega_min > 0.0) {
            return Err(Error::Config(format!("omega.min must be positive, got {omega_min}")));
        }
        for &x in &self.clock {
            if !(x >= 0.0 && x < omega_min) {
                return Err(Error::Config(format!("clock splitting {x} must lie in [0, omega.min)")));
            }
        }
        if let Some(b) = self.bell {
            if let Some(&x) = self.clock.iter().find(|&&x| x >= b.omega) {
                return Err(Error::Config(format!(
                    "clock splitting {x} must be below bell.omega {}",
                    b.omega
                )));
            }
        }
        if let Some(p) = &self.polarimetry {
            if !(p.omega_split > 0.0 && p.omega_split < omega_min && p.omega_split < p.omega) {
                return Err(Error::Config(format!(
                    "polarimetry.omega_split {} must be positive and below both omega.min and polarimetry.omega",
                    p.omega_split
                )));
            }
            if p.angles == 0 {
                return Err(Error::Config("polarimetry.angles must be positive".into()));
            }
            p.dx.grid()?;
        }
        Ok(())
    }

    pub fn structure(&self) -> Result<StructureSpec> {
        self.structure.build(self.exterior_index)
    }

    pub fn omegas(&self) -> Result<Vec<f64>> {
        self.omega.values()
    }

    pub fn dx_values(&self) -> Result<Vec<f64>> {
        match &self.polarimetry {
            Some(p) => p.dx.values(),
            None => Ok(Vec::new()),
        }
    }
}
