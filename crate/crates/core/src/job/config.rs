use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::JobError;
use crate::geometry::{FoamBlock, DEFAULT_RESOLUTION, DEFAULT_Z_STEP};
use crate::plan::{is_snapped, MachineParams, MACHINE_RESOLUTION};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoamConfig {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

/// Overrides for the gantry defaults.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineConfig {
    pub safe_margin: Option<f64>,
    pub travel_feed: Option<f64>,
    pub insert_feed: Option<f64>,
    pub mark_feed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub mesh: PathBuf,
    pub infill_ratio: f64,
    pub hydration_ratio: f64,
}

/// A job file (TOML). Relative paths are resolved against the directory
/// holding the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub version: u32,
    pub output_dir: PathBuf,
    pub calibration: PathBuf,
    /// Upward needle speed while injecting, mm/min.
    pub inject_speed: f64,
    /// mm³ per file.
    pub syringe_capacity: f64,
    #[serde(default = "default_z_step")]
    pub z_step: f64,
    #[serde(default = "default_resolution")]
    pub silhouette_resolution: f64,
    /// Give every body its own grid and files even when attributes match.
    #[serde(default)]
    pub group_by_body: bool,
    pub foam: FoamConfig,
    #[serde(default)]
    pub machine: MachineConfig,
    #[serde(default, rename = "body")]
    pub bodies: Vec<BodyConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_z_step() -> f64 {
    DEFAULT_Z_STEP
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, JobError> {
        let text = fs::read_to_string(path).map_err(|source| JobError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::from_toml(&text, base).map_err(|e| match e {
            JobError::Config { message, .. } => JobError::Config {
                path: Some(path.to_path_buf()),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str, base_dir: PathBuf) -> Result<Self, JobError> {
        let mut cfg: JobConfig = toml::from_str(text).map_err(|e| JobError::Config {
            path: None,
            message: e.message().to_string(),
        })?;
        if cfg.version != CONFIG_VERSION {
            return Err(JobError::Config {
                path: None,
                message: format!(
                    "unsupported config version {} (expected {CONFIG_VERSION})",
                    cfg.version
                ),
            });
        }
        for (name, value) in [
            ("inject_speed", cfg.inject_speed),
            ("syringe_capacity", cfg.syringe_capacity),
            ("z_step", cfg.z_step),
            ("silhouette_resolution", cfg.silhouette_resolution),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(JobError::Config {
                    path: None,
                    message: format!("{name} must be positive, got {value}"),
                });
            }
        }
        cfg.base_dir = base_dir;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn foam(&self) -> Result<FoamBlock, JobError> {
        Ok(FoamBlock::new(
            self.foam.width,
            self.foam.depth,
            self.foam.height,
        )?)
    }

    pub fn machine(&self) -> Result<MachineParams, JobError> {
        let mut mp = MachineParams::new(self.foam()?).with_inject_speed(self.inject_speed);
        let m = &self.machine;
        mp.safe_margin = m.safe_margin.unwrap_or(mp.safe_margin);
        mp.travel_feed = m.travel_feed.unwrap_or(mp.travel_feed);
        mp.insert_feed = m.insert_feed.unwrap_or(mp.insert_feed);
        mp.mark_feed = m.mark_feed.unwrap_or(mp.mark_feed);
        mp.validate()?;
        // travel heights are emitted verbatim, so they must be representable
        if !is_snapped(mp.safe_height()) {
            return Err(JobError::Config {
                path: None,
                message: format!(
                    "foam height plus safe_margin ({}) must be a multiple of {MACHINE_RESOLUTION} mm",
                    mp.safe_height()
                ),
            });
        }
        Ok(mp)
    }
}
