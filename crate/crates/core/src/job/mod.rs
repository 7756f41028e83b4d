//! End-to-end jobs: a TOML config names the foam block, the bodies and the
//! calibration; [`plan_job`] runs rasterization through division, and the
//! writers turn the result into G-code, a report and an SVG preview.

mod config;
mod pipeline;
mod report;
mod svg;

pub use config::{BodyConfig, FoamConfig, JobConfig, MachineConfig, CONFIG_VERSION};
pub use pipeline::{
    plan_job, write_marking, write_preview, write_slice, Group, JobPlan, PlannedFile, PREVIEW_NAME,
    REPORT_NAME,
};
pub use report::{parse_report_files, render_report, ReportFileRow};
pub use svg::render_preview;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::calib::CalibError;
use crate::gcode::GcodeError;
use crate::geometry::GeometryError;
use crate::plan::PlanError;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("cannot read {}: {source}", .path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", .path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("{}{message}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Config {
        path: Option<PathBuf>,
        message: String,
    },
    #[error("{}: {source}", .path.display())]
    Calibration { path: PathBuf, source: CalibError },
    #[error("body {index} ({}): {source}", .path.display())]
    Body {
        index: usize,
        path: PathBuf,
        source: GeometryError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Gcode(#[from] GcodeError),
    /// An emitted file failed its own simulation check.
    #[error("self-check failed for {file}: {message}")]
    SelfCheck { file: String, message: String },
}

impl JobError {
    /// Caused by the inputs rather than by this program or the system.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            JobError::Write { .. } | JobError::Gcode(_) | JobError::SelfCheck { .. }
        )
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), JobError> {
    let err = |source| JobError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
