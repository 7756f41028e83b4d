//! Turning rasterized columns into an injection plan: center-outward
//! ordering, per-column needle motions, syringe-sized files and time/volume
//! estimates.

mod divide;
mod estimate;
mod motion;
mod order;
mod snap;

pub use divide::{divide_jobs, PrintFile};
pub use estimate::{estimate_job, FileEstimate, JobReport, HYDROGEL_DENSITY};
pub use motion::{build_motion_sets, MotionSet, Move, Phase};
pub use order::order_columns;
pub use snap::{is_snapped, snap, snap_columns, MACHINE_RESOLUTION};

use thiserror::Error;

use crate::geometry::{Axial, FoamBlock};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("injection speed is not set")]
    MissingInjectSpeed,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("column ({}, {}) spans z {z_low}..{z_high}, outside the foam height {height}", .cell.q, .cell.r)]
    OutsideFoam {
        cell: Axial,
        z_low: f64,
        z_high: f64,
        height: f64,
    },
    #[error("column #{index} at cell ({}, {}) needs {volume:.3} mm^3, more than the syringe capacity {capacity:.3} mm^3", .cell.q, .cell.r)]
    ColumnExceedsCapacity {
        index: usize,
        cell: Axial,
        volume: f64,
        capacity: f64,
    },
    #[error("cell ({}, {}) appears more than once", .0.q, .0.r)]
    DuplicateCell(Axial),
}

pub const DEFAULT_SAFE_MARGIN: f64 = 5.0;
pub const DEFAULT_TRAVEL_FEED: f64 = 5000.0;
pub const DEFAULT_INSERT_FEED: f64 = 500.0;
pub const DEFAULT_MARK_FEED: f64 = 1000.0;

/// Gantry settings. Feeds are mm/min, lengths mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineParams {
    /// Clearance above the foam top for horizontal travel.
    pub safe_margin: f64,
    pub travel_feed: f64,
    pub insert_feed: f64,
    /// Upward needle speed while dispensing (`S`).
    pub inject_speed: Option<f64>,
    pub mark_feed: f64,
    pub foam: FoamBlock,
}

impl MachineParams {
    pub fn new(foam: FoamBlock) -> Self {
        Self {
            safe_margin: DEFAULT_SAFE_MARGIN,
            travel_feed: DEFAULT_TRAVEL_FEED,
            insert_feed: DEFAULT_INSERT_FEED,
            inject_speed: None,
            mark_feed: DEFAULT_MARK_FEED,
            foam,
        }
    }

    pub fn with_inject_speed(mut self, speed: f64) -> Self {
        self.inject_speed = Some(speed);
        self
    }

    pub fn safe_height(&self) -> f64 {
        self.foam.height + self.safe_margin
    }

    pub fn inject_speed(&self) -> Result<f64, PlanError> {
        self.inject_speed.ok_or(PlanError::MissingInjectSpeed)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let checks = [
            ("safe_margin", self.safe_margin),
            ("travel_feed", self.travel_feed),
            ("insert_feed", self.insert_feed),
            ("mark_feed", self.mark_feed),
            ("inject_speed", self.inject_speed()?),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(PlanError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}
