//! Material calculators for sodium-polyacrylate hydrogel injected into
//! open-cell polyurethane foam: mixing, swelling, compressibility, drying,
//! water retention, stiffness ranking, living-hinge bend limits and
//! resistance-based bend detection.
//!
//! The constants are laboratory measurements; everything that extrapolates
//! from them (drying-time scaling, the hinge model) is an estimate.

mod bends;
mod retention;
mod stiffness;

pub use bends::{
    detect_bend_events, BendDetector, BendEvent, ResistanceSample, ResistanceSeries,
    DEFAULT_RELAXATION, DEFAULT_WINDOW,
};
pub use retention::{RetentionRow, RetentionTable};
pub use stiffness::{stiffness_rank, StiffnessRow, StiffnessTable};

use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("{name} is out of range: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid table: {0}")]
    Invalid(String),
    #[error("{what} {value} is outside the tabulated range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("series has {len} samples, fewer than the window of {window}")]
    SeriesTooShort { len: usize, window: usize },
}

type Result<T> = std::result::Result<T, MaterialError>;

/// Measured properties of the hydrogel and the composite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConstants {
    /// Grams of water absorbed per gram of dry polymer at saturation.
    pub max_absorption: f64,
    /// Volume multiple of the polymer when fully swollen.
    pub swell_factor: f64,
    /// Maximum volumetric compression of a dry composite sample.
    pub compressibility_dehydrated: f64,
    /// Maximum volumetric compression of a hydrated composite sample.
    pub compressibility_hydrated: f64,
    /// Weight fraction kept by a hot-air-dried sample after rehydration.
    pub air_dry_retention: f64,
    /// Reference sample for drying: a 50 mm cube, in mm³.
    pub drying_ref_volume: f64,
    /// Hours for the reference sample to dry in room air.
    pub drying_ref_hours: f64,
    /// Hours the reference sample still needed with heat and ventilation
    /// (a lower bound).
    pub hot_air_min_hours: f64,
    /// Upper limit of the speed-up from drawing water out with salt.
    pub salt_speedup_max: f64,
}

impl MaterialConstants {
    pub const MEASURED: Self = Self {
        max_absorption: 212.0,
        swell_factor: 262.0,
        compressibility_dehydrated: 0.793,
        compressibility_hydrated: 0.044,
        air_dry_retention: 0.87,
        drying_ref_volume: 125_000.0,
        drying_ref_hours: 120.0,
        hot_air_min_hours: 72.0,
        salt_speedup_max: 50.0,
    };
}

impl Default for MaterialConstants {
    fn default() -> Self {
        Self::MEASURED
    }
}

const M: MaterialConstants = MaterialConstants::MEASURED;

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MaterialError::Domain { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MaterialError::Domain { name, value })
    }
}

/// Grams of water to mix with `spa_mass` grams of polymer for the given
/// pre-injection hydration ratio.
pub fn mixing_masses(spa_mass: f64, hydration_ratio: f64) -> Result<f64> {
    non_negative("SPA mass", spa_mass)?;
    if !(0.0..=1.0).contains(&hydration_ratio) {
        return Err(MaterialError::Domain {
            name: "hydration ratio",
            value: hydration_ratio,
        });
    }
    Ok(hydration_ratio * M.max_absorption * spa_mass)
}

/// Split of a hydrogel mass into (polymer, water) grams.
pub fn hydrogel_components(gel_mass: f64, hydration_ratio: f64) -> Result<(f64, f64)> {
    non_negative("hydrogel mass", gel_mass)?;
    let spa = gel_mass / (1.0 + hydration_ratio * M.max_absorption);
    Ok((spa, mixing_masses(spa, hydration_ratio)?))
}

pub fn swelled_volume(dry_volume: f64) -> Result<f64> {
    Ok(non_negative("dry volume", dry_volume)? * M.swell_factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HydrationState {
    Dehydrated,
    Hydrated,
}

pub fn compressibility_of(state: HydrationState) -> f64 {
    match state {
        HydrationState::Dehydrated => M.compressibility_dehydrated,
        HydrationState::Hydrated => M.compressibility_hydrated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DryingMethod {
    RoomAir,
    HotAir,
    Salt,
}

/// Drying time estimate, hours. Scales linearly with volume from the
/// reference sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DryingEstimate {
    pub hours: f64,
    /// The true time is at least `hours`.
    pub lower_bound: bool,
}

pub fn drying_time(volume: f64, method: DryingMethod) -> Result<DryingEstimate> {
    let scale = positive("volume", volume)? / M.drying_ref_volume;
    let room = M.drying_ref_hours * scale;
    Ok(match method {
        DryingMethod::RoomAir => DryingEstimate {
            hours: room,
            lower_bound: false,
        },
        DryingMethod::HotAir => DryingEstimate {
            hours: M.hot_air_min_hours * scale,
            lower_bound: true,
        },
        DryingMethod::Salt => DryingEstimate {
            hours: room / M.salt_speedup_max,
            lower_bound: false,
        },
    })
}

/// Weight left after one hot-air dry and rehydrate cycle.
pub fn air_dry_retained_mass(hydrated_mass: f64) -> Result<f64> {
    Ok(non_negative("hydrated mass", hydrated_mass)? * M.air_dry_retention)
}

/// A living hinge: a dehydrated gap between two hydrated walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSpec {
    /// Gap length, mm.
    pub l: f64,
    /// Wall thickness, mm.
    pub t: f64,
}

impl JointSpec {
    pub fn new(l: f64, t: f64) -> Result<Self> {
        non_negative("gap length l", l)?;
        positive("wall thickness t", t)?;
        Ok(Self { l, t })
    }

    /// Maximum bend angle, radians.
    pub fn theta(&self) -> f64 {
        2.0 * (self.l / (2.0 * self.t)).atan()
    }
}

/// Widest bend of a living hinge: a dehydrated gap of length `l` between
/// hydrated walls of thickness `t` closes once each wall has rotated by
/// half the bend about the gap's root, giving `2·atan(l / 2t)` radians.
pub fn max_bend_angle(l: f64, t: f64) -> Result<f64> {
    Ok(JointSpec::new(l, t)?.theta())
}

/// Reads comma-separated rows under an exact header. `#` lines are comments.
fn read_csv<T: DeserializeOwned>(text: &str, header: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| parse_error(&e, 1))?;
    if found.iter().collect::<Vec<_>>().join(",") != header {
        return Err(MaterialError::Parse {
            line: 1,
            message: format!("expected header `{header}`"),
        });
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| parse_error(&e, 0)))
        .collect()
}

fn parse_error(e: &csv::Error, fallback: u64) -> MaterialError {
    let line = e.position().map_or(fallback, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    MaterialError::Parse { line, message }
}
