use serde::Deserialize;

use super::{read_csv, MaterialError, Result};
use crate::interp::PiecewiseLinear;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct RetentionRow {
    pub cycle: u32,
    /// Weight after the cycle's rehydration, as a fraction of the first
    /// fully hydrated weight.
    pub retained_fraction: f64,
}

/// Measured weight retention over repeated dry and rehydrate cycles.
#[derive(Debug, Clone)]
pub struct RetentionTable {
    curve: PiecewiseLinear,
}

impl RetentionTable {
    pub const CSV_HEADER: &'static str = "cycle,retained_fraction";

    pub fn from_rows(rows: &[RetentionRow]) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| {
            !(r.retained_fraction.is_finite()
                && r.retained_fraction > 0.0
                && r.retained_fraction <= 1.0)
        }) {
            return Err(MaterialError::Invalid(format!(
                "cycle {}: retained fraction {} is outside (0, 1]",
                bad.cycle, bad.retained_fraction
            )));
        }
        let curve =
            PiecewiseLinear::new(rows.iter().map(|r| (r.cycle as f64, r.retained_fraction)))
                .map_err(|e| MaterialError::Invalid(format!("cycles {e}")))?;
        Ok(Self { curve })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_rows(&read_csv(text, Self::CSV_HEADER)?)
    }

    pub fn cycles(&self) -> (u32, u32) {
        let (a, b) = self.curve.domain();
        (a as u32, b as u32)
    }

    /// Retained fraction after `cycle`; only tabulated cycles are answered.
    pub fn retained_after(&self, cycle: u32) -> Result<f64> {
        let c = cycle as f64;
        self.curve
            .nodes()
            .find(|&(x, _)| x == c)
            .map(|(_, y)| y)
            .ok_or_else(|| {
                let (min, max) = self.curve.domain();
                MaterialError::OutOfRange {
                    what: "cycle",
                    value: c,
                    min,
                    max,
                }
            })
    }

    pub fn retained_mass(&self, hydrated_mass: f64, cycle: u32) -> Result<f64> {
        super::non_negative("hydrated mass", hydrated_mass)?;
        Ok(hydrated_mass * self.retained_after(cycle)?)
    }
}
