use serde::Deserialize;

use super::{read_csv, MaterialError, Result};
use crate::interp::{InterpError, PiecewiseLinear};

const RATIO_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct StiffnessRow {
    pub hydration_ratio: f64,
    #[serde(rename = "load_g")]
    pub load: f64,
    #[serde(rename = "deformation_mm")]
    pub deformation: f64,
}

/// Deformation under load for samples injected with hydrogel of different
/// hydration ratios. A table with a single load per ratio is a ranking at
/// that load; several loads per ratio give full deformation-load curves.
///
/// Wetter hydrogel gives a softer composite, so at every load the table
/// must not show a wetter sample deforming less than a drier one.
#[derive(Debug, Clone)]
pub struct StiffnessTable {
    /// Sorted by ratio.
    curves: Vec<(f64, PiecewiseLinear)>,
}

impl StiffnessTable {
    pub const CSV_HEADER: &'static str = "hydration_ratio,load_g,deformation_mm";

    pub fn from_rows(rows: &[StiffnessRow]) -> Result<Self> {
        let mut grouped: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for row in rows {
            if !(0.0..=1.0).contains(&row.hydration_ratio) {
                return Err(MaterialError::Invalid(format!(
                    "hydration ratio {} is outside [0, 1]",
                    row.hydration_ratio
                )));
            }
            if !(row.load.is_finite()
                && row.load > 0.0
                && row.deformation.is_finite()
                && row.deformation >= 0.0)
            {
                return Err(MaterialError::Invalid(format!(
                    "load {} g / deformation {} mm must be positive / non-negative",
                    row.load, row.deformation
                )));
            }
            match grouped
                .iter_mut()
                .find(|(r, _)| (r - row.hydration_ratio).abs() <= RATIO_MATCH)
            {
                Some((_, pts)) => pts.push((row.load, row.deformation)),
                None => grouped.push((row.hydration_ratio, vec![(row.load, row.deformation)])),
            }
        }
        if grouped.is_empty() {
            return Err(MaterialError::Invalid("no rows".into()));
        }
        grouped.sort_by(|a, b| a.0.total_cmp(&b.0));
        let curves = grouped
            .into_iter()
            .map(|(ratio, pts)| {
                PiecewiseLinear::new(pts).map(|f| (ratio, f)).map_err(|e| {
                    MaterialError::Invalid(format!("hydration ratio {ratio}: loads {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let table = Self { curves };
        table.check_order()?;
        Ok(table)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_rows(&read_csv(text, Self::CSV_HEADER)?)
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.curves.iter().map(|(r, _)| *r)
    }

    /// Loads at which every ratio has a value.
    pub fn load_range(&self) -> Option<(f64, f64)> {
        let lo = self
            .curves
            .iter()
            .map(|(_, f)| f.domain().0)
            .fold(f64::MIN, f64::max);
        let hi = self
            .curves
            .iter()
            .map(|(_, f)| f.domain().1)
            .fold(f64::MAX, f64::min);
        (lo <= hi).then_some((lo, hi))
    }

    /// Deformation of a sample of `ratio` at `load`, interpolated linearly
    /// along the load curve and then across ratios. Neither axis
    /// extrapolates.
    pub fn deformation_at(&self, ratio: f64, load: f64) -> Result<f64> {
        let (rmin, rmax) = (self.curves[0].0, self.curves[self.curves.len() - 1].0);
        if !(ratio >= rmin - RATIO_MATCH && ratio <= rmax + RATIO_MATCH) {
            return Err(MaterialError::OutOfRange {
                what: "hydration ratio",
                value: ratio,
                min: rmin,
                max: rmax,
            });
        }
        let k = self
            .curves
            .partition_point(|(r, _)| *r < ratio - RATIO_MATCH);
        let (r1, f1) = &self.curves[k];
        let d1 = eval_load(f1, load)?;
        if (r1 - ratio).abs() <= RATIO_MATCH {
            return Ok(d1);
        }
        let (r0, f0) = &self.curves[k - 1];
        let d0 = eval_load(f0, load)?;
        Ok(PiecewiseLinear::new([(*r0, d0), (*r1, d1)])
            .and_then(|f| f.eval(ratio))
            .expect("ratio lies between two sorted nodes"))
    }

    /// Tabulated ratio with the smallest deformation at `load`; the first
    /// one wins ties.
    pub fn stiffest_ratio(&self, load: f64) -> Result<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (r, f) in &self.curves {
            let d = eval_load(f, load)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((*r, d));
            }
        }
        Ok(best.expect("table has at least one ratio").0)
    }

    fn check_order(&self) -> Result<()> {
        for pair in self.curves.windows(2) {
            let ((dry_ratio, dry), (wet_ratio, wet)) = (&pair[0], &pair[1]);
            let loads = dry.nodes().chain(wet.nodes()).map(|(l, _)| l);
            for l in loads.filter(|&l| dry.contains(l) && wet.contains(l)) {
                let (dd, dw) = (dry.eval(l).unwrap(), wet.eval(l).unwrap());
                if dd > dw {
                    return Err(MaterialError::Invalid(format!(
                        "at {l} g, ratio {dry_ratio} deforms {dd} mm but wetter ratio {wet_ratio} only {dw} mm"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn eval_load(curve: &PiecewiseLinear, load: f64) -> Result<f64> {
    curve.eval(load).map_err(|e| match e {
        InterpError::OutOfRange { x, min, max } => MaterialError::OutOfRange {
            what: "load",
            value: x,
            min,
            max,
        },
        other => MaterialError::Invalid(other.to_string()),
    })
}

/// Deformation at `load` for a hydrogel of `ratio`; smaller is stiffer.
pub fn stiffness_rank(table: &StiffnessTable, ratio: f64, load: f64) -> Result<f64> {
    table.deformation_at(ratio, load)
}
