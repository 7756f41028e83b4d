//! Injection-rate calibration and hexagon sizing.
//!
//! The needle moves upward at speed `S` (mm/min) while the syringe delivers
//! `Q` (mm³/min). Over any interval the dispensed volume `Q·t` fills a column
//! of height `S·t`, so the cell cross-section is `A = Q / S`. `Q` itself
//! depends on `S` and on the hydrogel's hydration ratio, and is only known
//! from measurement: the [`CalibrationTable`].

use serde::Deserialize;
use thiserror::Error;

use crate::interp::{InterpError, PiecewiseLinear};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
/// Two hydration ratios closer than this are the same table entry.
const RATIO_MATCH: f64 = 1e-9;

pub const CSV_HEADER: &str = "hydration_ratio,speed_mm_min,rate_mm3_min";

#[derive(Debug, Error)]
pub enum CalibError {
    #[error("{name} must be positive, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("hydration ratio {0} is not in the calibration table")]
    UnknownRatio(f64),
    #[error("speed {speed} mm/min is outside the calibrated range [{min}, {max}] for hydration ratio {ratio}")]
    Extrapolation {
        speed: f64,
        ratio: f64,
        min: f64,
        max: f64,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid calibration table: {0}")]
    Invalid(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, CalibError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CalibError::Domain { name, value })
    }
}

/// Hexagon area served by one column: `A = Q / S`.
pub fn hexagon_area(rate: f64, speed: f64) -> Result<f64, CalibError> {
    Ok(positive("injection rate", rate)? / positive("injection speed", speed)?)
}

/// Side length of a regular hexagon with the given area.
pub fn hex_side(area: f64) -> Result<f64, CalibError> {
    Ok((2.0 * positive("hexagon area", area)? / (3.0 * SQRT_3)).sqrt())
}

pub fn hex_area_from_side(side: f64) -> f64 {
    1.5 * SQRT_3 * side * side
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct CalibrationRow {
    pub hydration_ratio: f64,
    #[serde(rename = "speed_mm_min")]
    pub speed: f64,
    #[serde(rename = "rate_mm3_min")]
    pub rate: f64,
}

/// Measured injection rate over speed, one curve per hydration ratio.
#[derive(Debug, Clone)]
pub struct CalibrationTable {
    /// Sorted by ratio.
    curves: Vec<(f64, PiecewiseLinear)>,
}

impl CalibrationTable {
    pub fn from_rows(rows: &[CalibrationRow]) -> Result<Self, CalibError> {
        let mut grouped: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for row in rows {
            positive("speed", row.speed)?;
            positive("rate", row.rate)?;
            if !(row.hydration_ratio > 0.0 && row.hydration_ratio <= 1.0) {
                return Err(CalibError::Invalid(format!(
                    "hydration ratio {} is outside (0, 1]",
                    row.hydration_ratio
                )));
            }
            match grouped
                .iter_mut()
                .find(|(r, _)| (r - row.hydration_ratio).abs() <= RATIO_MATCH)
            {
                Some((_, pts)) => pts.push((row.speed, row.rate)),
                None => grouped.push((row.hydration_ratio, vec![(row.speed, row.rate)])),
            }
        }
        if grouped.is_empty() {
            return Err(CalibError::Invalid("no rows".into()));
        }
        grouped.sort_by(|a, b| a.0.total_cmp(&b.0));
        let curves = grouped
            .into_iter()
            .map(|(ratio, pts)| {
                PiecewiseLinear::new(pts).map(|f| (ratio, f)).map_err(|e| {
                    CalibError::Invalid(format!("hydration ratio {ratio}: speeds {e}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let table = Self { curves };
        table.check_viscosity_order()?;
        Ok(table)
    }

    /// Parses `hydration_ratio,speed_mm_min,rate_mm3_min` CSV text.
    pub fn from_csv(text: &str) -> Result<Self, CalibError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| parse_error(&e, 1))?.clone();
        if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
            return Err(CalibError::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            });
        }
        let mut rows = Vec::new();
        for record in reader.deserialize::<CalibrationRow>() {
            rows.push(record.map_err(|e| parse_error(&e, 0))?);
        }
        Self::from_rows(&rows)
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.curves.iter().map(|(r, _)| *r)
    }

    fn curve(&self, ratio: f64) -> Result<&PiecewiseLinear, CalibError> {
        self.curves
            .iter()
            .find(|(r, _)| (r - ratio).abs() <= RATIO_MATCH)
            .map(|(_, f)| f)
            .ok_or(CalibError::UnknownRatio(ratio))
    }

    /// Calibrated speed range for a ratio.
    pub fn speed_range(&self, ratio: f64) -> Result<(f64, f64), CalibError> {
        Ok(self.curve(ratio)?.domain())
    }

    /// Injection rate `Q` at speed `S`, interpolated linearly between
    /// measurements. Speeds outside the measured range are rejected.
    pub fn rate_at(&self, speed: f64, ratio: f64) -> Result<f64, CalibError> {
        let curve = self.curve(ratio)?;
        curve.eval(speed).map_err(|e| match e {
            InterpError::OutOfRange { min, max, .. } => CalibError::Extrapolation {
                speed,
                ratio,
                min,
                max,
            },
            other => CalibError::Invalid(other.to_string()),
        })
    }

    /// Cell area for injecting at `speed` with hydrogel of `ratio`.
    pub fn cell_area(&self, speed: f64, ratio: f64) -> Result<f64, CalibError> {
        hexagon_area(self.rate_at(speed, ratio)?, speed)
    }

    /// Wetter hydrogel is less viscous, so at a shared speed its rate may not
    /// be lower than that of a drier one.
    fn check_viscosity_order(&self) -> Result<(), CalibError> {
        for pair in self.curves.windows(2) {
            let (dry_ratio, dry) = (&pair[0].0, &pair[0].1);
            let (wet_ratio, wet) = (&pair[1].0, &pair[1].1);
            let speeds = dry.nodes().chain(wet.nodes()).map(|(s, _)| s);
            for s in speeds.filter(|&s| dry.contains(s) && wet.contains(s)) {
                let (qd, qw) = (dry.eval(s).unwrap(), wet.eval(s).unwrap());
                if qd > qw * (1.0 + 1e-12) {
                    return Err(CalibError::Invalid(format!(
                        "at {s} mm/min, ratio {dry_ratio} delivers {qd} mm^3/min but wetter ratio {wet_ratio} only {qw}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn parse_error(e: &csv::Error, fallback: u64) -> CalibError {
    let line = e.position().map_or(fallback, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    CalibError::Parse { line, message }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear_table() -> CalibrationTable {
        let rows: Vec<_> = (1..=10)
            .map(|k| CalibrationRow {
                hydration_ratio: 0.5,
                speed: 100.0 * f64::from(k),
                rate: 250.0 * f64::from(k),
            })
            .collect();
        CalibrationTable::from_rows(&rows).unwrap()
    }

    #[test]
    fn area_is_rate_over_speed() {
        assert_eq!(hexagon_area(500.0, 100.0).unwrap(), 5.0);
        assert_eq!(hexagon_area(37.5, 37.5).unwrap(), 1.0);
        assert!(matches!(
            hexagon_area(0.0, 1.0),
            Err(CalibError::Domain { .. })
        ));
        assert!(matches!(
            hexagon_area(1.0, -2.0),
            Err(CalibError::Domain { .. })
        ));
    }

    #[test]
    fn side_from_area() {
        assert_relative_eq!(hex_side(1.5 * SQRT_3).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(hex_side(6.0 * SQRT_3).unwrap(), 2.0, epsilon = 1e-15);
        // closed form and Brent root-finding of 1.5·√3·a² = 5 agree on 1.3872638...
        assert_relative_eq!(
            hex_side(5.0).unwrap(),
            1.387_263_816_762_605_7,
            epsilon = 1e-12
        );
        let a = hexagon_area(259.8, 100.0).unwrap();
        assert_relative_eq!(a, 2.598, epsilon = 1e-12);
        assert_eq!(format!("{:.4}", hex_side(a).unwrap()), "1.0000");
        assert!(hex_side(0.0).is_err());
    }

    #[test]
    fn interpolation_nodes_and_midpoints() {
        let t = linear_table();
        assert_eq!(t.rate_at(300.0, 0.5).unwrap(), 750.0);
        assert_eq!(t.rate_at(350.0, 0.5).unwrap(), (750.0 + 1000.0) / 2.0);
        for s in [100.0, 123.4, 555.5, 999.9, 1000.0] {
            assert!((t.rate_at(s, 0.5).unwrap() - 2.5 * s).abs() <= 1e-9);
        }
    }

    #[test]
    fn no_extrapolation_or_unknown_ratio() {
        let t = linear_table();
        assert!(matches!(
            t.rate_at(99.0, 0.5),
            Err(CalibError::Extrapolation { .. })
        ));
        assert!(matches!(
            t.rate_at(1001.0, 0.5),
            Err(CalibError::Extrapolation { .. })
        ));
        assert!(matches!(
            t.rate_at(500.0, 0.75),
            Err(CalibError::UnknownRatio(_))
        ));
    }

    #[test]
    fn csv_round_trip_and_line_numbers() {
        let text = "hydration_ratio,speed_mm_min,rate_mm3_min\n0.5,100,200\n0.5,200,380\n1.0,100,260\n1.0,200,500\n";
        let t = CalibrationTable::from_csv(text).unwrap();
        assert_eq!(t.ratios().collect::<Vec<_>>(), vec![0.5, 1.0]);
        assert_eq!(t.cell_area(200.0, 1.0).unwrap(), 2.5);

        let bad = "hydration_ratio,speed_mm_min,rate_mm3_min\n0.5,100,200\n0.5,abc,380\n";
        match CalibrationTable::from_csv(bad).unwrap_err() {
            CalibError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad_header = "ratio,speed,rate\n0.5,100,200\n";
        assert!(matches!(
            CalibrationTable::from_csv(bad_header),
            Err(CalibError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn table_invariants_enforced() {
        let row = |h, s, q| CalibrationRow {
            hydration_ratio: h,
            speed: s,
            rate: q,
        };
        // duplicate speed
        assert!(
            CalibrationTable::from_rows(&[row(0.5, 100.0, 1.0), row(0.5, 100.0, 2.0)]).is_err()
        );
        // drier hydrogel flowing faster than wetter one
        assert!(
            CalibrationTable::from_rows(&[row(0.5, 100.0, 300.0), row(1.0, 100.0, 200.0)]).is_err()
        );
        assert!(CalibrationTable::from_rows(&[row(0.0, 100.0, 300.0)]).is_err());
        assert!(CalibrationTable::from_rows(&[row(0.5, 100.0, -3.0)]).is_err());
        assert!(CalibrationTable::from_rows(&[]).is_err());
    }

    proptest! {
        #[test]
        fn area_times_speed_is_rate(q in 0.1f64..1e4, s in 0.1f64..1e4) {
            let a = hexagon_area(q, s).unwrap();
            prop_assert!((a * s - q).abs() <= 1e-12 * q);
        }

        #[test]
        fn side_round_trips(area in 1e-3f64..1e4) {
            let back = hex_area_from_side(hex_side(area).unwrap());
            prop_assert!((back - area).abs() <= 1e-12 * area);
        }
    }
}
