use serde::Deserialize;

use super::{read_csv, MaterialError, Result};

/// Samples spanned by the drop reference.
pub const DEFAULT_WINDOW: usize = 3;
/// Fraction of the gap between the reading and the recovery baseline closed
/// per sample while an event is open. Not a measured constant.
pub const DEFAULT_RELAXATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ResistanceSample {
    #[serde(rename = "timestamp_s")]
    pub time: f64,
    #[serde(rename = "resistance_kohm")]
    pub resistance: f64,
}

/// Resistance of a conductive composite over time, kΩ.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceSeries {
    samples: Vec<ResistanceSample>,
}

impl ResistanceSeries {
    pub const CSV_HEADER: &'static str = "timestamp_s,resistance_kohm";

    pub fn new(samples: Vec<ResistanceSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.resistance.is_finite() && s.resistance > 0.0) {
                return Err(MaterialError::Invalid(format!(
                    "sample {i}: resistance {} kOhm is not positive",
                    s.resistance
                )));
            }
            if !s.time.is_finite() {
                return Err(MaterialError::Invalid(format!("sample {i}: bad timestamp")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].time <= w[0].time) {
            return Err(MaterialError::Invalid(format!(
                "timestamps must increase: sample {} at {} s follows {} s",
                i + 1,
                samples[i + 1].time,
                samples[i].time
            )));
        }
        Ok(Self { samples })
    }

    /// Readings taken one second apart.
    pub fn from_readings(readings: &[f64]) -> Result<Self> {
        Self::new(
            readings
                .iter()
                .enumerate()
                .map(|(i, &r)| ResistanceSample {
                    time: i as f64,
                    resistance: r,
                })
                .collect(),
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::new(read_csv(text, Self::CSV_HEADER)?)
    }

    pub fn samples(&self) -> &[ResistanceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendEvent {
    /// Index of the sample where the drop crossed the threshold.
    pub start: usize,
    /// Largest drop during the event as a fraction of the pre-event
    /// reference.
    pub magnitude: f64,
}

/// Flags bends as resistance drops.
///
/// Outside an event the reference is the highest reading in the last
/// `window` samples (including the current one); a reading at least
/// `threshold` below it opens an event. While open, a recovery baseline
/// starts at that reference and relaxes toward each reading by
/// `relaxation`; the event closes once a reading is back within
/// `threshold / 2` of the baseline. The relaxation lets an event end even
/// when the material settles at a new resting resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendDetector {
    pub threshold: f64,
    pub window: usize,
    pub relaxation: f64,
}

impl BendDetector {
    pub fn new(threshold: f64, window: usize) -> Self {
        Self {
            threshold,
            window,
            relaxation: DEFAULT_RELAXATION,
        }
    }

    pub fn detect(&self, series: &ResistanceSeries) -> Result<Vec<BendEvent>> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(MaterialError::Domain {
                name: "drop threshold",
                value: self.threshold,
            });
        }
        if self.window < 2 {
            return Err(MaterialError::Domain {
                name: "window",
                value: self.window as f64,
            });
        }
        if !(self.relaxation >= 0.0 && self.relaxation <= 1.0) {
            return Err(MaterialError::Domain {
                name: "relaxation",
                value: self.relaxation,
            });
        }
        if series.len() < self.window {
            return Err(MaterialError::SeriesTooShort {
                len: series.len(),
                window: self.window,
            });
        }
        let r: Vec<f64> = series.samples.iter().map(|s| s.resistance).collect();

        struct Open {
            start: usize,
            reference: f64,
            baseline: f64,
            low: f64,
        }
        let close = |e: Open| BendEvent {
            start: e.start,
            magnitude: (e.reference - e.low) / e.reference,
        };

        let mut events = Vec::new();
        let mut open: Option<Open> = None;
        for (i, &x) in r.iter().enumerate() {
            match open.as_mut() {
                None => {
                    let from = (i + 1).saturating_sub(self.window);
                    let reference = r[from..=i].iter().copied().fold(f64::MIN, f64::max);
                    if reference - x >= self.threshold * reference {
                        open = Some(Open {
                            start: i,
                            reference,
                            baseline: reference,
                            low: x,
                        });
                    }
                }
                Some(e) => {
                    e.low = e.low.min(x);
                    e.baseline += self.relaxation * (x - e.baseline);
                    if x >= e.baseline * (1.0 - self.threshold / 2.0) {
                        events.extend(open.take().map(close));
                    }
                }
            }
        }
        events.extend(open.map(close));
        Ok(events)
    }
}

pub fn detect_bend_events(
    series: &ResistanceSeries,
    threshold: f64,
    window: usize,
) -> Result<Vec<BendEvent>> {
    BendDetector::new(threshold, window).detect(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn relaxed_then_bent_reading() {
        let s = ResistanceSeries::from_readings(&[60.73, 60.70, 56.60, 60.10]).unwrap();
        let events = detect_bend_events(&s, 0.05, DEFAULT_WINDOW).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].start, 2);
        assert_relative_eq!(
            events[0].magnitude,
            (60.73 - 56.60) / 60.73,
            epsilon = 1e-12
        );
        assert!(detect_bend_events(&s, 0.07, DEFAULT_WINDOW)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn repeated_bends_are_separate_events() {
        let s = ResistanceSeries::from_readings(&[60.0, 60.0, 55.0, 54.0, 59.9, 60.0, 55.5, 60.0])
            .unwrap();
        let events = detect_bend_events(&s, 0.05, 3).unwrap();
        assert_eq!(
            events.iter().map(|e| e.start).collect::<Vec<_>>(),
            vec![2, 6]
        );
        assert_relative_eq!(events[0].magnitude, 6.0 / 60.0, epsilon = 1e-12);
    }

    #[test]
    fn slow_drift_is_not_a_bend() {
        // 1% per sample never drops 5% within a 3-sample window
        let readings: Vec<f64> = (0..50).map(|i| 60.0 * 0.99f64.powi(i)).collect();
        let s = ResistanceSeries::from_readings(&readings).unwrap();
        assert!(detect_bend_events(&s, 0.05, 3).unwrap().is_empty());
        assert!(!detect_bend_events(&s, 0.05, 10).unwrap().is_empty());
    }

    #[test]
    fn unrecovered_drop_still_closes() {
        let mut readings = vec![60.0, 60.0];
        readings.extend(std::iter::repeat_n(50.0, 200));
        let s = ResistanceSeries::from_readings(&readings).unwrap();
        assert_eq!(detect_bend_events(&s, 0.05, 3).unwrap().len(), 1);
    }

    #[test]
    fn errors() {
        let s = ResistanceSeries::from_readings(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            detect_bend_events(&s, 0.05, 3),
            Err(MaterialError::SeriesTooShort { len: 2, window: 3 })
        ));
        assert!(detect_bend_events(&s, 0.0, 2).is_err());
        assert!(detect_bend_events(&s, 1.0, 2).is_err());
        assert!(detect_bend_events(&s, 0.05, 1).is_err());
        assert!(ResistanceSeries::from_readings(&[1.0, 0.0]).is_err());
        assert!(ResistanceSeries::from_csv("timestamp_s,resistance_kohm\n0,1\n0,2\n").is_err());
        assert!(matches!(
            ResistanceSeries::from_csv("time,r\n0,1\n"),
            Err(MaterialError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn constant_series() {
        let s = ResistanceSeries::from_readings(&[42.0; 20]).unwrap();
        assert!(detect_bend_events(&s, 0.01, 2).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn non_decreasing_series_has_no_events(
            start in 1.0f64..100.0,
            steps in proptest::collection::vec(0.0f64..5.0, 2..60),
            threshold in 0.001f64..0.99,
            window in 2usize..6,
        ) {
            let readings: Vec<f64> = steps.iter().scan(start, |r, d| { *r += d; Some(*r) }).collect();
            prop_assume!(readings.len() >= window);
            let s = ResistanceSeries::from_readings(&readings).unwrap();
            prop_assert!(detect_bend_events(&s, threshold, window).unwrap().is_empty());
        }
    }
}
