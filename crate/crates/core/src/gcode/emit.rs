use std::fmt::Write as _;

use super::{coord, GcodeError};
use crate::geometry::{Contour, Point3};
use crate::plan::{is_snapped, MachineParams, MotionSet, Phase, PlanError, MACHINE_RESOLUTION};

// half the machine grid, so snapped coordinates on the foam faces pass
const BOUNDS_TOLERANCE: f64 = 0.5 * MACHINE_RESOLUTION;

/// Job metadata written as header comments of an injection file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionHeader {
    /// 1-based.
    pub file: usize,
    pub files: usize,
    pub cell_area: f64,
    pub capacity: Option<f64>,
}

struct Writer {
    text: String,
    pos: Point3,
}

impl Writer {
    fn new(start: Point3) -> Self {
        Self {
            text: String::new(),
            pos: start,
        }
    }

    fn line(&mut self, s: &str) {
        self.text.push_str(s);
        self.text.push('\n');
    }

    fn comment(&mut self, s: &str) {
        self.line(&format!("; {s}"));
    }

    fn motion(&mut self, rapid: bool, to: Point3, feed: f64, with_xy: bool) {
        let mut s = String::from(if rapid { "G0" } else { "G1" });
        let xy =
            with_xy || coord(to[0]) != coord(self.pos[0]) || coord(to[1]) != coord(self.pos[1]);
        if xy {
            write!(s, " X{} Y{}", coord(to[0]), coord(to[1])).unwrap();
        }
        write!(s, " Z{} F{feed}", coord(to[2])).unwrap();
        self.line(&s);
        self.pos = to;
    }

    fn preamble(&mut self, mp: &MachineParams) {
        self.line("G21");
        self.line("G90");
        let up = [self.pos[0], self.pos[1], mp.safe_height()];
        self.motion(true, up, mp.travel_feed, false);
    }
}

fn check_bounds(
    p: Point3,
    mp: &MachineParams,
    context: impl FnOnce() -> String,
) -> Result<(), GcodeError> {
    let f = &mp.foam;
    let t = BOUNDS_TOLERANCE;
    let inside = p[0] >= -t
        && p[0] <= f.width + t
        && p[1] >= -t
        && p[1] <= f.depth + t
        && p[2] >= -t
        && p[2] <= mp.safe_height() + t;
    if inside {
        Ok(())
    } else {
        Err(GcodeError::OutOfBounds {
            context: context(),
            point: p,
        })
    }
}

/// One injection file. The needle is assumed to start at `(0, 0)`; the
/// first move lifts it to safe height.
pub fn emit_injection(
    sets: &[MotionSet],
    mp: &MachineParams,
    header: &InjectionHeader,
) -> Result<String, GcodeError> {
    mp.validate()?;
    if !(header.cell_area.is_finite() && header.cell_area > 0.0) {
        return Err(PlanError::NonPositive {
            name: "cell_area",
            value: header.cell_area,
        }
        .into());
    }
    let speed = mp.inject_speed()?;
    for set in sets {
        for m in &set.moves {
            let label = || format!("column ({}, {})", set.cell.q, set.cell.r);
            check_bounds(m.to, mp, label)?;
            if let Some(&value) = m.to.iter().find(|v| !is_snapped(**v)) {
                return Err(GcodeError::OffGrid {
                    cell: set.cell,
                    value,
                });
            }
        }
    }
    let volume: f64 = sets
        .iter()
        .map(|s| s.dispensed_length() * header.cell_area)
        .sum();

    let mut w = Writer::new([0.0, 0.0, mp.safe_height()]);
    w.comment(&format!(
        "foamfab injection file {} of {}",
        header.file, header.files
    ));
    w.comment(&format!("columns: {}", sets.len()));
    w.comment(&format!("cell_area_mm2: {}", header.cell_area));
    w.comment(&format!("volume_mm3: {volume:.3}"));
    if let Some(c) = header.capacity {
        w.comment(&format!("capacity_mm3: {c}"));
    }
    w.comment(&format!("inject_speed_mm_min: {speed}"));
    w.preamble(mp);
    for set in sets {
        w.comment(&format!("column q={} r={}", set.cell.q, set.cell.r));
        let mut dispensing = false;
        for m in &set.moves {
            if m.phase.dispenses() != dispensing {
                dispensing = !dispensing;
                w.line(if dispensing { "M3" } else { "M5" });
            }
            w.motion(m.phase.is_rapid(), m.to, m.feed, m.phase == Phase::Approach);
        }
        debug_assert!(!dispensing, "motion sets end with a retract");
    }
    w.line("M2");
    Ok(w.text)
}

/// Outline tracing file: each closed contour is drawn on the foam top at
/// the marking feed, with repositioning at safe height in between.
pub fn emit_marking(contours: &[Contour], mp: &MachineParams) -> Result<String, GcodeError> {
    for (name, value) in [
        ("safe_margin", mp.safe_margin),
        ("travel_feed", mp.travel_feed),
        ("mark_feed", mp.mark_feed),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(PlanError::NonPositive { name, value }.into());
        }
    }
    let top = mp.foam.height;
    for (i, c) in contours.iter().enumerate() {
        if !c.is_closed() {
            return Err(GcodeError::OpenContour(i));
        }
        for p in &c.points {
            check_bounds([p[0], p[1], top], mp, || format!("contour {i}"))?;
        }
    }

    let mut w = Writer::new([0.0, 0.0, mp.safe_height()]);
    w.comment("foamfab marking file");
    w.comment(&format!("contours: {}", contours.len()));
    w.preamble(mp);
    for (i, c) in contours.iter().enumerate() {
        w.comment(&format!("contour {i}"));
        let [x, y] = c.points[0];
        w.motion(true, [x, y, mp.safe_height()], mp.travel_feed, true);
        w.motion(false, [x, y, top], mp.mark_feed, false);
        for p in &c.points[1..] {
            w.motion(false, [p[0], p[1], top], mp.mark_feed, true);
        }
        w.motion(true, [x, y, mp.safe_height()], mp.travel_feed, false);
    }
    w.line("M2");
    Ok(w.text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axial, Column, FoamBlock};
    use crate::plan::build_motion_sets;

    fn mp() -> MachineParams {
        MachineParams::new(FoamBlock::new(40.0, 40.0, 50.0).unwrap()).with_inject_speed(600.0)
    }

    fn header() -> InjectionHeader {
        InjectionHeader {
            file: 1,
            files: 1,
            cell_area: 2.5,
            capacity: Some(1000.0),
        }
    }

    fn column(segments: Vec<(f64, f64)>) -> Column {
        Column {
            cell: Axial::new(0, 0),
            center: [10.0, 10.0],
            segments,
        }
    }

    fn body(text: &str) -> Vec<&str> {
        text.lines().filter(|l| !l.starts_with(';')).collect()
    }

    #[test]
    fn single_column_lines() {
        let sets = build_motion_sets(&[column(vec![(0.0, 50.0)])], &mp()).unwrap();
        let text = emit_injection(&sets, &mp(), &header()).unwrap();
        assert_eq!(
            body(&text),
            vec![
                "G21",
                "G90",
                "G0 Z55.000 F5000",
                "G0 X10.000 Y10.000 Z55.000 F5000",
                "G1 Z0.000 F500",
                "M3",
                "G1 Z50.000 F600",
                "M5",
                "G0 Z55.000 F5000",
                "M2",
            ]
        );
        assert!(text.contains("; volume_mm3: 125.000\n"));
        assert!(text.contains("; capacity_mm3: 1000\n"));
    }

    #[test]
    fn empty_plan_is_header_and_footer() {
        let text = emit_injection(&[], &mp(), &header()).unwrap();
        assert_eq!(body(&text), vec!["G21", "G90", "G0 Z55.000 F5000", "M2"]);
    }

    #[test]
    fn gap_toggles_valve() {
        let sets = build_motion_sets(&[column(vec![(0.0, 20.0), (30.0, 50.0)])], &mp()).unwrap();
        let text = emit_injection(&sets, &mp(), &header()).unwrap();
        let lines = body(&text);
        assert_eq!(lines.iter().filter(|l| **l == "M3").count(), 2);
        assert_eq!(lines.iter().filter(|l| **l == "M5").count(), 2);
        let insert = lines.iter().position(|l| *l == "G1 Z0.000 F500").unwrap();
        let retract = lines.iter().rposition(|l| l.starts_with("G0 Z55")).unwrap();
        assert!(lines[insert..retract]
            .iter()
            .all(|l| l.starts_with("G1") || l.starts_with('M')));
    }

    #[test]
    fn refuses_off_grid_and_out_of_bounds() {
        let mut col = column(vec![(0.0, 50.0)]);
        col.center = [10.0004, 10.0];
        let sets = build_motion_sets(&[col], &mp()).unwrap();
        assert!(matches!(
            emit_injection(&sets, &mp(), &header()),
            Err(GcodeError::OffGrid { .. })
        ));
        let mut col = column(vec![(0.0, 50.0)]);
        col.center = [45.0, 10.0];
        let sets = build_motion_sets(&[col], &mp()).unwrap();
        assert!(matches!(
            emit_injection(&sets, &mp(), &header()),
            Err(GcodeError::OutOfBounds { .. })
        ));
    }

    fn rectangle(x0: f64, y0: f64) -> Contour {
        Contour {
            points: vec![
                [x0, y0],
                [x0 + 10.0, y0],
                [x0 + 10.0, y0 + 5.0],
                [x0, y0 + 5.0],
                [x0, y0],
            ],
        }
    }

    #[test]
    fn marking_rectangle() {
        let text = emit_marking(&[rectangle(5.0, 5.0)], &mp()).unwrap();
        assert_eq!(
            body(&text),
            vec![
                "G21",
                "G90",
                "G0 Z55.000 F5000",
                "G0 X5.000 Y5.000 Z55.000 F5000",
                "G1 Z50.000 F1000",
                "G1 X15.000 Y5.000 Z50.000 F1000",
                "G1 X15.000 Y10.000 Z50.000 F1000",
                "G1 X5.000 Y10.000 Z50.000 F1000",
                "G1 X5.000 Y5.000 Z50.000 F1000",
                "G0 Z55.000 F5000",
                "M2",
            ]
        );
        assert!(!text.contains("M3"));
    }

    #[test]
    fn marking_two_contours_and_errors() {
        let text = emit_marking(&[rectangle(5.0, 5.0), rectangle(20.0, 20.0)], &mp()).unwrap();
        let repositions = text.lines().filter(|l| l.starts_with("G0 X")).count();
        assert_eq!(repositions, 2);
        assert_eq!(
            body(&emit_marking(&[], &mp()).unwrap()),
            vec!["G21", "G90", "G0 Z55.000 F5000", "M2"]
        );
        let mut open = rectangle(5.0, 5.0);
        open.points.pop();
        assert!(matches!(
            emit_marking(&[open], &mp()),
            Err(GcodeError::OpenContour(0))
        ));
    }
}
