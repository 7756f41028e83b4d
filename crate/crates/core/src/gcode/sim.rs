use std::fmt;

use super::{Command, Program};
use crate::geometry::Point3;
use crate::plan::{MachineParams, MACHINE_RESOLUTION};

const TOL: f64 = 1e-6;
const ENVELOPE_TOL: f64 = 0.5 * MACHINE_RESOLUTION;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn same_feed(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    /// Motion before `G21` and `G90`.
    ModeNotSet,
    /// Horizontal move below safe height, other than tracing an outline on
    /// the foam top.
    LowTravel,
    DispenseDescending,
    DispenseRapid,
    DispenseHorizontal,
    UnexpectedFeed,
    OutsideEnvelope,
    CapacityExceeded,
    /// Dispensing with no known cell area, so volume cannot be tracked.
    UnknownCellArea,
    DispenseLeftOn,
    MissingEnd,
    AfterEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceState {
    pub line: usize,
    pub position: Point3,
    pub feed: Option<f64>,
    pub dispensing: bool,
    /// Cumulative dispensed volume, mm³.
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MachineTrace {
    pub states: Vec<TraceState>,
}

impl MachineTrace {
    pub fn volume(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.volume)
    }
}

/// Cell area and syringe capacity default to the file's `cell_area_mm2`
/// and `capacity_mm3` header comments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub mp: MachineParams,
    pub cell_area: Option<f64>,
    pub capacity: Option<f64>,
}

impl SimConfig {
    pub fn new(mp: MachineParams) -> Self {
        Self {
            mp,
            cell_area: None,
            capacity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Simulation {
    pub trace: MachineTrace,
    pub diagnostics: Vec<Diagnostic>,
}

impl Simulation {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Executes the program from `(0, 0)` at safe height. While the valve is
/// open the syringe delivers `cell_area × inject_speed` mm³/min, so a
/// dispensing move of length `d` at feed `f` adds `cell_area × inject_speed
/// × d / f`.
pub fn simulate(program: &Program, cfg: &SimConfig) -> Simulation {
    let mp = &cfg.mp;
    let safe = mp.safe_height();
    let top = mp.foam.height;
    let cell_area = cfg
        .cell_area
        .or_else(|| program.header_value("cell_area_mm2"));
    let capacity = cfg
        .capacity
        .or_else(|| program.header_value("capacity_mm3"));
    let allowed: Vec<f64> = [
        Some(mp.travel_feed),
        Some(mp.insert_feed),
        Some(mp.mark_feed),
        mp.inject_speed,
    ]
    .into_iter()
    .flatten()
    .collect();

    let mut sim = Simulation::default();
    let mut diag = |line: usize, kind: DiagnosticKind, message: String| {
        sim.diagnostics.push(Diagnostic {
            line,
            kind,
            message,
        });
    };
    let mut pos = [0.0, 0.0, safe];
    let mut dispensing = false;
    let mut volume = 0.0;
    let (mut mm, mut absolute) = (false, false);
    let mut ended: Option<usize> = None;
    let mut over_capacity = false;
    let mut warned_area = false;
    let mut states = Vec::new();
    let mut last_line = 0;

    for s in &program.statements {
        last_line = s.line;
        if matches!(s.command, Command::Comment(_)) {
            continue;
        }
        if let Some(end_line) = ended {
            diag(
                s.line,
                DiagnosticKind::AfterEnd,
                format!("command after M2 on line {end_line}"),
            );
        }
        match &s.command {
            Command::Millimeters => mm = true,
            Command::Absolute => absolute = true,
            Command::DispenseOn => dispensing = true,
            Command::DispenseOff => dispensing = false,
            Command::End => {
                if dispensing {
                    diag(
                        s.line,
                        DiagnosticKind::DispenseLeftOn,
                        "program ends with the valve open".into(),
                    );
                }
                ended.get_or_insert(s.line);
            }
            Command::Rapid(m) | Command::Linear(m) => {
                let rapid = matches!(s.command, Command::Rapid(_));
                if !(mm && absolute) {
                    diag(
                        s.line,
                        DiagnosticKind::ModeNotSet,
                        "motion before G21 and G90".into(),
                    );
                    (mm, absolute) = (true, true);
                }
                let to = m.target(pos);
                let horizontal = !same(to[0], pos[0]) || !same(to[1], pos[1]);
                let feed = s.feed;
                if let Some(f) = m.feed {
                    if !allowed.iter().any(|&a| same_feed(a, f)) {
                        diag(
                            s.line,
                            DiagnosticKind::UnexpectedFeed,
                            format!("feed {f} mm/min is not one of the machine feeds {allowed:?}"),
                        );
                    }
                }
                if horizontal && pos[2].min(to[2]) < safe - TOL {
                    let tracing = !rapid
                        && !dispensing
                        && same(pos[2], top)
                        && same(to[2], top)
                        && feed.is_some_and(|f| same_feed(f, mp.mark_feed));
                    if !tracing {
                        diag(
                            s.line,
                            DiagnosticKind::LowTravel,
                            format!(
                                "horizontal move at z {:.3}, below safe height {safe:.3}",
                                pos[2].min(to[2])
                            ),
                        );
                    }
                }
                let f = &mp.foam;
                let t = ENVELOPE_TOL;
                let outside = to[0] < -t
                    || to[0] > f.width + t
                    || to[1] < -t
                    || to[1] > f.depth + t
                    || to[2] < -t;
                if outside {
                    diag(
                        s.line,
                        DiagnosticKind::OutsideEnvelope,
                        format!(
                            "target ({:.3}, {:.3}, {:.3}) is outside the foam envelope",
                            to[0], to[1], to[2]
                        ),
                    );
                }
                if dispensing {
                    if rapid {
                        diag(
                            s.line,
                            DiagnosticKind::DispenseRapid,
                            "rapid move with the valve open".into(),
                        );
                    }
                    if to[2] < pos[2] - TOL {
                        diag(
                            s.line,
                            DiagnosticKind::DispenseDescending,
                            "descending with the valve open".into(),
                        );
                    }
                    if horizontal {
                        diag(
                            s.line,
                            DiagnosticKind::DispenseHorizontal,
                            "horizontal move with the valve open".into(),
                        );
                    }
                    let d = to
                        .iter()
                        .zip(pos)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    let move_feed = if rapid {
                        mp.travel_feed
                    } else {
                        feed.unwrap_or(mp.travel_feed)
                    };
                    let rate_ratio = mp.inject_speed.map_or(1.0, |sp| sp / move_feed);
                    match cell_area {
                        Some(a) => volume += a * d * rate_ratio,
                        None if !warned_area && d > 0.0 => {
                            warned_area = true;
                            diag(
                                s.line,
                                DiagnosticKind::UnknownCellArea,
                                "dispensing without a known cell area".into(),
                            );
                        }
                        None => {}
                    }
                    if let Some(c) = capacity {
                        if !over_capacity && volume > c * (1.0 + 1e-9) {
                            over_capacity = true;
                            diag(
                                s.line,
                                DiagnosticKind::CapacityExceeded,
                                format!("dispensed {volume:.3} mm^3 exceeds the syringe capacity {c} mm^3"),
                            );
                        }
                    }
                }
                pos = to;
            }
            Command::Comment(_) => unreachable!(),
        }
        states.push(TraceState {
            line: s.line,
            position: pos,
            feed: s.feed,
            dispensing,
            volume,
        });
    }
    if ended.is_none() {
        if dispensing {
            diag(
                last_line,
                DiagnosticKind::DispenseLeftOn,
                "file ends with the valve open".into(),
            );
        }
        diag(
            last_line,
            DiagnosticKind::MissingEnd,
            "no M2 at the end of the program".into(),
        );
    }
    sim.trace = MachineTrace { states };
    sim
}
