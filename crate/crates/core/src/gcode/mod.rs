//! The machine's G-code dialect: emission of injection and marking files, a
//! strict parser, and a simulated executor that checks the operating rules.
//!
//! Words: `G0` rapid, `G1` linear, `G21` millimeters, `G90` absolute,
//! `M3`/`M5` dispense valve on/off (read by the controller as the spindle
//! signal), `M2` end. `;` starts a comment.

mod emit;
mod parse;
mod sim;

pub use emit::{emit_injection, emit_marking, InjectionHeader};
pub use parse::parse;
pub use sim::{
    simulate, Diagnostic, DiagnosticKind, MachineTrace, SimConfig, Simulation, TraceState,
};

use thiserror::Error;

use crate::geometry::{Axial, Point3};
use crate::plan::PlanError;

#[derive(Debug, Error)]
pub enum GcodeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("move to ({:.3}, {:.3}, {:.3}) for {context} leaves the work envelope", .point[0], .point[1], .point[2])]
    OutOfBounds { context: String, point: Point3 },
    #[error("coordinate {value} for cell ({}, {}) is not on the 0.001 mm machine grid", .cell.q, .cell.r)]
    OffGrid { cell: Axial, value: f64 },
    #[error("contour {0} is not closed")]
    OpenContour(usize),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Axis words of a `G0`/`G1` line; absent axes keep their value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Motion {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub feed: Option<f64>,
}

impl Motion {
    pub fn target(&self, from: Point3) -> Point3 {
        [
            self.x.unwrap_or(from[0]),
            self.y.unwrap_or(from[1]),
            self.z.unwrap_or(from[2]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Rapid(Motion),
    Linear(Motion),
    DispenseOn,
    DispenseOff,
    Millimeters,
    Absolute,
    End,
    Comment(String),
}

/// One parsed command with its 1-based source line and, for motions, the
/// feed in effect (explicit or inherited).
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub line: usize,
    pub command: Command,
    pub feed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    /// Absolute target and feed of every motion, starting from `start`.
    pub fn motions(&self, start: Point3) -> Vec<(usize, Point3, Option<f64>)> {
        let mut pos = start;
        let mut out = Vec::new();
        for s in &self.statements {
            if let Command::Rapid(m) | Command::Linear(m) = &s.command {
                pos = m.target(pos);
                out.push((s.line, pos, s.feed));
            }
        }
        out
    }

    /// Value of a `; key: value` header comment.
    pub fn header_value(&self, key: &str) -> Option<f64> {
        self.statements.iter().find_map(|s| match &s.command {
            Command::Comment(text) => text
                .trim()
                .strip_prefix(key)
                .and_then(|rest| rest.trim_start().strip_prefix(':'))
                .and_then(|v| v.trim().parse().ok()),
            _ => None,
        })
    }
}

/// Fixed three-decimal coordinate text.
pub(crate) fn coord(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}
