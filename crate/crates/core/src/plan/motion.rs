use super::{MachineParams, PlanError};
use crate::geometry::{Axial, Column, Point3};

/// Slack for column heights that sit on the foam faces.
const Z_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Horizontal travel at safe height to above the column.
    Approach,
    /// Needle descent to the deepest segment bottom.
    Insert,
    /// Upward stroke inside a segment with the valve open.
    Dispense,
    /// Upward stroke across a void with the valve closed.
    Gap,
    /// Withdrawal to safe height.
    Retract,
}

impl Phase {
    pub fn is_rapid(self) -> bool {
        matches!(self, Phase::Approach | Phase::Retract)
    }

    pub fn dispenses(self) -> bool {
        self == Phase::Dispense
    }
}

/// One straight move to an absolute target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub phase: Phase,
    pub to: Point3,
    pub feed: f64,
}

/// The complete needle sequence for one column: approach, insert, ascend
/// through the segments, retract.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSet {
    pub cell: Axial,
    pub moves: Vec<Move>,
}

impl MotionSet {
    pub fn insertion_depth(&self) -> f64 {
        self.moves
            .iter()
            .find(|m| m.phase == Phase::Insert)
            .map_or(f64::NAN, |m| m.to[2])
    }

    /// Height climbed with the valve open.
    pub fn dispensed_length(&self) -> f64 {
        let mut z = f64::NAN;
        let mut total = 0.0;
        for m in &self.moves {
            if m.phase.dispenses() {
                total += m.to[2] - z;
            }
            z = m.to[2];
        }
        total
    }
}

/// One motion set per column, in the given order.
pub fn build_motion_sets(
    ordered: &[Column],
    mp: &MachineParams,
) -> Result<Vec<MotionSet>, PlanError> {
    mp.validate()?;
    let speed = mp.inject_speed()?;
    let safe = mp.safe_height();
    let height = mp.foam.height;
    ordered
        .iter()
        .map(|col| {
            let (lo, hi) = (col.bottom(), col.top());
            let ascending = col.segments.iter().all(|s| s.0 < s.1)
                && col.segments.windows(2).all(|w| w[0].1 <= w[1].0);
            if col.segments.is_empty()
                || !ascending
                || lo < -Z_TOLERANCE
                || hi > height + Z_TOLERANCE
            {
                return Err(PlanError::OutsideFoam {
                    cell: col.cell,
                    z_low: lo,
                    z_high: hi,
                    height,
                });
            }
            let [x, y] = col.center;
            let at = |z: f64| [x, y, z];
            let mut moves = vec![
                Move {
                    phase: Phase::Approach,
                    to: at(safe),
                    feed: mp.travel_feed,
                },
                Move {
                    phase: Phase::Insert,
                    to: at(lo),
                    feed: mp.insert_feed,
                },
            ];
            for (k, &(_, top)) in col.segments.iter().enumerate() {
                moves.push(Move {
                    phase: Phase::Dispense,
                    to: at(top),
                    feed: speed,
                });
                if let Some(&(next_low, _)) = col.segments.get(k + 1) {
                    if next_low > top {
                        moves.push(Move {
                            phase: Phase::Gap,
                            to: at(next_low),
                            feed: speed,
                        });
                    }
                }
            }
            moves.push(Move {
                phase: Phase::Retract,
                to: at(safe),
                feed: mp.travel_feed,
            });
            Ok(MotionSet {
                cell: col.cell,
                moves,
            })
        })
        .collect()
}
