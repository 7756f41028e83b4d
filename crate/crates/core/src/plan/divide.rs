use super::PlanError;
use crate::geometry::Column;

/// Relative slack when comparing a file volume against the capacity.
const CAPACITY_SLACK: f64 = 1e-12;

/// A contiguous slice of the global injection order that fits one syringe.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintFile {
    /// Position of the first column in the global order.
    pub start: usize,
    pub columns: Vec<Column>,
    pub cell_area: f64,
    /// mm³
    pub volume: f64,
}

/// Greedy split of the order into files of at most `capacity` mm³. Columns
/// are never split; a file is closed as soon as the next column would
/// overflow it.
pub fn divide_jobs(
    ordered: &[Column],
    cell_area: f64,
    capacity: f64,
) -> Result<Vec<PrintFile>, PlanError> {
    for (name, value) in [("capacity", capacity), ("cell_area", cell_area)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(PlanError::NonPositive { name, value });
        }
    }
    let limit = capacity * (1.0 + CAPACITY_SLACK);
    let mut files: Vec<PrintFile> = Vec::new();
    let mut current: Option<PrintFile> = None;
    for (index, col) in ordered.iter().enumerate() {
        let v = col.volume(cell_area);
        if v > limit {
            return Err(PlanError::ColumnExceedsCapacity {
                index,
                cell: col.cell,
                volume: v,
                capacity,
            });
        }
        if let Some(file) = current.as_mut() {
            if file.volume + v <= limit {
                file.volume += v;
                file.columns.push(col.clone());
                continue;
            }
            files.extend(current.take());
        }
        current = Some(PrintFile {
            start: index,
            columns: vec![col.clone()],
            cell_area,
            volume: v,
        });
    }
    files.extend(current);
    Ok(files)
}
