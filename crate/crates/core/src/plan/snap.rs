use crate::geometry::Column;

/// Smallest coordinate step written to G-code, mm.
pub const MACHINE_RESOLUTION: f64 = 1e-3;

pub fn snap(v: f64) -> f64 {
    let s = (v / MACHINE_RESOLUTION).round() * MACHINE_RESOLUTION;
    // keep -0.0 out of emitted text
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

pub fn is_snapped(v: f64) -> bool {
    let k = v / MACHINE_RESOLUTION;
    (k - k.round()).abs() <= 1e-6
}

/// Rounds column centers and segment ends to the machine grid, so the plan
/// is exactly what the emitted G-code describes. Segments that collapse are
/// dropped, touching ones joined, and emptied columns removed.
pub fn snap_columns(columns: &[Column]) -> Vec<Column> {
    columns
        .iter()
        .filter_map(|c| {
            let mut segments: Vec<(f64, f64)> = Vec::with_capacity(c.segments.len());
            for &(lo, hi) in &c.segments {
                let (lo, hi) = (snap(lo), snap(hi));
                if hi <= lo {
                    continue;
                }
                match segments.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => segments.push((lo, hi)),
                }
            }
            (!segments.is_empty()).then(|| Column {
                cell: c.cell,
                center: [snap(c.center[0]), snap(c.center[1])],
                segments,
            })
        })
        .collect()
}
