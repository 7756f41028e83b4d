//! Plain-text dumps of columns and contours for debugging and golden files.
//!
//! Columns: header `q,r,x,y,segment,z_low,z_high`, one line per segment.
//! Contours: header `contour,point,x,y`, one line per vertex (closing vertex
//! included). All lengths have six decimals.

use std::fmt::Write as _;

use super::{Column, Contour};

pub fn columns_to_csv(columns: &[Column]) -> String {
    let mut out = String::from("q,r,x,y,segment,z_low,z_high\n");
    for c in columns {
        for (k, (lo, hi)) in c.segments.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{},{:.6},{:.6}",
                c.cell.q, c.cell.r, c.center[0], c.center[1], k, lo, hi
            );
        }
    }
    out
}

pub fn contours_to_csv(contours: &[Contour]) -> String {
    let mut out = String::from("contour,point,x,y\n");
    for (i, c) in contours.iter().enumerate() {
        for (k, p) in c.points.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:.6},{:.6}", i, k, p[0], p[1]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Axial;

    #[test]
    fn one_line_per_segment() {
        let cols = [Column {
            cell: Axial::new(-1, 2),
            center: [1.5, 2.25],
            segments: vec![(0.0, 10.0), (12.5, 20.0)],
        }];
        assert_eq!(
            columns_to_csv(&cols),
            "q,r,x,y,segment,z_low,z_high\n\
             -1,2,1.500000,2.250000,0,0.000000,10.000000\n\
             -1,2,1.500000,2.250000,1,12.500000,20.000000\n"
        );
        let c = Contour {
            points: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
        };
        assert_eq!(contours_to_csv(&[c]).lines().count(), 5);
    }
}
