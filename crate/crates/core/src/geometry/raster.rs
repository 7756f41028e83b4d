use std::collections::BTreeMap;

use super::{check_positive, Axial, BodySpec, GeometryError, HexGrid, Point2, RayCaster, Result};

pub const DEFAULT_Z_STEP: f64 = 0.5;
/// Segments shorter than this, and gaps narrower than this, are dropped.
const MIN_SEGMENT: f64 = 1e-9;

/// One vertical injection column: the parts of a cell's center axis that
/// lie inside a body.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cell: Axial,
    pub center: Point2,
    /// Ascending, disjoint `(z_low, z_high)` intervals.
    pub segments: Vec<(f64, f64)>,
}

impl Column {
    /// Total height of the segments.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn volume(&self, cell_area: f64) -> f64 {
        cell_area * self.length()
    }

    pub fn bottom(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.0)
    }

    pub fn top(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.1)
    }
}

/// Rasterizes a body into columns along the center axes of the grid cells.
///
/// Inside intervals come from exact vertical ray/mesh intersection. When the
/// axis grazes an edge even after perturbation, or yields an odd number of
/// crossings, the axis is sampled every `z_step` instead. Cells whose axis
/// misses the body are omitted; the result is sorted by cell.
pub fn rasterize(body: &BodySpec, grid: &HexGrid, z_step: f64) -> Result<Vec<Column>> {
    check_positive("z_step", z_step)?;
    let Some((lo, hi)) = body.mesh.bounds() else {
        return Ok(Vec::new());
    };
    let caster = RayCaster::new(&body.mesh);
    let height = grid.foam().height;
    let mut columns = Vec::new();
    for cell in grid.cells_in([lo[0], lo[1]], [hi[0], hi[1]]) {
        let center = grid.center(cell);
        let raw = match caster.crossings(center[0], center[1]) {
            Some((zs, _)) if zs.len() % 2 == 0 => {
                zs.chunks_exact(2).map(|p| (p[0], p[1])).collect()
            }
            _ => sample_axis(&caster, center, lo[2], hi[2], z_step),
        };
        let segments = normalize(raw, 0.0, height);
        if !segments.is_empty() {
            columns.push(Column {
                cell,
                center,
                segments,
            });
        }
    }
    Ok(columns)
}

fn sample_axis(
    caster: &RayCaster<'_>,
    center: Point2,
    z0: f64,
    z1: f64,
    step: f64,
) -> Vec<(f64, f64)> {
    let n = ((z1 - z0) / step).ceil().max(1.0) as usize;
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..n {
        let a = z0 + step * i as f64;
        let b = (a + step).min(z1);
        let inside = caster.contains([center[0], center[1], (a + b) / 2.0]);
        match (inside, start) {
            (true, None) => start = Some(a),
            (false, Some(s)) => {
                out.push((s, a));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, z1));
    }
    out
}

/// Clamps to `[floor, ceiling]`, drops slivers, and joins touching intervals.
fn normalize(mut raw: Vec<(f64, f64)>, floor: f64, ceiling: f64) -> Vec<(f64, f64)> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (lo, hi) in raw {
        let (lo, hi) = (lo.max(floor), hi.min(ceiling));
        if hi - lo <= MIN_SEGMENT {
            continue;
        }
        match out.last_mut() {
            Some(last) if lo - last.1 <= MIN_SEGMENT => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Combines columns of several bodies rasterized on the same grid. Columns
/// that share a cell are joined; intersecting intervals are an overlap.
pub fn merge_bodies(per_body: &[Vec<Column>]) -> Result<Vec<Column>> {
    // per cell: center and (body, z_low, z_high) intervals
    type Intervals = (Point2, Vec<(usize, f64, f64)>);
    let mut cells: BTreeMap<Axial, Intervals> = BTreeMap::new();
    for (body, columns) in per_body.iter().enumerate() {
        for c in columns {
            let entry = cells.entry(c.cell).or_insert((c.center, Vec::new()));
            entry
                .1
                .extend(c.segments.iter().map(|&(lo, hi)| (body, lo, hi)));
        }
    }
    cells
        .into_iter()
        .map(|(cell, (center, mut segs))| {
            segs.sort_by(|a, b| a.1.total_cmp(&b.1));
            for w in segs.windows(2) {
                if w[1].1 < w[0].2 - MIN_SEGMENT && w[0].0 != w[1].0 {
                    return Err(GeometryError::Overlap {
                        first: w[0].0.min(w[1].0),
                        second: w[0].0.max(w[1].0),
                        q: cell.q,
                        r: cell.r,
                    });
                }
            }
            let segments = normalize(
                segs.into_iter().map(|(_, lo, hi)| (lo, hi)).collect(),
                f64::NEG_INFINITY,
                f64::INFINITY,
            );
            Ok(Column {
                cell,
                center,
                segments,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, FoamBlock};
    use approx::assert_relative_eq;

    const UNIT_SIDE_AREA: f64 = 2.598_076_211_353_316;

    fn foam() -> FoamBlock {
        FoamBlock::new(60.0, 60.0, 50.0).unwrap()
    }

    fn body(mesh: crate::geometry::TriangleMesh) -> BodySpec {
        BodySpec::new(mesh, 1.0, 0.5, &foam()).unwrap()
    }

    #[test]
    fn box_volume_within_two_percent() {
        let b = body(primitives::cuboid([15.0, 15.0, 0.0], [45.0, 45.0, 50.0]));
        let grid = HexGrid::new(foam(), UNIT_SIDE_AREA, 1.0).unwrap();
        let cols = rasterize(&b, &grid, DEFAULT_Z_STEP).unwrap();
        let v: f64 = cols.iter().map(|c| c.volume(grid.cell_area())).sum();
        assert!((v - 45000.0).abs() / 45000.0 < 0.02, "{v}");
        for c in &cols {
            assert_eq!(c.segments.len(), 1);
            assert_relative_eq!(c.segments[0].0, 0.0, epsilon = 1e-9);
            assert_relative_eq!(c.segments[0].1, 50.0, epsilon = 1e-9);
        }
        assert!(cols.windows(2).all(|w| w[0].cell < w[1].cell));
    }

    #[test]
    fn hollow_body_gives_two_segments() {
        // a box with an internal cavity: the cavity is a second, inner shell
        let outer = primitives::cuboid([20.0, 20.0, 0.0], [40.0, 40.0, 50.0]);
        let inner = primitives::cuboid([25.0, 25.0, 20.0], [35.0, 35.0, 30.0]);
        let mut vertices = outer.vertices().to_vec();
        let mut triangles = outer.triangles().to_vec();
        let off = vertices.len() as u32;
        vertices.extend_from_slice(inner.vertices());
        triangles.extend(
            inner
                .triangles()
                .iter()
                .map(|t| [t[0] + off, t[2] + off, t[1] + off]),
        );
        let mesh = crate::geometry::TriangleMesh::new(vertices, triangles).unwrap();
        let grid = HexGrid::new(foam(), UNIT_SIDE_AREA, 1.0).unwrap();
        let cols = rasterize(&body(mesh), &grid, DEFAULT_Z_STEP).unwrap();
        let center = cols.iter().find(|c| c.cell == Axial::new(0, 0)).unwrap();
        assert_eq!(center.segments.len(), 2);
        assert_relative_eq!(center.segments[0].1, 20.0, epsilon = 1e-9);
        assert_relative_eq!(center.segments[1].0, 30.0, epsilon = 1e-9);
    }

    #[test]
    fn body_beside_grid_cells_gives_nothing() {
        // a sliver thinner than the pitch, placed between cell rows
        let grid = HexGrid::new(foam(), 20.0, 1.0).unwrap();
        let c = grid.center(Axial::new(0, 0));
        let mesh = primitives::cuboid(
            [c[0] + 0.5, c[1] + 0.5, 0.0],
            [c[0] + 0.6, c[1] + 0.6, 10.0],
        );
        assert!(rasterize(&body(mesh), &grid, DEFAULT_Z_STEP)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn sampling_fallback_matches_exact() {
        let b = body(primitives::icosphere([30.0, 30.0, 25.0], 10.0, 3));
        let caster = RayCaster::new(&b.mesh);
        let (zs, _) = caster.crossings(31.0, 29.0).unwrap();
        let sampled = sample_axis(&caster, [31.0, 29.0], 15.0, 35.0, 0.01);
        assert_eq!(sampled.len(), 1);
        assert!((sampled[0].0 - zs[0]).abs() <= 0.01);
        assert!((sampled[0].1 - zs[1]).abs() <= 0.01);
    }

    #[test]
    fn merge_joins_stacked_and_rejects_overlap() {
        let col = |lo: f64, hi: f64| Column {
            cell: Axial::new(0, 0),
            center: [0.0, 0.0],
            segments: vec![(lo, hi)],
        };
        let merged = merge_bodies(&[vec![col(0.0, 10.0)], vec![col(20.0, 30.0)]]).unwrap();
        assert_eq!(merged[0].segments, vec![(0.0, 10.0), (20.0, 30.0)]);
        let err = merge_bodies(&[vec![col(0.0, 10.0)], vec![col(5.0, 30.0)]]).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::Overlap {
                first: 0,
                second: 1,
                ..
            }
        ));
    }

    #[test]
    fn normalize_clamps_and_joins() {
        let out = normalize(
            vec![(5.0, 8.0), (-1.0, 2.0), (2.0, 3.0), (9.0, 9.0)],
            0.0,
            7.0,
        );
        assert_eq!(out, vec![(0.0, 3.0), (5.0, 7.0)]);
    }
}
