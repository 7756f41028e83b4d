use std::collections::BTreeMap;

use super::{check_positive, BodySpec, Point2, RayCaster, Result};

pub const DEFAULT_RESOLUTION: f64 = 0.25;
/// Vertical lines cast per occupancy cell, per axis.
const SUPERSAMPLE: usize = 4;

/// Closed outline on the foam top face. Outer boundaries run
/// counter-clockwise, holes clockwise. The last point repeats the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<Point2>,
}

impl Contour {
    pub fn is_closed(&self) -> bool {
        self.points.len() >= 4 && self.points.first() == self.points.last()
    }

    pub fn perimeter(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }

    /// Shoelace area, positive for counter-clockwise outlines.
    pub fn signed_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum::<f64>()
            / 2.0
    }

    pub fn is_hole(&self) -> bool {
        self.signed_area() < 0.0
    }

    /// Even-odd membership test against this outline alone.
    pub fn encloses(&self, p: Point2) -> bool {
        let mut inside = false;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len2 = dx * dx + dy * dy;
                let t = if len2 > 0.0 {
                    (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outlines of the body's vertical projection onto the top face.
///
/// The projection is rasterized into a coverage grid at `resolution` (each
/// value is the fraction of supersampled vertical lines that hit the body),
/// then contoured at the 0.5 level by marching squares.
pub fn project_silhouette(body: &BodySpec, resolution: f64) -> Result<Vec<Contour>> {
    check_positive("resolution", resolution)?;
    let Some((lo, hi)) = body.mesh.bounds() else {
        return Ok(Vec::new());
    };
    let caster = RayCaster::new(&body.mesh);
    let nx = ((hi[0] - lo[0]) / resolution).ceil() as usize + 2;
    let ny = ((hi[1] - lo[1]) / resolution).ceil() as usize + 2;
    // sample (i, j) covers the cell whose lower-left corner is
    // lo + (i - 1, j - 1) * resolution
    let origin = [lo[0] - resolution, lo[1] - resolution];
    let mut coverage = vec![0.0; nx * ny];
    let sub = resolution / SUPERSAMPLE as f64;
    let hits_total = (SUPERSAMPLE * SUPERSAMPLE) as f64;
    for j in 0..ny {
        for i in 0..nx {
            let x0 = origin[0] + i as f64 * resolution;
            let y0 = origin[1] + j as f64 * resolution;
            let mut hits = 0;
            for sj in 0..SUPERSAMPLE {
                for si in 0..SUPERSAMPLE {
                    let x = x0 + (si as f64 + 0.5) * sub;
                    let y = y0 + (sj as f64 + 0.5) * sub;
                    if caster.crossings(x, y).is_some_and(|(zs, _)| !zs.is_empty()) {
                        hits += 1;
                    }
                }
            }
            coverage[j * nx + i] = f64::from(hits) / hits_total;
        }
    }
    let field = Field {
        values: coverage,
        nx,
        ny,
        origin: [origin[0] + resolution / 2.0, origin[1] + resolution / 2.0],
        step: resolution,
    };
    Ok(field.contours(0.5))
}

/// Scalar samples on a regular grid.
struct Field {
    values: Vec<f64>,
    nx: usize,
    ny: usize,
    /// Position of sample (0, 0).
    origin: Point2,
    step: f64,
}

/// Grid edge between two adjacent samples, indexed `(row j, column i)`.
/// Horizontal edges run from sample `(i, j)` to `(i + 1, j)`, vertical ones
/// to `(i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

impl Field {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn position(&self, i: usize, j: usize) -> Point2 {
        [
            self.origin[0] + i as f64 * self.step,
            self.origin[1] + j as f64 * self.step,
        ]
    }

    fn crossing(&self, edge: Edge, level: f64) -> Point2 {
        let ((i0, j0), (i1, j1)) = match edge {
            Edge::H(j, i) => ((i, j), (i + 1, j)),
            Edge::V(j, i) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (self.at(i0, j0), self.at(i1, j1));
        let t = (level - a) / (b - a);
        let (pa, pb) = (self.position(i0, j0), self.position(i1, j1));
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    }

    /// Closed iso-lines with the region above `level` on their left.
    fn contours(&self, level: f64) -> Vec<Contour> {
        let mut next: BTreeMap<Edge, Edge> = BTreeMap::new();
        for j in 0..self.ny.saturating_sub(1) {
            for i in 0..self.nx.saturating_sub(1) {
                // counter-clockwise walk around the cell: corner k to k + 1
                // crosses walk edge k
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let edges = [
                    Edge::H(j, i),
                    Edge::V(j, i + 1),
                    Edge::H(j + 1, i),
                    Edge::V(j, i),
                ];
                let inside = corners.map(|(ci, cj)| self.at(ci, cj) > level);
                let mut exits = Vec::new();
                let mut entries = Vec::new();
                for k in 0..4 {
                    match (inside[k], inside[(k + 1) % 4]) {
                        (true, false) => exits.push(k),
                        (false, true) => entries.push(k),
                        _ => {}
                    }
                }
                match exits.len() {
                    0 => {}
                    1 => {
                        next.insert(edges[exits[0]], edges[entries[0]]);
                    }
                    _ => {
                        // saddle: decide by the cell average
                        let mean =
                            corners.iter().map(|&(ci, cj)| self.at(ci, cj)).sum::<f64>() / 4.0;
                        let joined = mean > level;
                        for &e in &exits {
                            let partner = if joined { (e + 1) % 4 } else { (e + 3) % 4 };
                            debug_assert!(entries.contains(&partner));
                            next.insert(edges[e], edges[partner]);
                        }
                    }
                }
            }
        }

        let mut contours = Vec::new();
        while let Some((&start, _)) = next.iter().next() {
            let mut points = Vec::new();
            let mut edge = start;
            while let Some(to) = next.remove(&edge) {
                points.push(self.crossing(edge, level));
                edge = to;
            }
            if let Some(c) = clean_loop(points) {
                contours.push(c);
            }
        }
        contours
    }
}

/// Drops repeated and collinear vertices and closes the loop.
fn clean_loop(points: Vec<Point2>) -> Option<Contour> {
    let n = points.len();
    let mut kept: Vec<Point2> = Vec::with_capacity(n);
    for p in points {
        if kept
            .last()
            .is_some_and(|q| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12)
        {
            continue;
        }
        kept.push(p);
    }
    while kept.len() > 1 && {
        let (f, l) = (kept[0], kept[kept.len() - 1]);
        (f[0] - l[0]).hypot(f[1] - l[1]) < 1e-12
    } {
        kept.pop();
    }
    let mut changed = true;
    while changed && kept.len() >= 3 {
        changed = false;
        let m = kept.len();
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let (a, b, c) = (kept[(k + m - 1) % m], kept[k], kept[(k + 1) % m]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            let scale = (b[0] - a[0]).hypot(b[1] - a[1]) * (c[0] - b[0]).hypot(c[1] - b[1]);
            if cross.abs() <= 1e-12 * scale
                && (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) > 0.0
            {
                changed = true;
            } else {
                out.push(b);
            }
        }
        kept = out;
    }
    if kept.len() < 3 {
        return None;
    }
    kept.push(kept[0]);
    Some(Contour { points: kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, FoamBlock, TriangleMesh};

    fn body(mesh: TriangleMesh) -> BodySpec {
        let foam = FoamBlock::new(80.0, 80.0, 60.0).unwrap();
        BodySpec::new(mesh, 1.0, 0.5, &foam).unwrap()
    }

    #[test]
    fn box_outline_is_one_rectangle() {
        let b = body(primitives::cuboid([10.0, 20.0, 0.0], [40.0, 50.0, 50.0]));
        let cs = project_silhouette(&b, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(cs.len(), 1);
        let c = &cs[0];
        assert!(c.is_closed());
        assert!(!c.is_hole());
        assert!((c.perimeter() - 120.0).abs() <= 2.0 * DEFAULT_RESOLUTION * 4.0);
        // four straight sides plus a chamfer at each corner
        assert_eq!(c.points.len() - 1, 8);
    }

    #[test]
    fn cylinder_outline_perimeter() {
        let b = body(primitives::cylinder([40.0, 40.0], 10.0, 0.0, 30.0, 512));
        let cs = project_silhouette(&b, DEFAULT_RESOLUTION).unwrap();
        assert_eq!(cs.len(), 1);
        let expected = 2.0 * std::f64::consts::PI * 10.0;
        let p = cs[0].perimeter();
        assert!((p - expected).abs() / expected < 0.03, "{p}");
    }

    #[test]
    fn ring_has_outer_and_hole() {
        // two boxes arranged as a frame leave a hole in the projection
        let parts = [
            primitives::cuboid([10.0, 10.0, 0.0], [40.0, 15.0, 10.0]),
            primitives::cuboid([10.0, 35.0, 0.0], [40.0, 40.0, 10.0]),
            primitives::cuboid([10.0, 15.0, 0.0], [15.0, 35.0, 10.0]),
            primitives::cuboid([35.0, 15.0, 0.0], [40.0, 35.0, 10.0]),
        ];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in &parts {
            let off = vertices.len() as u32;
            vertices.extend_from_slice(m.vertices());
            triangles.extend(m.triangles().iter().map(|t| t.map(|i| i + off)));
        }
        let mesh = TriangleMesh::new(vertices, triangles).unwrap();
        let cs = project_silhouette(&body(mesh), 0.5).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.iter().filter(|c| c.is_hole()).count(), 1);
        let area: f64 = cs.iter().map(Contour::signed_area).sum();
        assert!((area - (900.0 - 400.0)).abs() < 2.0, "{area}");
    }

    #[test]
    fn empty_body_has_no_outline() {
        let b = body(TriangleMesh::new(vec![], vec![]).unwrap());
        assert!(project_silhouette(&b, 0.25).unwrap().is_empty());
    }

    #[test]
    fn saddle_cells_stay_closed() {
        let field = Field {
            values: vec![
                0.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
            nx: 4,
            ny: 4,
            origin: [0.0, 0.0],
            step: 1.0,
        };
        let cs = field.contours(0.5);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.is_closed() && !c.is_hole()));
    }
}
