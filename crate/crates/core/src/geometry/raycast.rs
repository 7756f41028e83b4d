use super::{Point3, TriangleMesh};

/// Distance below which a vertical line is considered to graze a projected
/// triangle edge or vertex.
const GRAZE_TOLERANCE: f64 = 1e-9;
/// Size of the deterministic nudge applied to a line that grazes an edge.
pub const PERTURBATION: f64 = 1e-7;
const MAX_PERTURBATIONS: u32 = 16;
const BUCKET_MARGIN: f64 = 1e-6;

/// Vertical-line queries against a mesh, bucketed on a uniform XY grid.
///
/// Every query uses lines parallel to +Z. A line that passes within
/// [`GRAZE_TOLERANCE`] of a projected edge or vertex is retried at nearby
/// offsets of size [`PERTURBATION`] along a fixed sequence of directions.
pub struct RayCaster<'a> {
    mesh: &'a TriangleMesh,
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

enum Hit {
    Miss,
    At(f64),
    Graze,
}

impl<'a> RayCaster<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let Some((lo, hi)) = mesh.bounds() else {
            return Self {
                mesh,
                origin: [0.0; 2],
                cell: [1.0; 2],
                dims: [0, 0],
                buckets: Vec::new(),
            };
        };
        let side = ((mesh.triangles().len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let origin = [lo[0] - BUCKET_MARGIN, lo[1] - BUCKET_MARGIN];
        let extent = [
            hi[0] - lo[0] + 2.0 * BUCKET_MARGIN,
            hi[1] - lo[1] + 2.0 * BUCKET_MARGIN,
        ];
        let dims = [side, side];
        let cell = [extent[0] / side as f64, extent[1] / side as f64];
        let mut caster = Self {
            mesh,
            origin,
            cell,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        for t in 0..mesh.triangles().len() {
            let tri = mesh.triangle(t);
            let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            for p in tri {
                x0 = x0.min(p[0]);
                y0 = y0.min(p[1]);
                x1 = x1.max(p[0]);
                y1 = y1.max(p[1]);
            }
            let (i0, j0) = caster.bucket_of(x0 - BUCKET_MARGIN, y0 - BUCKET_MARGIN);
            let (i1, j1) = caster.bucket_of(x1 + BUCKET_MARGIN, y1 + BUCKET_MARGIN);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    caster.buckets[j * side + i].push(t as u32);
                }
            }
        }
        caster
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.mesh
    }

    fn bucket_of(&self, x: f64, y: f64) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (
            clamp((x - self.origin[0]) / self.cell[0], self.dims[0]),
            clamp((y - self.origin[1]) / self.cell[1], self.dims[1]),
        )
    }

    fn candidates(&self, x: f64, y: f64) -> &[u32] {
        if self.buckets.is_empty() {
            return &[];
        }
        let rx = (x - self.origin[0]) / self.cell[0];
        let ry = (y - self.origin[1]) / self.cell[1];
        if rx < 0.0 || ry < 0.0 || rx >= self.dims[0] as f64 || ry >= self.dims[1] as f64 {
            return &[];
        }
        let (i, j) = self.bucket_of(x, y);
        &self.buckets[j * self.dims[0] + i]
    }

    /// Sorted heights where the vertical line through `(x, y)` crosses the
    /// surface, or `None` if the line grazes an edge or vertex.
    pub fn crossings_exact(&self, x: f64, y: f64) -> Option<Vec<f64>> {
        let mut zs = Vec::new();
        for &t in self.candidates(x, y) {
            match vertical_hit(self.mesh.triangle(t as usize), x, y) {
                Hit::Miss => {}
                Hit::At(z) => zs.push(z),
                Hit::Graze => return None,
            }
        }
        zs.sort_by(f64::total_cmp);
        Some(zs)
    }

    /// Like [`crossings_exact`](Self::crossings_exact), nudging the line on
    /// grazing hits. Returns the crossings and the XY offset that was used,
    /// or `None` if every nudge also grazed.
    pub fn crossings(&self, x: f64, y: f64) -> Option<(Vec<f64>, [f64; 2])> {
        (0..=MAX_PERTURBATIONS).find_map(|k| {
            let d = perturbation(k);
            self.crossings_exact(x + d[0], y + d[1]).map(|zs| (zs, d))
        })
    }

    /// Point-in-solid by parity of upward crossings.
    pub fn contains(&self, p: Point3) -> bool {
        match self.crossings(p[0], p[1]) {
            Some((zs, _)) => zs.iter().filter(|&&z| z > p[2]).count() % 2 == 1,
            None => false,
        }
    }
}

/// Offset for the k-th retry: zero first, then golden-angle spaced
/// directions at growing radius.
fn perturbation(k: u32) -> [f64; 2] {
    if k == 0 {
        return [0.0, 0.0];
    }
    let angle = f64::from(k) * 2.399_963_229_728_653;
    let r = PERTURBATION * (1.0 + f64::from(k - 1) / 4.0);
    [r * angle.cos(), r * angle.sin()]
}

fn vertical_hit(tri: [Point3; 3], x: f64, y: f64) -> Hit {
    let [a, b, c] = tri;
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let edges = [(b, c), (c, a), (a, b)];
    // twice the signed sub-triangle areas opposite each vertex
    let w = edges.map(|(p, q)| (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]));
    let len = edges.map(|(p, q)| (q[0] - p[0]).hypot(q[1] - p[1]));

    let scale = len.iter().fold(0.0f64, |m, &l| m.max(l));
    if area2.abs() <= 1e-12 * scale * scale {
        // vertical facet: only matters if the line touches its projection
        let touches = edges
            .iter()
            .any(|&(p, q)| segment_distance([x, y], p, q) <= GRAZE_TOLERANCE);
        return if touches { Hit::Graze } else { Hit::Miss };
    }

    let sign = area2.signum();
    let dist = [0, 1, 2].map(|i| sign * w[i] / len[i]);
    if dist.iter().any(|&d| d < -GRAZE_TOLERANCE) {
        return Hit::Miss;
    }
    if dist.iter().any(|&d| d <= GRAZE_TOLERANCE) {
        return Hit::Graze;
    }
    let z = (w[0] * a[2] + w[1] * b[2] + w[2] * c[2]) / area2;
    Hit::At(z)
}

fn segment_distance(p: [f64; 2], a: Point3, b: Point3) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// True iff `p` lies inside the closed mesh.
pub fn point_in_solid(mesh: &TriangleMesh, p: Point3) -> bool {
    RayCaster::new(mesh).contains(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{cross, dot, sub};
    use crate::geometry::primitives;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_center_and_outside() {
        let cube = primitives::cuboid([0.0; 3], [10.0; 3]);
        assert!(point_in_solid(&cube, [5.0, 5.0, 5.0]));
        assert!(!point_in_solid(&cube, [15.0, 5.0, 5.0]));
        assert!(!point_in_solid(&cube, [5.0, 5.0, -1.0]));
        assert!(!point_in_solid(&cube, [5.0, 5.0, 11.0]));
    }

    #[test]
    fn diagonal_and_vertex_lines_are_resolved() {
        // (5, 5) lies on the diagonal edge of both cap triangles,
        // (0, 0) on a vertical edge and (10, 5) in a vertical facet
        let cube = primitives::cuboid([0.0; 3], [10.0; 3]);
        let caster = RayCaster::new(&cube);
        assert!(caster.crossings_exact(5.0, 5.0).is_none());
        let (zs, d) = caster.crossings(5.0, 5.0).unwrap();
        assert_eq!(zs.len(), 2);
        assert!(d[0].hypot(d[1]) <= 2.0 * PERTURBATION);
        assert!(caster.contains([5.0, 5.0, 5.0]));
        assert!(caster.contains([0.5, 0.5, 9.0]));
        assert!(caster.crossings_exact(10.0, 5.0).is_none());
    }

    #[test]
    fn sphere_matches_analytic_predicate() {
        let r = 10.0;
        let sphere = primitives::icosphere([0.0; 3], r, 6);
        // deepest point of any facet below the sphere
        let sagitta = (0..sphere.triangles().len())
            .map(|t| {
                let [a, b, c] = sphere.triangle(t);
                let n = cross(sub(b, a), sub(c, a));
                r - dot(n, a).abs() / dot(n, n).sqrt()
            })
            .fold(0.0f64, f64::max);
        assert!(sagitta < 1e-3, "sagitta {sagitta}");

        let caster = RayCaster::new(&sphere);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..1000 {
            let p: Point3 = [0; 3].map(|_| rng.gen_range(-12.0..12.0));
            let d = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (d - r).abs() <= 1e-3 {
                continue;
            }
            checked += 1;
            assert_eq!(caster.contains(p), d < r, "point {p:?} at |p| = {d}");
        }
        assert!(checked > 990);
    }

    #[test]
    fn crossing_counts_are_even() {
        let sphere = primitives::icosphere([20.0, 20.0, 20.0], 8.0, 3);
        let caster = RayCaster::new(&sphere);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let (x, y) = (rng.gen_range(10.0..30.0), rng.gen_range(10.0..30.0));
            let (zs, _) = caster.crossings(x, y).unwrap();
            assert_eq!(zs.len() % 2, 0);
        }
    }
}
