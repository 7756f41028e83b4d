use std::collections::HashMap;
use std::fmt;

use super::{GeometryError, Point3, Result};

/// Vertices closer than this are merged when building from a triangle soup.
pub const MERGE_TOLERANCE: f64 = 1e-6;
/// Triangles with area at or below this are rejected as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Indexed, watertight triangle mesh in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
}

/// An undirected edge that is not shared by exactly two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [u32; 2],
    pub from: Point3,
    pub to: Point3,
    pub triangle_count: usize,
}

impl fmt::Display for BoundaryEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edge {}-{} ({:.4}, {:.4}, {:.4})-({:.4}, {:.4}, {:.4}) used by {} triangle(s)",
            self.vertices[0],
            self.vertices[1],
            self.from[0],
            self.from[1],
            self.from[2],
            self.to[0],
            self.to[1],
            self.to[2],
            self.triangle_count
        )
    }
}

impl TriangleMesh {
    /// Builds a mesh from indexed data, checking indices, triangle areas and
    /// watertightness.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Builds a mesh from unindexed triangles, merging coincident vertices
    /// within [`MERGE_TOLERANCE`].
    pub fn from_triangle_soup(soup: &[[Point3; 3]]) -> Result<Self> {
        let mut welder = VertexWelder::default();
        let triangles = soup
            .iter()
            .map(|tri| tri.map(|p| welder.insert(p)))
            .collect();
        Self::new(welder.vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, index: usize) -> [Point3; 3] {
        self.triangles[index].map(|i| self.vertices[i as usize])
    }

    /// Axis-aligned bounds, or `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let mut it = self
            .triangles
            .iter()
            .flatten()
            .map(|&i| self.vertices[i as usize]);
        let first = it.next()?;
        Some(it.fold((first, first), |(mut lo, mut hi), p| {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
            (lo, hi)
        }))
    }

    /// Enclosed volume from the divergence theorem. Orientation independent.
    pub fn volume(&self) -> f64 {
        let signed: f64 = (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                dot(a, cross(b, c)) / 6.0
            })
            .sum();
        signed.abs()
    }

    /// Returns a copy moved by `offset`.
    pub fn translated(&self, offset: Point3) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]])
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let count = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(GeometryError::BadIndex {
                    triangle: t,
                    index,
                    count,
                });
            }
        }
        for t in 0..self.triangles.len() {
            let area = triangle_area(self.triangle(t));
            // NaN areas fail too
            if area.partial_cmp(&MIN_TRIANGLE_AREA) != Some(std::cmp::Ordering::Greater) {
                return Err(GeometryError::Degenerate { triangle: t, area });
            }
        }
        let edges = self.boundary_edges();
        if !edges.is_empty() {
            return Err(GeometryError::NotWatertight { edges });
        }
        Ok(())
    }

    /// Undirected edges not shared by exactly two triangles, sorted by vertex
    /// index.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mut uses: HashMap<[u32; 2], usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *uses.entry([a.min(b), a.max(b)]).or_default() += 1;
            }
        }
        let mut open: Vec<BoundaryEdge> = uses
            .into_iter()
            .filter(|&(_, n)| n != 2)
            .map(|(e, n)| BoundaryEdge {
                vertices: e,
                from: self.vertices[e[0] as usize],
                to: self.vertices[e[1] as usize],
                triangle_count: n,
            })
            .collect();
        open.sort_by_key(|e| e.vertices);
        open
    }
}

pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn triangle_area([a, b, c]: [Point3; 3]) -> f64 {
    let n = cross(sub(b, a), sub(c, a));
    0.5 * dot(n, n).sqrt()
}

/// Spatial hash that maps nearby points onto one vertex index, keeping
/// first-seen order.
#[derive(Default)]
struct VertexWelder {
    vertices: Vec<Point3>,
    buckets: HashMap<[i64; 3], Vec<u32>>,
}

impl VertexWelder {
    fn insert(&mut self, p: Point3) -> u32 {
        let key = p.map(|c| (c / MERGE_TOLERANCE).floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let probe = [key[0] + dx, key[1] + dy, key[2] + dz];
                    if let Some(ids) = self.buckets.get(&probe) {
                        for &id in ids {
                            let d = sub(self.vertices[id as usize], p);
                            if dot(d, d) <= MERGE_TOLERANCE * MERGE_TOLERANCE {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.vertices.len() as u32;
        self.vertices.push(p);
        self.buckets.entry(key).or_default().push(id);
        id
    }
}
