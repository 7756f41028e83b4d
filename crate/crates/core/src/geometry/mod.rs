//! Solid bodies, the foam block they live in, and everything needed to turn
//! them into vertical injection columns and top-face outlines.
//!
//! All lengths are millimeters. Coordinates are in the foam frame: the foam
//! occupies `[0, width] x [0, depth] x [0, height]`.

mod hexgrid;
mod mesh;
pub mod primitives;
mod raster;
mod raycast;
mod silhouette;
pub mod stl;
pub mod table;

pub use hexgrid::{Axial, HexGrid, AXIAL_DIRECTIONS};
pub use mesh::{BoundaryEdge, TriangleMesh};
pub use raster::{merge_bodies, rasterize, Column, DEFAULT_Z_STEP};
pub use raycast::{point_in_solid, RayCaster};
pub use silhouette::{project_silhouette, Contour, DEFAULT_RESOLUTION};
pub use stl::{load_mesh, StlFormat};

use thiserror::Error;

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("STL parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("triangle {triangle} references vertex {index}, but the mesh has {count} vertices")]
    BadIndex {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("triangle {triangle} is degenerate (area {area:e} mm^2)")]
    Degenerate { triangle: usize, area: f64 },
    #[error("mesh is not watertight: {} open edge(s), first {}", .edges.len(), .edges[0])]
    NotWatertight { edges: Vec<BoundaryEdge> },
    #[error("invalid foam block {width} x {depth} x {height} mm: dimensions must be positive")]
    InvalidFoam { width: f64, depth: f64, height: f64 },
    #[error("{name} must be in (0, 1], got {value}")]
    RatioOutOfRange { name: &'static str, value: f64 },
    #[error("body extends outside the foam block: bounds {min:?}..{max:?}")]
    BodyOutsideFoam { min: Point3, max: Point3 },
    #[error("cell area {cell_area} mm^2 must be positive and no larger than the foam footprint ({footprint} mm^2)")]
    CellArea { cell_area: f64, footprint: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("bodies {first} and {second} overlap at cell ({q}, {r})")]
    Overlap {
        first: usize,
        second: usize,
        q: i32,
        r: i32,
    },
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// Rectangular foam block; the frame origin sits at its minimum corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoamBlock {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl FoamBlock {
    pub fn new(width: f64, depth: f64, height: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(width) && ok(depth) && ok(height) {
            Ok(Self {
                width,
                depth,
                height,
            })
        } else {
            Err(GeometryError::InvalidFoam {
                width,
                depth,
                height,
            })
        }
    }

    pub fn footprint_area(&self) -> f64 {
        self.width * self.depth
    }

    pub fn footprint_center(&self) -> Point2 {
        [self.width / 2.0, self.depth / 2.0]
    }
}

/// Slack allowed when checking that a body sits inside the foam block.
const CONTAINMENT_TOLERANCE: f64 = 1e-6;

/// A solid body together with its injection attributes.
#[derive(Debug, Clone)]
pub struct BodySpec {
    pub mesh: TriangleMesh,
    pub infill_ratio: f64,
    pub hydration_ratio: f64,
}

impl BodySpec {
    pub fn new(
        mesh: TriangleMesh,
        infill_ratio: f64,
        hydration_ratio: f64,
        foam: &FoamBlock,
    ) -> Result<Self> {
        check_ratio("infill_ratio", infill_ratio)?;
        check_ratio("hydration_ratio", hydration_ratio)?;
        if let Some((min, max)) = mesh.bounds() {
            let t = CONTAINMENT_TOLERANCE;
            let limit = [foam.width, foam.depth, foam.height];
            let inside = (0..3).all(|i| min[i] >= -t && max[i] <= limit[i] + t);
            if !inside {
                return Err(GeometryError::BodyOutsideFoam { min, max });
            }
        }
        Ok(Self {
            mesh,
            infill_ratio,
            hydration_ratio,
        })
    }
}

pub(crate) fn check_ratio(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(GeometryError::RatioOutOfRange { name, value })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::NonPositive { name, value })
    }
}
