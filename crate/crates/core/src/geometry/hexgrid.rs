use super::{check_positive, check_ratio, FoamBlock, GeometryError, Point2, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Axial hex coordinates `(q, r)` on a pointy-top lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axial {
    pub q: i32,
    pub r: i32,
}

impl Axial {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    /// Neighbors in [`AXIAL_DIRECTIONS`] order.
    pub fn neighbors(self) -> impl Iterator<Item = Axial> {
        AXIAL_DIRECTIONS
            .iter()
            .map(move |d| Axial::new(self.q + d.q, self.r + d.r))
    }

    /// Squared distance to the origin cell in units of pitch squared. Exact.
    pub fn norm2(self) -> i64 {
        let (q, r) = (i64::from(self.q), i64::from(self.r));
        q * q + q * r + r * r
    }

    pub fn is_adjacent(self, other: Axial) -> bool {
        let (dq, dr) = (other.q - self.q, other.r - self.r);
        AXIAL_DIRECTIONS.iter().any(|d| d.q == dq && d.r == dr)
    }
}

/// Fixed neighbor enumeration order: E, SE, SW, W, NW, NE (y up).
pub const AXIAL_DIRECTIONS: [Axial; 6] = [
    Axial::new(1, 0),
    Axial::new(1, -1),
    Axial::new(0, -1),
    Axial::new(-1, 0),
    Axial::new(-1, 1),
    Axial::new(0, 1),
];

/// Pointy-top hexagonal lattice over the foam footprint.
///
/// Cell `(0, 0)` is centered on the footprint center. Each injection cell has
/// area `cell_area`; lattice spacing is widened by `1 / sqrt(infill_ratio)` so
/// that injected cells cover that fraction of the footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct HexGrid {
    cell_area: f64,
    infill_ratio: f64,
    pitch: f64,
    origin: Point2,
    foam: FoamBlock,
}

impl HexGrid {
    pub fn new(foam: FoamBlock, cell_area: f64, infill_ratio: f64) -> Result<Self> {
        check_ratio("infill_ratio", infill_ratio)?;
        check_positive("cell_area", cell_area)?;
        if cell_area > foam.footprint_area() {
            return Err(GeometryError::CellArea {
                cell_area,
                footprint: foam.footprint_area(),
            });
        }
        let pitch = full_density_pitch(cell_area) / infill_ratio.sqrt();
        Ok(Self {
            cell_area,
            infill_ratio,
            pitch,
            origin: foam.footprint_center(),
            foam,
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    pub fn infill_ratio(&self) -> f64 {
        self.infill_ratio
    }

    /// Center-to-center spacing of neighboring cells.
    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Side length of one injection hexagon (independent of infill).
    pub fn hex_side(&self) -> f64 {
        (2.0 * self.cell_area / (3.0 * SQRT_3)).sqrt()
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn foam(&self) -> &FoamBlock {
        &self.foam
    }

    /// Fraction of the plane covered by injection hexagons.
    pub fn density(&self) -> f64 {
        self.cell_area / (SQRT_3 / 2.0 * self.pitch * self.pitch)
    }

    pub fn center(&self, cell: Axial) -> Point2 {
        let (q, r) = (f64::from(cell.q), f64::from(cell.r));
        [
            self.origin[0] + self.pitch * (q + r / 2.0),
            self.origin[1] + self.pitch * (SQRT_3 / 2.0) * r,
        ]
    }

    /// Cell whose center is nearest to `p`.
    pub fn cell_at(&self, p: Point2) -> Axial {
        let x = (p[0] - self.origin[0]) / self.pitch;
        let y = (p[1] - self.origin[1]) / self.pitch;
        let r = y * 2.0 / SQRT_3;
        let q = x - r / 2.0;
        cube_round(q, r)
    }

    /// True when the cell center lies on the foam footprint.
    pub fn contains(&self, cell: Axial) -> bool {
        let [x, y] = self.center(cell);
        (0.0..=self.foam.width).contains(&x) && (0.0..=self.foam.depth).contains(&y)
    }

    /// All cells centered on the footprint, in ascending `(q, r)` order.
    pub fn cells(&self) -> Vec<Axial> {
        self.cells_in([0.0, 0.0], [self.foam.width, self.foam.depth])
    }

    /// Cells whose centers fall inside an axis-aligned rectangle.
    pub fn cells_in(&self, min: Point2, max: Point2) -> Vec<Axial> {
        let row = self.pitch * SQRT_3 / 2.0;
        let r0 = ((min[1] - self.origin[1]) / row).floor() as i32;
        let r1 = ((max[1] - self.origin[1]) / row).ceil() as i32;
        let mut out = Vec::new();
        for r in r0..=r1 {
            let shift = f64::from(r) / 2.0;
            let q0 = ((min[0] - self.origin[0]) / self.pitch - shift).floor() as i32;
            let q1 = ((max[0] - self.origin[0]) / self.pitch - shift).ceil() as i32;
            for q in q0..=q1 {
                let cell = Axial::new(q, r);
                let [x, y] = self.center(cell);
                if x >= min[0] && x <= max[0] && y >= min[1] && y <= max[1] && self.contains(cell) {
                    out.push(cell);
                }
            }
        }
        out.sort();
        out
    }

    /// Corners of the injection hexagon of `cell`, counter-clockwise from
    /// the lower right.
    pub fn hexagon(&self, cell: Axial) -> [Point2; 6] {
        let c = self.center(cell);
        let a = self.hex_side();
        std::array::from_fn(|i| {
            let angle = (60.0 * i as f64 - 30.0).to_radians();
            [c[0] + a * angle.cos(), c[1] + a * angle.sin()]
        })
    }
}

/// Tiling pitch of regular hexagons of the given area.
pub fn full_density_pitch(cell_area: f64) -> f64 {
    // area = (sqrt(3) / 2) * pitch^2 for a hexagonal tiling
    (2.0 * cell_area / SQRT_3).sqrt()
}

fn cube_round(q: f64, r: f64) -> Axial {
    let s = -q - r;
    let (mut rq, mut rr, rs) = (q.round(), r.round(), s.round());
    let (dq, dr, ds) = ((rq - q).abs(), (rr - r).abs(), (rs - s).abs());
    if dq > dr && dq > ds {
        rq = -rr - rs;
    } else if dr > ds {
        rr = -rq - rs;
    }
    Axial::new(rq as i32, rr as i32)
}
