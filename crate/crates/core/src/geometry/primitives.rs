//! Watertight test and demo solids with outward-facing winding.

use std::collections::HashMap;

use super::{Point3, TriangleMesh};

/// Axis-aligned box between two opposite corners.
pub fn cuboid(min: Point3, max: Point3) -> TriangleMesh {
    let [x0, y0, z0] = min;
    let [x1, y1, z1] = max;
    let vertices = vec![
        [x0, y0, z0],
        [x1, y0, z0],
        [x1, y1, z0],
        [x0, y1, z0],
        [x0, y0, z1],
        [x1, y0, z1],
        [x1, y1, z1],
        [x0, y1, z1],
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::new(vertices, triangles).expect("cuboid corners must differ on every axis")
}

/// Geodesic sphere from a subdivided icosahedron: `20 * 4^subdivisions`
/// triangles with every vertex on the sphere.
pub fn icosphere(center: Point3, radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut unit: Vec<Point3> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| normalize(p))
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, unit: &mut Vec<Point3>| -> u32 {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (unit[a as usize], unit[b as usize]);
                unit.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                unit.len() as u32 - 1
            })
        };
        faces = faces
            .iter()
            .flat_map(|&[a, b, c]| {
                let ab = midpoint(a, b, &mut unit);
                let bc = midpoint(b, c, &mut unit);
                let ca = midpoint(c, a, &mut unit);
                [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
            })
            .collect();
    }

    let vertices = unit
        .iter()
        .map(|p| {
            [
                center[0] + radius * p[0],
                center[1] + radius * p[1],
                center[2] + radius * p[2],
            ]
        })
        .collect();
    TriangleMesh::new(vertices, faces).expect("icosphere is closed")
}

/// Vertical prism approximating a cylinder with `segments` sides.
pub fn cylinder(center: [f64; 2], radius: f64, z0: f64, z1: f64, segments: u32) -> TriangleMesh {
    let n = segments.max(3);
    let mut vertices = Vec::with_capacity(2 * n as usize + 2);
    for z in [z0, z1] {
        for i in 0..n {
            let a = std::f64::consts::TAU * f64::from(i) / f64::from(n);
            vertices.push([
                center[0] + radius * a.cos(),
                center[1] + radius * a.sin(),
                z,
            ]);
        }
    }
    let bottom = 2 * n;
    let top = 2 * n + 1;
    vertices.push([center[0], center[1], z0]);
    vertices.push([center[0], center[1], z1]);
    let mut triangles = Vec::with_capacity(4 * n as usize);
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([bottom, j, i]);
        triangles.push([top, n + i, n + j]);
        triangles.push([i, j, n + j]);
        triangles.push([i, n + j, n + i]);
    }
    TriangleMesh::new(vertices, triangles).expect("cylinder is closed")
}

fn normalize(p: Point3) -> Point3 {
    let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / len, p[1] / len, p[2] / len]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for (k, verts) in [(0, 12), (1, 42), (2, 162), (3, 642)] {
            let m = icosphere([0.0; 3], 1.0, k);
            assert_eq!(m.vertices().len(), verts);
            assert_eq!(m.triangles().len(), 20 * 4usize.pow(k));
        }
    }

    #[test]
    fn volumes_approach_analytic() {
        let sphere = icosphere([0.0; 3], 10.0, 5);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 1000.0;
        assert!((sphere.volume() - exact).abs() / exact < 0.005);

        let cyl = cylinder([0.0, 0.0], 10.0, 0.0, 10.0, 256);
        let exact = std::f64::consts::PI * 100.0 * 10.0;
        assert!((cyl.volume() - exact).abs() / exact < 0.001);
    }

    #[test]
    fn winding_is_outward() {
        // positive signed volume means consistently outward normals
        for mesh in [
            cuboid([0.0; 3], [1.0, 2.0, 3.0]),
            icosphere([0.0; 3], 1.0, 1),
            cylinder([0.0, 0.0], 1.0, 0.0, 1.0, 16),
        ] {
            let signed: f64 = (0..mesh.triangles().len())
                .map(|t| {
                    let [a, b, c] = mesh.triangle(t);
                    super::super::mesh::dot(a, super::super::mesh::cross(b, c))
                })
                .sum();
            assert!(signed > 0.0);
        }
    }
}
