//! Procedural test meshes: flat grids, icospheres and a cube.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TriangleMesh;
use crate::vec3::{self, Vec3};

/// Flat `nx × ny` vertex grid in the z = 0 plane with the given spacing.
///
/// Vertex `(i, j)` has index `j * nx + i`. Every cell is split along the same
/// diagonal, so interior vertices have six neighbors.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> TriangleMesh {
    assert!(nx >= 2 && ny >= 2, "grid needs at least 2x2 vertices");
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push([i as f64 * spacing, j as f64 * spacing, 0.0]);
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = a + nx + 1;
            let d = a + nx;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(positions, faces).expect("grid is a valid mesh")
}

/// Unit icosphere: an icosahedron subdivided `subdivisions` times
/// (12, 42, 162, 642, 2562, ... vertices), faces oriented outward.
pub fn icosphere(subdivisions: usize) -> TriangleMesh {
    let (positions, faces) = icosphere_raw(subdivisions);
    TriangleMesh::new(positions, faces).expect("icosphere is a valid mesh")
}

/// Icosphere with every vertex pushed radially by a uniform factor in `[1 - amp, 1 + amp]`.
pub fn noisy_icosphere(subdivisions: usize, amp: f64, seed: u64) -> TriangleMesh {
    let (mut positions, faces) = icosphere_raw(subdivisions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in &mut positions {
        let s = 1.0 + rng.gen_range(-amp..=amp);
        *p = vec3::scale(*p, s);
    }
    TriangleMesh::new(positions, faces).expect("noisy icosphere is a valid mesh")
}

fn icosphere_raw(subdivisions: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut positions: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| vec3::normalize(p))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
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
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, positions: &mut Vec<Vec3>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            *cache.entry(key).or_insert_with(|| {
                let m = vec3::normalize(vec3::add(positions[a], positions[b]));
                positions.push(m);
                positions.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut positions);
            let bc = midpoint(b, c, &mut positions);
            let ca = midpoint(c, a, &mut positions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (positions, faces)
}

/// Axis-aligned unit cube `[0, 1]^3`, two outward triangles per side.
pub fn cube() -> TriangleMesh {
    let positions = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let faces = vec![
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
    TriangleMesh::new(positions, faces).expect("cube is a valid mesh")
}
