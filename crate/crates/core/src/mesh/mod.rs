//! Indexed triangle meshes with oriented one-rings.
//!
//! A [`TriangleMesh`] keeps faces in the order they were given and, alongside them, a
//! consistently oriented copy used for everything that needs orientation: one-ring
//! listings, vertex normals and tangent charts. Orientation is propagated from the
//! first face of each connected component by a breadth-first walk over shared edges.
//!
//! Each vertex carries a [`OneRing`]: its neighbors listed counter-clockwise (w.r.t.
//! the oriented faces) together with the corner angles between consecutive edges,
//! normalized so that an interior vertex has total angle 2π. The cumulative normalized
//! angle of a neighbor is its polar angle in the vertex's tangent chart; the first
//! neighbor defines the chart's reference direction.

pub mod io;
pub mod primitives;
pub mod simplify;

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::angle;
use crate::vec3::{self, Vec3};

pub use simplify::{simplify, SimplificationMap};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("face {face} references vertex {vertex} but the mesh has {n_vertices} vertices")]
    IndexOutOfRange { face: usize, vertex: usize, n_vertices: usize },
    #[error("face {0} repeats a vertex")]
    RepeatedIndex(usize),
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("face {0} has (near) zero area")]
    DegenerateFace(usize),
    #[error("vertex {0} has a non-manifold star")]
    NonManifoldStar(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("cannot simplify to {target} vertices (stalled at {reached})")]
    TargetTooSmall { target: usize, reached: usize },
}

pub type Result<T> = std::result::Result<T, MeshError>;

/// Ordered neighborhood of a vertex and its tangent chart.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRing {
    pub center: usize,
    /// Neighbors in counter-clockwise order; consecutive entries share a face with `center`.
    pub neighbors: Vec<usize>,
    /// Normalized sector angles; `alphas[j]` spans `neighbors[j]` to `neighbors[j + 1]`
    /// (cyclically for interior vertices, so `alphas.len() == neighbors.len()`;
    /// one fewer sector on the boundary).
    pub alphas: Vec<f64>,
    /// Raw corner angles measured in 3D, same layout as `alphas`.
    pub raw_angles: Vec<f64>,
    /// Polar angle of each neighbor in the chart: cumulative sum of `alphas`.
    pub angles: Vec<f64>,
    /// Euclidean length of each edge `center -> neighbors[j]`.
    pub lengths: Vec<f64>,
    pub is_boundary: bool,
}

impl OneRing {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    /// Slot of `v` in the listing.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.neighbors.iter().position(|&n| n == v)
    }

    /// Chart angle of neighbor `v`, i.e. the polar angle of edge `center -> v`.
    pub fn angle_of(&self, v: usize) -> Option<f64> {
        self.position(v).map(|j| self.angles[j])
    }

    /// Total normalized angle (2π for interior vertices).
    pub fn total_angle(&self) -> f64 {
        self.alphas.iter().sum()
    }

    /// Iterates over sectors as `(slot_a, slot_b)` pairs of consecutive neighbors.
    pub fn sectors(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.neighbors.len();
        (0..self.alphas.len()).map(move |j| (j, (j + 1) % d))
    }

    /// Planar position of neighbor slot `j` in the chart.
    pub fn chart_point(&self, j: usize) -> [f64; 2] {
        let (s, c) = self.angles[j].sin_cos();
        [self.lengths[j] * c, self.lengths[j] * s]
    }
}

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    oriented: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    edge_faces: HashMap<(usize, usize), Vec<usize>>,
    rings: Vec<OneRing>,
    normals: Vec<Vec3>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn face_has_directed_edge(f: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|k| f[k] == a && f[(k + 1) % 3] == b)
}

impl TriangleMesh {
    /// Builds a mesh, validating indices, manifoldness, orientability and face areas.
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange { face: fi, vertex: v, n_vertices: n });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedIndex(fi));
            }
        }

        let diag2 = bbox_diagonal_sq(&positions);
        for (fi, f) in faces.iter().enumerate() {
            if triangle_area(&positions, f) <= 1e-12 * diag2 {
                return Err(MeshError::DegenerateFace(fi));
            }
        }

        let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut vertex_faces = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let e = edge_faces.entry(edge_key(f[k], f[(k + 1) % 3])).or_default();
                e.push(fi);
                if e.len() > 2 {
                    return Err(MeshError::NonManifold(format!(
                        "edge ({}, {}) is shared by more than two faces",
                        f[k],
                        f[(k + 1) % 3]
                    )));
                }
                vertex_faces[f[k]].push(fi);
            }
        }

        let oriented = orient_faces(&faces, &edge_faces)?;
        let mut mesh = TriangleMesh {
            positions,
            faces,
            oriented,
            vertex_faces,
            edge_faces,
            rings: Vec::new(),
            normals: Vec::new(),
        };
        mesh.normals = (0..n).map(|v| mesh.compute_normal(v)).collect();
        let rings = (0..n).map(|v| order_one_ring(&mesh, v)).collect::<Result<Vec<_>>>()?;
        mesh.rings = rings;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    /// Faces as given at construction.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Faces with consistent orientation (possibly flipped relative to [`Self::faces`]).
    pub fn oriented_faces(&self) -> &[[usize; 3]] {
        &self.oriented
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn edge_faces(&self, a: usize, b: usize) -> &[usize] {
        self.edge_faces.get(&edge_key(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn n_edges(&self) -> usize {
        self.edge_faces.len()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edge_faces.values().filter(|f| f.len() == 1).count()
    }

    pub fn ring(&self, v: usize) -> &OneRing {
        &self.rings[v]
    }

    pub fn rings(&self) -> &[OneRing] {
        &self.rings
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.rings[v].is_boundary
    }

    /// Area-weighted unit vertex normal.
    pub fn normal(&self, v: usize) -> Vec3 {
        self.normals[v]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        triangle_area(&self.positions, &self.faces[f])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal_sq(&self.positions).sqrt()
    }

    /// Mean edge length over all edges.
    pub fn mean_edge_length(&self) -> f64 {
        let total: f64 =
            self.edge_faces.keys().map(|&(a, b)| vec3::norm(vec3::sub(self.positions[a], self.positions[b]))).sum();
        total / self.edge_faces.len().max(1) as f64
    }

    /// Per-vertex volume measure: the sum of the areas of the faces adjacent to each vertex.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.n_vertices()];
        for (fi, f) in self.faces.iter().enumerate() {
            let a = self.face_area(fi);
            for &v in f {
                areas[v] += a;
            }
        }
        areas
    }

    /// SHA-256 over the little-endian vertex coordinates and face indices.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.positions.len() as u64).to_le_bytes());
        for p in &self.positions {
            for c in p {
                h.update(c.to_le_bytes());
            }
        }
        h.update((self.faces.len() as u64).to_le_bytes());
        for f in &self.faces {
            for &i in f {
                h.update((i as u64).to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// Unit tangent vector of the chart's zero angle at `v`: the first ring edge
    /// projected onto the tangent plane.
    pub fn reference_direction(&self, v: usize) -> Vec3 {
        let ring = &self.rings[v];
        let e = vec3::sub(self.positions[ring.neighbors[0]], self.positions[v]);
        vec3::normalize(vec3::project_to_plane(e, self.normals[v]))
    }

    /// Projected tangent-plane angle of every ring edge, measured counter-clockwise
    /// from the first edge about the vertex normal, in `[0, 2π)`.
    fn projected_ring_angles(&self, v: usize) -> Vec<f64> {
        let ring = &self.rings[v];
        let n = self.normals[v];
        let e0 = self.reference_direction(v);
        ring.neighbors
            .iter()
            .map(|&w| {
                let e = vec3::project_to_plane(vec3::sub(self.positions[w], self.positions[v]), n);
                angle::wrap(vec3::oriented_angle(e0, e, n))
            })
            .collect()
    }

    /// Chart angle at `v` of a 3D tangent direction.
    ///
    /// The direction is projected onto the tangent plane; inside a ring sector the
    /// projected angle is mapped linearly onto the sector's normalized chart angle.
    pub fn chart_angle_of_direction(&self, v: usize, dir: Vec3) -> f64 {
        let ring = &self.rings[v];
        let n = self.normals[v];
        let e0 = self.reference_direction(v);
        let d = vec3::project_to_plane(dir, n);
        let x = angle::wrap(vec3::oriented_angle(e0, d, n));
        let proj = self.projected_ring_angles(v);
        let deg = ring.degree();
        let chart_total = ring.total_angle();

        let mut knots_proj: Vec<f64> = proj.clone();
        let mut knots_chart: Vec<f64> = ring.angles.clone();
        knots_proj.push(TAU);
        knots_chart.push(if ring.is_boundary { TAU.max(chart_total) } else { chart_total });
        let monotone = knots_proj.windows(2).all(|w| w[1] > w[0]);
        if !monotone || deg < 2 {
            return angle::wrap(x * chart_total.max(1e-300) / TAU);
        }
        for k in 0..knots_proj.len() - 1 {
            let (p0, p1) = (knots_proj[k], knots_proj[k + 1]);
            if x >= p0 && x < p1 {
                let t = (x - p0) / (p1 - p0);
                return angle::wrap(knots_chart[k] + t * (knots_chart[k + 1] - knots_chart[k]));
            }
        }
        0.0
    }

    /// Inverse of [`Self::chart_angle_of_direction`]: unit tangent vector at `v` with
    /// the given chart angle.
    pub fn direction_of_chart_angle(&self, v: usize, chart_angle: f64) -> Vec3 {
        let ring = &self.rings[v];
        let n = self.normals[v];
        let e0 = self.reference_direction(v);
        let proj = self.projected_ring_angles(v);
        let chart_total = ring.total_angle();
        let mut knots_proj = proj;
        let mut knots_chart = ring.angles.clone();
        knots_proj.push(TAU);
        knots_chart.push(if ring.is_boundary { TAU.max(chart_total) } else { chart_total });
        let a = angle::wrap(chart_angle);
        let monotone = knots_proj.windows(2).all(|w| w[1] > w[0]);
        let x = if !monotone {
            a * TAU / chart_total.max(1e-300)
        } else {
            let mut x = a;
            for k in 0..knots_chart.len() - 1 {
                let (c0, c1) = (knots_chart[k], knots_chart[k + 1]);
                if a >= c0 && a < c1 {
                    let t = (a - c0) / (c1 - c0);
                    x = knots_proj[k] + t * (knots_proj[k + 1] - knots_proj[k]);
                    break;
                }
            }
            x
        };
        vec3::normalize(vec3::rotate(e0, n, x))
    }

    /// Copy of this mesh whose ring at `v` is listed starting from slot `start`,
    /// which rotates the reference direction at `v` by the chart angle of that slot.
    pub fn with_ring_start(&self, v: usize, start: usize) -> Result<Self> {
        let ring = &self.rings[v];
        if ring.is_boundary || start >= ring.degree() {
            return Err(MeshError::VertexOutOfRange(v));
        }
        let first = ring.neighbors[start];
        let mut out = self.clone();
        out.rings[v] = order_one_ring_from(self, v, Some(first))?;
        Ok(out)
    }

    fn compute_normal(&self, v: usize) -> Vec3 {
        let mut acc = [0.0; 3];
        for &fi in &self.vertex_faces[v] {
            let f = self.oriented[fi];
            let a = self.positions[f[0]];
            let b = self.positions[f[1]];
            let c = self.positions[f[2]];
            acc = vec3::add(acc, vec3::cross(vec3::sub(b, a), vec3::sub(c, a)));
        }
        vec3::normalize(acc)
    }
}

fn bbox_diagonal_sq(positions: &[Vec3]) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    let mut lo = positions[0];
    let mut hi = positions[0];
    for p in positions {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let d = vec3::sub(hi, lo);
    vec3::dot(d, d)
}

fn triangle_area(positions: &[Vec3], f: &[usize; 3]) -> f64 {
    let a = positions[f[0]];
    let b = positions[f[1]];
    let c = positions[f[2]];
    0.5 * vec3::norm(vec3::cross(vec3::sub(b, a), vec3::sub(c, a)))
}

fn orient_faces(faces: &[[usize; 3]], edge_faces: &HashMap<(usize, usize), Vec<usize>>) -> Result<Vec<[usize; 3]>> {
    let mut oriented = faces.to_vec();
    let mut visited = vec![false; faces.len()];
    let mut queue = VecDeque::new();
    for seed in 0..faces.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            let of = oriented[f];
            for k in 0..3 {
                let (a, b) = (of[k], of[(k + 1) % 3]);
                for &g in &edge_faces[&edge_key(a, b)] {
                    if g == f {
                        continue;
                    }
                    if !visited[g] {
                        if face_has_directed_edge(&oriented[g], a, b) {
                            oriented[g].swap(1, 2);
                        }
                        visited[g] = true;
                        queue.push_back(g);
                    } else if face_has_directed_edge(&oriented[g], a, b) {
                        return Err(MeshError::NonManifold(format!("mesh is not orientable (faces {f} and {g})")));
                    }
                }
            }
        }
    }
    Ok(oriented)
}

/// Lists the one-ring of `v` by walking its faces, and computes its chart angles.
pub fn order_one_ring(mesh: &TriangleMesh, v: usize) -> Result<OneRing> {
    order_one_ring_from(mesh, v, None)
}

/// As [`order_one_ring`], starting the listing of an interior vertex at `start`.
pub fn order_one_ring_from(mesh: &TriangleMesh, v: usize, start: Option<usize>) -> Result<OneRing> {
    if v >= mesh.n_vertices() {
        return Err(MeshError::VertexOutOfRange(v));
    }
    let faces = &mesh.vertex_faces[v];
    if faces.is_empty() {
        return Err(MeshError::NonManifoldStar(v));
    }
    // successor map: in face (v, x, y) the ring walks x -> y
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut first_pair = None;
    let mut sorted_faces = faces.clone();
    sorted_faces.sort_unstable();
    for &fi in &sorted_faces {
        let f = mesh.oriented[fi];
        let k = f.iter().position(|&x| x == v).expect("face adjacent to vertex");
        let x = f[(k + 1) % 3];
        let y = f[(k + 2) % 3];
        if first_pair.is_none() {
            first_pair = Some(x);
        }
        if next.insert(x, y).is_some() || prev.insert(y, x).is_some() {
            return Err(MeshError::NonManifoldStar(v));
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().filter(|x| !prev.contains_key(x)).collect();
    starts.sort_unstable();
    let is_boundary = !starts.is_empty();
    if starts.len() > 1 {
        return Err(MeshError::NonManifoldStar(v));
    }
    let first = if is_boundary {
        starts[0]
    } else {
        match start {
            Some(s) if next.contains_key(&s) => s,
            Some(_) => return Err(MeshError::VertexOutOfRange(v)),
            None => first_pair.expect("non-empty star"),
        }
    };

    let mut neighbors = vec![first];
    let mut cur = first;
    while let Some(&nx) = next.get(&cur) {
        if nx == first {
            break;
        }
        if neighbors.len() > faces.len() + 1 {
            return Err(MeshError::NonManifoldStar(v));
        }
        neighbors.push(nx);
        cur = nx;
    }
    let expected = if is_boundary { faces.len() + 1 } else { faces.len() };
    if neighbors.len() != expected {
        return Err(MeshError::NonManifoldStar(v));
    }

    let p = mesh.positions[v];
    let edges: Vec<Vec3> = neighbors.iter().map(|&w| vec3::sub(mesh.positions[w], p)).collect();
    let lengths: Vec<f64> = edges.iter().map(|&e| vec3::norm(e)).collect();
    let d = neighbors.len();
    let n_sectors = if is_boundary { d - 1 } else { d };
    let raw_angles: Vec<f64> = (0..n_sectors).map(|j| vec3::angle_between(edges[j], edges[(j + 1) % d])).collect();
    let raw_total: f64 = raw_angles.iter().sum();
    let scale = if is_boundary {
        if raw_total > TAU {
            TAU / raw_total
        } else {
            1.0
        }
    } else {
        TAU / raw_total
    };
    let alphas: Vec<f64> =
        if scale == 1.0 { raw_angles.clone() } else { raw_angles.iter().map(|a| a * scale).collect() };
    let mut angles = Vec::with_capacity(d);
    let mut acc = 0.0;
    for j in 0..d {
        angles.push(acc);
        if j < n_sectors {
            acc += alphas[j];
        }
    }
    Ok(OneRing { center: v, neighbors, alphas, raw_angles, angles, lengths, is_boundary })
}
