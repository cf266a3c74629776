//! Quadric-error edge collapse with a fine-to-coarse vertex map and angle transfer.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{MeshError, Result, TriangleMesh};
use crate::angle;
use crate::vec3::{self, Vec3};

/// Result of simplifying a mesh: the coarse mesh and how fine vertices map onto it.
#[derive(Debug, Clone)]
pub struct SimplificationMap {
    pub coarse: TriangleMesh,
    /// Coarse vertex each fine vertex's collapse chain ends at.
    pub fine_to_coarse: Vec<usize>,
    /// For each coarse vertex, the closest fine vertex among those collapsed onto it.
    pub representative: Vec<usize>,
    /// Per fine vertex: chart angle, at its coarse image, of the fine reference
    /// direction after the normal-aligning rotation. A fine chart angle `a` corresponds
    /// to the coarse chart angle `a + angle_offset`. Values lie in `[0, 2π)`.
    pub angle_offset: Vec<f64>,
}

impl SimplificationMap {
    pub fn n_fine(&self) -> usize {
        self.fine_to_coarse.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.coarse.n_vertices()
    }

    /// Map of a mesh onto itself.
    pub fn identity(mesh: &TriangleMesh) -> Self {
        let n = mesh.n_vertices();
        let ids: Vec<usize> = (0..n).collect();
        Self::from_parts(mesh, mesh.clone(), ids)
    }

    fn from_parts(fine: &TriangleMesh, coarse: TriangleMesh, fine_to_coarse: Vec<usize>) -> Self {
        let mut representative = vec![usize::MAX; coarse.n_vertices()];
        let mut best = vec![f64::INFINITY; coarse.n_vertices()];
        for (v, &u) in fine_to_coarse.iter().enumerate() {
            let d = vec3::norm(vec3::sub(fine.position(v), coarse.position(u)));
            if d < best[u] {
                best[u] = d;
                representative[u] = v;
            }
        }
        let angle_offset = fine_to_coarse
            .iter()
            .enumerate()
            .map(|(v, &u)| {
                let e = fine.reference_direction(v);
                let d = vec3::align(e, fine.normal(v), coarse.normal(u));
                coarse.chart_angle_of_direction(u, d)
            })
            .collect();
        SimplificationMap { coarse, fine_to_coarse, representative, angle_offset }
    }
}

type Quadric = [f64; 10];

fn plane_quadric(n: Vec3, p: Vec3, w: f64) -> Quadric {
    let d = -vec3::dot(n, p);
    let (a, b, c) = (n[0], n[1], n[2]);
    [w * a * a, w * a * b, w * a * c, w * a * d, w * b * b, w * b * c, w * b * d, w * c * c, w * c * d, w * d * d]
}

fn q_add(a: &Quadric, b: &Quadric) -> Quadric {
    let mut out = [0.0; 10];
    for k in 0..10 {
        out[k] = a[k] + b[k];
    }
    out
}

fn q_eval(q: &Quadric, p: Vec3) -> f64 {
    let (x, y, z) = (p[0], p[1], p[2]);
    q[0] * x * x
        + 2.0 * q[1] * x * y
        + 2.0 * q[2] * x * z
        + 2.0 * q[3] * x
        + q[4] * y * y
        + 2.0 * q[5] * y * z
        + 2.0 * q[6] * y
        + q[7] * z * z
        + 2.0 * q[8] * z
        + q[9]
}

/// Minimizer of the quadric when its 3×3 block is well conditioned.
fn q_optimum(q: &Quadric) -> Option<Vec3> {
    let m = [[q[0], q[1], q[2]], [q[1], q[4], q[5]], [q[2], q[5], q[7]]];
    let rhs = [-q[3], -q[6], -q[8]];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = (q[0] + q[4] + q[7]).powi(3);
    if scale <= 0.0 || det.abs() < 1e-10 * scale {
        return None;
    }
    let solve_col = |col: usize| {
        let mut mm = m;
        for r in 0..3 {
            mm[r][col] = rhs[r];
        }
        (mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1])
            - mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0])
            + mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]))
            / det
    };
    Some([solve_col(0), solve_col(1), solve_col(2)])
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    length: f64,
    a: usize,
    b: usize,
    stamp_a: u32,
    stamp_b: u32,
    target: Vec3,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // reversed: BinaryHeap pops the cheapest collapse first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.length.total_cmp(&self.length))
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

struct Collapser {
    pos: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vfaces: Vec<Vec<usize>>,
    quadric: Vec<Quadric>,
    stamp: Vec<u32>,
    alive: Vec<bool>,
    parent: Vec<usize>,
}

impl Collapser {
    fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.n_vertices();
        let pos = mesh.positions().to_vec();
        let faces = mesh.oriented_faces().to_vec();
        let mut quadric = vec![[0.0; 10]; n];
        let mut vfaces = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            let (a, b, c) = (pos[f[0]], pos[f[1]], pos[f[2]]);
            let cr = vec3::cross(vec3::sub(b, a), vec3::sub(c, a));
            let area = 0.5 * vec3::norm(cr);
            let q = plane_quadric(vec3::normalize(cr), a, area);
            for &v in f {
                quadric[v] = q_add(&quadric[v], &q);
                vfaces[v].push(fi);
            }
        }
        // boundary edges get a stiff plane orthogonal to their face
        for f in faces.iter() {
            let (a, b, c) = (pos[f[0]], pos[f[1]], pos[f[2]]);
            let fnorm = vec3::normalize(vec3::cross(vec3::sub(b, a), vec3::sub(c, a)));
            for k in 0..3 {
                let (u, w) = (f[k], f[(k + 1) % 3]);
                if mesh.edge_faces(u, w).len() == 1 {
                    let e = vec3::sub(pos[w], pos[u]);
                    let n = vec3::normalize(vec3::cross(e, fnorm));
                    let q = plane_quadric(n, pos[u], 10.0 * vec3::dot(e, e));
                    quadric[u] = q_add(&quadric[u], &q);
                    quadric[w] = q_add(&quadric[w], &q);
                }
            }
        }
        Collapser {
            pos,
            faces,
            face_alive: vec![true; mesh.n_faces()],
            vfaces,
            quadric,
            stamp: vec![0; n],
            alive: vec![true; n],
            parent: (0..n).collect(),
        }
    }

    fn neighbors(&self, v: usize) -> HashSet<usize> {
        let mut out = HashSet::new();
        for &f in &self.vfaces[v] {
            for &w in &self.faces[f] {
                if w != v {
                    out.insert(w);
                }
            }
        }
        out
    }

    fn shared_faces(&self, a: usize, b: usize) -> Vec<usize> {
        self.vfaces[a].iter().copied().filter(|&f| self.faces[f].contains(&b)).collect()
    }

    fn is_boundary(&self, v: usize) -> bool {
        self.neighbors(v).into_iter().any(|w| self.shared_faces(v, w).len() == 1)
    }

    fn candidate(&self, a: usize, b: usize) -> Candidate {
        let q = q_add(&self.quadric[a], &self.quadric[b]);
        let (pa, pb) = (self.pos[a], self.pos[b]);
        let mid = vec3::scale(vec3::add(pa, pb), 0.5);
        let mut options = vec![pa, pb, mid];
        if let Some(o) = q_optimum(&q) {
            options.insert(0, o);
        }
        let (target, cost) = options
            .into_iter()
            .map(|p| (p, q_eval(&q, p).max(0.0)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty options");
        let length = vec3::norm(vec3::sub(pa, pb));
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Candidate { cost, length, a, b, stamp_a: self.stamp[a], stamp_b: self.stamp[b], target }
    }

    fn is_valid(&self, a: usize, b: usize, p: Vec3) -> bool {
        let shared = self.shared_faces(a, b);
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        let opposite: HashSet<usize> =
            shared.iter().map(|&f| *self.faces[f].iter().find(|&&w| w != a && w != b).expect("third vertex")).collect();
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common: HashSet<usize> = na.intersection(&nb).copied().collect();
        if common != opposite {
            return false;
        }
        if shared.len() == 2 && self.is_boundary(a) && self.is_boundary(b) {
            return false;
        }
        if na.union(&nb).count() < 5 {
            return false;
        }
        for &o in &opposite {
            let min_deg = if self.is_boundary(o) { 3 } else { 4 };
            if self.neighbors(o).len() < min_deg {
                return false;
            }
        }
        for &v in &[a, b] {
            for &f in &self.vfaces[v] {
                if shared.contains(&f) {
                    continue;
                }
                let tri = self.faces[f];
                let old = tri.map(|w| self.pos[w]);
                let new = tri.map(|w| if w == a || w == b { p } else { self.pos[w] });
                let n0 = vec3::cross(vec3::sub(old[1], old[0]), vec3::sub(old[2], old[0]));
                let n1 = vec3::cross(vec3::sub(new[1], new[0]), vec3::sub(new[2], new[0]));
                let (l0, l1) = (vec3::norm(n0), vec3::norm(n1));
                if l1 <= 1e-9 * l0.max(1e-300) {
                    return false;
                }
                if vec3::dot(n0, n1) < 0.2 * l0 * l1 {
                    return false;
                }
            }
        }
        true
    }

    /// Collapses `b` into `a`, moving `a` to `p`.
    fn collapse(&mut self, a: usize, b: usize, p: Vec3) {
        for f in self.shared_faces(a, b) {
            self.face_alive[f] = false;
        }
        let b_faces = std::mem::take(&mut self.vfaces[b]);
        for f in b_faces {
            if !self.face_alive[f] {
                continue;
            }
            for w in self.faces[f].iter_mut() {
                if *w == b {
                    *w = a;
                }
            }
            self.vfaces[a].push(f);
        }
        for w in 0..self.vfaces.len() {
            if self.vfaces[w].is_empty() {
                continue;
            }
            let alive = &self.face_alive;
            self.vfaces[w].retain(|&f| alive[f]);
        }
        self.pos[a] = p;
        self.quadric[a] = q_add(&self.quadric[a], &self.quadric[b]);
        self.alive[b] = false;
        self.parent[b] = a;
        self.stamp[a] += 1;
        self.stamp[b] += 1;
    }

    fn root(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }
}

/// Simplifies `mesh` down to `target_vertex_count` vertices by quadric edge collapse.
///
/// Collapses that would flip a face normal or break manifoldness are skipped. A
/// target at or above the current vertex count yields the identity map.
pub fn simplify(mesh: &TriangleMesh, target_vertex_count: usize) -> Result<SimplificationMap> {
    let n = mesh.n_vertices();
    if target_vertex_count >= n {
        return Ok(SimplificationMap::identity(mesh));
    }
    if target_vertex_count < 4 {
        return Err(MeshError::TargetTooSmall { target: target_vertex_count, reached: n });
    }
    let mut c = Collapser::new(mesh);
    let mut heap = BinaryHeap::new();
    for f in c.faces.iter() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if a < b || mesh.edge_faces(a, b).len() == 1 {
                heap.push(c.candidate(a, b));
            }
        }
    }
    let mut remaining = n;
    while remaining > target_vertex_count {
        let Some(cand) = heap.pop() else { break };
        let (a, b) = (cand.a, cand.b);
        if !c.alive[a] || !c.alive[b] || c.stamp[a] != cand.stamp_a || c.stamp[b] != cand.stamp_b {
            continue;
        }
        if !c.is_valid(a, b, cand.target) {
            continue;
        }
        c.collapse(a, b, cand.target);
        remaining -= 1;
        let mut nbrs: Vec<usize> = c.neighbors(a).into_iter().collect();
        nbrs.sort_unstable();
        for w in nbrs {
            heap.push(c.candidate(a, w));
            // edges around the neighbor may have become collapsible again
            let mut second: Vec<usize> = c.neighbors(w).into_iter().filter(|&x| x != a).collect();
            second.sort_unstable();
            for x in second {
                heap.push(c.candidate(w, x));
            }
        }
    }
    let allowed = (target_vertex_count as f64 * 1.05).floor() as usize;
    if remaining > allowed {
        return Err(MeshError::TargetTooSmall { target: target_vertex_count, reached: remaining });
    }

    let mut new_index = vec![usize::MAX; n];
    let mut positions = Vec::with_capacity(remaining);
    for v in 0..n {
        if c.alive[v] {
            new_index[v] = positions.len();
            positions.push(c.pos[v]);
        }
    }
    let faces: Vec<[usize; 3]> =
        c.faces.iter().zip(&c.face_alive).filter(|(_, &alive)| alive).map(|(f, _)| f.map(|v| new_index[v])).collect();
    let coarse = TriangleMesh::new(positions, faces)?;
    let fine_to_coarse = (0..n).map(|v| new_index[c.root(v)]).collect();
    Ok(SimplificationMap::from_parts(mesh, coarse, fine_to_coarse))
}

/// Angular offset between two charts expressed as a fraction of a turn in bins.
pub fn offset_in_bins(offset: f64, n_theta: usize) -> f64 {
    angle::wrap(offset) * n_theta as f64 / std::f64::consts::TAU
}
