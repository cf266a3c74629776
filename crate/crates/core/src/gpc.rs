//! Geodesic polar coordinates with parallel transport.
//!
//! For a source vertex `s`, [`compute_gpc`] estimates for every nearby vertex `v`
//! the geodesic radius `r`, the polar angle `theta` of `v` in the chart of `s`, and
//! `gamma`: the angle, in the chart of `v`, of the source reference direction
//! transported along the approximate geodesic from `s` to `v`.
//!
//! The propagation is a fast-marching variant. Estimates on the one-ring of the
//! source come straight from its chart; every other vertex `i` is updated from pairs
//! of adjacent estimates `(j, k)` by unfolding the triangle `(i, j, k)` in the chart
//! of `i`, locating a virtual source consistent with the radii at `j` and `k`, and
//! interpolating angles along the smaller angular sector. Transported angles are moved
//! between charts by [`edge_transport`] before being interpolated the same way.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::angle;
use crate::mesh::TriangleMesh;

/// Default relative improvement required to replace an estimate.
pub const DEFAULT_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GpcError {
    #[error("source vertex {0} is out of range")]
    SourceOutOfRange(usize),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Estimate of `(r, theta, gamma)` at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub r: f64,
    pub theta: f64,
    pub gamma: f64,
}

/// How the shortest unfolded path reaches the updated vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdatePath {
    /// Through the first supporting vertex.
    ThroughJ,
    /// Through the second supporting vertex.
    ThroughK,
    /// Straight from the virtual source across the opposite edge.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleUpdate {
    pub estimate: Estimate,
    pub path: UpdatePath,
}

/// Geodesic polar coordinates around one source vertex.
///
/// Only reached vertices are stored, sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcMap {
    pub source: usize,
    pub r_max: f64,
    vertices: Vec<usize>,
    r: Vec<f64>,
    theta: Vec<f64>,
    gamma: Vec<f64>,
    truncated: Vec<bool>,
}

/// One stored entry of a [`GpcMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpcEntry {
    pub vertex: usize,
    pub r: f64,
    pub theta: f64,
    pub gamma: f64,
    /// The vertex lies on the mesh boundary, so its ring (and chart) is open.
    pub truncated: bool,
}

impl GpcMap {
    pub fn from_entries(source: usize, r_max: f64, mut entries: Vec<GpcEntry>) -> Self {
        entries.sort_by_key(|e| e.vertex);
        GpcMap {
            source,
            r_max,
            vertices: entries.iter().map(|e| e.vertex).collect(),
            r: entries.iter().map(|e| e.r).collect(),
            theta: entries.iter().map(|e| e.theta).collect(),
            gamma: entries.iter().map(|e| e.gamma).collect(),
            truncated: entries.iter().map(|e| e.truncated).collect(),
        }
    }

    fn slot(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.slot(v).is_some()
    }

    /// Geodesic radius of `v`, `+∞` when unreached.
    pub fn r(&self, v: usize) -> f64 {
        self.slot(v).map_or(f64::INFINITY, |k| self.r[k])
    }

    pub fn theta(&self, v: usize) -> Option<f64> {
        self.slot(v).map(|k| self.theta[k])
    }

    pub fn gamma(&self, v: usize) -> Option<f64> {
        self.slot(v).map(|k| self.gamma[k])
    }

    pub fn get(&self, v: usize) -> Option<GpcEntry> {
        self.slot(v).map(|k| self.entry(k))
    }

    fn entry(&self, k: usize) -> GpcEntry {
        GpcEntry {
            vertex: self.vertices[k],
            r: self.r[k],
            theta: self.theta[k],
            gamma: self.gamma[k],
            truncated: self.truncated[k],
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = GpcEntry> + '_ {
        (0..self.vertices.len()).map(|k| self.entry(k))
    }

    /// Planar embedding `(r cos θ, r sin θ)` of a reached vertex.
    pub fn embed(&self, v: usize) -> Option<[f64; 2]> {
        self.slot(v).map(|k| {
            let (s, c) = self.theta[k].sin_cos();
            [self.r[k] * c, self.r[k] * s]
        })
    }
}

/// Offset `δ` such that an angle `u` in the chart of `i` transports along edge `(i, j)`
/// to `u + δ` in the chart of `j`: `δ = θ_ji − θ_ij + π`, where `θ_ij` is the chart
/// angle of `j` around `i`.
pub fn edge_transport(mesh: &TriangleMesh, i: usize, j: usize) -> Result<f64, GpcError> {
    let n = mesh.n_vertices();
    if i >= n || j >= n {
        return Err(GpcError::NotAdjacent(i, j));
    }
    let theta_ij = mesh.ring(i).angle_of(j).ok_or(GpcError::NotAdjacent(i, j))?;
    let theta_ji = mesh.ring(j).angle_of(i).ok_or(GpcError::NotAdjacent(i, j))?;
    Ok(angle::wrap(theta_ji - theta_ij + PI))
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn angle2(a: [f64; 2], b: [f64; 2]) -> f64 {
    cross2(a, b).abs().atan2(a[0] * b[0] + a[1] * b[1])
}

/// Candidate estimate at `i` from the estimates at the two other corners of a face.
///
/// `j` and `k` must be consecutive in the ring of `i` (in either order). Geometry is
/// taken in the chart of `i`, so the unfolding respects the normalized one-ring angles.
/// Transported angles at `j` and `k` are moved into the chart of `i` before use.
pub fn update_triangle(
    mesh: &TriangleMesh,
    i: usize,
    j: usize,
    k: usize,
    est_j: Estimate,
    est_k: Estimate,
) -> Result<TriangleUpdate, GpcError> {
    let ring = mesh.ring(i);
    let sj = ring.position(j).ok_or(GpcError::NotAdjacent(i, j))?;
    let sk = ring.position(k).ok_or(GpcError::NotAdjacent(i, k))?;
    let pj = ring.chart_point(sj);
    let pk = ring.chart_point(sk);
    let gamma_j = angle::wrap(est_j.gamma + edge_transport(mesh, j, i)?);
    let gamma_k = angle::wrap(est_k.gamma + edge_transport(mesh, k, i)?);
    Ok(unfold(pj, pk, est_j, est_k, gamma_j, gamma_k))
}

/// Core triangle update in the chart of the updated vertex (placed at the origin).
fn unfold(pj: [f64; 2], pk: [f64; 2], est_j: Estimate, est_k: Estimate, gamma_j: f64, gamma_k: f64) -> TriangleUpdate {
    let through_j = TriangleUpdate {
        estimate: Estimate { r: est_j.r + norm2(pj), theta: est_j.theta, gamma: gamma_j },
        path: UpdatePath::ThroughJ,
    };
    let through_k = TriangleUpdate {
        estimate: Estimate { r: est_k.r + norm2(pk), theta: est_k.theta, gamma: gamma_k },
        path: UpdatePath::ThroughK,
    };
    let endpoint = if through_k.estimate.r < through_j.estimate.r { through_k } else { through_j };

    let w = sub2(pk, pj);
    let d = norm2(w);
    if d <= 0.0 {
        return endpoint;
    }
    let (rj, rk) = (est_j.r, est_k.r);
    let a = (rj * rj - rk * rk + d * d) / (2.0 * d);
    let h2 = rj * rj - a * a;
    if h2 < 0.0 {
        return endpoint;
    }
    let h = h2.sqrt();
    let u = [w[0] / d, w[1] / d];
    let nrm = [-u[1], u[0]];
    let origin_side = -(nrm[0] * pj[0] + nrm[1] * pj[1]);
    if origin_side == 0.0 {
        return endpoint;
    }
    // virtual source on the far side of edge (j, k)
    let sgn = -origin_side.signum();
    let s = [pj[0] + a * u[0] + sgn * h * nrm[0], pj[1] + a * u[1] + sgn * h * nrm[1]];

    let denom = cross2(w, s);
    if denom == 0.0 {
        return endpoint;
    }
    let t = -cross2(pj, s) / denom;
    if !(t > 0.0 && t < 1.0) {
        return endpoint;
    }
    let to_j = sub2(pj, s);
    let to_k = sub2(pk, s);
    let to_i = [-s[0], -s[1]];
    let phi_ik = angle2(to_j, to_k);
    let alpha = if phi_ik > 0.0 { (angle2(to_j, to_i) / phi_ik).clamp(0.0, 1.0) } else { 0.0 };
    TriangleUpdate {
        estimate: Estimate {
            r: norm2(s),
            theta: angle::mix(alpha, est_j.theta, est_k.theta),
            gamma: angle::mix(alpha, gamma_j, gamma_k),
        },
        path: UpdatePath::Interior,
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueItem {
    r: f64,
    v: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.r.total_cmp(&self.r).then(other.v.cmp(&self.v))
    }
}

/// Best candidate at `i` over all faces around it whose other corners are reached.
fn best_candidate(mesh: &TriangleMesh, i: usize, r: &[f64], theta: &[f64], gamma: &[f64]) -> Option<Estimate> {
    let ring = mesh.ring(i);
    let est = |v: usize| Estimate { r: r[v], theta: theta[v], gamma: gamma[v] };
    let transported = |slot: usize| -> f64 {
        let v = ring.neighbors[slot];
        // chart angle of i around v, chart angle of v around i
        let theta_vi = mesh.ring(v).angle_of(i).expect("adjacent");
        angle::wrap(gamma[v] + ring.angles[slot] - theta_vi + PI)
    };
    let mut best: Option<Estimate> = None;
    for (a, b) in ring.sectors() {
        let (vj, vk) = (ring.neighbors[a], ring.neighbors[b]);
        if !r[vj].is_finite() || !r[vk].is_finite() {
            continue;
        }
        let cand =
            unfold(ring.chart_point(a), ring.chart_point(b), est(vj), est(vk), transported(a), transported(b)).estimate;
        if best.map_or(true, |b| cand.r < b.r) {
            best = Some(cand);
        }
    }
    if best.is_some() {
        return best;
    }
    // no reached face yet: fall back to the best single edge
    for (slot, &v) in ring.neighbors.iter().enumerate() {
        if !r[v].is_finite() {
            continue;
        }
        let cand = Estimate { r: r[v] + ring.lengths[slot], theta: theta[v], gamma: transported(slot) };
        if best.map_or(true, |b| cand.r < b.r) {
            best = Some(cand);
        }
    }
    best
}

/// Geodesic polar coordinates and transport around `source`, up to radius `r_max`.
pub fn compute_gpc(mesh: &TriangleMesh, source: usize, r_max: f64, eps: f64) -> Result<GpcMap, GpcError> {
    let n = mesh.n_vertices();
    if source >= n {
        return Err(GpcError::SourceOutOfRange(source));
    }
    if !(r_max > 0.0) {
        return Err(GpcError::InvalidParameter("r_max must be positive"));
    }
    if !(eps > 0.0) {
        return Err(GpcError::InvalidParameter("eps must be positive"));
    }
    let mut r = vec![f64::INFINITY; n];
    let mut theta = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    let mut frozen = vec![false; n];
    let mut heap = BinaryHeap::new();

    r[source] = 0.0;
    frozen[source] = true;
    heap.push(QueueItem { r: 0.0, v: source });
    let ring = mesh.ring(source);
    for (slot, &w) in ring.neighbors.iter().enumerate() {
        let len = ring.lengths[slot];
        if len > r_max {
            continue;
        }
        r[w] = len;
        theta[w] = angle::wrap(ring.angles[slot]);
        gamma[w] = edge_transport(mesh, source, w)?;
        frozen[w] = true;
        heap.push(QueueItem { r: len, v: w });
    }

    while let Some(QueueItem { r: rj, v: j }) = heap.pop() {
        if rj > r[j] {
            continue;
        }
        for &i in &mesh.ring(j).neighbors {
            if frozen[i] {
                continue;
            }
            let Some(cand) = best_candidate(mesh, i, &r, &theta, &gamma) else { continue };
            if cand.r > r_max {
                continue;
            }
            if r[i] > (1.0 + eps) * cand.r {
                r[i] = cand.r;
                theta[i] = cand.theta;
                gamma[i] = cand.gamma;
                heap.push(QueueItem { r: cand.r, v: i });
            }
        }
    }

    let entries = (0..n)
        .filter(|&v| r[v].is_finite())
        .map(|v| GpcEntry {
            vertex: v,
            r: r[v],
            theta: theta[v],
            gamma: gamma[v],
            truncated: mesh.is_boundary_vertex(v),
        })
        .collect();
    Ok(GpcMap::from_entries(source, r_max, entries))
}

/// [`compute_gpc`] for every vertex; sources are processed in parallel.
pub fn compute_all_gpc(mesh: &TriangleMesh, r_max: f64, eps: f64) -> Result<Vec<GpcMap>, GpcError> {
    (0..mesh.n_vertices()).into_par_iter().map(|s| compute_gpc(mesh, s, r_max, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;
    use crate::vec3;
    use std::f64::consts::TAU;

    fn global_ref_angle(mesh: &TriangleMesh, v: usize) -> f64 {
        let d = mesh.reference_direction(v);
        d[1].atan2(d[0])
    }

    #[test]
    fn mix_wraps_in_update() {
        assert!(angle::circular_distance(angle::mix(0.5, 350f64.to_radians(), 10f64.to_radians()), 0.0) < 1e-12);
    }

    #[test]
    fn edge_transport_round_trip_is_identity() {
        for mesh in [primitives::icosphere(2), primitives::cube(), primitives::grid(4, 4, 1.0)] {
            for f in mesh.faces() {
                for k in 0..3 {
                    let (i, j) = (f[k], f[(k + 1) % 3]);
                    let d = edge_transport(&mesh, i, j).unwrap() + edge_transport(&mesh, j, i).unwrap();
                    assert!(angle::circular_distance(d, 0.0) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn edge_transport_is_trivial_on_flat_grid() {
        let mesh = primitives::grid(6, 6, 1.0);
        for f in mesh.faces() {
            for k in 0..3 {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                if mesh.is_boundary_vertex(i) || mesh.is_boundary_vertex(j) {
                    continue;
                }
                // any direction keeps its global angle
                let delta = edge_transport(&mesh, i, j).unwrap();
                let u = 0.7;
                let global_i = global_ref_angle(&mesh, i) + u;
                let global_j = global_ref_angle(&mesh, j) + u + delta;
                assert!(angle::circular_distance(global_i, global_j) < 1e-12);
            }
        }
    }

    #[test]
    fn edge_transport_on_cube_crease_matches_unfolding() {
        // edge (0, 1) of the unit cube; unfold the bottom face into the front face plane
        let mesh = primitives::cube();
        let delta = edge_transport(&mesh, 0, 1).unwrap();
        // oracle: angle of 0->1 at 0 and of 1->0 at 1 from chart angles measured in 3D
        let ring0 = mesh.ring(0);
        let ring1 = mesh.ring(1);
        let raw_angle = |ring: &crate::mesh::OneRing, target: usize| -> f64 {
            let pos = ring.position(target).unwrap();
            ring.raw_angles[..pos].iter().sum::<f64>() * 4.0 / 3.0
        };
        let expected = angle::wrap(raw_angle(ring1, 0) - raw_angle(ring0, 1) + PI);
        assert!(angle::circular_distance(delta, expected) < 1e-12);
        // differs from the flat value (π + difference of raw angles) by the corner normalization
        let flat = angle::wrap(
            ring1.raw_angles[..ring1.position(0).unwrap()].iter().sum::<f64>()
                - ring0.raw_angles[..ring0.position(1).unwrap()].iter().sum::<f64>()
                + PI,
        );
        let expected_gap = (raw_angle(ring1, 0) - ring1.raw_angles[..ring1.position(0).unwrap()].iter().sum::<f64>())
            - (raw_angle(ring0, 1) - ring0.raw_angles[..ring0.position(1).unwrap()].iter().sum::<f64>());
        assert!(angle::circular_distance(delta - flat, expected_gap) < 1e-12);
    }

    #[test]
    fn update_is_exact_next_to_source_on_flat_grid() {
        let mesh = primitives::grid(7, 7, 1.0);
        let s = 3 * 7 + 3;
        let ring = mesh.ring(s);
        let ref_s = global_ref_angle(&mesh, s);
        // pick i two steps right of s and a face (i, j, k) with j, k in the ring of s
        let i = s + 2;
        let ri = mesh.ring(i);
        let p_s = mesh.position(s);
        for (a, b) in ri.sectors() {
            let (j, k) = (ri.neighbors[a], ri.neighbors[b]);
            let (Some(sj), Some(sk)) = (ring.position(j), ring.position(k)) else { continue };
            let est = |slot: usize, v: usize| Estimate {
                r: ring.lengths[slot],
                theta: angle::wrap(ring.angles[slot]),
                gamma: edge_transport(&mesh, s, v).unwrap(),
            };
            let up = update_triangle(&mesh, i, j, k, est(sj, j), est(sk, k)).unwrap();
            let d = vec3::sub(mesh.position(i), p_s);
            let exact_r = vec3::norm(d);
            let exact_theta = angle::wrap(d[1].atan2(d[0]) - ref_s);
            assert!((up.estimate.r - exact_r).abs() < 1e-9, "{:?}", up);
            assert!(angle::circular_distance(up.estimate.theta, exact_theta) < 1e-9);
        }
    }

    #[test]
    fn endpoint_path_passes_values_through() {
        // i at origin, j straight ahead of the source: path exits through j
        let pj = [1.0, 0.0];
        let pk = [0.0, 1.0];
        let est_j = Estimate { r: 1.0, theta: 0.3, gamma: 1.1 };
        let est_k = Estimate { r: 5.0, theta: 2.0, gamma: 0.2 };
        let up = unfold(pj, pk, est_j, est_k, 1.1, 0.2);
        assert_eq!(up.path, UpdatePath::ThroughJ);
        assert_eq!(up.estimate.r, 2.0);
        assert_eq!(up.estimate.theta, 0.3);
        assert_eq!(up.estimate.gamma, 1.1);
    }

    #[test]
    fn flat_grid_matches_planar_polar_coordinates() {
        let n = 21;
        let mesh = primitives::grid(n, n, 1.0);
        let s = 10 * n + 10;
        let gpc = compute_gpc(&mesh, s, 5.0, DEFAULT_EPS).unwrap();
        let ref_s = global_ref_angle(&mesh, s);
        let p_s = mesh.position(s);
        assert!(gpc.len() > 60);
        for e in gpc.entries() {
            if e.vertex == s {
                assert_eq!(e.r, 0.0);
                continue;
            }
            let d = vec3::sub(mesh.position(e.vertex), p_s);
            let exact = vec3::norm(d);
            assert!(((e.r - exact) / exact).abs() <= 0.01, "v={} r={} exact={exact}", e.vertex, e.r);
            let th = angle::wrap(d[1].atan2(d[0]) - ref_s);
            assert!(angle::circular_distance(e.theta, th) <= 0.05);
            // flat transport: the source reference keeps its global direction
            let g = angle::wrap(ref_s - global_ref_angle(&mesh, e.vertex));
            assert!(angle::circular_distance(e.gamma, g) <= 0.02);
        }
    }

    #[test]
    fn reached_radii_respect_r_max() {
        let mesh = primitives::icosphere(3);
        let gpc = compute_gpc(&mesh, 5, 0.6, DEFAULT_EPS).unwrap();
        assert_eq!(gpc.r(5), 0.0);
        for e in gpc.entries() {
            assert!(e.r <= 0.6 * (1.0 + DEFAULT_EPS));
            assert!((0.0..TAU).contains(&e.theta) && (0.0..TAU).contains(&e.gamma));
        }
        assert!(gpc.r(gpc_far_vertex(&mesh, 5)).is_infinite());
    }

    fn gpc_far_vertex(mesh: &TriangleMesh, s: usize) -> usize {
        let p = mesh.position(s);
        (0..mesh.n_vertices())
            .max_by(|&a, &b| {
                let da = vec3::norm(vec3::sub(mesh.position(a), p));
                let db = vec3::norm(vec3::sub(mesh.position(b), p));
                da.total_cmp(&db)
            })
            .unwrap()
    }

    #[test]
    fn icosphere_radius_matches_arc_length() {
        let mesh = primitives::icosphere(3);
        let s = 0;
        let gpc = compute_gpc(&mesh, s, 10.0, DEFAULT_EPS).unwrap();
        assert_eq!(gpc.len(), mesh.n_vertices());
        let ps = mesh.position(s);
        // farthest ("antipodal-ish") vertices and a spread of others
        for v in 0..mesh.n_vertices() {
            let arc = vec3::dot(ps, mesh.position(v)).clamp(-1.0, 1.0).acos();
            if arc < 0.3 || arc > PI - 0.2 {
                continue;
            }
            let rel = (gpc.r(v) - arc).abs() / arc;
            assert!(rel <= 0.03, "v={v} r={} arc={arc}", gpc.r(v));
        }
    }

    #[test]
    fn rotating_the_source_listing_relabels_angles() {
        let mesh = primitives::icosphere(2);
        let s = 17;
        let base = compute_gpc(&mesh, s, 0.8, DEFAULT_EPS).unwrap();
        for start in 1..mesh.ring(s).degree() {
            let beta = mesh.ring(s).angles[start];
            let rotated_mesh = mesh.with_ring_start(s, start).unwrap();
            let rot = compute_gpc(&rotated_mesh, s, 0.8, DEFAULT_EPS).unwrap();
            assert_eq!(rot.len(), base.len());
            for (a, b) in base.entries().zip(rot.entries()) {
                assert_eq!(a.vertex, b.vertex);
                assert!((a.r - b.r).abs() <= 1e-12);
                if a.vertex == s {
                    continue;
                }
                assert!(angle::circular_distance(b.theta, a.theta - beta) < 1e-9);
                assert!(angle::circular_distance(b.gamma, a.gamma + beta) < 1e-9);
            }
        }
    }

    #[test]
    fn all_sources_parallel_equals_sequential() {
        let mesh = primitives::icosphere(2);
        let par = compute_all_gpc(&mesh, 0.7, DEFAULT_EPS).unwrap();
        for (s, g) in par.iter().enumerate() {
            assert_eq!(g.r(s), 0.0);
            let seq = compute_gpc(&mesh, s, 0.7, DEFAULT_EPS).unwrap();
            assert_eq!(&seq, g);
        }
    }

    #[test]
    fn flat_grid_maps_are_translates() {
        let n = 15;
        let mesh = primitives::grid(n, n, 1.0);
        let a = 7 * n + 7;
        let b = 7 * n + 8;
        let ga = compute_gpc(&mesh, a, 3.0, DEFAULT_EPS).unwrap();
        let gb = compute_gpc(&mesh, b, 3.0, DEFAULT_EPS).unwrap();
        assert_eq!(ga.len(), gb.len());
        for e in ga.entries() {
            let f = gb.get(e.vertex + 1).unwrap();
            assert!((e.r - f.r).abs() < 1e-9);
            assert!(angle::circular_distance(e.theta, f.theta) < 1e-9);
        }
    }

    #[test]
    fn bad_inputs() {
        let mesh = primitives::icosphere(1);
        assert_eq!(compute_gpc(&mesh, 999, 1.0, 1e-12), Err(GpcError::SourceOutOfRange(999)));
        assert!(compute_gpc(&mesh, 0, 0.0, 1e-12).is_err());
        assert_eq!(edge_transport(&mesh, 0, 0), Err(GpcError::NotAdjacent(0, 0)));
    }
}
