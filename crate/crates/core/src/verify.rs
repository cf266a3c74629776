//! Invariant audit of a precompute container.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle;
use crate::container::PrecomputeContainer;
use crate::conv::{angular_max_pool, dir_conv, dir_layer, geodesic_conv, lift, Activation, PolarKernel, Signal};
use crate::gpc::edge_transport;
use crate::mesh::TriangleMesh;
use crate::network::gradcheck::{check_gradients, Objective};
use crate::network::{init_dense, init_layer, Graph, Levels, Op, Params};
use crate::vec3;
use crate::windows::WindowTensors;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Worst observed error.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<32} error {:.3e} (tolerance {:.1e})", self.name, self.value, self.tolerance)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every check on every level of `c`; flat meshes in the xy-plane additionally get
/// the planar-oracle comparison.
pub fn audit(c: &PrecomputeContainer, seed: u64) -> AuditReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for (l, level) in c.levels.iter().enumerate() {
        checks.push(Check::new(format!("L{l} barycentric reconstruction"), reconstruction_error(level), 1e-6));
        checks.push(Check::new(format!("L{l} window labels"), label_error(&level.windows), 0.0));
        checks.push(Check::new(
            format!("L{l} transport round trip"),
            transport_round_trip(&level.mesh, &level.gpc),
            1e-9,
        ));
        checks.push(Check::new(format!("L{l} prop1 max-pool identity"), prop1_error(&level.windows, &mut rng), 1e-12));
        checks.push(Check::new(
            format!("L{l} prop2 reference rotation"),
            prop2_error(&level.windows, &mut rng, 5),
            1e-9,
        ));
    }
    checks.push(Check::new("gradient spot checks", gradient_error(&c.network_levels(), seed), 1e-4));
    if is_flat(c.mesh()) {
        let lvl = &c.levels[0];
        let [r, t, g] = planar_errors(&lvl.mesh, &lvl.gpc, lvl.windows.spec.radius);
        checks.push(Check::new("planar oracle radius (relative)", r, 0.01));
        checks.push(Check::new("planar oracle angle", t, 0.05));
        checks.push(Check::new("planar oracle transport", g, 0.02));
    }
    AuditReport { checks }
}

/// Largest deviation of a window point from the weighted GPC embedding of its supporting
/// vertices, relative to the window radius, together with weight-sum and sign violations.
fn reconstruction_error(level: &crate::container::Level) -> f64 {
    let t = &level.windows;
    let s = t.spec;
    let mut worst: f64 = 0.0;
    for v in 0..t.n_vertices {
        for i in 0..s.n_rho {
            for j in 0..s.n_theta {
                let p = t.point(v, i, j);
                let w = &t.weight[3 * p..3 * p + 3];
                if !t.valid[p] {
                    worst = worst.max(w.iter().map(|x| x.abs()).sum::<f64>());
                    continue;
                }
                let mut q = [0.0; 2];
                for m in 0..3 {
                    worst = worst.max(-w[m]);
                    let Some(e) = level.gpc[v].embed(t.support[3 * p + m] as usize) else {
                        return f64::INFINITY;
                    };
                    q[0] += w[m] * e[0];
                    q[1] += w[m] * e[1];
                }
                worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
                let (sn, cs) = s.theta(j).sin_cos();
                let d = (q[0] - s.rho(i) * cs).hypot(q[1] - s.rho(i) * sn);
                worst = worst.max(d / s.radius);
            }
        }
    }
    worst
}

fn label_error(t: &WindowTensors) -> f64 {
    let bad =
        t.bin.iter().zip(&t.frac).filter(|(&b, &f)| b as usize >= t.spec.n_theta || !(0.0..1.0).contains(&f)).count();
    bad as f64
}

/// Transport around each edge and back, both from the edge formula and from the GPC maps of
/// the two endpoints.
fn transport_round_trip(mesh: &TriangleMesh, gpc: &[crate::gpc::GpcMap]) -> f64 {
    let mut worst: f64 = 0.0;
    for v in 0..mesh.n_vertices() {
        for &u in &mesh.ring(v).neighbors {
            let (Ok(a), Ok(b)) = (edge_transport(mesh, v, u), edge_transport(mesh, u, v)) else {
                return f64::INFINITY;
            };
            worst = worst.max(angle::circular_distance(a + b, 0.0));
            match (gpc[v].gamma(u), gpc[u].gamma(v)) {
                (Some(x), Some(y)) => worst = worst.max(angle::circular_distance(x + y, 0.0)),
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Signal {
    Signal::from_fn(n, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn prop1_error(t: &WindowTensors, rng: &mut ChaCha8Rng) -> f64 {
    let s = t.spec;
    let f = random_signal(rng, t.n_vertices, 2);
    let k = PolarKernel::from_fn(s.n_rho, s.n_theta, 2, 3, |_, _, _, _| rng.gen_range(-1.0..1.0));
    let (Ok(a), Ok(d)) = (geodesic_conv(&f, &k, t), dir_conv(&lift(&f, s.n_theta), &k, t)) else {
        return f64::INFINITY;
    };
    let (b, _) = angular_max_pool(&d);
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Rotating the reference direction at `v` by `k` bins permutes the activations of a
/// three-layer directional stack at `v` by `k` bins and leaves everything else unchanged.
fn prop2_error(t: &WindowTensors, rng: &mut ChaCha8Rng, trials: usize) -> f64 {
    let s = t.spec;
    let layers: Vec<_> = [(1, 3), (3, 3), (3, 2)]
        .iter()
        .map(|&(ci, co)| init_layer(rng, s.n_rho, s.n_theta, ci, co, Activation::Tanh))
        .collect();
    let x = lift(&random_signal(rng, t.n_vertices, 1), s.n_theta);
    let run = |t: &WindowTensors| layers.iter().try_fold(x.clone(), |h, p| dir_layer(&h, p, t));
    let Ok(base) = run(t) else { return f64::INFINITY };
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let v = rng.gen_range(0..t.n_vertices);
        let k = rng.gen_range(1..s.n_theta);
        let Ok(out) = run(&t.rotate_reference(v, k)) else { return f64::INFINITY };
        let expect = base.rotate_vertex(v, k);
        worst = out.data.iter().zip(&expect.data).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        let (m1, _) = angular_max_pool(&out);
        let (m0, _) = angular_max_pool(&base);
        worst = m1.data.iter().zip(&m0.data).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    worst
}

/// Finite-difference check of a small directional graph and a small geodesic graph that
/// use every level of the container.
fn gradient_error(levels: &Levels, seed: u64) -> f64 {
    let s = levels.windows[0].spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = levels.n_vertices(0);
    let x = random_signal(&mut rng, n, 1);
    let labels: Vec<usize> = (0..n).map(|v| v % 2).collect();
    let mut worst: f64 = 0.0;
    for directional in [true, false] {
        let mut g = Graph::new(1);
        let mut layers = Vec::new();
        let mut h = 0;
        if directional {
            h = g.push(Op::Lift, h);
        }
        let mut conv = |g: &mut Graph, level: usize, h: usize, layers: &mut Vec<_>| {
            layers.push(init_layer(
                &mut rng,
                s.n_rho,
                s.n_theta,
                if layers.is_empty() { 1 } else { 2 },
                2,
                Activation::Tanh,
            ));
            let param = layers.len() - 1;
            g.push(if directional { Op::Dir { level, param } } else { Op::Gc { level, param } }, h)
        };
        h = conv(&mut g, 0, h, &mut layers);
        for l in 0..levels.pools.len() {
            h = g.push(Op::Pool { level: l }, h);
            h = conv(&mut g, l + 1, h, &mut layers);
        }
        for l in (0..levels.pools.len()).rev() {
            h = g.push(Op::Unpool { level: l }, h);
        }
        if directional {
            h = g.push(Op::Amp, h);
        }
        let p = Params { layers, dense: vec![init_dense(&mut rng, 2, 2)] };
        h = g.push(Op::Dense { param: 0 }, h);
        g.push(Op::Softmax, h);
        worst = match check_gradients(&g, &p, levels, &x, &Objective::CrossEntropy(labels.clone()), 3, 1e-5, seed) {
            Ok(r) => worst.max(r.max_rel_error),
            Err(_) => f64::INFINITY,
        };
    }
    worst
}

fn is_flat(mesh: &TriangleMesh) -> bool {
    let z0 = mesh.position(0)[2];
    let tol = 1e-12 * mesh.bbox_diagonal().max(1.0);
    mesh.positions().iter().all(|p| (p[2] - z0).abs() <= tol)
}

fn global_ref_angle(mesh: &TriangleMesh, v: usize) -> f64 {
    let d = mesh.reference_direction(v);
    d[1].atan2(d[0])
}

/// Worst relative radius, angle and transport errors against exact planar polar
/// coordinates, over sources whose patch stays clear of the boundary and targets within
/// `radius`.
pub fn planar_errors(mesh: &TriangleMesh, gpc: &[crate::gpc::GpcMap], radius: f64) -> [f64; 3] {
    let mut worst = [0.0f64; 3];
    for map in gpc {
        let s = map.source;
        if map.entries().any(|e| mesh.is_boundary_vertex(e.vertex)) {
            continue;
        }
        let ref_s = global_ref_angle(mesh, s);
        for e in map.entries().filter(|e| e.vertex != s && e.r <= radius) {
            let d = vec3::sub(mesh.position(e.vertex), mesh.position(s));
            let exact = vec3::norm(d);
            worst[0] = worst[0].max((e.r - exact).abs() / exact);
            worst[1] = worst[1].max(angle::circular_distance(e.theta, d[1].atan2(d[0]) - ref_s));
            worst[2] = worst[2].max(angle::circular_distance(e.gamma, ref_s - global_ref_angle(mesh, e.vertex)));
        }
    }
    worst
}
