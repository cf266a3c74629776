//! Polar window sampling of GPC patches.
//!
//! Each vertex `v` carries an `n_rho × n_theta` window of sample points at polar
//! coordinates `(ρ_i, θ_j)` in its GPC chart. Every valid sample point is expressed as
//! a barycentric combination of three supporting vertices, and for each supporting
//! vertex `w` we store where the transported radial direction `θ_j` lands in the
//! angular bins of `w`: `Γ = (γ_vw / 2π + j / n_theta) mod 1`, kept as a floor bin
//! plus a fraction for linear interpolation between neighboring bins.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gpc::GpcMap;
use crate::mesh::TriangleMesh;

#[derive(Debug, Error, PartialEq)]
pub enum WindowError {
    #[error("invalid window spec: {0}")]
    InvalidSpec(&'static str),
    #[error("expected one GPC map per vertex ({expected}), got {got}")]
    GpcCount { expected: usize, got: usize },
    #[error("GPC of vertex {vertex} reaches {r_max}, window radius is {radius}")]
    RadiusExceedsGpc { vertex: usize, r_max: f64, radius: f64 },
    #[error("vertex {vertex}: {invalid} of {total} window points could not be located")]
    TooManyInvalid { vertex: usize, invalid: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub n_rho: usize,
    pub n_theta: usize,
    pub radius: f64,
}

impl WindowSpec {
    pub fn new(n_rho: usize, n_theta: usize, radius: f64) -> Result<Self, WindowError> {
        let s = WindowSpec { n_rho, n_theta, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.n_rho < 1 {
            return Err(WindowError::InvalidSpec("n_rho must be at least 1"));
        }
        if self.n_theta < 2 {
            return Err(WindowError::InvalidSpec("n_theta must be at least 2"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(WindowError::InvalidSpec("radius must be positive"));
        }
        Ok(())
    }

    /// `ρ_i = (i + 1) R / (n_rho + 1)`.
    pub fn rho(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.radius / (self.n_rho + 1) as f64
    }

    /// `θ_j = 2π j / n_theta`.
    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_theta as f64
    }

    pub fn points_per_window(&self) -> usize {
        self.n_rho * self.n_theta
    }
}

/// Window tensors for a whole mesh, flattened vertex-major as `(v, i, j, m)` with
/// `m ∈ 0..3` indexing the supporting vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTensors {
    pub spec: WindowSpec,
    pub n_vertices: usize,
    pub support: Vec<u32>,
    pub weight: Vec<f64>,
    pub bin: Vec<u32>,
    pub frac: Vec<f64>,
    pub valid: Vec<bool>,
}

impl WindowTensors {
    /// Index of window point `(v, i, j)` in `valid`; multiply by 3 for the support arrays.
    #[inline]
    pub fn point(&self, v: usize, i: usize, j: usize) -> usize {
        (v * self.spec.n_rho + i) * self.spec.n_theta + j
    }

    pub fn n_points(&self) -> usize {
        self.valid.len()
    }

    pub fn invalid_count(&self, v: usize) -> usize {
        let p = self.spec.points_per_window();
        self.valid[v * p..(v + 1) * p].iter().filter(|&&ok| !ok).count()
    }

    /// Permutes the window of `v` and the angular labels of `v` as a supporting vertex
    /// so the tensors match a reference direction at `v` rotated by `2π k / n_theta`.
    pub fn rotate_reference(&self, v: usize, k: usize) -> WindowTensors {
        let nt = self.spec.n_theta;
        let k = k % nt;
        let mut out = self.clone();
        if k == 0 {
            return out;
        }
        for i in 0..self.spec.n_rho {
            for j in 0..nt {
                let dst = self.point(v, i, j);
                let src = self.point(v, i, (j + k) % nt);
                out.valid[dst] = self.valid[src];
                for m in 0..3 {
                    out.support[3 * dst + m] = self.support[3 * src + m];
                    out.weight[3 * dst + m] = self.weight[3 * src + m];
                    out.bin[3 * dst + m] = self.bin[3 * src + m];
                    out.frac[3 * dst + m] = self.frac[3 * src + m];
                }
            }
        }
        for s in 0..out.support.len() {
            if out.support[s] as usize == v {
                out.bin[s] = ((out.bin[s] as usize + nt - k) % nt) as u32;
            }
        }
        out
    }
}

/// A located window point: supporting vertices and their barycentric weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub face: usize,
    pub vertices: [usize; 3],
    pub weights: [f64; 3],
}

/// Faces whose three vertices are all reached by the GPC, embedded in the plane.
pub struct Patch {
    faces: Vec<(usize, [usize; 3], [[f64; 2]; 3])>,
    tol: f64,
}

impl Patch {
    pub fn new(mesh: &TriangleMesh, gpc: &GpcMap, radius: f64) -> Self {
        let mut face_ids: Vec<usize> =
            gpc.entries().flat_map(|e| mesh.vertex_faces(e.vertex).iter().copied()).collect();
        face_ids.sort_unstable();
        face_ids.dedup();
        let faces = face_ids
            .into_iter()
            .filter_map(|f| {
                let tri = mesh.oriented_faces()[f];
                let p = [gpc.embed(tri[0])?, gpc.embed(tri[1])?, gpc.embed(tri[2])?];
                Some((f, tri, p))
            })
            .collect();
        Patch { faces, tol: 1e-9 * radius }
    }

    /// Finds a face whose planar image contains `(ρ cos θ, ρ sin θ)`.
    ///
    /// Containment is tested with edges pushed out by `1e-9 R`; among several hits the
    /// face with the largest minimum barycentric coordinate wins.
    pub fn locate(&self, rho: f64, theta: f64) -> Option<Location> {
        let (s, c) = theta.sin_cos();
        let q = [rho * c, rho * s];
        let mut best: Option<(f64, Location)> = None;
        for &(f, tri, p) in &self.faces {
            let Some(lam) = barycentric(p, q) else { continue };
            let mut ok = true;
            for m in 0..3 {
                // signed distance of q from the edge opposite to corner m
                let a = p[(m + 1) % 3];
                let b = p[(m + 2) % 3];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let h = 2.0 * signed_area(p).abs() / len;
                if lam[m] * h < -self.tol {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let score = lam[0].min(lam[1]).min(lam[2]);
            if best.as_ref().map_or(true, |(s, _)| score > *s) {
                let clamped = lam.map(|l| l.max(0.0));
                let total: f64 = clamped.iter().sum();
                best = Some((score, Location { face: f, vertices: tri, weights: clamped.map(|l| l / total) }));
            }
        }
        best.map(|(_, loc)| loc)
    }
}

fn signed_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn barycentric(p: [[f64; 2]; 3], q: [f64; 2]) -> Option<[f64; 3]> {
    let area = signed_area(p);
    if area.abs() < 1e-300 {
        return None;
    }
    let sub = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| signed_area([a, b, c]);
    let l0 = sub(q, p[1], p[2]) / area;
    let l1 = sub(p[0], q, p[2]) / area;
    Some([l0, l1, 1.0 - l0 - l1])
}

/// Locates the polar point `(rho, theta)` in the planar image of `gpc`.
pub fn locate_in_gpc(mesh: &TriangleMesh, gpc: &GpcMap, rho: f64, theta: f64) -> Option<Location> {
    Patch::new(mesh, gpc, gpc.r_max).locate(rho, theta)
}

/// Floor bin and fraction of `Γ · n_theta` for transported angle `gamma` and slot `j`.
pub fn split_gamma(gamma: f64, j: usize, n_theta: usize) -> (u32, f64) {
    let nt = n_theta as f64;
    let x = (gamma / TAU * nt + j as f64).rem_euclid(nt);
    // snap values a rounding error away from a bin boundary onto it
    let r = x.round();
    let x = if (x - r).abs() < 1e-9 { r } else { x };
    let x = if x >= nt { 0.0 } else { x };
    let b = x.floor();
    (b as u32, x - b)
}

/// Builds window tensors from one GPC map per vertex.
///
/// A vertex whose patch does not reach the mesh boundary must locate at least half of
/// its window points, otherwise the radius is too large for the mesh and
/// [`WindowError::TooManyInvalid`] is returned.
pub fn build_windows(mesh: &TriangleMesh, gpcs: &[GpcMap], spec: WindowSpec) -> Result<WindowTensors, WindowError> {
    spec.validate()?;
    let nv = mesh.n_vertices();
    if gpcs.len() != nv {
        return Err(WindowError::GpcCount { expected: nv, got: gpcs.len() });
    }
    if let Some(g) = gpcs.iter().find(|g| g.r_max < spec.radius) {
        return Err(WindowError::RadiusExceedsGpc { vertex: g.source, r_max: g.r_max, radius: spec.radius });
    }
    let per = spec.points_per_window();

    struct Block {
        support: Vec<u32>,
        weight: Vec<f64>,
        bin: Vec<u32>,
        frac: Vec<f64>,
        valid: Vec<bool>,
    }

    let blocks: Vec<Block> = gpcs
        .par_iter()
        .enumerate()
        .map(|(v, gpc)| {
            let patch = Patch::new(mesh, gpc, spec.radius);
            let mut b = Block {
                support: vec![v as u32; 3 * per],
                weight: vec![0.0; 3 * per],
                bin: vec![0; 3 * per],
                frac: vec![0.0; 3 * per],
                valid: vec![false; per],
            };
            for i in 0..spec.n_rho {
                for j in 0..spec.n_theta {
                    let p = i * spec.n_theta + j;
                    let Some(loc) = patch.locate(spec.rho(i), spec.theta(j)) else { continue };
                    b.valid[p] = true;
                    for m in 0..3 {
                        let w = loc.vertices[m];
                        let (bin, frac) = split_gamma(gpc.gamma(w).unwrap_or(0.0), j, spec.n_theta);
                        b.support[3 * p + m] = w as u32;
                        b.weight[3 * p + m] = loc.weights[m];
                        b.bin[3 * p + m] = bin;
                        b.frac[3 * p + m] = frac;
                    }
                }
            }
            b
        })
        .collect();

    for (v, b) in blocks.iter().enumerate() {
        let invalid = b.valid.iter().filter(|&&ok| !ok).count();
        if 2 * invalid > per && !gpcs[v].entries().any(|e| e.truncated) {
            return Err(WindowError::TooManyInvalid { vertex: v, invalid, total: per });
        }
    }

    let mut t = WindowTensors {
        spec,
        n_vertices: nv,
        support: Vec::with_capacity(3 * per * nv),
        weight: Vec::with_capacity(3 * per * nv),
        bin: Vec::with_capacity(3 * per * nv),
        frac: Vec::with_capacity(3 * per * nv),
        valid: Vec::with_capacity(per * nv),
    };
    for b in blocks {
        t.support.extend(b.support);
        t.weight.extend(b.weight);
        t.bin.extend(b.bin);
        t.frac.extend(b.frac);
        t.valid.extend(b.valid);
    }
    Ok(t)
}
