//! Signal transfer between a mesh and its simplification.
//!
//! A coarse vertex reads its value from its representative fine vertex, and a fine
//! vertex reads from the coarse vertex it collapsed onto. Directional signals are
//! shifted by the chart offset between the two vertices and linearly interpolated
//! between neighboring bins.

use serde::{Deserialize, Serialize};

use crate::conv::{ConvError, DirectionalSignal, Result, Signal};
use crate::mesh::simplify::offset_in_bins;
use crate::mesh::SimplificationMap;

/// The parts of a [`SimplificationMap`] needed to move signals, with offsets in bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMap {
    pub n_theta: usize,
    pub fine_to_coarse: Vec<usize>,
    pub representative: Vec<usize>,
    /// Per fine vertex: fine bin `b` corresponds to coarse bin `b + offset`.
    pub offset_bins: Vec<f64>,
}

impl PoolMap {
    pub fn new(map: &SimplificationMap, n_theta: usize) -> Self {
        PoolMap {
            n_theta,
            fine_to_coarse: map.fine_to_coarse.clone(),
            representative: map.representative.clone(),
            offset_bins: map.angle_offset.iter().map(|&a| offset_in_bins(a, n_theta)).collect(),
        }
    }

    pub fn identity(n: usize, n_theta: usize) -> Self {
        PoolMap {
            n_theta,
            fine_to_coarse: (0..n).collect(),
            representative: (0..n).collect(),
            offset_bins: vec![0.0; n],
        }
    }

    pub fn n_fine(&self) -> usize {
        self.fine_to_coarse.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.representative.len()
    }

    fn check(&self, n: usize, expected: usize, what: &str) -> Result<()> {
        if n != expected {
            return Err(ConvError::ShapeMismatch(format!("{what} signal has {n} vertices, map expects {expected}")));
        }
        Ok(())
    }

    fn check_bins(&self, phi: &DirectionalSignal) -> Result<()> {
        if phi.n_theta != self.n_theta {
            return Err(ConvError::ShapeMismatch(format!("{} bins, map built for {}", phi.n_theta, self.n_theta)));
        }
        Ok(())
    }
}

/// Floor bin and fraction of `b + shift` taken modulo `n`.
fn split(b: usize, shift: f64, n: usize) -> (usize, f64) {
    let x = (b as f64 + shift).rem_euclid(n as f64);
    let r = x.round();
    let x = if (x - r).abs() < 1e-9 { r } else { x };
    let lo = x.floor();
    ((lo as usize) % n, x - lo)
}

/// Moves `src(from, ·)` into `dst(to, ·)`, reading bin `b + shift` for destination bin `b`.
fn transfer(src: &DirectionalSignal, from: usize, shift: f64, dst: &mut DirectionalSignal, to: usize) {
    let n = src.n_theta;
    let c = src.channels;
    for b in 0..n {
        let (lo, fr) = split(b, shift, n);
        let a = src.at(from, lo).to_vec();
        let h = src.at(from, (lo + 1) % n);
        let at = dst.idx(to, b, 0);
        for ch in 0..c {
            dst.data[at + ch] = a[ch] + fr * (h[ch] - a[ch]);
        }
    }
}

fn transfer_adjoint(g: &DirectionalSignal, to: usize, shift: f64, out: &mut DirectionalSignal, from: usize) {
    let n = g.n_theta;
    let c = g.channels;
    for b in 0..n {
        let (lo, fr) = split(b, shift, n);
        let src = g.at(to, b);
        let l = out.idx(from, lo, 0);
        let h = out.idx(from, (lo + 1) % n, 0);
        for ch in 0..c {
            out.data[l + ch] += (1.0 - fr) * src[ch];
            out.data[h + ch] += fr * src[ch];
        }
    }
}

pub fn pool(phi: &DirectionalSignal, map: &PoolMap) -> Result<DirectionalSignal> {
    map.check(phi.n_vertices, map.n_fine(), "fine")?;
    map.check_bins(phi)?;
    let mut out = DirectionalSignal::zeros(map.n_coarse(), phi.n_theta, phi.channels);
    for (u, &r) in map.representative.iter().enumerate() {
        transfer(phi, r, -map.offset_bins[r], &mut out, u);
    }
    Ok(out)
}

pub fn pool_adjoint(g: &DirectionalSignal, map: &PoolMap) -> DirectionalSignal {
    let mut out = DirectionalSignal::zeros(map.n_fine(), g.n_theta, g.channels);
    for (u, &r) in map.representative.iter().enumerate() {
        transfer_adjoint(g, u, -map.offset_bins[r], &mut out, r);
    }
    out
}

pub fn unpool(phi: &DirectionalSignal, map: &PoolMap) -> Result<DirectionalSignal> {
    map.check(phi.n_vertices, map.n_coarse(), "coarse")?;
    map.check_bins(phi)?;
    let mut out = DirectionalSignal::zeros(map.n_fine(), phi.n_theta, phi.channels);
    for (v, &u) in map.fine_to_coarse.iter().enumerate() {
        transfer(phi, u, map.offset_bins[v], &mut out, v);
    }
    Ok(out)
}

pub fn unpool_adjoint(g: &DirectionalSignal, map: &PoolMap) -> DirectionalSignal {
    let mut out = DirectionalSignal::zeros(map.n_coarse(), g.n_theta, g.channels);
    for (v, &u) in map.fine_to_coarse.iter().enumerate() {
        transfer_adjoint(g, v, map.offset_bins[v], &mut out, u);
    }
    out
}

pub fn pool_scalar(f: &Signal, map: &PoolMap) -> Result<Signal> {
    map.check(f.n_vertices, map.n_fine(), "fine")?;
    let data = map.representative.iter().flat_map(|&r| f.row(r).iter().copied()).collect();
    Signal::from_vec(map.n_coarse(), f.channels, data)
}

pub fn pool_scalar_adjoint(g: &Signal, map: &PoolMap) -> Signal {
    let mut out = Signal::zeros(map.n_fine(), g.channels);
    for (u, &r) in map.representative.iter().enumerate() {
        for c in 0..g.channels {
            out.data[r * g.channels + c] += g.get(u, c);
        }
    }
    out
}

pub fn unpool_scalar(f: &Signal, map: &PoolMap) -> Result<Signal> {
    map.check(f.n_vertices, map.n_coarse(), "coarse")?;
    let data = map.fine_to_coarse.iter().flat_map(|&u| f.row(u).iter().copied()).collect();
    Signal::from_vec(map.n_fine(), f.channels, data)
}

pub fn unpool_scalar_adjoint(g: &Signal, map: &PoolMap) -> Signal {
    let mut out = Signal::zeros(map.n_coarse(), g.channels);
    for (v, &u) in map.fine_to_coarse.iter().enumerate() {
        for c in 0..g.channels {
            out.data[u * g.channels + c] += g.get(v, c);
        }
    }
    out
}
