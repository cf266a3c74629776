//! Signals on meshes and the geodesic / directional convolution operators.
//!
//! Layouts are flat and row-major: a [`Signal`] is `(vertex, channel)`, a
//! [`DirectionalSignal`] is `(vertex, bin, channel)`, a [`WindowSignal`] is
//! `(vertex, rho, theta, channel)` and a [`PolarKernel`] is `(rho, theta, in, out)`.
//!
//! Directional convolution aligns the kernel with output direction `l` by a circular
//! shift: `out[v, l, q] = Σ P[v, i, j, p] K[i, (j − l) mod n_theta, p, q]`, where `P`
//! is the directional pull-back. With this sign a rotation of the reference direction
//! at `v` by `k` bins acts on inputs and outputs alike as `φ'(v, b) = φ(v, b + k)`.
//!
//! Backward passes are provided next to each forward operator for the network module.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::windows::WindowTensors;

#[derive(Debug, Error)]
pub enum ConvError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ConvError>;

fn mismatch(msg: impl Into<String>) -> ConvError {
    ConvError::ShapeMismatch(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub n_vertices: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Signal {
    pub fn zeros(n_vertices: usize, channels: usize) -> Self {
        Signal { n_vertices, channels, data: vec![0.0; n_vertices * channels] }
    }

    pub fn from_vec(n_vertices: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_vertices * channels {
            return Err(mismatch(format!("{} values for {n_vertices}x{channels} signal", data.len())));
        }
        Ok(Signal { n_vertices, channels, data })
    }

    pub fn from_fn(n_vertices: usize, channels: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = (0..n_vertices * channels).map(|k| f(k / channels, k % channels)).collect();
        Signal { n_vertices, channels, data }
    }

    #[inline]
    pub fn get(&self, v: usize, c: usize) -> f64 {
        self.data[v * self.channels + c]
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.data[v * self.channels..(v + 1) * self.channels]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSignal {
    pub n_vertices: usize,
    pub n_theta: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl DirectionalSignal {
    pub fn zeros(n_vertices: usize, n_theta: usize, channels: usize) -> Self {
        DirectionalSignal { n_vertices, n_theta, channels, data: vec![0.0; n_vertices * n_theta * channels] }
    }

    pub fn from_fn(
        n_vertices: usize,
        n_theta: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let data = (0..n_vertices * n_theta * channels)
            .map(|k| f(k / (n_theta * channels), (k / channels) % n_theta, k % channels))
            .collect();
        DirectionalSignal { n_vertices, n_theta, channels, data }
    }

    #[inline]
    pub fn idx(&self, v: usize, b: usize, c: usize) -> usize {
        (v * self.n_theta + b) * self.channels + c
    }

    #[inline]
    pub fn get(&self, v: usize, b: usize, c: usize) -> f64 {
        self.data[self.idx(v, b, c)]
    }

    /// Channel vector at `(v, b)`.
    pub fn at(&self, v: usize, b: usize) -> &[f64] {
        let s = (v * self.n_theta + b) * self.channels;
        &self.data[s..s + self.channels]
    }

    /// Copy with the bins of `v` relabeled as `out(v, b) = self(v, b + k)`.
    pub fn rotate_vertex(&self, v: usize, k: usize) -> Self {
        let mut out = self.clone();
        for b in 0..self.n_theta {
            let src = (b + k) % self.n_theta;
            for c in 0..self.channels {
                out.data[self.idx(v, b, c)] = self.get(v, src, c);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Values pulled back onto the window sample points of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSignal {
    pub n_vertices: usize,
    pub n_rho: usize,
    pub n_theta: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl WindowSignal {
    fn zeros_like(t: &WindowTensors, channels: usize) -> Self {
        WindowSignal {
            n_vertices: t.n_vertices,
            n_rho: t.spec.n_rho,
            n_theta: t.spec.n_theta,
            channels,
            data: vec![0.0; t.n_points() * channels],
        }
    }

    #[inline]
    pub fn get(&self, v: usize, i: usize, j: usize, c: usize) -> f64 {
        self.data[((v * self.n_rho + i) * self.n_theta + j) * self.channels + c]
    }

    pub fn per_vertex(&self) -> usize {
        self.n_rho * self.n_theta * self.channels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarKernel {
    pub n_rho: usize,
    pub n_theta: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub data: Vec<f64>,
}

impl PolarKernel {
    pub fn zeros(n_rho: usize, n_theta: usize, c_in: usize, c_out: usize) -> Self {
        PolarKernel { n_rho, n_theta, c_in, c_out, data: vec![0.0; n_rho * n_theta * c_in * c_out] }
    }

    pub fn from_fn(
        n_rho: usize,
        n_theta: usize,
        c_in: usize,
        c_out: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut k = Self::zeros(n_rho, n_theta, c_in, c_out);
        for i in 0..n_rho {
            for j in 0..n_theta {
                for p in 0..c_in {
                    for q in 0..c_out {
                        let at = k.idx(i, j, p, q);
                        k.data[at] = f(i, j, p, q);
                    }
                }
            }
        }
        k
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, p: usize, q: usize) -> usize {
        ((i * self.n_theta + j) * self.c_in + p) * self.c_out + q
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, p: usize, q: usize) -> f64 {
        self.data[self.idx(i, j, p, q)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Kernel, central matrix `C` (`in × out`, row-major), bias and activation of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub kernel: PolarKernel,
    pub central: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
    /// Rescale windows truncated by the boundary to their full point count.
    #[serde(default)]
    pub normalize: bool,
}

impl LayerParams {
    pub fn zeros(n_rho: usize, n_theta: usize, c_in: usize, c_out: usize, activation: Activation) -> Self {
        LayerParams {
            kernel: PolarKernel::zeros(n_rho, n_theta, c_in, c_out),
            central: vec![0.0; c_in * c_out],
            bias: vec![0.0; c_out],
            activation,
            normalize: false,
        }
    }

    pub fn c_in(&self) -> usize {
        self.kernel.c_in
    }

    pub fn c_out(&self) -> usize {
        self.kernel.c_out
    }

    pub fn check(&self) -> Result<()> {
        let (i, o) = (self.c_in(), self.c_out());
        if self.central.len() != i * o || self.bias.len() != o {
            return Err(mismatch("central matrix or bias does not match kernel channels"));
        }
        Ok(())
    }
}

fn check_kernel(k: &PolarKernel, t: &WindowTensors, c_in: usize) -> Result<()> {
    if k.n_rho != t.spec.n_rho || k.n_theta != t.spec.n_theta {
        return Err(mismatch(format!(
            "kernel is {}x{}, windows are {}x{}",
            k.n_rho, k.n_theta, t.spec.n_rho, t.spec.n_theta
        )));
    }
    if k.c_in != c_in {
        return Err(mismatch(format!("kernel expects {} input channels, signal has {c_in}", k.c_in)));
    }
    if k.data.len() != k.n_rho * k.n_theta * k.c_in * k.c_out {
        return Err(mismatch("kernel data length"));
    }
    Ok(())
}

fn check_vertices(n: usize, t: &WindowTensors) -> Result<()> {
    if n != t.n_vertices {
        return Err(mismatch(format!("signal has {n} vertices, windows have {}", t.n_vertices)));
    }
    Ok(())
}

fn check_directional(phi: &DirectionalSignal, t: &WindowTensors) -> Result<()> {
    check_vertices(phi.n_vertices, t)?;
    if phi.n_theta != t.spec.n_theta {
        return Err(mismatch(format!("signal has {} bins, windows have {}", phi.n_theta, t.spec.n_theta)));
    }
    Ok(())
}

pub fn lift(f: &Signal, n_theta: usize) -> DirectionalSignal {
    let c = f.channels;
    let mut out = DirectionalSignal::zeros(f.n_vertices, n_theta, c);
    for (v, chunk) in out.data.chunks_mut(n_theta * c).enumerate() {
        for b in 0..n_theta {
            chunk[b * c..(b + 1) * c].copy_from_slice(f.row(v));
        }
    }
    out
}

/// Adjoint of [`lift`]: sums over bins.
pub fn lift_adjoint(g: &DirectionalSignal) -> Signal {
    let mut out = Signal::zeros(g.n_vertices, g.channels);
    for v in 0..g.n_vertices {
        for b in 0..g.n_theta {
            for c in 0..g.channels {
                out.data[v * g.channels + c] += g.get(v, b, c);
            }
        }
    }
    out
}

/// `E*f`: barycentric interpolation of `f` at every window point, zero at invalid points.
pub fn pull_back(f: &Signal, t: &WindowTensors) -> Result<WindowSignal> {
    check_vertices(f.n_vertices, t)?;
    let c = f.channels;
    let mut out = WindowSignal::zeros_like(t, c);
    out.data.par_chunks_mut(c).enumerate().for_each(|(p, dst)| {
        if !t.valid[p] {
            return;
        }
        for m in 0..3 {
            let s = 3 * p + m;
            let w = t.weight[s];
            if w == 0.0 {
                continue;
            }
            let src = f.row(t.support[s] as usize);
            for ch in 0..c {
                dst[ch] += w * src[ch];
            }
        }
    });
    Ok(out)
}

/// Directional pull-back: barycentric over supporting vertices, linear in angle between
/// the floor bin and the next one with the stored fraction.
pub fn dir_pull_back(phi: &DirectionalSignal, t: &WindowTensors) -> Result<WindowSignal> {
    check_directional(phi, t)?;
    let c = phi.channels;
    let nt = phi.n_theta;
    let mut out = WindowSignal::zeros_like(t, c);
    out.data.par_chunks_mut(c).enumerate().for_each(|(p, dst)| {
        if !t.valid[p] {
            return;
        }
        for m in 0..3 {
            let s = 3 * p + m;
            let w = t.weight[s];
            if w == 0.0 {
                continue;
            }
            let e = t.support[s] as usize;
            let b = t.bin[s] as usize;
            let fr = t.frac[s];
            let lo = phi.at(e, b);
            let hi = phi.at(e, (b + 1) % nt);
            for ch in 0..c {
                dst[ch] += w * (lo[ch] + fr * (hi[ch] - lo[ch]));
            }
        }
    });
    Ok(out)
}

/// Adjoint of [`dir_pull_back`].
pub fn dir_pull_back_adjoint(g: &WindowSignal, t: &WindowTensors) -> DirectionalSignal {
    let c = g.channels;
    let nt = t.spec.n_theta;
    let mut out = DirectionalSignal::zeros(t.n_vertices, nt, c);
    for p in 0..t.n_points() {
        if !t.valid[p] {
            continue;
        }
        let src = &g.data[p * c..(p + 1) * c];
        for m in 0..3 {
            let s = 3 * p + m;
            let w = t.weight[s];
            if w == 0.0 {
                continue;
            }
            let e = t.support[s] as usize;
            let b = t.bin[s] as usize;
            let fr = t.frac[s];
            let lo = out.idx(e, b, 0);
            let hi = out.idx(e, (b + 1) % nt, 0);
            for ch in 0..c {
                out.data[lo + ch] += w * (1.0 - fr) * src[ch];
                out.data[hi + ch] += w * fr * src[ch];
            }
        }
    }
    out
}

/// Rescales each vertex's window by `points / valid points` so truncated windows keep
/// the magnitude of full ones.
pub fn normalize_windows(w: &mut WindowSignal, t: &WindowTensors) {
    let per = w.per_vertex();
    let pts = t.spec.points_per_window();
    for v in 0..w.n_vertices {
        let valid = pts - t.invalid_count(v);
        if valid > 0 && valid < pts {
            let s = pts as f64 / valid as f64;
            w.data[v * per..(v + 1) * per].iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// Contracts pulled-back windows with a kernel, one circular kernel shift per output bin.
pub fn contract(pb: &WindowSignal, k: &PolarKernel) -> DirectionalSignal {
    let (nr, nt, ci, co) = (k.n_rho, k.n_theta, k.c_in, k.c_out);
    let per = pb.per_vertex();
    let mut out = DirectionalSignal::zeros(pb.n_vertices, nt, co);
    out.data.par_chunks_mut(nt * co).enumerate().for_each(|(v, dst)| {
        let win = &pb.data[v * per..(v + 1) * per];
        for l in 0..nt {
            let acc = &mut dst[l * co..(l + 1) * co];
            for i in 0..nr {
                for j in 0..nt {
                    let row = &win[(i * nt + j) * ci..(i * nt + j + 1) * ci];
                    let kj = (j + nt - l) % nt;
                    let blk = &k.data[(i * nt + kj) * ci * co..(i * nt + kj + 1) * ci * co];
                    for p in 0..ci {
                        let a = row[p];
                        if a == 0.0 {
                            continue;
                        }
                        let kr = &blk[p * co..(p + 1) * co];
                        for q in 0..co {
                            acc[q] += a * kr[q];
                        }
                    }
                }
            }
        }
    });
    out
}

/// Gradients of [`contract`] with respect to the windows and the kernel.
pub fn contract_backward(pb: &WindowSignal, k: &PolarKernel, g: &DirectionalSignal) -> (WindowSignal, PolarKernel) {
    let (nr, nt, ci, co) = (k.n_rho, k.n_theta, k.c_in, k.c_out);
    let per = pb.per_vertex();
    let mut g_pb = WindowSignal { data: vec![0.0; pb.data.len()], ..pb.clone() };
    let mut g_k = PolarKernel::zeros(nr, nt, ci, co);
    for v in 0..pb.n_vertices {
        let win = &pb.data[v * per..(v + 1) * per];
        let gwin = &mut g_pb.data[v * per..(v + 1) * per];
        for l in 0..nt {
            let go = g.at(v, l);
            if go.iter().all(|&x| x == 0.0) {
                continue;
            }
            for i in 0..nr {
                for j in 0..nt {
                    let kj = (j + nt - l) % nt;
                    let base = (i * nt + kj) * ci * co;
                    let r0 = (i * nt + j) * ci;
                    for p in 0..ci {
                        let kr = &k.data[base + p * co..base + (p + 1) * co];
                        let mut s = 0.0;
                        for q in 0..co {
                            s += go[q] * kr[q];
                        }
                        gwin[r0 + p] += s;
                        let a = win[r0 + p];
                        if a != 0.0 {
                            let gk = &mut g_k.data[base + p * co..base + (p + 1) * co];
                            for q in 0..co {
                                gk[q] += a * go[q];
                            }
                        }
                    }
                }
            }
        }
    }
    (g_pb, g_k)
}

/// Directional convolution `φ ⋆ K`.
pub fn dir_conv(phi: &DirectionalSignal, k: &PolarKernel, t: &WindowTensors) -> Result<DirectionalSignal> {
    check_kernel(k, t, phi.channels)?;
    Ok(contract(&dir_pull_back(phi, t)?, k))
}

/// Per-vertex, per-channel maximum over bins and the winning bin (lowest on ties).
pub fn angular_max_pool(phi: &DirectionalSignal) -> (Signal, Vec<u32>) {
    let c = phi.channels;
    let mut out = Signal::zeros(phi.n_vertices, c);
    let mut arg = vec![0u32; phi.n_vertices * c];
    for v in 0..phi.n_vertices {
        for ch in 0..c {
            let mut best = phi.get(v, 0, ch);
            let mut bi = 0;
            for b in 1..phi.n_theta {
                let x = phi.get(v, b, ch);
                if x > best {
                    best = x;
                    bi = b;
                }
            }
            out.data[v * c + ch] = best;
            arg[v * c + ch] = bi as u32;
        }
    }
    (out, arg)
}

/// Routes a gradient through [`angular_max_pool`] to the recorded argmax bins.
pub fn angular_max_pool_backward(g: &Signal, arg: &[u32], n_theta: usize) -> DirectionalSignal {
    let c = g.channels;
    let mut out = DirectionalSignal::zeros(g.n_vertices, n_theta, c);
    for v in 0..g.n_vertices {
        for ch in 0..c {
            let b = arg[v * c + ch] as usize;
            let at = out.idx(v, b, ch);
            out.data[at] = g.data[v * c + ch];
        }
    }
    out
}

/// Geodesic convolution of a scalar-per-vertex signal: the maximum over the `n_theta`
/// kernel rotations of the windowed response.
pub fn geodesic_conv(f: &Signal, k: &PolarKernel, t: &WindowTensors) -> Result<Signal> {
    check_kernel(k, t, f.channels)?;
    Ok(angular_max_pool(&contract(&pull_back(f, t)?, k)).0)
}

/// Adds `φ C + B` at every `(vertex, bin)` to `acc` (both `(v, b, ·)` layouts).
fn add_central(acc: &mut DirectionalSignal, phi_rows: &[f64], ci: usize, params: &LayerParams) {
    let co = params.c_out();
    acc.data.par_chunks_mut(co).enumerate().for_each(|(r, dst)| {
        let x = &phi_rows[r * ci..(r + 1) * ci];
        for q in 0..co {
            dst[q] += params.bias[q];
        }
        for p in 0..ci {
            let a = x[p];
            if a == 0.0 {
                continue;
            }
            let cr = &params.central[p * co..(p + 1) * co];
            for q in 0..co {
                dst[q] += a * cr[q];
            }
        }
    });
}

/// `dir_conv(φ, K) + φ C + B` before the activation, with the pulled-back windows.
pub fn dir_layer_traced(
    phi: &DirectionalSignal,
    params: &LayerParams,
    t: &WindowTensors,
) -> Result<(DirectionalSignal, WindowSignal)> {
    params.check()?;
    check_kernel(&params.kernel, t, phi.channels)?;
    let mut pb = dir_pull_back(phi, t)?;
    if params.normalize {
        normalize_windows(&mut pb, t);
    }
    let mut out = contract(&pb, &params.kernel);
    add_central(&mut out, &phi.data, phi.channels, params);
    Ok((out, pb))
}

pub fn dir_layer_preactivation(
    phi: &DirectionalSignal,
    params: &LayerParams,
    t: &WindowTensors,
) -> Result<DirectionalSignal> {
    Ok(dir_layer_traced(phi, params, t)?.0)
}

/// Directional convolution layer `ξ(φ ⋆ K + φ C + B)`.
pub fn dir_layer(phi: &DirectionalSignal, params: &LayerParams, t: &WindowTensors) -> Result<DirectionalSignal> {
    let mut out = dir_layer_preactivation(phi, params, t)?;
    let act = params.activation;
    out.data.iter_mut().for_each(|x| *x = act.apply(*x));
    Ok(out)
}

/// [`gc_layer`] together with the pulled-back windows and the winning rotation per
/// output entry.
pub fn gc_layer_traced(
    f: &Signal,
    params: &LayerParams,
    t: &WindowTensors,
) -> Result<(Signal, WindowSignal, Vec<u32>)> {
    params.check()?;
    check_kernel(&params.kernel, t, f.channels)?;
    let mut pb = pull_back(f, t)?;
    if params.normalize {
        normalize_windows(&mut pb, t);
    }
    let mut pre = contract(&pb, &params.kernel);
    let lifted = lift(f, t.spec.n_theta);
    add_central(&mut pre, &lifted.data, f.channels, params);
    let act = params.activation;
    pre.data.iter_mut().for_each(|x| *x = act.apply(*x));
    let (out, arg) = angular_max_pool(&pre);
    Ok((out, pb, arg))
}

/// Geodesic convolution layer `max_l ξ(f ⋆ K_l + f C + B)`.
pub fn gc_layer(f: &Signal, params: &LayerParams, t: &WindowTensors) -> Result<Signal> {
    Ok(gc_layer_traced(f, params, t)?.0)
}

/// Window values for the fixed-direction variant: at window point `(i, j)` the
/// supporting vertices are sampled at the transport of direction `l` rather than of
/// the radial direction `θ_j`, i.e. at bin `floor − j + l` with the same fraction.
fn fixed_window(phi: &DirectionalSignal, t: &WindowTensors, v: usize, l: usize, buf: &mut [f64]) {
    let (nr, nt, c) = (t.spec.n_rho, t.spec.n_theta, phi.channels);
    buf.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..nr {
        for j in 0..nt {
            let p = t.point(v, i, j);
            if !t.valid[p] {
                continue;
            }
            let dst = &mut buf[(i * nt + j) * c..(i * nt + j + 1) * c];
            for m in 0..3 {
                let s = 3 * p + m;
                let w = t.weight[s];
                if w == 0.0 {
                    continue;
                }
                let e = t.support[s] as usize;
                let b = (t.bin[s] as usize + 2 * nt - j + l) % nt;
                let fr = t.frac[s];
                let lo = phi.at(e, b);
                let hi = phi.at(e, (b + 1) % nt);
                for ch in 0..c {
                    dst[ch] += w * (lo[ch] + fr * (hi[ch] - lo[ch]));
                }
            }
        }
    }
}

/// Directional convolution with the evaluation direction transported instead of the
/// radial one. On a flat domain every bin then evolves as an ordinary convolution
/// with the kernel rotated to that bin.
pub fn dir_conv_fixed(phi: &DirectionalSignal, k: &PolarKernel, t: &WindowTensors) -> Result<DirectionalSignal> {
    check_directional(phi, t)?;
    check_kernel(k, t, phi.channels)?;
    let (nr, nt, ci, co) = (k.n_rho, k.n_theta, k.c_in, k.c_out);
    let mut out = DirectionalSignal::zeros(phi.n_vertices, nt, co);
    out.data.par_chunks_mut(nt * co).enumerate().for_each(|(v, dst)| {
        let mut buf = vec![0.0; nr * nt * ci];
        for l in 0..nt {
            fixed_window(phi, t, v, l, &mut buf);
            let acc = &mut dst[l * co..(l + 1) * co];
            for i in 0..nr {
                for j in 0..nt {
                    let kj = (j + nt - l) % nt;
                    let base = (i * nt + kj) * ci * co;
                    for p in 0..ci {
                        let a = buf[(i * nt + j) * ci + p];
                        if a == 0.0 {
                            continue;
                        }
                        for q in 0..co {
                            acc[q] += a * k.data[base + p * co + q];
                        }
                    }
                }
            }
        }
    });
    Ok(out)
}

/// Gradients of [`dir_conv_fixed`] with respect to `φ` and `K`.
pub fn dir_conv_fixed_backward(
    phi: &DirectionalSignal,
    k: &PolarKernel,
    t: &WindowTensors,
    g: &DirectionalSignal,
) -> (DirectionalSignal, PolarKernel) {
    let (nr, nt, ci, co) = (k.n_rho, k.n_theta, k.c_in, k.c_out);
    let mut g_phi = DirectionalSignal::zeros(phi.n_vertices, nt, ci);
    let mut g_k = PolarKernel::zeros(nr, nt, ci, co);
    let mut buf = vec![0.0; nr * nt * ci];
    let mut gbuf = vec![0.0; nr * nt * ci];
    for v in 0..phi.n_vertices {
        for l in 0..nt {
            let go = g.at(v, l);
            if go.iter().all(|&x| x == 0.0) {
                continue;
            }
            fixed_window(phi, t, v, l, &mut buf);
            for i in 0..nr {
                for j in 0..nt {
                    let kj = (j + nt - l) % nt;
                    let base = (i * nt + kj) * ci * co;
                    for p in 0..ci {
                        let mut s = 0.0;
                        for q in 0..co {
                            s += go[q] * k.data[base + p * co + q];
                            g_k.data[base + p * co + q] += buf[(i * nt + j) * ci + p] * go[q];
                        }
                        gbuf[(i * nt + j) * ci + p] = s;
                    }
                }
            }
            // scatter the window gradient back through the interpolation
            for i in 0..nr {
                for j in 0..nt {
                    let p = t.point(v, i, j);
                    if !t.valid[p] {
                        continue;
                    }
                    let src = &gbuf[(i * nt + j) * ci..(i * nt + j + 1) * ci];
                    for m in 0..3 {
                        let s = 3 * p + m;
                        let w = t.weight[s];
                        if w == 0.0 {
                            continue;
                        }
                        let e = t.support[s] as usize;
                        let b = (t.bin[s] as usize + 2 * nt - j + l) % nt;
                        let fr = t.frac[s];
                        let lo = g_phi.idx(e, b, 0);
                        let hi = g_phi.idx(e, (b + 1) % nt, 0);
                        for ch in 0..ci {
                            g_phi.data[lo + ch] += w * (1.0 - fr) * src[ch];
                            g_phi.data[hi + ch] += w * fr * src[ch];
                        }
                    }
                }
            }
        }
    }
    (g_phi, g_k)
}

/// Writes a signal as CSV, one row per vertex.
pub fn write_signal_csv<W: Write>(f: &Signal, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string()];
    header.extend((0..f.channels).map(|c| format!("c{c}")));
    w.write_record(&header)?;
    for v in 0..f.n_vertices {
        let mut rec = vec![v.to_string()];
        rec.extend(f.row(v).iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a signal written by [`write_signal_csv`] (or any CSV with a header row whose
/// first column is the vertex index).
pub fn read_signal_csv<R: Read>(input: R) -> Result<Signal> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| mismatch(format!("row {}: bad {what}", line + 2));
        let v: usize = rec.get(0).ok_or_else(|| bad("vertex"))?.trim().parse().map_err(|_| bad("vertex"))?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("value")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((v, vals));
    }
    let channels = rows.first().map_or(0, |r| r.1.len());
    let n = rows.len();
    let mut data = vec![0.0; n * channels];
    let mut seen = vec![false; n];
    for (v, vals) in rows {
        if v >= n || seen[v] || vals.len() != channels {
            return Err(mismatch(format!("vertex rows must be 0..{n} with {channels} values each")));
        }
        seen[v] = true;
        data[v * channels..(v + 1) * channels].copy_from_slice(&vals);
    }
    Signal::from_vec(n, channels, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpc::{compute_all_gpc, DEFAULT_EPS};
    use crate::mesh::{primitives, TriangleMesh};
    use crate::windows::{build_windows, WindowSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(mesh: TriangleMesh, n_rho: usize, n_theta: usize, radius: f64) -> (TriangleMesh, WindowTensors) {
        let gpcs = compute_all_gpc(&mesh, 1.5 * radius, DEFAULT_EPS).unwrap();
        let t = build_windows(&mesh, &gpcs, WindowSpec::new(n_rho, n_theta, radius).unwrap()).unwrap();
        (mesh, t)
    }

    fn grid() -> (TriangleMesh, WindowTensors) {
        setup(primitives::grid(13, 13, 1.0), 2, 8, 2.5)
    }

    fn sphere() -> (TriangleMesh, WindowTensors) {
        setup(primitives::noisy_icosphere(2, 0.03, 1), 2, 6, 0.5)
    }

    fn random_kernel(rng: &mut ChaCha8Rng, t: &WindowTensors, ci: usize, co: usize) -> PolarKernel {
        PolarKernel::from_fn(t.spec.n_rho, t.spec.n_theta, ci, co, |_, _, _, _| rng.gen_range(-1.0..1.0))
    }

    fn random_dir(rng: &mut ChaCha8Rng, n: usize, nt: usize, c: usize) -> DirectionalSignal {
        DirectionalSignal::from_fn(n, nt, c, |_, _, _| rng.gen_range(-1.0..1.0))
    }

    fn random_params(rng: &mut ChaCha8Rng, t: &WindowTensors, ci: usize, co: usize, act: Activation) -> LayerParams {
        LayerParams {
            kernel: random_kernel(rng, t, ci, co),
            central: (0..ci * co).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            bias: (0..co).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            activation: act,
            normalize: false,
        }
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn interior(mesh: &TriangleMesh, t: &WindowTensors, v: usize) -> bool {
        // windows and all their supporting vertices away from the boundary
        t.invalid_count(v) == 0
            && (0..t.spec.points_per_window() * 3)
                .all(|s| !mesh.is_boundary_vertex(t.support[v * t.spec.points_per_window() * 3 + s] as usize))
    }

    #[test]
    fn lift_is_constant_over_bins() {
        let f = Signal::from_fn(5, 2, |v, c| (v * 3 + c) as f64 - 4.0);
        let phi = lift(&f, 6);
        for v in 0..5 {
            for b in 0..6 {
                assert_eq!(phi.at(v, b), f.row(v));
            }
        }
        let pos = Signal::from_fn(5, 2, |v, c| (v + c) as f64);
        assert_eq!(angular_max_pool(&lift(&pos, 6)).0, pos);
    }

    #[test]
    fn pull_back_of_indicator_is_barycentric_weight() {
        let (_, t) = sphere();
        let w = 17;
        let f = Signal::from_fn(t.n_vertices, 1, |v, _| if v == w { 1.0 } else { 0.0 });
        let pb = pull_back(&f, &t).unwrap();
        for p in 0..t.n_points() {
            let expected: f64 =
                (0..3).filter(|&m| t.support[3 * p + m] as usize == w).map(|m| t.weight[3 * p + m]).sum();
            assert_eq!(pb.data[p], expected);
        }
    }

    #[test]
    fn pull_back_of_constant_vanishes_only_at_invalid_points() {
        let (_, t) = grid();
        let f = Signal::from_fn(t.n_vertices, 1, |_, _| 2.5);
        let pb = pull_back(&f, &t).unwrap();
        for p in 0..t.n_points() {
            let want = if t.valid[p] { 2.5 } else { 0.0 };
            assert!((pb.data[p] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pull_back_of_linear_function_on_flat_grid() {
        let (mesh, t) = grid();
        let f = Signal::from_fn(mesh.n_vertices(), 1, |v, _| mesh.position(v)[0]);
        let pb = pull_back(&f, &t).unwrap();
        for v in 0..mesh.n_vertices() {
            let d = mesh.reference_direction(v);
            let offset = d[1].atan2(d[0]);
            for i in 0..2 {
                for j in 0..8 {
                    if !t.valid[t.point(v, i, j)] || mesh.is_boundary_vertex(v) {
                        continue;
                    }
                    let want = mesh.position(v)[0] + t.spec.rho(i) * (t.spec.theta(j) + offset).cos();
                    assert!((pb.get(v, i, j, 0) - want).abs() < 1e-3, "v {v} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn dir_pull_back_of_lift_equals_pull_back_exactly() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Signal::from_fn(t.n_vertices, 3, |_, _| rng.gen_range(-1.0..1.0));
        assert_eq!(dir_pull_back(&lift(&f, 6), &t).unwrap(), pull_back(&f, &t).unwrap());
    }

    #[test]
    fn dir_pull_back_of_one_hot_bin_on_flat_grid() {
        let (mesh, t) = grid();
        let hot = 3;
        let phi = DirectionalSignal::from_fn(t.n_vertices, 8, 1, |_, b, _| if b == hot { 1.0 } else { 0.0 });
        let pb = dir_pull_back(&phi, &t).unwrap();
        for v in (0..mesh.n_vertices()).filter(|&v| interior(&mesh, &t, v)) {
            for i in 0..2 {
                for j in 0..8 {
                    let want = if j == hot { 1.0 } else { 0.0 };
                    assert!((pb.get(v, i, j, 0) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fractional_bin_interpolates_linearly() {
        let (_, mut t) = setup(primitives::icosphere(1), 1, 4, 0.6);
        let p = t.point(0, 0, 0);
        for m in 0..3 {
            t.bin[3 * p + m] = 1;
            t.frac[3 * p + m] = 0.25;
        }
        let phi = DirectionalSignal::from_fn(t.n_vertices, 4, 1, |_, b, _| if b == 2 { 1.0 } else { 0.0 });
        let pb = dir_pull_back(&phi, &t).unwrap();
        assert!((pb.data[p] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dir_conv_with_zero_kernel_is_zero() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_dir(&mut rng, t.n_vertices, 6, 2);
        let out = dir_conv(&phi, &PolarKernel::zeros(2, 6, 2, 3), &t).unwrap();
        assert!(out.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn all_ones_kernel_counts_valid_points() {
        let (_, t) = grid();
        let phi = DirectionalSignal::from_fn(t.n_vertices, 8, 1, |_, _, _| 1.5);
        let k = PolarKernel::from_fn(2, 8, 1, 1, |_, _, _, _| 1.0);
        let out = dir_conv(&phi, &k, &t).unwrap();
        for v in 0..t.n_vertices {
            let valid = (16 - t.invalid_count(v)) as f64;
            for l in 0..8 {
                assert!((out.get(v, l, 0) - 1.5 * valid).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatches_are_reported() {
        let (_, t) = grid();
        let phi = DirectionalSignal::zeros(t.n_vertices, 8, 2);
        assert!(matches!(dir_conv(&phi, &PolarKernel::zeros(2, 8, 3, 1), &t), Err(ConvError::ShapeMismatch(_))));
        assert!(matches!(dir_conv(&phi, &PolarKernel::zeros(3, 8, 2, 1), &t), Err(ConvError::ShapeMismatch(_))));
        let short = DirectionalSignal::zeros(4, 8, 2);
        assert!(dir_pull_back(&short, &t).is_err());
        assert!(pull_back(&Signal::zeros(4, 1), &t).is_err());
    }

    #[test]
    fn geodesic_conv_is_max_of_directional_conv_of_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (_, t) in [grid(), sphere()] {
            let f = Signal::from_fn(t.n_vertices, 2, |_, _| rng.gen_range(-1.0..1.0));
            let k = random_kernel(&mut rng, &t, 2, 3);
            let a = geodesic_conv(&f, &k, &t).unwrap();
            let b = angular_max_pool(&dir_conv(&lift(&f, t.spec.n_theta), &k, &t).unwrap()).0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn symmetric_kernel_makes_rotation_irrelevant() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Signal::from_fn(t.n_vertices, 1, |_, _| rng.gen_range(-1.0..1.0));
        let k = PolarKernel::from_fn(2, 6, 1, 1, |i, _, _, _| [0.7, -0.3][i]);
        let g = geodesic_conv(&f, &k, &t).unwrap();
        let d = dir_conv(&lift(&f, 6), &k, &t).unwrap();
        for v in 0..t.n_vertices {
            for l in 0..6 {
                assert!((d.get(v, l, 0) - g.get(v, 0)).abs() < 1e-12);
            }
        }
        assert!(geodesic_conv(&Signal::zeros(t.n_vertices, 1), &k, &t).unwrap().data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn max_pool_ties_pick_lowest_bin() {
        let phi = DirectionalSignal::from_fn(1, 4, 2, |_, b, c| if c == 0 { [0.0, 5.0, 0.0, 5.0][b] } else { 1.0 });
        let (m, arg) = angular_max_pool(&phi);
        assert_eq!(m.data, vec![5.0, 1.0]);
        assert_eq!(arg, vec![1, 0]);
    }

    #[test]
    fn dir_layer_trivial_parameters() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_dir(&mut rng, t.n_vertices, 6, 2);
        let mut p = LayerParams::zeros(2, 6, 2, 2, Activation::Identity);
        p.central = vec![1.0, 0.0, 0.0, 1.0];
        assert_eq!(dir_layer(&phi, &p, &t).unwrap(), phi);
        let mut q = LayerParams::zeros(2, 6, 2, 2, Activation::Relu);
        q.bias = vec![-0.1, -2.0];
        assert!(dir_layer(&phi, &q, &t).unwrap().data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dir_layer_matches_manual_composition() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let phi = random_dir(&mut rng, t.n_vertices, 6, 3);
        let p = random_params(&mut rng, &t, 3, 2, Activation::Tanh);
        let conv = dir_conv(&phi, &p.kernel, &t).unwrap();
        let out = dir_layer(&phi, &p, &t).unwrap();
        for v in 0..t.n_vertices {
            for b in 0..6 {
                for q in 0..2 {
                    let mut x = conv.get(v, b, q) + p.bias[q];
                    for c in 0..3 {
                        x += phi.get(v, b, c) * p.central[c * 2 + q];
                    }
                    assert!((out.get(v, b, q) - x.tanh()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gc_layer_relations() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = Signal::from_fn(t.n_vertices, 3, |_, _| rng.gen_range(-1.0..1.0));
        for act in [Activation::Relu, Activation::Tanh, Activation::Identity] {
            let p = random_params(&mut rng, &t, 3, 4, act);
            let a = gc_layer(&f, &p, &t).unwrap();
            let b = angular_max_pool(&dir_layer(&lift(&f, 6), &p, &t).unwrap()).0;
            assert!(max_abs_diff(&a.data, &b.data) < 1e-12);
            let raw = angular_max_pool(&dir_layer_preactivation(&lift(&f, 6), &p, &t).unwrap()).0;
            let c: Vec<f64> = raw.data.iter().map(|&x| act.apply(x)).collect();
            assert!(max_abs_diff(&a.data, &c) < 1e-12);
        }
        let mut p = random_params(&mut rng, &t, 3, 2, Activation::Tanh);
        p.kernel = PolarKernel::zeros(2, 6, 3, 2);
        let out = gc_layer(&f, &p, &t).unwrap();
        for v in 0..t.n_vertices {
            for q in 0..2 {
                let x: f64 = p.bias[q] + (0..3).map(|c| f.get(v, c) * p.central[c * 2 + q]).sum::<f64>();
                assert!((out.get(v, q) - x.tanh()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_variant_agrees_on_lifted_signals() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Signal::from_fn(t.n_vertices, 2, |_, _| rng.gen_range(-1.0..1.0));
        let k = random_kernel(&mut rng, &t, 2, 2);
        let phi = lift(&f, 6);
        let a = dir_conv_fixed(&phi, &k, &t).unwrap();
        let b = dir_conv(&phi, &k, &t).unwrap();
        assert!(max_abs_diff(&a.data, &b.data) < 1e-12);
        let z = dir_conv_fixed(&phi, &PolarKernel::zeros(2, 6, 2, 2), &t).unwrap();
        assert!(z.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fixed_variant_keeps_bins_separate_on_flat_grid() {
        // with a bin-dependent input each output bin only reads the same input bin
        let (mesh, t) = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = random_kernel(&mut rng, &t, 1, 1);
        let phi = random_dir(&mut rng, t.n_vertices, 8, 1);
        let out = dir_conv_fixed(&phi, &k, &t).unwrap();
        for hot in [0, 5] {
            let masked =
                DirectionalSignal::from_fn(t.n_vertices, 8, 1, |v, b, c| if b == hot { phi.get(v, b, c) } else { 0.0 });
            let o = dir_conv_fixed(&masked, &k, &t).unwrap();
            for v in (0..mesh.n_vertices()).filter(|&v| interior(&mesh, &t, v)) {
                assert!((o.get(v, hot, 0) - out.get(v, hot, 0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotating_a_reference_permutes_layer_outputs() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let phi = random_dir(&mut rng, t.n_vertices, 6, 2);
        let p = random_params(&mut rng, &t, 2, 3, Activation::Relu);
        let out = dir_layer(&phi, &p, &t).unwrap();
        for (v, k) in [(0, 1), (40, 3), (100, 5)] {
            let t2 = t.rotate_reference(v, k);
            let out2 = dir_layer(&phi.rotate_vertex(v, k), &p, &t2).unwrap();
            assert!(max_abs_diff(&out2.data, &out.rotate_vertex(v, k).data) < 1e-12);
        }
    }

    #[test]
    fn adjoints_satisfy_inner_product_identities() {
        let (_, t) = sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = random_dir(&mut rng, t.n_vertices, 6, 2);
        let pb = dir_pull_back(&phi, &t).unwrap();
        let g = WindowSignal { data: pb.data.iter().map(|_| rng.gen_range(-1.0..1.0)).collect(), ..pb.clone() };
        let adj = dir_pull_back_adjoint(&g, &t);
        assert!((dot(&pb.data, &g.data) - dot(&phi.data, &adj.data)).abs() < 1e-9);

        let k = random_kernel(&mut rng, &t, 2, 3);
        let out = contract(&pb, &k);
        let go = random_dir(&mut rng, t.n_vertices, 6, 3);
        let (g_pb, g_k) = contract_backward(&pb, &k, &go);
        let lhs = dot(&out.data, &go.data);
        assert!((lhs - dot(&pb.data, &g_pb.data)).abs() < 1e-9 * lhs.abs().max(1.0));
        assert!((lhs - dot(&k.data, &g_k.data)).abs() < 1e-9 * lhs.abs().max(1.0));

        let fo = dir_conv_fixed(&phi, &k, &t).unwrap();
        let (g_phi, g_kf) = dir_conv_fixed_backward(&phi, &k, &t, &go);
        let lhs = dot(&fo.data, &go.data);
        assert!((lhs - dot(&phi.data, &g_phi.data)).abs() < 1e-9 * lhs.abs().max(1.0));
        assert!((lhs - dot(&k.data, &g_kf.data)).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn normalization_rescales_truncated_windows() {
        let (_, t) = grid();
        let f = Signal::from_fn(t.n_vertices, 1, |_, _| 1.0);
        let mut pb = pull_back(&f, &t).unwrap();
        normalize_windows(&mut pb, &t);
        for v in 0..t.n_vertices {
            let s: f64 = pb.data[v * 16..(v + 1) * 16].iter().sum();
            assert!((s - 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = Signal::from_fn(4, 3, |v, c| v as f64 * 0.5 - c as f64 / 3.0);
        let mut buf = Vec::new();
        write_signal_csv(&f, &mut buf).unwrap();
        assert_eq!(read_signal_csv(buf.as_slice()).unwrap(), f);
        assert!(read_signal_csv("vertex,c0\n0,1\n0,2\n".as_bytes()).is_err());
        assert!(read_signal_csv("vertex,c0\n0,x\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn dir_conv_is_bilinear(seed in 0u64..1000, alpha in -2.0f64..2.0) {
            let (_, t) = setup(primitives::icosphere(1), 1, 4, 0.7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_dir(&mut rng, t.n_vertices, 4, 2);
            let b = random_dir(&mut rng, t.n_vertices, 4, 2);
            let k1 = random_kernel(&mut rng, &t, 2, 2);
            let k2 = random_kernel(&mut rng, &t, 2, 2);
            let mix = DirectionalSignal { data: a.data.iter().zip(&b.data).map(|(x, y)| alpha * x + y).collect(), ..a.clone() };
            let lhs = dir_conv(&mix, &k1, &t).unwrap();
            let ca = dir_conv(&a, &k1, &t).unwrap();
            let cb = dir_conv(&b, &k1, &t).unwrap();
            let rhs: Vec<f64> = ca.data.iter().zip(&cb.data).map(|(x, y)| alpha * x + y).collect();
            prop_assert!(max_abs_diff(&lhs.data, &rhs) < 1e-12);

            let kmix = PolarKernel { data: k1.data.iter().zip(&k2.data).map(|(x, y)| alpha * x + y).collect(), ..k1.clone() };
            let lhs = dir_conv(&a, &kmix, &t).unwrap();
            let c2 = dir_conv(&a, &k2, &t).unwrap();
            let rhs: Vec<f64> = ca.data.iter().zip(&c2.data).map(|(x, y)| alpha * x + y).collect();
            prop_assert!(max_abs_diff(&lhs.data, &rhs) < 1e-12);
        }

        #[test]
        fn max_pool_ignores_bin_rotation(vals in proptest::collection::vec(-5.0f64..5.0, 8), k in 0usize..8) {
            let phi = DirectionalSignal { n_vertices: 1, n_theta: 8, channels: 1, data: vals };
            let (m, arg) = angular_max_pool(&phi);
            let (m2, arg2) = angular_max_pool(&phi.rotate_vertex(0, k));
            prop_assert_eq!(m, m2);
            prop_assert_eq!(phi.get(0, arg[0] as usize, 0), phi.get(0, (arg2[0] as usize + k) % 8, 0));
        }
    }
}
