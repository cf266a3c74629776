//! Layer graphs over multi-resolution window tensors, with manual reverse mode.
//!
//! A [`Graph`] is a topologically ordered list of nodes; every node reads the output
//! of one earlier node (plus a skip node for residual additions). Activations are
//! either per-vertex signals or directional signals. [`Graph::forward`] records what
//! each node needs for its adjoint and [`Graph::backward`] walks the nodes in reverse.

pub mod arch;
pub mod checkpoint;
pub mod gradcheck;
pub mod pool;
pub mod train;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conv::{
    self, contract_backward, dir_pull_back_adjoint, lift, lift_adjoint, normalize_windows, Activation,
    DirectionalSignal, LayerParams, PolarKernel, Signal, WindowSignal,
};
use crate::windows::WindowTensors;
use pool::PoolMap;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Conv(#[from] conv::ConvError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("backward pass needs the context of a forward pass over the same graph")]
    MissingContext,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

pub type Result<T> = std::result::Result<T, NetworkError>;

fn mismatch(msg: impl Into<String>) -> NetworkError {
    NetworkError::ShapeMismatch(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Input,
    Lift,
    /// Directional layer on the windows of `level`, parameters `layers[param]`.
    Dir {
        level: usize,
        param: usize,
    },
    /// Geodesic layer (max over rotations inside) on the windows of `level`.
    Gc {
        level: usize,
        param: usize,
    },
    /// From `level` to `level + 1`.
    Pool {
        level: usize,
    },
    /// From `level + 1` to `level`.
    Unpool {
        level: usize,
    },
    Amp,
    Act(Activation),
    GlobalAverage,
    /// Per-row affine map with `dense[param]`.
    Dense {
        param: usize,
    },
    Softmax,
    /// Adds the output of node `skip`.
    Add {
        skip: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub op: Op,
    pub input: usize,
}

/// Row-major `in × out` weight and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub c_in: usize,
    pub c_out: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub layers: Vec<LayerParams>,
    pub dense: Vec<DenseParams>,
}

impl Params {
    /// All parameter buffers in a fixed order.
    pub fn buffers(&self) -> Vec<&Vec<f64>> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend([&l.kernel.data, &l.central, &l.bias]);
        }
        for d in &self.dense {
            out.extend([&d.weight, &d.bias]);
        }
        out
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.kernel.data);
            out.push(&mut l.central);
            out.push(&mut l.bias);
        }
        for d in &mut self.dense {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn zeros_like(&self) -> Params {
        let mut z = self.clone();
        for b in z.buffers_mut() {
            b.iter_mut().for_each(|x| *x = 0.0);
        }
        z
    }

    pub fn len(&self) -> usize {
        self.buffers().iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.buffers().into_iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let mut k = 0;
        for b in self.buffers_mut() {
            let n = b.len();
            b.copy_from_slice(&flat[k..k + n]);
            k += n;
        }
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, other: &Params, s: f64) {
        for (a, b) in self.buffers_mut().into_iter().zip(other.buffers()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
    }
}

/// Activation flowing along a graph edge.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Scalar(Signal),
    Dir(DirectionalSignal),
}

impl Tensor {
    pub fn as_scalar(&self) -> Result<&Signal> {
        match self {
            Tensor::Scalar(s) => Ok(s),
            Tensor::Dir(_) => Err(mismatch("expected a per-vertex signal, got a directional one")),
        }
    }

    pub fn as_dir(&self) -> Result<&DirectionalSignal> {
        match self {
            Tensor::Dir(d) => Ok(d),
            Tensor::Scalar(_) => Err(mismatch("expected a directional signal, got a per-vertex one")),
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            Tensor::Scalar(s) => &s.data,
            Tensor::Dir(d) => &d.data,
        }
    }

    pub fn data_mut(&mut self) -> &mut Vec<f64> {
        match self {
            Tensor::Scalar(s) => &mut s.data,
            Tensor::Dir(d) => &mut d.data,
        }
    }
}

/// Window tensors per resolution level and the maps between consecutive levels.
#[derive(Debug, Clone)]
pub struct Levels {
    pub windows: Vec<WindowTensors>,
    pub pools: Vec<PoolMap>,
}

impl Levels {
    pub fn n_theta(&self) -> usize {
        self.windows[0].spec.n_theta
    }

    pub fn n_vertices(&self, level: usize) -> usize {
        self.windows[level].n_vertices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Scalar,
    Dir,
}

/// Static shape of a node output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub kind: Kind,
    pub level: usize,
    /// `true` once the vertex axis has been averaged away.
    pub pooled: bool,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub in_channels: usize,
}

/// What a node keeps from the forward pass for its adjoint.
#[derive(Debug, Clone)]
enum Saved {
    None,
    Windows(WindowSignal),
    WindowsArg(WindowSignal, Vec<u32>),
    Arg(Vec<u32>),
}

/// Outputs and saved context of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    pub outputs: Vec<Tensor>,
    saved: Vec<Saved>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.outputs.last().expect("graph has nodes")
    }
}

impl Graph {
    pub fn new(in_channels: usize) -> Self {
        Graph { nodes: vec![Node { op: Op::Input, input: 0 }], in_channels }
    }

    /// Appends a node reading from `input` and returns its index.
    pub fn push(&mut self, op: Op, input: usize) -> usize {
        self.nodes.push(Node { op, input });
        self.nodes.len() - 1
    }

    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Checks that every node receives what it expects and returns all output shapes.
    pub fn infer_shapes(&self, params: &Params, levels: &Levels) -> Result<Vec<Shape>> {
        let mut shapes: Vec<Shape> = Vec::with_capacity(self.nodes.len());
        for (n, node) in self.nodes.iter().enumerate() {
            let err = |msg: String| Err(mismatch(format!("node {n} ({:?}): {msg}", node.op)));
            if n > 0 && node.input >= n {
                return err("input must precede the node".into());
            }
            let inp = if n > 0 {
                shapes[node.input]
            } else {
                Shape { kind: Kind::Scalar, level: 0, pooled: false, channels: self.in_channels }
            };
            let layer_shape = |level: usize, param: usize, kind: Kind| -> Result<Shape> {
                let p = params.layers.get(param).ok_or_else(|| mismatch(format!("node {n}: missing layer {param}")))?;
                let w = levels.windows.get(level).ok_or_else(|| mismatch(format!("node {n}: no level {level}")))?;
                if inp.kind != kind || inp.pooled || inp.level != level || inp.channels != p.c_in() {
                    return Err(mismatch(format!("node {n}: input {inp:?} does not fit layer {param}")));
                }
                if p.kernel.n_rho != w.spec.n_rho || p.kernel.n_theta != w.spec.n_theta {
                    return Err(mismatch(format!("node {n}: kernel grid differs from level {level} windows")));
                }
                p.check()?;
                Ok(Shape { channels: p.c_out(), ..inp })
            };
            let s = match &node.op {
                Op::Input => {
                    if n != 0 {
                        return err("input node must come first".into());
                    }
                    inp
                }
                Op::Lift => {
                    if inp.kind != Kind::Scalar || inp.pooled {
                        return err("lift needs a per-vertex signal".into());
                    }
                    Shape { kind: Kind::Dir, ..inp }
                }
                Op::Dir { level, param } => layer_shape(*level, *param, Kind::Dir)?,
                Op::Gc { level, param } => layer_shape(*level, *param, Kind::Scalar)?,
                Op::Pool { level } | Op::Unpool { level } => {
                    let (from, to) =
                        if matches!(node.op, Op::Pool { .. }) { (*level, level + 1) } else { (level + 1, *level) };
                    if inp.level != from || inp.pooled || *level >= levels.pools.len() {
                        return err(format!("expects level {from}, input is {inp:?}"));
                    }
                    Shape { level: to, ..inp }
                }
                Op::Amp => {
                    if inp.kind != Kind::Dir {
                        return err("amp needs a directional signal".into());
                    }
                    Shape { kind: Kind::Scalar, ..inp }
                }
                Op::Act(_) => inp,
                Op::GlobalAverage => {
                    if inp.kind != Kind::Scalar || inp.pooled {
                        return err("global average needs a per-vertex signal".into());
                    }
                    Shape { pooled: true, ..inp }
                }
                Op::Dense { param } => {
                    let d =
                        params.dense.get(*param).ok_or_else(|| mismatch(format!("node {n}: missing dense {param}")))?;
                    if inp.kind != Kind::Scalar || inp.channels != d.c_in {
                        return err(format!("dense {param} expects {} channels", d.c_in));
                    }
                    if d.weight.len() != d.c_in * d.c_out || d.bias.len() != d.c_out {
                        return err("dense parameter sizes".into());
                    }
                    Shape { channels: d.c_out, ..inp }
                }
                Op::Softmax => {
                    if inp.kind != Kind::Scalar {
                        return err("softmax needs a per-vertex or averaged signal".into());
                    }
                    inp
                }
                Op::Add { skip } => {
                    if *skip >= n || shapes[*skip] != inp {
                        return err(format!("skip {skip} does not match input shape {inp:?}"));
                    }
                    inp
                }
            };
            shapes.push(s);
        }
        Ok(shapes)
    }

    pub fn forward(&self, params: &Params, levels: &Levels, input: &Signal) -> Result<Trace> {
        if input.channels != self.in_channels {
            return Err(mismatch(format!("input has {} channels, graph expects {}", input.channels, self.in_channels)));
        }
        if input.n_vertices != levels.n_vertices(0) {
            return Err(mismatch(format!(
                "input has {} vertices, mesh has {}",
                input.n_vertices,
                levels.n_vertices(0)
            )));
        }
        let nt = levels.n_theta();
        let mut outputs: Vec<Tensor> = Vec::with_capacity(self.nodes.len());
        let mut saved = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let x = outputs.get(node.input);
            let (out, sv) = match &node.op {
                Op::Input => (Tensor::Scalar(input.clone()), Saved::None),
                Op::Lift => (Tensor::Dir(lift(x.unwrap().as_scalar()?, nt)), Saved::None),
                Op::Dir { level, param } => {
                    let p = &params.layers[*param];
                    let (mut pre, pb) = conv::dir_layer_traced(x.unwrap().as_dir()?, p, &levels.windows[*level])?;
                    pre.data.iter_mut().for_each(|v| *v = p.activation.apply(*v));
                    (Tensor::Dir(pre), Saved::Windows(pb))
                }
                Op::Gc { level, param } => {
                    let (out, pb, arg) = conv::gc_layer_traced(
                        x.unwrap().as_scalar()?,
                        &params.layers[*param],
                        &levels.windows[*level],
                    )?;
                    (Tensor::Scalar(out), Saved::WindowsArg(pb, arg))
                }
                Op::Pool { level } => {
                    let m = &levels.pools[*level];
                    let out = match x.unwrap() {
                        Tensor::Dir(d) => Tensor::Dir(pool::pool(d, m)?),
                        Tensor::Scalar(s) => Tensor::Scalar(pool::pool_scalar(s, m)?),
                    };
                    (out, Saved::None)
                }
                Op::Unpool { level } => {
                    let m = &levels.pools[*level];
                    let out = match x.unwrap() {
                        Tensor::Dir(d) => Tensor::Dir(pool::unpool(d, m)?),
                        Tensor::Scalar(s) => Tensor::Scalar(pool::unpool_scalar(s, m)?),
                    };
                    (out, Saved::None)
                }
                Op::Amp => {
                    let (s, arg) = conv::angular_max_pool(x.unwrap().as_dir()?);
                    (Tensor::Scalar(s), Saved::Arg(arg))
                }
                Op::Act(a) => {
                    let mut t = x.unwrap().clone();
                    t.data_mut().iter_mut().for_each(|v| *v = a.apply(*v));
                    (t, Saved::None)
                }
                Op::GlobalAverage => {
                    let s = x.unwrap().as_scalar()?;
                    let mut out = Signal::zeros(1, s.channels);
                    for v in 0..s.n_vertices {
                        for c in 0..s.channels {
                            out.data[c] += s.get(v, c);
                        }
                    }
                    out.data.iter_mut().for_each(|v| *v /= s.n_vertices as f64);
                    (Tensor::Scalar(out), Saved::None)
                }
                Op::Dense { param } => {
                    let d = &params.dense[*param];
                    let s = x.unwrap().as_scalar()?;
                    let mut out = Signal::zeros(s.n_vertices, d.c_out);
                    for v in 0..s.n_vertices {
                        let row = &mut out.data[v * d.c_out..(v + 1) * d.c_out];
                        row.copy_from_slice(&d.bias);
                        for p in 0..d.c_in {
                            let a = s.get(v, p);
                            for q in 0..d.c_out {
                                row[q] += a * d.weight[p * d.c_out + q];
                            }
                        }
                    }
                    (Tensor::Scalar(out), Saved::None)
                }
                Op::Softmax => {
                    let mut s = x.unwrap().as_scalar()?.clone();
                    for row in s.data.chunks_mut(s.channels) {
                        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        row.iter_mut().for_each(|v| *v = (*v - m).exp());
                        let z: f64 = row.iter().sum();
                        row.iter_mut().for_each(|v| *v /= z);
                    }
                    (Tensor::Scalar(s), Saved::None)
                }
                Op::Add { skip } => {
                    let mut t = x.unwrap().clone();
                    let other = outputs[*skip].data();
                    t.data_mut().iter_mut().zip(other).for_each(|(a, b)| *a += b);
                    (t, Saved::None)
                }
            };
            outputs.push(out);
            saved.push(sv);
        }
        Ok(Trace { outputs, saved })
    }

    /// Gradients of a scalar objective with respect to the parameters and the input,
    /// given its gradient `g_out` with respect to the graph output.
    pub fn backward(&self, params: &Params, levels: &Levels, trace: &Trace, g_out: Tensor) -> Result<(Params, Signal)> {
        if trace.outputs.len() != self.nodes.len() {
            return Err(NetworkError::MissingContext);
        }
        let mut grads = params.zeros_like();
        let mut g: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        g[self.last()] = Some(g_out);
        let accumulate = |slot: &mut Option<Tensor>, t: Tensor| match slot {
            Some(existing) => existing.data_mut().iter_mut().zip(t.data()).for_each(|(a, b)| *a += b),
            None => *slot = Some(t),
        };
        for n in (1..self.nodes.len()).rev() {
            let Some(gy) = g[n].take() else { continue };
            let node = &self.nodes[n];
            let x = &trace.outputs[node.input];
            let y = &trace.outputs[n];
            let gx: Tensor = match (&node.op, &trace.saved[n]) {
                (Op::Lift, _) => Tensor::Scalar(lift_adjoint(gy.as_dir()?)),
                (Op::Dir { level, param }, Saved::Windows(pb)) => {
                    let p = &params.layers[*param];
                    let t = &levels.windows[*level];
                    let phi = x.as_dir()?;
                    let mut g_pre = gy.as_dir()?.clone();
                    g_pre
                        .data
                        .iter_mut()
                        .zip(&y.as_dir()?.data)
                        .for_each(|(gv, yv)| *gv *= p.activation.derivative_from_output(*yv));
                    let (mut g_pb, g_k) = contract_backward(pb, &p.kernel, &g_pre);
                    if p.normalize {
                        normalize_windows(&mut g_pb, t);
                    }
                    let mut g_phi = dir_pull_back_adjoint(&g_pb, t);
                    central_backward(&phi.data, &g_pre.data, p, &mut g_phi.data, &mut grads.layers[*param]);
                    add_into(&mut grads.layers[*param].kernel, &g_k);
                    Tensor::Dir(g_phi)
                }
                (Op::Gc { level, param }, Saved::WindowsArg(pb, arg)) => {
                    let p = &params.layers[*param];
                    let t = &levels.windows[*level];
                    let f = x.as_scalar()?;
                    let ys = y.as_scalar()?;
                    let gs = gy.as_scalar()?;
                    let nt = t.spec.n_theta;
                    let mut g_pre = DirectionalSignal::zeros(f.n_vertices, nt, p.c_out());
                    for v in 0..f.n_vertices {
                        for q in 0..p.c_out() {
                            let k = v * p.c_out() + q;
                            let at = g_pre.idx(v, arg[k] as usize, q);
                            g_pre.data[at] = gs.data[k] * p.activation.derivative_from_output(ys.data[k]);
                        }
                    }
                    let (mut g_pb, g_k) = contract_backward(pb, &p.kernel, &g_pre);
                    if p.normalize {
                        normalize_windows(&mut g_pb, t);
                    }
                    let mut g_lift = dir_pull_back_adjoint(&g_pb, t);
                    let lifted = lift(f, nt);
                    central_backward(&lifted.data, &g_pre.data, p, &mut g_lift.data, &mut grads.layers[*param]);
                    add_into(&mut grads.layers[*param].kernel, &g_k);
                    Tensor::Scalar(lift_adjoint(&g_lift))
                }
                (Op::Pool { level }, _) => {
                    let m = &levels.pools[*level];
                    match gy {
                        Tensor::Dir(d) => Tensor::Dir(pool::pool_adjoint(&d, m)),
                        Tensor::Scalar(s) => Tensor::Scalar(pool::pool_scalar_adjoint(&s, m)),
                    }
                }
                (Op::Unpool { level }, _) => {
                    let m = &levels.pools[*level];
                    match gy {
                        Tensor::Dir(d) => Tensor::Dir(pool::unpool_adjoint(&d, m)),
                        Tensor::Scalar(s) => Tensor::Scalar(pool::unpool_scalar_adjoint(&s, m)),
                    }
                }
                (Op::Amp, Saved::Arg(arg)) => {
                    Tensor::Dir(conv::angular_max_pool_backward(gy.as_scalar()?, arg, x.as_dir()?.n_theta))
                }
                (Op::Act(a), _) => {
                    let mut t = gy;
                    t.data_mut().iter_mut().zip(y.data()).for_each(|(gv, yv)| *gv *= a.derivative_from_output(*yv));
                    t
                }
                (Op::GlobalAverage, _) => {
                    let s = x.as_scalar()?;
                    let gs = gy.as_scalar()?;
                    let inv = 1.0 / s.n_vertices as f64;
                    Tensor::Scalar(Signal::from_fn(s.n_vertices, s.channels, |_, c| gs.data[c] * inv))
                }
                (Op::Dense { param }, _) => {
                    let d = &params.dense[*param];
                    let s = x.as_scalar()?;
                    let gs = gy.as_scalar()?;
                    let gd = &mut grads.dense[*param];
                    let mut gx = Signal::zeros(s.n_vertices, d.c_in);
                    for v in 0..s.n_vertices {
                        let go = gs.row(v);
                        for q in 0..d.c_out {
                            gd.bias[q] += go[q];
                        }
                        for p in 0..d.c_in {
                            let a = s.get(v, p);
                            let mut acc = 0.0;
                            for q in 0..d.c_out {
                                acc += go[q] * d.weight[p * d.c_out + q];
                                gd.weight[p * d.c_out + q] += a * go[q];
                            }
                            gx.data[v * d.c_in + p] = acc;
                        }
                    }
                    Tensor::Scalar(gx)
                }
                (Op::Softmax, _) => {
                    let ys = y.as_scalar()?;
                    let mut gs = gy.as_scalar()?.clone();
                    let c = ys.channels;
                    for v in 0..ys.n_vertices {
                        let p = ys.row(v);
                        let row = &mut gs.data[v * c..(v + 1) * c];
                        let s: f64 = row.iter().zip(p).map(|(a, b)| a * b).sum();
                        row.iter_mut().zip(p).for_each(|(gv, pv)| *gv = pv * (*gv - s));
                    }
                    Tensor::Scalar(gs)
                }
                (Op::Add { skip }, _) => {
                    accumulate(&mut g[*skip], gy.clone());
                    gy
                }
                _ => return Err(NetworkError::MissingContext),
            };
            accumulate(&mut g[node.input], gx);
        }
        let g_in = match g[0].take() {
            Some(Tensor::Scalar(s)) => s,
            _ => Signal::zeros(trace.outputs[0].as_scalar()?.n_vertices, self.in_channels),
        };
        Ok((grads, g_in))
    }
}

fn add_into(dst: &mut PolarKernel, src: &PolarKernel) {
    dst.data.iter_mut().zip(&src.data).for_each(|(a, b)| *a += b);
}

/// Adjoint of the per-row central term `x C + B`, rows of `x` and `g` in lockstep.
fn central_backward(x: &[f64], g: &[f64], p: &LayerParams, g_x: &mut [f64], grads: &mut LayerParams) {
    let (ci, co) = (p.c_in(), p.c_out());
    for (r, go) in g.chunks(co).enumerate() {
        let xr = &x[r * ci..(r + 1) * ci];
        for q in 0..co {
            grads.bias[q] += go[q];
        }
        for k in 0..ci {
            let cr = &p.central[k * co..(k + 1) * co];
            let mut acc = 0.0;
            for q in 0..co {
                acc += go[q] * cr[q];
            }
            g_x[r * ci + k] += acc;
            let a = xr[k];
            if a != 0.0 {
                let gc = &mut grads.central[k * co..(k + 1) * co];
                for q in 0..co {
                    gc[q] += a * go[q];
                }
            }
        }
    }
}

/// Layer parameters drawn from `N(0, 2 / (n_rho n_theta in + in))`, zero bias.
pub fn init_layer<R: Rng>(
    rng: &mut R,
    n_rho: usize,
    n_theta: usize,
    c_in: usize,
    c_out: usize,
    activation: Activation,
) -> LayerParams {
    let fan_in = (n_rho * n_theta * c_in + c_in) as f64;
    let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive variance");
    let mut p = LayerParams::zeros(n_rho, n_theta, c_in, c_out, activation);
    p.kernel.data.iter_mut().for_each(|x| *x = normal.sample(rng));
    p.central.iter_mut().for_each(|x| *x = normal.sample(rng));
    p
}

/// Dense parameters drawn from `N(0, 1 / in)`, zero bias.
pub fn init_dense<R: Rng>(rng: &mut R, c_in: usize, c_out: usize) -> DenseParams {
    let normal = Normal::new(0.0, (1.0 / c_in as f64).sqrt()).expect("positive variance");
    DenseParams { c_in, c_out, weight: (0..c_in * c_out).map(|_| normal.sample(rng)).collect(), bias: vec![0.0; c_out] }
}

/// Mean cross-entropy of probability rows against labels, and its gradient.
pub fn cross_entropy(probs: &Signal, labels: &[usize]) -> Result<(f64, Signal)> {
    if labels.len() != probs.n_vertices {
        return Err(mismatch(format!("{} labels for {} output rows", labels.len(), probs.n_vertices)));
    }
    let rows = probs.n_vertices as f64;
    let mut g = Signal::zeros(probs.n_vertices, probs.channels);
    let mut loss = 0.0;
    for (v, &y) in labels.iter().enumerate() {
        if y >= probs.channels {
            return Err(mismatch(format!("label {y} with {} classes", probs.channels)));
        }
        let p = probs.get(v, y).max(f64::MIN_POSITIVE);
        loss -= p.ln() / rows;
        g.data[v * probs.channels + y] = -1.0 / (p * rows);
    }
    Ok((loss, g))
}

/// Fraction of rows whose most probable class equals the label.
pub fn accuracy(probs: &Signal, labels: &[usize]) -> f64 {
    let hits = labels.iter().enumerate().filter(|&(v, &y)| argmax(probs.row(v)) == y).count();
    hits as f64 / labels.len().max(1) as f64
}

/// Index of the largest entry, lowest on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = k;
        }
    }
    best
}
