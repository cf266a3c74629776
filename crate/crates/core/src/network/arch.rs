//! ResNet and U-ResNet graphs over a pyramid of simplified meshes.
//!
//! Every stack after the first runs one level coarser (4× fewer vertices, window
//! radius doubled by the precompute step) with twice the filters. A block is two
//! convolution layers plus an identity shortcut followed by a ReLU.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{init_dense, init_layer, Graph, NetworkError, Op, Params, Result};
use crate::conv::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    Resnet,
    Uresnet,
}

/// Directional layers throughout, or geodesic layers with a max over rotations in
/// every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mdgcnn,
    Gcnn,
}

impl FromStr for ModelKind {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mdgcnn" => Ok(ModelKind::Mdgcnn),
            "gcnn" => Ok(ModelKind::Gcnn),
            _ => Err(NetworkError::ConfigInvalid(format!("unknown model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchConfig {
    pub arch: ArchKind,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    pub stacks: usize,
    pub blocks: usize,
    pub filters: usize,
    pub in_channels: usize,
    pub classes: usize,
    pub n_rho: usize,
    pub n_theta: usize,
}

fn default_model() -> ModelKind {
    ModelKind::Mdgcnn
}

impl ArchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NetworkError::ConfigInvalid(m.to_string()));
        if self.stacks == 0 {
            return bad("stacks must be at least 1");
        }
        if self.filters == 0 || self.in_channels == 0 {
            return bad("filters and in_channels must be positive");
        }
        if self.classes < 2 {
            return bad("classes must be at least 2");
        }
        if self.n_rho == 0 || self.n_theta < 2 {
            return bad("n_rho must be positive and n_theta at least 2");
        }
        Ok(())
    }

    /// Parses JSON, or `key = value` lines (`#` starts a comment).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        let cfg: ArchConfig = if trimmed.starts_with('{') {
            serde_json::from_str(text).map_err(|e| NetworkError::ConfigInvalid(e.to_string()))?
        } else {
            let mut map = serde_json::Map::new();
            for (ln, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| NetworkError::ConfigInvalid(format!("line {}: expected key = value", ln + 1)))?;
                let v = v.trim();
                let value = match v.parse::<u64>() {
                    Ok(n) => serde_json::Value::from(n),
                    Err(_) => serde_json::Value::from(v),
                };
                map.insert(k.trim().to_string(), value);
            }
            serde_json::from_value(serde_json::Value::Object(map))
                .map_err(|e| NetworkError::ConfigInvalid(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of mesh levels the graph touches.
    pub fn levels(&self) -> usize {
        self.stacks
    }

    pub fn build(&self, seed: u64) -> Result<(Graph, Params)> {
        match self.arch {
            ArchKind::Resnet => build_resnet(self, seed),
            ArchKind::Uresnet => build_uresnet(self, seed),
        }
    }
}

struct Builder<'a> {
    cfg: &'a ArchConfig,
    graph: Graph,
    params: Params,
    rng: ChaCha8Rng,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a ArchConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Builder {
            cfg,
            graph: Graph::new(cfg.in_channels),
            params: Params { layers: Vec::new(), dense: Vec::new() },
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn directional(&self) -> bool {
        self.cfg.model == ModelKind::Mdgcnn
    }

    fn layer(&mut self, x: usize, level: usize, c_in: usize, c_out: usize, act: Activation) -> usize {
        let p = init_layer(&mut self.rng, self.cfg.n_rho, self.cfg.n_theta, c_in, c_out, act);
        self.params.layers.push(p);
        let param = self.params.layers.len() - 1;
        let op = if self.directional() { Op::Dir { level, param } } else { Op::Gc { level, param } };
        self.graph.push(op, x)
    }

    fn block(&mut self, x: usize, level: usize, c: usize) -> usize {
        let a = self.layer(x, level, c, c, Activation::Relu);
        let b = self.layer(a, level, c, c, Activation::Identity);
        let s = self.graph.push(Op::Add { skip: x }, b);
        self.graph.push(Op::Act(Activation::Relu), s)
    }

    /// Stem and encoder stacks; returns the last node of every stack.
    fn encoder(&mut self) -> Vec<usize> {
        let mut x = 0;
        if self.directional() {
            x = self.graph.push(Op::Lift, x);
        }
        let mut c = self.cfg.filters;
        x = self.layer(x, 0, self.cfg.in_channels, c, Activation::Relu);
        let mut ends = Vec::new();
        for s in 0..self.cfg.stacks {
            if s > 0 {
                x = self.graph.push(Op::Pool { level: s - 1 }, x);
                x = self.layer(x, s, c, 2 * c, Activation::Relu);
                c *= 2;
            }
            for _ in 0..self.cfg.blocks {
                x = self.block(x, s, c);
            }
            ends.push(x);
        }
        ends
    }

    fn head(&mut self, mut x: usize) -> usize {
        if self.directional() {
            x = self.graph.push(Op::Amp, x);
        }
        x
    }

    fn dense(&mut self, x: usize, c_in: usize, c_out: usize) -> usize {
        let d = init_dense(&mut self.rng, c_in, c_out);
        self.params.dense.push(d);
        let param = self.params.dense.len() - 1;
        self.graph.push(Op::Dense { param }, x)
    }
}

/// Classification network: encoder, angular max pooling, average over the shape,
/// dense layer and softmax.
pub fn build_resnet(cfg: &ArchConfig, seed: u64) -> Result<(Graph, Params)> {
    let mut b = Builder::new(cfg, seed)?;
    let ends = b.encoder();
    let c = cfg.filters << (cfg.stacks - 1);
    let x = b.head(*ends.last().unwrap());
    let x = b.graph.push(Op::GlobalAverage, x);
    let x = b.dense(x, c, cfg.classes);
    b.graph.push(Op::Softmax, x);
    Ok((b.graph, b.params))
}

/// Segmentation network: encoder, then per stack un-pooling, a layer halving the
/// filters, an additive shortcut from the encoder at that level and the blocks;
/// per-vertex head with angular max pooling, dense layer and softmax.
pub fn build_uresnet(cfg: &ArchConfig, seed: u64) -> Result<(Graph, Params)> {
    let mut b = Builder::new(cfg, seed)?;
    let ends = b.encoder();
    let mut x = *ends.last().unwrap();
    let mut c = cfg.filters << (cfg.stacks - 1);
    for s in (0..cfg.stacks - 1).rev() {
        x = b.graph.push(Op::Unpool { level: s }, x);
        x = b.layer(x, s, c, c / 2, Activation::Relu);
        c /= 2;
        x = b.graph.push(Op::Add { skip: ends[s] }, x);
        x = b.graph.push(Op::Act(Activation::Relu), x);
        for _ in 0..cfg.blocks {
            x = b.block(x, s, c);
        }
    }
    let x = b.head(x);
    let x = b.dense(x, c, cfg.classes);
    b.graph.push(Op::Softmax, x);
    Ok((b.graph, b.params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpc::{compute_all_gpc, DEFAULT_EPS};
    use crate::mesh::{primitives, simplify, TriangleMesh};
    use crate::network::pool::PoolMap;
    use crate::network::{Kind, Levels, Tensor};
    use crate::windows::{build_windows, WindowSpec};

    fn cfg(arch: ArchKind, model: ModelKind, stacks: usize) -> ArchConfig {
        ArchConfig { arch, model, stacks, blocks: 1, filters: 4, in_channels: 2, classes: 3, n_rho: 2, n_theta: 4 }
    }

    pub(crate) fn levels(mesh: &TriangleMesh, n: usize, radius: f64, n_rho: usize, n_theta: usize) -> Levels {
        let mut meshes = vec![mesh.clone()];
        let mut pools = Vec::new();
        for _ in 1..n {
            let m = simplify(meshes.last().unwrap(), meshes.last().unwrap().n_vertices() / 4).unwrap();
            pools.push(PoolMap::new(&m, n_theta));
            meshes.push(m.coarse);
        }
        let windows = meshes
            .iter()
            .enumerate()
            .map(|(l, m)| {
                let r = radius * (1 << l) as f64;
                let g = compute_all_gpc(m, 1.5 * r, DEFAULT_EPS).unwrap();
                build_windows(m, &g, WindowSpec::new(n_rho, n_theta, r).unwrap()).unwrap()
            })
            .collect();
        Levels { windows, pools }
    }

    #[test]
    fn parses_json_and_key_value() {
        let a = ArchConfig::parse(
            r#"{"arch":"resnet","stacks":3,"blocks":1,"filters":16,"in_channels":1,"classes":10,"n_rho":2,"n_theta":8}"#,
        )
        .unwrap();
        let b = ArchConfig::parse(
            "# cifar-like\narch = resnet\nstacks = 3\nblocks = 1\nfilters = 16\nin_channels = 1\nclasses = 10\nn_rho = 2\nn_theta = 8\n",
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model, ModelKind::Mdgcnn);
        assert!(ArchConfig::parse("arch = resnet\nstacks = 0\n").is_err());
        assert!(ArchConfig::parse("arch = resnet\nbogus = 1\n").is_err());
    }

    #[test]
    fn three_stack_resnet_doubles_filters_per_stack() {
        let c = ArchConfig {
            stacks: 3,
            filters: 16,
            classes: 10,
            in_channels: 1,
            ..cfg(ArchKind::Resnet, ModelKind::Mdgcnn, 3)
        };
        let (g, p) = build_resnet(&c, 0).unwrap();
        let outs: Vec<usize> = p.layers.iter().map(|l| l.c_out()).collect();
        assert_eq!(outs, vec![16, 16, 16, 32, 32, 32, 64, 64, 64]);
        assert_eq!(g.nodes.iter().filter(|n| matches!(n.op, Op::Pool { .. })).count(), 2);
        assert_eq!(p.dense[0].c_out, 10);
    }

    #[test]
    fn shapes_chain_and_heads_have_class_outputs() {
        let mesh = primitives::icosphere(3);
        let lv = levels(&mesh, 2, 0.25, 2, 4);
        for model in [ModelKind::Mdgcnn, ModelKind::Gcnn] {
            let (g, p) = build_resnet(&cfg(ArchKind::Resnet, model, 2), 1).unwrap();
            let shapes = g.infer_shapes(&p, &lv).unwrap();
            let last = shapes.last().unwrap();
            assert!(last.pooled && last.channels == 3 && last.kind == Kind::Scalar);

            let (g, p) = build_uresnet(&cfg(ArchKind::Uresnet, model, 2), 1).unwrap();
            let shapes = g.infer_shapes(&p, &lv).unwrap();
            let last = shapes.last().unwrap();
            assert!(!last.pooled && last.level == 0 && last.channels == 3);
            let input = crate::conv::Signal::from_fn(mesh.n_vertices(), 2, |v, c| ((v * 7 + c) % 5) as f64 / 5.0);
            let out = g.forward(&p, &lv, &input).unwrap();
            let Tensor::Scalar(probs) = out.output() else { panic!() };
            for v in 0..probs.n_vertices {
                assert!((probs.row(v).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_stack_has_no_pooling_and_encoder_matches_resnet() {
        let (g, _) = build_resnet(&cfg(ArchKind::Resnet, ModelKind::Mdgcnn, 1), 0).unwrap();
        assert!(!g.nodes.iter().any(|n| matches!(n.op, Op::Pool { .. } | Op::Unpool { .. })));
        let (r, _) = build_resnet(&cfg(ArchKind::Resnet, ModelKind::Mdgcnn, 2), 5).unwrap();
        let (u, _) = build_uresnet(&cfg(ArchKind::Uresnet, ModelKind::Mdgcnn, 2), 5).unwrap();
        let trunk = r.nodes.iter().position(|n| n.op == Op::Amp).unwrap();
        assert_eq!(r.nodes[..trunk], u.nodes[..trunk]);
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let mesh = primitives::icosphere(2);
        let lv = levels(&mesh, 1, 0.4, 2, 4);
        let (g, p) = build_resnet(&cfg(ArchKind::Resnet, ModelKind::Mdgcnn, 2), 0).unwrap();
        assert!(g.infer_shapes(&p, &lv).is_err());
        let other = levels(&mesh, 1, 0.4, 3, 4);
        let (g, p) = build_resnet(&cfg(ArchKind::Resnet, ModelKind::Mdgcnn, 1), 0).unwrap();
        assert!(g.infer_shapes(&p, &other).is_err());
    }
}
