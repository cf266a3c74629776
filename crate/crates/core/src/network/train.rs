//! Cross-entropy training with Adam over mini-batches.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, cross_entropy, Graph, Levels, NetworkError, Params, Result, Tensor};
use crate::conv::Signal;

/// One training example: an input signal on the finest mesh and either one label
/// (classification) or one label per vertex (segmentation).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Signal,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }

    pub fn update(&mut self, params: &mut Params, grads: &Params) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        let mut k = 0;
        for (p, g) in params.buffers_mut().into_iter().zip(grads.buffers()) {
            for (x, &gx) in p.iter_mut().zip(g) {
                self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * gx;
                self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * gx * gx;
                *x -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + self.eps);
                k += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 50, batch_size: 10, lr: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

fn output_probs(trace: &super::Trace) -> Result<&Signal> {
    match trace.output() {
        Tensor::Scalar(s) => Ok(s),
        Tensor::Dir(_) => Err(NetworkError::ShapeMismatch("graph output must be a per-vertex signal".into())),
    }
}

/// Loss, accuracy and parameter gradients for one sample.
pub fn loss_and_grad(graph: &Graph, params: &Params, levels: &Levels, sample: &Sample) -> Result<(f64, f64, Params)> {
    let trace = graph.forward(params, levels, &sample.input)?;
    let probs = output_probs(&trace)?;
    let (loss, g) = cross_entropy(probs, &sample.labels)?;
    let acc = accuracy(probs, &sample.labels);
    let (grads, _) = graph.backward(params, levels, &trace, Tensor::Scalar(g))?;
    Ok((loss, acc, grads))
}

/// Mean loss and accuracy over a dataset.
pub fn evaluate(graph: &Graph, params: &Params, levels: &Levels, data: &[Sample]) -> Result<(f64, f64)> {
    let per: Vec<(f64, f64)> = data
        .par_iter()
        .map(|s| {
            let trace = graph.forward(params, levels, &s.input)?;
            let probs = output_probs(&trace)?;
            Ok((cross_entropy(probs, &s.labels)?.0, accuracy(probs, &s.labels)))
        })
        .collect::<Result<_>>()?;
    let n = per.len().max(1) as f64;
    Ok((per.iter().map(|p| p.0).sum::<f64>() / n, per.iter().map(|p| p.1).sum::<f64>() / n))
}

/// Predicted class per output row.
pub fn predict(graph: &Graph, params: &Params, levels: &Levels, input: &Signal) -> Result<(Signal, Vec<usize>)> {
    let trace = graph.forward(params, levels, input)?;
    let probs = output_probs(&trace)?.clone();
    let labels = (0..probs.n_vertices).map(|v| super::argmax(probs.row(v))).collect();
    Ok((probs, labels))
}

/// Trains in place and returns per-epoch training loss and accuracy.
///
/// Batches are drawn from a seeded shuffle; per-sample gradients are computed in
/// parallel and summed in sample order, so results only depend on the seed.
pub fn train(
    graph: &Graph,
    params: &mut Params,
    levels: &Levels,
    data: &[Sample],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics, &Params),
) -> Result<Vec<EpochMetrics>> {
    graph.infer_shapes(params, levels)?;
    if cfg.batch_size == 0 {
        return Err(NetworkError::ConfigInvalid("batch size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(params.len(), cfg.lr);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut acc_sum) = (0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<(f64, f64, Params)> =
                batch.par_iter().map(|&i| loss_and_grad(graph, params, levels, &data[i])).collect::<Result<_>>()?;
            let mut total = params.zeros_like();
            for (loss, acc, g) in &results {
                if !loss.is_finite() {
                    return Err(NetworkError::NonFiniteLoss { epoch });
                }
                loss_sum += loss;
                acc_sum += acc;
                total.add_scaled(g, 1.0 / batch.len() as f64);
            }
            adam.update(params, &total);
        }
        let n = data.len().max(1) as f64;
        let m = EpochMetrics { epoch, loss: loss_sum / n, accuracy: acc_sum / n };
        on_epoch(&m, params);
        log.push(m);
    }
    Ok(log)
}

/// Writes `epoch,loss,accuracy` rows.
pub fn write_log_csv<W: Write>(metrics: &[EpochMetrics], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "loss", "accuracy"])?;
    for m in metrics {
        w.write_record([m.epoch.to_string(), m.loss.to_string(), m.accuracy.to_string()])?;
    }
    w.flush()
}
