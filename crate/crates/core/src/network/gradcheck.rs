//! Central finite-difference checks of [`Graph::backward`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{cross_entropy, Graph, Levels, Params, Result, Tensor};
use crate::conv::Signal;

/// Scalar objective applied to the graph output.
#[derive(Debug, Clone)]
pub enum Objective {
    /// Mean cross-entropy against labels; the output must be probabilities.
    CrossEntropy(Vec<usize>),
    /// Inner product with fixed weights.
    Linear(Vec<f64>),
}

impl Objective {
    fn eval(&self, out: &Tensor) -> Result<(f64, Tensor)> {
        match self {
            Objective::CrossEntropy(labels) => {
                let (l, g) = cross_entropy(out.as_scalar()?, labels)?;
                Ok((l, Tensor::Scalar(g)))
            }
            Objective::Linear(w) => {
                let v = out.data().iter().zip(w).map(|(a, b)| a * b).sum();
                let mut g = out.clone();
                g.data_mut().copy_from_slice(w);
                Ok((v, g))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest relative error over all probed directions.
    pub max_rel_error: f64,
    pub directions: usize,
}

fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Compares directional derivatives along `directions` random parameter directions
/// and one random input direction against central differences with step `h`.
pub fn check_gradients(
    graph: &Graph,
    params: &Params,
    levels: &Levels,
    input: &Signal,
    objective: &Objective,
    directions: usize,
    h: f64,
    seed: u64,
) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loss_at =
        |p: &Params, x: &Signal| -> Result<f64> { Ok(objective.eval(graph.forward(p, levels, x)?.output())?.0) };
    let trace = graph.forward(params, levels, input)?;
    let (_, g_out) = objective.eval(trace.output())?;
    let (grads, g_in) = graph.backward(params, levels, &trace, g_out)?;
    let flat = params.to_flat();
    let gflat = grads.to_flat();
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let d: Vec<f64> = (0..flat.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut plus = params.clone();
        plus.set_flat(&flat.iter().zip(&d).map(|(x, y)| x + h * y).collect::<Vec<_>>());
        let mut minus = params.clone();
        minus.set_flat(&flat.iter().zip(&d).map(|(x, y)| x - h * y).collect::<Vec<_>>());
        let fd = (loss_at(&plus, input)? - loss_at(&minus, input)?) / (2.0 * h);
        let an: f64 = gflat.iter().zip(&d).map(|(a, b)| a * b).sum();
        worst = worst.max(rel_error(fd, an));
    }
    let d: Vec<f64> = (0..input.data.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let shift = |s: f64| Signal { data: input.data.iter().zip(&d).map(|(x, y)| x + s * y).collect(), ..input.clone() };
    let fd = (loss_at(params, &shift(h))? - loss_at(params, &shift(-h))?) / (2.0 * h);
    let an: f64 = g_in.data.iter().zip(&d).map(|(a, b)| a * b).sum();
    worst = worst.max(rel_error(fd, an));
    Ok(GradCheck { max_rel_error: worst, directions: directions + 1 })
}
