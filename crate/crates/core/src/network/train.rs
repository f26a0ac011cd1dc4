//! Momentum SGD against the CTC loss, with early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DeepBlstm, Gradients, TrainConfig};
use crate::ctc;
use crate::error::{Error, Result};
use crate::features::FeatureSequence;

/// One training example: a frame sequence and its target labels.
pub type Sample = (FeatureSequence, Vec<u32>);

/// Per-epoch bookkeeping. `best_val` is the lowest validation loss seen
/// up to and including this epoch, so it is monotone non-increasing.
#[derive(Debug, Clone)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub best_val: f64,
}

/// Classical momentum update over the canonical flat parameter order:
/// v <- momentum v - lr g; theta <- theta + v.
pub fn sgd_step(
    net: &mut DeepBlstm,
    grads: &Gradients,
    velocity: &mut [f64],
    cfg: &TrainConfig,
) -> Result<()> {
    let g = grads.flatten();
    let n = net.count_weights();
    if g.len() != n || velocity.len() != n {
        return Err(Error::param("train.velocity", "shape mismatch with network"));
    }
    let mut theta = net.flatten();
    for i in 0..n {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g[i];
        theta[i] += velocity[i];
    }
    net.set_from_flat(&theta)
}

fn mean_loss(net: &DeepBlstm, set: &[Sample]) -> Result<f64> {
    let mut total = 0.0;
    for (x, labels) in set {
        let (lattice, _) = net.forward(x)?;
        total += ctc::ctc_loss(&lattice, labels)?.loss;
    }
    Ok(total / set.len() as f64)
}

/// Train by per-sample momentum SGD in a seed-shuffled order, one full
/// pass per epoch. After each epoch the validation CTC loss decides early
/// stopping: `patience` epochs without improvement end the run (patience 0
/// trains exactly one epoch). Returns the best-validation parameters and
/// the per-epoch log.
pub fn train(
    net: &DeepBlstm,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
) -> Result<(DeepBlstm, Vec<EpochStats>)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::EmptyInput("validation set"));
    }
    let k = net.labels() as u32;
    for (_, labels) in train_set.iter().chain(val_set) {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label: bad, classes: net.classes() });
        }
        if labels.is_empty() {
            return Err(Error::EmptyInput("label sequence"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut cur = net.clone();
    let mut velocity = vec![0.0; cur.count_weights()];
    let mut best = cur.clone();
    let mut best_val = f64::INFINITY;
    let mut since_improvement = 0usize;
    let mut log = Vec::new();

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let (x, labels) = &train_set[idx];
            let (lattice, cache) = cur.forward(x)?;
            let res = ctc::ctc_loss(&lattice, labels)?;
            epoch_loss += res.loss;
            let grads = cur.backward(&cache, &res.grad)?;
            sgd_step(&mut cur, &grads, &mut velocity, cfg)?;
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let val_loss = mean_loss(&cur, val_set)?;
        if val_loss < best_val {
            best_val = val_loss;
            best = cur.clone();
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        log.push(EpochStats { epoch, train_loss, val_loss, best_val });
        if since_improvement >= cfg.patience {
            break;
        }
    }
    Ok((best, log))
}
