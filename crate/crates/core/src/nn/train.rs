use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{loss_and_grads, sgd_step, NetConfig, SyntheticDataset, TinyNet};
use crate::complexforms::OpCost;
use crate::convengine::{Backend, ConvEngine};
use crate::flops::FlopLedger;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub backend: Backend,
    pub steps: usize,
    pub lr: f64,
    pub seed: u64,
    pub batch: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub threads: usize,
    pub net: NetConfig,
}

impl TrainConfig {
    pub fn new(backend: Backend, steps: usize, lr: f64, seed: u64) -> Self {
        TrainConfig {
            backend,
            steps,
            lr,
            seed,
            ..Self::default()
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            backend: Backend::SpectralRect,
            steps: 300,
            lr: 0.05,
            seed: 7,
            batch: 16,
            train_samples: 256,
            test_samples: 128,
            threads: 1,
            net: NetConfig::default(),
        }
    }
}

/// Record of one run. `losses[t]` is the mini-batch loss seen after `t`
/// updates, so a run of `steps` updates has `steps + 1` entries; `ops[t]`
/// and `step_nanos[t]` cover the same evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub backend: Backend,
    pub scalar: String,
    pub seed: u64,
    pub steps: usize,
    pub lr: f64,
    pub batch: usize,
    pub losses: Vec<f64>,
    pub ops: Vec<OpCost>,
    pub wraps: Vec<u64>,
    pub step_nanos: Vec<u64>,
    pub final_accuracy: f64,
}

impl TrainTrace {
    pub fn total_nanos(&self) -> u64 {
        self.step_nanos.iter().sum()
    }

    /// Largest `|a − b| / |b|` over aligned steps.
    pub fn max_relative_gap(&self, reference: &TrainTrace) -> f64 {
        self.losses
            .iter()
            .zip(&reference.losses)
            .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Same trace with all wall times zeroed.
    pub fn without_timing(mut self) -> Self {
        self.step_nanos.iter_mut().for_each(|t| *t = 0);
        self
    }
}

/// Trains a fresh [`TinyNet`] on a seeded synthetic task and scores it on a
/// held-out set generated from a different stream.
pub fn train<T: Real>(config: &TrainConfig) -> Result<TrainTrace> {
    if !(config.lr >= 0.0 && config.lr.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate {} must be finite and non-negative",
            config.lr
        )));
    }
    if config.batch == 0 || config.batch > config.train_samples || config.test_samples == 0 {
        return Err(Error::InvalidArgument(format!(
            "batch {} must be in 1..={} and the held-out set non-empty",
            config.batch, config.train_samples
        )));
    }
    if config.net.in_channels != 1 {
        return Err(Error::InvalidArgument("synthetic images have a single channel".into()));
    }
    let classes = config.net.classes;
    let image = config.net.image;
    let train_set = SyntheticDataset::<T>::generate(config.seed, classes, image, config.train_samples)?;
    let test_set =
        SyntheticDataset::<T>::generate(config.seed ^ 0x9e37_79b9_7f4a_7c15, classes, image, config.test_samples)?;
    let mut net = TinyNet::<T>::new(config.net, config.backend, config.seed)?
        .with_engine(ConvEngine::new(config.backend).with_threads(config.threads));

    let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..config.train_samples).collect();
    let mut cursor = order.len();
    let mut next_batch = |rng: &mut ChaCha8Rng| {
        if cursor + config.batch > order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        let picked = order[cursor..cursor + config.batch].to_vec();
        cursor += config.batch;
        picked
    };

    let lr = T::from_f64(config.lr);
    let mut trace = TrainTrace {
        backend: config.backend,
        scalar: T::NAME.to_string(),
        seed: config.seed,
        steps: config.steps,
        lr: config.lr,
        batch: config.batch,
        losses: Vec::with_capacity(config.steps + 1),
        ops: Vec::with_capacity(config.steps + 1),
        wraps: Vec::with_capacity(config.steps + 1),
        step_nanos: Vec::with_capacity(config.steps + 1),
        final_accuracy: 0.0,
    };
    for step in 0..=config.steps {
        let batch = train_set.batch(&next_batch(&mut order_rng));
        let mut ledger = FlopLedger::new();
        let t0 = Instant::now();
        let (loss, grads) = loss_and_grads(&net, &batch, &mut ledger)?;
        if step < config.steps {
            sgd_step(&mut net, &grads, lr)?;
        }
        trace.step_nanos.push(t0.elapsed().as_nanos() as u64);
        trace.losses.push(loss.as_f64());
        trace.ops.push(ledger.total());
        trace.wraps.push(ledger.wraps());
    }
    let all: Vec<usize> = (0..test_set.len()).collect();
    trace.final_accuracy = net.accuracy(&test_set.batch(&all), &mut FlopLedger::new())?;
    Ok(trace)
}
