//! A tiny trainable network used to compare backends end to end:
//! conv → ReLU → 2×2 average pool → dense → softmax cross-entropy.

mod data;
mod train;

pub use data::{Batch, SyntheticDataset, NOISE_STD};
pub use train::{train, TrainConfig, TrainTrace};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convengine::{Backend, ConvEngine, ConvParams};
use crate::flops::FlopLedger;
use crate::spectral::RealTensor4;
use crate::{Error, Real, Result};

/// Layer sizes of a [`TinyNet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub in_channels: usize,
    pub filters: usize,
    pub image: usize,
    pub kernel: usize,
    pub padding: usize,
    pub classes: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            in_channels: 1,
            filters: 6,
            image: 12,
            kernel: 3,
            padding: 1,
            classes: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TinyNet<T> {
    pub conv_w: RealTensor4<T>,
    /// `[classes × features]`, row-major.
    pub dense_w: Vec<T>,
    pub dense_b: Vec<T>,
    params: ConvParams<T>,
    engine: ConvEngine,
    classes: usize,
}

/// Parameter-shaped gradients, plus the input gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads<T> {
    pub conv_w: RealTensor4<T>,
    pub dense_w: Vec<T>,
    pub dense_b: Vec<T>,
    pub input: RealTensor4<T>,
}

impl<T: Real> TinyNet<T> {
    /// Uniform `[−1/√fan_in, 1/√fan_in]` initialization from `seed`.
    pub fn new(config: NetConfig, backend: Backend, seed: u64) -> Result<Self> {
        let params = ConvParams::new(
            1,
            config.in_channels,
            config.filters,
            config.image,
            config.kernel,
            config.padding,
        )?;
        if params.out_len() < 2 || config.classes < 2 {
            return Err(Error::InvalidArgument("network too small to pool and classify".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            T::from_f64(rng.random_range(-bound..bound))
        };
        let conv_fan = config.in_channels * config.kernel * config.kernel;
        let conv_w = RealTensor4::from_fn(params.kernel_dims(), |_| uniform(conv_fan));
        let features = Self::features_for(&params);
        let dense_w = (0..config.classes * features).map(|_| uniform(features)).collect();
        let dense_b = (0..config.classes).map(|_| uniform(features)).collect();
        Ok(TinyNet {
            conv_w,
            dense_w,
            dense_b,
            params,
            engine: ConvEngine::new(backend),
            classes: config.classes,
        })
    }

    fn features_for(params: &ConvParams<T>) -> usize {
        let pooled = params.out_len() / 2;
        params.out_channels() * pooled * pooled
    }

    pub fn features(&self) -> usize {
        Self::features_for(&self.params)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn backend(&self) -> Backend {
        self.engine.backend()
    }

    pub fn params(&self) -> &ConvParams<T> {
        &self.params
    }

    pub fn with_engine(mut self, engine: ConvEngine) -> Self {
        self.engine = engine;
        self
    }

    fn check_batch(&self, images: &RealTensor4<T>, labels: Option<&[usize]>) -> Result<ConvParams<T>> {
        let d = images.dims();
        let p = self.params.with_batch(d[0]);
        images.expect_dims("network input", p.input_dims())?;
        if let Some(labels) = labels {
            if labels.len() != d[0] {
                return Err(Error::shape("labels", &[d[0]], &[labels.len()]));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l >= self.classes) {
                return Err(Error::InvalidArgument(format!("label {bad} out of range")));
            }
        }
        Ok(p)
    }

    /// Everything the backward pass needs from the forward pass.
    fn forward_pass(
        &self,
        images: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
    ) -> Result<Forward<T>> {
        let conv = self.engine.forward(images, &self.conv_w, params, ledger)?;
        let [nb, f2, m, _] = conv.dims();
        let half = m / 2;
        let quarter = T::from_f64(0.25);
        let mut pooled = vec![T::zero(); nb * f2 * half * half];
        for b in 0..nb {
            for c in 0..f2 {
                let plane = conv.plane(b, c);
                let base = (b * f2 + c) * half * half;
                for i in 0..half {
                    for j in 0..half {
                        let mut s = T::zero();
                        for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                            s += plane[(2 * i + di) * m + 2 * j + dj].max(T::zero());
                        }
                        pooled[base + i * half + j] = s * quarter;
                    }
                }
            }
        }
        let feats = self.features();
        let mut logits = vec![T::zero(); nb * self.classes];
        for b in 0..nb {
            let x = &pooled[b * feats..(b + 1) * feats];
            for k in 0..self.classes {
                let row = &self.dense_w[k * feats..(k + 1) * feats];
                let dot = row.iter().zip(x).fold(T::zero(), |acc, (w, v)| acc + *w * *v);
                logits[b * self.classes + k] = dot + self.dense_b[k];
            }
        }
        Ok(Forward { conv, pooled, logits })
    }

    /// Class scores `[batch × classes]`.
    pub fn logits(&self, images: &RealTensor4<T>, ledger: &mut FlopLedger) -> Result<Vec<T>> {
        let p = self.check_batch(images, None)?;
        Ok(self.forward_pass(images, &p, ledger)?.logits)
    }

    /// Fraction of samples whose largest logit is the label.
    pub fn accuracy(&self, batch: &Batch<T>, ledger: &mut FlopLedger) -> Result<f64> {
        if batch.labels.is_empty() {
            return Ok(0.0);
        }
        let logits = self.logits(&batch.images, ledger)?;
        let hits = logits
            .chunks_exact(self.classes)
            .zip(&batch.labels)
            .filter(|(row, &label)| {
                let best = row
                    .iter()
                    .enumerate()
                    .fold(0, |best, (k, v)| if *v > row[best] { k } else { best });
                best == label
            })
            .count();
        Ok(hits as f64 / batch.labels.len() as f64)
    }
}

struct Forward<T> {
    conv: RealTensor4<T>,
    pooled: Vec<T>,
    logits: Vec<T>,
}

/// Mean cross-entropy of the batch and its gradients.
pub fn loss_and_grads<T: Real>(net: &TinyNet<T>, batch: &Batch<T>, ledger: &mut FlopLedger) -> Result<(T, Grads<T>)> {
    let params = net.check_batch(&batch.images, Some(&batch.labels))?;
    let fwd = net.forward_pass(&batch.images, &params, ledger)?;
    let nb = batch.labels.len();
    let classes = net.classes;
    let feats = net.features();
    let inv_b = T::one() / T::from_usize(nb.max(1));

    let mut loss = T::zero();
    let mut dlogits = vec![T::zero(); nb * classes];
    for (b, &label) in batch.labels.iter().enumerate() {
        let row = &fwd.logits[b * classes..(b + 1) * classes];
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let sum = row.iter().fold(T::zero(), |s, &v| s + (v - max).exp());
        let log_z = max + sum.ln();
        loss += log_z - row[label];
        for k in 0..classes {
            let p = (row[k] - log_z).exp();
            let target = if k == label { T::one() } else { T::zero() };
            dlogits[b * classes + k] = (p - target) * inv_b;
        }
    }
    loss *= inv_b;

    let mut dense_w = vec![T::zero(); classes * feats];
    let mut dense_b = vec![T::zero(); classes];
    let mut dpooled = vec![T::zero(); nb * feats];
    for b in 0..nb {
        let x = &fwd.pooled[b * feats..(b + 1) * feats];
        let dx = &mut dpooled[b * feats..(b + 1) * feats];
        for k in 0..classes {
            let g = dlogits[b * classes + k];
            dense_b[k] += g;
            let row = &net.dense_w[k * feats..(k + 1) * feats];
            let drow = &mut dense_w[k * feats..(k + 1) * feats];
            for f in 0..feats {
                drow[f] += g * x[f];
                dx[f] += g * row[f];
            }
        }
    }

    let [_, f2, m, _] = fwd.conv.dims();
    let half = m / 2;
    let quarter = T::from_f64(0.25);
    let mut dconv = RealTensor4::zeros(fwd.conv.dims());
    for b in 0..nb {
        for c in 0..f2 {
            let pre = fwd.conv.plane(b, c).to_vec();
            let dst = dconv.plane_mut(b, c);
            let base = (b * f2 + c) * half * half;
            for i in 0..half {
                for j in 0..half {
                    let g = dpooled[base + i * half + j] * quarter;
                    for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let at = (2 * i + di) * m + 2 * j + dj;
                        if pre[at] > T::zero() {
                            dst[at] = g;
                        }
                    }
                }
            }
        }
    }

    let conv_w = net.engine.backward_kernel(&dconv, &batch.images, &params, ledger)?;
    let input = net.engine.backward_input(&dconv, &net.conv_w, &params, ledger)?;
    Ok((
        loss,
        Grads {
            conv_w,
            dense_w,
            dense_b,
            input,
        },
    ))
}

/// `θ ← θ − lr·∂L/∂θ` for every parameter.
pub fn sgd_step<T: Real>(net: &mut TinyNet<T>, grads: &Grads<T>, lr: T) -> Result<()> {
    if !lr.is_finite() || lr < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "learning rate {lr} must be finite and non-negative"
        )));
    }
    if grads.conv_w.dims() != net.conv_w.dims()
        || grads.dense_w.len() != net.dense_w.len()
        || grads.dense_b.len() != net.dense_b.len()
    {
        return Err(Error::shape("gradients", &net.conv_w.dims(), &grads.conv_w.dims()));
    }
    let step = |p: &mut [T], g: &[T]| p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * *g);
    step(net.conv_w.data_mut(), grads.conv_w.data());
    step(&mut net.dense_w, &grads.dense_w);
    step(&mut net.dense_b, &grads.dense_b);
    net.conv_w.check_finite("conv weights after step")?;
    if !net.dense_w.iter().chain(&net.dense_b).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("dense weights after step"));
    }
    Ok(())
}
