use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::spectral::RealTensor4;
use crate::{Error, Real, Result};

/// Standard deviation of the additive pixel noise.
pub const NOISE_STD: f64 = 0.1;

/// Labeled single-image samples: class `c` is a bar at angle `π·c/classes`
/// through a jittered centre, plus Gaussian noise.
#[derive(Debug, Clone)]
pub struct SyntheticDataset<T> {
    pub seed: u64,
    pub num_classes: usize,
    pub image: usize,
    pub samples: Vec<(RealTensor4<T>, usize)>,
}

/// A stacked mini-batch.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub images: RealTensor4<T>,
    pub labels: Vec<usize>,
}

impl<T: Real> SyntheticDataset<T> {
    pub fn generate(seed: u64, num_classes: usize, image: usize, count: usize) -> Result<Self> {
        if num_classes < 2 || image < 4 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes and 4×4 images, got {num_classes} and {image}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, NOISE_STD).expect("valid normal");
        let mid = (image as f64 - 1.0) / 2.0;
        let jitter = image as f64 / 6.0;
        let samples = (0..count)
            .map(|s| {
                let label = s % num_classes;
                let theta = std::f64::consts::PI * label as f64 / num_classes as f64;
                let (sin, cos) = theta.sin_cos();
                let cy = mid + rng.random_range(-jitter..jitter);
                let cx = mid + rng.random_range(-jitter..jitter);
                let img = RealTensor4::from_fn([1, 1, image, image], |[_, _, h, w]| {
                    // distance from the line through (cy, cx) along (sin, cos)
                    let (dy, dx) = (h as f64 - cy, w as f64 - cx);
                    let d = dy * cos - dx * sin;
                    let bar = (-d * d / 1.2).exp();
                    T::from_f64(bar + noise.sample(&mut rng))
                });
                (img, label)
            })
            .collect();
        Ok(SyntheticDataset {
            seed,
            num_classes,
            image,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn batch(&self, indices: &[usize]) -> Batch<T> {
        let n = self.image;
        let mut data = Vec::with_capacity(indices.len() * n * n);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            let (img, label) = &self.samples[i];
            data.extend_from_slice(img.data());
            labels.push(*label);
        }
        Batch {
            images: RealTensor4::new([indices.len(), 1, n, n], data).expect("samples share one shape"),
            labels,
        }
    }
}
