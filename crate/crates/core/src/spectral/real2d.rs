//! 2-D real-input transforms on `L × L` planes using the row-column method.
//!
//! Only columns `0..=L/2` of the spectrum are kept; the rest follow from
//! Hermitian symmetry `X[k₁, L−k₂] = conj(X[(L−k₁) mod L, k₂])`.

use super::fft::Direction;
use super::plan::FftPlan;
use super::tensor::SpectrumRect;
use crate::complexforms::{CRect, OpCost};
use crate::{Error, Real, Result};

/// Reusable buffers for one transform at a time.
#[derive(Debug, Clone)]
pub struct Scratch<T> {
    line: Vec<CRect<T>>,
    half: Vec<CRect<T>>,
}

impl<T: Real> Scratch<T> {
    pub fn new(plan: &FftPlan<T>) -> Self {
        Scratch {
            line: vec![CRect::zero(); plan.fft_len()],
            half: vec![CRect::zero(); plan.spectrum_len()],
        }
    }
}

/// Cost of one [`rfft2`]: `L` row transforms and `⌊L/2⌋+1` column transforms.
pub fn rfft2_cost<T: Real>(plan: &FftPlan<T>) -> OpCost {
    plan.radix().cost().times((plan.fft_len() + plan.half_len()) as u64)
}

/// Cost of one [`irfft2`]: the transforms plus `L²` scaling multiplies.
pub fn irfft2_cost<T: Real>(plan: &FftPlan<T>) -> OpCost {
    let l = plan.fft_len() as u64;
    rfft2_cost(plan) + OpCost::new(l * l, 0, 0, 0, 0)
}

/// Forward transform of the `L × L` plane `x` into one half-spectrum slab.
pub fn rfft2_into<T: Real>(x: &[T], plan: &FftPlan<T>, re: &mut [T], im: &mut [T], scratch: &mut Scratch<T>) {
    let l = plan.fft_len();
    let h = plan.half_len();
    let radix = plan.radix();
    let Scratch { line, half } = scratch;

    for (row, dst) in x.chunks_exact(l).zip(half.chunks_exact_mut(h)) {
        for (c, &v) in line.iter_mut().zip(row) {
            *c = CRect::new(v, T::zero());
        }
        radix.process(line, Direction::Forward);
        dst.copy_from_slice(&line[..h]);
    }
    for col in 0..h {
        for r in 0..l {
            line[r] = half[r * h + col];
        }
        radix.process(line, Direction::Forward);
        for r in 0..l {
            re[r * h + col] = line[r].re;
            im[r * h + col] = line[r].im;
        }
    }
}

/// Inverse transform of one half-spectrum slab into the `L × L` plane `out`,
/// scaled by `1/L²`. Returns the largest discarded imaginary magnitude.
pub fn irfft2_into<T: Real>(re: &[T], im: &[T], plan: &FftPlan<T>, out: &mut [T], scratch: &mut Scratch<T>) -> T {
    let l = plan.fft_len();
    let h = plan.half_len();
    let radix = plan.radix();
    let Scratch { line, half } = scratch;

    for col in 0..h {
        for r in 0..l {
            line[r] = CRect::new(re[r * h + col], im[r * h + col]);
        }
        radix.process(line, Direction::Inverse);
        for r in 0..l {
            half[r * h + col] = line[r];
        }
    }
    let scale = T::one() / T::from_usize(l * l);
    let mut residue = T::zero();
    for (src, dst) in half.chunks_exact(h).zip(out.chunks_exact_mut(l)) {
        line[..h].copy_from_slice(src);
        for c in h..l {
            let m = src[l - c];
            line[c] = CRect::new(m.re, -m.im);
        }
        radix.process(line, Direction::Inverse);
        for (o, v) in dst.iter_mut().zip(line.iter()) {
            *o = v.re * scale;
            residue = residue.max((v.im * scale).abs());
        }
    }
    residue
}

/// Half spectrum of a real `L × L` plane, as a `[1, 1, L, ⌊L/2⌋+1]` slab.
pub fn rfft2<T: Real>(x: &[T], plan: &FftPlan<T>) -> Result<SpectrumRect<T>> {
    let l = plan.fft_len();
    if x.len() != l * l {
        return Err(Error::shape("rfft2 input", &[l, l], &[x.len()]));
    }
    let mut s = SpectrumRect::zeros([1, 1, l, plan.half_len()]);
    let mut scratch = Scratch::new(plan);
    let (re, im) = s.slab_mut(0);
    rfft2_into(x, plan, re, im, &mut scratch);
    Ok(s)
}

/// Real `L × L` plane from a single half-spectrum slab.
pub fn irfft2<T: Real>(spectrum: &SpectrumRect<T>, plan: &FftPlan<T>) -> Result<Vec<T>> {
    Ok(irfft2_checked(spectrum, plan)?.0)
}

/// [`irfft2`] that also returns the imaginary residue of the inverse.
pub fn irfft2_checked<T: Real>(spectrum: &SpectrumRect<T>, plan: &FftPlan<T>) -> Result<(Vec<T>, T)> {
    let l = plan.fft_len();
    let expected = [1, 1, l, plan.half_len()];
    if spectrum.dims() != expected {
        return Err(Error::shape("irfft2 spectrum", &expected, &spectrum.dims()));
    }
    let mut out = vec![T::zero(); l * l];
    let mut scratch = Scratch::new(plan);
    let (re, im) = spectrum.slab(0);
    let residue = irfft2_into(re, im, plan, &mut out, &mut scratch);
    Ok((out, residue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::fft::dft_1d_naive;
    use crate::spectral::plan::plan_fft;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plan_for(l: usize) -> FftPlan<f64> {
        // n = l/2 + 1, k = l/2 gives n + k − 1 = l exactly
        let p = plan_fft(l / 2 + 1, l / 2, 0).unwrap();
        assert_eq!(p.fft_len(), l);
        p
    }

    fn random_plane(l: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..l * l).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Full 2-D DFT through the naive 1-D oracle, rows then columns.
    fn naive_2d(x: &[f64], l: usize) -> Vec<CRect<f64>> {
        let mut rows = Vec::with_capacity(l * l);
        for r in 0..l {
            let line: Vec<_> = x[r * l..(r + 1) * l].iter().map(|&v| CRect::new(v, 0.0)).collect();
            rows.extend(dft_1d_naive(&line, Direction::Forward).unwrap());
        }
        let mut out = vec![CRect::zero(); l * l];
        for c in 0..l {
            let col: Vec<_> = (0..l).map(|r| rows[r * l + c]).collect();
            for (r, v) in dft_1d_naive(&col, Direction::Forward).unwrap().into_iter().enumerate() {
                out[r * l + c] = v;
            }
        }
        out
    }

    #[test]
    fn zero_and_constant_planes() {
        let plan = plan_for(8);
        let s = rfft2(&vec![0.0; 64], &plan).unwrap();
        assert!(s.re().iter().chain(s.im()).all(|&v| v == 0.0));

        let s = rfft2(&vec![1.5; 64], &plan).unwrap();
        assert!((s.re()[0] - 1.5 * 64.0).abs() < 1e-12);
        let rest = s.re()[1..].iter().chain(s.im()).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(rest < 1e-12);
    }

    #[test]
    fn matches_naive_half_spectrum_and_hermitian_symmetry() {
        let l = 8;
        let plan = plan_for(l);
        let x = random_plane(l, 3);
        let s = rfft2(&x, &plan).unwrap();
        let full = naive_2d(&x, l);
        let h = plan.half_len();
        let mut err = 0.0f64;
        for r in 0..l {
            for c in 0..h {
                let v = full[r * l + c];
                err = err
                    .max((s.re()[r * h + c] - v.re).abs())
                    .max((s.im()[r * h + c] - v.im).abs());
            }
        }
        assert!(err <= 1e-10, "err {err}");
        for k1 in 0..l {
            for k2 in 0..l {
                let a = full[k1 * l + k2];
                let b = full[((l - k1) % l) * l + (l - k2) % l];
                assert!((a.re - b.re).abs() < 1e-10 && (a.im + b.im).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn roundtrip_and_residue() {
        for l in [16, 32] {
            let plan = plan_for(l);
            let x = random_plane(l, l as u64);
            let s = rfft2(&x, &plan).unwrap();
            let (back, residue) = irfft2_checked(&s, &plan).unwrap();
            let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-12, "l={l} err={err}");
            let max_x = s.re().iter().chain(s.im()).fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(residue <= 1e-10 * max_x);
        }
    }

    #[test]
    fn dc_bin_inverts_to_constant() {
        let plan = plan_for(8);
        let mut s = SpectrumRect::zeros([1, 1, 8, 5]);
        s.re[0] = 2.0 * 64.0;
        let back = irfft2(&s, &plan).unwrap();
        assert!(back.iter().all(|&v| (v - 2.0).abs() < 1e-14));
        let zero = irfft2(&SpectrumRect::zeros([1, 1, 8, 5]), &plan).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval() {
        let l = 16;
        let plan = plan_for(l);
        let x = random_plane(l, 99);
        let s = rfft2(&x, &plan).unwrap();
        let h = plan.half_len();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let mut spec = 0.0;
        for r in 0..l {
            for c in 0..h {
                let p = s.re()[r * h + c].powi(2) + s.im()[r * h + c].powi(2);
                // interior columns stand for themselves and their mirror
                let w = if c == 0 || c == l / 2 { 1.0 } else { 2.0 };
                spec += w * p;
            }
        }
        let rel = (energy - spec / (l * l) as f64).abs() / energy;
        assert!(rel <= 1e-9, "rel {rel}");
    }

    #[test]
    fn shape_errors() {
        let plan = plan_for(8);
        assert!(rfft2(&vec![0.0; 63], &plan).is_err());
        assert!(irfft2(&SpectrumRect::zeros([1, 1, 8, 8]), &plan).is_err());
    }
}
