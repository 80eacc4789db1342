use crate::complexforms::{CRect, OpCost};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Reference DFT, `O(n²)`.
///
/// Forward is unnormalized; inverse carries `1/n`, so the pair is an exact
/// inverse.
pub fn dft_1d_naive<T: Real>(x: &[CRect<T>], dir: Direction) -> Result<Vec<CRect<T>>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = CRect::<f64>::zero();
        for (j, v) in x.iter().enumerate() {
            // reduce k·j mod n first so the angle stays small
            let theta = sign * std::f64::consts::TAU * ((k * j) % n) as f64 / n as f64;
            let (s, c) = theta.sin_cos();
            let v = CRect::new(v.re.as_f64(), v.im.as_f64());
            acc += v * CRect::new(c, s);
        }
        if dir == Direction::Inverse {
            acc = acc.scale(1.0 / n as f64);
        }
        out.push(CRect::new(T::from_f64(acc.re), T::from_f64(acc.im)));
    }
    Ok(out)
}

/// Radix-2 FFT of the power-of-two length of `x`; inverse scaled by `1/n`.
pub fn fft_1d<T: Real>(x: &[CRect<T>], dir: Direction) -> Result<Vec<CRect<T>>> {
    let radix = Radix2::new(x.len())?;
    let mut buf = x.to_vec();
    radix.process(&mut buf, dir);
    if dir == Direction::Inverse {
        let s = T::one() / T::from_usize(x.len());
        buf.iter_mut().for_each(|v| *v = v.scale(s));
    }
    Ok(buf)
}

/// Iterative decimation-in-time radix-2 transform with precomputed twiddles
/// and bit-reversal table.
#[derive(Debug, Clone)]
pub struct Radix2<T> {
    len: usize,
    /// `e^{−j2πm/len}` for `m < len/2`.
    twiddles: Vec<CRect<T>>,
    bitrev: Vec<u32>,
}

impl<T: Real> Radix2<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty);
        }
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let twiddles = (0..len / 2)
            .map(|m| {
                let theta = -std::f64::consts::TAU * m as f64 / len as f64;
                let (s, c) = theta.sin_cos();
                CRect::new(T::from_f64(c), T::from_f64(s))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    (i.reverse_bits() >> (usize::BITS - bits)) as u32
                }
            })
            .collect();
        Ok(Radix2 { len, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn twiddles(&self) -> &[CRect<T>] {
        &self.twiddles
    }

    /// Real-arithmetic cost of one transform: `(n/2)·log₂n` butterflies of
    /// one complex multiply and two complex adds each.
    pub fn cost(&self) -> OpCost {
        let butterflies = (self.len / 2 * self.len.trailing_zeros() as usize) as u64;
        OpCost::new(4, 6, 0, 0, 0).times(butterflies)
    }

    /// Unnormalized in-place transform.
    pub fn process(&self, buf: &mut [CRect<T>], dir: Direction) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let inverse = dir == Direction::Inverse;
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for chunk in buf.chunks_exact_mut(size) {
                let (lo, hi) = chunk.split_at_mut(half);
                for (k, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w.im = -w.im;
                    }
                    let t = *v * w;
                    *v = *u - t;
                    *u += t;
                }
            }
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> CRect<f64> {
        CRect::new(re, 0.0)
    }

    fn random_signal(n: usize, seed: u64) -> Vec<CRect<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| CRect::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_err(a: &[CRect<f64>], b: &[CRect<f64>]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max)
    }

    fn max_norm(a: &[CRect<f64>]) -> f64 {
        a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn naive_dft_examples() {
        let out = dft_1d_naive(&[c(1.0); 4], Direction::Forward).unwrap();
        assert!(max_err(&out, &[c(4.0), c(0.0), c(0.0), c(0.0)]) < 1e-15);
        let out = dft_1d_naive(&[c(1.0), c(0.0), c(0.0), c(0.0)], Direction::Forward).unwrap();
        assert!(max_err(&out, &[c(1.0); 4]) < 1e-15);
        assert_eq!(dft_1d_naive::<f64>(&[], Direction::Forward), Err(Error::Empty));
    }

    #[test]
    fn naive_dft_roundtrip() {
        for n in [1, 3, 7, 16, 30] {
            let x = random_signal(n, n as u64);
            let back = dft_1d_naive(&dft_1d_naive(&x, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            assert!(max_err(&x, &back) <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn fft_impulse_and_errors() {
        let mut x = vec![c(0.0); 8];
        x[0] = c(1.0);
        let out = fft_1d(&x, Direction::Forward).unwrap();
        assert!(max_err(&out, &[c(1.0); 8]) == 0.0);
        assert_eq!(fft_1d(&[c(1.0); 6], Direction::Forward), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(fft_1d::<f64>(&[], Direction::Forward), Err(Error::Empty));
        assert_eq!(fft_1d(&[c(2.5)], Direction::Forward).unwrap(), vec![c(2.5)]);
    }

    #[test]
    fn fft_matches_naive_on_length_16() {
        let x = random_signal(16, 16);
        for dir in [Direction::Forward, Direction::Inverse] {
            let fast = fft_1d(&x, dir).unwrap();
            let slow = dft_1d_naive(&x, dir).unwrap();
            assert!(max_err(&fast, &slow) <= 1e-12 * max_norm(&slow));
        }
    }

    #[test]
    fn fft_matches_naive_all_pow2_lengths() {
        for p in 1..=8 {
            let n = 1 << p;
            let x = random_signal(n, 100 + p);
            let fast = fft_1d(&x, Direction::Forward).unwrap();
            let slow = dft_1d_naive(&x, Direction::Forward).unwrap();
            assert!(max_err(&fast, &slow) <= 1e-10 * max_norm(&slow), "n={n}");
        }
    }

    #[test]
    fn fft_is_linear() {
        let (x, y) = (random_signal(32, 1), random_signal(32, 2));
        let (alpha, beta) = (CRect::new(0.7, -1.3), CRect::new(-2.0, 0.25));
        let mix: Vec<_> = x.iter().zip(&y).map(|(a, b)| alpha * *a + beta * *b).collect();
        let lhs = fft_1d(&mix, Direction::Forward).unwrap();
        let fx = fft_1d(&x, Direction::Forward).unwrap();
        let fy = fft_1d(&y, Direction::Forward).unwrap();
        let rhs: Vec<_> = fx.iter().zip(&fy).map(|(a, b)| alpha * *a + beta * *b).collect();
        assert!(max_err(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn twiddles_are_roots_of_unity() {
        let r = Radix2::<f64>::new(16).unwrap();
        assert_eq!(r.twiddles().len(), 8);
        for (m, w) in r.twiddles().iter().enumerate() {
            let theta = -2.0 * std::f64::consts::PI * m as f64 / 16.0;
            assert!((w.re - theta.cos()).abs() < 1e-16 && (w.im - theta.sin()).abs() < 1e-16);
        }
    }

    #[test]
    fn cost_is_five_n_log_n() {
        for p in 0..10 {
            let n = 1usize << p;
            let cost = Radix2::<f32>::new(n).unwrap().cost();
            assert_eq!(cost.mul_add(), 5 * (n * p) as u64);
        }
    }
}
