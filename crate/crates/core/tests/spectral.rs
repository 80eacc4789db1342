mod common;

use common::*;
use phasorconv::spectral::{dft_1d_naive, fft_1d, irfft2, irfft2_checked, plan_fft, rfft2, Direction};
use phasorconv::{CRect, RealTensor4};
use proptest::prelude::*;
use rand::Rng;

fn random_signal(seed: u64, n: usize) -> Vec<CRect<f64>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| CRect::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect()
}

fn max_err(a: &[CRect<f64>], b: &[CRect<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max)
}

#[test]
fn fft_matches_naive_dft_on_all_power_of_two_lengths() {
    for log in 1..=8 {
        let n = 1 << log;
        let x = random_signal(n as u64, n);
        for dir in [Direction::Forward, Direction::Inverse] {
            let fast = fft_1d(&x, dir).unwrap();
            let slow = dft_1d_naive(&x, dir).unwrap();
            let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max_err(&fast, &slow) <= 1e-10 * scale, "n={n} {dir:?}");
        }
    }
}

#[test]
fn convolution_theorem_on_padded_planes() {
    // direct linear convolution of a 5×5 image and a 3×3 kernel against the
    // spectral product, inside a 16×16 transform
    let (n, k) = (5, 3);
    let plan = plan_fft::<f64>(16, 1, 0).unwrap();
    assert_eq!(plan.fft_len(), 16);
    let mut r = rng(8);
    let x = random_tensor::<f64>(&mut r, [1, 1, n, n]);
    let w = random_tensor::<f64>(&mut r, [1, 1, k, k]);
    let mut xp = vec![0.0; 256];
    let mut wp = vec![0.0; 256];
    for i in 0..n {
        for j in 0..n {
            xp[i * 16 + j] = x.get([0, 0, i, j]);
        }
    }
    for i in 0..k {
        for j in 0..k {
            wp[i * 16 + j] = w.get([0, 0, i, j]);
        }
    }
    let (xs, ws) = (rfft2(&xp, &plan).unwrap(), rfft2(&wp, &plan).unwrap());
    let re: Vec<f64> = (0..xs.re().len())
        .map(|e| xs.re()[e] * ws.re()[e] - xs.im()[e] * ws.im()[e])
        .collect();
    let im: Vec<f64> = (0..xs.re().len())
        .map(|e| xs.re()[e] * ws.im()[e] + xs.im()[e] * ws.re()[e])
        .collect();
    let prod = phasorconv::SpectrumRect::from_planes(xs.dims(), re, im).unwrap();
    let y = irfft2(&prod, &plan).unwrap();
    let full = n + k - 1;
    let mut err: f64 = 0.0;
    for i in 0..16 {
        for j in 0..16 {
            let mut s = 0.0;
            if i < full && j < full {
                for u in 0..k {
                    for v in 0..k {
                        if i >= u && j >= v && i - u < n && j - v < n {
                            s += x.get([0, 0, i - u, j - v]) * w.get([0, 0, u, v]);
                        }
                    }
                }
            }
            err = err.max((y[i * 16 + j] - s).abs());
        }
    }
    assert!(err <= 1e-9, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_round_trip_and_parseval(seed in any::<u64>(), big in any::<bool>()) {
        let l = if big { 32 } else { 16 };
        let plan = plan_fft::<f64>(l, 1, 0).unwrap();
        let x = random_tensor::<f64>(&mut rng(seed), [1, 1, l, l]);
        let spec = rfft2(x.data(), &plan).unwrap();
        let (back, residue) = irfft2_checked(&spec, &plan).unwrap();
        let back = RealTensor4::new([1, 1, l, l], back).unwrap();
        prop_assert!(back.max_abs_diff(&x) <= 1e-12);
        let max_spec = spec.re().iter().chain(spec.im()).fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(residue <= 1e-10 * max_spec);

        // Parseval over the full spectrum: interior columns appear twice
        let h = l / 2 + 1;
        let energy_time: f64 = x.data().iter().map(|v| v * v).sum();
        let mut energy_freq = 0.0;
        for row in 0..l {
            for col in 0..h {
                let e = row * h + col;
                let w = if col == 0 || col == l / 2 { 1.0 } else { 2.0 };
                energy_freq += w * (spec.re()[e].powi(2) + spec.im()[e].powi(2));
            }
        }
        energy_freq /= (l * l) as f64;
        prop_assert!((energy_time - energy_freq).abs() <= 1e-9 * energy_time);
    }
}
