//! Oracles shared by the integration tests. Nothing here calls into the
//! engine's own spatial or spectral code.

#![allow(dead_code)]

use phasorconv::{Real, RealTensor4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor<T: Real>(rng: &mut ChaCha8Rng, dims: [usize; 4]) -> RealTensor4<T> {
    RealTensor4::from_fn(dims, |_| T::from_f64(rng.random_range(-1.0..1.0)))
}

/// `y[b,o,i,j] = Σ_c Σ_{u,v} x[b,c,i+u−P,j+v−P] · w[o,c,u,v]`, zero outside.
pub fn oracle_forward(x: &RealTensor4<f64>, w: &RealTensor4<f64>, p: usize) -> RealTensor4<f64> {
    let [nb, f1, n, _] = x.dims();
    let [f2, _, k, _] = w.dims();
    let m = n + 2 * p + 1 - k;
    RealTensor4::from_fn([nb, f2, m, m], |[b, o, i, j]| {
        let mut s = 0.0;
        for c in 0..f1 {
            for u in 0..k {
                for v in 0..k {
                    let (r, q) = ((i + u) as isize - p as isize, (j + v) as isize - p as isize);
                    if r >= 0 && q >= 0 && (r as usize) < n && (q as usize) < n {
                        s += x.get([b, c, r as usize, q as usize]) * w.get([o, c, u, v]);
                    }
                }
            }
        }
        s
    })
}

/// Adjoint of [`oracle_forward`] with respect to `x`, by scattering.
pub fn oracle_backward_input(g: &RealTensor4<f64>, w: &RealTensor4<f64>, n: usize, p: usize) -> RealTensor4<f64> {
    let [nb, f2, m, _] = g.dims();
    let [_, f1, k, _] = w.dims();
    let mut dx = RealTensor4::zeros([nb, f1, n, n]);
    for b in 0..nb {
        for o in 0..f2 {
            for c in 0..f1 {
                for i in 0..m {
                    for j in 0..m {
                        let gv = g.get([b, o, i, j]);
                        for u in 0..k {
                            for v in 0..k {
                                let (r, q) = ((i + u) as isize - p as isize, (j + v) as isize - p as isize);
                                if r >= 0 && q >= 0 && (r as usize) < n && (q as usize) < n {
                                    let idx = [b, c, r as usize, q as usize];
                                    dx.set(idx, dx.get(idx) + gv * w.get([o, c, u, v]));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    dx
}

/// Adjoint of [`oracle_forward`] with respect to `w`.
pub fn oracle_backward_kernel(g: &RealTensor4<f64>, x: &RealTensor4<f64>, k: usize, p: usize) -> RealTensor4<f64> {
    let [nb, f2, m, _] = g.dims();
    let [_, f1, n, _] = x.dims();
    RealTensor4::from_fn([f2, f1, k, k], |[o, c, u, v]| {
        let mut s = 0.0;
        for b in 0..nb {
            for i in 0..m {
                for j in 0..m {
                    let (r, q) = ((i + u) as isize - p as isize, (j + v) as isize - p as isize);
                    if r >= 0 && q >= 0 && (r as usize) < n && (q as usize) < n {
                        s += g.get([b, o, i, j]) * x.get([b, c, r as usize, q as usize]);
                    }
                }
            }
        }
        s
    })
}

/// Central difference of `f` at every entry of `t`.
pub fn central_difference(
    t: &RealTensor4<f64>,
    h: f64,
    mut f: impl FnMut(&RealTensor4<f64>) -> f64,
) -> RealTensor4<f64> {
    let mut probe = t.clone();
    let mut out = RealTensor4::zeros(t.dims());
    for k in 0..t.len() {
        let v = t.data()[k];
        probe.data_mut()[k] = v + h;
        let up = f(&probe);
        probe.data_mut()[k] = v - h;
        let down = f(&probe);
        probe.data_mut()[k] = v;
        out.data_mut()[k] = (up - down) / (2.0 * h);
    }
    out
}

/// `max|a − b| / max|b|`, the norm-wise relative error against reference `b`.
pub fn relative_error(a: &RealTensor4<f64>, b: &RealTensor4<f64>) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}
