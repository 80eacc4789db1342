use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, NumAssign};
use wide::{f32x8, f64x4};

/// Working scalar of the engine: `f32` or `f64`.
pub trait Real: Float + FloatConst + NumAssign + Default + Debug + Display + Send + Sync + 'static {
    /// Short type tag used in reports ("f32" / "f64").
    const NAME: &'static str;
    /// Machine epsilon as `f64`.
    const EPS: f64;

    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }

    /// `(re, im)` planes to `(mag, ang)` planes with `ang ∈ (−π, π]` and
    /// `mag == 0 ⇒ ang == 0`. All four slices have the same length.
    fn polar_slab(re: &[Self], im: &[Self], mag: &mut [Self], ang: &mut [Self]);

    /// `(mag, ang)` planes to `(re, im)` planes, in place.
    fn rect_slab_in_place(mag: &mut [Self], ang: &mut [Self]);

    /// Phasor product `(am·bm, wrap(aa ± ba))` with the canonical zero;
    /// `ba` is negated when `conj_b`. Angles in must lie in `(−π, π]`.
    fn phasor_product_slab(a: (&[Self], &[Self]), b: (&[Self], &[Self]), conj_b: bool, out: (&mut [Self], &mut [Self]));
}

macro_rules! simd_slabs {
    ($t:ty, $v:ty, $w:expr) => {
        fn polar_slab(re: &[$t], im: &[$t], mag: &mut [$t], ang: &mut [$t]) {
            let n = mag.len();
            let (re, im, ang) = (&re[..n], &im[..n], &mut ang[..n]);
            let split = n - n % $w;
            let (zero, pi, neg_pi) = (
                <$v>::splat(0.0),
                <$v>::splat(<$t>::PI()),
                <$v>::splat(-<$t>::PI()),
            );
            for k in (0..split).step_by($w) {
                let x = <$v>::from(<[$t; $w]>::try_from(&re[k..k + $w]).unwrap());
                let y = <$v>::from(<[$t; $w]>::try_from(&im[k..k + $w]).unwrap());
                let m = (x * x + y * y).sqrt();
                let a = <$v>::atan2(y, x);
                let a = a.simd_eq(neg_pi).select(pi, a);
                let a = m.simd_eq(zero).select(zero, a);
                mag[k..k + $w].copy_from_slice(&m.to_array());
                ang[k..k + $w].copy_from_slice(&a.to_array());
            }
            for k in split..n {
                let m = (re[k] * re[k] + im[k] * im[k]).sqrt();
                mag[k] = m;
                ang[k] = crate::complexforms::angle_of(re[k], im[k], m);
            }
        }

        fn phasor_product_slab(a: (&[$t], &[$t]), b: (&[$t], &[$t]), conj_b: bool, out: (&mut [$t], &mut [$t])) {
            let n = out.0.len();
            let (am, aa) = (&a.0[..n], &a.1[..n]);
            let (bm, ba) = (&b.0[..n], &b.1[..n]);
            let (om, oa) = (out.0, &mut out.1[..n]);
            let split = n - n % $w;
            let (zero, pi, neg_pi, tau) = (
                <$v>::splat(0.0),
                <$v>::splat(<$t>::PI()),
                <$v>::splat(-<$t>::PI()),
                <$v>::splat(<$t>::TAU()),
            );
            let load = |x: &[$t], k: usize| <$v>::from(<[$t; $w]>::try_from(&x[k..k + $w]).unwrap());
            // Sums lie in (−2π, 2π], so one masked ±τ lands them in (−π, π].
            let wrap = |s: $v| s - (s.simd_gt(pi) & tau) + (s.simd_le(neg_pi) & tau);
            let mut body = |k: usize, s: $v| {
                let m = load(am, k) * load(bm, k);
                om[k..k + $w].copy_from_slice(&m.to_array());
                oa[k..k + $w].copy_from_slice(&(wrap(s) & !m.simd_eq(zero)).to_array());
            };
            if conj_b {
                for k in (0..split).step_by($w) {
                    body(k, load(aa, k) - load(ba, k));
                }
            } else {
                for k in (0..split).step_by($w) {
                    body(k, load(aa, k) + load(ba, k));
                }
            }
            for k in split..n {
                let m = am[k] * bm[k];
                let s = crate::complexforms::wrap_sum(if conj_b { aa[k] - ba[k] } else { aa[k] + ba[k] });
                om[k] = m;
                oa[k] = if m == 0.0 { 0.0 } else { s };
            }
        }

        fn rect_slab_in_place(mag: &mut [$t], ang: &mut [$t]) {
            let n = mag.len();
            let ang = &mut ang[..n];
            let split = n - n % $w;
            for k in (0..split).step_by($w) {
                let m = <$v>::from(<[$t; $w]>::try_from(&mag[k..k + $w]).unwrap());
                let a = <$v>::from(<[$t; $w]>::try_from(&ang[k..k + $w]).unwrap());
                let (s, c) = a.sin_cos();
                mag[k..k + $w].copy_from_slice(&(m * c).to_array());
                ang[k..k + $w].copy_from_slice(&(m * s).to_array());
            }
            for k in split..n {
                let (s, c) = ang[k].sin_cos();
                let m = mag[k];
                mag[k] = m * c;
                ang[k] = m * s;
            }
        }
    };
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    const EPS: f64 = f32::EPSILON as f64;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    simd_slabs!(f32, f32x8, 8);
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    const EPS: f64 = f64::EPSILON;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    simd_slabs!(f64, f64x4, 4);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexforms::{angle_of, wrap_sum};

    fn check_polar<T: Real>(tol: f64) {
        // 19 covers full vectors plus a scalar tail for both widths
        let mut re: Vec<T> = (0..19)
            .map(|k| T::from_f64((k as f64 * 0.7).cos() * (k as f64 - 9.0)))
            .collect();
        let mut im: Vec<T> = (0..19).map(|k| T::from_f64((k as f64 * 1.3).sin() * 2.5)).collect();
        re[2] = T::zero();
        im[2] = T::zero();
        re[3] = -T::one();
        im[3] = -T::zero();
        re[17] = -T::one();
        im[17] = -T::zero();
        let (mut mag, mut ang) = (vec![T::zero(); 19], vec![T::zero(); 19]);
        T::polar_slab(&re, &im, &mut mag, &mut ang);
        for k in 0..19 {
            let m = (re[k] * re[k] + im[k] * im[k]).sqrt();
            assert!((mag[k] - m).abs().as_f64() <= tol * m.as_f64().max(1.0), "mag {k}");
            let a = angle_of(re[k], im[k], m);
            assert!((ang[k] - a).abs().as_f64() <= tol, "ang {k}: {} vs {}", ang[k], a);
            assert!(ang[k] > -T::PI() && ang[k] <= T::PI());
        }
        assert_eq!(ang[2], T::zero());
        assert_eq!(ang[3], T::PI());
        assert_eq!(ang[17], T::PI());
    }

    fn check_rect<T: Real>(tol: f64) {
        let mag: Vec<T> = (0..19).map(|k| T::from_f64(k as f64 * 0.5)).collect();
        let ang: Vec<T> = (0..19).map(|k| T::from_f64(-3.1 + k as f64 * 0.34)).collect();
        let (mut re, mut im) = (mag.clone(), ang.clone());
        T::rect_slab_in_place(&mut re, &mut im);
        for k in 0..19 {
            let (s, c) = ang[k].sin_cos();
            let scale = mag[k].as_f64().max(1.0);
            assert!((re[k] - mag[k] * c).abs().as_f64() <= tol * scale, "re {k}");
            assert!((im[k] - mag[k] * s).abs().as_f64() <= tol * scale, "im {k}");
        }
    }

    #[test]
    fn polar_slab_matches_scalar_rules() {
        check_polar::<f64>(4.0 * f64::EPSILON);
        check_polar::<f32>(8.0 * f32::EPSILON as f64);
    }

    #[test]
    fn rect_slab_matches_sin_cos() {
        check_rect::<f64>(4.0 * f64::EPSILON);
        check_rect::<f32>(8.0 * f32::EPSILON as f64);
    }

    fn check_product<T: Real>() {
        let pi = T::PI();
        let am: Vec<T> = (0..19).map(|k| T::from_f64(k as f64 * 0.25)).collect();
        let bm: Vec<T> = (0..19).map(|k| T::from_f64(2.0 - k as f64 * 0.1)).collect();
        let mut aa: Vec<T> = (0..19).map(|k| T::from_f64(-3.0 + k as f64 * 0.33)).collect();
        let mut ba: Vec<T> = (0..19).map(|k| T::from_f64(3.1 - k as f64 * 0.37)).collect();
        // Exact ±π sums on vector lanes and in the tail.
        for k in [1, 9, 18] {
            aa[k] = pi;
            ba[k] = pi;
        }
        aa[5] = -pi * T::from_f64(0.5);
        ba[5] = pi * T::from_f64(0.5);
        for conj in [false, true] {
            let (mut om, mut oa) = (vec![T::zero(); 19], vec![T::zero(); 19]);
            T::phasor_product_slab((&am, &aa), (&bm, &ba), conj, (&mut om, &mut oa));
            for k in 0..19 {
                let m = am[k] * bm[k];
                let s = wrap_sum(if conj { aa[k] - ba[k] } else { aa[k] + ba[k] });
                assert_eq!(om[k], m, "mag {k}");
                assert_eq!(oa[k], if m == T::zero() { T::zero() } else { s }, "ang {k} conj {conj}");
            }
            // Zero magnitude in lane 0 forces a zero angle.
            assert_eq!(oa[0], T::zero());
        }
    }

    #[test]
    fn phasor_product_slab_is_bitwise_scalar() {
        check_product::<f64>();
        check_product::<f32>();
    }
}
