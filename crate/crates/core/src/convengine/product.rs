//! Element-wise spectral kernels and their cost accounting.
//!
//! Both forms work on structure-of-arrays planes (`re`/`im` or `mag`/`ang`)
//! so the two product loops have identical memory access patterns.

use crate::complexforms::{OpCost, MUL_PHASOR_COST, MUL_RECT_COST, TO_PHASOR_COST, TO_RECTANGULAR_COST};
use crate::flops::{FlopLedger, Stage};
use crate::spectral::{SpectrumPhasor, SpectrumRect};
use crate::{Error, Real, Result};

/// Accumulating one product element into a running sum.
pub const REDUCE_COST: OpCost = OpCost::new(0, 2, 0, 0, 0);

/// `out = a · b` (or `a · conj(b)`), elementwise in rectangular form.
#[inline]
pub(crate) fn product_rect_slab<T: Real>(a: (&[T], &[T]), b: (&[T], &[T]), conj_b: bool, out: (&mut [T], &mut [T])) {
    let n = out.0.len();
    let (ar, ai) = (&a.0[..n], &a.1[..n]);
    let (br, bi) = (&b.0[..n], &b.1[..n]);
    let (or, oi) = (out.0, &mut out.1[..n]);
    if conj_b {
        for k in 0..n {
            or[k] = ar[k] * br[k] + ai[k] * bi[k];
            oi[k] = ai[k] * br[k] - ar[k] * bi[k];
        }
    } else {
        for k in 0..n {
            or[k] = ar[k] * br[k] - ai[k] * bi[k];
            oi[k] = ai[k] * br[k] + ar[k] * bi[k];
        }
    }
}

/// `out = a · b` (or `a · conj(b)`), elementwise in phasor form.
#[inline]
pub(crate) fn product_phasor_slab<T: Real>(a: (&[T], &[T]), b: (&[T], &[T]), conj_b: bool, out: (&mut [T], &mut [T])) {
    T::phasor_product_slab(a, b, conj_b, out);
}

/// Rectangular planes to phasor planes.
#[inline]
pub(crate) fn rect_to_phasor_slab<T: Real>(src: (&[T], &[T]), dst: (&mut [T], &mut [T])) {
    T::polar_slab(src.0, src.1, dst.0, dst.1);
}

/// Phasor planes to rectangular planes, in place.
#[inline]
pub(crate) fn phasor_to_rect_in_place<T: Real>(mag: &mut [T], ang: &mut [T]) {
    T::rect_slab_in_place(mag, ang);
}

#[inline]
pub(crate) fn accumulate_slab<T: Real>(acc: (&mut [T], &mut [T]), src: (&[T], &[T])) {
    let n = acc.0.len();
    let (sr, si) = (&src.0[..n], &src.1[..n]);
    let (ar, ai) = (acc.0, &mut acc.1[..n]);
    for k in 0..n {
        ar[k] += sr[k];
        ai[k] += si[k];
    }
}

pub(crate) fn product_cost(phasor: bool, elements: u64) -> OpCost {
    if phasor {
        MUL_PHASOR_COST.times(elements)
    } else {
        MUL_RECT_COST.times(elements)
    }
}

fn check_broadcast(x: [usize; 4], w: [usize; 4]) -> Result<()> {
    if x[1] != w[1] || x[2] != w[2] || x[3] != w[3] {
        return Err(Error::shape(
            "spectral operands",
            &[x[1], x[2], x[3]],
            &[w[1], w[2], w[3]],
        ));
    }
    Ok(())
}

/// Converts every element to phasor form, charging `phasor_convert_in`.
pub fn convert_spectrum_to_phasor<T: Real>(x: &SpectrumRect<T>, ledger: &mut FlopLedger) -> SpectrumPhasor<T> {
    let mut out = SpectrumPhasor::zeros(x.dims());
    rect_to_phasor_slab((x.re(), x.im()), (&mut out.mag, &mut out.ang));
    ledger.charge(Stage::PhasorConvertIn, TO_PHASOR_COST.times(x.re().len() as u64));
    out
}

/// Converts every element to rectangular form, charging `phasor_convert_out`.
pub fn convert_spectrum_to_rect<T: Real>(x: &SpectrumPhasor<T>, ledger: &mut FlopLedger) -> SpectrumRect<T> {
    let (mut re, mut im) = (x.mag().to_vec(), x.ang().to_vec());
    phasor_to_rect_in_place(&mut re, &mut im);
    ledger.charge(Stage::PhasorConvertOut, TO_RECTANGULAR_COST.times(re.len() as u64));
    SpectrumRect::from_planes(x.dims(), re, im).expect("planes sized from source")
}

/// Broadcast product with reduction over the shared axis:
/// `out[i, j] = Σ_r x[i, r] · w[j, r]`, with `w` conjugated when `conj_w`.
///
/// `x` has dims `[I, R, h, c]` and `w` has `[J, R, h, c]`; the result is
/// `[I, J, h, c]`.
pub fn spectral_product_rect<T: Real>(
    x: &SpectrumRect<T>,
    w: &SpectrumRect<T>,
    conj_w: bool,
    ledger: &mut FlopLedger,
) -> Result<SpectrumRect<T>> {
    let (xd, wd) = (x.dims(), w.dims());
    check_broadcast(xd, wd)?;
    let (ni, nj, nr, e) = (xd[0], wd[0], xd[1], x.slab_len());
    let mut out = SpectrumRect::zeros([ni, nj, xd[2], xd[3]]);
    let mut tmp = (vec![T::zero(); e], vec![T::zero(); e]);
    for i in 0..ni {
        for j in 0..nj {
            let (acc_re, acc_im) = out.slab_mut(i * nj + j);
            for r in 0..nr {
                product_rect_slab(x.slab(i * nr + r), w.slab(j * nr + r), conj_w, (&mut tmp.0, &mut tmp.1));
                accumulate_slab((&mut *acc_re, &mut *acc_im), (&tmp.0, &tmp.1));
            }
        }
    }
    let pairs = (ni * nj * nr * e) as u64;
    ledger.charge(Stage::SpectralProduct, product_cost(false, pairs));
    ledger.charge(Stage::ChannelReduce, REDUCE_COST.times(pairs));
    Ok(out)
}

/// Broadcast product without reduction: `out[i, j·R + r] = x[i, r] · w[j, r]`.
///
/// Phasors have no cheap addition, so the sum over `r` is left to
/// [`sum_phasor_products`] after conversion back to rectangular form.
pub fn spectral_product_phasor<T: Real>(
    x: &SpectrumPhasor<T>,
    w: &SpectrumPhasor<T>,
    conj_w: bool,
    ledger: &mut FlopLedger,
) -> Result<SpectrumPhasor<T>> {
    let (xd, wd) = (x.dims(), w.dims());
    check_broadcast(xd, wd)?;
    let (ni, nj, nr) = (xd[0], wd[0], xd[1]);
    let mut out = SpectrumPhasor::zeros([ni, nj * nr, xd[2], xd[3]]);
    for i in 0..ni {
        for j in 0..nj {
            for r in 0..nr {
                let dst = out.slab_mut(i * nj * nr + j * nr + r);
                product_phasor_slab(x.slab(i * nr + r), w.slab(j * nr + r), conj_w, dst);
            }
        }
    }
    let pairs = out.mag().len() as u64;
    ledger.charge(Stage::SpectralProduct, product_cost(true, pairs));
    ledger.count_wraps(pairs);
    Ok(out)
}

/// Converts phasor products back to rectangular form and sums each run of
/// `group` consecutive slabs along the second axis.
pub fn sum_phasor_products<T: Real>(
    p: &SpectrumPhasor<T>,
    group: usize,
    ledger: &mut FlopLedger,
) -> Result<SpectrumRect<T>> {
    let d = p.dims();
    if group == 0 || !d[1].is_multiple_of(group) {
        return Err(Error::InvalidArgument(format!(
            "cannot group {} slabs into runs of {group}",
            d[1]
        )));
    }
    let rect = convert_spectrum_to_rect(p, ledger);
    let mut out = SpectrumRect::zeros([d[0], d[1] / group, d[2], d[3]]);
    for s in 0..out.slab_count() {
        let (acc_re, acc_im) = out.slab_mut(s);
        for r in 0..group {
            accumulate_slab((&mut *acc_re, &mut *acc_im), rect.slab(s * group + r));
        }
    }
    ledger.charge(Stage::ChannelReduce, REDUCE_COST.times(p.mag().len() as u64));
    Ok(out)
}
