//! The spectral pipeline shared by all three convolutions.
//!
//! Every operation is a contraction `out[i, j] = Σ_r A[i, r] ⊙ B[j, r]` in
//! the spectral domain, where `⊙` may conjugate `B`:
//!
//! 1. embed and transform all `A` and `B` planes,
//! 2. (phasor) convert both spectra to polar form,
//! 3. per output slice, multiply the `R` slab pairs,
//! 4. (phasor) convert the products back to rectangular form,
//! 5. sum over `r`, inverse transform and crop.

use std::time::Instant;

use super::product::{
    accumulate_slab, phasor_to_rect_in_place, product_cost, product_phasor_slab, product_rect_slab,
    rect_to_phasor_slab, REDUCE_COST,
};
use crate::complexforms::{TO_PHASOR_COST, TO_RECTANGULAR_COST};
use crate::flops::{FlopLedger, Stage, StageTimes};
use crate::spectral::{crop, embed, irfft2_cost, irfft2_into, rfft2_cost, rfft2_into, FftPlan, RealTensor4, Scratch};
use crate::Real;

/// Spatial operand: planes of a tensor addressed by `(outer, reduce)`.
pub(crate) struct Operand<'a, T> {
    pub tensor: &'a RealTensor4<T>,
    /// Embedding offset inside the `L × L` plane.
    pub offset: usize,
    /// Flat plane index of `(outer, reduce)`.
    pub index: fn(usize, usize, [usize; 4]) -> usize,
}

pub(crate) struct Contraction<'a, T> {
    pub a: Operand<'a, T>,
    pub b: Operand<'a, T>,
    pub conj_b: bool,
    /// `(I, J, R)`.
    pub extent: (usize, usize, usize),
    pub out_dims: [usize; 4],
    /// Flat output plane index of `(i, j)`.
    pub out_index: fn(usize, usize, [usize; 4]) -> usize,
    pub crop_offset: usize,
}

/// Half spectra stored in either form, one slab per tensor plane.
struct Spectra<T> {
    p: Vec<T>,
    q: Vec<T>,
    slab: usize,
}

impl<T: Real> Spectra<T> {
    fn slab(&self, s: usize) -> (&[T], &[T]) {
        let n = self.slab;
        (&self.p[s * n..(s + 1) * n], &self.q[s * n..(s + 1) * n])
    }
}

struct Probe<'a> {
    ledger: FlopLedger,
    times: Option<&'a mut StageTimes>,
    mark: Option<Instant>,
}

impl Probe<'_> {
    fn start(&mut self) {
        if self.times.is_some() {
            self.mark = Some(Instant::now());
        }
    }

    fn stop(&mut self, stage: Stage) {
        if let (Some(times), Some(t0)) = (self.times.as_deref_mut(), self.mark.take()) {
            times.add(stage, t0.elapsed());
        }
    }
}

fn transform_operand<T: Real>(
    op: &Operand<'_, T>,
    plan: &FftPlan<T>,
    stage: Stage,
    probe: &mut Probe<'_>,
) -> Spectra<T> {
    let l = plan.fft_len();
    let e = plan.spectrum_len();
    let t = op.tensor;
    let count = t.dims()[0] * t.dims()[1];
    let side = t.dims()[2];
    let mut out = Spectra {
        p: vec![T::zero(); count * e],
        q: vec![T::zero(); count * e],
        slab: e,
    };
    let mut plane = vec![T::zero(); l * l];
    let mut scratch = Scratch::new(plan);
    for s in 0..count {
        probe.start();
        let src = &t.data()[s * side * side..(s + 1) * side * side];
        embed(src, side, side, op.offset, l, &mut plane).expect("operand fits the planned transform");
        probe.stop(Stage::CropPad);
        probe.start();
        let (re, im) = (&mut out.p[s * e..(s + 1) * e], &mut out.q[s * e..(s + 1) * e]);
        rfft2_into(&plane, plan, re, im, &mut scratch);
        probe.stop(stage);
    }
    probe.ledger.charge(stage, rfft2_cost(plan).times(count as u64));
    probe.ledger.count_transforms(stage, count as u64);
    out
}

fn to_phasor<T: Real>(s: Spectra<T>, probe: &mut Probe<'_>) -> Spectra<T> {
    probe.start();
    let mut mag = vec![T::zero(); s.p.len()];
    let mut ang = vec![T::zero(); s.p.len()];
    rect_to_phasor_slab((&s.p, &s.q), (&mut mag, &mut ang));
    probe.stop(Stage::PhasorConvertIn);
    probe
        .ledger
        .charge(Stage::PhasorConvertIn, TO_PHASOR_COST.times(mag.len() as u64));
    Spectra {
        p: mag,
        q: ang,
        slab: s.slab,
    }
}

/// Runs a contraction. `threads > 1` splits the output slices across scoped
/// worker threads; results do not depend on the thread count.
pub(crate) fn run<T: Real>(
    c: &Contraction<'_, T>,
    plan: &FftPlan<T>,
    phasor: bool,
    threads: usize,
    ledger: &mut FlopLedger,
    times: Option<&mut StageTimes>,
) -> RealTensor4<T> {
    let mut out = RealTensor4::zeros(c.out_dims);
    let (ni, nj, nr) = c.extent;
    if ni * nj * nr == 0 {
        return out;
    }
    let mut probe = Probe {
        ledger: FlopLedger::new(),
        times,
        mark: None,
    };
    let mut a = transform_operand(&c.a, plan, Stage::RfftInput, &mut probe);
    let mut b = transform_operand(&c.b, plan, Stage::RfftKernel, &mut probe);
    if phasor {
        a = to_phasor(a, &mut probe);
        b = to_phasor(b, &mut probe);
    }

    let slices = ni * nj;
    let threads = threads.clamp(1, slices);
    let per = slices.div_ceil(threads);
    let results: Vec<SliceBatch<T>> = if threads == 1 {
        vec![contract_slices(
            c,
            plan,
            phasor,
            &a,
            &b,
            0..slices,
            probe.times.is_some(),
        )]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let (a, b) = (&a, &b);
                    let timed = probe.times.is_some();
                    let range = t * per..((t + 1) * per).min(slices);
                    scope.spawn(move || contract_slices(c, plan, phasor, a, b, range, timed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let side = c.out_dims[2];
    for (planes, worker_ledger, worker_times) in results {
        probe.ledger.merge(&worker_ledger);
        if let Some(t) = probe.times.as_deref_mut() {
            t.merge(&worker_times);
        }
        for (flat, plane) in planes {
            out.data_mut()[flat * side * side..(flat + 1) * side * side].copy_from_slice(&plane);
        }
    }
    ledger.merge(&probe.ledger);
    out
}

/// Cropped output planes keyed by flat output index, with their counts and times.
type SliceBatch<T> = (Vec<(usize, Vec<T>)>, FlopLedger, StageTimes);

fn contract_slices<T: Real>(
    c: &Contraction<'_, T>,
    plan: &FftPlan<T>,
    phasor: bool,
    a: &Spectra<T>,
    b: &Spectra<T>,
    range: std::ops::Range<usize>,
    timed: bool,
) -> SliceBatch<T> {
    let (_, nj, nr) = c.extent;
    let l = plan.fft_len();
    let e = plan.spectrum_len();
    let side = c.out_dims[2];
    let mut times = StageTimes::new();
    let mut probe = Probe {
        ledger: FlopLedger::new(),
        times: timed.then_some(&mut times),
        mark: None,
    };
    let mut prod_p = vec![T::zero(); nr * e];
    let mut prod_q = vec![T::zero(); nr * e];
    let mut acc = (vec![T::zero(); e], vec![T::zero(); e]);
    let mut plane = vec![T::zero(); l * l];
    let mut scratch = Scratch::new(plan);
    let mut planes = Vec::with_capacity(range.len());
    let (a_dims, b_dims) = (c.a.tensor.dims(), c.b.tensor.dims());

    for flat in range.clone() {
        let (i, j) = (flat / nj, flat % nj);

        probe.start();
        for (r, (pp, pq)) in prod_p.chunks_exact_mut(e).zip(prod_q.chunks_exact_mut(e)).enumerate() {
            let sa = a.slab((c.a.index)(i, r, a_dims));
            let sb = b.slab((c.b.index)(j, r, b_dims));
            if phasor {
                product_phasor_slab(sa, sb, c.conj_b, (pp, pq));
            } else {
                product_rect_slab(sa, sb, c.conj_b, (pp, pq));
            }
        }
        probe.stop(Stage::SpectralProduct);

        if phasor {
            probe.start();
            phasor_to_rect_in_place(&mut prod_p, &mut prod_q);
            probe.stop(Stage::PhasorConvertOut);
        }

        probe.start();
        acc.0.fill(T::zero());
        acc.1.fill(T::zero());
        for (pp, pq) in prod_p.chunks_exact(e).zip(prod_q.chunks_exact(e)) {
            accumulate_slab((&mut acc.0, &mut acc.1), (pp, pq));
        }
        probe.stop(Stage::ChannelReduce);

        probe.start();
        irfft2_into(&acc.0, &acc.1, plan, &mut plane, &mut scratch);
        probe.stop(Stage::IrfftOutput);

        probe.start();
        let mut cropped = vec![T::zero(); side * side];
        crop(&plane, l, c.crop_offset, side, &mut cropped).expect("output fits the planned transform");
        planes.push(((c.out_index)(i, j, c.out_dims), cropped));
        probe.stop(Stage::CropPad);
    }

    let slices = range.len() as u64;
    let pairs = slices * (nr * e) as u64;
    let ledger = &mut probe.ledger;
    ledger.charge(Stage::SpectralProduct, product_cost(phasor, pairs));
    if phasor {
        ledger.count_wraps(pairs);
        ledger.charge(Stage::PhasorConvertOut, TO_RECTANGULAR_COST.times(pairs));
    }
    ledger.charge(Stage::ChannelReduce, REDUCE_COST.times(pairs));
    ledger.charge(Stage::IrfftOutput, irfft2_cost(plan).times(slices));
    ledger.count_transforms(Stage::IrfftOutput, slices);
    let ledger = probe.ledger;
    (planes, ledger, times)
}
