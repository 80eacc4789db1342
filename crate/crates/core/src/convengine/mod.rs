//! Forward and backward 2-D convolutions over three interchangeable
//! backends.
//!
//! Shapes follow the usual layout: inputs `[B, f₁, N, N]`, kernels
//! `[f₂, f₁, K, K]`, outputs `[B, f₂, M, M]` with `M = N + 2P − K + 1`.
//! Only square images and kernels with stride, dilation and groups of 1 are
//! supported; anything else is an [`Error::UnsupportedGeometry`] and callers
//! should fall back to a generic implementation.

mod direct;
mod pipeline;
mod product;

pub use direct::{direct_crosscorr, direct_fullconv};
pub use product::{
    convert_spectrum_to_phasor, convert_spectrum_to_rect, spectral_product_phasor, spectral_product_rect,
    sum_phasor_products, REDUCE_COST,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flops::{CallRecord, FlopLedger, StageTimes};
use crate::spectral::{plan_fft, FftPlan, RealTensor4};
use crate::{Error, Real, Result};
use pipeline::{Contraction, Operand};

/// Which implementation computes the convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    /// Sliding-window loops in the spatial domain.
    #[serde(rename = "direct")]
    DirectSpatial,
    /// FFT with rectangular-form spectral products.
    #[serde(rename = "rect")]
    SpectralRect,
    /// FFT with phasor-form spectral products.
    #[serde(rename = "phasor")]
    SpectralPhasor,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::DirectSpatial, Backend::SpectralRect, Backend::SpectralPhasor];

    pub const fn name(self) -> &'static str {
        match self {
            Backend::DirectSpatial => "direct",
            Backend::SpectralRect => "rect",
            Backend::SpectralPhasor => "phasor",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "direct-spatial" => Ok(Backend::DirectSpatial),
            "rect" | "spectral-rect" => Ok(Backend::SpectralRect),
            "phasor" | "spectral-phasor" => Ok(Backend::SpectralPhasor),
            other => Err(Error::InvalidArgument(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvOp {
    Forward,
    BackwardInput,
    BackwardKernel,
}

/// Validated layer geometry with its FFT plan.
#[derive(Debug, Clone)]
pub struct ConvParams<T> {
    batch: usize,
    in_channels: usize,
    out_channels: usize,
    image: usize,
    kernel: usize,
    padding: usize,
    plan: FftPlan<T>,
}

impl<T: Real> ConvParams<T> {
    /// Stride, dilation and groups fixed at 1.
    pub fn new(
        batch: usize,
        in_channels: usize,
        out_channels: usize,
        image: usize,
        kernel: usize,
        padding: usize,
    ) -> Result<Self> {
        Self::with_options(batch, in_channels, out_channels, image, kernel, padding, 1, 1, 1)
    }

    /// Full layer description; any stride, dilation or group count other
    /// than 1 is rejected as unsupported.
    #[allow(clippy::too_many_arguments)]
    pub fn with_options(
        batch: usize,
        in_channels: usize,
        out_channels: usize,
        image: usize,
        kernel: usize,
        padding: usize,
        stride: usize,
        dilation: usize,
        groups: usize,
    ) -> Result<Self> {
        if stride != 1 || dilation != 1 || groups != 1 {
            return Err(Error::UnsupportedGeometry(format!(
                "stride {stride}, dilation {dilation}, groups {groups} (only 1/1/1)"
            )));
        }
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::UnsupportedGeometry("channel counts must be positive".into()));
        }
        let plan = plan_fft(image, kernel, padding)?;
        Ok(ConvParams {
            batch,
            in_channels,
            out_channels,
            image,
            kernel,
            padding,
            plan,
        })
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn image(&self) -> usize {
        self.image
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn plan(&self) -> &FftPlan<T> {
        &self.plan
    }

    /// `N + 2P − K + 1`.
    pub fn out_len(&self) -> usize {
        self.plan.valid_out_len()
    }

    pub fn input_dims(&self) -> [usize; 4] {
        [self.batch, self.in_channels, self.image, self.image]
    }

    pub fn kernel_dims(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.kernel, self.kernel]
    }

    pub fn output_dims(&self) -> [usize; 4] {
        let m = self.out_len();
        [self.batch, self.out_channels, m, m]
    }

    /// Same layer with a different batch size.
    pub fn with_batch(&self, batch: usize) -> Self {
        ConvParams { batch, ..self.clone() }
    }

    fn record(&self, op: ConvOp, backend: Backend) -> CallRecord {
        CallRecord {
            op,
            backend,
            batch: self.batch,
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            image: self.image,
            kernel: self.kernel,
            padding: self.padding,
            fft_len: self.plan.fft_len(),
        }
    }
}

/// Convolution engine for one backend. Immutable; calls are reentrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvEngine {
    backend: Backend,
    threads: usize,
    flip_conjugation: bool,
}

impl ConvEngine {
    pub fn new(backend: Backend) -> Self {
        ConvEngine {
            backend,
            threads: 1,
            flip_conjugation: false,
        }
    }

    /// Worker-thread hint for the output-slice loop of spectral backends.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    /// Fault injection: swaps which operations conjugate their second
    /// spectrum. Only useful for checking that verification catches it.
    #[doc(hidden)]
    pub fn with_flipped_conjugation(mut self) -> Self {
        self.flip_conjugation = true;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// `y[b, f₂] = Σ_{f₁} x[b, f₁] ⋆ w[f₂, f₁]` with zero padding `P`.
    pub fn forward<T: Real>(
        &self,
        x: &RealTensor4<T>,
        w: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
    ) -> Result<RealTensor4<T>> {
        self.forward_timed(x, w, params, ledger, None)
    }

    pub fn forward_timed<T: Real>(
        &self,
        x: &RealTensor4<T>,
        w: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
        times: Option<&mut StageTimes>,
    ) -> Result<RealTensor4<T>> {
        x.expect_dims("forward input", params.input_dims())?;
        w.expect_dims("forward kernel", params.kernel_dims())?;
        x.check_finite("forward input")?;
        w.check_finite("forward kernel")?;
        ledger.record_call(params.record(ConvOp::Forward, self.backend));

        let [nb, f2, m, _] = params.output_dims();
        let f1 = params.in_channels;
        if self.backend == Backend::DirectSpatial {
            let mut y = RealTensor4::zeros(params.output_dims());
            for b in 0..nb {
                for o in 0..f2 {
                    let acc = y.plane_mut(b, o);
                    for i in 0..f1 {
                        let part = direct_crosscorr(
                            x.plane(b, i),
                            params.image,
                            w.plane(o, i),
                            params.kernel,
                            params.padding,
                        )?;
                        acc.iter_mut().zip(&part).for_each(|(a, p)| *a += *p);
                    }
                }
            }
            return Ok(y);
        }

        let c = Contraction {
            a: Operand {
                tensor: x,
                offset: params.padding,
                index: |b, i, d| b * d[1] + i,
            },
            b: Operand {
                tensor: w,
                offset: 0,
                index: |o, i, d| o * d[1] + i,
            },
            conj_b: !self.flip_conjugation,
            extent: (nb, f2, f1),
            out_dims: [nb, f2, m, m],
            out_index: |b, o, d| b * d[1] + o,
            crop_offset: 0,
        };
        Ok(self.run(&c, params, ledger, times))
    }

    /// `∂L/∂x[b, f₁] = Σ_{f₂} ∂L/∂y[b, f₂] ∗ w[f₂, f₁]`, cropped by `P`.
    pub fn backward_input<T: Real>(
        &self,
        grad_y: &RealTensor4<T>,
        w: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
    ) -> Result<RealTensor4<T>> {
        self.backward_input_timed(grad_y, w, params, ledger, None)
    }

    pub fn backward_input_timed<T: Real>(
        &self,
        grad_y: &RealTensor4<T>,
        w: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
        times: Option<&mut StageTimes>,
    ) -> Result<RealTensor4<T>> {
        grad_y.expect_dims("backward_input grad_y", params.output_dims())?;
        w.expect_dims("backward_input kernel", params.kernel_dims())?;
        grad_y.check_finite("backward_input grad_y")?;
        w.check_finite("backward_input kernel")?;
        ledger.record_call(params.record(ConvOp::BackwardInput, self.backend));

        let [nb, f1, n, _] = params.input_dims();
        let f2 = params.out_channels;
        let m = params.out_len();
        if self.backend == Backend::DirectSpatial {
            let mut dx = RealTensor4::zeros(params.input_dims());
            for b in 0..nb {
                for i in 0..f1 {
                    let acc = dx.plane_mut(b, i);
                    for o in 0..f2 {
                        let part =
                            direct_fullconv(grad_y.plane(b, o), m, w.plane(o, i), params.kernel, params.padding)?;
                        acc.iter_mut().zip(&part).for_each(|(a, p)| *a += *p);
                    }
                }
            }
            return Ok(dx);
        }

        let c = Contraction {
            a: Operand {
                tensor: grad_y,
                offset: 0,
                index: |b, o, d| b * d[1] + o,
            },
            b: Operand {
                tensor: w,
                offset: 0,
                // w is [f₂, f₁]: the reduction runs over f₂
                index: |i, o, d| o * d[1] + i,
            },
            conj_b: self.flip_conjugation,
            extent: (nb, f1, f2),
            out_dims: [nb, f1, n, n],
            out_index: |b, i, d| b * d[1] + i,
            crop_offset: params.padding,
        };
        Ok(self.run(&c, params, ledger, times))
    }

    /// `∂L/∂w[f₂, f₁] = Σ_b x[b, f₁] ⋆ ∂L/∂y[b, f₂]` with `x` zero-padded.
    pub fn backward_kernel<T: Real>(
        &self,
        grad_y: &RealTensor4<T>,
        x: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
    ) -> Result<RealTensor4<T>> {
        self.backward_kernel_timed(grad_y, x, params, ledger, None)
    }

    pub fn backward_kernel_timed<T: Real>(
        &self,
        grad_y: &RealTensor4<T>,
        x: &RealTensor4<T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
        times: Option<&mut StageTimes>,
    ) -> Result<RealTensor4<T>> {
        grad_y.expect_dims("backward_kernel grad_y", params.output_dims())?;
        x.expect_dims("backward_kernel input", params.input_dims())?;
        grad_y.check_finite("backward_kernel grad_y")?;
        x.check_finite("backward_kernel input")?;
        ledger.record_call(params.record(ConvOp::BackwardKernel, self.backend));

        let [f2, f1, k, _] = params.kernel_dims();
        let nb = params.batch;
        let m = params.out_len();
        if self.backend == Backend::DirectSpatial {
            let mut dw = RealTensor4::zeros(params.kernel_dims());
            for o in 0..f2 {
                for i in 0..f1 {
                    let acc = dw.plane_mut(o, i);
                    for b in 0..nb {
                        let part =
                            direct_crosscorr(x.plane(b, i), params.image, grad_y.plane(b, o), m, params.padding)?;
                        acc.iter_mut().zip(&part).for_each(|(a, p)| *a += *p);
                    }
                }
            }
            return Ok(dw);
        }

        let c = Contraction {
            a: Operand {
                tensor: x,
                offset: params.padding,
                index: |i, b, d| b * d[1] + i,
            },
            b: Operand {
                tensor: grad_y,
                offset: 0,
                index: |o, b, d| b * d[1] + o,
            },
            conj_b: !self.flip_conjugation,
            extent: (f1, f2, nb),
            out_dims: [f2, f1, k, k],
            out_index: |i, o, d| o * d[1] + i,
            crop_offset: 0,
        };
        Ok(self.run(&c, params, ledger, times))
    }

    fn run<T: Real>(
        &self,
        c: &Contraction<'_, T>,
        params: &ConvParams<T>,
        ledger: &mut FlopLedger,
        times: Option<&mut StageTimes>,
    ) -> RealTensor4<T> {
        let phasor = self.backend == Backend::SpectralPhasor;
        pipeline::run(c, params.plan(), phasor, self.threads, ledger, times)
    }
}

/// [`ConvEngine::forward`] on a default engine.
pub fn forward<T: Real>(
    x: &RealTensor4<T>,
    w: &RealTensor4<T>,
    params: &ConvParams<T>,
    backend: Backend,
    ledger: &mut FlopLedger,
) -> Result<RealTensor4<T>> {
    ConvEngine::new(backend).forward(x, w, params, ledger)
}

/// [`ConvEngine::backward_input`] on a default engine.
pub fn backward_input<T: Real>(
    grad_y: &RealTensor4<T>,
    w: &RealTensor4<T>,
    params: &ConvParams<T>,
    backend: Backend,
    ledger: &mut FlopLedger,
) -> Result<RealTensor4<T>> {
    ConvEngine::new(backend).backward_input(grad_y, w, params, ledger)
}

/// [`ConvEngine::backward_kernel`] on a default engine.
pub fn backward_kernel<T: Real>(
    grad_y: &RealTensor4<T>,
    x: &RealTensor4<T>,
    params: &ConvParams<T>,
    backend: Backend,
    ledger: &mut FlopLedger,
) -> Result<RealTensor4<T>> {
    ConvEngine::new(backend).backward_kernel(grad_y, x, params, ledger)
}
