//! Discrete Fourier machinery: naive DFT oracle, radix-2 FFT, 2-D real
//! transforms and plan sizing for linear convolution.

mod fft;
mod plan;
mod real2d;
mod tensor;

pub use fft::{dft_1d_naive, fft_1d, Direction, Radix2};
pub use plan::{crop, embed, plan_fft, FftPlan};
pub use real2d::{irfft2, irfft2_checked, irfft2_cost, irfft2_into, rfft2, rfft2_cost, rfft2_into, Scratch};
pub use tensor::{RealTensor4, SpectrumPhasor, SpectrumRect};
