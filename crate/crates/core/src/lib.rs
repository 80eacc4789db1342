//! FFT-based 2-D convolution with two interchangeable spectral product
//! representations.
//!
//! The spectral-domain element-wise product at the heart of FFT convolution
//! can be carried out on complex numbers in rectangular form (`a + jb`,
//! four real multiplies and two adds) or in phasor form (`|z|∠φ`, one
//! multiply and one add). This crate implements both alongside a direct
//! spatial oracle, for all three convolutions a trainable conv layer needs:
//!
//! * [`convengine::ConvEngine::forward`]: `y = Σ x ⋆ w`
//! * [`convengine::ConvEngine::backward_input`]: `∂L/∂x = Σ ∂L/∂y ∗ wᵀ`
//! * [`convengine::ConvEngine::backward_kernel`]: `∂L/∂w = Σ ∂L/∂y ⋆ x`
//!
//! Every spectral call charges a [`flops::FlopLedger`], and
//! [`flops::reconcile`] checks the measured counts against the closed-form
//! [`flops::CostModel`].

pub mod complexforms;
pub mod convengine;
mod error;
pub mod flops;
pub mod nn;
mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub use complexforms::{CPhasor, CRect, OpCost};
pub use convengine::{Backend, ConvEngine, ConvParams};
pub use flops::{CostModel, FlopLedger, Stage};
pub use spectral::{FftPlan, RealTensor4, SpectrumPhasor, SpectrumRect};
