//! Blind single-channel image restoration.
//!
//! The observation model is `g = f * h + n` with circular convolution: the
//! latent image `f` and the blur kernel `h` are estimated jointly by
//! alternating two split-Bregman solvers, each reduced to closed-form Fourier
//! quotients plus elementwise shrinkage. A hybrid sparse prior couples first-
//! and second-order image gradients, with the second-order weight driven
//! adaptively by the entropy of the evolving latent estimate.
//!
//! Layout:
//! - [`image`], [`kernel`]: value types and the kernel constraint projection.
//! - [`gradient`], [`adaptive`], [`metrics`]: finite differences, entropy and
//!   the adaptive weight, PSNR/SSIM.
//! - [`spectral`]: FFT plans, transfer functions, quotient solves.
//! - [`shrinkage`]: the Lp proximal operator (oracle and lookup table).
//! - [`kernel_solver`], [`image_solver`]: the two inner loops.
//! - [`pipeline`]: coarse-to-fine orchestration and ablation variants.
//! - [`synth`]: deterministic scenes and noise for tests and benchmarks.

pub mod adaptive;
pub mod config;
pub mod error;
pub mod gradient;
pub mod image;
pub mod image_solver;
pub mod kernel;
pub mod kernel_solver;
pub mod metrics;
pub mod pipeline;
pub mod shrinkage;
pub mod spectral;
pub mod synth;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use image::Image;
pub use kernel::{kernel_correlation, Kernel};
pub use pipeline::{
    ablation_variant, blind_deblur, blind_deblur_traced, nonblind_deblur, DeblurResult,
    PipelineOptions, RegularizerMode, TraceRecord,
};
