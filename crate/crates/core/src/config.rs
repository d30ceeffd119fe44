//! Scalar hyper-parameters shared by the two sub-problem solvers and the
//! outer pipeline.

use crate::error::{Error, Result};

/// All solver weights and loop controls.
///
/// `Default` carries the reference settings: gamma 1, alpha_f 0.01,
/// alpha_h 10, beta_f 1, beta_h 1e4, p 0.3, N 10, tol 1e-3, with the fidelity
/// weight multiplied by 1.5 after each outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Fidelity weight at the start of each pyramid level.
    pub gamma: f64,
    /// Weight of the image gradient prior.
    pub alpha_f: f64,
    /// Weight of the kernel prior.
    pub alpha_h: f64,
    /// Penalty weight coupling the image gradients to their splits.
    pub beta_f: f64,
    /// Penalty weight coupling the kernel to its split.
    pub beta_h: f64,
    /// Sparsity exponent of the hyper-Laplacian prior, in (0, 1).
    pub p: f64,
    /// Relative-change stopping tolerance of the inner loops.
    pub tol: f64,
    /// Maximum inner iterations (N).
    pub max_inner: usize,
    /// Multiplier applied to gamma after each outer iteration.
    pub gamma_growth: f64,
    /// Downscale factor between pyramid levels, in (0, 1).
    pub pyramid_scale: f64,
    /// Smallest kernel support allowed on the coarsest level.
    pub min_kernel: usize,
    /// Outer alternations per pyramid level.
    pub outer_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gamma: 1.0,
            alpha_f: 0.01,
            alpha_h: 10.0,
            beta_f: 1.0,
            beta_h: 1e4,
            p: 0.3,
            tol: 0.001,
            max_inner: 10,
            gamma_growth: 1.5,
            pyramid_scale: std::f64::consts::FRAC_1_SQRT_2,
            min_kernel: 3,
            outer_iters: 10,
        }
    }
}

impl SolverConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        }
        positive("gamma", self.gamma)?;
        positive("alpha_f", self.alpha_f)?;
        positive("alpha_h", self.alpha_h)?;
        positive("beta_f", self.beta_f)?;
        positive("beta_h", self.beta_h)?;
        positive("tol", self.tol)?;
        positive("gamma_growth", self.gamma_growth)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pyramid_scale must lie in (0, 1), got {}",
                self.pyramid_scale
            )));
        }
        if self.min_kernel < 3 || self.min_kernel % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "min_kernel must be an odd integer >= 3, got {}",
                self.min_kernel
            )));
        }
        if self.outer_iters == 0 {
            return Err(Error::InvalidParameter(
                "outer_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
