//! Blind deconvolution orchestration: coarse-to-fine pyramid, alternation
//! between the two sub-problem solvers, the entropy-driven reweighting of the
//! second-order prior, and the fidelity-growth schedule.

use crate::adaptive::{adaptive_omega, entropy};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::image_solver::{update_image, ShrinkLuts};
use crate::kernel::Kernel;
use crate::kernel_solver::update_kernel;
use crate::shrinkage::{LutCache, ShrinkLut, DEFAULT_STEPS, DEFAULT_W_MAX};
use crate::spectral::{Fft2, OtfCache};

/// Which regularizer the image solver runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerMode {
    /// First-order prior only; second-order splits and transfer functions are
    /// removed from the solve.
    FirstOnly,
    /// Both orders with the second-order weight pinned to 1.
    FixedHybrid,
    /// Both orders with the weight recomputed from the latent image's entropy
    /// at every outer iteration.
    AdaptiveHybrid,
}

/// Orchestration switches beyond the solver weights.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub mode: RegularizerMode,
    pub use_pyramid: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            mode: RegularizerMode::AdaptiveHybrid,
            use_pyramid: true,
        }
    }
}

/// One rung of the coarse-to-fine ladder.
#[derive(Debug, Clone)]
pub struct PyramidLevel {
    /// Downscale factor relative to the input; the finest level has scale 1.
    pub scale: f64,
    /// The observation resampled to this level.
    pub g_scaled: Image,
    /// Kernel support at this level, odd and at least `min_kernel`.
    pub kernel_size: usize,
    /// 0 = coarsest.
    pub level_index: usize,
}

/// Per-outer-iteration log entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub level: usize,
    pub outer: usize,
    pub entropy: f64,
    pub omega: f64,
    pub gamma: f64,
    pub f_iterations: usize,
    pub h_iterations: usize,
    /// Joint split functional after the last inner iteration of the image
    /// solve.
    pub surrogate: f64,
}

/// Restored image, estimated kernel, and the outer-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DeblurResult {
    pub f: Image,
    pub h: Kernel,
    pub trace: Vec<TraceRecord>,
}

/// Joint estimation of the latent image and the blur kernel.
pub fn blind_deblur(g: &Image, kernel_size: usize, cfg: &SolverConfig) -> Result<DeblurResult> {
    run_collected(g, kernel_size, cfg, PipelineOptions::default())
}

/// [`blind_deblur`] with the regularizer swapped per ablation arm.
pub fn ablation_variant(
    g: &Image,
    kernel_size: usize,
    cfg: &SolverConfig,
    mode: RegularizerMode,
) -> Result<DeblurResult> {
    run_collected(
        g,
        kernel_size,
        cfg,
        PipelineOptions {
            mode,
            ..Default::default()
        },
    )
}

fn run_collected(
    g: &Image,
    kernel_size: usize,
    cfg: &SolverConfig,
    opts: PipelineOptions,
) -> Result<DeblurResult> {
    let mut trace = Vec::new();
    let (f, h) = blind_deblur_traced(g, kernel_size, cfg, opts, |rec| trace.push(rec.clone()))?;
    Ok(DeblurResult { f, h, trace })
}

/// Full-control entry point: every trace record is handed to `sink` as soon
/// as its outer iteration finishes, so callers keep a partial trace when a
/// solver diverges mid-run.
pub fn blind_deblur_traced(
    g: &Image,
    kernel_size: usize,
    cfg: &SolverConfig,
    opts: PipelineOptions,
    mut sink: impl FnMut(&TraceRecord),
) -> Result<(Image, Kernel)> {
    cfg.validate()?;
    validate_kernel_size(g, kernel_size)?;

    let levels = if opts.use_pyramid {
        build_pyramid(g, kernel_size, cfg)
    } else {
        vec![PyramidLevel {
            scale: 1.0,
            g_scaled: g.clone(),
            kernel_size,
            level_index: 0,
        }]
    };

    let mut luts = Luts::new(cfg)?;
    let mut f = levels[0].g_scaled.clone();
    let mut h = initial_kernel(levels[0].kernel_size)?;

    for level in &levels {
        if level.level_index > 0 {
            f = f.resize_bilinear(level.g_scaled.height(), level.g_scaled.width());
            h = h.resize(level.kernel_size)?;
        }
        let fft = Fft2::new(level.g_scaled.height(), level.g_scaled.width());
        let otfs = OtfCache::new(&fft);
        let mut gamma = cfg.gamma;

        for outer in 0..cfg.outer_iters {
            let ent = entropy(&f);
            let omega = match opts.mode {
                RegularizerMode::AdaptiveHybrid => adaptive_omega(ent).omega,
                _ => 1.0,
            };
            let second = luts.second_for(opts.mode, omega)?;
            let (f_new, f_stats) = update_image(
                &fft,
                &otfs,
                &level.g_scaled,
                &h,
                &f,
                omega,
                gamma,
                cfg,
                &ShrinkLuts {
                    first: &luts.first,
                    second: second.as_deref(),
                },
            )?;
            f = f_new;
            let (h_new, h_stats) =
                update_kernel(&fft, &f, &level.g_scaled, gamma, cfg, level.kernel_size)?;
            h = h_new;

            sink(&TraceRecord {
                level: level.level_index,
                outer,
                entropy: ent,
                omega,
                gamma,
                f_iterations: f_stats.iterations,
                h_iterations: h_stats.iterations,
                surrogate: *f_stats.surrogates.last().expect("at least one inner iteration"),
            });
            gamma *= cfg.gamma_growth;
        }
    }
    Ok((f, h))
}

/// Restores the image for a known, fixed kernel: the image solver repeated
/// under the same fidelity-growth schedule, single level.
pub fn nonblind_deblur(g: &Image, h: &Kernel, cfg: &SolverConfig) -> Result<Image> {
    cfg.validate()?;
    if h.size() > g.height().min(g.width()) {
        return Err(Error::InvalidParameter(format!(
            "kernel size {} exceeds image dimensions {}x{}",
            h.size(),
            g.height(),
            g.width()
        )));
    }
    let fft = Fft2::new(g.height(), g.width());
    let otfs = OtfCache::new(&fft);
    let mut luts = Luts::new(cfg)?;
    let mut f = g.clone();
    let mut gamma = cfg.gamma;
    for _ in 0..cfg.outer_iters {
        let ent = entropy(&f);
        let omega = adaptive_omega(ent).omega;
        let second = luts.second_for(RegularizerMode::AdaptiveHybrid, omega)?;
        let (f_new, _) = update_image(
            &fft,
            &otfs,
            g,
            h,
            &f,
            omega,
            gamma,
            cfg,
            &ShrinkLuts {
                first: &luts.first,
                second: second.as_deref(),
            },
        )?;
        f = f_new;
        gamma *= cfg.gamma_growth;
    }
    Ok(f)
}

/// First-order table is fixed for a run; the second-order table follows the
/// adaptive weight through the quantized cache.
struct Luts {
    first: std::sync::Arc<ShrinkLut>,
    cache: LutCache,
    alpha_over_beta: f64,
}

impl Luts {
    fn new(cfg: &SolverConfig) -> Result<Self> {
        let mut cache = LutCache::new(cfg.p, DEFAULT_W_MAX, DEFAULT_STEPS);
        let alpha_over_beta = cfg.alpha_f / cfg.beta_f;
        let first = cache.get_or_build(alpha_over_beta)?;
        Ok(Luts {
            first,
            cache,
            alpha_over_beta,
        })
    }

    fn second_for(
        &mut self,
        mode: RegularizerMode,
        omega: f64,
    ) -> Result<Option<std::sync::Arc<ShrinkLut>>> {
        match mode {
            RegularizerMode::FirstOnly => Ok(None),
            _ => Ok(Some(self.cache.get_or_build(self.alpha_over_beta * omega)?)),
        }
    }
}

fn validate_kernel_size(g: &Image, kernel_size: usize) -> Result<()> {
    let limit = g.height().min(g.width()) / 2;
    if kernel_size % 2 == 0 || kernel_size < 3 || kernel_size > limit {
        return Err(Error::InvalidParameter(format!(
            "kernel size must be odd and within [3, {limit}], got {kernel_size}"
        )));
    }
    Ok(())
}

/// Uniform mass over a 3×3 patch centred in the requested support.
fn initial_kernel(size: usize) -> Result<Kernel> {
    if size == 3 {
        return Kernel::uniform(3);
    }
    let mut data = vec![0.0; size * size];
    let c = size / 2;
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let y = (c as isize + dy) as usize;
            let x = (c as isize + dx) as usize;
            data[y * size + x] = 1.0 / 9.0;
        }
    }
    Kernel::new(size, data)
}

/// Repeated downscaling until the kernel support would shrink below
/// `min_kernel`, returned coarsest-first.
fn build_pyramid(g: &Image, kernel_size: usize, cfg: &SolverConfig) -> Vec<PyramidLevel> {
    let mut levels = Vec::new();
    let mut scale = 1.0;
    loop {
        let k_scaled = (kernel_size as f64 * scale).round() as usize;
        if k_scaled < cfg.min_kernel {
            break;
        }
        let k = (k_scaled | 1).max(cfg.min_kernel);
        let h = (g.height() as f64 * scale).round() as usize;
        let w = (g.width() as f64 * scale).round() as usize;
        if h < 2 * k || w < 2 * k {
            break;
        }
        let g_scaled = if levels.is_empty() {
            g.clone()
        } else {
            g.resize_bilinear(h, w)
        };
        levels.push((scale, g_scaled, k));
        scale *= cfg.pyramid_scale;
    }
    levels.reverse();
    levels
        .into_iter()
        .enumerate()
        .map(|(i, (scale, g_scaled, kernel_size))| PyramidLevel {
            scale,
            g_scaled,
            kernel_size,
            level_index: i,
        })
        .collect()
}
