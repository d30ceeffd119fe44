//! The latent-image sub-problem: split-Bregman iteration over six gradient
//! splits (two first-order, four second-order) around a Fourier quotient.
//!
//! Per inner iteration, in order: every split variable is shrunk toward its
//! gradient field, the image is recovered by one closed-form Fourier solve,
//! and the Bregman fields absorb the remaining constraint residuals. The
//! second-order shrinkage threshold carries the adaptive weight through the
//! lookup table it was built with.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::gradient::{grad_x, grad_y};
use crate::image::Image;
use crate::kernel::Kernel;
use crate::shrinkage::ShrinkLut;
use crate::spectral::{otf, quotient_solve, Fft2, Filter, OtfCache, Spectrum};

/// Number of gradient directions: x, y, xx, xy, yx, yy.
const DIRS: usize = 6;
const FIRST_ORDER: usize = 2;

/// The shrinkage tables for one image update. `second == None` drops the
/// second-order prior entirely: its split fields and transfer-function
/// contributions are removed from the solve.
pub struct ShrinkLuts<'a> {
    pub first: &'a ShrinkLut,
    pub second: Option<&'a ShrinkLut>,
}

impl<'a> ShrinkLuts<'a> {
    fn active(&self) -> usize {
        if self.second.is_some() {
            DIRS
        } else {
            FIRST_ORDER
        }
    }
}

/// Statistics of one image update.
#[derive(Debug, Clone)]
pub struct ImageSolveStats {
    /// Quotient solves performed (at most N + 1).
    pub iterations: usize,
    /// Joint split functional after each full inner iteration.
    pub surrogates: Vec<f64>,
}

/// One closed-form solve of the image normal equation
/// `(gamma·H*H + beta_f·Σ D*D) f = gamma·H*g + beta_f·Σ D*(v + a)`
/// as a Fourier quotient over the active directions. `va[d]` is the field
/// `v_d + a_d`. Exposed for the operator-application oracle.
pub fn image_quotient(
    fft: &Fft2,
    otfs: &OtfCache,
    otf_h: &Spectrum,
    g_spec: &Spectrum,
    va: &[Vec<f64>],
    ratio: f64,
) -> Result<Image> {
    let include_second = va.len() == DIRS;
    debug_assert!(va.len() == FIRST_ORDER || include_second);
    let mut numerator = otf_h.conj_mul(g_spec);
    let mut coupling: Option<Spectrum> = None;
    for (d, field) in va.iter().enumerate() {
        let term = dir_otf(otfs, d).conj_mul(&fft.forward_slice(field));
        match coupling.as_mut() {
            Some(acc) => acc.add_assign(&term),
            None => coupling = Some(term),
        }
    }
    if let Some(acc) = coupling {
        numerator.add_assign(&acc.scale(ratio));
    }
    let mut den = otf_h.power();
    for (d, p) in den.iter_mut().zip(otfs.first_power()) {
        *d += ratio * p;
    }
    if include_second {
        for (d, p) in den.iter_mut().zip(otfs.second_power()) {
            *d += ratio * p;
        }
    }
    let denominator = Spectrum::from_real(fft.height(), fft.width(), &den);
    quotient_solve(fft, &numerator, &denominator)
}

fn dir_otf(otfs: &OtfCache, d: usize) -> &Spectrum {
    match d {
        0 => otfs.dx(),
        1 => otfs.dy(),
        2 => otfs.dxx(),
        3 => otfs.dxy(),
        4 => otfs.dyx(),
        5 => otfs.dyy(),
        _ => unreachable!(),
    }
}

fn derivatives(f: &Image, count: usize) -> Vec<Image> {
    let gx = grad_x(f);
    let gy = grad_y(f);
    if count == FIRST_ORDER {
        return vec![gx, gy];
    }
    let gxx = grad_x(&gx);
    let gxy = grad_y(&gx);
    let gyx = grad_x(&gy);
    let gyy = grad_y(&gy);
    vec![gx, gy, gxx, gxy, gyx, gyy]
}

/// Recovers the latent image for a fixed kernel.
///
/// `f0` seeds the iteration (the evolving latent estimate in the blind
/// pipeline, or `g` when starting fresh). `omega` weighs the second-order
/// prior in the reported surrogate and must match the lambda the second
/// lookup table was built with. The result is clamped to `[0, 1]` after the
/// loop; iterates themselves are left unclamped so the quotient keeps its
/// normal-equation optimality.
#[allow(clippy::too_many_arguments)]
pub fn update_image(
    fft: &Fft2,
    otfs: &OtfCache,
    g: &Image,
    h: &Kernel,
    f0: &Image,
    omega: f64,
    gamma: f64,
    cfg: &SolverConfig,
    luts: &ShrinkLuts,
) -> Result<(Image, ImageSolveStats)> {
    if !g.same_shape(f0) {
        return Err(Error::ShapeMismatch(
            g.height(),
            g.width(),
            f0.height(),
            f0.width(),
        ));
    }
    debug_assert!(fft.matches(g));

    let n = g.len();
    let active = luts.active();
    let ratio = cfg.beta_f / gamma;
    let otf_h = otf(fft, &Filter::from_kernel(h))?;
    let g_spec = fft.forward(g);

    let mut v: Vec<Vec<f64>> = vec![vec![0.0; n]; active];
    let mut a: Vec<Vec<f64>> = vec![vec![0.0; n]; active];
    let mut va: Vec<Vec<f64>> = vec![vec![0.0; n]; active];
    let mut f = f0.clone();
    let mut iterations = 0;
    let mut surrogates = Vec::new();

    loop {
        // Shrink every split toward its current gradient field.
        let derivs = derivatives(&f, active);
        for d in 0..active {
            let lut = if d < FIRST_ORDER {
                luts.first
            } else {
                luts.second.expect("second-order direction requires a table")
            };
            let dd = derivs[d].data();
            for i in 0..n {
                v[d][i] = lut.lookup(dd[i] - a[d][i]);
                va[d][i] = v[d][i] + a[d][i];
            }
        }

        let f_new = image_quotient(fft, otfs, &otf_h, &g_spec, &va, ratio)?;
        iterations += 1;

        // Bregman update with the freshly solved image.
        let derivs_new = derivatives(&f_new, active);
        for d in 0..active {
            let dd = derivs_new[d].data();
            for i in 0..n {
                a[d][i] = a[d][i] - dd[i] + v[d][i];
            }
        }

        surrogates.push(surrogate(
            fft, &otf_h, &g_spec, &f_new, &derivs_new, &v, &a, omega, gamma, cfg,
        ));

        let mut diff_sq = 0.0;
        let mut norm_sq = 0.0;
        for i in 0..n {
            let d = f_new.data()[i] - f.data()[i];
            diff_sq += d * d;
            norm_sq += f_new.data()[i] * f_new.data()[i];
        }
        f = f_new;
        if !(diff_sq.is_finite() && norm_sq.is_finite()) || norm_sq == 0.0 {
            return Err(Error::SolverDiverged);
        }
        if diff_sq / norm_sq <= cfg.tol || iterations > cfg.max_inner {
            break;
        }
    }

    Ok((
        f.clamped01(),
        ImageSolveStats {
            iterations,
            surrogates,
        },
    ))
}

/// The joint split functional: fidelity, the Lp prior on the splits (with
/// the adaptive weight on second order), and the quadratic couplings.
#[allow(clippy::too_many_arguments)]
fn surrogate(
    fft: &Fft2,
    otf_h: &Spectrum,
    g_spec: &Spectrum,
    f: &Image,
    derivs: &[Image],
    v: &[Vec<f64>],
    a: &[Vec<f64>],
    omega: f64,
    gamma: f64,
    cfg: &SolverConfig,
) -> f64 {
    let n = f.len() as f64;
    // Fidelity through Parseval: ||f*h - g||² = (1/N)·Σ|H·F - G|².
    let f_spec = fft.forward(f);
    let mut resid = 0.0;
    for ((hh, ff), gg) in otf_h
        .data()
        .iter()
        .zip(f_spec.data())
        .zip(g_spec.data())
    {
        resid += (hh * ff - gg).norm_sqr();
    }
    let mut total = 0.5 * gamma * resid / n;
    for d in 0..v.len() {
        let weight = if d < FIRST_ORDER {
            cfg.alpha_f
        } else {
            cfg.alpha_f * omega
        };
        let mut prior = 0.0;
        let mut couple = 0.0;
        let dd = derivs[d].data();
        for i in 0..dd.len() {
            prior += v[d][i].abs().powf(cfg.p);
            let r = dd[i] - v[d][i] - a[d][i];
            couple += r * r;
        }
        total += weight * prior + 0.5 * cfg.beta_f * couple;
    }
    total
}
