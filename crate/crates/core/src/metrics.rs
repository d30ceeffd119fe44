//! Full-reference image quality metrics: PSNR and mean SSIM.

use crate::error::{Error, Result};
use crate::image::Image;

/// PSNR value reported when the mean squared error is zero (or so small that
/// the true value would exceed the cap). Keeps CSV reports finite.
pub const PSNR_CAP_DB: f64 = 100.0;

/// SSIM window side; the standard 11×11 Gaussian window.
pub const SSIM_WINDOW: usize = 11;
/// Standard deviation of the SSIM window.
pub const SSIM_SIGMA: f64 = 1.5;
/// SSIM stability constants for dynamic range 1.0.
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Peak signal-to-noise ratio in dB for unit dynamic range,
/// `10·log10(1 / MSE)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(
            a.height(),
            a.width(),
            b.height(),
            b.width(),
        ));
    }
    let mse = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Mean structural similarity over all positions where the full window fits.
///
/// Uses the 11×11 Gaussian window with sigma 1.5 and constants
/// `C1 = (K1·L)²`, `C2 = (K2·L)²` at dynamic range `L = 1`.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(
            a.height(),
            a.width(),
            b.height(),
            b.width(),
        ));
    }
    if a.height() < SSIM_WINDOW || a.width() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall(a.height(), a.width(), SSIM_WINDOW));
    }
    let window = gaussian_window(SSIM_WINDOW, SSIM_SIGMA);
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);

    let out_h = a.height() - SSIM_WINDOW + 1;
    let out_w = a.width() - SSIM_WINDOW + 1;
    let mut acc = 0.0;
    for oy in 0..out_h {
        for ox in 0..out_w {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut ab = 0.0;
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let w = window[wy * SSIM_WINDOW + wx];
                    let va = a.get(oy + wy, ox + wx);
                    let vb = b.get(oy + wy, ox + wx);
                    mu_a += w * va;
                    mu_b += w * vb;
                    aa += w * va * va;
                    bb += w * vb * vb;
                    ab += w * va * vb;
                }
            }
            let var_a = aa - mu_a * mu_a;
            let var_b = bb - mu_b * mu_b;
            let cov = ab - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
        }
    }
    Ok(acc / (out_h * out_w) as f64)
}

fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let mut w = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let dy = y as f64 - c;
            let dx = x as f64 - c;
            w.push((-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_of_identical_images_is_capped() {
        let a = Image::filled(8, 8, 0.5);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn psnr_of_uniform_tenth_offset_is_20db() {
        let a = Image::filled(8, 8, 0.2);
        let b = Image::filled(8, 8, 0.3);
        let v = psnr(&a, &b).unwrap();
        assert!((v - 20.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn psnr_is_symmetric_and_matches_direct_mse() {
        let a = Image::from_fn(8, 8, |y, x| ((y * 31 + x * 17) % 64) as f64 / 63.0);
        let b = Image::from_fn(8, 8, |y, x| ((y * 7 + x * 3) % 64) as f64 / 63.0);
        let ab = psnr(&a, &b).unwrap();
        let ba = psnr(&b, &a).unwrap();
        assert_eq!(ab, ba);
        let mut mse = 0.0;
        for i in 0..64 {
            let d = a.data()[i] - b.data()[i];
            mse += d * d;
        }
        mse /= 64.0;
        assert!((ab - 10.0 * (1.0 / mse).log10()).abs() < 1e-10);
    }

    #[test]
    fn psnr_rejects_shape_mismatch() {
        let a = Image::zeros(4, 4);
        let b = Image::zeros(4, 5);
        assert!(psnr(&a, &b).is_err());
    }

    #[test]
    fn ssim_of_identical_images_is_one() {
        let a = Image::from_fn(16, 16, |y, x| ((y + x) % 16) as f64 / 15.0);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_of_constants_equals_luminance_term() {
        let a = Image::filled(16, 16, 0.2);
        let b = Image::filled(16, 16, 0.8);
        let got = ssim(&a, &b).unwrap();
        let c1 = 0.01f64.powi(2);
        let expect = (2.0 * 0.2 * 0.8 + c1) / (0.2f64.powi(2) + 0.8f64.powi(2) + c1);
        assert!(got < 1.0);
        assert!((got - expect).abs() < 1e-12, "got {got}, expect {expect}");
    }

    #[test]
    fn ssim_decreases_with_stronger_smoothing() {
        // A structured scene against lightly and heavily box-smoothed copies.
        let sharp = Image::from_fn(24, 24, |y, x| {
            if (x / 4 + y / 4) % 2 == 0 {
                0.85
            } else {
                0.15
            }
        });
        let smooth = |img: &Image, r: isize| {
            Image::from_fn(img.height(), img.width(), |y, x| {
                let mut s = 0.0;
                let mut n = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        s += img.get_wrapped(y as isize + dy, x as isize + dx);
                        n += 1.0;
                    }
                }
                s / n
            })
        };
        let mild = smooth(&sharp, 1);
        let heavy = smooth(&sharp, 3);
        let s_mild = ssim(&mild, &sharp).unwrap();
        let s_heavy = ssim(&heavy, &sharp).unwrap();
        assert!(s_mild > 0.0 && s_mild < 1.0);
        assert!(s_heavy < s_mild);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let a = Image::zeros(8, 8);
        assert!(matches!(ssim(&a, &a), Err(Error::ImageTooSmall(..))));
    }
}
