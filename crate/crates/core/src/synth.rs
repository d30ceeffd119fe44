//! Deterministic synthesis of test material: procedural scenes with
//! natural-image statistics (piecewise-smooth regions, sharp edges, gentle
//! shading) and seeded Gaussian noise.
//!
//! All randomness comes from `ChaCha8`, so a seed fully determines the output
//! across platforms and builds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image::Image;

/// A procedural grayscale scene: a shaded background with random rectangles,
/// discs, and bars layered on top, clamped to `[0, 1]`.
pub fn test_scene(height: usize, width: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: f64 = rng.gen_range(0.25..0.6);
    let slope_x: f64 = rng.gen_range(-0.25..0.25);
    let slope_y: f64 = rng.gen_range(-0.25..0.25);
    let mut img = Image::from_fn(height, width, |y, x| {
        base + slope_x * x as f64 / width as f64 + slope_y * y as f64 / height as f64
    });

    for _ in 0..7 {
        let v: f64 = rng.gen_range(0.05..0.95);
        let y0 = rng.gen_range(0..height);
        let x0 = rng.gen_range(0..width);
        let rh = rng.gen_range(height / 8..height / 2);
        let rw = rng.gen_range(width / 8..width / 2);
        for y in y0..(y0 + rh).min(height) {
            for x in x0..(x0 + rw).min(width) {
                img.set(y, x, v);
            }
        }
    }

    for _ in 0..4 {
        let v: f64 = rng.gen_range(0.05..0.95);
        let cy = rng.gen_range(0..height) as f64;
        let cx = rng.gen_range(0..width) as f64;
        let r = rng.gen_range(height.min(width) / 12..height.min(width) / 4) as f64;
        for y in 0..height {
            for x in 0..width {
                let dy = y as f64 - cy;
                let dx = x as f64 - cx;
                if (dy * dy + dx * dx).sqrt() < r {
                    img.set(y, x, v);
                }
            }
        }
    }

    // A couple of thin bars for high-frequency content.
    for _ in 0..3 {
        let v: f64 = rng.gen_range(0.0..1.0);
        let horizontal: bool = rng.gen();
        let pos = rng.gen_range(0..if horizontal { height } else { width });
        let thickness = rng.gen_range(1..3usize);
        for t in 0..thickness {
            for i in 0..if horizontal { width } else { height } {
                if horizontal {
                    let y = (pos + t) % height;
                    img.set(y, i, v);
                } else {
                    let x = (pos + t) % width;
                    img.set(i, x, v);
                }
            }
        }
    }

    // Part of the corpus gets soft edges, as depth of field and shading give
    // real photographs a mix of crisp and smooth transitions.
    if rng.gen_bool(0.3) {
        let sigma: f64 = rng.gen_range(0.7..1.2);
        img = gaussian_smooth(&img, sigma);
    }

    img.clamped01()
}

/// Circular spatial convolution with a sampled 5×5 Gaussian.
fn gaussian_smooth(img: &Image, sigma: f64) -> Image {
    let mut taps = [[0.0f64; 5]; 5];
    let mut sum = 0.0;
    for (i, row) in taps.iter_mut().enumerate() {
        for (j, t) in row.iter_mut().enumerate() {
            let dy = i as f64 - 2.0;
            let dx = j as f64 - 2.0;
            *t = (-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp();
            sum += *t;
        }
    }
    Image::from_fn(img.height(), img.width(), |y, x| {
        let mut acc = 0.0;
        for (i, row) in taps.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                acc += t * img.get_wrapped(y as isize + i as isize - 2, x as isize + j as isize - 2);
            }
        }
        acc / sum
    })
}

/// Adds zero-mean Gaussian noise of the given standard deviation, sampling
/// pixels in row-major order from a `ChaCha8` stream. No clamping is applied.
pub fn add_gaussian_noise(img: &Image, sigma: f64, seed: u64) -> Image {
    if sigma == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    img.map(|v| v + normal.sample(&mut rng))
}
