//! Image file handling: 8-bit grayscale PNG and PGM in, the same out.
//! Colour inputs are reduced to luminance on load; all math downstream is
//! double precision, quantization happens only at write time.

use std::path::Path;

use anyhow::{bail, Context, Result};
use deblur_core::Image;
use image::DynamicImage;

/// Loads an image as luminance in `[0, 1]`. Grayscale bytes map directly to
/// `v / 255`; colour is reduced with the 0.299/0.587/0.114 weights.
pub fn read_luminance(path: &Path) -> Result<Image> {
    let img = image::open(path).with_context(|| format!("reading image {}", path.display()))?;
    let (data, w, h) = match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            (
                g.pixels().map(|p| p.0[0] as f64 / 255.0).collect::<Vec<_>>(),
                w,
                h,
            )
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            (
                rgb.pixels()
                    .map(|p| {
                        (0.299 * p.0[0] as f64 + 0.587 * p.0[1] as f64 + 0.114 * p.0[2] as f64)
                            / 255.0
                    })
                    .collect::<Vec<_>>(),
                w,
                h,
            )
        }
    };
    Image::new(h as usize, w as usize, data).map_err(Into::into)
}

/// Writes an image as 8-bit grayscale; the format follows the extension
/// (`.png` or `.pgm`).
pub fn write_gray(path: &Path, img: &Image) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    if ext != "png" && ext != "pgm" {
        bail!("unsupported output format {ext:?}; use .png or .pgm");
    }
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    image::save_buffer(
        path,
        &bytes,
        img.width() as u32,
        img.height() as u32,
        image::ColorType::L8,
    )
    .with_context(|| format!("writing image {}", path.display()))
}
