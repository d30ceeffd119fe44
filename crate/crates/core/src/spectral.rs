//! DFT plumbing: 2-D transforms, optical transfer functions of small filters,
//! circular convolution, and the elementwise-quotient solves used by the two
//! closed-form updates.
//!
//! Convention: the forward transform is unnormalized and the inverse divides
//! by the element count, so `inverse(forward(x)) == x`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::Kernel;

/// Quotient denominators whose magnitude falls below this bound abort the
/// solve instead of producing NaN. Both closed-form updates carry a strictly
/// positive additive term, so hitting the bound indicates misconfiguration.
pub const SINGULAR_EPS: f64 = 1e-12;

/// A complex frequency-domain field with the shape of its source image.
#[derive(Debug, Clone)]
pub struct Spectrum {
    height: usize,
    width: usize,
    data: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex<f64>] {
        &self.data
    }

    /// Lifts a real field into a spectrum-shaped container (zero imaginary
    /// part). Used to build the real-valued quotient denominators.
    pub fn from_real(height: usize, width: usize, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Spectrum {
            height,
            width,
            data: values.iter().map(|&v| Complex::new(v, 0.0)).collect(),
        }
    }

    /// Elementwise product.
    pub fn mul(&self, other: &Spectrum) -> Spectrum {
        debug_assert!(self.height == other.height && self.width == other.width);
        Spectrum {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Elementwise `conj(self) * other`, the adjoint-apply used in the
    /// normal-equation right-hand sides.
    pub fn conj_mul(&self, other: &Spectrum) -> Spectrum {
        debug_assert!(self.height == other.height && self.width == other.width);
        Spectrum {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a.conj() * b)
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Spectrum) {
        debug_assert!(self.height == other.height && self.width == other.width);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale(&self, s: f64) -> Spectrum {
        Spectrum {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `|value|²` at every frequency, as a real field.
    pub fn power(&self) -> Vec<f64> {
        self.data.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Forward/inverse 2-D FFT plans for one image shape.
///
/// Plans are immutable once built; concurrent calls allocate their own
/// scratch, so a single instance is safe to share across threads.
pub struct Fft2 {
    height: usize,
    width: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0);
        let mut planner = FftPlanner::new();
        Fft2 {
            height,
            width,
            fwd_row: planner.plan_fft(width, FftDirection::Forward),
            fwd_col: planner.plan_fft(height, FftDirection::Forward),
            inv_row: planner.plan_fft(width, FftDirection::Inverse),
            inv_col: planner.plan_fft(height, FftDirection::Inverse),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn matches(&self, img: &Image) -> bool {
        self.height == img.height() && self.width == img.width()
    }

    fn transform(&self, data: &mut [Complex<f64>], forward: bool) {
        debug_assert_eq!(data.len(), self.height * self.width);
        let (row_fft, col_fft) = if forward {
            (&self.fwd_row, &self.fwd_col)
        } else {
            (&self.inv_row, &self.inv_col)
        };
        let mut scratch = vec![Complex::default(); row_fft.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(self.width) {
            row_fft.process_with_scratch(row, &mut scratch);
        }
        let mut tr = transpose(data, self.height, self.width);
        scratch.resize(col_fft.get_inplace_scratch_len(), Complex::default());
        for col in tr.chunks_exact_mut(self.height) {
            col_fft.process_with_scratch(col, &mut scratch);
        }
        let back = transpose(&tr, self.width, self.height);
        data.copy_from_slice(&back);
    }

    /// Unnormalized forward transform of a real field.
    pub fn forward(&self, img: &Image) -> Spectrum {
        debug_assert!(self.matches(img));
        let mut data: Vec<Complex<f64>> =
            img.data().iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        Spectrum {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Forward transform of a bare slice (solver internals).
    pub fn forward_slice(&self, values: &[f64]) -> Spectrum {
        debug_assert_eq!(values.len(), self.height * self.width);
        let mut data: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        Spectrum {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Full complex inverse, normalized by the element count.
    pub fn inverse(&self, spec: &Spectrum) -> Vec<Complex<f64>> {
        let mut data = spec.data.clone();
        self.transform(&mut data, false);
        let n = (self.height * self.width) as f64;
        for v in &mut data {
            *v /= n;
        }
        data
    }

    /// Real part of the normalized inverse transform.
    pub fn inverse_real(&self, spec: &Spectrum) -> Vec<f64> {
        self.inverse(spec).iter().map(|c| c.re).collect()
    }
}

fn transpose(matrix: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::default(); matrix.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = matrix[r * cols + c];
        }
    }
    out
}

/// A small real filter with an anchor tap. The anchor marks the sample that
/// lands on the origin of the circular convolution.
#[derive(Debug, Clone)]
pub struct Filter {
    height: usize,
    width: usize,
    anchor_row: usize,
    anchor_col: usize,
    data: Vec<f64>,
}

impl Filter {
    pub fn new(
        height: usize,
        width: usize,
        anchor_row: usize,
        anchor_col: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::InvalidParameter("bad filter geometry".into()));
        }
        if anchor_row >= height || anchor_col >= width {
            return Err(Error::InvalidParameter("filter anchor out of range".into()));
        }
        Ok(Filter {
            height,
            width,
            anchor_row,
            anchor_col,
            data,
        })
    }

    /// Forward difference along x: `g(y, x) = f(y, x+1) - f(y, x)`.
    pub fn diff_x() -> Filter {
        Filter {
            height: 1,
            width: 2,
            anchor_row: 0,
            anchor_col: 1,
            data: vec![1.0, -1.0],
        }
    }

    /// Forward difference along y: `g(y, x) = f(y+1, x) - f(y, x)`.
    pub fn diff_y() -> Filter {
        Filter {
            height: 2,
            width: 1,
            anchor_row: 1,
            anchor_col: 0,
            data: vec![1.0, -1.0],
        }
    }

    /// A PSF as a filter, anchored at its centre tap.
    pub fn from_kernel(kernel: &Kernel) -> Filter {
        let size = kernel.size();
        Filter {
            height: size,
            width: size,
            anchor_row: size / 2,
            anchor_col: size / 2,
            data: kernel.data().to_vec(),
        }
    }
}

/// Optical transfer function: the filter is zero-padded to the target shape,
/// circularly shifted so its anchor sits at index (0, 0), and transformed.
/// `inverse(otf(k) * forward(img))` equals circular convolution of `img`
/// with `k`.
pub fn otf(fft: &Fft2, filter: &Filter) -> Result<Spectrum> {
    let (h, w) = (fft.height(), fft.width());
    if filter.height > h || filter.width > w {
        return Err(Error::FilterTooLarge(filter.height, filter.width, h, w));
    }
    let mut padded = vec![0.0; h * w];
    for i in 0..filter.height {
        for j in 0..filter.width {
            let y = (i as isize - filter.anchor_row as isize).rem_euclid(h as isize) as usize;
            let x = (j as isize - filter.anchor_col as isize).rem_euclid(w as isize) as usize;
            padded[y * w + x] += filter.data[i * filter.width + j];
        }
    }
    Ok(fft.forward_slice(&padded))
}

/// Circular convolution of an image with a PSF, computed through spectra.
pub fn circ_conv(img: &Image, kernel: &Kernel) -> Result<Image> {
    let fft = Fft2::new(img.height(), img.width());
    circ_conv_with(&fft, img, kernel)
}

/// As [`circ_conv`], reusing an existing plan.
pub fn circ_conv_with(fft: &Fft2, img: &Image, kernel: &Kernel) -> Result<Image> {
    let k_otf = otf(fft, &Filter::from_kernel(kernel))?;
    let spec = fft.forward(img).mul(&k_otf);
    Image::new(img.height(), img.width(), fft.inverse_real(&spec))
        .map_err(|_| Error::SolverDiverged)
}

/// Real part of the inverse transform of the elementwise quotient.
///
/// Fails with [`Error::SingularSolve`] if any denominator entry has magnitude
/// below [`SINGULAR_EPS`].
pub fn quotient_solve(fft: &Fft2, numerator: &Spectrum, denominator: &Spectrum) -> Result<Image> {
    debug_assert_eq!(numerator.height, denominator.height);
    debug_assert_eq!(numerator.width, denominator.width);
    let mut quotient = Vec::with_capacity(numerator.data.len());
    for (n, d) in numerator.data.iter().zip(denominator.data.iter()) {
        if d.norm() < SINGULAR_EPS {
            return Err(Error::SingularSolve(SINGULAR_EPS));
        }
        quotient.push(n / d);
    }
    let spec = Spectrum {
        height: numerator.height,
        width: numerator.width,
        data: quotient,
    };
    Image::new(numerator.height, numerator.width, fft.inverse_real(&spec))
        .map_err(|_| Error::SolverDiverged)
}

/// Spectra of the six derivative operators at one image shape, plus the
/// precomputed power sums that appear in the quotient denominator.
pub struct OtfCache {
    dx: Spectrum,
    dy: Spectrum,
    dxx: Spectrum,
    dxy: Spectrum,
    dyx: Spectrum,
    dyy: Spectrum,
    first_power: Vec<f64>,
    second_power: Vec<f64>,
}

impl OtfCache {
    pub fn new(fft: &Fft2) -> Self {
        let dx = otf(fft, &Filter::diff_x()).expect("stencil fits any positive shape");
        let dy = otf(fft, &Filter::diff_y()).expect("stencil fits any positive shape");
        // Second order as products of the first-order spectra: composition in
        // space is multiplication in frequency.
        let dxx = dx.mul(&dx);
        let dxy = dy.mul(&dx);
        let dyx = dx.mul(&dy);
        let dyy = dy.mul(&dy);
        let mut first_power = dx.power();
        for (p, q) in first_power.iter_mut().zip(dy.power()) {
            *p += q;
        }
        let mut second_power = dxx.power();
        for (p, q) in second_power.iter_mut().zip(dxy.power()) {
            *p += q;
        }
        for (p, q) in second_power.iter_mut().zip(dyx.power()) {
            *p += q;
        }
        for (p, q) in second_power.iter_mut().zip(dyy.power()) {
            *p += q;
        }
        OtfCache {
            dx,
            dy,
            dxx,
            dxy,
            dyx,
            dyy,
            first_power,
            second_power,
        }
    }

    pub fn dx(&self) -> &Spectrum {
        &self.dx
    }

    pub fn dy(&self) -> &Spectrum {
        &self.dy
    }

    pub fn dxx(&self) -> &Spectrum {
        &self.dxx
    }

    pub fn dxy(&self) -> &Spectrum {
        &self.dxy
    }

    pub fn dyx(&self) -> &Spectrum {
        &self.dyx
    }

    pub fn dyy(&self) -> &Spectrum {
        &self.dyy
    }

    /// `|F(Dx)|² + |F(Dy)|²` per frequency.
    pub fn first_power(&self) -> &[f64] {
        &self.first_power
    }

    /// Sum of `|F(D)|²` over the four second-order operators.
    pub fn second_power(&self) -> &[f64] {
        &self.second_power
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image(h: usize, w: usize, seed: u64) -> Image {
        // Small deterministic pseudo-random field.
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        Image::from_fn(h, w, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn round_trip_is_identity() {
        let img = test_image(8, 12, 3);
        let fft = Fft2::new(8, 12);
        let back = fft.inverse(&fft.forward(&img));
        for (c, &v) in back.iter().zip(img.data()) {
            assert!((c.re - v).abs() < 1e-12);
            assert!(c.im.abs() < 1e-10);
        }
    }

    #[test]
    fn delta_filter_has_flat_spectrum() {
        let fft = Fft2::new(4, 6);
        let f = Filter::new(1, 1, 0, 0, vec![1.0]).unwrap();
        let s = otf(&fft, &f).unwrap();
        for c in s.data() {
            assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_otf_kills_dc() {
        let fft = Fft2::new(1, 4);
        let s = otf(&fft, &Filter::diff_x()).unwrap();
        assert!(s.data()[0].norm() < 1e-12);
    }

    #[test]
    fn diff_x_otf_matches_spatial_forward_difference() {
        let img = test_image(6, 9, 7);
        let fft = Fft2::new(6, 9);
        let s = otf(&fft, &Filter::diff_x()).unwrap();
        let got = fft.inverse_real(&s.mul(&fft.forward(&img)));
        let expect = crate::gradient::grad_x(&img);
        for (g, e) in got.iter().zip(expect.data()) {
            assert!((g - e).abs() < 1e-11);
        }
    }

    #[test]
    fn second_order_otfs_match_composed_spatial_operators() {
        let img = test_image(8, 8, 11);
        let fft = Fft2::new(8, 8);
        let cache = OtfCache::new(&fft);
        let spec = fft.forward(&img);
        let field = crate::gradient::gradient_field(&img);
        for (otf_d, expect) in [
            (cache.dxx(), &field.gxx),
            (cache.dxy(), &field.gxy),
            (cache.dyx(), &field.gyx),
            (cache.dyy(), &field.gyy),
        ] {
            let got = fft.inverse_real(&otf_d.mul(&spec));
            for (g, e) in got.iter().zip(expect.data()) {
                assert!((g - e).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn delta_kernel_convolution_is_identity() {
        let img = test_image(8, 8, 5);
        let k = Kernel::delta(3).unwrap();
        let out = circ_conv(&img, &k).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_sum_kernel_preserves_constants() {
        let img = Image::filled(8, 8, 0.42);
        let k = Kernel::uniform(3).unwrap();
        let out = circ_conv(&img, &k).unwrap();
        for &v in out.data() {
            assert!((v - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_of_equal_spectra_is_all_ones_spectrum() {
        let img = test_image(4, 4, 2);
        let fft = Fft2::new(4, 4);
        let s = fft.forward(&img);
        // Guard: this particular field has no zero frequencies.
        assert!(s.data().iter().all(|c| c.norm() > SINGULAR_EPS));
        let out = quotient_solve(&fft, &s, &s).unwrap();
        // Inverse of the constant-1 spectrum: unit impulse at the origin.
        assert!((out.get(0, 0) - 1.0).abs() < 1e-12);
        let rest: f64 = out.data()[1..].iter().map(|v| v.abs()).sum();
        assert!(rest < 1e-10);
    }

    #[test]
    fn quotient_recovers_scaled_field() {
        let img = test_image(4, 6, 9);
        let fft = Fft2::new(4, 6);
        let num = fft.forward(&img).scale(2.0);
        let den = Spectrum::from_real(4, 6, &vec![2.0; 24]);
        let out = quotient_solve(&fft, &num, &den).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_rejects_singular_denominator() {
        let fft = Fft2::new(2, 2);
        let num = Spectrum::from_real(2, 2, &[1.0; 4]);
        let den = Spectrum::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            quotient_solve(&fft, &num, &den),
            Err(Error::SingularSolve(_))
        ));
    }

    #[test]
    fn filter_larger_than_shape_is_rejected() {
        let fft = Fft2::new(2, 2);
        let f = Filter::new(3, 3, 1, 1, vec![0.0; 9]).unwrap();
        assert!(matches!(otf(&fft, &f), Err(Error::FilterTooLarge(..))));
    }

    #[test]
    fn otf_cache_rebuild_is_identical() {
        let fft = Fft2::new(6, 10);
        let a = OtfCache::new(&fft);
        let b = OtfCache::new(&fft);
        for (x, y) in a.dxy().data().iter().zip(b.dxy().data()) {
            assert_eq!(x, y);
        }
        assert_eq!(a.first_power(), b.first_power());
    }
}
