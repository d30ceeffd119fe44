//! Blur kernels (point spread functions) on a small odd square support.

use crate::error::{Error, Result};
use crate::image::Image;

/// Tolerance on the unit-sum invariant of a projected kernel.
pub const KERNEL_SUM_TOL: f64 = 1e-9;

/// A `size`×`size` PSF, row-major. After [`Kernel::project`] all entries are
/// non-negative and sum to 1 within [`KERNEL_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    data: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if data.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "kernel data length {} does not match {size}x{size}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "kernel contains non-finite values".into(),
            ));
        }
        Ok(Self { size, data })
    }

    /// Identity kernel: a single unit impulse at the centre.
    pub fn delta(size: usize) -> Result<Self> {
        let mut k = Self::new(size, vec![0.0; size * size])?;
        let c = size / 2;
        k.data[c * size + c] = 1.0;
        Ok(k)
    }

    /// Uniform mass over the full support.
    pub fn uniform(size: usize) -> Result<Self> {
        let n = size * size;
        Self::new(size, vec![1.0 / n as f64; n])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Projects onto the constraint set: negatives are zeroed and the rest is
    /// rescaled to unit mass. Fails if nothing positive remains.
    pub fn project(&self) -> Result<Kernel> {
        let mut out: Vec<f64> = self.data.iter().map(|&v| v.max(0.0)).collect();
        let sum: f64 = out.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::DegenerateKernel);
        }
        for v in &mut out {
            *v /= sum;
        }
        Ok(Kernel {
            size: self.size,
            data: out,
        })
    }

    /// Mass centroid offset from the geometric centre, `(dy, dx)`.
    pub fn centroid_offset(&self) -> (f64, f64) {
        let mut mass = 0.0;
        let mut my = 0.0;
        let mut mx = 0.0;
        for row in 0..self.size {
            for col in 0..self.size {
                let v = self.get(row, col).max(0.0);
                mass += v;
                my += v * row as f64;
                mx += v * col as f64;
            }
        }
        if mass <= 0.0 {
            return (0.0, 0.0);
        }
        let c = (self.size / 2) as f64;
        (my / mass - c, mx / mass - c)
    }

    /// Resamples the kernel to a new odd support and re-projects.
    pub fn resize(&self, new_size: usize) -> Result<Kernel> {
        let img = Image::new(self.size, self.size, self.data.clone())?;
        let resized = img.resize_bilinear(new_size, new_size);
        Kernel::new(new_size, resized.into_vec())?.project()
    }
}

/// Cosine similarity between two kernels after integer centroid alignment.
///
/// Both kernels are embedded in a shared odd grid, shifted so their mass
/// centroids land on the centre pixel, then compared as unit vectors. The
/// result is in `[0, 1]` for non-negative kernels, 1 meaning identical up to
/// translation and scale.
pub fn kernel_correlation(a: &Kernel, b: &Kernel) -> f64 {
    let size = a.size().max(b.size()) + 2;
    let size = if size % 2 == 0 { size + 1 } else { size };
    let ea = embed_centred(a, size);
    let eb = embed_centred(b, size);
    let dot: f64 = ea.iter().zip(eb.iter()).map(|(x, y)| x * y).sum();
    let na: f64 = ea.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = eb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Embeds `k` in a `size`×`size` grid with its centroid rounded onto the centre.
fn embed_centred(k: &Kernel, size: usize) -> Vec<f64> {
    let (dy, dx) = k.centroid_offset();
    let shift_y = dy.round() as isize;
    let shift_x = dx.round() as isize;
    let mut out = vec![0.0; size * size];
    let off = (size / 2) as isize - (k.size() / 2) as isize;
    for row in 0..k.size() {
        for col in 0..k.size() {
            let y = row as isize + off - shift_y;
            let x = col as isize + off - shift_x;
            if y >= 0 && x >= 0 && (y as usize) < size && (x as usize) < size {
                out[y as usize * size + x as usize] = k.get(row, col).max(0.0);
            }
        }
    }
    out
}
