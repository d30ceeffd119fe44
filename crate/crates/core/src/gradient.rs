//! First- and second-order finite differences with circular boundary.
//!
//! Forward differences are used throughout so that every operator is exactly
//! diagonalized by the DFT used in the Fourier-domain solves. Second-order
//! operators are compositions of the first-order stencils, which keeps the
//! spatial path and the transfer-function path mutually consistent.

use crate::image::Image;

/// Forward difference along x (columns), wrapping at the right edge.
pub fn grad_x(img: &Image) -> Image {
    let (h, w) = (img.height(), img.width());
    Image::from_fn(h, w, |y, x| {
        img.get(y, (x + 1) % w) - img.get(y, x)
    })
}

/// Forward difference along y (rows), wrapping at the bottom edge.
pub fn grad_y(img: &Image) -> Image {
    let (h, w) = (img.height(), img.width());
    Image::from_fn(h, w, |y, x| {
        img.get((y + 1) % h, x) - img.get(y, x)
    })
}

/// Both first-order maps, `(gx, gy)`.
pub fn grad_first(img: &Image) -> (Image, Image) {
    (grad_x(img), grad_y(img))
}

/// The six derivative maps of an image.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub gx: Image,
    pub gy: Image,
    pub gxx: Image,
    pub gxy: Image,
    pub gyx: Image,
    pub gyy: Image,
}

/// Computes all six maps. `gxy` and `gyx` are built independently even though
/// the operators commute under the circular boundary; both terms appear in the
/// regularizer.
pub fn gradient_field(img: &Image) -> GradientField {
    let gx = grad_x(img);
    let gy = grad_y(img);
    let gxx = grad_x(&gx);
    let gxy = grad_y(&gx);
    let gyx = grad_x(&gy);
    let gyy = grad_y(&gy);
    GradientField {
        gx,
        gy,
        gxx,
        gxy,
        gyx,
        gyy,
    }
}

/// Pointwise magnitude of the first-order gradient, `sqrt(gx² + gy²)`.
pub fn grad_magnitude(gx: &Image, gy: &Image) -> Image {
    assert!(gx.same_shape(gy));
    Image::from_fn(gx.height(), gx.width(), |y, x| {
        gx.get(y, x).hypot(gy.get(y, x))
    })
}

/// Pointwise magnitude of the second-order gradient over all four maps.
pub fn grad_magnitude2(field: &GradientField) -> Image {
    let (h, w) = (field.gxx.height(), field.gxx.width());
    Image::from_fn(h, w, |y, x| {
        let a = field.gxx.get(y, x);
        let b = field.gxy.get(y, x);
        let c = field.gyx.get(y, x);
        let d = field.gyy.get(y, x);
        (a * a + b * b + c * c + d * d).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image_has_zero_gradients() {
        let img = Image::filled(4, 4, 0.5);
        let f = gradient_field(&img);
        for m in [&f.gx, &f.gy, &f.gxx, &f.gxy, &f.gyx, &f.gyy] {
            assert!(m.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn impulse_row_forward_difference() {
        let img = Image::new(1, 4, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let gx = grad_x(&img);
        assert_eq!(gx.data(), &[1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn ramp_second_derivative_vanishes_off_the_seam() {
        // img(y, x) = x / w is linear in x, so gxx is zero except where the
        // forward difference crosses the wrap column.
        let w = 8;
        let img = Image::from_fn(4, w, |_, x| x as f64 / w as f64);
        let gxx = grad_x(&grad_x(&img));
        for y in 0..4 {
            for x in 0..w - 2 {
                assert!(gxx.get(y, x).abs() < 1e-15, "at ({y},{x})");
            }
            assert!(gxx.get(y, w - 2).abs() > 0.1);
            assert!(gxx.get(y, w - 1).abs() > 0.1);
        }
    }

    #[test]
    fn magnitude_three_four_five() {
        let gx = Image::filled(2, 2, 3.0);
        let gy = Image::filled(2, 2, 4.0);
        let m = grad_magnitude(&gx, &gy);
        assert!(m.data().iter().all(|&v| (v - 5.0).abs() < 1e-15));
    }

    #[test]
    fn magnitude_of_zero_maps_is_zero() {
        let z = Image::zeros(3, 3);
        let m = grad_magnitude(&z, &z);
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    proptest! {
        // Mixed second derivatives commute under the circular boundary.
        #[test]
        fn mixed_derivatives_commute(data in proptest::collection::vec(0.0f64..1.0, 64)) {
            let img = Image::new(8, 8, data).unwrap();
            let f = gradient_field(&img);
            for (a, b) in f.gxy.data().iter().zip(f.gyx.data().iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn magnitude_matches_scalar_recomputation(data in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let gx = Image::new(4, 4, data[..16].to_vec()).unwrap();
            let gy = Image::new(4, 4, data[16..].to_vec()).unwrap();
            let m = grad_magnitude(&gx, &gy);
            for i in 0..16 {
                let expect = (gx.data()[i].powi(2) + gy.data()[i].powi(2)).sqrt();
                prop_assert!((m.data()[i] - expect).abs() < 1e-12);
            }
        }
    }
}
