//! Image entropy and the entropy-driven weight on the second-order prior.

use crate::image::Image;

/// Number of histogram bins used for the entropy estimate (8-bit convention).
pub const ENTROPY_BINS: usize = 256;

/// Shannon entropy, in bits, of the 256-bin intensity histogram.
///
/// Values are clamped to `[0, 1]` before binning, so the estimate is defined
/// for intermediate solver iterates as well as proper images.
pub fn entropy(img: &Image) -> f64 {
    let mut counts = [0u64; ENTROPY_BINS];
    for &v in img.data() {
        let clamped = v.clamp(0.0, 1.0);
        let bin = ((clamped * ENTROPY_BINS as f64) as usize).min(ENTROPY_BINS - 1);
        counts[bin] += 1;
    }
    let total = img.len() as f64;
    let mut ent = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / total;
            ent -= p * p.log2();
        }
    }
    // -0.0 from a single occupied bin.
    ent.max(0.0)
}

/// The fitted weight on the second-order regularizer together with the
/// entropy it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveWeight {
    pub entropy: f64,
    pub omega: f64,
}

/// omega = 1 + ent² / (ent³ + 1).
///
/// Tends to 1 at both ends: a constant image (zero entropy) and the
/// high-entropy limit. The maximum over `ent >= 0` is below 1.53.
pub fn adaptive_omega(ent: f64) -> AdaptiveWeight {
    debug_assert!(ent >= 0.0);
    AdaptiveWeight {
        entropy: ent,
        omega: 1.0 + ent * ent / (ent * ent * ent + 1.0),
    }
}
