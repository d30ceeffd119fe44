//! Proximal operator of `lambda·|x|^p + (x-w)²/2` for `0 < p < 1`.
//!
//! The scalar problem has no closed form; two independent routes implement
//! it. [`brute_force_prox`] is the reference oracle (dense scan plus
//! golden-section refinement). [`ShrinkLut`] is the fast path used inside the
//! solver: the nonzero branch is tabulated by Newton iteration on the
//! stationarity condition and read back with linear interpolation. The branch
//! point `w_t`, where the minimizer jumps from 0 to a finite value, anchors
//! the table so the jump never straddles an interpolation bin.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::Image;

/// Default lookup range; covers the dynamic range of gradients of unit-range
/// images under the forward-difference stencils.
pub const DEFAULT_W_MAX: f64 = 2.0;
/// Default table resolution.
pub const DEFAULT_STEPS: usize = 4096;
/// Minimum table resolution accepted by [`build_lut`].
pub const MIN_STEPS: usize = 1 << 10;

fn objective(x: f64, w: f64, lambda: f64, p: f64) -> f64 {
    lambda * x.abs().powf(p) + 0.5 * (x - w) * (x - w)
}

/// Reference solution of the scalar prox problem.
///
/// Scans `(0, |w|]` densely for the best interior sample, refines its bracket
/// (golden-section, then a derivative-sign bisection polish), and compares
/// the refined stationary point against `x = 0`. The output carries the sign
/// of `w`. This is the oracle the lookup table is tested against; it is
/// deliberately simple.
pub fn brute_force_prox(w: f64, lambda: f64, p: f64) -> f64 {
    debug_assert!(w.is_finite() && lambda.is_finite() && p.is_finite());
    if w == 0.0 || lambda == 0.0 {
        // Pure quadratic (or zero input): the minimizer is w itself.
        return w;
    }
    let a = w.abs();
    let steps = 2048usize;
    let h = a / steps as f64;
    let mut best_i = 1usize;
    let mut best_val = objective(h, a, lambda, p);
    for i in 2..=steps {
        let x = i as f64 * h;
        let v = objective(x, a, lambda, p);
        if v < best_val {
            best_val = v;
            best_i = i;
        }
    }
    // Refine within the bracket around the best interior sample.
    let lo = (best_i - 1) as f64 * h;
    let hi = ((best_i + 1).min(steps)) as f64 * h;
    let mut x_star = golden_section(lo, hi, |x| objective(x, a, lambda, p));
    // Polish on the stationarity residual when the bracket straddles its
    // sign change; golden section alone is limited by value resolution.
    let slope = |x: f64| lambda * p * x.powf(p - 1.0) + x - a;
    if slope(lo) < 0.0 && slope(hi) > 0.0 {
        let (mut blo, mut bhi) = (lo, hi);
        for _ in 0..100 {
            let mid = 0.5 * (blo + bhi);
            if slope(mid) < 0.0 {
                blo = mid;
            } else {
                bhi = mid;
            }
        }
        x_star = 0.5 * (blo + bhi);
    }
    let x_best = if objective(x_star, a, lambda, p) < objective(0.0, a, lambda, p) {
        x_star
    } else {
        0.0
    };
    if w < 0.0 {
        -x_best
    } else {
        x_best
    }
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if hi - lo < 1e-15 {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Tabulated prox map for one `(p, lambda)` pair.
///
/// `values[i]` holds the nonzero-branch minimizer at `w_t + i·step`; inputs
/// at or below the branch point map to zero, inputs beyond `w_max` use the
/// asymptotic expansion with one Newton correction.
#[derive(Debug, Clone)]
pub struct ShrinkLut {
    p: f64,
    lambda: f64,
    w_max: f64,
    threshold: f64,
    step: f64,
    values: Vec<f64>,
}

/// Builds the lookup table. `steps` is the number of interpolation intervals
/// and must be at least [`MIN_STEPS`].
pub fn build_lut(p: f64, lambda: f64, w_max: f64, steps: usize) -> Result<ShrinkLut> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "shrinkage exponent p must be in (0, 1), got {p}"
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "shrinkage lambda must be positive, got {lambda}"
        )));
    }
    if !(w_max > 0.0) || !w_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lookup range w_max must be positive, got {w_max}"
        )));
    }
    if steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "lookup table needs at least {MIN_STEPS} steps, got {steps}"
        )));
    }
    // Branch point of the prox map: below w_t the minimizer is 0, at w_t it
    // jumps to x_t. Both have closed forms for the Lp penalty.
    let x_t = (2.0 * lambda * (1.0 - p)).powf(1.0 / (2.0 - p));
    let w_t = x_t + lambda * p * x_t.powf(p - 1.0);
    let hi = w_max.max(w_t + 1e-9);
    let step = (hi - w_t) / steps as f64;
    let mut values = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let w = w_t + i as f64 * step;
        values.push(newton_branch(w, lambda, p));
    }
    Ok(ShrinkLut {
        p,
        lambda,
        w_max,
        threshold: w_t,
        step,
        values,
    })
}

/// Nonzero-branch root of `lambda·p·x^(p-1) + x - w = 0` for `w >= w_t`.
///
/// The residual is convex and increasing to the right of the branch point, so
/// Newton from `x0 = w` converges monotonically.
fn newton_branch(w: f64, lambda: f64, p: f64) -> f64 {
    let mut x = w;
    for _ in 0..64 {
        let g = lambda * p * x.powf(p - 1.0) + x - w;
        let dg = 1.0 + lambda * p * (p - 1.0) * x.powf(p - 2.0);
        let dx = g / dg;
        x -= dx;
        if dx.abs() < 1e-15 * x.max(1.0) {
            break;
        }
    }
    x
}

impl ShrinkLut {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// The branch point: inputs with `|w| <= threshold` shrink to zero.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Grid nodes of the tabulated nonzero branch.
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.threshold + i as f64 * self.step)
    }

    /// Prox value for a single input.
    pub fn lookup(&self, w: f64) -> f64 {
        let a = w.abs();
        let mag = if a <= self.threshold {
            0.0
        } else if a <= self.threshold + self.step * (self.values.len() - 1) as f64 {
            let t = (a - self.threshold) / self.step;
            let i = (t as usize).min(self.values.len() - 2);
            let frac = t - i as f64;
            self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
        } else {
            // Beyond the table: asymptotic start plus one Newton correction.
            let x0 = (a - self.lambda * self.p * a.powf(self.p - 1.0)).max(f64::MIN_POSITIVE);
            let g = self.lambda * self.p * x0.powf(self.p - 1.0) + x0 - a;
            let dg = 1.0 + self.lambda * self.p * (self.p - 1.0) * x0.powf(self.p - 2.0);
            x0 - g / dg
        };
        if w < 0.0 {
            -mag
        } else {
            mag
        }
    }
}

/// Applies the prox elementwise to a field; each pixel's sub-problem is
/// separable.
pub fn shrink_field(field: &Image, lut: &ShrinkLut) -> Image {
    Image::from_fn(field.height(), field.width(), |y, x| {
        lut.lookup(field.get(y, x))
    })
}

/// Cache of tables keyed by lambda quantized at 1e-4, so the second-order
/// table is rebuilt only when the adaptive weight moves it meaningfully.
pub struct LutCache {
    p: f64,
    w_max: f64,
    steps: usize,
    map: HashMap<i64, Arc<ShrinkLut>>,
}

impl LutCache {
    pub fn new(p: f64, w_max: f64, steps: usize) -> Self {
        LutCache {
            p,
            w_max,
            steps,
            map: HashMap::new(),
        }
    }

    pub fn get_or_build(&mut self, lambda: f64) -> Result<Arc<ShrinkLut>> {
        let key = (lambda / 1e-4).round() as i64;
        if let Some(lut) = self.map.get(&key) {
            return Ok(lut.clone());
        }
        let quantized = key as f64 * 1e-4;
        let lut = Arc::new(build_lut(self.p, quantized.max(1e-12), self.w_max, self.steps)?);
        self.map.insert(key, lut.clone());
        Ok(lut)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prox_at_zero_is_zero() {
        assert_eq!(brute_force_prox(0.0, 0.05, 0.3), 0.0);
    }

    #[test]
    fn zero_lambda_passes_through() {
        assert_eq!(brute_force_prox(0.8, 0.0, 0.3), 0.8);
        assert_eq!(brute_force_prox(-1.3, 0.0, 0.5), -1.3);
    }

    // Frozen regression constant, computed once with this oracle at scan step
    // 1e-6 plus refinement before the solver was built.
    #[test]
    fn frozen_oracle_value() {
        let got = brute_force_prox(1.0, 0.01, 0.3);
        assert!((got - 0.996_993_670_531_483_6).abs() < 1e-9, "got {got:.16}");
    }

    #[test]
    fn grid_nodes_match_oracle() {
        let lut = build_lut(0.3, 0.01, 2.0, MIN_STEPS).unwrap();
        for (i, w) in lut.grid().enumerate() {
            // Skip the branch node itself: the oracle ties to zero there
            // while the table stores the limit from above.
            if i == 0 {
                continue;
            }
            if i % 37 != 0 {
                continue;
            }
            let got = lut.lookup(w);
            let want = brute_force_prox(w, 0.01, 0.3);
            assert!((got - want).abs() < 1e-9, "node {i}: {got} vs {want}");
        }
    }

    #[test]
    fn lookup_between_nodes_tracks_oracle() {
        let lut = build_lut(0.3, 0.01, 2.0, DEFAULT_STEPS).unwrap();
        let mut w = 0.0005;
        let mut max_err = 0.0f64;
        while w < 2.0 {
            let err = (lut.lookup(w) - brute_force_prox(w, 0.01, 0.3)).abs();
            max_err = max_err.max(err);
            w += 0.00173;
        }
        assert!(max_err <= 1e-3, "max error {max_err}");
    }

    #[test]
    fn lookup_beyond_range_uses_asymptotic() {
        let lut = build_lut(0.3, 0.01, 2.0, DEFAULT_STEPS).unwrap();
        let w = 3.0;
        let err = (lut.lookup(w) - brute_force_prox(w, 0.01, 0.3)).abs();
        assert!(err <= 1e-3, "error {err}");
    }

    #[test]
    fn threshold_found_by_bisection_matches_stored_branch_point() {
        let (lambda, p) = (0.01, 0.3);
        let lut = build_lut(p, lambda, 2.0, MIN_STEPS).unwrap();
        // Bisection against the oracle on the zero/nonzero predicate.
        let mut lo = 0.0;
        let mut hi = 2.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if brute_force_prox(mid, lambda, p) == 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - lut.threshold()).abs() < 1e-9, "bisection {lo} vs analytic {}", lut.threshold());
        assert_eq!(brute_force_prox(lut.threshold() * 0.99, lambda, p), 0.0);
        assert!(brute_force_prox(lut.threshold() * 1.01, lambda, p) > 0.0);
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(build_lut(0.0, 0.01, 2.0, MIN_STEPS).is_err());
        assert!(build_lut(1.0, 0.01, 2.0, MIN_STEPS).is_err());
        assert!(build_lut(0.3, 0.0, 2.0, MIN_STEPS).is_err());
        assert!(build_lut(0.3, -0.1, 2.0, MIN_STEPS).is_err());
        assert!(build_lut(0.3, 0.01, 0.0, MIN_STEPS).is_err());
        assert!(build_lut(0.3, 0.01, 2.0, 512).is_err());
    }

    #[test]
    fn shrink_field_of_zeros_is_zero() {
        let lut = build_lut(0.3, 0.01, 2.0, MIN_STEPS).unwrap();
        let out = shrink_field(&Image::zeros(4, 4), &lut);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tiny_lambda_barely_shrinks_large_values() {
        let lut = build_lut(0.3, 1e-9, 2.0, MIN_STEPS).unwrap();
        let field = Image::filled(2, 2, 1.7);
        let out = shrink_field(&field, &lut);
        for &v in out.data() {
            assert!((v - 1.7).abs() < 1e-6);
        }
    }

    #[test]
    fn shrink_field_matches_oracle_elementwise() {
        let lut = build_lut(0.3, 0.01, 2.0, DEFAULT_STEPS).unwrap();
        let field = Image::from_fn(8, 8, |y, x| {
            ((y * 23 + x * 41) % 101) as f64 / 101.0 * 3.0 - 1.5
        });
        let out = shrink_field(&field, &lut);
        for (o, &w) in out.data().iter().zip(field.data()) {
            assert!((o - brute_force_prox(w, 0.01, 0.3)).abs() <= 1e-3);
        }
    }

    #[test]
    fn oracle_optimality_over_random_candidates() {
        let mut state = 42u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let w = next() * 4.0 - 2.0;
            let lambda = next() * 0.1 + 1e-4;
            let p = 0.15 + next() * 0.7;
            let x_star = brute_force_prox(w, lambda, p);
            let f_star = objective(x_star, w, lambda, p);
            // A thousand candidates distributed on the relevant interval.
            for i in 0..1000 {
                let x = (i as f64 / 999.0) * w;
                assert!(
                    f_star <= objective(x, w, lambda, p) + 1e-9,
                    "w={w} lambda={lambda} p={p} beaten at x={x}"
                );
            }
        }
    }

    #[test]
    fn lut_cache_reuses_quantized_lambda() {
        let mut cache = LutCache::new(0.3, 2.0, MIN_STEPS);
        let a = cache.get_or_build(0.010_04).unwrap();
        let b = cache.get_or_build(0.010_02).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = cache.get_or_build(0.0102).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
    }

    proptest! {
        #[test]
        fn prox_is_odd_monotone_and_nonexpansive(
            w in -2.0f64..2.0,
            lambda in 1e-4f64..0.1,
            p in 0.15f64..0.85,
        ) {
            let x = brute_force_prox(w, lambda, p);
            let neg = brute_force_prox(-w, lambda, p);
            prop_assert!((x + neg).abs() < 1e-9);
            if w >= 0.0 {
                prop_assert!(x >= 0.0 && x <= w + 1e-12);
                let further = brute_force_prox(w + 0.1, lambda, p);
                prop_assert!(further + 1e-9 >= x);
            }
        }

        #[test]
        fn lut_values_are_nonnegative_monotone_and_below_identity(
            lambda in 1e-4f64..0.05,
            p in 0.2f64..0.8,
        ) {
            let lut = build_lut(p, lambda, 2.0, MIN_STEPS).unwrap();
            prop_assert_eq!(lut.lookup(0.0), 0.0);
            let mut prev = 0.0;
            let mut w = 0.0;
            while w <= 2.0 {
                let v = lut.lookup(w);
                prop_assert!(v >= 0.0);
                prop_assert!(v <= w + 1e-12);
                prop_assert!(v + 1e-12 >= prev);
                prev = v;
                w += 0.01;
            }
        }
    }
}
