use serde::{Deserialize, Serialize};

use crate::grid::RadialField;

/// Smoothed indicator of `|x| / (R t^p) ≤ 1`.
///
/// The transition `1 → 0` is the standard `C^∞` step built from `exp(-1/x)`,
/// confined to `[1 - w_c, 1 + w_c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    /// Base radius `R`.
    pub radius: f64,
    /// Time exponent `p` (`α` or `β`).
    pub exponent: f64,
    /// Half-width `w_c` of the transition.
    pub width: f64,
}

pub const DEFAULT_CUTOFF_WIDTH: f64 = 0.1;

fn smooth_zero(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn smooth_zero_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

impl CutoffSpec {
    pub fn new(exponent: f64) -> Self {
        CutoffSpec {
            radius: 1.0,
            exponent,
            width: DEFAULT_CUTOFF_WIDTH,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    /// Profile `F(x)`: 1 for `x ≤ 1 - w_c`, 0 for `x ≥ 1 + w_c`, monotone between.
    pub fn profile(&self, x: f64) -> f64 {
        let s = (x - (1.0 - self.width)) / (2.0 * self.width);
        let (a, b) = (smooth_zero(1.0 - s), smooth_zero(s));
        a / (a + b)
    }

    /// `F'(x) ≤ 0`.
    pub fn profile_derivative(&self, x: f64) -> f64 {
        let s = (x - (1.0 - self.width)) / (2.0 * self.width);
        let (a, b) = (smooth_zero(1.0 - s), smooth_zero(s));
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        let (da, db) = (-smooth_zero_derivative(1.0 - s), smooth_zero_derivative(s));
        (da * b - a * db) / ((a + b) * (a + b)) / (2.0 * self.width)
    }

    /// Cutoff radius `R t^p` at time `t`.
    pub fn scale_at(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.radius
        } else {
            self.radius * t.powf(self.exponent)
        }
    }

    pub fn value(&self, t: f64, r: f64) -> f64 {
        self.profile(r / self.scale_at(t))
    }

    /// `∂_t F(r / (R t^p)) = -p r / (R t^{p+1}) F'`, nonnegative for `p ≥ 0`.
    pub fn time_derivative(&self, t: f64, r: f64) -> f64 {
        let x = r / self.scale_at(t);
        -self.exponent * x / t * self.profile_derivative(x)
    }

    pub fn weights(&self, f: &RadialField, t: f64) -> Vec<f64> {
        f.grid().points().map(|r| self.value(t, r)).collect()
    }
}

/// `F f`.
pub fn cutoff_apply(spec: &CutoffSpec, t: f64, f: &RadialField) -> RadialField {
    f.multiply_by(|r| spec.value(t, r))
}

/// `F̄ f = (1 - F) f`.
pub fn cutoff_complement(spec: &CutoffSpec, t: f64, f: &RadialField) -> RadialField {
    f.multiply_by(|r| 1.0 - spec.value(t, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::random::{random_smooth_field, rng};

    #[test]
    fn profile_shape() {
        let c = CutoffSpec::new(0.2);
        assert_eq!(c.profile(0.9), 1.0);
        assert_eq!(c.profile(0.5), 1.0);
        assert_eq!(c.profile(1.1), 0.0);
        assert!((c.profile(1.0) - 0.5).abs() < 1e-15);
        let xs: Vec<f64> = (0..=400).map(|k| 0.8 + k as f64 * 0.001).collect();
        assert!(xs.windows(2).all(|w| c.profile(w[1]) <= c.profile(w[0])));
        for &x in &xs {
            let h = 1e-6;
            let fd = (c.profile(x + h) - c.profile(x - h)) / (2.0 * h);
            assert!((fd - c.profile_derivative(x)).abs() < 1e-5, "x = {x}");
        }
    }

    #[test]
    fn identity_beyond_grid() {
        let g = make_grid(3, 20.0, 256).unwrap();
        let f = random_smooth_field(g, 5.0, &mut rng(1));
        let c = CutoffSpec::new(0.0).with_radius(100.0);
        assert_eq!(cutoff_apply(&c, 1.0, &f), f);
    }

    #[test]
    fn complement_and_mass_split() {
        let g = make_grid(3, 40.0, 512).unwrap();
        let c = CutoffSpec::new(0.2).with_radius(3.0);
        let mut r = rng(2);
        for _ in 0..5 {
            let f = random_smooth_field(g, 8.0, &mut r);
            let sum = cutoff_apply(&c, 5.0, &f).add(&cutoff_complement(&c, 5.0, &f)).unwrap();
            assert!(sum.sub(&f).unwrap().max_abs() < 1e-14);
            // F² + (1-F)² ≥ ½ pointwise, and = 1 off the transition band
            let split = cutoff_apply(&c, 5.0, &f).mass() + cutoff_complement(&c, 5.0, &f).mass();
            assert!(split <= f.mass() * (1.0 + 1e-14) && split >= 0.5 * f.mass());
        }
    }

    #[test]
    fn time_derivative_is_nonnegative() {
        let c = CutoffSpec::new(0.2).with_radius(2.0);
        for k in 0..500 {
            let r = k as f64 * 0.02;
            let d = c.time_derivative(3.0, r);
            assert!(d >= 0.0);
            let h = 1e-5;
            let fd = (c.value(3.0 + h, r) - c.value(3.0 - h, r)) / (2.0 * h);
            assert!((fd - d).abs() < 1e-6, "r = {r}");
        }
    }
}
