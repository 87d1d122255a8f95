//! Natural cubic splines on the uniform knot set `0, Δr, …, r_max` and field
//! resampling built on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};

/// Relative amplitude above which content beyond the new grid edge counts as lost.
pub const OVERFLOW_THRESHOLD: f64 = 1e-12;

/// Natural cubic spline through uniformly spaced complex samples.
#[derive(Debug, Clone)]
pub struct UniformSpline {
    h: f64,
    y: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl UniformSpline {
    /// Knots at `x_i = i h`, `i = 0..y.len()`; second derivative zero at both ends.
    pub fn new(h: f64, y: Vec<Complex64>) -> Self {
        let n = y.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut m = vec![zero; n];
        if n >= 3 {
            // Thomas algorithm for M_{i-1} + 4 M_i + M_{i+1} = 6/h² Δ²y_i, i = 1..n-2.
            let k = n - 2;
            let mut c_prime = vec![0.0; k];
            let mut d_prime = vec![zero; k];
            let scale = 6.0 / (h * h);
            for i in 0..k {
                let rhs = (y[i + 2] - y[i + 1] * 2.0 + y[i]) * scale;
                if i == 0 {
                    c_prime[0] = 1.0 / 4.0;
                    d_prime[0] = rhs / 4.0;
                } else {
                    let denom = 4.0 - c_prime[i - 1];
                    c_prime[i] = 1.0 / denom;
                    d_prime[i] = (rhs - d_prime[i - 1]) / denom;
                }
            }
            let mut next = zero;
            for i in (0..k).rev() {
                let v = d_prime[i] - next * c_prime[i];
                m[i + 1] = v;
                next = v;
            }
        }
        UniformSpline { h, y, m }
    }

    pub fn x_max(&self) -> f64 {
        self.h * (self.y.len() - 1) as f64
    }

    /// Spline value; zero outside the knot range.
    pub fn eval(&self, x: f64) -> Complex64 {
        let last = self.y.len() - 1;
        if !(0.0..=self.x_max()).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        let i = ((x / self.h).floor() as usize).min(last - 1);
        let t = x / self.h - i as f64;
        let a = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        self.y[i] * a
            + self.y[i + 1] * t
            + (self.m[i] * (a * a * a - a) + self.m[i + 1] * (t * t * t - t)) * h2
    }
}

/// Spline of the odd-smooth companion `ω(r) = v(r) / r^{(n-3)/2} = c_n r u(r)`.
///
/// `ω(0) = 0` and `ω''(0) = 0` hold for every smooth radial `u`, which is what
/// the natural end condition assumes.
pub fn odd_companion_spline(f: &RadialField) -> UniformSpline {
    let grid = f.grid();
    let p = exponent_shift(grid);
    let mut y = Vec::with_capacity(grid.len() + 2);
    y.push(Complex64::new(0.0, 0.0));
    for (j, v) in f.values().iter().enumerate() {
        y.push(v / grid.r(j).powf(p));
    }
    y.push(Complex64::new(0.0, 0.0));
    UniformSpline::new(grid.dr(), y)
}

fn exponent_shift(grid: &RadialGrid) -> f64 {
    (grid.dim() as f64 - 3.0) / 2.0
}

/// Fraction of the mass beyond `radius`.
pub fn relative_tail(f: &RadialField, radius: f64) -> f64 {
    let mass = f.mass();
    if mass == 0.0 {
        return 0.0;
    }
    f.mass_beyond(radius) / mass
}

/// Samples the underlying profile at `r / scale`: `u_new(r) = u(r / scale)`.
///
/// Mass changes by the factor `scale^n` up to interpolation error. Expanding
/// (`scale > 1`) fails with `ContentOverflow` when more than
/// [`OVERFLOW_THRESHOLD`] of the mass lies beyond `r_max / scale`.
pub fn resample(f: &RadialField, scale: f64) -> Result<RadialField> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!("resample scale must be positive, got {scale}")));
    }
    if scale == 1.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    if scale > 1.0 {
        let tail = relative_tail(f, grid.r_max() / scale);
        if tail > OVERFLOW_THRESHOLD {
            return Err(Error::ContentOverflow {
                scale,
                tail,
            });
        }
    }
    let spline = odd_companion_spline(f);
    let p = exponent_shift(&grid);
    let values = grid
        .points()
        .map(|r| spline.eval(r / scale) * scale * r.powf(p))
        .collect();
    RadialField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn spline_reproduces_cubic_interior() {
        // natural spline of a linear function is exact
        let h = 0.1;
        let y: Vec<_> = (0..50).map(|i| Complex64::new(2.0 * i as f64 * h, -(i as f64) * h)).collect();
        let s = UniformSpline::new(h, y);
        for x in [0.0, 0.05, 1.234, 4.9] {
            let v = s.eval(x);
            assert!((v.re - 2.0 * x).abs() < 1e-13 && (v.im + x).abs() < 1e-13);
        }
        assert_eq!(s.eval(-0.1), Complex64::new(0.0, 0.0));
        assert_eq!(s.eval(5.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unit_scale_is_identity() {
        let g = make_grid(3, 20.0, 256).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
        let h = resample(&f, 1.0).unwrap();
        assert!(h.sub(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn bad_scale_rejected() {
        let g = make_grid(3, 20.0, 64).unwrap();
        let f = RadialField::zeros(g);
        assert!(resample(&f, 0.0).is_err());
        assert!(resample(&f, -2.0).is_err());
        assert!(resample(&f, f64::NAN).is_err());
    }

    #[test]
    fn overflow_detected() {
        let g = make_grid(3, 20.0, 256).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-(r - 8.0).powi(2)).exp(), 0.0));
        assert!(matches!(resample(&f, 3.0), Err(Error::ContentOverflow { .. })));
        assert!(resample(&f, 0.5).is_ok());
    }

    #[test]
    fn gaussian_doubled_width_matches_analytic() {
        // u(r) = exp(-r²/2) resampled at scale 2 is exp(-r²/8)
        for dim in [3u32, 5] {
            let g = make_grid(dim, 40.0, 4096).unwrap();
            let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
            let h = resample(&f, 2.0).unwrap();
            let exact = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 8.0).exp(), 0.0));
            let err = h.sub(&exact).unwrap().profile().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "dim {dim}: pointwise error {err:e}");
        }
    }
}
