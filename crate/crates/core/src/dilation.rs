//! The dilation generator `D = ½(x·P + P·x)`, the unitary group it generates,
//! and the change of frame `ψ(t) ↔ φ(s)`.
//!
//! `e^{-iD ln g} u = g^{-n/2} u(x/g)`; on reduced fields this is
//! `v ↦ g^{-1/2} v(r/g)`. `e^{+iD ln g}` is the same map with `1/g`.

use num_complex::Complex64;

use crate::dst;
use crate::error::{Error, Result};
use crate::grid::{inner, RadialField};
use crate::interp::resample;
use crate::model::ScalingProfile;
use crate::spectral::Hamiltonian;

/// `e^{-iD ln g} f`: spreads `f` by the factor `g` at fixed mass.
pub fn apply_dilation(f: &RadialField, g: f64) -> Result<RadialField> {
    let n = f.grid().dim() as f64;
    let mut out = resample(f, g)?;
    out.scale_mut(Complex64::new(g.powf(-n / 2.0), 0.0));
    Ok(out)
}

/// `D f` on the reduced field, `D = -i(r ∂_r + ½)`.
///
/// Realized as `-(i/2)(R ∂ + ∂ R)` on the odd periodic extension, with `∂` the
/// spectral derivative and `R` the odd extension of `r`. That form is exactly
/// Hermitian on the grid, so `(f, D f)` vanishes to roundoff for real `f`.
pub fn apply_d(f: &RadialField) -> RadialField {
    let grid = *f.grid();
    let n = grid.len();
    let m = 2 * (n + 1);
    let dr = grid.dr();
    let plan = dst::plan(n);
    let radius = |k: usize| -> f64 {
        if k <= n {
            k as f64 * dr
        } else if k == n + 1 {
            0.0
        } else {
            -((m - k) as f64) * dr
        }
    };
    let mut dv = plan.odd_extension(f.values());
    let mut drv: Vec<Complex64> = dv.iter().enumerate().map(|(k, x)| x * radius(k)).collect();
    plan.periodic_derivative(&mut dv, dr);
    plan.periodic_derivative(&mut drv, dr);
    let factor = Complex64::new(0.0, -0.5);
    let values = (1..=n).map(|k| (dv[k] * radius(k) + drv[k]) * factor).collect();
    RadialField::from_values(grid, values).expect("length preserved")
}

/// `d v / d r` at the grid points (spectral, via the odd extension).
pub fn radial_derivative(f: &RadialField) -> Vec<Complex64> {
    let grid = f.grid();
    let plan = dst::plan(grid.len());
    let mut buf = plan.odd_extension(f.values());
    plan.periodic_derivative(&mut buf, grid.dr());
    buf[1..=grid.len()].to_vec()
}

/// Which scale defines the transformed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameScale {
    /// `e^{iD ln g(t)}`.
    #[default]
    Profile,
    /// `e^{iD ln ⟨t⟩}`.
    Bracket,
}

impl FrameScale {
    pub fn at(self, p: &ScalingProfile, t: f64) -> f64 {
        match self {
            FrameScale::Profile => p.g(t),
            FrameScale::Bracket => crate::model::bracket(t),
        }
    }
}

/// A lab-frame state and its transformed-frame image.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub psi: RadialField,
    pub t: f64,
    pub phi: RadialField,
    pub s: f64,
}

/// `φ = e^{iD ln g(t)} ψ`, `s = T(t)`.
pub fn to_transformed_frame(psi: &RadialField, t: f64, p: &ScalingProfile) -> Result<FramePair> {
    to_transformed_frame_with(psi, t, p, FrameScale::Profile)
}

pub fn to_transformed_frame_with(psi: &RadialField, t: f64, p: &ScalingProfile, scale: FrameScale) -> Result<FramePair> {
    let g = scale.at(p, t);
    Ok(FramePair {
        psi: psi.clone(),
        t,
        phi: apply_dilation(psi, 1.0 / g)?,
        s: p.time_map(t),
    })
}

/// Inverse of [`to_transformed_frame`]: `t = T⁻¹(s)`, `ψ = e^{-iD ln g(t)} φ`.
pub fn from_transformed_frame(phi: &RadialField, s: f64, p: &ScalingProfile) -> Result<(RadialField, f64)> {
    let t = p.time_map_inv(s);
    Ok((apply_dilation(phi, p.g(t))?, t))
}

/// Weights of the first derivative at `x0` from values at `xs` (Fornberg's recursion).
pub fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of node j for the k-th derivative, k ≤ 1
    let mut c = vec![[0.0; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - (xs[i - 1] - x0) * c[i - 1][1]) / c2;
                c[i][0] = -c1 * (xs[i - 1] - x0) * c[i - 1][0] / c2;
            }
            c[j][1] = ((xs[i] - x0) * c[j][1] - c[j][0]) / c3;
            c[j][0] = (xs[i] - x0) * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Relative residual of `i ∂_s φ = H φ + f(s) D φ` at the middle of an odd number
/// of transformed-frame samples, with `∂_s` from the nonuniform stencil through
/// all of them. Norms are taken over `r ≤ within`.
pub fn frame_residual(h: &Hamiltonian, p: &ScalingProfile, samples: &[(&RadialField, f64)], within: f64) -> Result<f64> {
    if samples.len() < 3 || samples.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("frame residual needs an odd number (≥ 3) of samples".into()));
    }
    let (p0, s0) = samples[samples.len() / 2];
    let nodes: Vec<f64> = samples.iter().map(|x| x.1).collect();
    let weights = derivative_weights(s0, &nodes);
    let mut rhs = h.apply(p0);
    rhs.axpy(Complex64::new(p.f_eval(s0), 0.0), &apply_d(p0))?;
    let rhs = rhs.scaled(Complex64::new(0.0, -1.0));
    let mut lhs = RadialField::zeros(*p0.grid());
    for ((phi, _), w) in samples.iter().zip(&weights) {
        lhs.axpy(Complex64::new(*w, 0.0), phi)?;
    }
    let diff = lhs.sub(&rhs)?;
    let inside = |f: &RadialField| (f.mass() - f.mass_beyond(within)).max(0.0).sqrt();
    Ok(inside(&diff) / inside(&rhs).max(f64::MIN_POSITIVE))
}

/// `(f, D f)`, real for every `f`.
pub fn dilation_expectation(f: &RadialField) -> Complex64 {
    inner(f, &apply_d(f)).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gaussian(dim: u32, width: f64) -> RadialField {
        let g = make_grid(dim, 40.0, 4096).unwrap();
        RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / (2.0 * width * width)).exp(), 0.0))
    }

    #[test]
    fn unit_dilation_is_identity() {
        let f = gaussian(3, 1.0);
        assert!(apply_dilation(&f, 1.0).unwrap().sub(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn dilation_preserves_norm() {
        for dim in [3, 5] {
            let f = gaussian(dim, 0.6);
            for g in [0.5, 2.0, 7.0] {
                let d = apply_dilation(&f, g).unwrap();
                assert!((d.norm() - f.norm()).abs() < 1e-6 * f.norm(), "dim {dim}, g {g}");
            }
        }
    }

    #[test]
    fn dilation_of_gaussian_is_analytic() {
        let f = gaussian(3, 1.0);
        let d = apply_dilation(&f, 2.0).unwrap();
        let exact = RadialField::from_profile_fn(*f.grid(), |r| Complex64::new(2f64.powf(-1.5) * (-r * r / 8.0).exp(), 0.0));
        assert!(d.sub(&exact).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn d_on_gaussian() {
        // D u = -i(3/2 - r²) u for u = exp(-r²/2) in ℝ³
        let f = gaussian(3, 1.0);
        let du = apply_d(&f).profile();
        for (j, r) in f.grid().points().enumerate().take(400) {
            let exact = Complex64::new(0.0, -(1.5 - r * r) * (-r * r / 2.0).exp());
            assert!((du[j] - exact).norm() < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn d_is_symmetric_and_vanishes_on_real_states() {
        let g = make_grid(5, 30.0, 1024).unwrap();
        let a = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.3 * (-(r - 2.0).powi(2)).exp()));
        let b = RadialField::from_profile_fn(g, |r| Complex64::new(r * (-r * r / 3.0).exp(), -(-r * r).exp()));
        let lhs = inner(&a, &apply_d(&b)).unwrap();
        let rhs = inner(&apply_d(&a), &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
        let real = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp() * (1.0 + r), 0.0));
        assert!(dilation_expectation(&real).norm() < 1e-12);
    }

    #[test]
    fn generator_consistency() {
        // (e^{-iθD} f - f)/θ → -i D f with O(θ) error; e^{-iθD} = dilation by e^θ
        let f = gaussian(3, 1.0);
        let target = apply_d(&f).scaled(Complex64::new(0.0, -1.0));
        let err = |theta: f64| {
            let d = apply_dilation(&f, theta.exp()).unwrap();
            let fd = d.sub(&f).unwrap().scaled(Complex64::new(1.0 / theta, 0.0));
            fd.sub(&target).unwrap().norm()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-1 && (e1 / e2 - 2.0).abs() < 0.2, "{e1} {e2}");
        // the symmetric difference is second order
        let sym = |theta: f64| {
            let plus = apply_dilation(&f, theta.exp()).unwrap();
            let minus = apply_dilation(&f, (-theta).exp()).unwrap();
            plus.sub(&minus).unwrap().scaled(Complex64::new(0.5 / theta, 0.0)).sub(&target).unwrap().norm()
        };
        let (s1, s2) = (sym(2e-2), sym(1e-2));
        assert!((s1 / s2 - 4.0).abs() < 0.4, "{s1} {s2}");
    }

    #[test]
    fn derivative_weights_are_exact_on_polynomials() {
        let xs = [0.0, 0.7, 1.5, 2.0, 3.1];
        let w = derivative_weights(1.5, &xs);
        for k in 0..5 {
            let d: f64 = xs.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k == 0 { 0.0 } else { k as f64 * 1.5f64.powi(k - 1) };
            assert!((d - exact).abs() < 1e-11, "degree {k}: {d} vs {exact}");
        }
        let w = derivative_weights(1.0, &[0.0, 1.0, 2.0]);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn frame_residual_of_a_bound_state_orbit() {
        // with V_t built from ψ_b's own well, φ(s) = e^{-iλs}ψ_b solves the frame
        // equation up to the f(s) D term, which vanishes on ψ_b only in expectation
        let g = make_grid(3, 40.0, 1024).unwrap();
        let v = crate::model::PotentialSpec::gaussian(8.0, 1.0);
        let b = crate::spectral::solve_bound_state(g, &v).unwrap();
        let h = Hamiltonian::new(g, &v);
        let p = ScalingProfile::new(0.3).unwrap();
        let s0 = 1e6;
        let orbit: Vec<(RadialField, f64)> = (-2..=2)
            .map(|k| {
                let s = s0 + k as f64 * 1e-3;
                (b.state.scaled(Complex64::from_polar(1.0, -b.eigenvalue * s)), s)
            })
            .collect();
        let refs: Vec<(&RadialField, f64)> = orbit.iter().map(|(f, s)| (f, *s)).collect();
        let r = frame_residual(&h, &p, &refs, f64::INFINITY).unwrap();
        // f(s) ~ s^{-1-δ} is negligible at s = 1e6
        assert!(r < 1e-6, "{r}");
        assert!(frame_residual(&h, &p, &refs[..4], f64::INFINITY).is_err());
    }

    #[test]
    fn frame_roundtrip() {
        let p = ScalingProfile::new(0.3).unwrap();
        let f = gaussian(3, 1.0);
        let pair = to_transformed_frame(&f, 0.0, &p).unwrap();
        assert_eq!(pair.s, 0.0);
        assert!(pair.phi.sub(&f).unwrap().max_abs() < 1e-14);
        let t = 50.0;
        let pair = to_transformed_frame(&f, t, &p).unwrap();
        let (back, t_back) = from_transformed_frame(&pair.phi, pair.s, &p).unwrap();
        assert!((t_back - t).abs() < 1e-9 * t);
        assert!(back.sub(&f).unwrap().norm() < 1e-6);
    }
}
