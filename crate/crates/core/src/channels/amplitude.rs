use num_complex::Complex64;

use crate::channels::cutoff::CutoffSpec;
use crate::channels::localization::{weakly_localized_part, Decomposition};
use crate::dilation::apply_dilation;
use crate::error::Result;
use crate::grid::{inner, RadialField};
use crate::model::ScalingProfile;
use crate::spectral::BoundState;

/// `e^{-iD ln g(t)} ψ_b`, renormalized so interpolation loss does not bias overlaps.
pub fn dilated_bound_state(b: &BoundState, g: f64) -> Result<RadialField> {
    Ok(apply_dilation(&b.state, g)?.normalized())
}

/// `ã(t) = (e^{-iD ln g(t)} ψ_b, ψ(t))`; only `ψ_b` is dilated.
pub fn channel_amplitude(b: &BoundState, psi: &RadialField, t: f64, profile: &ScalingProfile) -> Result<Complex64> {
    inner(&dilated_bound_state(b, profile.g(t))?, psi)
}

/// `A = e^{iλT(t)} ã(t)`.
pub fn gauged_amplitude(a: Complex64, lambda: f64, s: f64) -> Complex64 {
    Complex64::from_polar(1.0, lambda * s) * a
}

/// `c(t)` and `ψ_c` for the weakly localized part at cone exponent `α`.
pub fn decompose(
    b: &BoundState,
    psi: &RadialField,
    t: f64,
    alpha: f64,
    profile: &ScalingProfile,
    spec: &CutoffSpec,
) -> Result<Decomposition> {
    let wl = weakly_localized_part(psi, t, alpha, spec);
    decompose_part(b, wl, t, profile)
}

/// As [`decompose`] for an already computed `ψ_{w,l}`.
pub fn decompose_part(b: &BoundState, weakly_localized: RadialField, t: f64, profile: &ScalingProfile) -> Result<Decomposition> {
    let bubble = dilated_bound_state(b, profile.g(t))?;
    let coefficient = inner(&bubble, &weakly_localized)?;
    let mut remainder = weakly_localized.clone();
    remainder.axpy(-coefficient, &bubble)?;
    Ok(Decomposition {
        weakly_localized,
        coefficient,
        remainder,
    })
}

/// `c(t) = (e^{-iD ln g(t)} ψ_b, ψ_{w,l}(t))`.
pub fn bubble_coefficient(
    b: &BoundState,
    psi: &RadialField,
    t: f64,
    alpha: f64,
    profile: &ScalingProfile,
    spec: &CutoffSpec,
) -> Result<Complex64> {
    Ok(decompose(b, psi, t, alpha, profile, spec)?.coefficient)
}

/// `(ψ_c(t), ψ_d)`.
pub fn second_bubble_overlap(d: &BoundState, remainder: &RadialField) -> Result<Complex64> {
    inner(remainder, &d.state)
}

/// `‖χ(|x| ≤ M) ψ‖` with a sharp indicator.
pub fn local_mass(psi: &RadialField, m: f64) -> f64 {
    let dr = psi.grid().dr();
    let s: f64 = psi
        .grid()
        .points()
        .zip(psi.values())
        .take_while(|(r, _)| *r <= m)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    (s * dr).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::PotentialSpec;
    use crate::random::{random_smooth_field, rng};
    use crate::spectral::solve_bound_state;

    fn setup() -> (BoundState, ScalingProfile) {
        let g = make_grid(3, 400.0, 4096).unwrap();
        (solve_bound_state(g, &PotentialSpec::gaussian(4.0, 1.0)).unwrap(), ScalingProfile::new(0.3).unwrap())
    }

    #[test]
    fn self_overlap_at_start() {
        let (b, p) = setup();
        let t0 = 20.0;
        let psi = apply_dilation(&b.state, p.g(t0)).unwrap();
        let a = channel_amplitude(&b, &psi, t0, &p).unwrap();
        assert!((a - 1.0).norm() < 1e-6, "{a}");
        let big = gauged_amplitude(a, b.eigenvalue, p.time_map(t0));
        assert!((big.norm() - a.norm()).abs() < 1e-15);
    }

    #[test]
    fn amplitude_bounded_by_norm_and_gauge_invariant() {
        let (b, p) = setup();
        let mut r = rng(4);
        for _ in 0..5 {
            let psi = random_smooth_field(*b.grid(), 10.0, &mut r);
            let a = channel_amplitude(&b, &psi, 3.0, &p).unwrap();
            assert!(a.norm() <= psi.norm() * (1.0 + 1e-12));
            let rotated = psi.scaled(Complex64::from_polar(1.0, 1.1));
            let a2 = channel_amplitude(&b, &rotated, 3.0, &p).unwrap();
            assert!((a.norm() - a2.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn decomposition_is_orthogonal() {
        let (b, p) = setup();
        let psi = random_smooth_field(*b.grid(), 10.0, &mut rng(5));
        let d = decompose(&b, &psi, 30.0, 0.2, &p, &CutoffSpec::new(0.2)).unwrap();
        let bubble = dilated_bound_state(&b, p.g(30.0)).unwrap();
        assert!(inner(&bubble, &d.remainder).unwrap().norm() < 1e-10);
        assert!(d.coefficient.norm() <= psi.norm());
    }

    #[test]
    fn local_mass_limits() {
        let g = make_grid(5, 30.0, 256).unwrap();
        let f = random_smooth_field(g, 5.0, &mut rng(6));
        assert!((local_mass(&f, 31.0) - f.norm()).abs() < 1e-15);
        assert_eq!(local_mass(&f, 0.0), 0.0);
        assert!(local_mass(&f, 3.0) <= local_mass(&f, 6.0));
    }
}
