use num_complex::Complex64;

use crate::channels::cutoff::{cutoff_apply, cutoff_complement, CutoffSpec};
use crate::channels::windows::{check_alpha, check_beta};
use crate::dilation::FrameScale;
use crate::evolve::free_flow;
use crate::grid::RadialField;
use crate::model::ScalingProfile;

/// `F_c(|x - 2tP|/t^α ≤ 1) ψ`, realized as `e^{-itH₀} F_c(|x|/t^α ≤ 1) e^{itH₀} ψ`.
pub fn free_channel_part(psi: &RadialField, t: f64, alpha: f64, spec: &CutoffSpec) -> RadialField {
    let spec = CutoffSpec { exponent: alpha, ..*spec };
    free_flow(&cutoff_apply(&spec, t, &free_flow(psi, -t)), t)
}

/// `ψ_{w,l}(t) = F̄_c(|x - 2tP|/t^α ≤ 1) ψ(t)`.
pub fn weakly_localized_part(psi: &RadialField, t: f64, alpha: f64, spec: &CutoffSpec) -> RadialField {
    check_alpha(psi.grid().dim(), alpha);
    let spec = CutoffSpec { exponent: alpha, ..*spec };
    free_flow(&cutoff_complement(&spec, t, &free_flow(psi, -t)), t)
}

/// `F_c(|x|/t^α ≤ 1) e^{itH₀} ψ(t)`, the time-`t` estimate of `Ω*_α ψ(0)`.
pub fn free_channel_projection(psi: &RadialField, t: f64, alpha: f64, spec: &CutoffSpec) -> RadialField {
    check_alpha(psi.grid().dim(), alpha);
    let spec = CutoffSpec { exponent: alpha, ..*spec };
    cutoff_apply(&spec, t, &free_flow(psi, -t))
}

/// `‖F₂(|x|/t^β ≤ 1) e^{iT(t)H₀} e^{iD ln g(t)} ψ(t)‖`.
///
/// Uses `e^{iTH₀} e^{iD ln g} = e^{iD ln g} e^{iTg²H₀}` and moves the dilation
/// onto the cutoff, so the quantity is `‖F₂(|x|/(g t^β) ≤ 1) e^{iTg²H₀} ψ‖`.
pub fn weak_localization_norm(psi: &RadialField, t: f64, beta: f64, profile: &ScalingProfile, spec: &CutoffSpec) -> f64 {
    weak_localization_norm_with(psi, t, beta, profile, spec, FrameScale::Profile)
}

/// As [`weak_localization_norm`] with the dilation `e^{iD ln ⟨t⟩}` when `scale` is
/// [`FrameScale::Bracket`].
pub fn weak_localization_norm_with(
    psi: &RadialField,
    t: f64,
    beta: f64,
    profile: &ScalingProfile,
    spec: &CutoffSpec,
    scale: FrameScale,
) -> f64 {
    check_beta(psi.grid().dim(), profile.epsilon(), beta);
    let g = scale.at(profile, t);
    let flowed = free_flow(psi, -profile.time_map(t) * g * g);
    let spec = CutoffSpec {
        exponent: beta,
        radius: spec.radius * g,
        ..*spec
    };
    cutoff_apply(&spec, t, &flowed).norm()
}

/// `(ψ_{w,l}, ψ_c)` split of the weakly localized part along the dilated bound state.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub weakly_localized: RadialField,
    /// `c(t)`.
    pub coefficient: Complex64,
    /// `ψ_c = ψ_{w,l} - c(t) e^{-iD ln g} ψ_b`.
    pub remainder: RadialField,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::apply_dilation;
    use crate::grid::{inner, make_grid};
    use crate::model::PotentialSpec;
    use crate::random::{random_smooth_field, rng};
    use crate::spectral::solve_bound_state;

    #[test]
    fn conjugation_identity() {
        // e^{itH₀} F_c(|x - 2tP|) ψ = F_c(|x|) e^{itH₀} ψ
        let g = make_grid(3, 200.0, 2048).unwrap();
        let spec = CutoffSpec::new(0.2);
        let mut r = rng(3);
        for _ in 0..3 {
            let psi = random_smooth_field(g, 6.0, &mut r);
            let t = 7.0;
            let left = free_flow(&free_channel_part(&psi, t, 0.2, &spec), -t);
            let right = free_channel_projection(&psi, t, 0.2, &spec);
            assert!(left.sub(&right).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn free_evolution_ends_in_the_free_channel() {
        let g = make_grid(3, 2000.0, 8192).unwrap();
        let psi0 = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0)).normalized();
        let spec = CutoffSpec::new(0.2);
        let norms: Vec<f64> = [10.0, 100.0, 300.0]
            .iter()
            .map(|&t| weakly_localized_part(&free_flow(&psi0, t), t, 0.2, &spec).norm())
            .collect();
        assert!(norms[2] < norms[1] && norms[1] < norms[0], "{norms:?}");
        // the cone radius t^α outgrows the initial support, so the projection saturates
        let t = 30000.0;
        let proj = free_channel_projection(&free_flow(&psi0, t), t, 0.2, &spec);
        let d = proj.sub(&psi0).unwrap().norm();
        assert!(d < 1e-6, "{d:e}");
        assert!(proj.norm() <= psi0.norm());
    }

    #[test]
    fn self_similar_bubble_is_weakly_localized() {
        let g = make_grid(3, 2000.0, 8192).unwrap();
        let b = solve_bound_state(g, &PotentialSpec::gaussian(4.0, 1.0)).unwrap();
        let p = ScalingProfile::new(0.3).unwrap();
        let t = 1000.0;
        let bubble = apply_dilation(&b.state, p.g(t)).unwrap();
        let wl = weakly_localized_part(&bubble, t, 0.2, &CutoffSpec::new(0.2));
        assert!(wl.norm() >= 0.9, "{}", wl.norm());
        let c = inner(&bubble, &wl).unwrap();
        assert!(c.norm() >= 0.8);
    }
}
