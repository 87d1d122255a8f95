use num_complex::Complex64;
use serde::Serialize;

use crate::dilation::apply_d;
use crate::error::Result;
use crate::grid::{inner, RadialField};
use crate::random::{random_smooth_field, rng};
use crate::spectral::bound::BoundState;
use crate::spectral::hamiltonian::Hamiltonian;
use crate::spectral::pcg::{pcg, sine_preconditioner};

/// `P_c f = f - (ψ_b, f) ψ_b`.
pub fn project_continuous(b: &BoundState, f: &RadialField) -> Result<RadialField> {
    let a = inner(&b.state, f)?;
    let mut out = f.clone();
    out.axpy(-a, &b.state)?;
    Ok(out)
}

fn project_values(psi: &[Complex64], dr: f64, v: &mut [Complex64]) {
    let a: Complex64 = psi.iter().zip(v.iter()).map(|(p, x)| p.conj() * x).sum::<Complex64>() * dr;
    v.iter_mut().zip(psi).for_each(|(x, p)| *x -= a * p);
}

const RESOLVENT_TOLERANCE: f64 = 1e-10;

/// `x = (λ - H)⁻¹ P_c f` with `(ψ_b, x) = 0`.
///
/// `H - λ` is positive definite on the range of `P_c` because `λ` lies below
/// the continuum, so CG runs on the deflated operator `P_c (H - λ) P_c`.
pub fn apply_resolvent(h: &Hamiltonian, b: &BoundState, f: &RadialField) -> Result<RadialField> {
    let grid = *h.grid();
    let dr = grid.dr();
    let lambda = b.eigenvalue;
    let psi = b.state.values();
    let mut rhs = f.values().to_vec();
    project_values(psi, dr, &mut rhs);
    let apply = |x: &[Complex64]| {
        let mut y = x.to_vec();
        project_values(psi, dr, &mut y);
        let mut out = h.apply_values(&y);
        out.iter_mut().zip(&y).for_each(|(o, v)| *o -= v * lambda);
        project_values(psi, dr, &mut out);
        out
    };
    let m = sine_preconditioner(grid, -lambda);
    let precond = |r: &[Complex64]| {
        let mut z = m(r);
        project_values(psi, dr, &mut z);
        z
    };
    let sol = pcg(apply, precond, &rhs, None, RESOLVENT_TOLERANCE, 5000)?;
    let mut x = sol.x;
    project_values(psi, dr, &mut x);
    x.iter_mut().for_each(|v| *v = -*v);
    RadialField::from_values(grid, x)
}

/// Empirical size of `‖D (λ - H)⁻¹ P_c ⟨x⟩⁻¹ f‖ / ‖f‖` over random smooth `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventProbe {
    pub samples: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

pub fn resolvent_dilation_probe(h: &Hamiltonian, b: &BoundState, samples: usize, extent: f64, seed: u64) -> Result<ResolventProbe> {
    let mut rng = rng(seed);
    let mut max_ratio: f64 = 0.0;
    let mut sum = 0.0;
    for _ in 0..samples {
        let f = random_smooth_field(*h.grid(), extent, &mut rng);
        let weighted = f.multiply_by(|r| 1.0 / r.hypot(1.0));
        let x = apply_resolvent(h, b, &weighted)?;
        let ratio = apply_d(&x).norm() / f.norm();
        max_ratio = max_ratio.max(ratio);
        sum += ratio;
    }
    Ok(ResolventProbe {
        samples,
        max_ratio,
        mean_ratio: sum / samples.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::PotentialSpec;
    use crate::spectral::solve_bound_state;

    fn setup() -> (Hamiltonian, BoundState) {
        let g = make_grid(3, 40.0, 1024).unwrap();
        let v = PotentialSpec::gaussian(4.0, 1.0);
        (Hamiltonian::new(g, &v), solve_bound_state(g, &v).unwrap())
    }

    #[test]
    fn projection_properties() {
        let (h, b) = setup();
        assert!(project_continuous(&b, &b.state).unwrap().norm() < 1e-12);
        let f = random_smooth_field(*h.grid(), 6.0, &mut rng(3));
        let p = project_continuous(&b, &f).unwrap();
        let pp = project_continuous(&b, &p).unwrap();
        assert!(pp.sub(&p).unwrap().norm() < 1e-12);
        let a = inner(&b.state, &f).unwrap();
        assert!((p.mass() - (f.mass() - a.norm_sqr())).abs() < 1e-10);
    }

    #[test]
    fn resolvent_residual_and_deflation() {
        let (h, b) = setup();
        let mut r = rng(11);
        for _ in 0..3 {
            let f = random_smooth_field(*h.grid(), 6.0, &mut r);
            let x = apply_resolvent(&h, &b, &f).unwrap();
            // (λ - H) x = P_c f
            let mut lhs = x.scaled(Complex64::new(b.eigenvalue, 0.0));
            lhs.axpy(Complex64::new(-1.0, 0.0), &h.apply(&x)).unwrap();
            let pf = project_continuous(&b, &f).unwrap();
            assert!(lhs.sub(&pf).unwrap().norm() <= 1e-8 * f.norm());
            assert!(project_continuous(&b, &x).unwrap().sub(&x).unwrap().norm() <= 1e-10 * x.norm());
        }
    }

    #[test]
    fn probe_is_bounded() {
        let (h, b) = setup();
        let probe = resolvent_dilation_probe(&h, &b, 10, 6.0, 5).unwrap();
        assert!(probe.max_ratio.is_finite() && probe.max_ratio < 50.0, "{probe:?}");
    }
}
