//! Solitons of `(H₀ + 2 N_{F,0}(|ψ|)) ψ = E ψ`, `E < 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dst;
use crate::error::{Error, Result};
use crate::grid::{inner, reduction_factor, RadialField, RadialGrid};
use crate::model::NonlinearitySpec;
use crate::spectral::bound::{fix_phase, BoundState};
use crate::spectral::hamiltonian::Hamiltonian;
use crate::spectral::pcg::{pcg, sine_preconditioner};

/// What the soliton solve pins down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolitonTarget {
    /// Prescribed `E < 0`.
    Energy(f64),
    /// Prescribed mass `‖ψ_s‖²`.
    Mass(f64),
}

pub const SOLITON_TOLERANCE: f64 = 1e-9;
const MAX_PETVIASHVILI: usize = 400;

struct Solver {
    grid: RadialGrid,
    free: Hamiltonian,
    nl: NonlinearitySpec,
    reduction: Vec<f64>,
}

impl Solver {
    fn new(grid: RadialGrid, nl: NonlinearitySpec) -> Self {
        Solver {
            grid,
            free: Hamiltonian::free(grid),
            nl,
            reduction: grid.points().map(|r| reduction_factor(grid.dim(), r)).collect(),
        }
    }

    /// `2 N_{F,0}(|u_j|)` on the grid.
    fn self_potential(&self, v: &[Complex64]) -> Vec<f64> {
        v.iter().zip(&self.reduction).map(|(x, c)| 2.0 * self.nl.f0(x.norm() / c)).collect()
    }

    fn residual(&self, v: &[Complex64], e: f64) -> f64 {
        let w = self.self_potential(v);
        let hv = self.free.apply_values(v);
        let s: f64 = hv
            .iter()
            .zip(v)
            .zip(&w)
            .map(|((h, x), w)| (h + x * (w - e)).norm_sqr())
            .sum();
        (s * self.grid.dr()).sqrt()
    }

    /// Petviashvili iteration at fixed `E`.
    fn petviashvili(&self, mut v: Vec<Complex64>, e: f64) -> Result<(Vec<Complex64>, f64)> {
        let dr = self.grid.dr();
        let shifted = |x: &[Complex64]| {
            let mut out = self.free.apply_values(x);
            out.iter_mut().zip(x).for_each(|(o, y)| *o -= y * e);
            out
        };
        let mut residual = self.residual(&v, e);
        for _ in 0..MAX_PETVIASHVILI {
            if residual <= SOLITON_TOLERANCE {
                return Ok((v, residual));
            }
            let w = self.self_potential(&v);
            let rhs: Vec<Complex64> = v.iter().zip(&w).map(|(x, w)| -x * w).collect();
            let a: f64 = v.iter().zip(shifted(&v)).map(|(x, y)| (x.conj() * y).re).sum::<f64>() * dr;
            let b: f64 = v.iter().zip(&rhs).map(|(x, y)| (x.conj() * y).re).sum::<f64>() * dr;
            if !(b > 0.0 && a > 0.0) {
                return Err(Error::NoSoliton(format!("nonlinear term vanished at E = {e}")));
            }
            let factor = (a / b).powi(2);
            let sol = pcg(shifted, sine_preconditioner(self.grid, -e), &rhs, Some(v.clone()), 1e-13, 2000)?;
            v = sol.x.iter().map(|x| x * factor).collect();
            let mass = v.iter().map(|x| x.norm_sqr()).sum::<f64>() * dr;
            if !(mass.is_finite() && mass > 1e-20) {
                return Err(Error::NoSoliton(format!("iteration collapsed at E = {e}")));
            }
            residual = self.residual(&v, e);
        }
        Err(Error::NoSoliton(format!(
            "no contraction after {MAX_PETVIASHVILI} iterations at E = {e} (residual {residual:e})"
        )))
    }

    /// Normalized gradient flow at fixed mass; returns the state and its energy.
    fn gradient_flow(&self, mass: f64, width: f64) -> (Vec<Complex64>, f64) {
        let grid = self.grid;
        let tau = 0.02;
        let mut f = RadialField::from_profile_fn(grid, |r| Complex64::new((-r * r / (2.0 * width * width)).exp(), 0.0));
        f.scale_mut(Complex64::new((mass / f.mass()).sqrt(), 0.0));
        let centrifugal = grid.centrifugal_potential();
        let mut last = f64::INFINITY;
        for round in 0..400 {
            for _ in 0..25 {
                let w = self.self_potential(f.values());
                let v = f.values_mut();
                for ((x, w), c) in v.iter_mut().zip(&w).zip(&centrifugal) {
                    *x *= (-0.5 * tau * (w + c)).exp();
                }
                dst::spectral_multiply(v, |m| Complex64::new((-tau * grid.wavenumber(m).powi(2)).exp(), 0.0));
                let w = self.self_potential(f.values());
                for ((x, w), c) in f.values_mut().iter_mut().zip(&w).zip(&centrifugal) {
                    *x *= (-0.5 * tau * (w + c)).exp();
                }
                let scale = (mass / f.mass()).sqrt();
                f.scale_mut(Complex64::new(scale, 0.0));
            }
            let e = self.energy(f.values());
            if round > 4 && (e - last).abs() < 1e-10 * e.abs().max(1e-6) {
                break;
            }
            last = e;
        }
        let e = self.energy(f.values());
        (f.into_values(), e)
    }

    /// `(ψ, (H₀ + 2N_{F,0}) ψ) / ‖ψ‖²`.
    fn energy(&self, v: &[Complex64]) -> f64 {
        let field = RadialField::from_values(self.grid, v.to_vec()).expect("grid length");
        let w = self.self_potential(v);
        let pot: f64 = v.iter().zip(&w).map(|(x, w)| w * x.norm_sqr()).sum::<f64>() * self.grid.dr();
        (self.free.expectation(&field) + pot) / field.mass()
    }
}

/// Solves for a soliton; the returned state carries its own mass (not normalized).
pub fn solve_soliton(grid: RadialGrid, nl: &NonlinearitySpec, target: SolitonTarget) -> Result<BoundState> {
    if !(nl.strength > 0.0) {
        return Err(Error::NoSoliton("zero nonlinearity: H₀ has no bound state".into()));
    }
    let solver = Solver::new(grid, *nl);
    let (v, e) = match target {
        SolitonTarget::Energy(e) => {
            if !(e < 0.0) {
                return Err(Error::InvalidArgument(format!("soliton energy must be negative, got {e}")));
            }
            let width = 1.0 / (-e).sqrt();
            let guess = RadialField::from_profile_fn(grid, |r| Complex64::new(2.0 * (-r * r / (2.0 * width * width)).exp(), 0.0));
            let (v, _) = solver.petviashvili(guess.into_values(), e)?;
            (v, e)
        }
        SolitonTarget::Mass(m) => {
            if !(m > 0.0) {
                return Err(Error::InvalidArgument(format!("soliton mass must be positive, got {m}")));
            }
            let (v0, e0) = solver.gradient_flow(m, 1.0);
            if !(e0 < 0.0) {
                return Err(Error::NoSoliton(format!("gradient flow ended at non-negative energy {e0}")));
            }
            mass_secant(&solver, v0, e0, m)?
        }
    };
    let field = fix_phase(&RadialField::from_values(grid, v)?);
    let residual = solver.residual(field.values(), e);
    Ok(BoundState {
        state: field,
        eigenvalue: e,
        residual,
    })
}

/// Adjusts `E` by the secant method until the Petviashvili solution has mass `m`.
fn mass_secant(solver: &Solver, v0: Vec<Complex64>, e0: f64, m: f64) -> Result<(Vec<Complex64>, f64)> {
    let dr = solver.grid.dr();
    let mass = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>() * dr;
    let (va, mut ea) = (solver.petviashvili(v0, e0)?.0, e0);
    let mut ma = mass(&va);
    let mut eb = e0 * (1.0 + 1e-3 * (m - ma).signum());
    let (mut vb, _) = solver.petviashvili(va.clone(), eb)?;
    let mut mb = mass(&vb);
    for _ in 0..30 {
        if (mb - m).abs() <= 1e-9 * m {
            return Ok((vb, eb));
        }
        let slope = (mb - ma) / (eb - ea);
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let next = (eb - (mb - m) / slope).min(-1e-8);
        ea = eb;
        ma = mb;
        let (v, _) = solver.petviashvili(vb, next)?;
        vb = v;
        eb = next;
        mb = mass(&vb);
    }
    if (mb - m).abs() <= 1e-6 * m {
        Ok((vb, eb))
    } else {
        Err(Error::NoSoliton(format!("mass target {m} not reached (got {mb})")))
    }
}

/// `‖(H₀ + 2N_{F,0}(|ψ|))ψ - Eψ‖` for an arbitrary state.
pub fn soliton_residual(state: &RadialField, nl: &NonlinearitySpec, e: f64) -> f64 {
    Solver::new(*state.grid(), *nl).residual(state.values(), e)
}

/// `(ψ, ψ')` overlap used to compare soliton branches.
pub fn branch_overlap(a: &BoundState, b: &BoundState) -> f64 {
    inner(&a.state, &b.state).map(|z| z.norm() / (a.state.norm() * b.state.norm())).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_strength_has_no_soliton() {
        let g = make_grid(5, 40.0, 512).unwrap();
        let nl = NonlinearitySpec::new(0.0).unwrap();
        assert!(matches!(solve_soliton(g, &nl, SolitonTarget::Mass(1.0)), Err(Error::NoSoliton(_))));
        assert!(matches!(solve_soliton(g, &nl, SolitonTarget::Energy(-1.0)), Err(Error::NoSoliton(_))));
    }

    #[test]
    fn energy_target_soliton_5d() {
        let g = make_grid(5, 40.0, 1024).unwrap();
        let nl = NonlinearitySpec::new(30.0).unwrap();
        let s = solve_soliton(g, &nl, SolitonTarget::Energy(-1.0)).unwrap();
        assert!(s.eigenvalue < 0.0);
        assert!(s.residual <= 1e-7, "residual {}", s.residual);
        assert!(s.state.mass() > 0.0);
    }

    #[test]
    fn mass_target_soliton_5d() {
        // mass 4 is reached on both sides of the mass minimum; the flow picks the stable (deeper) branch
        let g = make_grid(5, 40.0, 1024).unwrap();
        let nl = NonlinearitySpec::new(30.0).unwrap();
        let s = solve_soliton(g, &nl, SolitonTarget::Mass(4.0)).unwrap();
        assert!(s.eigenvalue < -1.0, "E = {}", s.eigenvalue);
        assert!(s.residual <= 1e-7, "residual {}", s.residual);
        assert!((s.state.mass() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn mass_is_continuous_in_strength() {
        let g = make_grid(5, 40.0, 1024).unwrap();
        let solve = |l: f64| solve_soliton(g, &NonlinearitySpec::new(l).unwrap(), SolitonTarget::Energy(-1.0)).unwrap();
        let (a, b) = (solve(30.0), solve(30.3));
        let rel = (a.state.norm() - b.state.norm()).abs() / a.state.norm();
        assert!(rel < 0.05, "relative norm change {rel}");
        assert!(branch_overlap(&a, &b) > 0.99);
    }
}
