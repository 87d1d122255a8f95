use num_complex::Complex64;

use crate::dst;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::model::PotentialSpec;
use crate::spectral::hamiltonian::Hamiltonian;
use crate::spectral::pcg::{pcg, sine_preconditioner};

/// A normalized eigenpair (or soliton) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub state: RadialField,
    /// Eigenvalue `λ` (or soliton energy `E`).
    pub eigenvalue: f64,
    /// `‖H ψ - λ ψ‖` for the operator the state was solved for.
    pub residual: f64,
}

impl BoundState {
    pub fn grid(&self) -> &RadialGrid {
        self.state.grid()
    }
}

/// Stopping rules for [`solve_ground_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Imaginary time step.
    pub tau: f64,
    pub max_imaginary_steps: usize,
    /// Residual at which imaginary time hands over to inverse iteration.
    pub handover_residual: f64,
    pub tolerance: f64,
    pub max_inverse_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tau: 0.02,
            max_imaginary_steps: 4000,
            handover_residual: 1e-4,
            tolerance: 1e-10,
            max_inverse_iterations: 40,
        }
    }
}

/// Ground state of `H₀ + V` on the grid.
pub fn solve_bound_state(grid: RadialGrid, v: &PotentialSpec) -> Result<BoundState> {
    v.validate()?;
    let guess_width = match v {
        PotentialSpec::GaussianWell { width, .. } => *width,
        PotentialSpec::SquareWell { radius, .. } => *radius,
        PotentialSpec::Tabulated(_) => 1.0,
    };
    solve_ground_state(&Hamiltonian::new(grid, v), guess_width, &EigenOptions::default())
}

/// Lowest eigenpair of `h`: imaginary-time split steps with renormalization,
/// then shifted inverse iteration with a sine-space preconditioner.
pub fn solve_ground_state(h: &Hamiltonian, guess_width: f64, opts: &EigenOptions) -> Result<BoundState> {
    let grid = *h.grid();
    let mut psi = RadialField::from_profile_fn(grid, |r| Complex64::new((-r * r / (2.0 * guess_width * guess_width)).exp(), 0.0))
        .normalized();

    let half: Vec<f64> = h.potential().iter().map(|u| (-0.5 * opts.tau * u).exp()).collect();
    let mut lambda = h.expectation(&psi);
    let mut residual = h.residual(&psi, lambda);
    let mut step = 0;
    while step < opts.max_imaginary_steps && residual > opts.handover_residual {
        for _ in 0..25 {
            let v = psi.values_mut();
            v.iter_mut().zip(&half).for_each(|(x, w)| *x *= w);
            dst::spectral_multiply(v, |m| Complex64::new((-opts.tau * grid.wavenumber(m).powi(2)).exp(), 0.0));
            v.iter_mut().zip(&half).for_each(|(x, w)| *x *= w);
            psi = psi.normalized();
        }
        step += 25;
        let next = h.expectation(&psi);
        residual = h.residual(&psi, next);
        let stalled = (next - lambda).abs() < 1e-9 * next.abs().max(1e-3);
        lambda = next;
        if stalled {
            break;
        }
    }
    if !(lambda < 0.0) {
        return Err(Error::NoBoundState(lambda));
    }

    // Temple's inequality with the continuum at ≥ 0 bounds λ - λ₀ by res²/|λ|.
    let mut shift_gap = (0.01 * lambda.abs()).max(4.0 * residual * residual / lambda.abs());
    for _ in 0..opts.max_inverse_iterations {
        if residual <= opts.tolerance {
            break;
        }
        let mu = lambda - shift_gap;
        let apply = |x: &[Complex64]| {
            let mut out = h.apply_values(x);
            out.iter_mut().zip(x).for_each(|(o, v)| *o -= v * mu);
            out
        };
        let x0: Vec<Complex64> = psi.values().iter().map(|v| v / (lambda - mu)).collect();
        let sol = pcg(apply, sine_preconditioner(grid, -mu), psi.values(), Some(x0), 1e-13, 4000)?;
        psi = RadialField::from_values(grid, sol.x)?.normalized();
        lambda = h.expectation(&psi);
        residual = h.residual(&psi, lambda);
        shift_gap = (1e-4 * lambda.abs()).max(4.0 * residual * residual / lambda.abs());
    }
    if !(lambda < 0.0) {
        return Err(Error::NoBoundState(lambda));
    }
    let state = fix_phase(&psi).normalized();
    let residual = h.residual(&state, lambda);
    Ok(BoundState {
        state,
        eigenvalue: lambda,
        residual,
    })
}

/// Rotates by a unimodular constant so the largest sample is real positive, then
/// drops the (roundoff) imaginary parts of the real eigenproblem.
pub fn fix_phase(f: &RadialField) -> RadialField {
    let peak = f
        .values()
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap_or(Complex64::new(1.0, 0.0));
    if peak.norm() == 0.0 {
        return f.clone();
    }
    let rot = peak.conj() / peak.norm();
    let values = f.values().iter().map(|v| Complex64::new((v * rot).re, 0.0)).collect();
    RadialField::from_values(*f.grid(), values).expect("length preserved")
}

/// Number of bound states of `H₀ + V` in ℝⁿ by counting nodes of the regular
/// zero-energy solution.
pub fn count_bound_states(dim: u32, v: &PotentialSpec) -> usize {
    let c = {
        let n = dim as f64;
        (n - 1.0) * (n - 3.0) / 4.0
    };
    let p = (dim as f64 - 1.0) / 2.0;
    let scale = match v {
        PotentialSpec::GaussianWell { width, .. } => *width,
        PotentialSpec::SquareWell { radius, .. } => *radius,
        PotentialSpec::Tabulated(_) => 1.0,
    };
    let r_end = v.support_radius().max(scale);
    let h_max = scale * 2e-3;
    let rhs = |r: f64, w: f64, dw: f64| (dw, (v.value(r) + c / (r * r)) * w);
    // w ≈ r^p near the origin
    let mut r = scale * 1e-4;
    let mut w = r.powf(p);
    let mut dw = p * r.powf(p - 1.0);
    let mut nodes = 0;
    while r < r_end {
        let h = h_max.min(0.02 * r).min(r_end - r);
        let (k1w, k1d) = rhs(r, w, dw);
        let (k2w, k2d) = rhs(r + h / 2.0, w + h / 2.0 * k1w, dw + h / 2.0 * k1d);
        let (k3w, k3d) = rhs(r + h / 2.0, w + h / 2.0 * k2w, dw + h / 2.0 * k2d);
        let (k4w, k4d) = rhs(r + h, w + h * k3w, dw + h * k3d);
        let w_next = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        let dw_next = dw + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        if w_next.signum() != w.signum() {
            nodes += 1;
        }
        let norm = w_next.abs().max(dw_next.abs()).max(1e-300);
        w = w_next / norm;
        dw = dw_next / norm;
        r += h;
    }
    // beyond the support w = A r^p + B r^{1-p}; a further node exists when A and w(R) differ in sign
    let q = 1.0 - p;
    let det = r.powf(p) * q * r.powf(q - 1.0) - p * r.powf(p - 1.0) * r.powf(q);
    let a = (w * q * r.powf(q - 1.0) - dw * r.powf(q)) / det;
    if a * w < 0.0 {
        nodes += 1;
    }
    nodes
}
