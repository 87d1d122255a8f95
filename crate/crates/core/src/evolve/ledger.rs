use serde::Serialize;

use crate::evolve::propagator::PropagatorState;
use crate::grid::RadialField;
use crate::spectral::free_energy_form;

/// Quadratic forms of one state at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    /// `(ψ, H₀ψ)`.
    pub kinetic: f64,
    /// `(ψ, V_t ψ)`.
    pub scaled: f64,
    /// `(ψ, Wψ)`.
    pub well: f64,
    /// `(ψ, N(|ψ|)ψ)`.
    pub nonlinear: f64,
    /// `(ψ, 2N_{F,0}(|ψ|)ψ)`.
    pub nonlinear_f0: f64,
    /// `G = (ψ, Nψ) - 2(ψ, N_{F,0}ψ)`, the integral of `N_F(|ψ|)`.
    pub g_term: f64,
    /// `g₀(t) = (ψ, ∂_t V_t ψ)`.
    pub source: f64,
    /// `∫_{t₀}^t g₀` accumulated by the propagator.
    pub source_integral: f64,
}

impl EnergyRow {
    /// The conserved-up-to-source energy `(ψ, (H₀ + V_t + W)ψ) + (ψ, 2N_{F,0}ψ)`.
    pub fn energy(&self) -> f64 {
        self.kinetic + self.scaled + self.well + self.nonlinear_f0
    }
}

/// Time series of [`EnergyRow`]s.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    pub fn push(&mut self, row: EnergyRow) {
        self.rows.push(row);
    }

    /// `|E(t) - E(t₀) - ∫g₀|` maximized over the rows.
    pub fn max_defect(&self) -> f64 {
        let Some(first) = self.rows.first() else {
            return 0.0;
        };
        self.rows
            .iter()
            .map(|r| (r.energy() - first.energy() - (r.source_integral - first.source_integral)).abs())
            .fold(0.0, f64::max)
    }

    /// Energy scale for relative defects: the largest single term seen.
    pub fn scale(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| [r.kinetic, r.scaled, r.well, r.nonlinear_f0])
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

fn weighted(f: &RadialField, w: &[f64]) -> f64 {
    f.values().iter().zip(w).map(|(x, w)| w * x.norm_sqr()).sum::<f64>() * f.grid().dr()
}

/// Evaluates every form at the propagator's current state.
pub fn energy_ledger_update(ps: &PropagatorState) -> EnergyRow {
    let s = ps.system();
    let f = ps.field();
    let t = ps.t();
    let kinetic = free_energy_form(f);
    let scaled = weighted(f, &s.scaled_values(t));
    let centrifugal = f.grid().centrifugal_potential();
    let w: Vec<f64> = s.static_potential().iter().zip(&centrifugal).map(|(a, c)| a - c).collect();
    let well = weighted(f, &w);
    let (nonlinear, nonlinear_f0) = match (s.nonlinear_values(f.values()), s.nonlinear_f0_values(f.values())) {
        (Some(n), Some(n0)) => (weighted(f, &n), weighted(f, &n0)),
        _ => (0.0, 0.0),
    };
    EnergyRow {
        t,
        kinetic,
        scaled,
        well,
        nonlinear,
        nonlinear_f0,
        g_term: nonlinear - nonlinear_f0,
        source: weighted(f, &s.scaled_dt_values(t)),
        source_integral: ps.source_integral(),
    }
}

/// `(‖f‖² + ‖∇f‖²)^{1/2}` with the gradient form taken spectrally.
pub fn h1_norm(f: &RadialField) -> f64 {
    (f.mass() + free_energy_form(f).max(0.0)).sqrt()
}
