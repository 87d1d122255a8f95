use serde::Serialize;

use crate::channels::cutoff::CutoffSpec;
use crate::error::Result;
use crate::evolve::{free_flow, System};
use crate::grid::{inner, RadialField};

/// One sample of the observable `B(t) = F_c(|x - 2tP|/t^α ≤ 1)` and the terms
/// of `d⟨B⟩/dt = A₁ + A₂ + A₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationRow {
    pub t: f64,
    /// `⟨ψ, B(t) ψ⟩`.
    pub expectation: f64,
    /// `⟨e^{-itH₀} ∂_t F_c e^{itH₀}⟩ ≥ 0`.
    pub a1: f64,
    /// `⟨i[V_t, B]⟩`.
    pub a2: f64,
    /// `⟨i[W + N(|ψ|), B]⟩`.
    pub a3: f64,
}

/// `⟨i[U, B]⟩ = -2 Im (Uψ, Bψ)`.
fn commutator_term(psi: &RadialField, u: &[f64], b_psi: &RadialField) -> Result<f64> {
    let values = psi.values().iter().zip(u).map(|(x, u)| x * u).collect();
    let u_psi = RadialField::from_values(*psi.grid(), values)?;
    Ok(-2.0 * inner(&u_psi, b_psi)?.im)
}

pub fn propagation_row(system: &System, psi: &RadialField, t: f64, alpha: f64, spec: &CutoffSpec) -> Result<PropagationRow> {
    let spec = CutoffSpec { exponent: alpha, ..*spec };
    let x = free_flow(psi, -t);
    let grid = *psi.grid();
    let (mut expectation, mut a1) = (0.0, 0.0);
    for (r, v) in grid.points().zip(x.values()) {
        expectation += spec.value(t, r) * v.norm_sqr();
        a1 += spec.time_derivative(t, r) * v.norm_sqr();
    }
    let fx = x.multiply_by(|r| spec.value(t, r));
    let b_psi = free_flow(&fx, t);
    let a2 = commutator_term(psi, &system.scaled_values(t), &b_psi)?;
    let centrifugal = grid.centrifugal_potential();
    let mut rest: Vec<f64> = system.static_potential().iter().zip(&centrifugal).map(|(a, c)| a - c).collect();
    if let Some(n) = system.nonlinear_values(psi.values()) {
        rest.iter_mut().zip(n).for_each(|(a, b)| *a += b);
    }
    let a3 = commutator_term(psi, &rest, &b_psi)?;
    let dr = grid.dr();
    Ok(PropagationRow {
        t,
        expectation: expectation * dr,
        a1: a1 * dr,
        a2,
        a3,
    })
}

/// Trapezoid integrals of the propagation terms over a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationLedger {
    pub rows: Vec<PropagationRow>,
    pub integral_a1: f64,
    pub integral_a2: f64,
    pub integral_a3: f64,
    /// `⟨B(t_end)⟩ - ⟨B(t_start)⟩ - ∫(A₁ + A₂ + A₃)`: quadrature plus splitting error.
    pub closure_defect: f64,
}

impl PropagationLedger {
    pub fn from_rows(rows: Vec<PropagationRow>) -> Self {
        let trap = |f: &dyn Fn(&PropagationRow) -> f64| -> f64 {
            rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]))).sum()
        };
        let integral_a1 = trap(&|r| r.a1);
        let integral_a2 = trap(&|r| r.a2);
        let integral_a3 = trap(&|r| r.a3);
        let closure_defect = match (rows.first(), rows.last()) {
            (Some(a), Some(b)) => b.expectation - a.expectation - integral_a1 - integral_a2 - integral_a3,
            _ => 0.0,
        };
        PropagationLedger {
            rows,
            integral_a1,
            integral_a2,
            integral_a3,
            closure_defect,
        }
    }

    /// `∫A₁ ≤ (2‖ψ₀‖² + |∫A₂| + |∫A₃|)·(1 + margin)`.
    pub fn bound_holds(&self, initial_mass: f64, margin: f64) -> bool {
        self.integral_a1 <= (2.0 * initial_mass + self.integral_a2.abs() + self.integral_a3.abs()) * (1.0 + margin)
    }

    pub fn min_a1(&self) -> f64 {
        self.rows.iter().map(|r| r.a1).fold(f64::INFINITY, f64::min)
    }
}

/// Builds the ledger from stored states.
pub fn propagation_ledger(system: &System, trace: &[(f64, RadialField)], alpha: f64, spec: &CutoffSpec) -> Result<PropagationLedger> {
    let rows = trace
        .iter()
        .map(|(t, psi)| propagation_row(system, psi, *t, alpha, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(PropagationLedger::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::PropagatorState;
    use crate::grid::make_grid;
    use crate::model::{PotentialSpec, ScalingProfile};
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn ledger_on_a_linear_run() {
        let g = make_grid(3, 400.0, 2048).unwrap();
        let s = Arc::new(System::linear(g, ScalingProfile::new(0.3).unwrap(), PotentialSpec::gaussian(4.0, 1.0)).unwrap());
        let psi0 = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 8.0).exp(), 0.0)).normalized();
        let mut ps = PropagatorState::new(s.clone(), psi0, 1.0, 0.01).unwrap();
        let spec = CutoffSpec::new(0.2);
        let mut trace = Vec::new();
        for k in 0..=60 {
            ps.advance_to(1.0 + k as f64 * 0.5);
            trace.push((ps.t(), ps.field().clone()));
        }
        let ledger = propagation_ledger(&s, &trace, 0.2, &spec).unwrap();
        assert!(ledger.rows.iter().all(|r| r.expectation >= 0.0 && r.expectation <= 1.0 + 1e-12));
        assert!(ledger.min_a1() >= -1e-10);
        assert!(ledger.bound_holds(1.0, 0.05));
        // the three terms account for the change of ⟨B⟩ up to quadrature error
        assert!(ledger.closure_defect.abs() < 2e-2, "defect {}", ledger.closure_defect);
    }
}
