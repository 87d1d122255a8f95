use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{reduction_factor, RadialGrid};
use crate::model::{scaled_potential, scaled_potential_dt, NonlinearitySpec, PotentialSpec, ScalingProfile};

/// Which evolution equation a propagator integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// `i∂ψ = H₀ψ + g⁻²V(x/g)ψ`.
    Linear,
    /// Linear plus a static well `W`.
    Mixture,
    /// Linear plus the saturated nonlinearity `N(|ψ|)ψ`.
    Nonlinear,
    /// `i∂ψ = H₀ψ`.
    Free,
}

/// The right-hand side of a radial evolution problem on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    kind: SystemKind,
    grid: RadialGrid,
    profile: Option<ScalingProfile>,
    v: Option<PotentialSpec>,
    w: Option<PotentialSpec>,
    nl: Option<NonlinearitySpec>,
    /// Centrifugal term plus `W` at the grid points.
    static_potential: Vec<f64>,
    reduction: Vec<f64>,
}

impl System {
    fn build(
        kind: SystemKind,
        grid: RadialGrid,
        profile: Option<ScalingProfile>,
        v: Option<PotentialSpec>,
        w: Option<PotentialSpec>,
        nl: Option<NonlinearitySpec>,
    ) -> Result<Self> {
        for p in v.iter().chain(w.iter()) {
            p.validate()?;
        }
        let mut static_potential = grid.centrifugal_potential();
        if let Some(w) = &w {
            static_potential.iter_mut().zip(grid.points()).for_each(|(u, r)| *u += w.value(r));
        }
        let reduction = grid.points().map(|r| reduction_factor(grid.dim(), r)).collect();
        Ok(System {
            kind,
            grid,
            profile,
            v,
            w,
            nl,
            static_potential,
            reduction,
        })
    }

    pub fn free(grid: RadialGrid) -> Self {
        Self::build(SystemKind::Free, grid, None, None, None, None).expect("no potentials to validate")
    }

    pub fn linear(grid: RadialGrid, profile: ScalingProfile, v: PotentialSpec) -> Result<Self> {
        Self::build(SystemKind::Linear, grid, Some(profile), Some(v), None, None)
    }

    pub fn mixture(grid: RadialGrid, profile: ScalingProfile, v: PotentialSpec, w: PotentialSpec) -> Result<Self> {
        Self::build(SystemKind::Mixture, grid, Some(profile), Some(v), Some(w), None)
    }

    pub fn nonlinear(grid: RadialGrid, profile: ScalingProfile, v: PotentialSpec, nl: NonlinearitySpec) -> Result<Self> {
        if !(nl.strength >= 0.0) {
            return Err(Error::InvalidArgument(format!("nonlinearity strength {} is negative", nl.strength)));
        }
        Self::build(SystemKind::Nonlinear, grid, Some(profile), Some(v), None, Some(nl))
    }

    /// `H₀ + W`, time independent: the autonomous reference dynamics.
    pub fn autonomous(grid: RadialGrid, w: Option<PotentialSpec>) -> Result<Self> {
        Self::build(SystemKind::Free, grid, None, None, w, None)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn profile(&self) -> Option<&ScalingProfile> {
        self.profile.as_ref()
    }

    pub fn scaled_well(&self) -> Option<&PotentialSpec> {
        self.v.as_ref()
    }

    pub fn static_well(&self) -> Option<&PotentialSpec> {
        self.w.as_ref()
    }

    pub fn nonlinearity(&self) -> Option<&NonlinearitySpec> {
        self.nl.as_ref()
    }

    pub fn is_autonomous(&self) -> bool {
        self.v.is_none()
    }

    /// Centrifugal term plus `W`.
    pub fn static_potential(&self) -> &[f64] {
        &self.static_potential
    }

    /// `g(t)⁻² V(r_j / g(t))`, zero when the system has no scaled well.
    pub fn scaled_values(&self, t: f64) -> Vec<f64> {
        match (&self.v, &self.profile) {
            (Some(v), Some(p)) => self.grid.points().map(|r| scaled_potential(v, p, t, r)).collect(),
            _ => vec![0.0; self.grid.len()],
        }
    }

    /// `∂_t [g(t)⁻² V(r_j / g(t))]`.
    pub fn scaled_dt_values(&self, t: f64) -> Vec<f64> {
        match (&self.v, &self.profile) {
            (Some(v), Some(p)) => self.grid.points().map(|r| scaled_potential_dt(v, p, t, r)).collect(),
            _ => vec![0.0; self.grid.len()],
        }
    }

    /// `N(|u_j|)` from reduced samples; `None` for linear systems.
    pub fn nonlinear_values(&self, values: &[num_complex::Complex64]) -> Option<Vec<f64>> {
        let nl = self.nl.as_ref()?;
        Some(values.iter().zip(&self.reduction).map(|(x, c)| nl.value(x.norm() / c)).collect())
    }

    /// `2 N_{F,0}(|u_j|)` from reduced samples.
    pub fn nonlinear_f0_values(&self, values: &[num_complex::Complex64]) -> Option<Vec<f64>> {
        let nl = self.nl.as_ref()?;
        Some(values.iter().zip(&self.reduction).map(|(x, c)| 2.0 * nl.f0(x.norm() / c)).collect())
    }

    /// Largest stable step: the top retained mode must turn by less than `π`.
    pub fn stability_budget(&self) -> f64 {
        std::f64::consts::PI / self.grid.k_max().powi(2)
    }
}
