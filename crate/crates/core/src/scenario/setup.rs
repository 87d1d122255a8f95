use std::sync::Arc;

use serde::Serialize;

use crate::channels::dilated_bound_state;
use crate::error::{Error, Result};
use crate::evolve::System;
use crate::grid::{RadialField, RadialGrid};
use crate::interp::{relative_tail, OVERFLOW_THRESHOLD};
use crate::model::{GConditionsReport, ScalingProfile};
use crate::scenario::config::{validate, Recipe, ScenarioConfig, ScenarioKind, T0Rule};
use crate::snapshot::read_snapshot;
use crate::spectral::{solve_bound_state, solve_soliton, BoundState};

/// Spectral data a run needs, solved once.
#[derive(Debug, Clone)]
pub struct Spectra {
    /// `ψ_b` of `H₀ + V`.
    pub bound: Option<BoundState>,
    /// `ψ_d` of `H₀ + W` or the soliton `ψ_s`.
    pub second: Option<BoundState>,
}

/// What `validate` and `--dry-run` report.
#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub name: String,
    pub kind: ScenarioKind,
    pub dim: u32,
    pub r_max: f64,
    pub n: usize,
    pub dr: f64,
    pub epsilon: f64,
    pub g_conditions: GConditionsReport,
    pub t0: T0Rule,
    pub t_end: f64,
    pub dt: f64,
    pub stability_budget: f64,
    pub steps: u64,
    pub g_end: f64,
    /// Mass fraction of `ψ_b` beyond `r_max / g(t_end)`; must stay below the overflow threshold.
    pub overflow_tail: Option<f64>,
    pub bound_eigenvalue: Option<f64>,
    pub bound_residual: Option<f64>,
    pub second_eigenvalue: Option<f64>,
    pub second_mass: Option<f64>,
}

pub fn solve_spectra(cfg: &ScenarioConfig, grid: RadialGrid) -> Result<Spectra> {
    let bound = cfg.potential.as_ref().map(|v| solve_bound_state(grid, v)).transpose()?;
    let second = match cfg.scenario.kind {
        ScenarioKind::Mixture => {
            let w = cfg.well.as_ref().ok_or_else(|| Error::Config("mixture without [well]".into()))?;
            Some(solve_bound_state(grid, w)?)
        }
        ScenarioKind::Nonlinear => {
            let nl = cfg.nonlinearity()?.ok_or_else(|| Error::Config("nonlinear without [nonlinearity]".into()))?;
            let target = cfg.initial.soliton.ok_or_else(|| Error::Config("soliton target missing".into()))?;
            Some(solve_soliton(grid, &nl, target)?)
        }
        _ => None,
    };
    Ok(Spectra { bound, second })
}

/// Validates, solves the spectral problems and checks the overflow budget for
/// the largest `g` the run reaches.
pub fn plan(cfg: &ScenarioConfig, override_windows: bool) -> Result<(Plan, Spectra)> {
    validate(cfg, override_windows)?;
    let grid = cfg.grid()?;
    let profile = cfg.profile()?;
    let g_conditions = GConditionsReport::evaluate(&profile);
    if !g_conditions.pass && !override_windows {
        return Err(Error::FailsConditions(g_conditions.violations.join("; ")));
    }
    let spectra = solve_spectra(cfg, grid)?;
    let g_end = profile.g(cfg.time.t_end);
    let overflow_tail = spectra.bound.as_ref().map(|b| relative_tail(&b.state, grid.r_max() / g_end));
    if let Some(tail) = overflow_tail {
        if tail > OVERFLOW_THRESHOLD {
            return Err(Error::ContentOverflow { scale: g_end, tail });
        }
    }
    let system = build_system(cfg, grid, &profile)?;
    let span = match cfg.time.t0 {
        T0Rule::Fixed(t0) => cfg.time.t_end - t0,
        T0Rule::Auto => cfg.time.t_end,
    };
    let plan = Plan {
        name: cfg.name(),
        kind: cfg.scenario.kind,
        dim: grid.dim(),
        r_max: grid.r_max(),
        n: grid.len(),
        dr: grid.dr(),
        epsilon: profile.epsilon(),
        g_conditions,
        t0: cfg.time.t0,
        t_end: cfg.time.t_end,
        dt: cfg.time.dt,
        stability_budget: system.stability_budget(),
        steps: (span / cfg.time.dt).ceil().max(0.0) as u64,
        g_end,
        overflow_tail,
        bound_eigenvalue: spectra.bound.as_ref().map(|b| b.eigenvalue),
        bound_residual: spectra.bound.as_ref().map(|b| b.residual),
        second_eigenvalue: spectra.second.as_ref().map(|b| b.eigenvalue),
        second_mass: spectra.second.as_ref().map(|b| b.state.mass()),
    };
    Ok((plan, spectra))
}

pub fn build_system(cfg: &ScenarioConfig, grid: RadialGrid, profile: &ScalingProfile) -> Result<System> {
    let v = || cfg.potential.clone().ok_or_else(|| Error::Config("missing [potential]".into()));
    match cfg.scenario.kind {
        ScenarioKind::Linear | ScenarioKind::Calibration => System::linear(grid, profile.clone(), v()?),
        ScenarioKind::Mixture => System::mixture(
            grid,
            profile.clone(),
            v()?,
            cfg.well.clone().ok_or_else(|| Error::Config("missing [well]".into()))?,
        ),
        ScenarioKind::Nonlinear => System::nonlinear(
            grid,
            profile.clone(),
            v()?,
            cfg.nonlinearity()?.ok_or_else(|| Error::Config("missing [nonlinearity]".into()))?,
        ),
        ScenarioKind::FreeChannel => Ok(System::free(grid)),
    }
}

/// `ψ(t₀)` from the configured recipe.
pub fn initial_state(cfg: &ScenarioConfig, spectra: &Spectra, profile: &ScalingProfile, t0: f64) -> Result<RadialField> {
    let bubble = || -> Result<RadialField> {
        let b = spectra.bound.as_ref().ok_or_else(|| Error::Config("recipe needs ψ_b".into()))?;
        dilated_bound_state(b, profile.g(t0))
    };
    let second = || -> Result<&RadialField> {
        spectra
            .second
            .as_ref()
            .map(|s| &s.state)
            .ok_or_else(|| Error::Config("recipe needs a second bound state".into()))
    };
    match cfg.initial.recipe {
        Recipe::DilatedBoundState => bubble(),
        Recipe::DefectPlusDilatedBoundState | Recipe::SolitonPlusDilatedBoundState => second()?.add(&bubble()?),
        Recipe::Snapshot => {
            let path = cfg
                .initial
                .snapshot
                .as_ref()
                .ok_or_else(|| Error::Config("snapshot recipe without a path".into()))?;
            let snap = read_snapshot(&cfg.resolve(path))?;
            if snap.field.grid() != &cfg.grid()? {
                return Err(Error::GridMismatch);
            }
            Ok(snap.field)
        }
    }
}

pub fn shared_system(cfg: &ScenarioConfig, grid: RadialGrid, profile: &ScalingProfile) -> Result<Arc<System>> {
    Ok(Arc::new(build_system(cfg, grid, profile)?))
}
