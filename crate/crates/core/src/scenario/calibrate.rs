use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::scenario::config::ScenarioConfig;
use crate::spectral::{count_bound_states, solve_bound_state};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub width: f64,
    /// Depths with exactly one bound state: `[lower, upper)`.
    pub lower: f64,
    pub upper: f64,
    pub depth: f64,
    pub eigenvalue: f64,
    pub residual: f64,
}

fn bisect(mut lo: f64, mut hi: f64, mut above: impl FnMut(f64) -> Result<bool>, tol: f64) -> Result<f64> {
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds the depth range of a Gaussian well of the configured width that
/// binds exactly one state, then picks a depth: the one hitting the target
/// eigenvalue if configured, else the middle of the range.
pub fn calibrate_potential(cfg: &ScenarioConfig) -> Result<Calibration> {
    let width = match &cfg.potential {
        Some(PotentialSpec::GaussianWell { width, .. }) => *width,
        _ => return Err(Error::Config("calibration tunes the depth of a gaussian-well potential".into())),
    };
    let dim = cfg.scenario.dim;
    let count = |d: f64| count_bound_states(dim, &PotentialSpec::gaussian(d, width));
    let mut hi = 1.0 / (width * width);
    while count(hi) < 2 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Config("no depth binds a second state".into()));
        }
    }
    let lower = bisect(0.0, hi, |d| Ok(count(d) >= 1), 1e-10)?;
    let upper = bisect(lower, hi, |d| Ok(count(d) >= 2), 1e-10)?;
    let grid = cfg.grid()?;
    let depth = match cfg.calibration.target_eigenvalue {
        None => 0.5 * (lower + upper),
        Some(target) => {
            // λ decreases monotonically with the depth
            let eig = |d: f64| solve_bound_state(grid, &PotentialSpec::gaussian(d, width)).map(|b| b.eigenvalue);
            let (lo, hi) = (lower * (1.0 + 1e-3), upper * (1.0 - 1e-3));
            let (e_lo, e_hi) = (eig(lo)?, eig(hi)?);
            if !(target <= e_lo && target >= e_hi) {
                return Err(Error::Config(format!(
                    "target eigenvalue {target} is outside the one-state range [{e_hi:.4}, {e_lo:.4}]"
                )));
            }
            bisect(lo, hi, |d| Ok(eig(d)? <= target), 1e-8)?
        }
    };
    let b = solve_bound_state(grid, &PotentialSpec::gaussian(depth, width))?;
    Ok(Calibration {
        width,
        lower,
        upper,
        depth,
        eigenvalue: b.eigenvalue,
        residual: b.residual,
    })
}
