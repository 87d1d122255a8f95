use serde::Serialize;

use crate::channels::channel_amplitude;
use crate::error::{Error, Result};
use crate::evolve::PropagatorState;
use crate::scenario::config::{ScenarioConfig, T0Rule};
use crate::scenario::setup::{initial_state, shared_system, Spectra};

/// `|A|` must stay at or above this over the probe horizon.
pub const PROBE_THRESHOLD: f64 = 0.9;
const PROBE_SAMPLES: usize = 16;

/// One rung of the doubling ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rung {
    pub t0: f64,
    pub min_abs_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T0Choice {
    pub t0: f64,
    pub rule: T0Rule,
    pub ladder: Vec<Rung>,
}

/// Smallest `|A|` over one decade in `s` starting at `t0`.
pub fn probe_min_amplitude(cfg: &ScenarioConfig, spectra: &Spectra, t0: f64) -> Result<f64> {
    let grid = cfg.grid()?;
    let profile = cfg.profile()?;
    let b = spectra
        .bound
        .as_ref()
        .ok_or_else(|| Error::Config("automatic t0 needs a bound state".into()))?;
    let system = shared_system(cfg, grid, &profile)?;
    let psi0 = initial_state(cfg, spectra, &profile, t0)?;
    let mut ps = PropagatorState::new(system, psi0, t0, cfg.time.dt)?;
    let s0 = profile.time_map(t0);
    let mut min = f64::INFINITY;
    for k in 0..=PROBE_SAMPLES {
        let s = s0 * 10f64.powf(k as f64 / PROBE_SAMPLES as f64);
        let t = profile.time_map_inv(s);
        ps.advance_to(t);
        min = min.min(channel_amplitude(b, ps.field(), t, &profile)?.norm());
        if min < PROBE_THRESHOLD {
            break;
        }
    }
    Ok(min)
}

/// Resolves the `t0` rule. `auto` walks `1, 2, 4, …` up to the cap and keeps
/// the first start whose probe run holds `|A| ≥ 0.9` for one `s`-decade.
pub fn choose_t0(cfg: &ScenarioConfig, spectra: &Spectra) -> Result<T0Choice> {
    let rule = cfg.time.t0;
    match rule {
        T0Rule::Fixed(t0) => Ok(T0Choice {
            t0,
            rule,
            ladder: Vec::new(),
        }),
        T0Rule::Auto => {
            let mut ladder = Vec::new();
            let mut t0 = 1.0;
            while t0 <= cfg.time.t0_cap {
                let min_abs_a = probe_min_amplitude(cfg, spectra, t0)?;
                log::info!("t0 ladder: t0 = {t0}, min |A| = {min_abs_a:.6}");
                ladder.push(Rung { t0, min_abs_a });
                if min_abs_a >= PROBE_THRESHOLD {
                    return Ok(T0Choice { t0, rule, ladder });
                }
                t0 *= 2.0;
            }
            Err(Error::LadderExhausted {
                cap: cfg.time.t0_cap,
                threshold: PROBE_THRESHOLD,
            })
        }
    }
}
