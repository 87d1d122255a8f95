use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{
    channel_amplitude, decompose, dilated_bound_state, free_channel_projection, gauged_amplitude, local_mass,
    probe_dictionary, propagation_row, second_bubble_overlap, weak_localization_norm, CutoffSpec, ProbeReport,
    PropagationRow, WeakLimitProbe, DEFAULT_CUTOFF_WIDTH,
};
use crate::dilation::{apply_dilation, frame_residual};
use crate::error::{Error, Result};
use crate::evolve::{energy_ledger_update, evolve_with_observers, h1_norm, EnergyRow, PropagatorState, System};
use crate::dst::refine;
use crate::grid::{inner, RadialField, RadialGrid};
use crate::model::ScalingProfile;
use crate::scenario::calibrate::{calibrate_potential, Calibration};
use crate::scenario::config::{ScenarioConfig, ScenarioKind};
use crate::scenario::criteria::{evaluate, CriterionResult};
use crate::scenario::setup::{initial_state, plan, shared_system, Plan, Spectra};
use crate::scenario::t0::{choose_t0, T0Choice};
use crate::snapshot::{write_bound_state, write_snapshot, Stamp};
use crate::spectral::{BoundState, Hamiltonian};

/// Observation times `t₀ rᵏ` below `t_end`, then `t_end`.
pub fn observation_times(t0: f64, t_end: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = t0 * ratio.powi(k);
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(t_end);
    out
}

/// One observation: a row of the amplitude CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub s: f64,
    /// `ã(t)`.
    pub a: Complex64,
    /// `A = e^{iλs} ã`.
    pub big_a: Complex64,
    /// `c(t)`.
    pub c: Complex64,
    pub wl_norm: f64,
    pub free_proj_norm: f64,
    /// `|(ψ_c, χ)| / ‖χ‖` for the second bound state `χ` (`ψ_d` or `ψ_s`).
    pub bubble2_overlap: f64,
    pub local_mass: Vec<f64>,
    pub energy: EnergyRow,
    pub mass: f64,
    pub h1_norm: f64,
    /// `|(e^{-iD ln g} ψ_b, ψ_c)|`.
    pub orthogonality: f64,
    pub propagation: PropagationRow,
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct Trace {
    pub rows: Vec<Row>,
    /// Free-channel projections at every observation (linear and free-channel runs).
    pub projections: Vec<RadialField>,
    /// `(t, relative residual)` of the transformed-frame equation.
    pub frame_residuals: Vec<(f64, f64)>,
    pub probe: Option<ProbeReport>,
    pub snapshots: Vec<(f64, RadialField)>,
    pub steps: u64,
    pub initial_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub kind: ScenarioKind,
    pub plan: Plan,
    pub t0: Option<T0Choice>,
    pub steps: u64,
    pub initial_mass: f64,
    pub calibration: Option<Calibration>,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub trace: Option<Trace>,
    pub spectra: Spectra,
}

/// Sine-space refinement applied before dilating states for the frame check.
const FRAME_REFINEMENT: usize = 8;
const FRAME_STENCIL: usize = 5;
/// Fraction of the box over which the frame residual is measured.
const FRAME_INTERIOR: f64 = 0.8;

pub const CSV_NAME: &str = "amplitude.csv";
pub const PROBE_CSV_NAME: &str = "probe.csv";
pub const SUMMARY_NAME: &str = "summary.json";

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    profile: ScalingProfile,
    system: Arc<System>,
    bound: Option<&'a BoundState>,
    second: Option<&'a BoundState>,
    alpha_spec: CutoffSpec,
    beta_spec: CutoffSpec,
    frame: Option<Hamiltonian>,
    keep_projections: bool,
}

impl Context<'_> {
    fn observe(&self, ps: &PropagatorState) -> Result<(Row, Option<RadialField>)> {
        let t = ps.t();
        let psi = ps.field();
        let s = self.profile.time_map(t);
        let d = self.cfg.diagnostics.clone();
        let zero = Complex64::new(0.0, 0.0);
        let (a, big_a, c, orthogonality, remainder) = match self.bound {
            Some(b) => {
                let a = channel_amplitude(b, psi, t, &self.profile)?;
                let dec = decompose(b, psi, t, d.alpha, &self.profile, &self.alpha_spec)?;
                let bubble = dilated_bound_state(b, self.profile.g(t))?;
                let orth = inner(&bubble, &dec.remainder)?.norm();
                (a, gauged_amplitude(a, b.eigenvalue, s), dec.coefficient, orth, Some(dec.remainder))
            }
            None => (zero, zero, zero, 0.0, None),
        };
        let bubble2_overlap = match (self.second, &remainder) {
            (Some(x), Some(rem)) => second_bubble_overlap(x, rem)?.norm() / x.state.norm(),
            _ => 0.0,
        };
        let projection = free_channel_projection(psi, t, d.alpha, &self.alpha_spec);
        let row = Row {
            t,
            s,
            a,
            big_a,
            c,
            wl_norm: weak_localization_norm(psi, t, d.beta, &self.profile, &self.beta_spec),
            free_proj_norm: projection.norm(),
            bubble2_overlap,
            local_mass: d.local_mass_radii.iter().map(|m| local_mass(psi, *m)).collect(),
            energy: energy_ledger_update(ps),
            mass: psi.mass(),
            h1_norm: h1_norm(psi),
            orthogonality,
            propagation: propagation_row(&self.system, psi, t, d.alpha, &self.alpha_spec)?,
        };
        Ok((row, self.keep_projections.then_some(projection)))
    }

    /// Residual of the frame equation at `ps.t() + 2Δt` from five states one step
    /// apart. The states are refined before the dilation compresses them, so the
    /// spline resolves the outgoing waves. Norms stop at `0.8 r_max` (in the
    /// original frame): the Dirichlet wall does not commute with dilations.
    fn frame_check(&self, ps: &PropagatorState) -> Result<Option<(f64, f64)>> {
        let Some(h) = &self.frame else { return Ok(None) };
        let mut probe = ps.clone();
        let mut samples = Vec::with_capacity(FRAME_STENCIL);
        for k in 0..FRAME_STENCIL {
            if k > 0 {
                probe.step();
            }
            let t = probe.t();
            let phi = apply_dilation(&refine(probe.field(), FRAME_REFINEMENT)?, 1.0 / self.profile.g(t))?;
            samples.push((phi, self.profile.time_map(t)));
        }
        let centre = samples[FRAME_STENCIL / 2].1;
        let t = self.profile.time_map_inv(centre);
        let within = FRAME_INTERIOR * ps.field().grid().r_max() / self.profile.g(t);
        let refs: Vec<(&RadialField, f64)> = samples.iter().map(|(f, s)| (f, *s)).collect();
        Ok(Some((t, frame_residual(h, &self.profile, &refs, within)?)))
    }
}

/// Plans, picks `t₀`, evolves and evaluates the criteria without touching the disk.
pub fn execute(cfg: &ScenarioConfig, override_windows: bool) -> Result<RunOutcome> {
    let (plan, spectra) = plan(cfg, override_windows)?;
    let kind = cfg.scenario.kind;
    if kind == ScenarioKind::Calibration {
        let calibration = calibrate_potential(cfg)?;
        let criteria = evaluate(cfg, &plan, None, Some(&calibration));
        let pass = criteria.iter().all(|c| c.pass);
        return Ok(RunOutcome {
            summary: Summary {
                name: cfg.name(),
                kind,
                plan,
                t0: None,
                steps: 0,
                initial_mass: 0.0,
                calibration: Some(calibration),
                criteria,
                pass,
            },
            trace: None,
            spectra,
        });
    }
    let t0 = choose_t0(cfg, &spectra)?;
    let grid = cfg.grid()?;
    let profile = cfg.profile()?;
    let system = shared_system(cfg, grid, &profile)?;
    let psi0 = initial_state(cfg, &spectra, &profile, t0.t0)?;
    let initial_mass = psi0.mass();
    let mut ps = PropagatorState::new(system.clone(), psi0, t0.t0, cfg.time.dt)?;
    let d = &cfg.diagnostics;
    let ctx = Context {
        cfg,
        profile: profile.clone(),
        system: system.clone(),
        bound: spectra.bound.as_ref(),
        second: spectra.second.as_ref(),
        alpha_spec: CutoffSpec::new(d.alpha).with_width(DEFAULT_CUTOFF_WIDTH),
        beta_spec: CutoffSpec::new(d.beta).with_width(DEFAULT_CUTOFF_WIDTH),
        frame: match (kind, &cfg.potential, cfg.observe.frame_every) {
            (ScenarioKind::Linear, Some(v), k) if k > 0 => {
                Some(Hamiltonian::new(RadialGrid::new(grid.dim(), grid.r_max(), FRAME_REFINEMENT * grid.len())?, v))
            }
            _ => None,
        },
        keep_projections: matches!(kind, ScenarioKind::Linear | ScenarioKind::FreeChannel),
    };
    let mut probe = match (d.probe, &cfg.potential, spectra.bound.as_ref()) {
        (true, Some(v), Some(b)) => {
            let extent = d.dictionary_extent.unwrap_or(4.0 * b_extent(b));
            let dict = probe_dictionary(b, extent, cfg.scenario.seed);
            Some(WeakLimitProbe::new(grid, v, b, dict, 0.0, d.probe_ds.unwrap_or(cfg.time.dt))?)
        }
        _ => None,
    };
    let mut report = probe.as_ref().map(|p| p.report());
    let schedule = observation_times(t0.t0, cfg.time.t_end, cfg.observe.ratio);
    let snapshot_at: Vec<usize> = cfg
        .observe
        .snapshots
        .iter()
        .filter_map(|ts| {
            schedule
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - ts).abs().total_cmp(&(b.1 - ts).abs()))
                .map(|(k, _)| k)
        })
        .collect();
    let mut projections = Vec::new();
    let mut frame_residuals = Vec::new();
    let mut snapshots = Vec::new();
    let mut index = 0usize;
    let mut observer = |ps: &PropagatorState| -> Result<Row> {
        let (row, projection) = ctx.observe(ps)?;
        projections.extend(projection);
        let every = cfg.observe.frame_every;
        if every > 0 && index.is_multiple_of(every) && ps.t() < cfg.time.t_end {
            frame_residuals.extend(ctx.frame_check(ps)?);
        }
        if let (Some(p), Some(rep)) = (probe.as_mut(), report.as_mut()) {
            let phi = apply_dilation(ps.field(), 1.0 / ctx.profile.g(ps.t()))?;
            let s = ctx.profile.time_map(ps.t());
            rep.push(s, &p.overlaps(s, &phi)?);
        }
        if snapshot_at.contains(&index) {
            snapshots.push((ps.t(), ps.field().clone()));
        }
        log::debug!("t = {:.3}, |A| = {:.6}", row.t, row.big_a.norm());
        index += 1;
        Ok(row)
    };
    let rows = evolve_with_observers(&mut ps, cfg.time.t_end, &schedule, &mut observer)?;
    let trace = Trace {
        rows,
        projections,
        frame_residuals,
        probe: report,
        snapshots,
        steps: ps.steps(),
        initial_mass,
    };
    let criteria = evaluate(cfg, &plan, Some(&trace), None);
    let pass = criteria.iter().all(|c| c.pass);
    Ok(RunOutcome {
        summary: Summary {
            name: cfg.name(),
            kind,
            plan,
            t0: Some(t0),
            steps: trace.steps,
            initial_mass,
            calibration: None,
            criteria,
            pass,
        },
        trace: Some(trace),
        spectra,
    })
}

/// Radius holding all but `1e-6` of `ψ_b`'s mass.
fn b_extent(b: &BoundState) -> f64 {
    let f = &b.state;
    let total = f.mass();
    f.grid()
        .points()
        .find(|r| f.mass_beyond(*r) < 1e-6 * total)
        .unwrap_or(f.grid().r_max())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn csv_header(cfg: &ScenarioConfig) -> Vec<String> {
    let mut h: Vec<String> = [
        "t", "s", "re_a", "im_a", "re_A", "im_A", "abs_A", "re_c", "im_c", "abs_c", "wl_norm", "free_proj_norm",
        "bubble2_overlap",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(cfg.diagnostics.local_mass_radii.iter().map(|m| format!("local_mass_{m}")));
    h.extend(
        [
            "kinetic",
            "scaled",
            "well",
            "nonlinear",
            "nonlinear_f0",
            "g_term",
            "source",
            "source_integral",
            "energy",
            "mass",
            "h1_norm",
            "orthogonality",
            "b_expectation",
            "a1",
            "a2",
            "a3",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

fn csv_record(r: &Row) -> Vec<String> {
    let e = &r.energy;
    let mut v = vec![
        r.t,
        r.s,
        r.a.re,
        r.a.im,
        r.big_a.re,
        r.big_a.im,
        r.big_a.norm(),
        r.c.re,
        r.c.im,
        r.c.norm(),
        r.wl_norm,
        r.free_proj_norm,
        r.bubble2_overlap,
    ];
    v.extend(&r.local_mass);
    v.extend([
        e.kinetic,
        e.scaled,
        e.well,
        e.nonlinear,
        e.nonlinear_f0,
        e.g_term,
        e.source,
        e.source_integral,
        e.energy(),
        r.mass,
        r.h1_norm,
        r.orthogonality,
        r.propagation.expectation,
        r.propagation.a1,
        r.propagation.a2,
        r.propagation.a3,
    ]);
    v.into_iter().map(fmt).collect()
}

pub fn write_csv(path: &Path, cfg: &ScenarioConfig, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header(cfg))?;
    for r in rows {
        w.write_record(csv_record(r))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_probe_csv(path: &Path, report: &ProbeReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["s".to_string()];
    for n in &report.names {
        header.push(format!("re_{n}"));
        header.push(format!("im_{n}"));
    }
    w.write_record(&header)?;
    for (s, row) in report.s.iter().zip(&report.overlaps) {
        let mut rec = vec![fmt(*s)];
        for (re, im) in row {
            rec.push(fmt(*re));
            rec.push(fmt(*im));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Where outputs go: the explicit directory, else the config's `output`, else
/// `runs/<name>` next to the config.
pub fn output_dir(cfg: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    match (out, &cfg.scenario.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => cfg.resolve(o),
        (None, None) => cfg.resolve(Path::new("runs")).join(cfg.name()),
    }
}

/// Writes the CSV, probe CSV, snapshots and JSON summary for an outcome.
pub fn write_outputs(dir: &Path, cfg: &ScenarioConfig, outcome: &RunOutcome) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(trace) = &outcome.trace {
        write_csv(&dir.join(CSV_NAME), cfg, &trace.rows)?;
        if let Some(report) = &trace.probe {
            write_probe_csv(&dir.join(PROBE_CSV_NAME), report)?;
        }
        for (k, (t, field)) in trace.snapshots.iter().enumerate() {
            write_snapshot(&dir.join(format!("psi_{k:03}.rssl")), field, Stamp::Time(*t))?;
        }
    }
    if let Some(b) = &outcome.spectra.bound {
        write_bound_state(&dir.join("bound.rssl"), b)?;
    }
    if let Some(x) = &outcome.spectra.second {
        write_bound_state(&dir.join("second.rssl"), x)?;
    }
    let path = dir.join(SUMMARY_NAME);
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

/// [`execute`] followed by [`write_outputs`].
pub fn run(cfg: &ScenarioConfig, out: Option<&Path>, override_windows: bool) -> Result<RunOutcome> {
    let outcome = execute(cfg, override_windows)?;
    write_outputs(&output_dir(cfg, out), cfg, &outcome)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::tests::LINEAR;

    fn small() -> ScenarioConfig {
        ScenarioConfig::from_toml(&LINEAR.replace("t_end = 50.0", "t_end = 12.0").replace("dt = 0.02", "dt = 0.05"))
            .unwrap()
    }

    #[test]
    fn schedule_is_geometric_and_ends_at_t_end() {
        let s = observation_times(1.0, 10.0, 2.0);
        assert_eq!(s, vec![1.0, 2.0, 4.0, 8.0, 10.0]);
        assert_eq!(observation_times(1.0, 8.0, 2.0), vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn small_linear_run_is_deterministic() {
        let cfg = small();
        let a = execute(&cfg, false).unwrap();
        let b = execute(&cfg, false).unwrap();
        let (ta, tb) = (a.trace.unwrap(), b.trace.unwrap());
        assert_eq!(ta.rows, tb.rows);
        assert_eq!(a.summary.t0, b.summary.t0);
        let rows = &ta.rows;
        assert_eq!(rows.last().unwrap().t, 12.0);
        assert!(rows.iter().all(|r| r.big_a.norm() > 0.5 && r.big_a.norm() <= 1.0 + 1e-9));
        assert!(rows.iter().all(|r| (r.a.norm() - r.big_a.norm()).abs() < 1e-12));
        assert!(ta.projections.len() == rows.len());
        assert!(a.summary.criteria.iter().any(|c| c.criterion == 1 && c.pass));
    }

    #[test]
    fn ladder_exhaustion_is_reported() {
        let cfg = ScenarioConfig::from_toml(&LINEAR.replace("t0 = \"auto\"", "t0 = \"auto\"\nt0_cap = 0.5")).unwrap();
        match execute(&cfg, false) {
            Err(Error::LadderExhausted { cap, .. }) => assert_eq!(cap, 0.5),
            other => panic!("expected LadderExhausted, got {:?}", other.map(|o| o.summary.pass)),
        }
    }

    #[test]
    fn outputs_are_written_and_reproducible() {
        let cfg = small();
        let dir = tempfile::tempdir().unwrap();
        let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
        run(&cfg, Some(&d1), false).unwrap();
        run(&cfg, Some(&d2), false).unwrap();
        for name in [CSV_NAME, SUMMARY_NAME, "bound.rssl"] {
            let x = std::fs::read(d1.join(name)).unwrap();
            assert_eq!(x, std::fs::read(d2.join(name)).unwrap(), "{name}");
        }
        let text = std::fs::read_to_string(d1.join(CSV_NAME)).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), csv_header(&cfg).len());
        assert!(header.starts_with("t,s,re_a,im_a,re_A"));
        let b = crate::snapshot::read_snapshot(&d1.join("bound.rssl")).unwrap();
        assert!(matches!(b.stamp, Stamp::Eigenvalue(e) if e < 0.0));
    }
}
