//! Scenario-level checks evaluated from a finished trace.

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::PropagationLedger;
use crate::fit::loglog_fit;
use crate::scenario::calibrate::Calibration;
use crate::scenario::config::{ScenarioConfig, ScenarioKind};
use crate::scenario::run::{Row, Trace};
use crate::scenario::setup::Plan;
use crate::evolve::EnergyLedger;

/// Mass drift allowed per 10⁴ steps.
pub const MASS_DRIFT_PER_1E4: f64 = 1e-11;
pub const FRAME_RESIDUAL_MAX: f64 = 1e-3;
pub const AMPLITUDE_FLOOR: f64 = 0.5;
pub const BUBBLE_FLOOR: f64 = 0.25;
pub const ORTHOGONALITY_MAX: f64 = 1e-10;
pub const ENERGY_DEFECT_MAX: f64 = 1e-4;
pub const H1_GROWTH_MAX: f64 = 3.0;
pub const PROBE_CONTINUUM_MAX: f64 = 0.05;
pub const PROPAGATION_MARGIN: f64 = 0.05;
/// Largest `|A|` left at the end of a free-channel control run.
pub const FREE_CONTROL_MAX: f64 = 0.05;
/// Observations between the two members of a Cauchy pair (`t₂ = 2t₁` at the default ratio).
pub const CAUCHY_LAG: usize = 8;
/// A radius plateaus when its local mass varies by at most this factor over the first half of the run.
pub const PLATEAU_SPREAD: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    /// Acceptance criterion number, 1 to 10.
    pub criterion: u8,
    pub check: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

fn result(criterion: u8, check: &str, value: f64, bound: String, pass: bool) -> CriterionResult {
    CriterionResult {
        criterion,
        check: check.to_string(),
        value,
        bound,
        pass: pass && value.is_finite(),
    }
}

/// Rows with `s` in the last decade `[s_end/10, s_end]`.
pub fn final_decade(rows: &[Row]) -> &[Row] {
    let Some(last) = rows.last() else { return rows };
    let from = rows.iter().position(|r| r.s >= last.s / 10.0).unwrap_or(0);
    &rows[from..]
}

fn min_over<F: Fn(&Row) -> f64>(rows: &[Row], f: F) -> f64 {
    rows.iter().map(f).fold(f64::INFINITY, f64::min)
}

fn max_over<F: Fn(&Row) -> f64>(rows: &[Row], f: F) -> f64 {
    rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// `(x_k, |y_{k+lag} - y_k|)` for every pair in the trace.
pub fn cauchy_pairs<T>(xs: &[f64], ys: &[T], lag: usize, dist: impl Fn(&T, &T) -> f64) -> (Vec<f64>, Vec<f64>) {
    (0..ys.len().saturating_sub(lag))
        .map(|k| (xs[k], dist(&ys[k], &ys[k + lag])))
        .unzip()
}

/// Slope the weak-localization proof guarantees for `(n, ε, β)`.
pub fn weak_localization_envelope(dim: u32, epsilon: f64, beta: f64) -> f64 {
    let n = dim as f64;
    let a = -n * (1.0 - epsilon - beta) / 2.0;
    let b = -((n - 2.0) / 2.0 - (n - 2.0) * epsilon - n * beta / 2.0);
    a.max(b)
}

/// Smallest configured radius whose local mass plateaus over the first half
/// of the run, with `c'` half its smallest value there.
pub fn local_mass_plateau(radii: &[f64], rows: &[Row]) -> Option<(f64, f64)> {
    let half = &rows[..rows.len().div_ceil(2)];
    radii.iter().enumerate().find_map(|(j, m)| {
        let lo = min_over(half, |r| r.local_mass[j]);
        let hi = max_over(half, |r| r.local_mass[j]);
        (lo > 0.0 && hi <= PLATEAU_SPREAD * lo).then_some((*m, 0.5 * lo))
    })
}

/// Power-law slope of `y(x)` over the pairs whose first member lies in the final decade.
fn tail_fit(rows: &[Row], s_first: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let from = rows.last().map_or(0.0, |r| r.s / 10.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        s_first.iter().zip(x.iter().zip(y)).filter(|(s, _)| **s >= from).map(|(_, (x, y))| (*x, *y)).unzip();
    loglog_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
}

fn mass_drift(trace: &Trace) -> f64 {
    let m0 = trace.initial_mass;
    let rel = max_over(&trace.rows, |r| (r.mass - m0).abs()) / m0;
    rel * 1e4 / (trace.steps as f64).max(1e4)
}

fn amplitude_checks(out: &mut Vec<CriterionResult>, criterion: u8, rows: &[Row]) {
    let v = min_over(final_decade(rows), |r| r.big_a.norm());
    out.push(result(criterion, "final-decade min |A|", v, format!(">= {AMPLITUDE_FLOOR}"), v >= AMPLITUDE_FLOOR));
}

fn linear_checks(out: &mut Vec<CriterionResult>, cfg: &ScenarioConfig, trace: &Trace) {
    let rows = &trace.rows;
    let d = &cfg.diagnostics;
    let dim = cfg.scenario.dim;

    if !trace.frame_residuals.is_empty() {
        let v = trace.frame_residuals.iter().map(|x| x.1).fold(0.0, f64::max);
        out.push(result(3, "frame residual max", v, format!("<= {FRAME_RESIDUAL_MAX:e}"), v <= FRAME_RESIDUAL_MAX));
    }

    amplitude_checks(out, 4, rows);
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let a: Vec<Complex64> = rows.iter().map(|r| r.big_a).collect();
    let (x, y) = cauchy_pairs(&s, &a, CAUCHY_LAG, |p, q| (p - q).norm());
    let slope = tail_fit(rows, &x, &x, &y);
    out.push(result(4, "amplitude Cauchy slope in s", slope, "-1 ± 0.3".into(), (slope + 1.0).abs() <= 0.3));

    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let wl: Vec<f64> = rows.iter().map(|r| r.wl_norm).collect();
    let envelope = weak_localization_envelope(dim, cfg.profile.epsilon, d.beta);
    let slope = loglog_fit(&t, &wl).map_or(f64::NAN, |f| f.slope);
    out.push(result(
        5,
        "weak-localization slope",
        slope,
        format!("<= {:.4} (half the envelope {envelope:.4})", 0.5 * envelope),
        slope <= 0.5 * envelope,
    ));
    let ratio = wl.last().copied().unwrap_or(f64::NAN) / wl.first().copied().unwrap_or(f64::NAN);
    out.push(result(5, "weak-localization end/start", ratio, "<= 0.2".into(), ratio <= 0.2));

    free_channel_checks(out, cfg, trace);

    let fd = final_decade(rows);
    let v = min_over(fd, |r| r.c.norm());
    out.push(result(7, "final-decade min |c|", v, format!(">= {BUBBLE_FLOOR}"), v >= BUBBLE_FLOOR));
    let v = max_over(rows, |r| r.orthogonality);
    out.push(result(7, "decomposition orthogonality", v, format!("<= {ORTHOGONALITY_MAX:e}"), v <= ORTHOGONALITY_MAX));

    if let Some(report) = &trace.probe {
        let norm0 = trace.initial_mass.sqrt();
        let s_from = fd.first().map_or(0.0, |r| r.s);
        let v = report.max_abs_from("continuum", s_from).unwrap_or(f64::NAN) / norm0;
        out.push(result(
            10,
            "continuum overlap final-decade max / |psi0|",
            v,
            format!("<= {PROBE_CONTINUUM_MAX}"),
            v <= PROBE_CONTINUUM_MAX,
        ));
        if let (Some(last), false) = (rows.last(), report.s.is_empty()) {
            let mean = |k: usize| {
                let d = report.distances(k, last.big_a);
                d.iter().sum::<f64>() / d.len() as f64
            };
            let (first, end) = (mean(0), mean(report.s.len() - 1));
            let v = end / first;
            out.push(result(10, "dictionary distance to the weak limit, end/start", v, "< 1".into(), v < 1.0));
        }
    }
}

fn free_channel_checks(out: &mut Vec<CriterionResult>, cfg: &ScenarioConfig, trace: &Trace) {
    let alpha = cfg.diagnostics.alpha;
    let n = cfg.scenario.dim as f64;
    let expected = -(1.0 - n * alpha / 2.0);
    let t: Vec<f64> = trace.rows.iter().map(|r| r.t).collect();
    if trace.projections.len() == t.len() {
        let (x, y) = cauchy_pairs(&t, &trace.projections, CAUCHY_LAG, |p, q| {
            p.sub(q).map_or(f64::NAN, |d| d.norm())
        });
        let s: Vec<f64> = trace.rows.iter().map(|r| r.s).collect();
        let slope = tail_fit(&trace.rows, &s[..x.len()], &x, &y);
        out.push(result(
            6,
            "free-channel Cauchy slope in t",
            slope,
            format!("{expected:.3} ± 40%"),
            (slope - expected).abs() <= 0.4 * expected.abs(),
        ));
    }
    propagation_check(out, trace);
}

fn propagation_check(out: &mut Vec<CriterionResult>, trace: &Trace) {
    let ledger = PropagationLedger::from_rows(trace.rows.iter().map(|r| r.propagation).collect());
    let bound = (2.0 * trace.initial_mass + ledger.integral_a2.abs() + ledger.integral_a3.abs()) * (1.0 + PROPAGATION_MARGIN);
    out.push(result(
        6,
        "propagation integral of A1",
        ledger.integral_a1,
        format!("<= {bound:.6}"),
        ledger.bound_holds(trace.initial_mass, PROPAGATION_MARGIN),
    ));
}

/// Without a potential `e^{itH₀}ψ(t)` is constant, so the projection only moves with the
/// cutoff; the control checks that the bound channel empties and the ledger bound holds.
fn free_control_checks(out: &mut Vec<CriterionResult>, trace: &Trace) {
    let v = trace.rows.last().map_or(f64::NAN, |r| r.big_a.norm());
    out.push(result(6, "free control: final |A|", v, format!("<= {FREE_CONTROL_MAX}"), v <= FREE_CONTROL_MAX));
    propagation_check(out, trace);
}

fn mixture_checks(out: &mut Vec<CriterionResult>, trace: &Trace) {
    amplitude_checks(out, 8, &trace.rows);
    let floor = 1.0 / (2.0 * 2f64.sqrt()) - 0.1;
    let v = min_over(final_decade(&trace.rows), |r| r.bubble2_overlap);
    out.push(result(8, "final-decade min defect overlap", v, format!(">= {floor:.4}"), v >= floor));
}

fn nonlinear_checks(out: &mut Vec<CriterionResult>, cfg: &ScenarioConfig, trace: &Trace) {
    let rows = &trace.rows;
    amplitude_checks(out, 9, rows);
    match local_mass_plateau(&cfg.diagnostics.local_mass_radii, rows) {
        Some((m, c)) => {
            let j = cfg.diagnostics.local_mass_radii.iter().position(|x| *x == m).unwrap();
            let v = min_over(rows, |r| r.local_mass[j]);
            out.push(result(9, &format!("local mass within {m}"), v, format!(">= {c:.6}"), v >= c));
        }
        None => out.push(result(9, "local mass plateau", f64::NAN, "some radius plateaus".into(), false)),
    }
    let h0 = rows.first().map_or(f64::NAN, |r| r.h1_norm);
    let v = max_over(rows, |r| r.h1_norm) / h0;
    out.push(result(9, "H1 max / initial", v, format!("<= {H1_GROWTH_MAX}"), v <= H1_GROWTH_MAX));
    let ledger = EnergyLedger {
        rows: rows.iter().map(|r| r.energy).collect(),
    };
    let v = ledger.max_defect() / ledger.scale();
    out.push(result(9, "energy defect / scale", v, format!("<= {ENERGY_DEFECT_MAX:e}"), v <= ENERGY_DEFECT_MAX));
}

fn calibration_checks(out: &mut Vec<CriterionResult>, c: &Calibration) {
    out.push(result(2, "bound-state residual", c.residual, "<= 1e-8".into(), c.residual <= 1e-8));
    out.push(result(
        2,
        "depth inside the one-state range",
        c.depth,
        format!("in ({:.6}, {:.6})", c.lower, c.upper),
        c.lower < c.depth && c.depth < c.upper && c.eigenvalue < 0.0,
    ));
}

/// Every check that applies to the scenario kind.
pub fn evaluate(cfg: &ScenarioConfig, plan: &Plan, trace: Option<&Trace>, calibration: Option<&Calibration>) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    if let Some(r) = plan.bound_residual {
        out.push(result(2, "bound-state residual", r, "<= 1e-8".into(), r <= 1e-8));
    }
    if let Some(c) = calibration {
        calibration_checks(&mut out, c);
    }
    let Some(trace) = trace else { return out };
    let v = mass_drift(trace);
    out.push(result(1, "mass drift per 1e4 steps", v, format!("<= {MASS_DRIFT_PER_1E4:e}"), v <= MASS_DRIFT_PER_1E4));
    match cfg.scenario.kind {
        ScenarioKind::Linear => linear_checks(&mut out, cfg, trace),
        ScenarioKind::Mixture => mixture_checks(&mut out, trace),
        ScenarioKind::Nonlinear => nonlinear_checks(&mut out, cfg, trace),
        ScenarioKind::FreeChannel => free_control_checks(&mut out, trace),
        ScenarioKind::Calibration => {}
    }
    out
}
