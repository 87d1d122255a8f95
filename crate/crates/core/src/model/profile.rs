use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate};

/// `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn bracket(t: f64) -> f64 {
    t.hypot(1.0)
}

/// Closed forms the profile can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileForm {
    /// `g(t) = ⟨t⟩^ε`.
    #[default]
    Bracket,
}

/// `g` and its first two derivatives at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValues {
    pub g: f64,
    pub dg: f64,
    pub ddg: f64,
}

/// The self-similar scaling profile `g(t)` with its time reparametrization
/// `s = T(t) = ∫₀ᵗ g(u)⁻² du`.
#[derive(Debug, Clone)]
pub struct ScalingProfile {
    epsilon: f64,
    form: ProfileForm,
    table: Arc<TimeTable>,
}

impl PartialEq for ScalingProfile {
    fn eq(&self, other: &Self) -> bool {
        self.epsilon == other.epsilon && self.form == other.form
    }
}

/// Cumulative `T` on a geometric node ladder; segments are short enough that a
/// 20-point Gauss rule is exact to rounding for the smooth integrand.
#[derive(Debug)]
struct TimeTable {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    rule: (Vec<f64>, Vec<f64>),
}

const TABLE_RATIO: f64 = 1.2;
const TABLE_END: f64 = 1e14;

impl ScalingProfile {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_form(epsilon, ProfileForm::Bracket)
    }

    pub fn with_form(epsilon: f64, form: ProfileForm) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let rule = gauss_legendre(20);
        let mut nodes = vec![0.0, 0.25];
        while *nodes.last().unwrap() < TABLE_END {
            let next = nodes.last().unwrap() * TABLE_RATIO;
            nodes.push(next);
        }
        let mut cumulative = vec![0.0; nodes.len()];
        let inv_sq = |u: f64| (1.0 + u * u).powf(-epsilon);
        for k in 1..nodes.len() {
            cumulative[k] = cumulative[k - 1] + integrate(inv_sq, nodes[k - 1], nodes[k], &rule);
        }
        Ok(ScalingProfile {
            epsilon,
            form,
            table: Arc::new(TimeTable {
                nodes,
                cumulative,
                rule,
            }),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn form(&self) -> ProfileForm {
        self.form
    }

    pub fn g(&self, t: f64) -> f64 {
        match self.form {
            ProfileForm::Bracket => (1.0 + t * t).powf(self.epsilon / 2.0),
        }
    }

    /// `(g, g', g'')` at `t`.
    pub fn g_eval(&self, t: f64) -> GValues {
        let e = self.epsilon;
        match self.form {
            ProfileForm::Bracket => {
                let q = 1.0 + t * t;
                let g = q.powf(e / 2.0);
                let dg = e * t * q.powf(e / 2.0 - 1.0);
                let ddg = e * q.powf(e / 2.0 - 2.0) * (1.0 + (e - 1.0) * t * t);
                GValues { g, dg, ddg }
            }
        }
    }

    /// `T(t) = ∫₀ᵗ g(u)⁻² du`, odd in `t`.
    pub fn time_map(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.time_map(-t);
        }
        let tab = &self.table;
        let e = self.epsilon;
        let inv_sq = |u: f64| (1.0 + u * u).powf(-e);
        let k = match tab.nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => return tab.cumulative[k],
            Err(k) => k - 1,
        };
        if k + 1 < tab.nodes.len() {
            return tab.cumulative[k] + integrate(inv_sq, tab.nodes[k], t, &tab.rule);
        }
        // beyond the table: continue the geometric ladder
        let mut acc = *tab.cumulative.last().unwrap();
        let mut a = *tab.nodes.last().unwrap();
        while a < t {
            let b = (a * TABLE_RATIO).min(t);
            acc += integrate(inv_sq, a, b, &tab.rule);
            a = b;
        }
        acc
    }

    /// Inverse of [`time_map`](Self::time_map) by safeguarded Newton iteration.
    pub fn time_map_inv(&self, s: f64) -> f64 {
        if s < 0.0 {
            return -self.time_map_inv(-s);
        }
        if s == 0.0 {
            return 0.0;
        }
        let tab = &self.table;
        let (mut lo, mut hi) = match tab.cumulative.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(k) => return tab.nodes[k],
            Err(k) if k < tab.nodes.len() => (tab.nodes[k - 1], tab.nodes[k]),
            Err(_) => {
                let mut hi = *tab.nodes.last().unwrap();
                while self.time_map(hi) < s {
                    hi *= 2.0;
                }
                (hi / 2.0, hi)
            }
        };
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let residual = self.time_map(t) - s;
            if residual > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = self.g(t).powi(-2);
            let mut next = t - residual / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t.max(1.0) {
                return next;
            }
            t = next;
        }
        t
    }

    /// `f(s) = -(g' g)` at `t = T⁻¹(s)`.
    pub fn f_eval(&self, s: f64) -> f64 {
        self.f_at_time(self.time_map_inv(s))
    }

    /// `-(g' g)(t)`, the coefficient of the dilation generator in the `s` frame.
    pub fn f_at_time(&self, t: f64) -> f64 {
        let v = self.g_eval(t);
        -v.dg * v.g
    }

    /// `f'(s) = -(g'² + g'' g) g²` at `t = T⁻¹(s)`.
    pub fn df_eval(&self, s: f64) -> f64 {
        let v = self.g_eval(self.time_map_inv(s));
        -(v.dg * v.dg + v.ddg * v.g) * v.g * v.g
    }

    /// `(g - 2 t g') / g` at `t`; tends to `c_g`.
    pub fn cg_ratio(&self, t: f64) -> f64 {
        let v = self.g_eval(t);
        (v.g - 2.0 * t * v.dg) / v.g
    }
}

/// Numerical check of the growth conditions on `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GConditionsReport {
    pub epsilon: f64,
    /// `(g - 2tg')/g` at `t = 1e8`.
    pub c_g: f64,
    /// `t g'/g` at `t = 1e8`.
    pub tdg_over_g: f64,
    /// `t² g''/g` at `t = 1e8`.
    pub t2ddg_over_g: f64,
    /// Minimum of `g` over a dense scan of `[0, 1e8]`.
    pub inf_g: f64,
    pub pass: bool,
    pub violations: Vec<String>,
}

const CG_PROBE_TIME: f64 = 1e8;
const CG_TOLERANCE: f64 = 1e-4;

impl GConditionsReport {
    pub fn evaluate(p: &ScalingProfile) -> Self {
        let t = CG_PROBE_TIME;
        let v = p.g_eval(t);
        let c_g = p.cg_ratio(t);
        let tdg_over_g = t * v.dg / v.g;
        let t2ddg_over_g = t * t * v.ddg / v.g;
        let inf_g = scan_times().map(|t| p.g(t)).fold(f64::INFINITY, f64::min);
        let mut violations = Vec::new();
        let e = p.epsilon();
        if !(e > 0.0 && e < 0.5) {
            violations.push(format!("epsilon = {e} is outside (0, 1/2)"));
        }
        if !(CG_TOLERANCE..=1.0 - CG_TOLERANCE).contains(&c_g) {
            violations.push(format!("c_g = {c_g:.6} is not inside (0, 1)"));
        }
        if tdg_over_g.abs() < CG_TOLERANCE || t2ddg_over_g.abs() < CG_TOLERANCE {
            violations.push("g ~ t g' ~ t² g'' fails at large t".to_string());
        }
        if inf_g < 1.0 - 1e-12 {
            violations.push(format!("inf g = {inf_g} < 1"));
        }
        GConditionsReport {
            epsilon: e,
            c_g,
            tdg_over_g,
            t2ddg_over_g,
            inf_g,
            pass: violations.is_empty(),
            violations,
        }
    }
}

fn scan_times() -> impl Iterator<Item = f64> {
    (0..=400).map(|i| if i == 0 { 0.0 } else { 10f64.powf(-3.0 + 11.0 * i as f64 / 400.0) })
}

/// Checks the profile; `FailsConditions` names every violated clause.
pub fn check_g_conditions(p: &ScalingProfile) -> Result<GConditionsReport> {
    let report = GConditionsReport::evaluate(p);
    if report.pass {
        Ok(report)
    } else {
        Err(Error::FailsConditions(report.violations.join("; ")))
    }
}
