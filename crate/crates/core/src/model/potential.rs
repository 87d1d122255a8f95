use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sphere_area, RadialGrid};
use crate::model::profile::ScalingProfile;
use crate::quad::{gauss_legendre, integrate};

/// A radial, real potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// `-V₀ exp(-r² / (2w²))`.
    GaussianWell { depth: f64, width: f64 },
    /// `-V₀` for `r < a`, zero outside. Only used to check the eigensolver; not smooth.
    SquareWell { depth: f64, radius: f64 },
    /// Natural cubic spline through `(r, v)` samples, zero beyond the last node.
    Tabulated(Table),
}

/// Tabulated samples with their spline second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawTable")]
pub struct Table {
    r: Vec<f64>,
    v: Vec<f64>,
    #[serde(skip_serializing)]
    m: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTable {
    r: Vec<f64>,
    v: Vec<f64>,
}

impl From<RawTable> for Table {
    fn from(raw: RawTable) -> Self {
        Table::new(raw.r, raw.v)
    }
}

impl Table {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Self {
        let ok = r.len() == v.len() && r.len() >= 2 && r.windows(2).all(|w| w[1] > w[0]);
        let m = if ok { natural_second_derivatives(&r, &v) } else { Vec::new() };
        Table { r, v, m }
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    /// Spline value and slope; zero beyond the last node, constant below the first.
    fn eval(&self, r: f64) -> (f64, f64) {
        let (x, y, m) = (&self.r, &self.v, &self.m);
        let n = x.len();
        if m.is_empty() || r >= x[n - 1] {
            return (0.0, 0.0);
        }
        if r <= x[0] {
            return (y[0], 0.0);
        }
        let i = match x.binary_search_by(|a| a.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = x[i + 1] - x[i];
        let a = (x[i + 1] - r) / h;
        let b = (r - x[i]) / h;
        let value = a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
        let slope = (y[i + 1] - y[i]) / h + ((1.0 - 3.0 * a * a) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
        (value, slope)
    }
}

impl PotentialSpec {
    pub fn gaussian(depth: f64, width: f64) -> Self {
        PotentialSpec::GaussianWell { depth, width }
    }

    /// Checks parameters; tabulated data must be strictly increasing in `r`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            PotentialSpec::GaussianWell { depth, width } | PotentialSpec::SquareWell { depth, radius: width } => {
                if !(depth.is_finite() && *depth >= 0.0) {
                    return bad(format!("potential depth must be finite and non-negative, got {depth}"));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return bad(format!("potential width must be positive, got {width}"));
                }
            }
            PotentialSpec::Tabulated(Table { r, v, .. }) => {
                if r.len() != v.len() || r.len() < 2 {
                    return bad("tabulated potential needs at least two (r, V) pairs".into());
                }
                if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated radii must be non-negative and strictly increasing".into());
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return bad("tabulated potential values must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::GaussianWell { depth, width } => -depth * (-r * r / (2.0 * width * width)).exp(),
            PotentialSpec::SquareWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialSpec::Tabulated(t) => t.eval(r).0,
        }
    }

    /// `dV/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::GaussianWell { width, .. } => -r / (width * width) * self.value(r),
            PotentialSpec::SquareWell { .. } => 0.0,
            PotentialSpec::Tabulated(t) => t.eval(r).1,
        }
    }

    /// Radius beyond which `|V|` is negligible, used to size quadratures.
    pub fn support_radius(&self) -> f64 {
        match self {
            PotentialSpec::GaussianWell { width, .. } => 12.0 * width,
            PotentialSpec::SquareWell { radius, .. } => *radius,
            PotentialSpec::Tabulated(t) => *t.r.last().unwrap_or(&0.0),
        }
    }

    /// Reads two-column text `r V(r)`; `#` starts a comment.
    pub fn load_tabulated(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            if cols.len() != 2 {
                return Err(Error::Config(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
            }
            r.push(cols[0]);
            v.push(cols[1]);
        }
        let spec = PotentialSpec::Tabulated(Table::new(r, v));
        spec.validate()?;
        Ok(spec)
    }

    /// Two-column text `r V(r)` on the grid points.
    pub fn export_text(&self, grid: &RadialGrid) -> String {
        let mut out = String::from("# r V(r)\n");
        for r in grid.points() {
            writeln!(out, "{r:.17e} {:.17e}", self.value(r)).unwrap();
        }
        out
    }

    /// `‖V‖_{L²(ℝⁿ)}` and `sup ⟨r⟩|V|`, the two size conditions on the potential.
    pub fn norms(&self, dim: u32) -> PotentialNorms {
        let rule = gauss_legendre(32);
        let outer = self.support_radius() * 1.5 + 1.0;
        let pieces = 400;
        let h = outer / pieces as f64;
        let mut l2 = 0.0;
        let mut sup = 0.0f64;
        for k in 0..pieces {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            l2 += integrate(|r| self.value(r).powi(2) * r.powi(dim as i32 - 1), a, b, &rule);
            for &x in &rule.0 {
                let r = 0.5 * (a + b) + 0.5 * (b - a) * x;
                sup = sup.max(r.hypot(1.0) * self.value(r).abs());
            }
        }
        PotentialNorms {
            l2: (l2 * sphere_area(dim)).sqrt(),
            weighted_sup: sup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialNorms {
    pub l2: f64,
    pub weighted_sup: f64,
}

/// `g⁻² V(r/g)` at time `t`.
pub fn scaled_potential(v: &PotentialSpec, p: &ScalingProfile, t: f64, r: f64) -> f64 {
    let g = p.g(t);
    v.value(r / g) / (g * g)
}

/// `∂_t [g⁻² V(r/g)] = -(g'/g³) [2V(y) + y V'(y)]`, `y = r/g`.
pub fn scaled_potential_dt(v: &PotentialSpec, p: &ScalingProfile, t: f64, r: f64) -> f64 {
    let gv = p.g_eval(t);
    let y = r / gv.g;
    -(gv.dg / gv.g.powi(3)) * (2.0 * v.value(y) + y * v.derivative(y))
}

fn natural_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for i in 0..k {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        let diag = 2.0 * (h0 + h1);
        let rhs = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
        let (lower, upper) = (h0, h1);
        if i == 0 {
            c[0] = upper / diag;
            d[0] = rhs / diag;
        } else {
            let denom = diag - lower * c[i - 1];
            c[i] = upper / denom;
            d[i] = (rhs - lower * d[i - 1]) / denom;
        }
    }
    let mut next = 0.0;
    for i in (0..k).rev() {
        let v = d[i] - c[i] * next;
        m[i + 1] = v;
        next = v;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_derivative_matches_fd() {
        let v = PotentialSpec::gaussian(3.0, 0.7);
        assert_eq!(v.derivative(0.0), 0.0);
        for r in [0.4, 1.3, 3.0] {
            let h = 1e-6;
            let fd = (v.value(r + h) - v.value(r - h)) / (2.0 * h);
            assert!((v.derivative(r) - fd).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn scaled_potential_at_origin() {
        let v = PotentialSpec::gaussian(2.0, 1.0);
        let p = ScalingProfile::new(0.3).unwrap();
        let g = p.g(5.0);
        assert!((scaled_potential(&v, &p, 5.0, 0.0) + 2.0 / (g * g)).abs() < 1e-15);
    }

    #[test]
    fn scaled_l2_norm_scaling() {
        // ‖g⁻²V(·/g)‖ = g^{n/2-2}‖V‖, n = 3, g = 2
        let v = PotentialSpec::gaussian(1.5, 0.8);
        let base = v.norms(3).l2;
        let s = PotentialSpec::gaussian(1.5 / 4.0, 1.6);
        assert!((s.norms(3).l2 - 2f64.powf(-0.5) * base).abs() < 1e-10 * base);
        // analytic: ‖V‖² = V₀² 4π ∫ r² e^{-r²/w²} = V₀² π^{3/2} w³
        let exact = (1.5f64.powi(2) * PI.powf(1.5) * 0.8f64.powi(3)).sqrt();
        assert!((base - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn scaled_potential_decays_like_g_squared() {
        let v = PotentialSpec::gaussian(2.0, 1.0);
        let p = ScalingProfile::new(0.3).unwrap();
        for t in [10.0, 1e3, 1e5] {
            let sup = (0..2000).map(|i| scaled_potential(&v, &p, t, i as f64 * 0.05).abs()).fold(0.0, f64::max);
            let g = p.g(t);
            assert!((sup * g * g - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn time_derivative_matches_fd() {
        let v = PotentialSpec::gaussian(2.0, 1.0);
        let p = ScalingProfile::new(0.45).unwrap();
        for (t, r) in [(0.5, 0.3), (3.0, 1.2), (40.0, 5.0)] {
            let h = 1e-5;
            let fd = (scaled_potential(&v, &p, t + h, r) - scaled_potential(&v, &p, t - h, r)) / (2.0 * h);
            assert!((scaled_potential_dt(&v, &p, t, r) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn tabulated_reproduces_smooth_function() {
        let r: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
        let v: Vec<f64> = r.iter().map(|x| -(-x * x).exp()).collect();
        let spec = PotentialSpec::Tabulated(Table::new(r, v));
        spec.validate().unwrap();
        for x in [0.1, 0.77, 2.2] {
            assert!((spec.value(x) + (-x * x).exp()).abs() < 1e-6);
            assert!((spec.derivative(x) - 2.0 * x * (-x * x).exp()).abs() < 1e-4);
        }
        assert_eq!(spec.value(11.0), 0.0);
    }

    #[test]
    fn export_roundtrip() {
        let grid = crate::grid::make_grid(3, 10.0, 64).unwrap();
        let v = PotentialSpec::gaussian(1.0, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        std::fs::write(&path, v.export_text(&grid)).unwrap();
        let back = PotentialSpec::load_tabulated(&path).unwrap();
        for r in grid.points().take(60) {
            assert!((back.value(r) - v.value(r)).abs() < 1e-3);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(PotentialSpec::gaussian(-1.0, 1.0).validate().is_err());
        assert!(PotentialSpec::gaussian(1.0, 0.0).validate().is_err());
        let t = PotentialSpec::Tabulated(Table::new(vec![0.0, 1.0, 0.5], vec![0.0; 3]));
        assert!(t.validate().is_err());
    }
}
