use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::evolve::{PropagatorState, System};
use crate::grid::{inner, RadialField, RadialGrid};
use crate::model::PotentialSpec;
use crate::random::{gaussian_bump, rng};
use crate::spectral::{project_continuous, BoundState};

/// A named test field.
#[derive(Debug, Clone, PartialEq)]
pub struct TestField {
    pub name: String,
    pub field: RadialField,
}

/// Eight seeded Gaussian shells, `ψ_b` itself, and one member of `Ran P_c`.
/// Shells sit within `extent` of the origin (the region `φ(s)` occupies).
pub fn probe_dictionary(b: &BoundState, extent: f64, seed: u64) -> Vec<TestField> {
    let grid = *b.grid();
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(10);
    for k in 0..8 {
        let center = r.random_range(0.0..extent);
        let width = r.random_range(0.15..0.6) * extent;
        out.push(TestField {
            name: format!("shell{k}"),
            field: gaussian_bump(grid, center, width).normalized(),
        });
    }
    out.push(TestField {
        name: "bound".into(),
        field: b.state.clone(),
    });
    let member = project_continuous(b, &gaussian_bump(grid, 0.5 * extent, 0.3 * extent)).expect("same grid");
    out.push(TestField {
        name: "continuum".into(),
        field: member.normalized(),
    });
    out
}

/// Overlaps `(χ, e^{isH} φ(s)) = (e^{-isH} χ, φ(s))` with each test field `χ`
/// carried forward under the autonomous `H = H₀ + V`.
#[derive(Debug, Clone)]
pub struct WeakLimitProbe {
    names: Vec<String>,
    targets: Vec<Complex64>,
    states: Vec<PropagatorState>,
    initial: Vec<RadialField>,
}

/// Recorded overlaps: `overlaps[k][j]` for sample `k` and test field `j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProbeReport {
    pub names: Vec<String>,
    pub s: Vec<f64>,
    pub overlaps: Vec<Vec<(f64, f64)>>,
    /// `(χ, ψ_b)`; the weak limit predicts overlaps `Ã(∞)·(χ, ψ_b)`.
    pub bound_components: Vec<(f64, f64)>,
}

impl WeakLimitProbe {
    pub fn new(grid: RadialGrid, v: &PotentialSpec, b: &BoundState, dictionary: Vec<TestField>, s0: f64, ds: f64) -> Result<Self> {
        let system = Arc::new(System::autonomous(grid, Some(v.clone()))?);
        let mut names = Vec::new();
        let mut targets = Vec::new();
        let mut states = Vec::new();
        let mut initial = Vec::new();
        for tf in dictionary {
            targets.push(inner(&tf.field, &b.state)?);
            initial.push(tf.field.clone());
            states.push(PropagatorState::new(system.clone(), tf.field, s0, ds)?);
            names.push(tf.name);
        }
        Ok(WeakLimitProbe {
            names,
            targets,
            states,
            initial,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn initial_fields(&self) -> &[RadialField] {
        &self.initial
    }

    /// Overlaps at `s` (must not decrease between calls).
    pub fn overlaps(&mut self, s: f64, phi: &RadialField) -> Result<Vec<Complex64>> {
        self.states
            .iter_mut()
            .map(|st| {
                st.advance_to(s);
                inner(st.field(), phi)
            })
            .collect()
    }

    pub fn report(&self) -> ProbeReport {
        ProbeReport {
            names: self.names.clone(),
            bound_components: self.targets.iter().map(|z| (z.re, z.im)).collect(),
            ..ProbeReport::default()
        }
    }
}

impl ProbeReport {
    pub fn push(&mut self, s: f64, overlaps: &[Complex64]) {
        self.s.push(s);
        self.overlaps.push(overlaps.iter().map(|z| (z.re, z.im)).collect());
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `|overlap - A·(χ, ψ_b)|` per test field at sample `k`.
    pub fn distances(&self, k: usize, a_inf: Complex64) -> Vec<f64> {
        self.overlaps[k]
            .iter()
            .zip(&self.bound_components)
            .map(|(o, b)| (Complex64::new(o.0, o.1) - a_inf * Complex64::new(b.0, b.1)).norm())
            .collect()
    }

    /// Largest `|overlap|` of the named field over samples with `s ≥ s_from`.
    pub fn max_abs_from(&self, name: &str, s_from: f64) -> Option<f64> {
        let j = self.column(name)?;
        self.s
            .iter()
            .zip(&self.overlaps)
            .filter(|(s, _)| **s >= s_from)
            .map(|(_, row)| Complex64::new(row[j].0, row[j].1).norm())
            .reduce(f64::max)
    }

    pub fn last(&self, name: &str) -> Option<Complex64> {
        let j = self.column(name)?;
        self.overlaps.last().map(|row| Complex64::new(row[j].0, row[j].1))
    }
}
