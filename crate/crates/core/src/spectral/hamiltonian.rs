use num_complex::Complex64;

use crate::dst;
use crate::grid::{RadialField, RadialGrid};
use crate::model::PotentialSpec;

/// `-∂²_r` on reduced values, applied in sine space.
pub fn kinetic_values(grid: &RadialGrid, values: &[Complex64]) -> Vec<Complex64> {
    let mut out = values.to_vec();
    dst::spectral_multiply(&mut out, |m| Complex64::new(grid.wavenumber(m).powi(2), 0.0));
    out
}

/// `(f, -∂²_r f)` by Parseval.
pub fn kinetic_form(f: &RadialField) -> f64 {
    let grid = f.grid();
    let c = dst::dst(f);
    let s: f64 = c.iter().enumerate().map(|(m, x)| grid.wavenumber(m).powi(2) * x.norm_sqr()).sum();
    s * grid.dr() * 2.0 / (grid.len() + 1) as f64
}

/// `(f, H₀ f)`: kinetic plus centrifugal energy, the quadratic form of `-Δ` on ℝⁿ.
pub fn free_energy_form(f: &RadialField) -> f64 {
    let grid = f.grid();
    let c = grid.centrifugal_coefficient();
    let centrifugal: f64 = grid
        .points()
        .zip(f.values())
        .map(|(r, v)| c / (r * r) * v.norm_sqr())
        .sum::<f64>()
        * grid.dr();
    kinetic_form(f) + centrifugal
}

/// `H = -∂²_r + U(r)` on the reduced field, where `U` already contains the
/// centrifugal term.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    grid: RadialGrid,
    potential: Vec<f64>,
}

impl Hamiltonian {
    /// `H₀`, i.e. only the centrifugal term.
    pub fn free(grid: RadialGrid) -> Self {
        Hamiltonian {
            potential: grid.centrifugal_potential(),
            grid,
        }
    }

    pub fn new(grid: RadialGrid, v: &PotentialSpec) -> Self {
        Self::from_samples(grid, grid.points().map(|r| v.value(r)).collect())
    }

    /// `H₀ + diag(samples)`.
    pub fn from_samples(grid: RadialGrid, samples: Vec<f64>) -> Self {
        assert_eq!(samples.len(), grid.len(), "potential samples must match the grid");
        let c = grid.centrifugal_coefficient();
        let potential = grid.points().zip(samples).map(|(r, v)| v + c / (r * r)).collect();
        Hamiltonian { grid, potential }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Total multiplicative potential, centrifugal term included.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = kinetic_values(&self.grid, values);
        for ((o, v), u) in out.iter_mut().zip(values).zip(&self.potential) {
            *o += v * u;
        }
        out
    }

    pub fn apply(&self, f: &RadialField) -> RadialField {
        RadialField::from_values(self.grid, self.apply_values(f.values())).expect("length preserved")
    }

    /// `(f, H f)`.
    pub fn expectation(&self, f: &RadialField) -> f64 {
        let pot: f64 = f.values().iter().zip(&self.potential).map(|(v, u)| u * v.norm_sqr()).sum();
        kinetic_form(f) + pot * self.grid.dr()
    }

    /// `‖H f - λ f‖`.
    pub fn residual(&self, f: &RadialField, lambda: f64) -> f64 {
        let hf = self.apply_values(f.values());
        let s: f64 = hf.iter().zip(f.values()).map(|(h, v)| (h - v * lambda).norm_sqr()).sum();
        (s * self.grid.dr()).sqrt()
    }
}
