//! Half-line radial grids and reduced radial fields.
//!
//! A radial function `u(|x|)` on ℝⁿ is stored in reduced form
//! `v(r) = c_n r^{(n-1)/2} u(r)`, where `c_n² = |S^{n-1}|`. With this choice
//! `Δr Σ |v_j|²` is the full L²(ℝⁿ) mass, so every pairing is a flat 1-D sum
//! whatever the dimension. The grid is staggered away from the origin:
//! `r_j = (j + 1) Δr`, `Δr = r_max / (N + 1)`, with Dirichlet values implied at
//! both `r = 0` and `r = r_max`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    dim: u32,
    r_max: f64,
    len: usize,
}

/// Builds a grid, rejecting `n < 3`, non-power-of-two `N` and `N < 16`.
pub fn make_grid(dim: u32, r_max: f64, len: usize) -> Result<RadialGrid> {
    RadialGrid::new(dim, r_max, len)
}

impl RadialGrid {
    pub fn new(dim: u32, r_max: f64, len: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionTooLow(dim));
        }
        if len < 16 || !len.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(len));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
        }
        Ok(RadialGrid { dim, r_max, len })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of interior points `N`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dr(&self) -> f64 {
        self.r_max / (self.len + 1) as f64
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dr()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let dr = self.dr();
        (0..self.len).map(move |j| (j + 1) as f64 * dr)
    }

    /// Wavenumber of the `m`-th Dirichlet sine mode, `π (m + 1) / r_max`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> f64 {
        PI * (m + 1) as f64 / self.r_max
    }

    /// Largest retained wavenumber.
    pub fn k_max(&self) -> f64 {
        self.wavenumber(self.len - 1)
    }

    /// Centrifugal coefficient `(n-1)(n-3)/4`; zero in three dimensions.
    pub fn centrifugal_coefficient(&self) -> f64 {
        let n = self.dim as f64;
        (n - 1.0) * (n - 3.0) / 4.0
    }

    /// The centrifugal potential `(n-1)(n-3)/(4 r²)` sampled on the grid.
    pub fn centrifugal_potential(&self) -> Vec<f64> {
        let c = self.centrifugal_coefficient();
        self.points().map(|r| c / (r * r)).collect()
    }

    /// Index of the first grid point with `r_j > radius` (or `len`).
    pub fn index_above(&self, radius: f64) -> usize {
        if radius < self.dr() {
            return 0;
        }
        let j = (radius / self.dr()).floor() as usize; // r_j = (j+1) dr > radius
        j.min(self.len)
    }
}

/// Surface area of the unit sphere `S^{n-1}` in ℝⁿ.
pub fn sphere_area(dim: u32) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// The multiplier `c_n r^{(n-1)/2}` that maps `u(r)` to its reduced form.
///
/// Defined for every `n ≥ 1` so the exponent-zero case can be checked directly;
/// grids themselves only exist for `n ≥ 3`.
pub fn reduction_factor(dim: u32, r: f64) -> f64 {
    sphere_area(dim).sqrt() * r.powf((dim as f64 - 1.0) / 2.0)
}

/// A complex wavefunction in reduced radial form.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn zeros(grid: RadialGrid) -> Self {
        RadialField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(RadialField { grid, values })
    }

    /// Samples the reduced amplitude `v(r)` directly.
    pub fn from_reduced_fn<F: FnMut(f64) -> Complex64>(grid: RadialGrid, mut v: F) -> Self {
        let values = grid.points().map(&mut v).collect();
        RadialField { grid, values }
    }

    /// Samples a full radial profile `u(r)` and reduces it.
    pub fn from_profile_fn<F: FnMut(f64) -> Complex64>(grid: RadialGrid, mut u: F) -> Self {
        let n = grid.dim();
        let values = grid.points().map(|r| u(r) * reduction_factor(n, r)).collect();
        RadialField { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Δr Σ |v_j|²`.
    pub fn mass(&self) -> f64 {
        self.grid.dr() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Recovers the full profile `u(r_j)`.
    pub fn profile(&self) -> Vec<Complex64> {
        let n = self.grid.dim();
        self.grid
            .points()
            .zip(&self.values)
            .map(|(r, v)| v / reduction_factor(n, r))
            .collect()
    }

    pub fn scaled(&self, factor: Complex64) -> RadialField {
        RadialField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn scale_mut(&mut self, factor: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Normalizes to unit mass; a zero field is returned unchanged.
    pub fn normalized(&self) -> RadialField {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: Complex64, other: &RadialField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(x, y)| *x += a * y);
        Ok(())
    }

    pub fn sub(&self, other: &RadialField) -> Result<RadialField> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn add(&self, other: &RadialField) -> Result<RadialField> {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    /// Pointwise multiplication by a real function of `r`.
    pub fn multiply_by<F: FnMut(f64) -> f64>(&self, mut weight: F) -> RadialField {
        let values = self
            .grid
            .points()
            .zip(&self.values)
            .map(|(r, v)| v * weight(r))
            .collect();
        RadialField {
            grid: self.grid,
            values,
        }
    }

    /// Mass carried by points with `r_j > radius`.
    pub fn mass_beyond(&self, radius: f64) -> f64 {
        let start = self.grid.index_above(radius);
        self.grid.dr() * self.values[start..].iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

impl Index<usize> for RadialField {
    type Output = Complex64;
    fn index(&self, j: usize) -> &Complex64 {
        &self.values[j]
    }
}

impl IndexMut<usize> for RadialField {
    fn index_mut(&mut self, j: usize) -> &mut Complex64 {
        &mut self.values[j]
    }
}

/// Reduces a profile `u` sampled at the grid points.
pub fn reduce(grid: RadialGrid, u: &[Complex64]) -> Result<RadialField> {
    if u.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "profile has {} samples, grid has {}",
            u.len(),
            grid.len()
        )));
    }
    let n = grid.dim();
    let values = grid
        .points()
        .zip(u)
        .map(|(r, u)| u * reduction_factor(n, r))
        .collect();
    Ok(RadialField { grid, values })
}

/// `Δr Σ conj(f_j) g_j`, conjugate-linear in the first slot.
pub fn inner(f: &RadialField, g: &RadialField) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).sum();
    Ok(s * f.grid.dr())
}
