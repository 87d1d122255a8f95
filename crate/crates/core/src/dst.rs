//! Type-I discrete sine transform.
//!
//! `dst(v)_m = Σ_j v_j sin(π (j+1)(m+1) / (N+1))`. Applying it twice returns
//! `(N+1)/2 · v`, so `2/(N+1)` is the normalization factor for both the inverse
//! and Parseval's identity. The transform diagonalizes the Dirichlet Laplacian
//! on the staggered grid: mode `m` has wavenumber `π (m+1) / r_max`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::Result;
use crate::grid::{RadialField, RadialGrid};

/// A cached FFT plan for DST-I of a fixed length.
pub struct DstPlan {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DstPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DstPlan").field("len", &self.len).finish()
    }
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<DstPlan>>>> = OnceLock::new();

/// Shared plan for length `len`; built once per process and reused by all workers.
pub fn plan(len: usize) -> Arc<DstPlan> {
    let table = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut table = table.lock().expect("dst plan table poisoned");
    table
        .entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlannerScalar::new();
            let fft = planner.plan_fft_forward(2 * (len + 1));
            let ifft = planner.plan_fft_inverse(2 * (len + 1));
            Arc::new(DstPlan { len, fft, ifft })
        })
        .clone()
}

impl DstPlan {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `2 / (N + 1)`.
    pub fn norm_factor(&self) -> f64 {
        2.0 / (self.len + 1) as f64
    }

    /// Unnormalized DST-I in place.
    pub fn apply(&self, data: &mut [Complex64]) {
        let mut buf = self.odd_extension(data);
        self.fft.process(&mut buf);
        // X_{m+1} = -2i Σ v_j sin(...), so dst_m = (i/2) X_{m+1}
        let half_i = Complex64::new(0.0, 0.5);
        for (k, out) in data.iter_mut().enumerate() {
            *out = half_i * buf[k + 1];
        }
    }

    /// Odd periodic extension `[0, v, 0, -rev(v)]` of length `2(N+1)`.
    pub fn odd_extension(&self, data: &[Complex64]) -> Vec<Complex64> {
        let n = self.len;
        assert_eq!(data.len(), n, "dst length mismatch");
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[1..=n].copy_from_slice(data);
        for j in 0..n {
            buf[m - 1 - j] = -data[j];
        }
        buf
    }

    /// Spectral derivative of a full periodic extension with sample spacing `h`;
    /// the Nyquist mode is dropped.
    pub fn periodic_derivative(&self, buf: &mut [Complex64], h: f64) {
        let m = buf.len();
        assert_eq!(m, 2 * (self.len + 1), "extension length mismatch");
        self.fft.process(buf);
        let base = 2.0 * std::f64::consts::PI / (m as f64 * h);
        let scale = 1.0 / m as f64;
        for (k, x) in buf.iter_mut().enumerate() {
            let freq = if k < m / 2 {
                k as f64
            } else if k > m / 2 {
                k as f64 - m as f64
            } else {
                0.0
            };
            *x *= Complex64::new(0.0, freq * base * scale);
        }
        self.ifft.process(buf);
    }

    /// Zero-mean antiderivative of a full periodic extension with spacing `h`.
    /// The input must have zero mean (true for odd extensions).
    pub fn periodic_antiderivative(&self, buf: &mut [Complex64], h: f64) {
        let m = buf.len();
        assert_eq!(m, 2 * (self.len + 1), "extension length mismatch");
        self.fft.process(buf);
        let base = 2.0 * std::f64::consts::PI / (m as f64 * h);
        let scale = 1.0 / m as f64;
        for (k, x) in buf.iter_mut().enumerate() {
            if k == 0 || k == m / 2 {
                *x = Complex64::new(0.0, 0.0);
                continue;
            }
            let freq = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
            *x *= Complex64::new(0.0, -scale / (freq * base));
        }
        self.ifft.process(buf);
    }

    /// Inverse transform in place (DST-I scaled by `2/(N+1)`).
    pub fn apply_inverse(&self, data: &mut [Complex64]) {
        self.apply(data);
        let s = self.norm_factor();
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Spectral coefficients of a field.
pub fn dst(field: &RadialField) -> Vec<Complex64> {
    let mut data = field.values().to_vec();
    plan(field.len()).apply(&mut data);
    data
}

/// Applies a real diagonal multiplier in sine space: `DST⁻¹ diag(w) DST`.
pub fn spectral_multiply(values: &mut [Complex64], weights: impl Fn(usize) -> Complex64) {
    let p = plan(values.len());
    p.apply(values);
    let s = p.norm_factor();
    for (m, v) in values.iter_mut().enumerate() {
        *v *= weights(m) * s;
    }
    p.apply(values);
}

/// Band-limited interpolation onto the grid with `factor · N` points over the same `r_max`.
/// Every sine mode of the coarse grid is also a mode of the fine one, so this is exact.
pub fn refine(field: &RadialField, factor: usize) -> Result<RadialField> {
    let grid = *field.grid();
    let fine = RadialGrid::new(grid.dim(), grid.r_max(), factor * grid.len())?;
    let p = plan(grid.len());
    let mut coeffs = field.values().to_vec();
    p.apply(&mut coeffs);
    let s = p.norm_factor();
    let mut values = vec![Complex64::new(0.0, 0.0); fine.len()];
    values.iter_mut().zip(&coeffs).for_each(|(v, c)| *v = c * s);
    plan(fine.len()).apply(&mut values);
    RadialField::from_values(fine, values)
}
