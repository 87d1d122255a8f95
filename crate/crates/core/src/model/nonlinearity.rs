use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Saturated focusing nonlinearity `N(k) = -λ_N k / (1 + k²)`, acting as `N(|ψ|)ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub strength: f64,
}

impl NonlinearitySpec {
    pub fn new(strength: f64) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidArgument(format!("nonlinearity strength must be non-negative, got {strength}")));
        }
        Ok(NonlinearitySpec { strength })
    }

    /// `N(k)` for `k ≥ 0`.
    pub fn value(&self, k: f64) -> f64 {
        -self.strength * k / (1.0 + k * k)
    }

    /// `N_{F,0}(k) = k⁻² ∫₀ᵏ q N(q) dq = -λ_N (k - atan k) / k²`.
    pub fn f0(&self, k: f64) -> f64 {
        -self.strength * k_minus_atan_over_k2(k)
    }

    /// `N_F(k) = ∫₀ᵏ q² N'(q) dq = k² N(k) - 2 k² N_{F,0}(k)`.
    pub fn f(&self, k: f64) -> f64 {
        k * k * (self.value(k) - 2.0 * self.f0(k))
    }
}

fn k_minus_atan_over_k2(k: f64) -> f64 {
    if k < 0.1 {
        // Σ_j (-1)^j k^{2j+1} / (2j+3), avoiding the cancellation in k - atan k
        let k2 = k * k;
        (0..8).rev().fold(0.0, |acc, j| 1.0 / (2 * j + 3) as f64 - k2 * acc) * k
    } else {
        (k - k.atan()) / (k * k)
    }
}

fn check_k(k: f64) -> Result<()> {
    if k >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("nonlinearity argument must be non-negative, got {k}")))
    }
}

pub fn nl_value(nl: &NonlinearitySpec, k: f64) -> Result<f64> {
    check_k(k).map(|_| nl.value(k))
}

pub fn nl_f(nl: &NonlinearitySpec, k: f64) -> Result<f64> {
    check_k(k).map(|_| nl.f(k))
}

pub fn nl_f0(nl: &NonlinearitySpec, k: f64) -> Result<f64> {
    check_k(k).map(|_| nl.f0(k))
}
