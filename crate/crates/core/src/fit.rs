//! Least-squares power-law fits for decay-rate checks.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    /// Exponent `p` in `y ≈ C x^p`.
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    pub points: usize,
}

/// Fits `ln y = p ln x + c` over the points with `x, y > 0`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(PowerFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x: Vec<f64> = (1..50).map(|k| k as f64 * 1.7).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 * x.powf(-0.75)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(loglog_fit(&[1.0], &[1.0]).is_none());
    }
}
