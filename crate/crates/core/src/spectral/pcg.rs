//! Preconditioned conjugate gradients for Hermitian positive definite operators.

use num_complex::Complex64;

use crate::dst;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

#[derive(Debug, Clone)]
pub struct Solve {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Final relative residual `‖b - A x‖ / ‖b‖`.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` to relative residual `rtol`.
pub fn pcg(
    mut apply: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    mut precond: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    x0: Option<Vec<Complex64>>,
    rtol: f64,
    max_iter: usize,
) -> Result<Solve> {
    let b_norm = norm(b);
    let zero = Complex64::new(0.0, 0.0);
    if b_norm == 0.0 {
        return Ok(Solve {
            x: vec![zero; b.len()],
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut x = x0.unwrap_or_else(|| vec![zero; b.len()]);
    let ax = apply(&x);
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut res = norm(&r) / b_norm;
    for it in 0..max_iter {
        if res <= rtol {
            return Ok(Solve {
                x,
                iterations: it,
                residual: res,
            });
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap).re;
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(Error::SolveDiverged {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        res = norm(&r) / b_norm;
        z = precond(&r);
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + p[i] * beta;
        }
    }
    if res <= rtol {
        Ok(Solve {
            x,
            iterations: max_iter,
            residual: res,
        })
    } else {
        Err(Error::SolveDiverged {
            iterations: max_iter,
            residual: res,
        })
    }
}

/// `(k² + σ)⁻¹` applied in sine space; `σ > 0`.
pub fn sine_preconditioner(grid: RadialGrid, sigma: f64) -> impl Fn(&[Complex64]) -> Vec<Complex64> {
    move |r: &[Complex64]| {
        let mut out = r.to_vec();
        dst::spectral_multiply(&mut out, |m| Complex64::new(1.0 / (grid.wavenumber(m).powi(2) + sigma), 0.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectral::Hamiltonian;
    use crate::model::PotentialSpec;

    #[test]
    fn solves_shifted_hamiltonian() {
        let g = make_grid(3, 20.0, 512).unwrap();
        let h = Hamiltonian::new(g, &PotentialSpec::gaussian(1.0, 1.0));
        let shift = 2.0;
        let b: Vec<Complex64> = g.points().map(|r| Complex64::new((-r * r).exp(), r * (-r).exp())).collect();
        let apply = |v: &[Complex64]| {
            let mut out = h.apply_values(v);
            out.iter_mut().zip(v).for_each(|(o, x)| *o += x * shift);
            out
        };
        let sol = pcg(apply, sine_preconditioner(g, shift), &b, None, 1e-12, 500).unwrap();
        let back = apply(&sol.x);
        let err = norm(&back.iter().zip(&b).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&b);
        assert!(err < 1e-11, "{err}");
        assert!(sol.iterations < 100);
    }

    #[test]
    fn reports_divergence() {
        let b = vec![Complex64::new(1.0, 0.0); 4];
        let neg = |v: &[Complex64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        assert!(matches!(pcg(neg, |v: &[Complex64]| v.to_vec(), &b, None, 1e-10, 10), Err(Error::SolveDiverged { .. })));
    }
}
