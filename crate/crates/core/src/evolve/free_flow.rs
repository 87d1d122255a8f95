//! `e^{-iτH₀}` on reduced fields.
//!
//! In three dimensions the centrifugal term vanishes and the flow is one phase
//! multiplication in sine space. In odd `n ≥ 5` the flow is carried down to
//! three dimensions by the intertwining `(1/r)∂_r Δ_m = Δ_{m+2} (1/r)∂_r` on
//! radial functions, which is exact and costs a few transforms whatever `τ` is.
//! Even `n` falls back to Strang sub-steps with the centrifugal term as a phase.

use num_complex::Complex64;

use crate::dst;
use crate::grid::{sphere_area, RadialField, RadialGrid};

/// Splitting error tolerance for even dimensions, relative to `‖f‖`.
const SUBSTEP_TOLERANCE: f64 = 1e-6;
const MAX_SUBSTEPS: usize = 1 << 16;

/// `e^{-iτH₀} f` for any real `τ`.
pub fn free_flow(f: &RadialField, tau: f64) -> RadialField {
    if tau == 0.0 {
        return f.clone();
    }
    let grid = *f.grid();
    match grid.dim() {
        3 => three_dim_flow(f, tau),
        n if n % 2 == 1 => ladder_flow(f, tau),
        _ => split_flow(f, tau),
    }
}

fn three_dim_flow(f: &RadialField, tau: f64) -> RadialField {
    let grid = *f.grid();
    let mut values = f.values().to_vec();
    dst::spectral_multiply(&mut values, |m| Complex64::from_polar(1.0, -tau * grid.wavenumber(m).powi(2)));
    RadialField::from_values(grid, values).expect("length preserved")
}

fn c_n(dim: u32) -> f64 {
    sphere_area(dim).sqrt()
}

/// Odd companion `ω = v / r^{(n-3)/2} = c_n r u`.
fn companion(grid: &RadialGrid, values: &[Complex64], dim: u32) -> Vec<Complex64> {
    let p = (dim as f64 - 3.0) / 2.0;
    grid.points().zip(values).map(|(r, v)| v / r.powf(p)).collect()
}

fn from_companion(grid: &RadialGrid, omega: &[Complex64], dim: u32) -> Vec<Complex64> {
    let p = (dim as f64 - 3.0) / 2.0;
    grid.points().zip(omega).map(|(r, w)| w * r.powf(p)).collect()
}

/// `U_m(r) = -∫_r^R ρ u_{m+2}(ρ) dρ`, returned as the companion `ω_m = c_m r U_m`.
fn lower(grid: &RadialGrid, omega: &[Complex64], dim: u32) -> Vec<Complex64> {
    let plan = dst::plan(grid.len());
    let mut buf = plan.odd_extension(omega);
    plan.periodic_antiderivative(&mut buf, grid.dr());
    let end = buf[grid.len() + 1];
    let factor = c_n(dim - 2) / c_n(dim);
    grid.points().enumerate().map(|(j, r)| (buf[j + 1] - end) * r * factor).collect()
}

/// `u_{m+2} = (1/r) ∂_r U_m`, from and to companions.
fn raise(grid: &RadialGrid, omega: &[Complex64], dim: u32) -> Vec<Complex64> {
    let plan = dst::plan(grid.len());
    let mut buf = plan.odd_extension(omega);
    plan.periodic_derivative(&mut buf, grid.dr());
    let factor = c_n(dim + 2) / c_n(dim);
    grid.points()
        .enumerate()
        .map(|(j, r)| (buf[j + 1] - omega[j] / r) / r * factor)
        .collect()
}

fn ladder_flow(f: &RadialField, tau: f64) -> RadialField {
    let grid = *f.grid();
    let n = grid.dim();
    let mut omega = companion(&grid, f.values(), n);
    let mut m = n;
    while m > 3 {
        omega = lower(&grid, &omega, m);
        m -= 2;
    }
    // in three dimensions the companion is the reduced field
    dst::spectral_multiply(&mut omega, |k| Complex64::from_polar(1.0, -tau * grid.wavenumber(k).powi(2)));
    while m < n {
        omega = raise(&grid, &omega, m);
        m += 2;
    }
    RadialField::from_values(grid, from_companion(&grid, &omega, n)).expect("length preserved")
}

fn strang(f: &[Complex64], grid: &RadialGrid, tau: f64, substeps: usize) -> Vec<Complex64> {
    let h = tau / substeps as f64;
    let half: Vec<Complex64> = grid
        .centrifugal_potential()
        .iter()
        .map(|u| Complex64::from_polar(1.0, -0.5 * h * u))
        .collect();
    let full: Vec<Complex64> = half.iter().map(|z| z * z).collect();
    let mut v = f.to_vec();
    v.iter_mut().zip(&half).for_each(|(x, p)| *x *= p);
    for k in 0..substeps {
        dst::spectral_multiply(&mut v, |m| Complex64::from_polar(1.0, -h * grid.wavenumber(m).powi(2)));
        let phase = if k + 1 < substeps { &full } else { &half };
        v.iter_mut().zip(phase).for_each(|(x, p)| *x *= p);
    }
    v
}

/// Strang sub-stepping with step doubling until two successive counts agree.
fn split_flow(f: &RadialField, tau: f64) -> RadialField {
    let grid = *f.grid();
    let cap = 0.1 * grid.dr().powi(2) * ((grid.len() + 1) as f64).powi(2) / std::f64::consts::PI;
    let mut substeps = ((tau.abs() / cap).ceil() as usize).max(1);
    let norm = f.norm().max(f64::MIN_POSITIVE);
    let mut coarse = strang(f.values(), &grid, tau, substeps);
    loop {
        let fine = strang(f.values(), &grid, tau, 2 * substeps);
        let diff: f64 = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        let err = (diff * grid.dr()).sqrt() / norm;
        substeps *= 2;
        coarse = fine;
        // the fine result carries a quarter of the measured difference
        if err / 3.0 <= SUBSTEP_TOLERANCE || substeps >= MAX_SUBSTEPS {
            if substeps >= MAX_SUBSTEPS && err / 3.0 > SUBSTEP_TOLERANCE {
                log::warn!("free flow over {tau} stopped at {substeps} sub-steps with error {err:.2e}");
            }
            break;
        }
    }
    RadialField::from_values(grid, coarse).expect("length preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::random::{random_smooth_field, rng};

    #[test]
    fn unitary_and_invertible() {
        for dim in [3, 5, 7] {
            let g = make_grid(dim, 80.0, 1024).unwrap();
            let f = random_smooth_field(g, 5.0, &mut rng(dim as u64));
            let ff = free_flow(&f, 1.0);
            assert!((ff.norm() - f.norm()).abs() < 1e-11, "dim {dim}");
            let back = free_flow(&ff, -1.0);
            assert!(back.sub(&f).unwrap().norm() < 1e-9, "dim {dim}");
        }
    }

    #[test]
    fn spreading_gaussian_3d() {
        // u(r, t) = z^{-3/2} exp(-r²/(2z)), z = 1 + 2it, for u(r, 0) = exp(-r²/2)
        let g = make_grid(3, 60.0, 4096).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
        let t = 2.0;
        let u = free_flow(&f, t).profile();
        let z = Complex64::new(1.0, 2.0 * t);
        for (j, r) in g.points().enumerate().step_by(7).take(400) {
            let exact = z.powf(-1.5) * (-(r * r) / (2.0 * z)).exp();
            assert!((u[j] - exact).norm() < 1e-7, "r = {r}: {} vs {exact}", u[j]);
        }
    }

    #[test]
    fn five_dim_gaussian() {
        // the n-dimensional Gaussian spreads as z^{-n/2} exp(-r²/(2z)), z = 1 + 2it
        let g = make_grid(5, 60.0, 4096).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
        let t = 1.0;
        let u = free_flow(&f, t).profile();
        let z = Complex64::new(1.0, 2.0 * t);
        for (j, r) in g.points().enumerate().step_by(11).take(200) {
            let exact = z.powf(-2.5) * (-(r * r) / (2.0 * z)).exp();
            assert!((u[j] - exact).norm() < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn even_dimension_uses_substeps() {
        let g = make_grid(4, 60.0, 1024).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
        // v ∝ r^{3/2} is not smooth under odd extension, so only L² accuracy is asked for
        let flowed = free_flow(&f, 1.0);
        let z = Complex64::new(1.0, 2.0);
        let exact = RadialField::from_profile_fn(g, |r| z.powf(-2.0) * (-(r * r) / (2.0 * z)).exp());
        assert!(flowed.sub(&exact).unwrap().norm() < 1e-3 * f.norm());
        assert!((flowed.norm() - f.norm()).abs() < 1e-11);
    }

    #[test]
    fn sup_norm_decays_like_t_to_minus_three_halves() {
        let g = make_grid(3, 2000.0, 8192).unwrap();
        let f = RadialField::from_profile_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0));
        let sup = |t: f64| {
            free_flow(&f, t)
                .profile()
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max)
        };
        let (t1, t2) = (1.0, 100.0);
        let slope = (sup(t2) / sup(t1)).ln() / (t2 / t1).ln();
        assert!((slope + 1.5).abs() < 0.15 * 1.5, "slope {slope}");
    }
}
