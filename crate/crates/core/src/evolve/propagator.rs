use std::sync::Arc;

use num_complex::Complex64;

use crate::dst;
use crate::error::{Error, Result};
use crate::evolve::system::{System, SystemKind};
use crate::grid::RadialField;

/// A state advancing under one [`System`] by Strang splitting.
///
/// Each step is `e^{-iΔt/2 U} e^{-iΔt k²} e^{-iΔt/2 U}` with
/// `U = V_t + W + centrifugal + N(|ψ|)`, `V_t` taken at the step midpoint.
/// Diagonal phases leave `|ψ|` unchanged, so the trailing half of one step and
/// the leading half of the next are applied as one factor.
#[derive(Debug, Clone)]
pub struct PropagatorState {
    system: Arc<System>,
    field: RadialField,
    t: f64,
    dt: f64,
    kinetic: Option<(f64, Vec<f64>)>,
    source_integral: f64,
    steps: u64,
}

impl PropagatorState {
    pub fn new(system: Arc<System>, field: RadialField, t: f64, dt: f64) -> Result<Self> {
        if field.grid() != system.grid() {
            return Err(Error::GridMismatch);
        }
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be finite and nonzero, got {dt}")));
        }
        if dt.abs() > system.stability_budget() {
            log::warn!(
                "time step {dt} exceeds the stability budget {:.4e}",
                system.stability_budget()
            );
        }
        Ok(PropagatorState {
            system,
            field,
            t,
            dt,
            kinetic: None,
            source_integral: 0.0,
            steps: 0,
        })
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn kind(&self) -> SystemKind {
        self.system.kind()
    }

    pub fn field(&self) -> &RadialField {
        &self.field
    }

    pub fn into_field(self) -> RadialField {
        self.field
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total number of Strang steps taken.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Trapezoid accumulation of `g₀(t) = (ψ, ∂_t V_t ψ)` over every step taken.
    pub fn source_integral(&self) -> f64 {
        self.source_integral
    }

    /// One step of the configured `Δt`.
    pub fn step(&mut self) {
        let target = self.t + self.dt;
        self.advance_steps(1, self.dt);
        self.t = target;
    }

    /// One step of `-Δt`; undoes [`step`](Self::step) for linear systems.
    pub fn step_back(&mut self) {
        let target = self.t - self.dt;
        self.advance_steps(1, -self.dt);
        self.t = target;
    }

    /// Advances to exactly `t_target` (either direction) with the fewest equal
    /// steps no longer than `|Δt|`.
    pub fn advance_to(&mut self, t_target: f64) {
        let span = t_target - self.t;
        if span == 0.0 {
            return;
        }
        let ratio = span.abs() / self.dt.abs();
        let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round()
        } else {
            ratio.ceil()
        }
        .max(1.0) as u64;
        self.advance_steps(n, span / n as f64);
        self.t = t_target;
    }

    fn kinetic_phases(&mut self, h: f64) -> &[f64] {
        let stale = !matches!(&self.kinetic, Some((cached, _)) if *cached == h);
        if stale {
            let grid = *self.system.grid();
            let angles = (0..grid.len()).map(|m| h * grid.wavenumber(m).powi(2)).collect();
            self.kinetic = Some((h, angles));
        }
        &self.kinetic.as_ref().expect("just filled").1
    }

    fn source(&self, t: f64) -> f64 {
        if self.system.is_autonomous() {
            return 0.0;
        }
        let dv = self.system.scaled_dt_values(t);
        let s: f64 = dv.iter().zip(self.field.values()).map(|(d, x)| d * x.norm_sqr()).sum();
        s * self.system.grid().dr()
    }

    /// `U(τ)` without the nonlinear part.
    fn linear_potential(&self, tau: f64) -> Vec<f64> {
        let mut u = self.system.static_potential().to_vec();
        if !self.system.is_autonomous() {
            u.iter_mut().zip(self.system.scaled_values(tau)).for_each(|(a, b)| *a += b);
        }
        u
    }

    /// Multiplies by `exp(-i (Σ wᵢ Uᵢ + c N(|ψ|)))`.
    fn apply_phase(&mut self, terms: &[(f64, &[f64])], nl_weight: f64) {
        let nl = if nl_weight != 0.0 {
            self.system.nonlinear_values(self.field.values())
        } else {
            None
        };
        let v = self.field.values_mut();
        for (j, x) in v.iter_mut().enumerate() {
            let mut theta: f64 = terms.iter().map(|(w, u)| w * u[j]).sum();
            if let Some(nl) = &nl {
                theta += nl_weight * nl[j];
            }
            let (s, c) = theta.sin_cos();
            *x *= Complex64::new(c, -s);
        }
    }

    fn apply_kinetic(&mut self, h: f64) {
        let plan = dst::plan(self.field.len());
        let scale = plan.norm_factor();
        let angles = self.kinetic_phases(h).to_vec();
        let v = self.field.values_mut();
        plan.apply(v);
        for (x, a) in v.iter_mut().zip(&angles) {
            let (s, c) = a.sin_cos();
            *x *= Complex64::new(c * scale, -s * scale);
        }
        plan.apply(v);
    }

    fn advance_steps(&mut self, n: u64, h: f64) {
        let t0 = self.t;
        let autonomous = self.system.is_autonomous();
        let mid = |k: u64| t0 + (k as f64 + 0.5) * h;
        let mut u_cur = self.linear_potential(mid(0));
        let mut g_prev = self.source(t0);
        self.apply_phase(&[(0.5 * h, &u_cur)], 0.5 * h);
        for k in 0..n {
            self.apply_kinetic(h);
            let t_next = t0 + (k + 1) as f64 * h;
            // |ψ| at the step end is available before the pending phases
            let g_next = self.source(t_next);
            self.source_integral += 0.5 * h * (g_prev + g_next);
            g_prev = g_next;
            if k + 1 < n {
                if autonomous {
                    self.apply_phase(&[(h, &u_cur)], h);
                } else {
                    let u_next = self.linear_potential(mid(k + 1));
                    self.apply_phase(&[(0.5 * h, &u_cur), (0.5 * h, &u_next)], h);
                    u_cur = u_next;
                }
            } else {
                self.apply_phase(&[(0.5 * h, &u_cur)], 0.5 * h);
            }
        }
        self.steps += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{NonlinearitySpec, PotentialSpec, ScalingProfile};
    use crate::random::{random_smooth_field, rng};

    fn sine_mode(grid: crate::grid::RadialGrid, m: usize) -> RadialField {
        RadialField::from_reduced_fn(grid, |r| Complex64::new((grid.wavenumber(m) * r).sin(), 0.0))
    }

    #[test]
    fn free_step_on_sine_mode_is_exact_phase() {
        let g = make_grid(3, 20.0, 256).unwrap();
        let f = sine_mode(g, 7);
        let dt = 0.01;
        let mut ps = PropagatorState::new(Arc::new(System::free(g)), f.clone(), 0.0, dt).unwrap();
        ps.step();
        let k = g.wavenumber(7);
        let exact = f.scaled(Complex64::from_polar(1.0, -dt * k * k));
        assert!(ps.field().sub(&exact).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn mass_is_conserved_over_many_steps() {
        let g = make_grid(5, 40.0, 512).unwrap();
        let p = ScalingProfile::new(0.45).unwrap();
        let v = PotentialSpec::gaussian(12.0, 1.0);
        let systems = [
            System::free(g),
            System::linear(g, p.clone(), v.clone()).unwrap(),
            System::mixture(g, p.clone(), v.clone(), PotentialSpec::gaussian(20.0, 0.5)).unwrap(),
            System::nonlinear(g, p, v, NonlinearitySpec::new(30.0).unwrap()).unwrap(),
        ];
        for s in systems {
            let f = random_smooth_field(g, 6.0, &mut rng(1));
            let m0 = f.mass();
            let mut ps = PropagatorState::new(Arc::new(s), f, 0.0, 0.01).unwrap();
            ps.advance_to(100.0);
            assert_eq!(ps.steps(), 10_000);
            let drift = (ps.field().mass() - m0).abs() / m0;
            assert!(drift < 1e-11, "{:?}: drift {drift:e}", ps.kind());
        }
    }

    #[test]
    fn time_reversal() {
        let g = make_grid(3, 40.0, 512).unwrap();
        let s = System::linear(g, ScalingProfile::new(0.3).unwrap(), PotentialSpec::gaussian(4.0, 1.0)).unwrap();
        let f = random_smooth_field(g, 6.0, &mut rng(2));
        let mut ps = PropagatorState::new(Arc::new(s), f.clone(), 3.0, 0.01).unwrap();
        for _ in 0..50 {
            ps.step();
        }
        for _ in 0..50 {
            ps.step_back();
        }
        assert!((ps.t() - 3.0).abs() < 1e-12);
        assert!(ps.field().sub(&f).unwrap().norm() < 1e-10);
    }

    #[test]
    fn merged_phases_match_single_steps() {
        let g = make_grid(5, 30.0, 256).unwrap();
        let s = Arc::new(
            System::nonlinear(
                g,
                ScalingProfile::new(0.45).unwrap(),
                PotentialSpec::gaussian(12.0, 1.0),
                NonlinearitySpec::new(10.0).unwrap(),
            )
            .unwrap(),
        );
        let f = random_smooth_field(g, 5.0, &mut rng(4));
        let mut a = PropagatorState::new(s.clone(), f.clone(), 1.0, 0.01).unwrap();
        let mut b = PropagatorState::new(s, f, 1.0, 0.01).unwrap();
        a.advance_to(1.5);
        for _ in 0..50 {
            b.step();
        }
        assert!(a.field().sub(b.field()).unwrap().norm() < 1e-12);
        assert!((a.source_integral() - b.source_integral()).abs() < 1e-12);
    }

    #[test]
    fn nonlinear_step_is_gauge_covariant() {
        let g = make_grid(5, 30.0, 256).unwrap();
        let s = Arc::new(
            System::nonlinear(
                g,
                ScalingProfile::new(0.45).unwrap(),
                PotentialSpec::gaussian(12.0, 1.0),
                NonlinearitySpec::new(10.0).unwrap(),
            )
            .unwrap(),
        );
        let f = random_smooth_field(g, 5.0, &mut rng(5)).scaled(Complex64::new(2.0, 0.0));
        let phase = Complex64::from_polar(1.0, 0.7);
        let mut a = PropagatorState::new(s.clone(), f.clone(), 0.0, 0.01).unwrap();
        let mut b = PropagatorState::new(s, f.scaled(phase), 0.0, 0.01).unwrap();
        for _ in 0..20 {
            a.step();
            b.step();
        }
        let diff = a.field().scaled(phase).sub(b.field()).unwrap().max_abs();
        assert!(diff < 1e-13, "{diff:e}");
    }

    #[test]
    fn advance_lands_on_target() {
        let g = make_grid(3, 20.0, 128).unwrap();
        let mut ps = PropagatorState::new(Arc::new(System::free(g)), sine_mode(g, 1), 0.0, 0.03).unwrap();
        ps.advance_to(1.0);
        assert_eq!(ps.t(), 1.0);
        assert_eq!(ps.steps(), 34);
        ps.advance_to(1.3);
        assert_eq!(ps.steps(), 44);
    }
}
