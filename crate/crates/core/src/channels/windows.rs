//! Parameter windows of the decay and channel statements.

/// Upper end of the free-channel `α` window: `1/3` in three dimensions, `2/n` above.
pub fn alpha_upper(dim: u32) -> f64 {
    if dim == 3 {
        1.0 / 3.0
    } else {
        2.0 / dim as f64
    }
}

/// Upper end of the weak-localization `β` window, `1 - 2/n - 2(n-2)ε/n`.
pub fn beta_upper(dim: u32, epsilon: f64) -> f64 {
    let n = dim as f64;
    1.0 - 2.0 / n - 2.0 * (n - 2.0) * epsilon / n
}

/// Lower end of the two-bubble `ε` window, `2/n`.
pub fn epsilon_lower_two_bubble(dim: u32) -> f64 {
    2.0 / dim as f64
}

fn inside(x: f64, hi: f64) -> bool {
    x > 0.0 && x < hi
}

/// Logs a warning when `α` leaves its window; returns whether it is inside.
pub fn check_alpha(dim: u32, alpha: f64) -> bool {
    let hi = alpha_upper(dim);
    let ok = inside(alpha, hi);
    if !ok {
        log::warn!("alpha = {alpha} is outside (0, {hi:.4}) for n = {dim}; computing anyway");
    }
    ok
}

pub fn check_beta(dim: u32, epsilon: f64, beta: f64) -> bool {
    let hi = beta_upper(dim, epsilon);
    let ok = inside(beta, hi);
    if !ok {
        log::warn!("beta = {beta} is outside (0, {hi:.4}) for n = {dim}, eps = {epsilon}; computing anyway");
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_values() {
        assert!((beta_upper(3, 0.3) - (1.0 - 2.0 / 3.0 - 0.2)).abs() < 1e-15);
        assert!(check_beta(3, 0.3, 0.1));
        assert!(!check_beta(3, 0.3, 0.14));
        assert_eq!(alpha_upper(5), 0.4);
        assert!(check_alpha(3, 0.2));
        assert!(!check_alpha(3, 1.0 / 3.0));
    }
}
