//! Ruin probability of the discrete-time surplus process
//! `U_n = u + c·n − S_n` with unit-exponential claims and premium
//! `c = 1 + θ`.
//!
//! Ruin happens iff `max_i S_i/(i + u/c) > c`, so
//! `ψ(u) = 1 − F_{∞;u/c}(c) = e^((1 + u/c)(t(c) − c))` for `u > −c`.

use crate::error::{domain, Error, Result};
use crate::special_fn::{conjugate_t, BranchPointPolicy};

/// Steps of the bisection that solves the capital equation.
const BISECTION_STEPS: usize = 80;
/// Distance kept from the left end `u = −c` of the bracket.
const LEFT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskModel {
    theta: f64,
    u: f64,
}

impl RiskModel {
    /// A model with safety loading `θ > 0` and initial capital `u`.
    pub fn new(theta: f64, u: f64) -> Result<Self> {
        check_theta(theta)?;
        if u.is_nan() {
            return domain("initial capital must not be NaN");
        }
        Ok(Self { theta, u })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Premium per period, `1 + θ`.
    pub fn c(&self) -> f64 {
        1.0 + self.theta
    }

    pub fn u(&self) -> f64 {
        self.u
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_nan() || theta.is_infinite() {
        return domain(format!("safety loading must be finite, got {theta}"));
    }
    if theta <= 0.0 {
        return Err(Error::Solvency { theta });
    }
    Ok(())
}

/// `t(c) − c`, the logarithm of the ruin probability at zero capital.
fn log_psi_at_zero(c: f64) -> Result<f64> {
    Ok(conjugate_t(c, &BranchPointPolicy::default())? - c)
}

/// `ψ(u)`: one for `u ≤ −c`, otherwise `(t/c)·exp(−u(1 − t/c))`.
pub fn ruin_probability(m: &RiskModel) -> Result<f64> {
    let c = m.c();
    if m.u <= -c {
        return Ok(1.0);
    }
    let gap = log_psi_at_zero(c)?;
    Ok(((c + m.u) / c * gap).exp())
}

/// Capital `u*` with `ψ(u*) = α`, by inverting `ψ` in closed form:
/// `u* = c·(ln α − (t − c))/(t − c)`.
pub fn min_capital(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let c = 1.0 + theta;
    let gap = log_psi_at_zero(c)?;
    Ok(c * (alpha.ln() - gap) / gap)
}

/// Root of `(c + u)(1 − α^(c/(c+u))) = −ln α` on `(−c, ∞)`, found by
/// bisection. This path does not use `t(c)` and serves as an independent
/// check on [`min_capital`].
pub fn min_capital_root(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let c = 1.0 + theta;
    let ln_alpha = alpha.ln();
    let g = |u: f64| {
        let s = c + u;
        s * -(ln_alpha * c / s).exp_m1() + ln_alpha
    };
    let mut lo = -c + LEFT_MARGIN;
    if g(lo) > 0.0 {
        return Err(Error::Convergence(format!(
            "capital equation has no sign change above -c + {LEFT_MARGIN} (alpha = {alpha}, theta = {theta})"
        )));
    }
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Convergence(format!(
                "capital equation has no upper bracket (alpha = {alpha}, theta = {theta})"
            )));
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("ruin level alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dist::{cdf_shifted_inf, ShiftedParam};

    fn psi(theta: f64, u: f64) -> f64 {
        ruin_probability(&RiskModel::new(theta, u).unwrap()).unwrap()
    }

    #[test]
    fn probability_examples() {
        assert_eq!(psi(1.0, -2.0), 1.0);
        assert_eq!(psi(1.0, -5.0), 1.0);
        assert!((psi(1.0, 0.0) - 0.203_187_869_979_979_95).abs() < 1e-15);
        assert!(psi(0.5, -1.5 + 1e-12) > 1.0 - 1e-11);
        assert!(matches!(
            RiskModel::new(0.0, 1.0),
            Err(Error::Solvency { .. })
        ));
        assert!(matches!(
            RiskModel::new(-0.2, 1.0),
            Err(Error::Solvency { .. })
        ));
    }

    #[test]
    fn capital_examples() {
        let u = min_capital(0.5, 0.5).unwrap();
        assert!((u - (-0.3107)).abs() < 5e-4);
        assert!((u - (-0.310_684_055_722_919)).abs() < 1e-12);
        let alpha0 = psi(0.7, 0.0);
        assert!(min_capital(alpha0, 0.7).unwrap().abs() < 1e-12);
        let u = min_capital(0.05, 1.0).unwrap();
        assert!((u - 1.759_646_923_897_509_8).abs() < 1e-12);
        assert!((min_capital_root(0.05, 1.0).unwrap() - u).abs() < 1e-10);
        assert!(min_capital(1.0, 1.0).is_err());
        assert!(matches!(min_capital(0.5, 0.0), Err(Error::Solvency { .. })));
    }

    #[test]
    fn grid_round_trip_and_two_paths() {
        for i in 0..=30 {
            let alpha = 0.01 + 0.89 * i as f64 / 30.0;
            for j in 0..=29 {
                let theta = 0.1 + 0.1 * j as f64;
                let u = min_capital(alpha, theta).unwrap();
                assert!(
                    (psi(theta, u) - alpha).abs() < 1e-10,
                    "alpha {alpha} theta {theta}"
                );
                let root = min_capital_root(alpha, theta).unwrap();
                assert!(
                    (root - u).abs() < 1e-10,
                    "alpha {alpha} theta {theta}: {root} vs {u}"
                );
            }
        }
    }

    #[test]
    fn agrees_with_shifted_family() {
        for theta in [0.1, 0.5, 1.0, 3.0] {
            let c = 1.0 + theta;
            for u in [-0.9 * c, -0.3, 0.0, 0.5, 4.0, 20.0] {
                let lam = ShiftedParam::new(u / c).unwrap();
                let other = 1.0 - cdf_shifted_inf(c, lam);
                assert!((psi(theta, u) - other).abs() < 1e-12, "theta {theta} u {u}");
            }
        }
    }

    proptest! {
        #[test]
        fn decreasing_in_capital(theta in 0.01f64..5.0, a in -0.99f64..10.0, d in 1e-3f64..5.0) {
            let c = 1.0 + theta;
            let u = a * c;
            let p1 = psi(theta, u);
            let p2 = psi(theta, u + d);
            prop_assert!(p1 > 0.0 && p1 < 1.0);
            prop_assert!(p2 < p1);
        }
    }
}
