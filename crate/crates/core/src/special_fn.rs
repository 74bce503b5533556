//! Principal-branch Lambert W and the functions built on it, namely the tree
//! function and the conjugate map `t(x)` solving `t·e^(−t) = x·e^(−x)` on
//! `(0, 1]`.
//!
//! These are one function seen from different sides:
//! `t(x) = −W₀(−x·e^(−x)) = h(x·e^(−x))`. Away from the branch point
//! `W₀ = −1` (equivalently `x = 1`) they are evaluated by Halley iteration;
//! close to it, where the derivative of `w·e^w` vanishes, by the branch-point
//! series in `p = √(2(1 + e·y))`.

use std::f64::consts::{E, PI};
use std::sync::LazyLock;

use crate::error::{domain, Error, Result};
use crate::series::{self, SeriesPolicy};

/// `e` split as `E_HI + E_LO` so that `1 + e·y` keeps its low bits near the
/// branch point `y = −1/e`.
const E_HI: f64 = E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// Number of branch-point series coefficients kept.
const BRANCH_TERMS: usize = 24;

/// Beyond this abscissa `x·e^(−x)` is so small that `t(x) = x·e^(−x)` to
/// double precision.
const CONJUGATE_ASYMPTOTIC_X: f64 = 700.0;

/// Controls for the Lambert-W and conjugate-map solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPointPolicy {
    /// Inside `p < switch_radius` the branch-point series replaces iteration.
    /// Near the branch point `p ≈ |w + 1| ≈ |x − 1|`.
    pub switch_radius: f64,
    /// Relative residual at which Halley iteration stops.
    pub newton_tol: f64,
    pub max_iters: usize,
}

impl Default for BranchPointPolicy {
    fn default() -> Self {
        Self {
            switch_radius: 0.05,
            newton_tol: 1e-14,
            max_iters: 100,
        }
    }
}

impl BranchPointPolicy {
    pub fn new(switch_radius: f64, newton_tol: f64, max_iters: usize) -> Result<Self> {
        let policy = Self {
            switch_radius,
            newton_tol,
            max_iters,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.switch_radius > 0.0 && self.switch_radius < 1.0) {
            return domain(format!(
                "switch_radius must lie in (0, 1), got {}",
                self.switch_radius
            ));
        }
        if !(self.newton_tol > 0.0) {
            return domain(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        if self.max_iters == 0 {
            return domain("max_iters must be at least 1");
        }
        Ok(())
    }
}

/// Coefficients `μ_k` of `W₀(y) = Σ μ_k p^k`, `p = √(2(1 + e·y))`.
static BRANCH_COEFFS: LazyLock<[f64; BRANCH_TERMS]> = LazyLock::new(|| {
    let mut mu = [0.0; BRANCH_TERMS];
    let mut alpha = [0.0; BRANCH_TERMS];
    mu[0] = -1.0;
    mu[1] = 1.0;
    alpha[0] = 2.0;
    alpha[1] = -1.0;
    for k in 2..BRANCH_TERMS {
        alpha[k] = (2..k).map(|j| mu[j] * mu[k + 1 - j]).sum();
        let kf = k as f64;
        mu[k] = (kf - 1.0) / (kf + 1.0) * (mu[k - 2] / 2.0 + alpha[k - 2] / 4.0)
            - alpha[k] / 2.0
            - mu[k - 1] / (kf + 1.0);
    }
    mu
});

#[cfg(test)]
fn branch_coefficients() -> &'static [f64; BRANCH_TERMS] {
    &BRANCH_COEFFS
}

fn branch_series(p: f64) -> f64 {
    BRANCH_COEFFS
        .iter()
        .rev()
        .fold(0.0, |acc, &mu| acc * p + mu)
}

/// `1 + e·y`, accurate to a few ulps of the result near `y = −1/e`.
fn branch_distance(y: f64) -> f64 {
    E_HI.mul_add(y, 1.0) + E_LO * y
}

/// `1 − x·e^(1−x)` for `x ≥ 1`, without cancellation near `x = 1`.
fn conjugate_branch_distance(x: f64) -> f64 {
    let eps = x - 1.0;
    if eps < 0.1 {
        // Σ_{m≥2} (−1)^m (m−1)/m! ε^m
        let mut sum = 0.0;
        let mut power_over_fact = eps; // ε^m / m! at m = 1
        for m in 2..40 {
            power_over_fact *= eps / m as f64;
            let term = (m - 1) as f64 * power_over_fact;
            let signed = if m % 2 == 0 { term } else { -term };
            sum += signed;
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        -(eps.ln_1p() - eps).exp_m1()
    }
}

/// Principal branch `W₀` of the Lambert W function on `[−1/e, ∞)`.
///
/// Arguments within a few ulps below `−1/e` are clamped to the branch point.
pub fn lambert_w0(y: f64, policy: &BranchPointPolicy) -> Result<f64> {
    if y.is_nan() || y == f64::INFINITY {
        return domain(format!("lambert_w0 needs a finite argument, got {y}"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut q = branch_distance(y);
    if q < 0.0 {
        if q >= -4.0 * f64::EPSILON {
            q = 0.0;
        } else {
            return domain(format!("lambert_w0 is undefined below -1/e, got {y}"));
        }
    }
    let p = (2.0 * q).sqrt();
    if p < policy.switch_radius {
        return Ok(branch_series(p));
    }

    if y > E {
        // w + ln w = ln y keeps the iterate away from overflow.
        let ly = y.ln();
        let l2 = ly.ln();
        let w0 = ly - l2 + l2 / ly;
        return halley(w0, policy, |w| {
            let g = w + w.ln() - ly;
            (g, 1.0 + 1.0 / w, -1.0 / (w * w), ly.abs())
        });
    }

    let w0 = if y < -0.25 {
        branch_series(p)
    } else {
        y * (1.0 + 4.0 / 3.0 * y) / (1.0 + 7.0 / 3.0 * y + 5.0 / 6.0 * y * y)
    };
    halley(w0, policy, |w| {
        let ew = w.exp();
        (w * ew - y, ew * (1.0 + w), ew * (2.0 + w), y.abs())
    })
}

/// Halley iteration on a residual `f` with derivatives `f'` and `f''`.
/// The closure also returns the scale against which the residual is judged.
fn halley<F>(mut w: f64, policy: &BranchPointPolicy, mut eval: F) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64, f64, f64),
{
    for _ in 0..policy.max_iters {
        let (f, d1, d2, _) = eval(w);
        if f == 0.0 {
            return Ok(w);
        }
        let step = 2.0 * f * d1 / (2.0 * d1 * d1 - f * d2);
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    let (f, _, _, scale) = eval(w);
    if f.abs() <= policy.newton_tol * scale.max(1.0) {
        return Ok(w);
    }
    Err(Error::Convergence(format!(
        "Halley iteration stalled at {w} (residual {f:e}) after {} iterations",
        policy.max_iters
    )))
}

/// The tree function `h(y) = Σ_{k≥1} k^(k−1)/k!·y^k = −W₀(−y)` on `[0, 1/e]`,
/// summed with a certified tail.
pub fn tree_fn(y: f64, policy: &SeriesPolicy) -> Result<f64> {
    policy.validate()?;
    if !(y >= 0.0) {
        return domain(format!("tree_fn needs y in [0, 1/e], got {y}"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    // log of r = e·y, the ratio against which the k-th term decays.
    let log_ratio = 1.0 + y.ln();
    if log_ratio > 4.0 * f64::EPSILON {
        return domain(format!("tree_fn needs y in [0, 1/e], got {y}"));
    }
    let sum = series::tree_sum(log_ratio.min(0.0), 0.0, policy)?;
    Ok(sum.value())
}

/// The conjugate point `t ∈ (0, 1]` with `t·e^(−t) = x·e^(−x)`.
///
/// `t(x) = x` for `x ≤ 1`. For very large `x` the result underflows; past
/// that point the function reports a convergence error.
pub fn conjugate_t(x: f64, policy: &BranchPointPolicy) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("conjugate_t needs a finite x >= 0, got {x}"));
    }
    if x <= 1.0 {
        return Ok(x);
    }
    let q = conjugate_branch_distance(x);
    let p = (2.0 * q).sqrt();
    if p < policy.switch_radius {
        return Ok(-branch_series(p));
    }
    let target = x.ln() - x;
    if x > CONJUGATE_ASYMPTOTIC_X {
        let t = target.exp();
        if t == 0.0 {
            return Err(Error::Convergence(format!(
                "conjugate_t({x}) underflows double precision"
            )));
        }
        return Ok(t);
    }
    let t0 = if p < 1.2 {
        -branch_series(p)
    } else {
        let s = target.exp();
        s * (1.0 + s)
    };
    let t = halley(t0.clamp(f64::MIN_POSITIVE, 1.0), policy, |t| {
        (
            t.ln() - t - target,
            1.0 / t - 1.0,
            -1.0 / (t * t),
            target.abs(),
        )
    })?;
    Ok(t.min(1.0))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` by the Lanczos approximation (`g = 7`, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}
