//! KS test of `√n·M_n ⇒ |Z|` for centered unit-exponential inputs, where
//! `M_n = sup_{i≥n} (S_i − i)/i`.
//!
//! Each trajectory is simulated without a fixed horizon. The partial sums are
//! drawn at sparse checkpoints with Gamma increments, and the path between two
//! checkpoints `a < b` is refined by Gamma-bridge bisection,
//! `S_m = S_a + (S_b − S_a)·Beta(m − a, b − m)`, only where the running
//! maximum could still be exceeded. Since `S` is nondecreasing,
//! `max_{a<m≤b} S_m/m ≤ S_b/(a + 1)`, which prunes most of the path exactly.
//!
//! Beyond the last checkpoint `a` the exponential martingale
//! `exp(θ·(S_m − S_a) + (m − a)·ln(1 − θ))` and Doob's inequality give
//! `P(sup_{m>a} S_m/m > y | S_a) ≤ exp(−θ_y·(y·a − S_a))` with
//! `ln(1 − θ_y) + θ_y·y = 0`. A trajectory stops when this bound at its
//! running maximum falls below `epsilon`. Trajectories that reach the span
//! cap are kept with the interval `[best, y_ε]` that contains their value
//! except with probability `epsilon`.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::Serialize;

use super::stats::{half_normal_cdf, ks_critical_value_1pct};
use super::{run_blocks, SimConfig};
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakConvergenceOptions {
    /// Per-trajectory probability that the supremum lies beyond the stopping
    /// point.
    pub epsilon: f64,
    /// Trajectories stop at index `n·max_span_factor` at the latest.
    pub max_span_factor: usize,
}

impl Default for WeakConvergenceOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_span_factor: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakConvergenceReport {
    pub n: usize,
    pub samples: usize,
    /// KS distance of the simulated values (lower ends for capped paths)
    /// from the half-normal CDF.
    pub statistic: f64,
    /// Upper bound on the KS distance valid for every value inside the
    /// per-trajectory intervals.
    pub statistic_upper: f64,
    pub critical_value: f64,
    /// Bound on the KS error from trajectories whose supremum lies beyond
    /// their stopping point.
    pub bias_bound: f64,
    /// Trajectories that hit the span cap.
    pub truncated: usize,
    pub pass: bool,
}

/// Largest `θ ∈ (0, 1)` with `ln(1 − θ) + θ·y ≥ 0`, for `y > 1`.
fn martingale_rate(y: f64) -> f64 {
    let g = |t: f64| (-t).ln_1p() + t * y;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Doob exponent `θ_y·(y·a − S_a)`; the escape probability is `e^(−exponent)`.
fn escape_exponent(y: f64, a: f64, s_a: f64) -> f64 {
    if y <= 1.0 || y * a <= s_a {
        return 0.0;
    }
    martingale_rate(y) * (y * a - s_a)
}

struct Trajectory<'a> {
    rng: &'a mut ChaCha8Rng,
    best: f64,
}

impl Trajectory<'_> {
    fn gamma(&mut self, shape: f64) -> f64 {
        Gamma::new(shape, 1.0)
            .expect("shape is a positive integer count")
            .sample(self.rng)
    }

    /// Raises `best` to `max_{a<m≤b} S_m/m` given the bridge endpoints.
    fn refine(&mut self, a: usize, s_a: f64, b: usize, s_b: f64) {
        self.best = self.best.max(s_b / b as f64);
        let mut stack = vec![(a, s_a, b, s_b)];
        while let Some((a, s_a, b, s_b)) = stack.pop() {
            if b - a <= 1 || s_b / (a + 1) as f64 <= self.best {
                continue;
            }
            let m = a + (b - a) / 2;
            let frac = Beta::new((m - a) as f64, (b - m) as f64)
                .expect("bridge parameters are positive")
                .sample(self.rng);
            let s_m = s_a + (s_b - s_a) * frac;
            self.best = self.best.max(s_m / m as f64);
            stack.push((m, s_m, b, s_b));
            stack.push((a, s_a, m, s_m));
        }
    }
}

/// Interval `[lower, upper]` for `sup_{i≥n} S_i/i` of one trajectory.
fn supremum(rng: &mut ChaCha8Rng, n: usize, opts: &WeakConvergenceOptions) -> (f64, f64, bool) {
    let target = -opts.epsilon.ln();
    let cap = n.saturating_mul(opts.max_span_factor);
    let mut t = Trajectory { rng, best: 0.0 };
    let mut a = n;
    let mut s_a = t.gamma(n as f64);
    t.best = s_a / n as f64;
    loop {
        if escape_exponent(t.best, a as f64, s_a) >= target {
            return (t.best, t.best, false);
        }
        if a >= cap {
            break;
        }
        let h = (a / 2).max(1).min(cap - a);
        let s_b = s_a + t.gamma(h as f64);
        t.refine(a, s_a, a + h, s_b);
        a += h;
        s_a = s_b;
    }
    // Smallest y whose escape bound is below epsilon, by bisection.
    let (mut lo, mut hi) = (t.best.max(1.0), t.best.max(1.0) + 1.0);
    while escape_exponent(hi, a as f64, s_a) < target {
        hi = lo + 2.0 * (hi - lo);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if escape_exponent(mid, a as f64, s_a) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (t.best, hi, true)
}

/// Simulates `√n·M_n` for `cfg.samples` trajectories and compares it with the
/// half-normal law at the 1% level.
pub fn weak_convergence_test(
    cfg: &SimConfig,
    n: usize,
    opts: &WeakConvergenceOptions,
) -> Result<WeakConvergenceReport> {
    cfg.validate()?;
    if n < 1000 {
        return domain(format!(
            "the weak-convergence test needs n >= 1000, got {n}"
        ));
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) || opts.max_span_factor < 2 {
        return domain("epsilon must lie in (0, 1) and max_span_factor must be at least 2");
    }
    let scale = (n as f64).sqrt();
    let blocks = run_blocks(cfg, |rng, count| {
        (0..count)
            .map(|_| {
                let (lo, hi, capped) = supremum(rng, n, opts);
                (
                    scale * (lo - 1.0).max(0.0),
                    scale * (hi - 1.0).max(0.0),
                    capped,
                )
            })
            .collect::<Vec<_>>()
    });
    let values: Vec<(f64, f64, bool)> = blocks.concat();
    let truncated = values.iter().filter(|v| v.2).count();
    let mut lower: Vec<f64> = values.iter().map(|v| v.0).collect();
    let mut upper: Vec<f64> = values.iter().map(|v| v.1).collect();
    lower.sort_by(f64::total_cmp);
    upper.sort_by(f64::total_cmp);
    let total = values.len() as f64;
    let statistic = super::stats::ks_statistic(&mut lower.clone(), half_normal_cdf);
    // The empirical CDF of the true values lies between those of `upper` and `lower`.
    let above = lower
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 / total - half_normal_cdf(x))
        .fold(0.0, f64::max);
    let below = upper
        .iter()
        .enumerate()
        .map(|(i, &x)| half_normal_cdf(x) - i as f64 / total)
        .fold(0.0, f64::max);
    let statistic_upper = above.max(below).max(statistic);
    let critical_value = ks_critical_value_1pct(cfg.samples);
    let bias_bound = opts.epsilon;
    Ok(WeakConvergenceReport {
        n,
        samples: cfg.samples,
        statistic,
        statistic_upper,
        critical_value,
        bias_bound,
        truncated,
        pass: statistic_upper + bias_bound < critical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::block_rng;

    #[test]
    fn rate_solves_the_martingale_equation() {
        for y in [1.001, 1.1, 2.0, 5.0] {
            let t = martingale_rate(y);
            assert!(t > 0.0 && t < 1.0);
            assert!(((-t).ln_1p() + t * y).abs() < 1e-12, "y = {y}");
        }
        let small = martingale_rate(1.0 + 1e-4);
        assert!((small - 2e-4).abs() < 1e-6);
    }

    #[test]
    fn bridge_refinement_matches_direct_simulation_in_law() {
        let (a, b, count) = (40usize, 300usize, 4000usize);
        let mut rng = block_rng(3, 0);
        let mut direct = Vec::with_capacity(count);
        let mut bridged = Vec::with_capacity(count);
        for _ in 0..count {
            let s_a = Gamma::new(a as f64, 1.0).unwrap().sample(&mut rng);
            let mut s = s_a;
            let mut best = s_a / a as f64;
            for m in a + 1..=b {
                s += crate::mc::exponential(&mut rng);
                best = best.max(s / m as f64);
            }
            direct.push(best);

            let s_a = Gamma::new(a as f64, 1.0).unwrap().sample(&mut rng);
            let s_b = s_a + Gamma::new((b - a) as f64, 1.0).unwrap().sample(&mut rng);
            let mut t = Trajectory {
                rng: &mut rng,
                best: s_a / a as f64,
            };
            t.refine(a, s_a, b, s_b);
            bridged.push(t.best);
        }
        direct.sort_by(f64::total_cmp);
        bridged.sort_by(f64::total_cmp);
        // Two-sample KS distance at the 1% level.
        let ecdf = |v: &[f64], x: f64| v.partition_point(|&y| y <= x) as f64 / v.len() as f64;
        let d = direct
            .iter()
            .chain(&bridged)
            .map(|&x| (ecdf(&direct, x) - ecdf(&bridged, x)).abs())
            .fold(0.0, f64::max);
        let critical = 1.63 * (2.0 / count as f64).sqrt();
        assert!(d < critical, "{d} >= {critical}");
    }

    #[test]
    fn supremum_law_matches_time_inversion_at_moderate_n() {
        let cfg = SimConfig {
            seed: 5,
            samples: 2_000,
            depth: 1,
            workers: 1,
            horizon: 1,
        };
        let report = weak_convergence_test(&cfg, 1000, &WeakConvergenceOptions::default()).unwrap();
        assert!(report.statistic <= report.statistic_upper);
        assert!(report.statistic < 2.0 * report.critical_value, "{report:?}");
        assert!(weak_convergence_test(&cfg, 999, &WeakConvergenceOptions::default()).is_err());
    }
}
