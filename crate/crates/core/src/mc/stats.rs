//! Reference distributions and goodness-of-fit statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

/// Standard normal CDF `Φ(x) = erfc(−x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of `|Z|`, `2Φ(x) − 1 = erf(x/√2)` on `x ≥ 0`.
pub fn half_normal_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    libm::erf(x / std::f64::consts::SQRT_2)
}

/// Two-sided Kolmogorov–Smirnov distance between the empirical law of
/// `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic, `1.63/√n`.
pub fn ks_critical_value_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareGof {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson χ² test of `observed` counts against cell probabilities `probs`.
///
/// Adjacent cells are pooled from the left until each pooled cell expects at
/// least five draws. Mass not covered by `probs` is added to the last cell.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], total: u64) -> Result<ChiSquareGof> {
    if observed.len() != probs.len() || observed.is_empty() {
        return domain("observed counts and probabilities must have equal, nonzero length");
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += p * n;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    let covered: f64 = probs.iter().sum();
    exp += (1.0 - covered).max(0.0) * n;
    match cells.last_mut() {
        Some(last) if exp < 5.0 => {
            last.0 += obs;
            last.1 += exp;
        }
        _ => cells.push((obs, exp)),
    }
    if cells.len() < 2 {
        return domain("fewer than two cells after pooling; the test has no degrees of freedom");
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let degrees_of_freedom = cells.len() - 1;
    let dist = ChiSquared::new(degrees_of_freedom as f64)
        .map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(ChiSquareGof {
        statistic,
        degrees_of_freedom,
        p_value: dist.sf(statistic),
    })
}
