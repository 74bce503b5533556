//! Generalized Poisson law `p(k; α, θ) = θ·e^(−α(θ+k))·α^k·(k+θ)^(k−1)/k!`.
//!
//! Setting `x = α` and `1 + λ = θ` in the shifted series identity shows these
//! masses sum to one for `α ∈ [0, 1]`. At `α = 0` the law is a point mass at
//! zero (`α⁰ = 1`); at `k = 0` the factor `(k+θ)^(k−1)` is `1/θ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::special_fn::ln_gamma;

/// Mass the sampler's cumulative table must reach before sampling.
pub const SAMPLER_COVERAGE: f64 = 1.0 - 1e-12;
/// Largest support size explored by [`cdf_table`] and the sampler.
pub const MAX_SUPPORT: usize = 1_000_000;
/// The sampler refuses `α` above this; the tail is not certifiable near 1.
pub const SAMPLER_ALPHA_LIMIT: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenPoissonParams {
    alpha: f64,
    theta: f64,
}

impl GenPoissonParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("alpha must lie in [0, 1], got {alpha}"));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return domain(format!("theta must be a finite value > 0, got {theta}"));
        }
        Ok(Self { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `ln p(k)`, or `−∞` where the mass vanishes.
pub fn ln_pmf(k: u64, p: &GenPoissonParams) -> f64 {
    let GenPoissonParams { alpha, theta } = *p;
    if k == 0 {
        return -alpha * theta;
    }
    if alpha == 0.0 {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    theta.ln() - alpha * (theta + kf) + kf * alpha.ln() + (kf - 1.0) * (kf + theta).ln()
        - ln_factorial(k)
}

fn ln_factorial(k: u64) -> f64 {
    if k < 21 {
        (1..=k).map(|i| i as f64).product::<f64>().ln()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

pub fn pmf(k: u64, p: &GenPoissonParams) -> f64 {
    ln_pmf(k, p).exp()
}

/// `P(K ≤ k)`.
pub fn cdf(k: u64, p: &GenPoissonParams) -> f64 {
    let mut acc = 0.0;
    let mut carry = 0.0;
    for j in 0..=k {
        // Kahan summation; the masses are all positive.
        let y = pmf(j, p) - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
    }
    acc.min(1.0)
}

/// Upper bound on `Σ_{j>k} p(j)` from the ratio test, or `None` while the
/// ratio bound is still ≥ 1.
///
/// `p(j+1)/p(j) = α·e^(−α)·(j+1+θ)/(j+1)·(1 + 1/(j+θ))^(j−1)`, and the last
/// factor is below `e`. The middle factor decreases in `j`, so the ratio at `k`
/// bounds every later ratio.
pub fn tail_bound(k: u64, p: &GenPoissonParams) -> Option<f64> {
    if p.alpha == 0.0 {
        return Some(0.0);
    }
    let kf = k as f64;
    let rho = (p.alpha.ln() + 1.0 - p.alpha).exp() * (kf + 1.0 + p.theta) / (kf + 1.0);
    (rho < 1.0).then(|| pmf(k, p) * rho / (1.0 - rho))
}

/// Cumulative masses `P(K ≤ 0), P(K ≤ 1), …` up to the first `k` whose
/// certified tail lies below `1 − coverage`.
pub fn cdf_table(p: &GenPoissonParams, coverage: f64) -> Result<Vec<f64>> {
    let target = 1.0 - coverage;
    let mut table = Vec::new();
    let mut acc = 0.0;
    for k in 0..MAX_SUPPORT as u64 {
        acc += pmf(k, p);
        table.push(acc);
        if let Some(tail) = tail_bound(k, p) {
            if tail < target {
                return Ok(table);
            }
        }
    }
    Err(Error::Convergence(format!(
        "cumulative mass did not reach {coverage} within {MAX_SUPPORT} terms (alpha = {})",
        p.alpha
    )))
}

/// Draws `count` variates by inversion of the cumulative table. The stream is
/// a function of `seed` alone.
pub fn sample(p: &GenPoissonParams, count: usize, seed: u64) -> Result<Vec<u64>> {
    if count == 0 {
        return domain("sample count must be at least 1");
    }
    if p.alpha > SAMPLER_ALPHA_LIMIT {
        return Err(Error::Convergence(format!(
            "alpha = {} exceeds {SAMPLER_ALPHA_LIMIT}; the tail cannot be certified",
            p.alpha
        )));
    }
    let table = cdf_table(p, SAMPLER_COVERAGE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let k = table.partition_point(|&c| c <= u);
            if k < table.len() {
                k as u64
            } else {
                extend_search(p, table.len() as u64, *table.last().unwrap_or(&0.0), u)
            }
        })
        .collect();
    Ok(out)
}

/// Sequential search past the end of the table, reached with probability
/// below `1 − SAMPLER_COVERAGE`.
fn extend_search(p: &GenPoissonParams, start: u64, mut acc: f64, u: f64) -> u64 {
    let mut k = start;
    while k < MAX_SUPPORT as u64 {
        acc += pmf(k, p);
        if acc > u {
            return k;
        }
        k += 1;
    }
    k - 1
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::mc::stats::chi_square_gof;

    fn gp(alpha: f64, theta: f64) -> GenPoissonParams {
        GenPoissonParams::new(alpha, theta).unwrap()
    }

    #[test]
    fn mass_examples() {
        let p = gp(0.3, 1.5);
        assert!((pmf(0, &p) - (-0.45f64).exp()).abs() < 1e-16);
        assert!((pmf(2, &p) - 0.082_672_793_227_510_45).abs() < 1e-16);
        let q = gp(0.0, 2.0);
        assert_eq!(pmf(0, &q), 1.0);
        assert_eq!(pmf(1, &q), 0.0);
        assert_eq!(pmf(7, &q), 0.0);
        // Ordinary Poisson-like sanity: p(1) = θ·e^(−α(θ+1))·α.
        let direct = 1.5 * (-0.3f64 * 2.5).exp() * 0.3;
        assert!((pmf(1, &p) - direct).abs() < 1e-16);
    }

    #[test]
    fn normalization_on_grid() {
        for alpha in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            for theta in [0.5, 1.0, 2.0, 5.0] {
                let p = gp(alpha, theta);
                let table = cdf_table(&p, 1.0 - 1e-13).unwrap();
                let k = table.len() as u64 - 1;
                let total = cdf(k, &p);
                assert!(
                    (total - 1.0).abs() < 1e-10,
                    "alpha {alpha}, theta {theta}: {total}"
                );
                assert!(cdf(k / 2, &p) <= total);
            }
        }
    }

    #[test]
    fn tail_bound_brackets_true_tail() {
        let p = gp(0.8, 2.0);
        for k in [5u64, 20, 60] {
            if let Some(bound) = tail_bound(k, &p) {
                let tail: f64 = (k + 1..k + 5000).map(|j| pmf(j, &p)).sum();
                assert!(tail <= bound, "k = {k}: {tail} > {bound}");
            }
        }
    }

    #[test]
    fn degenerate_sampler() {
        let s = sample(&gp(0.0, 3.0), 1000, 1).unwrap();
        assert!(s.iter().all(|&k| k == 0));
        assert!(sample(&gp(1.0, 1.0), 10, 1).is_err());
        assert!(sample(&gp(0.5, 1.0), 0, 1).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = gp(0.4, 2.0);
        assert_eq!(sample(&p, 500, 99).unwrap(), sample(&p, 500, 99).unwrap());
        assert_ne!(sample(&p, 500, 99).unwrap(), sample(&p, 500, 100).unwrap());
    }

    #[test]
    fn sampler_goodness_of_fit() {
        let p = gp(0.5, 1.0);
        let draws = sample(&p, 1_000_000, 20_240_601).unwrap();
        let max = *draws.iter().max().unwrap() as usize;
        let mut observed = vec![0u64; max + 1];
        draws.iter().for_each(|&k| observed[k as usize] += 1);
        let probs: Vec<f64> = (0..=max as u64).map(|k| pmf(k, &p)).collect();
        let gof = chi_square_gof(&observed, &probs, 1_000_000).unwrap();
        assert!(gof.p_value > 1e-3, "{gof:?}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GenPoissonParams::new(-0.1, 1.0).is_err());
        assert!(GenPoissonParams::new(1.1, 1.0).is_err());
        assert!(GenPoissonParams::new(0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn masses_are_probabilities(alpha in 0.0f64..=1.0, theta in 0.01f64..20.0, k in 0u64..500) {
            let v = pmf(k, &gp(alpha, theta));
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn cdf_is_monotone(alpha in 0.0f64..0.95, theta in 0.1f64..10.0, k in 0u64..200) {
            let p = gp(alpha, theta);
            prop_assert!(cdf(k, &p) <= cdf(k + 1, &p));
        }
    }
}
