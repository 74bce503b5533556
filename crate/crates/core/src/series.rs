//! Certified evaluation of the series `Σ_{k≥1} k^(k−1)/k!·x^(k−1)·e^(−kx)`
//! and its relatives.
//!
//! Every member of the family is a weighted sum `w·Σ d_k·r^k` with
//! `d_k = k^(k−1)·e^(−k)/k!` and `r = x·e^(1−x) ≤ 1`. Robbins' bounds on `k!`
//! pin each coefficient between `g(k)·e^(−1/(12k))` and `g(k)` where
//! `g(k) = k^(−3/2)/√(2π)`, and because these envelopes times `r^k` are
//! decreasing in `k`, the discarded tail is enclosed by two integrals with
//! closed forms in `erfc`. The enclosure stays tight even at `r = 1`, where
//! the terms only decay like `k^(−3/2)`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this value of `L·K` the lower tail integral is negligible and is
/// dropped instead of being computed through a cancelling difference.
const LOWER_BOUND_CUTOFF: f64 = 40.0;

/// Accuracy controls for infinite-series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPolicy {
    /// Target half-width of the certified enclosure.
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesPolicy {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        let policy = Self { abs_tol, max_terms };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return domain(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_terms == 0 {
            return domain("max_terms must be at least 1");
        }
        Ok(())
    }
}

/// A partial sum together with a rigorous enclosure of the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedSum {
    pub partial: f64,
    pub terms: usize,
    pub tail_lower: f64,
    pub tail_upper: f64,
}

impl CertifiedSum {
    /// Midpoint of the enclosure.
    pub fn value(&self) -> f64 {
        self.partial + 0.5 * (self.tail_lower + self.tail_upper)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.tail_upper - self.tail_lower)
    }

    pub fn lower(&self) -> f64 {
        self.partial + self.tail_lower
    }

    pub fn upper(&self) -> f64 {
        self.partial + self.tail_upper
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `ln k!` for `k < 21`; these factorials are exact in double precision.
fn ln_small_factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product::<f64>().ln()
}

/// `ln d_k = ln(k^(k−1)·e^(−k)/k!)`.
pub fn ln_tree_coefficient(k: usize) -> f64 {
    debug_assert!(k >= 1);
    let kf = k as f64;
    if k < 21 {
        return (kf - 1.0) * kf.ln() - kf - ln_small_factorial(k);
    }
    // Stirling series for ln k!, error below 1/(1188 k^9).
    let inv = 1.0 / kf;
    let inv2 = inv * inv;
    let stirling =
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    -1.5 * kf.ln() - 0.5 * (2.0 * PI).ln() - stirling
}

/// `ln(k^(k−1)/k!)`, the log of the k-th series coefficient.
pub fn ln_coefficient(k: usize) -> f64 {
    ln_tree_coefficient(k) + k as f64
}

/// `ln r` for `r = x·e^(1−x)`, accurate near `x = 1`.
fn log_ratio_at(x: f64) -> f64 {
    let eps = x - 1.0;
    (eps.ln_1p() - eps).min(0.0)
}

/// The k-th term `k^(k−1)/k!·x^(k−1)·e^(−kx)` for `x > 0`.
pub fn term(x: f64, k: usize) -> f64 {
    if x == 0.0 {
        return if k == 1 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (ln_tree_coefficient(k) + (kf - 1.0) * x.ln() + kf * (1.0 - x)).exp()
}

/// `∫_K^∞ y^(−3/2)·e^(−L·y) dy`.
fn tail_integral_32(k: f64, l: f64) -> f64 {
    if l == 0.0 {
        return 2.0 / k.sqrt();
    }
    let z = l * k;
    2.0 * (-z).exp() / k.sqrt() - 2.0 * (PI * l).sqrt() * libm::erfc(z.sqrt())
}

/// `∫_K^∞ y^(−5/2)·e^(−L·y) dy`.
fn tail_integral_52(k: f64, l: f64) -> f64 {
    (2.0 / 3.0) * ((-l * k).exp() / (k * k.sqrt()) - l * tail_integral_32(k, l))
}

/// Enclosure of `Σ_{k>K} d_k·r^k` with `ln r = log_ratio ≤ 0`.
pub fn tree_tail_bounds(log_ratio: f64, terms_done: usize) -> (f64, f64) {
    if terms_done == 0 {
        let first = (ln_tree_coefficient(1) + log_ratio).exp();
        let (lo, hi) = tree_tail_bounds(log_ratio, 1);
        return (lo + first, hi + first);
    }
    let l = (-log_ratio).max(0.0);
    let k = terms_done as f64;
    let next = k + 1.0;
    let mut upper = FRAC_1_SQRT_2PI * tail_integral_32(k, l);
    if l > 0.0 {
        let geometric = FRAC_1_SQRT_2PI * next.powf(-1.5) * (-l * next).exp() / -(-l).exp_m1();
        upper = upper.min(geometric);
    }
    let lower = if l * next < LOWER_BOUND_CUTOFF {
        let raw = tail_integral_32(next, l) - tail_integral_52(next, l) / 12.0;
        (FRAC_1_SQRT_2PI * raw).max(0.0)
    } else {
        0.0
    };
    (lower.min(upper), upper.max(0.0))
}

/// Sums `Σ_k term(k)` where `term(k) = weight·d_k·r^k·(correction)` and the
/// tail `Σ_{k>K} term(k)` is enclosed by `[lo_scale, hi_scale]` times the
/// tree tail at `log_ratio`.
fn certified_sum<F>(
    log_ratio: f64,
    lo_scale: f64,
    hi_scale: f64,
    policy: &SeriesPolicy,
    mut term: F,
) -> Result<CertifiedSum>
where
    F: FnMut(usize) -> f64,
{
    policy.validate()?;
    let mut acc = Compensated::default();
    let mut k = 0;
    while k < policy.max_terms {
        k += 1;
        acc.add(term(k));
        let check = k >= 4 && (k < 256 || k % 64 == 0);
        if check {
            let (lo, hi) = tree_tail_bounds(log_ratio, k);
            let (lo, hi) = (lo * lo_scale, hi * hi_scale);
            if 0.5 * (hi - lo) <= policy.abs_tol {
                return Ok(CertifiedSum {
                    partial: acc.total(),
                    terms: k,
                    tail_lower: lo,
                    tail_upper: hi,
                });
            }
        }
    }
    let (lo, hi) = tree_tail_bounds(log_ratio, k);
    let (lo, hi) = (lo * lo_scale, hi * hi_scale);
    let half_width = 0.5 * (hi - lo);
    if half_width <= policy.abs_tol {
        return Ok(CertifiedSum {
            partial: acc.total(),
            terms: k,
            tail_lower: lo,
            tail_upper: hi,
        });
    }
    Err(Error::Truncation {
        terms: k,
        half_width,
        abs_tol: policy.abs_tol,
    })
}

/// `Σ_{k≥1} e^(log_weight)·d_k·r^k` with `ln r = log_ratio`.
pub(crate) fn tree_sum(
    log_ratio: f64,
    log_weight: f64,
    policy: &SeriesPolicy,
) -> Result<CertifiedSum> {
    let weight = log_weight.exp();
    certified_sum(log_ratio, weight, weight, policy, |k| {
        (ln_tree_coefficient(k) + k as f64 * log_ratio + log_weight).exp()
    })
}

/// `Σ_{k≥1} k^(k−1)/k!·x^(k−1)·e^(−kx)` with a certified tail.
///
/// The sum equals 1 on `[0, 1]` and `t(x)/x` beyond.
pub fn identity_sum(x: f64, policy: &SeriesPolicy) -> Result<CertifiedSum> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("series needs a finite x >= 0, got {x}"));
    }
    if x == 0.0 {
        return Ok(CertifiedSum {
            partial: 1.0,
            terms: 1,
            tail_lower: 0.0,
            tail_upper: 0.0,
        });
    }
    let weight = 1.0 / x;
    certified_sum(log_ratio_at(x), weight, weight, policy, |k| term(x, k))
}

/// Finite partial sum `Σ_{k=1..n} k^(k−1)/k!·x^(k−1)·e^(−kx)`.
pub fn partial_sum(x: f64, n: usize) -> f64 {
    shifted_partial_sum(x, n, 0.0)
}

/// `(1+λ)·e^(−λx)·Σ_{k=1..n} k(k+λ)^(k−2)/k!·x^(k−1)·e^(−kx)`.
///
/// At `λ = 0` every term coincides bit for bit with [`partial_sum`].
pub fn shifted_partial_sum(x: f64, n: usize, lambda: f64) -> f64 {
    let mut acc = Compensated::default();
    for k in 1..=n {
        acc.add(shifted_term(x, k, lambda));
    }
    acc.total()
}

fn shifted_term(x: f64, k: usize, lambda: f64) -> f64 {
    let base = term(x, k);
    if lambda == 0.0 {
        return base;
    }
    let kf = k as f64;
    let log_correction = lambda.ln_1p() - lambda * x + (kf - 2.0) * (lambda / kf).ln_1p();
    base * log_correction.exp()
}

/// `F_{∞;λ}` series: `(1+λ)·e^(−λx)·Σ_{k≥1} k(k+λ)^(k−2)/k!·x^(k−1)·e^(−kx)`.
///
/// The tail uses `(1 + λ/k)^(k−2) ≤ max(1, e^λ)`; for negative `λ` only the
/// upper side of the tail is certified.
pub fn shifted_sum(x: f64, lambda: f64, policy: &SeriesPolicy) -> Result<CertifiedSum> {
    if !(lambda > -1.0) {
        return domain(format!("lambda must exceed -1, got {lambda}"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("series needs a finite x >= 0, got {x}"));
    }
    if x == 0.0 {
        return Ok(CertifiedSum {
            partial: 1.0,
            terms: 1,
            tail_lower: 0.0,
            tail_upper: 0.0,
        });
    }
    let prefactor = (lambda.ln_1p() - lambda * x).exp() / x;
    let hi_scale = prefactor * lambda.exp().max(1.0);
    let lo_scale = if lambda >= 0.0 { prefactor } else { 0.0 };
    certified_sum(log_ratio_at(x), lo_scale, hi_scale, policy, |k| {
        shifted_term(x, k, lambda)
    })
}

/// Upper bound on `Σ_{k>n} k^(k−1)/k!·x^(k−1)·e^(−kx)`, i.e. on
/// `F_n(x) − F_∞(x)`.
pub fn tail_upper_bound(x: f64, n: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    tree_tail_bounds(log_ratio_at(x), n).1 / x
}
