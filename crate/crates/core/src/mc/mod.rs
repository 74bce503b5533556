//! Seeded Monte Carlo checks of the closed forms.
//!
//! Samples are split into `workers` contiguous blocks. Block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so results depend only on
//! `(seed, samples, workers)`; block tallies are merged by summation. Unit
//! exponentials are generated by inversion, `−ln(1 − U)`.
//!
//! Suprema over infinitely many indices are simulated to a finite depth. The
//! discarded part is bounded analytically and reported as `bias_bound`:
//! for `Z_∞` by the series tail, for `M_2` and ruin by the Chernoff bound
//! `P(X̄_k > y) ≤ e^(−k·I(y))` with `I(y) = y − 1 − ln y` (and likewise for
//! `X̄_k < y` when `y < 1`).

pub mod stats;
mod weak;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use weak::{weak_convergence_test, WeakConvergenceOptions, WeakConvergenceReport};

use crate::dist::ShiftedParam;
use crate::error::{domain, Error, Result};
use crate::ruin::RiskModel;
use crate::series::tail_upper_bound;

/// Largest truncation bias accepted when choosing a simulation depth.
pub const BIAS_TARGET: f64 = 1e-4;
/// Grid points closer than this to 1 are refused by the infinite-depth
/// estimators; the truncation bias cannot be made small there.
pub const BRANCH_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub samples: usize,
    /// Largest sequence index any path may simulate.
    pub depth: usize,
    pub workers: usize,
    /// Time cap of ruin paths.
    pub horizon: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 1_000_000,
            depth: 100_000,
            workers: 1,
            horizon: 1_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.depth == 0 || self.workers == 0 || self.horizon == 0 {
            return domain("samples, depth, workers and horizon must all be at least 1");
        }
        Ok(())
    }
}

/// A frequency estimate with its standard error and a bound on the
/// systematic error from truncating an infinite supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
    pub bias_bound: f64,
}

impl EstimateWithCI {
    fn frequency(hits: u64, n: usize, bias_bound: f64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            bias_bound,
        }
    }

    /// `|estimate − target| ≤ sigmas·std_error + bias_bound`.
    pub fn agrees_with(&self, target: f64, sigmas: f64) -> bool {
        (self.estimate - target).abs() <= sigmas * self.std_error + self.bias_bound
    }
}

/// Unit exponential by inversion.
#[inline]
pub(crate) fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

pub(crate) fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Sizes of the contiguous blocks that partition `samples`.
fn block_sizes(samples: usize, workers: usize) -> Vec<usize> {
    let base = samples / workers;
    let extra = samples % workers;
    (0..workers)
        .map(|b| base + usize::from(b < extra))
        .collect()
}

/// Runs `job(rng, count)` on every block in parallel and returns the per-block
/// results in block order.
pub(crate) fn run_blocks<T, F>(cfg: &SimConfig, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    block_sizes(cfg.samples, cfg.workers)
        .into_par_iter()
        .enumerate()
        .map(|(b, count)| job(&mut block_rng(cfg.seed, b), count))
        .collect()
}

fn merge_counts(blocks: Vec<Vec<u64>>, len: usize) -> Vec<u64> {
    blocks.into_iter().fold(vec![0; len], |mut acc, b| {
        acc.iter_mut().zip(b).for_each(|(a, v)| *a += v);
        acc
    })
}

/// One draw of `max_{first ≤ i ≤ n} S_i/(i + λ)`.
fn running_max(rng: &mut ChaCha8Rng, first: usize, n: usize, lambda: f64) -> f64 {
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 1..=n {
        s += exponential(rng);
        if i >= first {
            best = best.max(s / (i as f64 + lambda));
        }
    }
    best
}

fn check_depth(n: usize, cfg: &SimConfig) -> Result<()> {
    if n > cfg.depth {
        return Err(Error::Depth {
            required: n,
            configured: cfg.depth,
        });
    }
    Ok(())
}

/// Draws of `Z_{n;λ} = max_{i≤n} S_i/(i + λ)`, in block order.
pub fn simulate_running_max(cfg: &SimConfig, n: usize, lambda: ShiftedParam) -> Result<Vec<f64>> {
    cfg.validate()?;
    if n == 0 {
        return domain("sequence depth n must be at least 1");
    }
    check_depth(n, cfg)?;
    let lam = lambda.lambda();
    let blocks = run_blocks(cfg, |rng, count| {
        (0..count)
            .map(|_| running_max(rng, 1, n, lam))
            .collect::<Vec<_>>()
    });
    Ok(blocks.concat())
}

/// Frequencies `P(max_{first≤i≤n} S_i/(i+λ) ≤ x)` over `x_grid`.
fn grid_frequencies(
    cfg: &SimConfig,
    first: usize,
    n: usize,
    lambda: f64,
    x_grid: &[f64],
) -> Vec<u64> {
    let blocks = run_blocks(cfg, |rng, count| {
        let mut hits = vec![0u64; x_grid.len()];
        for _ in 0..count {
            let z = running_max(rng, first, n, lambda);
            hits.iter_mut()
                .zip(x_grid)
                .filter(|(_, &x)| z <= x)
                .for_each(|(h, _)| *h += 1);
        }
        hits
    });
    merge_counts(blocks, x_grid.len())
}

/// Estimates of `F_{n;λ}(x)` on a grid. The depth is finite, so there is no
/// truncation bias.
pub fn estimate_cdf_running_max(
    cfg: &SimConfig,
    n: usize,
    lambda: ShiftedParam,
    x_grid: &[f64],
) -> Result<Vec<EstimateWithCI>> {
    cfg.validate()?;
    if n == 0 {
        return domain("sequence depth n must be at least 1");
    }
    check_depth(n, cfg)?;
    let hits = grid_frequencies(cfg, 1, n, lambda.lambda(), x_grid);
    Ok(hits
        .into_iter()
        .map(|h| EstimateWithCI::frequency(h, cfg.samples, 0.0))
        .collect())
}

/// Smallest `n ≥ lo` with `ok(n)`, for a predicate that is monotone in `n`.
/// Gives up past `limit` and reports the first power-of-two overshoot.
fn smallest_depth(
    lo: usize,
    limit: usize,
    ok: impl Fn(usize) -> bool,
) -> std::result::Result<usize, usize> {
    let mut hi = lo.max(1);
    while !ok(hi) {
        if hi > limit {
            return Err(hi);
        }
        hi *= 2;
    }
    let mut low = (hi / 2).max(lo);
    if ok(low) {
        return Ok(low);
    }
    while hi - low > 1 {
        let mid = low + (hi - low) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            low = mid;
        }
    }
    Ok(hi)
}

fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty() {
        return domain("the x grid is empty");
    }
    if let Some(x) = x_grid.iter().find(|x| !x.is_finite()) {
        return domain(format!("grid point {x} is not finite"));
    }
    Ok(())
}

/// Estimates of `F_∞(x)` from `Z_N`, with `N` the smallest depth whose series
/// tail is below [`BIAS_TARGET`] at every grid point. Since `Z_N ≤ Z_∞` the bias
/// is one-sided: the estimate targets `F_N(x) ≥ F_∞(x)`.
pub fn estimate_cdf_inf(cfg: &SimConfig, x_grid: &[f64]) -> Result<Vec<EstimateWithCI>> {
    cfg.validate()?;
    check_grid(x_grid)?;
    if let Some(x) = x_grid.iter().find(|&&x| x <= 1.0 + BRANCH_EXCLUSION) {
        return domain(format!(
            "grid points must exceed 1 + {BRANCH_EXCLUSION}, got {x}"
        ));
    }
    let ok = |n: usize| x_grid.iter().all(|&x| tail_upper_bound(x, n) < BIAS_TARGET);
    let n = smallest_depth(1, cfg.depth, ok).map_err(|required| Error::Depth {
        required,
        configured: cfg.depth,
    })?;
    check_depth(n, cfg)?;
    let hits = grid_frequencies(cfg, 1, n, 0.0, x_grid);
    Ok(hits
        .into_iter()
        .zip(x_grid)
        .map(|(h, &x)| EstimateWithCI::frequency(h, cfg.samples, tail_upper_bound(x, n)))
        .collect())
}

/// Chernoff rate `I(y) = y − 1 − ln y` of unit-exponential sample means.
pub fn chernoff_rate(y: f64) -> f64 {
    let d = y - 1.0;
    d - d.ln_1p()
}

/// Bound on the `M_2` truncation bias at `x` for simulated depth `n`.
fn m2_bias(x: f64, n: usize) -> f64 {
    let rate = chernoff_rate(x);
    if x > 1.0 {
        // Σ_{k>n} e^(−k·I)
        (-(n as f64 + 1.0) * rate).exp() / -(-rate).exp_m1()
    } else {
        (-(n as f64) * rate).exp()
    }
}

/// Estimates of `P(M_2 ≤ x)` from `max_{2≤i≤N} X̄_i`. Above 1 the simulated
/// frequency exceeds the true one by at most `Σ_{k>N} P(X̄_k > x)`; below 1 the
/// true value is zero and the frequency is at most `P(X̄_N ≤ x)`.
pub fn estimate_cdf_m2(cfg: &SimConfig, x_grid: &[f64]) -> Result<Vec<EstimateWithCI>> {
    cfg.validate()?;
    check_grid(x_grid)?;
    if let Some(x) = x_grid
        .iter()
        .find(|&&x| (x - 1.0).abs() <= BRANCH_EXCLUSION || x < 0.0)
    {
        return domain(format!(
            "grid points must be >= 0 and differ from 1 by more than {BRANCH_EXCLUSION}, got {x}"
        ));
    }
    let ok = |n: usize| x_grid.iter().all(|&x| m2_bias(x, n) < BIAS_TARGET);
    let n = smallest_depth(2, cfg.depth, ok).map_err(|required| Error::Depth {
        required,
        configured: cfg.depth,
    })?;
    check_depth(n, cfg)?;
    let hits = grid_frequencies(cfg, 2, n, 0.0, x_grid);
    Ok(hits
        .into_iter()
        .zip(x_grid)
        .map(|(h, &x)| EstimateWithCI::frequency(h, cfg.samples, m2_bias(x, n)))
        .collect())
}

/// Bound on `P(ruin after the horizon, not before)`. Ruin at time `k` needs
/// `X̄_k > c + u/k`, which is at least `c + min(u, 0)/(H+1)` for `k > H`.
pub fn ruin_horizon_bias(m: &RiskModel, horizon: usize) -> f64 {
    let h = horizon as f64;
    let y = m.c() + m.u().min(0.0) / (h + 1.0);
    if y <= 1.0 {
        return 1.0;
    }
    let rate = chernoff_rate(y);
    ((-(h + 1.0) * rate).exp() / -(-rate).exp_m1()).min(1.0)
}

/// Frequency of `u + c·n − S_n < 0` for some `n ≤ cfg.horizon`.
pub fn estimate_ruin(cfg: &SimConfig, m: &RiskModel) -> Result<EstimateWithCI> {
    cfg.validate()?;
    let (u, c, horizon) = (m.u(), m.c(), cfg.horizon);
    let blocks = run_blocks(cfg, |rng, count| {
        let mut ruined = 0u64;
        for _ in 0..count {
            let mut s = 0.0;
            for i in 1..=horizon {
                s += exponential(rng);
                if u + c * i as f64 - s < 0.0 {
                    ruined += 1;
                    break;
                }
            }
        }
        ruined
    });
    let hits = blocks.into_iter().sum();
    Ok(EstimateWithCI::frequency(
        hits,
        cfg.samples,
        ruin_horizon_bias(m, horizon),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{cdf_finite, cdf_inf, cdf_m2, cdf_shifted};
    use crate::mc::stats::{ks_critical_value_1pct, ks_statistic};
    use crate::ruin::ruin_probability;

    fn cfg(samples: usize, workers: usize) -> SimConfig {
        SimConfig {
            seed: 11,
            samples,
            depth: 10_000,
            workers,
            horizon: 200,
        }
    }

    fn lam(l: f64) -> ShiftedParam {
        ShiftedParam::new(l).unwrap()
    }

    #[test]
    fn first_index_is_exponential() {
        let c = cfg(20_000, 3);
        let mut xs = simulate_running_max(&c, 1, lam(0.0)).unwrap();
        let d = ks_statistic(&mut xs, |x| -(-x).exp_m1());
        assert!(d < ks_critical_value_1pct(c.samples), "{d}");
    }

    #[test]
    fn deterministic_for_fixed_workers() {
        let c = cfg(5_000, 4);
        let a = simulate_running_max(&c, 7, lam(0.3)).unwrap();
        let b = simulate_running_max(&c, 7, lam(0.3)).unwrap();
        assert_eq!(a, b);
        let other = simulate_running_max(&cfg(5_000, 2), 7, lam(0.3)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn worker_count_does_not_change_the_law() {
        let grid = [1.0, 1.5];
        let a = estimate_cdf_running_max(&cfg(200_000, 1), 5, lam(0.0), &grid).unwrap();
        let b = estimate_cdf_running_max(&cfg(200_000, 5), 5, lam(0.0), &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let se = (x.std_error.powi(2) + y.std_error.powi(2)).sqrt();
            assert!((x.estimate - y.estimate).abs() <= 5.0 * se);
        }
    }

    #[test]
    fn finite_and_shifted_laws() {
        let c = cfg(400_000, 2);
        let est = estimate_cdf_running_max(&c, 5, lam(0.0), &[1.0]).unwrap();
        assert!(
            est[0].agrees_with(cdf_finite(1.0, 5).unwrap(), 4.0),
            "{est:?}"
        );
        let est = estimate_cdf_running_max(&c, 3, lam(0.5), &[1.5]).unwrap();
        assert!(est[0].agrees_with(cdf_shifted(1.5, 3, lam(0.5)).unwrap(), 4.0));
    }

    #[test]
    fn limit_law_with_certified_depth() {
        let c = cfg(200_000, 2);
        let grid = [1.2, 2.0, 4.0];
        let est = estimate_cdf_inf(&c, &grid).unwrap();
        for (e, &x) in est.iter().zip(&grid) {
            assert!(e.bias_bound < BIAS_TARGET);
            assert!(e.agrees_with(cdf_inf(x), 4.0), "x = {x}: {e:?}");
        }
        assert!(estimate_cdf_inf(&c, &[1.0005]).is_err());
        let shallow = SimConfig { depth: 10, ..c };
        assert!(matches!(
            estimate_cdf_inf(&shallow, &[1.2]),
            Err(Error::Depth { .. })
        ));
    }

    #[test]
    fn m2_law() {
        let c = cfg(200_000, 2);
        let grid = [0.5, 1.5, 3.0];
        let est = estimate_cdf_m2(&c, &grid).unwrap();
        for (e, &x) in est.iter().zip(&grid) {
            assert!(e.agrees_with(cdf_m2(x), 4.0), "x = {x}: {e:?}");
        }
        assert!(est[0].estimate < 1e-3);
        assert!(estimate_cdf_m2(&c, &[1.0]).is_err());
    }

    #[test]
    fn ruin_frequencies() {
        let c = cfg(200_000, 2);
        let m = RiskModel::new(1.0, 0.0).unwrap();
        let e = estimate_ruin(&c, &m).unwrap();
        assert!(e.bias_bound < 1e-12);
        assert!(e.agrees_with(ruin_probability(&m).unwrap(), 4.0), "{e:?}");
        let rich = RiskModel::new(1.0, 60.0).unwrap();
        assert!(estimate_ruin(&c, &rich).unwrap().estimate < 1e-4);
        let poor = RiskModel::new(0.5, -2.0).unwrap();
        assert_eq!(estimate_ruin(&c, &poor).unwrap().estimate, 1.0);
    }

    #[test]
    fn depth_search() {
        assert_eq!(smallest_depth(1, 1000, |n| n >= 37), Ok(37));
        assert_eq!(smallest_depth(2, 1000, |n| n >= 1), Ok(2));
        assert!(smallest_depth(1, 100, |_| false).is_err());
    }

    #[test]
    fn chernoff_rate_values() {
        assert_eq!(chernoff_rate(1.0), 0.0);
        assert!((chernoff_rate(2.0) - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!(chernoff_rate(0.5) > 0.0);
    }
}
