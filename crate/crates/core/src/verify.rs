//! Verification suites behind `maxmean verify`.
//!
//! Every check compares a computed `value` with an independent `target`
//! within `tolerance` (plus `bias_bound` for simulation checks). Reports are
//! deterministic functions of the options.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::{
    cdf_inf, cdf_inf_series, cdf_m2, cdf_shifted, cdf_shifted_inf, moment, pdf_inf, quantile_inf,
    quantile_shifted_inf, upper_percentage_point, Depth, ShiftedParam,
};
use crate::error::{domain, Error, Result};
use crate::genpoisson::{self, GenPoissonParams};
use crate::mc::stats::chi_square_gof;
use crate::mc::{self, SimConfig, WeakConvergenceOptions};
use crate::ruin::{min_capital, min_capital_root, ruin_probability, RiskModel};
use crate::series::{identity_sum, SeriesPolicy};
use crate::special_fn::{lambert_w0, BranchPointPolicy};
use crate::volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Series,
    Volume,
    Quantile,
    Ruin,
    WeakConvergence,
    GenPoisson,
    Simulation,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = [
        "series",
        "volume",
        "quantile",
        "ruin",
        "weak-convergence",
        "genpoisson",
        "simulation",
        "all",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Series => "series",
            Self::Volume => "volume",
            Self::Quantile => "quantile",
            Self::Ruin => "ruin",
            Self::WeakConvergence => "weak-convergence",
            Self::GenPoisson => "genpoisson",
            Self::Simulation => "simulation",
            Self::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "series" => Self::Series,
            "volume" => Self::Volume,
            "quantile" => Self::Quantile,
            "ruin" => Self::Ruin,
            "weak-convergence" => Self::WeakConvergence,
            "genpoisson" => Self::GenPoisson,
            "simulation" => Self::Simulation,
            "all" => Self::All,
            other => return domain(format!("unknown suite '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub bias_bound: f64,
}

impl Check {
    /// `|value − target| ≤ tolerance + bias_bound`.
    fn close(
        name: impl Into<String>,
        value: f64,
        target: f64,
        tolerance: f64,
        bias_bound: f64,
    ) -> Self {
        Self {
            name: name.into(),
            pass: (value - target).abs() <= tolerance + bias_bound,
            value,
            target,
            tolerance,
            bias_bound,
        }
    }

    /// A worst-case error over a grid checked against zero.
    fn max_error(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self::close(name, error, 0.0, tolerance, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seed: u64,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub workers: usize,
    /// Largest degree of the exact volume check.
    pub n_max: u32,
    /// Index `n` of the weak-convergence test.
    pub weak_n: usize,
    /// Optional second index; adds a KS check there and the check that the
    /// statistic does not increase from `weak_n` to it.
    pub weak_n_compare: Option<usize>,
    pub weak_samples: usize,
    /// Sample count of each simulation check.
    pub sim_samples: usize,
    pub gof_draws: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 1,
            n_max: volume::DEFAULT_MAX_DEGREE,
            weak_n: 10_000,
            weak_n_compare: None,
            weak_samples: 10_000,
            sim_samples: 1_000_000,
            gof_draws: 1_000_000,
        }
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let checks = match suite {
        Suite::Series => series_checks()?,
        Suite::Volume => volume_checks(opts.n_max),
        Suite::Quantile => quantile_checks()?,
        Suite::Ruin => ruin_checks()?,
        Suite::WeakConvergence => weak_convergence_checks(opts)?,
        Suite::GenPoisson => genpoisson_checks(opts)?,
        Suite::Simulation => simulation_checks(opts)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Series,
                Suite::Volume,
                Suite::Quantile,
                Suite::Ruin,
                Suite::GenPoisson,
                Suite::Simulation,
                Suite::WeakConvergence,
            ] {
                all.extend(run(s, opts)?.checks);
            }
            all
        }
    };
    Ok(Report {
        suite: suite.name().to_string(),
        checks,
        seed: opts.seed,
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = if points > 1 {
        (hi - lo) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points).map(move |i| lo + step * i as f64)
}

fn series_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let policy = SeriesPolicy::new(1e-9, 1_000_000)?;
    let mut worst = 0.0f64;
    for x in grid(0.0, 1.0, 101) {
        worst = worst.max((identity_sum(x, &policy)?.value() - 1.0).abs());
    }
    checks.push(Check::max_error("series identity on [0, 1]", worst, 1e-8));

    let policy = SeriesPolicy::default();
    let mut worst = 0.0f64;
    let mut refused_far_from_one = 0usize;
    for x in grid(0.0, 10.0, 1001) {
        if (x - 1.0).abs() < 1e-3 {
            continue;
        }
        match cdf_inf_series(x, &policy) {
            Ok(v) => worst = worst.max((v - cdf_inf(x)).abs()),
            Err(Error::Truncation { .. }) if (x - 1.0).abs() <= 0.05 => {}
            Err(_) => refused_far_from_one += 1,
        }
    }
    checks.push(Check::max_error(
        "series vs closed form on [0, 10]",
        worst,
        policy.abs_tol + 1e-12,
    ));
    checks.push(Check::max_error(
        "series refusals away from x = 1",
        refused_far_from_one as f64,
        0.0,
    ));

    let bp = BranchPointPolicy::default();
    let mut worst = 0.0f64;
    for i in 1..=200 {
        let x = 1.0 + 19.0 * i as f64 / 200.0;
        let w = lambert_w0(-x * (-x).exp(), &bp)?;
        worst = worst.max((cdf_inf(x) - (1.0 + w / x)).abs());
    }
    checks.push(Check::max_error(
        "Lambert W representation on (1, 20]",
        worst,
        1e-10,
    ));

    let mut worst = 0.0f64;
    let mut positive = true;
    for i in 1..=100 {
        let x = 1.01 + (10.0 - 1.01) * i as f64 / 100.0;
        let h = 1e-5;
        let fd = (cdf_inf(x + h) - cdf_inf(x - h)) / (2.0 * h);
        let f = pdf_inf(x).value;
        positive &= f > 0.0;
        worst = worst.max((f - fd).abs());
    }
    checks.push(Check::max_error(
        "density vs central differences on (1.01, 10]",
        worst,
        1e-7,
    ));
    checks.push(Check::max_error(
        "density positivity on (1.01, 10]",
        f64::from(u8::from(!positive)),
        0.0,
    ));

    let basel = PI * PI / 6.0;
    let mean = moment(Depth::Infinite, 1.0)?;
    let second = moment(Depth::Infinite, 2.0)?;
    checks.push(Check::close("mean of Z_inf", mean, basel, 1e-10, 0.0));
    checks.push(Check::close(
        "variance of Z_inf",
        second - mean * mean,
        basel * (2.0 - basel),
        1e-10,
        0.0,
    ));
    checks.push(Check::close(
        "E Z_3",
        moment(Depth::Finite(3), 1.0)?,
        49.0 / 36.0,
        0.0,
        0.0,
    ));
    Ok(checks)
}

fn volume_checks(n_max: u32) -> Vec<Check> {
    let mut mismatched = 0u32;
    let mut specialization_errors = 0u32;
    let mut v = volume::BivariatePoly::one();
    for n in 0..=n_max {
        let closed = volume::closed_form(n);
        if v != closed {
            mismatched += 1;
        }
        let at_zero = closed.at_t_zero();
        let expected = if n == 0 {
            num_rational::BigRational::from_integer(1.into())
        } else {
            num_rational::BigRational::new(
                num_bigint::BigInt::from(n + 1).pow(n - 1),
                (1..=n).fold(num_bigint::BigInt::from(1), |a, i| a * i),
            )
        };
        if at_zero.len() != 1 || at_zero.get(&n) != Some(&expected) {
            specialization_errors += 1;
        }
        v = volume::recursion_step(&v);
    }
    vec![
        Check::max_error(
            format!("recursion equals closed form for n <= {n_max} (mismatches)"),
            f64::from(mismatched),
            0.0,
        ),
        Check::max_error(
            format!("t = 0 specialization for n <= {n_max} (mismatches)"),
            f64::from(specialization_errors),
            0.0,
        ),
    ]
}

fn quantile_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..=999 {
        let u = 0.001 + 0.998 * i as f64 / 1000.0;
        worst = worst.max((cdf_inf(quantile_inf(u)?) - u).abs());
    }
    checks.push(Check::max_error(
        "quantile round trip, 999 points",
        worst,
        1e-10,
    ));

    let mut worst = 0.0f64;
    for lambda in [-0.5, 0.0, 0.5, 1.0, 3.0] {
        let p = ShiftedParam::new(lambda)?;
        for i in 1..=99 {
            let u = i as f64 / 100.0;
            worst = worst.max((cdf_shifted_inf(quantile_shifted_inf(u, p)?, p) - u).abs());
        }
    }
    checks.push(Check::max_error(
        "shifted quantile round trip",
        worst,
        1e-10,
    ));

    let mut worst = 0.0f64;
    for i in 1..100 {
        let a = i as f64 / 100.0;
        worst = worst.max((cdf_inf(upper_percentage_point(a)?) - (1.0 - a)).abs());
    }
    checks.push(Check::max_error("upper percentage points", worst, 1e-10));
    checks.push(Check::close(
        "median of Z_inf",
        quantile_inf(0.5)?,
        2.0 * std::f64::consts::LN_2,
        1e-15,
        0.0,
    ));
    Ok(checks)
}

fn ruin_checks() -> Result<Vec<Check>> {
    let mut checks = vec![Check::close(
        "u(0.5, 0.5)",
        min_capital(0.5, 0.5)?,
        -0.3107,
        5e-4,
        0.0,
    )];
    let (mut round_trip, mut two_paths, mut shifted) = (0.0f64, 0.0f64, 0.0f64);
    for alpha in [0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9] {
        for theta in [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let u = min_capital(alpha, theta)?;
            let psi = ruin_probability(&RiskModel::new(theta, u)?)?;
            round_trip = round_trip.max((psi - alpha).abs());
            two_paths = two_paths.max((min_capital_root(alpha, theta)? - u).abs());
            let c = 1.0 + theta;
            let other = 1.0 - cdf_shifted_inf(c, ShiftedParam::new(u / c)?);
            shifted = shifted.max((psi - other).abs());
        }
    }
    checks.push(Check::max_error(
        "ruin round trip on 9x7 grid",
        round_trip,
        1e-10,
    ));
    checks.push(Check::max_error(
        "closed form vs capital equation root",
        two_paths,
        1e-10,
    ));
    checks.push(Check::max_error("ruin vs shifted family", shifted, 1e-12));
    Ok(checks)
}

fn weak_convergence_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let cfg = SimConfig {
        seed: opts.seed,
        samples: opts.weak_samples,
        workers: opts.workers,
        ..SimConfig::default()
    };
    let wopts = WeakConvergenceOptions::default();
    let first = mc::weak_convergence_test(&cfg, opts.weak_n, &wopts)?;
    let ks = |r: &mc::WeakConvergenceReport| Check {
        name: format!("KS of sqrt(n) M_n vs half-normal, n = {}", r.n),
        pass: r.pass,
        value: r.statistic_upper,
        target: 0.0,
        tolerance: r.critical_value,
        bias_bound: r.bias_bound,
    };
    let mut checks = vec![ks(&first)];
    if let Some(n2) = opts.weak_n_compare {
        let second = mc::weak_convergence_test(&cfg, n2, &wopts)?;
        checks.push(ks(&second));
        checks.push(Check {
            name: format!(
                "KS does not increase from n = {} to n = {}",
                first.n, second.n
            ),
            pass: second.statistic <= first.statistic,
            value: second.statistic,
            target: first.statistic,
            tolerance: 0.0,
            bias_bound: first.bias_bound + second.bias_bound,
        });
    }
    Ok(checks)
}

fn genpoisson_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        for theta in [0.5, 1.0, 2.0, 5.0] {
            let p = GenPoissonParams::new(alpha, theta)?;
            let table = genpoisson::cdf_table(&p, 1.0 - 1e-13)?;
            let total = genpoisson::cdf(table.len() as u64 - 1, &p);
            worst = worst.max((total - 1.0).abs());
        }
    }
    let mut checks = vec![Check::max_error(
        "generalized Poisson normalization",
        worst,
        1e-10,
    )];

    let p = GenPoissonParams::new(0.5, 1.0)?;
    let draws = genpoisson::sample(&p, opts.gof_draws, opts.seed)?;
    let max = draws.iter().copied().max().unwrap_or(0) as usize;
    let mut observed = vec![0u64; max + 1];
    draws.iter().for_each(|&k| observed[k as usize] += 1);
    let probs: Vec<f64> = (0..=max as u64).map(|k| genpoisson::pmf(k, &p)).collect();
    let gof = chi_square_gof(&observed, &probs, opts.gof_draws as u64)?;
    checks.push(Check {
        name: format!("sampler chi-square p-value ({} draws)", opts.gof_draws),
        pass: gof.p_value > 1e-3,
        value: gof.p_value,
        target: 1e-3,
        tolerance: 0.0,
        bias_bound: 0.0,
    });
    Ok(checks)
}

fn sim_check(name: String, e: &mc::EstimateWithCI, target: f64) -> Check {
    Check::close(name, e.estimate, target, 4.0 * e.std_error, e.bias_bound)
}

fn simulation_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let cfg = SimConfig {
        seed: opts.seed,
        samples: opts.sim_samples,
        workers: opts.workers,
        ..SimConfig::default()
    };
    let zero = ShiftedParam::new(0.0)?;
    let half = ShiftedParam::new(0.5)?;
    let mut checks = Vec::new();

    let e = mc::estimate_cdf_running_max(&cfg, 5, zero, &[1.0])?;
    checks.push(sim_check(
        "simulated F_5(1)".into(),
        &e[0],
        crate::dist::cdf_finite(1.0, 5)?,
    ));

    let e = mc::estimate_cdf_running_max(&cfg, 3, half, &[1.5])?;
    checks.push(sim_check(
        "simulated F_3;0.5(1.5)".into(),
        &e[0],
        cdf_shifted(1.5, 3, half)?,
    ));

    let inf_grid = [1.2, 2.0, 4.0];
    for (e, &x) in mc::estimate_cdf_inf(&cfg, &inf_grid)?.iter().zip(&inf_grid) {
        checks.push(sim_check(format!("simulated F_inf({x})"), e, cdf_inf(x)));
    }

    let m2_grid = [0.5, 1.5, 3.0];
    for (e, &x) in mc::estimate_cdf_m2(&cfg, &m2_grid)?.iter().zip(&m2_grid) {
        checks.push(sim_check(format!("simulated F_M2({x})"), e, cdf_m2(x)));
    }

    let ruin_cfg = SimConfig {
        horizon: 200,
        ..cfg
    };
    for (theta, u) in [(1.0, 0.0), (0.5, 0.5), (0.5, -0.3107)] {
        let m = RiskModel::new(theta, u)?;
        let e = mc::estimate_ruin(&ruin_cfg, &m)?;
        checks.push(sim_check(
            format!("simulated ruin frequency (theta = {theta}, u = {u})"),
            &e,
            ruin_probability(&m)?,
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_suites_pass() {
        for suite in [Suite::Series, Suite::Volume, Suite::Quantile, Suite::Ruin] {
            let report = run(suite, &VerifyOptions::default()).unwrap();
            for c in &report.checks {
                assert!(c.pass, "{}: {c:?}", suite.name());
            }
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = VerifyOptions {
            sim_samples: 20_000,
            gof_draws: 20_000,
            seed: 9,
            ..VerifyOptions::default()
        };
        let a = serde_json::to_string(&run(Suite::Simulation, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&run(Suite::Simulation, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
