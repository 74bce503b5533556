//! Exact check of the volume polynomials
//! `V_n(x, t) = (1/n!)·(x+t)·((n+1)x + t)^(n−1)`, `V_0 = 1`,
//! against the recursion `V_{n+1}(x, t) = ∫_0^(x+t) V_n(x, x+t−y) dy`.
//!
//! Coefficients are arbitrary-precision rationals, so equality is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Default largest degree checked by the verification suite.
pub const DEFAULT_MAX_DEGREE: u32 = 12;

/// Polynomial in `x` and `t` with exact rational coefficients, keyed by
/// `(degree in x, degree in t)`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePoly {
    coefficients: BTreeMap<(u32, u32), BigRational>,
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, BigRational::one());
        p
    }

    pub fn add_term(&mut self, dx: u32, dt: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self
            .coefficients
            .entry((dx, dt))
            .or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coefficients.remove(&(dx, dt));
        }
    }

    pub fn coefficient(&self, dx: u32, dt: u32) -> BigRational {
        self.coefficients
            .get(&(dx, dt))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.coefficients.iter()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Largest `dx + dt` over stored terms, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.coefficients.keys().map(|(a, b)| a + b).max()
    }

    /// Polynomial in `x` obtained by setting `t = 0`, as `(degree, coefficient)`.
    pub fn at_t_zero(&self) -> BTreeMap<u32, BigRational> {
        self.coefficients
            .iter()
            .filter(|((_, dt), _)| *dt == 0)
            .map(|((dx, _), c)| (*dx, c.clone()))
            .collect()
    }

    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|((dx, dt), c)| {
                c.to_f64().unwrap_or(f64::NAN) * x.powi(*dx as i32) * t.powi(*dt as i32)
            })
            .sum()
    }
}

/// One step of the recursion: antidifferentiate in the second variable, then
/// substitute `s = x + t`. `x^i·s^j` becomes `x^i·(x+t)^(j+1)/(j+1)`.
pub fn recursion_step(v: &BivariatePoly) -> BivariatePoly {
    let mut out = BivariatePoly::zero();
    for (&(i, j), c) in &v.coefficients {
        let scaled = c / BigRational::from_integer(BigInt::from(j + 1));
        for m in 0..=j + 1 {
            let b = BigRational::from_integer(binomial(j + 1, m));
            out.add_term(i + j + 1 - m, m, &scaled * b);
        }
    }
    out
}

/// `V_n` expanded by the binomial theorem.
pub fn closed_form(n: u32) -> BivariatePoly {
    if n == 0 {
        return BivariatePoly::one();
    }
    let inv_fact = BigRational::new(BigInt::one(), factorial(n));
    // ((n+1)x + t)^(n−1) = Σ_m C(n−1, m)(n+1)^(n−1−m) x^(n−1−m) t^m
    let mut power = BivariatePoly::zero();
    for m in 0..n {
        let c = binomial(n - 1, m) * BigInt::from(n + 1).pow(n - 1 - m);
        power.add_term(n - 1 - m, m, BigRational::from_integer(c));
    }
    let mut out = BivariatePoly::zero();
    for (&(i, j), c) in &power.coefficients {
        let c = c * &inv_fact;
        out.add_term(i + 1, j, c.clone());
        out.add_term(i, j + 1, c);
    }
    out
}

/// `V_n` obtained by iterating [`recursion_step`] `n` times from `V_0 = 1`.
pub fn by_recursion(n: u32) -> BivariatePoly {
    (0..n).fold(BivariatePoly::one(), |v, _| recursion_step(&v))
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((dx, dt), c) in self.coefficients.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            match dx {
                0 => {}
                1 => f.write_str("*x")?,
                d => write!(f, "*x^{d}")?,
            }
            match dt {
                0 => {}
                1 => f.write_str("*t")?,
                d => write!(f, "*t^{d}")?,
            }
        }
        Ok(())
    }
}
