//! Scalar kernels shared by the analytic model and the simulator: the
//! regularized incomplete gamma function for integer shape, the Nakagami-m
//! distribution, and decibel conversions.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{check_at_least, check_positive, Error, Result};

/// Nakagami-m fading parameters. The shape is an integer so that the CDF has
/// the closed Erlang form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    pub m: u32,
    pub omega: f64,
}

impl NakagamiParams {
    pub fn new(m: u32, omega: f64) -> Result<Self> {
        let p = NakagamiParams { m, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid("nakagami m", self.m as f64, "shape must be >= 1"));
        }
        check_positive("nakagami omega", self.omega)?;
        Ok(())
    }

    /// `P[g > x]` for amplitude `g`.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        nakagami_ccdf(self, x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        nakagami_sample(self, rng)
    }
}

/// Terms of `e^{-x} x^k / k!` for k = 0.. are generated by recurrence; this
/// returns `e^{-x} * sum_{k<m} x^k/k!`, the upper tail `Γ(m,x)/Γ(m)`.
fn erlang_upper(m: u32, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut sum = term;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Lower tail by its power series `e^{-x} sum_{k>=m} x^k/k!`, accurate when
/// the result is small.
fn erlang_lower_series(m: u32, x: f64) -> f64 {
    let mut term = (-x).exp();
    for k in 1..=m {
        term *= x / k as f64;
    }
    let mut sum = term;
    let mut k = m as f64 + 1.0;
    while term > sum * f64::EPSILON * 0.25 {
        term *= x / k;
        sum += term;
        k += 1.0;
    }
    sum
}

fn check_gamma_args(m: u32, x: f64) -> Result<()> {
    if m < 1 {
        return Err(Error::invalid("m", m as f64, "shape must be >= 1"));
    }
    check_at_least("x", x, 0.0)?;
    Ok(())
}

/// Regularized lower incomplete gamma `γ(m, x) / (m-1)!` for integer `m >= 1`.
pub fn regularized_lower_gamma(m: u32, x: f64) -> Result<f64> {
    check_gamma_args(m, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    // The series avoids cancellation where the result is tiny; past the mode
    // the complement of the finite Erlang sum is exact.
    if x < m as f64 {
        Ok(erlang_lower_series(m, x).min(1.0))
    } else {
        Ok(1.0 - erlang_upper(m, x))
    }
}

/// Regularized upper incomplete gamma `Γ(m, x) / (m-1)!` for integer `m >= 1`.
pub fn regularized_upper_gamma(m: u32, x: f64) -> Result<f64> {
    check_gamma_args(m, x)?;
    if x < m as f64 {
        Ok(1.0 - erlang_lower_series(m, x).min(1.0))
    } else {
        Ok(erlang_upper(m, x))
    }
}

/// Complementary CDF of a Nakagami-m amplitude:
/// `P[g > x] = 1 - P(m, (m/Ω) x²)`.
pub fn nakagami_ccdf(p: &NakagamiParams, x: f64) -> Result<f64> {
    p.validate()?;
    check_at_least("x", x, 0.0)?;
    regularized_upper_gamma(p.m, p.m as f64 / p.omega * x * x)
}

pub fn nakagami_cdf(p: &NakagamiParams, x: f64) -> Result<f64> {
    p.validate()?;
    check_at_least("x", x, 0.0)?;
    regularized_lower_gamma(p.m, p.m as f64 / p.omega * x * x)
}

/// Draw a Nakagami-m amplitude. The power `g²` is Gamma(m, Ω/m), built as a
/// sum of `m` unit exponentials.
pub fn nakagami_sample<R: Rng + ?Sized>(p: &NakagamiParams, rng: &mut R) -> f64 {
    let mut power = 0.0;
    for _ in 0..p.m {
        let e: f64 = rng.sample(Exp1);
        power += e;
    }
    (power * p.omega / p.m as f64).sqrt()
}

pub fn db_to_linear(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(Error::invalid("dB value", db, "must be finite"));
    }
    Ok(10f64.powf(db / 10.0))
}

pub fn dbm_to_watt(dbm: f64) -> Result<f64> {
    if !dbm.is_finite() {
        return Err(Error::invalid("dBm value", dbm, "must be finite"));
    }
    Ok(10f64.powf(dbm / 10.0) * 1e-3)
}
