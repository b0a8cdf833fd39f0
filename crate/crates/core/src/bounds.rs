//! Closed-form error bounds for the regularized trapezoidal schemes.
//!
//! Two scheme families are covered:
//!
//! * second order, regularizer `(δ + a − z)^{-2}` with a free pole offset `a`;
//! * order `m`, regularizer `(2δ − z)^{-m}` with `m` even.
//!
//! Each bound splits into a discretization part `E_D` (infinite equispaced sum
//! versus the integral) and a truncation part `E_T` (the `|k| > N` tail). All
//! exponential factors are assembled in log space, so a result may saturate
//! to `0` or `+∞`; `+∞` is a legal answer meaning "no guarantee".

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::hypergeo::{gamma_ratio, hyp_tail, EvenOrder};

/// Growth constants `(M, ω)` of `‖K(t)‖ ≤ M e^{ωt}`, already shifted so
/// that `ω = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupConstants {
    m: f64,
    omega: f64,
}

impl SemigroupConstants {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !m.is_finite() || m < 1.0 {
            return Err(Error::domain(format!(
                "growth constant M must be >= 1, got {m}"
            )));
        }
        if omega != 0.0 {
            return Err(Error::domain(format!(
                "growth rate must be 0 (shift the generator by ω first), got {omega}"
            )));
        }
        Ok(SemigroupConstants { m, omega })
    }

    /// `M = 1, ω = 0`.
    pub const fn contraction() -> Self {
        SemigroupConstants { m: 1.0, omega: 0.0 }
    }

    #[inline]
    pub fn growth(&self) -> f64 {
        self.m
    }

    #[inline]
    pub fn rate(&self) -> f64 {
        self.omega
    }
}

impl Default for SemigroupConstants {
    fn default() -> Self {
        Self::contraction()
    }
}

/// Evaluated bound: `total = e_disc + e_trunc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub e_disc: f64,
    pub e_trunc: f64,
    pub total: f64,
    /// `‖(2δ−A)^m x‖` or `‖(δ+a−A)² x‖`, whichever the scheme uses.
    pub graph_norm: f64,
}

/// Regularizer family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// `(δ + a − z)^{-2}`.
    SecondOrder { a: f64 },
    /// `(2δ − z)^{-m}`.
    HighOrder { m: EvenOrder },
}

impl Scheme {
    pub fn high_order(m: u32) -> Result<Self> {
        Ok(Scheme::HighOrder {
            m: EvenOrder::new(m)?,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::domain(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::domain(format!(
            "{name} must be non-negative and finite, got {v}"
        )));
    }
    Ok(())
}

fn node_count(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    Ok(n as f64)
}

/// `ln(e^x − 1)` for `x > 0`.
pub(crate) fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `exp(log_value) · norm`, with `norm = 0` giving exactly 0.
fn scaled(log_value: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        (log_value + norm.ln()).exp()
    }
}

/// Discretization bound of the order-`m` scheme:
/// `M e^{3δt/2} / (δ^m (e^{δπ/h} − 1)) · 2^{m+1} G(m)/π · ‖(2δ−A)^m x‖`.
pub fn disc_bound_m(
    c: SemigroupConstants,
    delta: f64,
    m: EvenOrder,
    t: f64,
    h: f64,
    graph_norm: f64,
) -> Result<f64> {
    positive("δ", delta)?;
    positive("h", h)?;
    nonnegative("t", t)?;
    nonnegative("graph norm", graph_norm)?;
    let mf = m.as_f64();
    let log_value = c.growth().ln() + 1.5 * delta * t - mf * delta.ln() - ln_expm1(delta * PI / h)
        + (mf + 1.0) * LN_2
        + gamma_ratio(m).ln()
        - PI.ln();
    Ok(scaled(log_value, graph_norm))
}

/// Truncation bound of the order-`m` scheme:
/// `M e^{δt} / δ^m · T_m(hN/δ)/π · ‖(2δ−A)^m x‖`.
pub fn trunc_bound_m(
    c: SemigroupConstants,
    delta: f64,
    m: EvenOrder,
    t: f64,
    h: f64,
    n: u64,
    graph_norm: f64,
) -> Result<f64> {
    positive("δ", delta)?;
    positive("h", h)?;
    nonnegative("t", t)?;
    nonnegative("graph norm", graph_norm)?;
    let nf = node_count(n)?;
    let tail = hyp_tail(m, h * nf / delta)?;
    if tail == 0.0 {
        return Ok(0.0);
    }
    let log_value = c.growth().ln() + delta * t - m.as_f64() * delta.ln() + tail.ln() - PI.ln();
    Ok(scaled(log_value, graph_norm))
}

/// Discretization bound of the second-order scheme with pole offset `a`:
/// `M e^{δt}/(δa) · 4 e^{σt/2}/(e^{σπ/h} − 1) · ‖(δ+a−A)² x‖`, `σ = min(δ, a)`.
pub fn disc_bound_2(
    c: SemigroupConstants,
    delta: f64,
    a: f64,
    t: f64,
    h: f64,
    graph_norm: f64,
) -> Result<f64> {
    positive("δ", delta)?;
    positive("a", a)?;
    positive("h", h)?;
    nonnegative("t", t)?;
    nonnegative("graph norm", graph_norm)?;
    let sigma = delta.min(a);
    let log_value = c.growth().ln() + delta * t - (delta * a).ln() + 2.0 * LN_2 + 0.5 * sigma * t
        - ln_expm1(sigma * PI / h);
    Ok(scaled(log_value, graph_norm))
}

/// Truncation bound of the second-order scheme:
/// `M e^{δt}/(δa) · (1/2 − atan(hN/a)/π) · ‖(δ+a−A)² x‖`.
pub fn trunc_bound_2(
    c: SemigroupConstants,
    delta: f64,
    a: f64,
    t: f64,
    h: f64,
    n: u64,
    graph_norm: f64,
) -> Result<f64> {
    positive("δ", delta)?;
    positive("a", a)?;
    positive("h", h)?;
    nonnegative("t", t)?;
    nonnegative("graph norm", graph_norm)?;
    let nf = node_count(n)?;
    // 1/2 − atan(y)/π = atan(1/y)/π without cancellation
    let bracket = 1.0_f64.atan2(h * nf / a) / PI;
    if bracket == 0.0 {
        return Ok(0.0);
    }
    let log_value = c.growth().ln() + delta * t - (delta * a).ln() + bracket.ln();
    Ok(scaled(log_value, graph_norm))
}

/// Leading-order truncation bound
/// `M e^{δt}/(π δ^m) · (δ/(hN))^{m−1}/(m−1) · ‖(2δ−A)^m x‖`.
pub fn trunc_bound_asymptotic(
    c: SemigroupConstants,
    delta: f64,
    m: EvenOrder,
    t: f64,
    h: f64,
    n: u64,
    graph_norm: f64,
) -> Result<f64> {
    positive("δ", delta)?;
    positive("h", h)?;
    nonnegative("t", t)?;
    nonnegative("graph norm", graph_norm)?;
    let nf = node_count(n)?;
    let p = m.as_f64() - 1.0;
    let log_value = c.growth().ln() + delta * t - PI.ln() - m.as_f64() * delta.ln()
        + p * (delta / (h * nf)).ln()
        - p.ln();
    Ok(scaled(log_value, graph_norm))
}

/// Both bound components at time `t` for the given scheme.
pub fn total_budget(
    scheme: Scheme,
    c: SemigroupConstants,
    delta: f64,
    t: f64,
    h: f64,
    n: u64,
    graph_norm: f64,
) -> Result<ErrorBudget> {
    let (e_disc, e_trunc) = match scheme {
        Scheme::SecondOrder { a } => (
            disc_bound_2(c, delta, a, t, h, graph_norm)?,
            trunc_bound_2(c, delta, a, t, h, n, graph_norm)?,
        ),
        Scheme::HighOrder { m } => (
            disc_bound_m(c, delta, m, t, h, graph_norm)?,
            trunc_bound_m(c, delta, m, t, h, n, graph_norm)?,
        ),
    };
    Ok(ErrorBudget {
        e_disc,
        e_trunc,
        total: e_disc + e_trunc,
        graph_norm,
    })
}
