//! Gamma ratios and tail integrals of `(1 + s²)^{-m/2}` for even `m`.
//!
//! Every bound in this crate reduces to the integral
//!
//! ```text
//! T_m(y) = ∫_y^∞ (1 + s²)^{-m/2} ds = G(m) − y · ₂F₁(1/2, m/2; 3/2; −y²)
//! ```
//!
//! with `G(m) = Γ(3/2) Γ((m−1)/2) / Γ(m/2)`. For even `m = 2n` the
//! antiderivative `I_n(s) = ∫_0^s (1 + u²)^{-n} du` obeys the terminating
//! recurrence
//!
//! ```text
//! I_n(s) = s / (2(n−1)(1+s²)^{n−1}) + (2n−3)/(2(n−1)) · I_{n−1}(s),   I_1(s) = atan(s)
//! ```
//!
//! Run forwards it evaluates `I_n` with positive terms only. The tail `T_m`
//! uses the same recurrence: below `y = 1` as `G(m) − I_n(y)`, and from
//! `y = 1` upwards run downwards from a deep starting index, where each step
//! again adds positive terms and the start-up error is damped by roughly
//! `(1 + y²)` per step. That keeps full relative accuracy deep in the tail,
//! where the difference form would cancel.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{Error, Result};

/// Regularizer order: an even integer `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvenOrder(u32);

impl EvenOrder {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 || !m.is_multiple_of(2) {
            return Err(Error::InvalidOrder(m));
        }
        Ok(EvenOrder(m))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// `m / 2`.
    #[inline]
    pub fn half(self) -> u32 {
        self.0 / 2
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<u32> for EvenOrder {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        EvenOrder::new(m)
    }
}

impl fmt::Display for EvenOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `G(m) = Γ(3/2) Γ((m−1)/2) / Γ(m/2)`, i.e. the full integral `T_m(0)`.
///
/// For `m = 2n` this is `(π/2) · C(2n−2, n−1) / 4^{n−1}`, built up by the
/// exact product `G_n = G_{n−1} (2n−3)/(2n−2)`.
pub fn gamma_ratio(m: EvenOrder) -> f64 {
    let mut g = FRAC_PI_2;
    for j in 2..=m.half() {
        let j = f64::from(j);
        g *= (2.0 * j - 3.0) / (2.0 * j - 2.0);
    }
    g
}

fn check_arg(y: f64) -> Result<()> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::domain(format!(
            "argument must be finite and non-negative, got {y}"
        )));
    }
    Ok(())
}

/// `ln(1 + y²)` without overflowing for large `y`.
fn ln_one_plus_sq(y: f64) -> f64 {
    if y > 1.0 {
        2.0 * y.ln() + (1.0 / (y * y)).ln_1p()
    } else {
        (y * y).ln_1p()
    }
}

/// `I_n(y) = ∫_0^y (1 + s²)^{-n} ds` by the forward recurrence.
fn antiderivative(n: u32, y: f64) -> f64 {
    let mut acc = y.atan();
    if n == 1 || y == 0.0 {
        return acc;
    }
    let lq = ln_one_plus_sq(y);
    let ly = y.ln();
    for j in 2..=n {
        let jf = f64::from(j);
        let lead = (ly - (2.0 * (jf - 1.0)).ln() - (jf - 1.0) * lq).exp();
        acc = lead + (2.0 * jf - 3.0) / (2.0 * (jf - 1.0)) * acc;
    }
    acc
}

/// Tail for `y >= 1` by the downward recurrence
/// `T_{j−1} = 2(j−1)/(2j−3) · T_j + y / ((2j−3)(1+y²)^{j−1})`.
fn tail_downward(n: u32, y: f64) -> f64 {
    let lq = ln_one_plus_sq(y);
    let ly = y.ln();
    // relative start-up error shrinks by about (1+y²) per step
    let extra = (40.0 * std::f64::consts::LN_10 / lq).ceil() as u32 + 8;
    let top = n + extra;
    let mut t = 0.0;
    for j in (n + 1..=top).rev() {
        let jf = f64::from(j);
        let inc = (ly - (2.0 * jf - 3.0).ln() - (jf - 1.0) * lq).exp();
        t = 2.0 * (jf - 1.0) / (2.0 * jf - 3.0) * t + inc;
    }
    t
}

/// `T_m(y) = ∫_y^∞ (1 + s²)^{-m/2} ds`.
pub fn hyp_tail(m: EvenOrder, y: f64) -> Result<f64> {
    check_arg(y)?;
    let n = m.half();
    if n == 1 {
        return Ok(1.0_f64.atan2(y));
    }
    if y < 1.0 {
        return Ok(gamma_ratio(m) - antiderivative(n, y));
    }
    Ok(tail_downward(n, y))
}

/// `₂F₁(1/2, m/2; 3/2; −y²)`.
pub fn hyp2f1_half(m: EvenOrder, y: f64) -> Result<f64> {
    check_arg(y)?;
    if y == 0.0 {
        return Ok(1.0);
    }
    Ok(antiderivative(m.half(), y) / y)
}

/// Leading term `y^{−(m−1)} / (m−1)` of `T_m(y)` as `y → ∞`.
pub fn tail_leading_order(m: EvenOrder, y: f64) -> Result<f64> {
    if !y.is_finite() || y <= 0.0 {
        return Err(Error::domain(format!("argument must be positive, got {y}")));
    }
    let p = m.as_f64() - 1.0;
    Ok((-p * y.ln()).exp() / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ord(m: u32) -> EvenOrder {
        EvenOrder::new(m).unwrap()
    }

    #[test]
    fn order_validation() {
        assert!(EvenOrder::new(0).is_err());
        assert!(EvenOrder::new(3).is_err());
        assert!(EvenOrder::new(1).is_err());
        assert_eq!(EvenOrder::new(8).unwrap().half(), 4);
    }

    #[test]
    fn gamma_ratio_closed_forms() {
        assert_eq!(gamma_ratio(ord(2)), PI / 2.0);
        assert_relative_eq!(gamma_ratio(ord(4)), PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_ratio(ord(6)), 3.0 * PI / 16.0, max_relative = 1e-15);
        // Γ(3/2)Γ(7/2)/Γ(4) = (√π/2)(15√π/8)/6
        assert_relative_eq!(gamma_ratio(ord(8)), 15.0 * PI / 96.0, max_relative = 1e-15);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(hyp_tail(ord(2), 0.0).unwrap(), PI / 2.0);
        assert_relative_eq!(
            hyp_tail(ord(2), 1.0).unwrap(),
            PI / 4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            hyp_tail(ord(4), 1.0).unwrap(),
            PI / 8.0 - 0.25,
            max_relative = 1e-13
        );
        assert_relative_eq!(hyp_tail(ord(8), 0.0).unwrap(), gamma_ratio(ord(8)));
    }

    #[test]
    fn tail_closed_form_m4() {
        // T_4(y) = π/4 − y/(2(1+y²)) − atan(y)/2
        for &y in &[0.3, 0.99, 1.0, 1.5, 3.0, 40.0] {
            let exact = PI / 4.0 - y / (2.0 * (1.0 + y * y)) - y.atan() / 2.0;
            assert_relative_eq!(hyp_tail(ord(4), y).unwrap(), exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn tail_continuous_across_branch() {
        for m in (4..=16).step_by(2) {
            let below = hyp_tail(ord(m), 1.0 - 1e-12).unwrap();
            let at = hyp_tail(ord(m), 1.0).unwrap();
            assert_relative_eq!(below, at, max_relative = 1e-10);
        }
    }

    #[test]
    fn hyp2f1_examples() {
        assert_relative_eq!(
            hyp2f1_half(ord(2), 1.0).unwrap(),
            PI / 4.0,
            max_relative = 1e-15
        );
        for m in (2..=12).step_by(2) {
            assert_eq!(hyp2f1_half(ord(m), 0.0).unwrap(), 1.0);
        }
        assert_relative_eq!(
            hyp2f1_half(ord(4), 1.0).unwrap(),
            0.25 + PI / 8.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn leading_order_examples() {
        assert_relative_eq!(
            tail_leading_order(ord(2), 10.0).unwrap(),
            0.1,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            tail_leading_order(ord(4), 10.0).unwrap(),
            1.0 / 3000.0,
            max_relative = 1e-14
        );
        assert!(tail_leading_order(ord(4), 0.0).is_err());
        assert!(tail_leading_order(ord(4), -1.0).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hyp_tail(ord(4), -0.1).is_err());
        assert!(hyp_tail(ord(4), f64::NAN).is_err());
        assert!(hyp_tail(ord(4), f64::INFINITY).is_err());
        assert!(hyp2f1_half(ord(4), -1.0).is_err());
    }

    #[test]
    fn identity_closure() {
        for m in (2..=12).step_by(2) {
            let g = gamma_ratio(ord(m));
            for &y in &[0.0, 1e-8, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e6] {
                let f = hyp2f1_half(ord(m), y).unwrap();
                let t = hyp_tail(ord(m), y).unwrap();
                assert_relative_eq!(y * f + t, g, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn deep_tail_keeps_relative_accuracy() {
        // far out the alternating series in 1/y converges in a handful of terms
        for m in (4..=12).step_by(2) {
            let n = f64::from(m / 2);
            let y: f64 = 1e3;
            let w = 1.0 / y;
            let series = w.powf(2.0 * n - 1.0) / (2.0 * n - 1.0)
                - n * w.powf(2.0 * n + 1.0) / (2.0 * n + 1.0)
                + n * (n + 1.0) / 2.0 * w.powf(2.0 * n + 3.0) / (2.0 * n + 3.0);
            assert_relative_eq!(hyp_tail(ord(m), y).unwrap(), series, max_relative = 1e-12);
        }
    }

    #[test]
    fn huge_argument_does_not_overflow() {
        let t = hyp_tail(ord(6), 1e200).unwrap();
        assert!(t.is_finite() && t >= 0.0);
        let f = hyp2f1_half(ord(6), 1e200).unwrap();
        assert!(f.is_finite() && f > 0.0);
    }
}
