//! Quadrature parameter selection.
//!
//! [`plan`] picks `(h, N)` for a target accuracy `ε` on `[0, T]` by inverting
//! the closed-form bounds: the spacing puts the discretization bound at
//! exactly `ε/2` at time `T`, and `N` puts the leading-order truncation bound
//! at or below `ε/2`. Both bounds grow with `t`, so the plan holds on the whole
//! window. [`optimize_spacing`] instead minimizes the total bound over `h` for
//! a fixed `N`.

use std::f64::consts::{LN_2, PI};

use crate::bounds::{total_budget, trunc_bound_m, ErrorBudget, Scheme, SemigroupConstants};
use crate::error::{Error, Result};
use crate::hypergeo::{gamma_ratio, EvenOrder};

/// Default ceiling on `N` before a plan is declared infeasible.
pub const DEFAULT_MAX_NODES: u64 = 10_000_000;

/// Quadrature parameters: nodes `z_k = δ + i h k`, `k = −N..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPlan {
    pub delta: f64,
    pub h: f64,
    pub n_half: u64,
    pub m: EvenOrder,
    pub t_max: f64,
}

impl ContourPlan {
    pub fn new(delta: f64, h: f64, n_half: u64, m: EvenOrder, t_max: f64) -> Result<Self> {
        let plan = ContourPlan {
            delta,
            h,
            n_half,
            m,
            t_max,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("δ", self.delta), ("h", self.h), ("T", self.t_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "plan {name} must be positive, got {v}"
                )));
            }
        }
        if self.n_half == 0 {
            return Err(Error::domain("plan N must be at least 1"));
        }
        Ok(())
    }

    /// `2N + 1`.
    pub fn node_count(&self) -> usize {
        2 * self.n_half as usize + 1
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::HighOrder { m: self.m }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlanOptions {
    pub max_nodes: u64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

fn check_tolerance(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {eps}"
        )));
    }
    Ok(())
}

fn check_norm(graph_norm: f64) -> Result<()> {
    if !(graph_norm.is_finite() && graph_norm > 0.0) {
        return Err(Error::domain(format!(
            "graph norm must be positive and finite, got {graph_norm}"
        )));
    }
    Ok(())
}

/// Spacing `h` with discretization bound exactly `ε/2` at `t_max`.
pub fn spacing_for_tolerance(
    eps: f64,
    delta: f64,
    m: EvenOrder,
    t_max: f64,
    c: SemigroupConstants,
    graph_norm: f64,
) -> Result<f64> {
    check_tolerance(eps)?;
    check_norm(graph_norm)?;
    if !(delta.is_finite() && delta > 0.0) || !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::domain("δ must be positive and T non-negative"));
    }
    let mf = m.as_f64();
    // ln(2C/ε) with C the h-independent prefactor of the discretization bound
    let log_ratio = LN_2 - eps.ln() + c.growth().ln() + 1.5 * delta * t_max - mf * delta.ln()
        + (mf + 1.0) * LN_2
        + gamma_ratio(m).ln()
        - PI.ln()
        + graph_norm.ln();
    let log_one_plus = if log_ratio > 36.0 {
        log_ratio + (-log_ratio).exp().ln_1p()
    } else {
        log_ratio.exp().ln_1p()
    };
    Ok(PI * delta / log_one_plus)
}

/// Smallest `N` with leading-order truncation bound `≤ ε/2` at `t_max`.
#[allow(clippy::too_many_arguments)]
pub fn nodes_for_tolerance(
    eps: f64,
    delta: f64,
    m: EvenOrder,
    t_max: f64,
    c: SemigroupConstants,
    graph_norm: f64,
    h: f64,
    opts: PlanOptions,
) -> Result<u64> {
    check_tolerance(eps)?;
    check_norm(graph_norm)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("h must be positive, got {h}")));
    }
    let p = m.as_f64() - 1.0;
    let log_bracket = LN_2 - eps.ln() + c.growth().ln() + delta * t_max - PI.ln() - delta.ln()
        + graph_norm.ln()
        - p.ln();
    let log_n = log_bracket / p - h.ln();
    let n = log_n.exp().ceil().max(1.0);
    if !n.is_finite() || n > opts.max_nodes as f64 {
        return Err(Error::PlanInfeasible(format!(
            "N = {n:e} exceeds the node ceiling {}",
            opts.max_nodes
        )));
    }
    Ok(n as u64)
}

/// Planned `(δ, h, N, m, T)` for uniform accuracy `ε` on `[0, T]`.
pub fn plan(
    eps: f64,
    delta: f64,
    m: EvenOrder,
    t_max: f64,
    c: SemigroupConstants,
    graph_norm: f64,
) -> Result<ContourPlan> {
    plan_with(eps, delta, m, t_max, c, graph_norm, PlanOptions::default())
}

pub fn plan_with(
    eps: f64,
    delta: f64,
    m: EvenOrder,
    t_max: f64,
    c: SemigroupConstants,
    graph_norm: f64,
    opts: PlanOptions,
) -> Result<ContourPlan> {
    let h = spacing_for_tolerance(eps, delta, m, t_max, c, graph_norm)?;
    let mut n = nodes_for_tolerance(eps, delta, m, t_max, c, graph_norm, h, opts)?;
    // the node count comes from an asymptotic inversion; confirm with the exact tail
    while trunc_bound_m(c, delta, m, t_max, h, n, graph_norm)? > 0.5 * eps {
        let next = ((n as f64) * 1.25).ceil() as u64;
        if next > opts.max_nodes {
            return Err(Error::PlanInfeasible(format!(
                "exact truncation bound not met below {} nodes",
                opts.max_nodes
            )));
        }
        log::debug!("plan: exact truncation check failed at N = {n}, trying {next}");
        n = next;
    }
    ContourPlan::new(delta, h, n, m, t_max)
}

const PROBES: usize = 100;
const GOLDEN_RTOL: f64 = 1e-6;

/// Search interval for `h`, as multiples of `δ`.
pub const SPACING_BRACKET: (f64, f64) = (1e-4, 10.0);

/// Spacing minimizing the total bound at time `t` for fixed `N`.
///
/// Probes 100 log-spaced spacings in `[1e−4 δ, 10 δ]`, then refines around the
/// best probe by golden-section search on `log h`.
pub fn optimize_spacing(
    scheme: Scheme,
    c: SemigroupConstants,
    delta: f64,
    t: f64,
    n: u64,
    graph_norm: f64,
) -> Result<(f64, ErrorBudget)> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    let eval = |log_h: f64| total_budget(scheme, c, delta, t, log_h.exp(), n, graph_norm);
    let lo = (SPACING_BRACKET.0 * delta).ln();
    let hi = (SPACING_BRACKET.1 * delta).ln();
    let step = (hi - lo) / (PROBES - 1) as f64;
    let probes: Vec<(f64, ErrorBudget)> = (0..PROBES)
        .map(|i| {
            let x = lo + step * i as f64;
            eval(x).map(|b| (x, b))
        })
        .collect::<Result<_>>()?;
    let (best_idx, _) = probes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total.total_cmp(&b.1 .1.total))
        .expect("probe list is non-empty");
    if !probes[best_idx].1.total.is_finite() {
        return Err(Error::PlanInfeasible(
            "error bound is infinite over the whole spacing bracket".into(),
        ));
    }

    let mut a = probes[best_idx.saturating_sub(1)].0;
    let mut b = probes[(best_idx + 1).min(PROBES - 1)].0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1)?.total;
    let mut f2 = eval(x2)?.total;
    // interval width in log h bounds the relative error in h
    while b - a > GOLDEN_RTOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?.total;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?.total;
        }
    }
    let refined_x = 0.5 * (a + b);
    let refined = eval(refined_x)?;
    let (x, budget) = if refined.total <= probes[best_idx].1.total {
        (refined_x, refined)
    } else {
        probes[best_idx]
    };
    Ok((x.exp(), budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{disc_bound_m, trunc_bound_asymptotic};
    use approx::assert_relative_eq;

    const ONE: SemigroupConstants = SemigroupConstants::contraction();

    fn ord(m: u32) -> EvenOrder {
        EvenOrder::new(m).unwrap()
    }

    #[test]
    fn spacing_inverts_disc_bound() {
        for &(eps, delta, m, t, norm) in &[
            (1e-6, 2.0, 6, 1.0, 16.0),
            (1e-2, 2.0, 2, 1.0, 1.0),
            (1e-10, 4.0, 10, 2.0, 1e9),
            (0.3, 0.5, 4, 0.1, 3.0),
        ] {
            let h = spacing_for_tolerance(eps, delta, ord(m), t, ONE, norm).unwrap();
            let e = disc_bound_m(ONE, delta, ord(m), t, h, norm).unwrap();
            assert_relative_eq!(e, eps / 2.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn spacing_fixture() {
        // ε=1e-6, δ=2, m=6, T=1, M=1, norm=16:
        // h = 2π / ln(1 + (2/ε) e^3 / 64 · 2^7 (3π/16)/π · 16)
        let arg = 2e6 * 3f64.exp() / 64.0 * 128.0 * 3.0 / 16.0 * 16.0;
        let expected = 2.0 * PI / arg.ln_1p();
        let h = spacing_for_tolerance(1e-6, 2.0, ord(6), 1.0, ONE, 16.0).unwrap();
        assert_relative_eq!(h, expected, max_relative = 1e-13);
        assert_relative_eq!(h, 0.325_546_605_453_958_4, max_relative = 1e-13);
    }

    #[test]
    fn spacing_shrinks_with_tolerance() {
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let eps = 10f64.powi(-k);
            let h = spacing_for_tolerance(eps, 2.0, ord(4), 1.0, ONE, 4.0).unwrap();
            assert!(h < prev);
            prev = h;
        }
        let h1 = spacing_for_tolerance(1e-4, 2.0, ord(4), 1.0, ONE, 4.0).unwrap();
        let h2 = spacing_for_tolerance(5e-5, 2.0, ord(4), 1.0, ONE, 4.0).unwrap();
        assert!(h2 < h1);
    }

    #[test]
    fn spacing_rejects_bad_input() {
        assert!(spacing_for_tolerance(0.0, 2.0, ord(4), 1.0, ONE, 4.0).is_err());
        assert!(spacing_for_tolerance(1e-3, 2.0, ord(4), 1.0, ONE, 0.0).is_err());
        // extreme ratio stays finite through the log path
        let h = spacing_for_tolerance(1e-300, 30.0, ord(2), 10.0, ONE, 1e300).unwrap();
        assert!(h.is_finite() && h > 0.0);
    }

    #[test]
    fn nodes_fixture_and_inversion() {
        let h = spacing_for_tolerance(1e-6, 2.0, ord(6), 1.0, ONE, 16.0).unwrap();
        let n = nodes_for_tolerance(1e-6, 2.0, ord(6), 1.0, ONE, 16.0, h, PlanOptions::default())
            .unwrap();
        // (1/h) (2 e^2 · 16 / (2π · 5 · 1e-6))^{1/5}
        let raw = (2.0 * 2f64.exp() * 16.0 / (2.0 * PI * 5.0 * 1e-6)).powf(0.2) / h;
        assert_eq!(n, raw.ceil() as u64);
        assert_eq!(n, 73);
        let asym = trunc_bound_asymptotic(ONE, 2.0, ord(6), 1.0, h, n, 16.0).unwrap();
        assert!(asym <= 0.5e-6);
    }

    #[test]
    fn nodes_scale_with_norm() {
        let h = 0.3;
        let opts = PlanOptions {
            max_nodes: u64::MAX,
        };
        // use a huge base norm so the ceiling is negligible
        let n1 = nodes_for_tolerance(1e-12, 2.0, ord(4), 1.0, ONE, 1e6, h, opts).unwrap() as f64;
        let n2 = nodes_for_tolerance(1e-12, 2.0, ord(4), 1.0, ONE, 2e6, h, opts).unwrap() as f64;
        assert_relative_eq!(n2 / n1, 2f64.powf(1.0 / 3.0), max_relative = 1e-4);
    }

    #[test]
    fn nodes_ceiling_is_enforced() {
        let opts = PlanOptions { max_nodes: 100 };
        let err = nodes_for_tolerance(1e-12, 2.0, ord(2), 1.0, ONE, 1.0, 0.3, opts).unwrap_err();
        assert!(matches!(err, Error::PlanInfeasible(_)));
    }

    #[test]
    fn plan_composes_and_is_deterministic() {
        let p1 = plan(1e-6, 2.0, ord(6), 1.0, ONE, 16.0).unwrap();
        let p2 = plan(1e-6, 2.0, ord(6), 1.0, ONE, 16.0).unwrap();
        assert_eq!(p1, p2);
        let h = spacing_for_tolerance(1e-6, 2.0, ord(6), 1.0, ONE, 16.0).unwrap();
        assert_eq!(p1.h, h);
        assert_eq!(p1.n_half, 73);
        assert_eq!(p1.node_count(), 147);
    }

    #[test]
    fn plan_meets_tolerance() {
        for m in [2, 4, 6, 8] {
            let norm = 2f64.powi(m as i32 - 2);
            for k in 1..=8 {
                let eps = 10f64.powi(-k);
                let p = match plan(eps, 2.0, ord(m), 1.0, ONE, norm) {
                    Ok(p) => p,
                    Err(Error::PlanInfeasible(_)) => continue,
                    Err(e) => panic!("{e}"),
                };
                let b = total_budget(p.scheme(), ONE, 2.0, 1.0, p.h, p.n_half, norm).unwrap();
                assert!(b.e_disc <= 0.5 * eps * (1.0 + 1e-12));
                assert!(b.e_trunc <= eps);
                assert!(b.total <= 2.0 * eps);
            }
        }
    }

    #[test]
    fn plan_cost_monotone() {
        let mut prev = 0;
        for k in (1..=8).rev() {
            let eps = 10f64.powi(-k);
            let n = plan(eps, 2.0, ord(6), 1.0, ONE, 16.0).unwrap().n_half;
            if k < 8 {
                assert!(n <= prev, "N should not grow as ε grows");
            }
            prev = n;
        }
    }

    #[test]
    fn optimized_spacing_is_local_minimum() {
        for m in [2, 4, 6] {
            let scheme = Scheme::high_order(m).unwrap();
            for n in [10, 80, 400] {
                let (h, b) = optimize_spacing(scheme, ONE, 2.0, 1.0, n, 4.0).unwrap();
                let at = |h: f64| {
                    total_budget(scheme, ONE, 2.0, 1.0, h, n, 4.0)
                        .unwrap()
                        .total
                };
                assert!(b.total <= at(2.0 * h));
                assert!(b.total <= at(0.5 * h));
                assert!(b.total <= at(h * 1.01));
                assert!(b.total <= at(h * 0.99));
            }
        }
    }

    #[test]
    fn optimized_beats_probe_grid() {
        let scheme = Scheme::SecondOrder { a: 2.0 };
        let (_, b) = optimize_spacing(scheme, ONE, 2.0, 1.0, 200, 1.0).unwrap();
        let lo = (1e-4f64 * 2.0).ln();
        let hi = (10.0f64 * 2.0).ln();
        for i in 0..100 {
            let h = (lo + (hi - lo) * i as f64 / 99.0).exp();
            let v = total_budget(scheme, ONE, 2.0, 1.0, h, 200, 1.0)
                .unwrap()
                .total;
            assert!(b.total <= v);
        }
    }

    #[test]
    fn optimize_reports_infinite_bracket() {
        let scheme = Scheme::high_order(2).unwrap();
        let err = optimize_spacing(scheme, ONE, 200.0, 50.0, 1, 1e300).unwrap_err();
        assert!(matches!(err, Error::PlanInfeasible(_)));
    }
}
