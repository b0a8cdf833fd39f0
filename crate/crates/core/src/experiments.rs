//! Experiment drivers behind the command-line subcommands. Each returns one
//! or more CSV tables; nothing here touches the filesystem.

use crate::bounds::{total_budget, ErrorBudget, Scheme, SemigroupConstants};
use crate::config::{
    ContourCostConfig, Example, ExperimentConfig, Figure, GridConfig, Param, SchemeConfig,
};
use crate::contour::{
    assemble_with_tolerance, precompute, PrecomputeOptions, ResolventSampleSet, Strategy,
};
use crate::discretize::{
    build_koopman_1d, build_koopman_2d, chebyshev_interpolate_many, DiscreteField1d,
    DiscreteField2d,
};
use crate::error::{Error, Result};
use crate::flows::{
    exact_pullback, velocity_example1, velocity_example2, velocity_example3, velocity_example4,
    FlowMap, Observable,
};
use crate::hypergeo::EvenOrder;
use crate::operators::{
    aposteriori_bound, graph_norm, real_part, solve_shifted, sup_norm_real, to_complex,
    GeneratorBackend,
};
use crate::params::{
    nodes_for_tolerance, optimize_spacing, plan_with, spacing_for_tolerance, ContourPlan,
    PlanOptions,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A CSV table with a version line and a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_owned(),
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# semiquad {VERSION}\n{}\n", self.header.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn int<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// A discretized example: backend, sampled observable and exact reference.
pub struct Setup {
    pub example: u32,
    pub backend: Box<dyn GeneratorBackend>,
    /// Observable on the grid.
    pub x: Vec<f64>,
    /// Coordinates of each unknown.
    pub points: Vec<Vec<f64>>,
    pub flow: FlowMap,
    pub observable: Observable,
}

impl Setup {
    pub fn build(example: u32, grid: &GridConfig) -> Result<Self> {
        let flow = FlowMap::from_example(example)?;
        let observable = Observable::for_example(example)?;
        let (backend, points): (Box<dyn GeneratorBackend>, Vec<Vec<f64>>) = match example {
            1 | 2 => {
                let v = if example == 1 {
                    velocity_example1
                } else {
                    velocity_example2
                };
                let field = DiscreteField1d::chebyshev(grid.n, v)?;
                let points = field.nodes.iter().map(|&x| vec![x]).collect();
                (Box::new(build_koopman_1d(&field)?), points)
            }
            _ => {
                let v = if example == 3 {
                    velocity_example3
                } else {
                    velocity_example4
                };
                let field = DiscreteField2d::square(grid.n, grid.half_width, v)?;
                let points = field.points().map(|(x, y)| vec![x, y]).collect();
                (Box::new(build_koopman_2d(&field)?), points)
            }
        };
        let x = points.iter().map(|p| observable.eval(p)).collect();
        Ok(Setup {
            example,
            backend,
            x,
            points,
            flow,
            observable,
        })
    }

    /// `g(φ(x, t))` at every grid point.
    pub fn exact(&self, t: f64) -> Result<Vec<f64>> {
        self.points
            .iter()
            .map(|p| exact_pullback(self.flow, self.observable, p, t))
            .collect()
    }

    pub fn graph_norm(&self, delta: f64, m: EvenOrder) -> Result<f64> {
        graph_norm(self.backend.as_ref(), &self.x, delta, m.get())
    }
}

fn builtin(cfg: &ExperimentConfig, what: &str) -> Result<u32> {
    match cfg.example {
        Example::Builtin(k) => Ok(k),
        Example::Custom => Err(Error::config(0, format!("{what} needs a built-in example"))),
    }
}

fn constants(scheme: &SchemeConfig) -> Result<SemigroupConstants> {
    SemigroupConstants::new(scheme.growth, 0.0)
}

/// Turns the scheme section into concrete parameters.
pub fn resolve_plan(scheme: &SchemeConfig, graph_norm: f64) -> Result<ContourPlan> {
    let c = constants(scheme)?;
    let (delta, m, t_max) = (scheme.delta, scheme.m, scheme.t_max);
    let eps = || {
        scheme
            .eps
            .ok_or_else(|| Error::config(0, "eps is required when h or N is auto"))
    };
    match (scheme.h, scheme.n_half) {
        (Param::Fixed(h), Param::Fixed(n)) => ContourPlan::new(delta, h, n, m, t_max),
        (Param::Auto, Param::Auto) => plan_with(
            eps()?,
            delta,
            m,
            t_max,
            c,
            graph_norm,
            PlanOptions::default(),
        ),
        (Param::Auto, Param::Fixed(n)) => {
            let h = spacing_for_tolerance(eps()?, delta, m, t_max, c, graph_norm)?;
            ContourPlan::new(delta, h, n, m, t_max)
        }
        (Param::Fixed(h), Param::Auto) => {
            let n = nodes_for_tolerance(
                eps()?,
                delta,
                m,
                t_max,
                c,
                graph_norm,
                h,
                PlanOptions::default(),
            )?;
            ContourPlan::new(delta, h, n, m, t_max)
        }
        (Param::Optimal, Param::Fixed(n)) => {
            let (h, _) = optimize_spacing(Scheme::HighOrder { m }, c, delta, t_max, n, graph_norm)?;
            ContourPlan::new(delta, h, n, m, t_max)
        }
        (_, Param::Optimal) | (Param::Optimal, Param::Auto) => {
            Err(Error::config(0, "h = optimal needs a fixed N"))
        }
    }
}

/// Error and bound at one evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    /// `‖S(t) − g∘φ_t‖_∞` on the grid.
    pub error: f64,
    /// `error / ‖g∘φ_t‖_∞`.
    pub rel_error: f64,
    pub budget: ErrorBudget,
    /// Contribution of node solve errors to the sum.
    pub solve_bound: f64,
}

pub struct Evaluation {
    pub samples: ResolventSampleSet,
    pub times: Vec<TimeSample>,
    /// Computed fields, kept only on request.
    pub fields: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub strategy: Strategy,
    pub imag_tol: f64,
    pub workers: Option<usize>,
    /// Keep the computed fields for export.
    pub keep_fields: bool,
}

impl EvalOptions {
    pub fn from_scheme(scheme: &SchemeConfig, workers: Option<usize>) -> Self {
        EvalOptions {
            strategy: scheme.strategy,
            imag_tol: scheme.imag_tol,
            workers,
            keep_fields: false,
        }
    }
}

/// Precompute once, then assemble and compare at every time.
pub fn evaluate(
    setup: &Setup,
    plan: &ContourPlan,
    c: SemigroupConstants,
    graph_norm: f64,
    times: &[f64],
    eo: &EvalOptions,
) -> Result<Evaluation> {
    let opts = PrecomputeOptions {
        strategy: eo.strategy,
        workers: eo.workers,
        x_tag: format!("example{}", setup.example),
        ..PrecomputeOptions::default()
    };
    let samples = precompute(setup.backend.as_ref(), &setup.x, plan, &opts)?;
    let mut out = Vec::with_capacity(times.len());
    let mut fields = Vec::new();
    for &t in times {
        let approx = assemble_with_tolerance(&samples, t, setup.backend.as_ref(), eo.imag_tol)?;
        let exact = setup.exact(t)?;
        let error = approx
            .iter()
            .zip(&exact)
            .fold(0.0f64, |acc, (a, e)| acc.max((a - e).abs()));
        let scale = sup_norm_real(&exact);
        let budget = total_budget(
            plan.scheme(),
            c,
            plan.delta,
            t,
            plan.h,
            plan.n_half,
            graph_norm,
        )?;
        out.push(TimeSample {
            t,
            error,
            rel_error: if scale > 0.0 { error / scale } else { error },
            budget,
            solve_bound: samples.solve_error_bound(t),
        });
        if eo.keep_fields {
            fields.push(approx);
        }
    }
    Ok(Evaluation {
        samples,
        times: out,
        fields,
    })
}

/// `run`: error against the exact pullback and the bound on a time grid.
pub fn cmd_run(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<Table>> {
    let example = builtin(cfg, "run")?;
    let setup = Setup::build(example, &cfg.grid)?;
    let s = &cfg.scheme;
    let norm = match s.graph_norm {
        Some(v) => v,
        None => setup.graph_norm(s.delta, s.m)?,
    };
    let plan = resolve_plan(s, norm)?;
    let c = constants(s)?;
    let eo = EvalOptions {
        keep_fields: cfg.export_solution,
        ..EvalOptions::from_scheme(s, workers)
    };
    let eval = evaluate(&setup, &plan, c, norm, &cfg.times, &eo)?;

    let mut run = Table::new(
        "run",
        &[
            "example",
            "t",
            "error",
            "rel_error",
            "e_disc",
            "e_trunc",
            "bound",
            "solve_bound",
            "M",
            "delta",
            "m",
            "h",
            "N",
            "graph_norm",
        ],
    );
    for ts in &eval.times {
        run.push(vec![
            int(example),
            num(ts.t),
            num(ts.error),
            num(ts.rel_error),
            num(ts.budget.e_disc),
            num(ts.budget.e_trunc),
            num(ts.budget.total),
            num(ts.solve_bound),
            num(c.growth()),
            num(plan.delta),
            int(plan.m),
            num(plan.h),
            int(plan.n_half),
            num(norm),
        ]);
    }

    let mut nodes = Table::new(
        "run_nodes",
        &["k", "re_z", "im_z", "residual", "aposteriori"],
    );
    for smp in &eval.samples.samples {
        nodes.push(vec![
            int(smp.k),
            num(smp.z.re),
            num(smp.z.im),
            num(smp.residual),
            num(aposteriori_bound(smp.residual, plan.delta)?),
        ]);
    }

    let mut tables = vec![run, nodes];
    if cfg.export_solution {
        let dim = setup.flow.dim();
        let mut header = vec!["t", "x"];
        if dim == 2 {
            header.push("y");
        }
        header.extend(["value", "exact"]);
        let mut sol = Table::new("run_solution", &header);
        for (ts, field) in eval.times.iter().zip(&eval.fields) {
            let exact = setup.exact(ts.t)?;
            for ((p, v), e) in setup.points.iter().zip(field).zip(&exact) {
                let mut row = vec![num(ts.t)];
                row.extend(p.iter().map(|&c| num(c)));
                row.push(num(*v));
                row.push(num(*e));
                sol.push(row);
            }
        }
        tables.push(sol);
    }
    Ok(tables)
}

/// One point of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub m: u32,
    pub n_half: u64,
    pub h: f64,
    pub error: f64,
    pub bound: f64,
    pub graph_norm: f64,
    pub max_residual: f64,
}

/// Error at time `t` against `N` with the bound-optimal spacing per `N`.
pub fn convergence_study(
    setup: &Setup,
    scheme: &SchemeConfig,
    orders: &[u32],
    n_values: &[u64],
    t: f64,
    workers: Option<usize>,
) -> Result<Vec<ConvergencePoint>> {
    let c = constants(scheme)?;
    let mut out = Vec::new();
    for &m in orders {
        let m = EvenOrder::new(m)?;
        let norm = setup.graph_norm(scheme.delta, m)?;
        for &n in n_values {
            let (h, _) = optimize_spacing(Scheme::HighOrder { m }, c, scheme.delta, t, n, norm)?;
            let plan = ContourPlan::new(scheme.delta, h, n, m, t)?;
            let eval = evaluate(
                setup,
                &plan,
                c,
                norm,
                &[t],
                &EvalOptions::from_scheme(scheme, workers),
            )?;
            let ts = &eval.times[0];
            out.push(ConvergencePoint {
                m: m.get(),
                n_half: n,
                h,
                error: ts.error,
                bound: ts.budget.total,
                graph_norm: norm,
                max_residual: eval.samples.max_residual(),
            });
        }
    }
    Ok(out)
}

/// Slope over the points whose error sits at least `10 × floor` up.
pub fn fitted_slope(points: &[ConvergencePoint], m: u32, floor: f64) -> Option<(f64, usize)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.m == m && p.error >= 10.0 * floor)
        .map(|p| (p.n_half as f64, p.error))
        .collect();
    loglog_slope(&pts).map(|s| (s, pts.len()))
}

/// `converge`: error against `N` per order, plus fitted slopes.
pub fn cmd_converge(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<Table>> {
    let example = builtin(cfg, "converge")?;
    let setup = Setup::build(example, &cfg.grid)?;
    let cc = &cfg.converge;
    let points = convergence_study(&setup, &cfg.scheme, &cc.orders, &cc.n_values, cc.t, workers)?;
    let mut sweep = Table::new(
        "converge",
        &[
            "example",
            "m",
            "N",
            "h",
            "t",
            "delta",
            "M",
            "graph_norm",
            "error",
            "bound",
            "max_residual",
        ],
    );
    for p in &points {
        sweep.push(vec![
            int(example),
            int(p.m),
            int(p.n_half),
            num(p.h),
            num(cc.t),
            num(cfg.scheme.delta),
            num(cfg.scheme.growth),
            num(p.graph_norm),
            num(p.error),
            num(p.bound),
            num(p.max_residual),
        ]);
    }
    let mut slopes = Table::new("converge_slopes", &["m", "slope", "points", "floor"]);
    for &m in &cc.orders {
        if let Some((s, k)) = fitted_slope(&points, m, cc.floor) {
            slopes.push(vec![int(m), num(s), int(k), num(cc.floor)]);
        }
    }
    Ok(vec![sweep, slopes])
}

/// `plan`: parameters for the configured tolerance.
pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let s = &cfg.scheme;
    let eps = s
        .eps
        .ok_or_else(|| Error::config(0, "plan needs eps in [scheme]"))?;
    let norm = match (s.graph_norm, cfg.example) {
        (Some(v), _) => v,
        (None, Example::Builtin(k)) => Setup::build(k, &cfg.grid)?.graph_norm(s.delta, s.m)?,
        (None, Example::Custom) => {
            return Err(Error::config(
                0,
                "a custom example needs graph_norm in [scheme]",
            ))
        }
    };
    let c = constants(s)?;
    let plan = plan_with(eps, s.delta, s.m, s.t_max, c, norm, PlanOptions::default())?;
    let b = total_budget(
        plan.scheme(),
        c,
        plan.delta,
        plan.t_max,
        plan.h,
        plan.n_half,
        norm,
    )?;
    let mut t = Table::new(
        "plan",
        &[
            "eps",
            "delta",
            "m",
            "T",
            "M",
            "graph_norm",
            "h",
            "N",
            "nodes",
            "e_disc",
            "e_trunc",
            "total",
        ],
    );
    t.push(vec![
        num(eps),
        num(plan.delta),
        int(plan.m),
        num(plan.t_max),
        num(c.growth()),
        num(norm),
        num(plan.h),
        int(plan.n_half),
        int(plan.node_count()),
        num(b.e_disc),
        num(b.e_trunc),
        num(b.total),
    ]);
    Ok(vec![t])
}

/// Planned against optimized spacing at the planned `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerComparison {
    pub m: u32,
    pub eps: f64,
    pub n_half: u64,
    pub h_planned: f64,
    pub planned: ErrorBudget,
    pub h_optimal: f64,
    pub optimal: ErrorBudget,
}

/// Node ceiling for bound-only sweeps, which never solve at the nodes.
pub const SWEEP_MAX_NODES: u64 = 1_000_000_000_000;

pub fn planner_comparison(
    c: SemigroupConstants,
    delta: f64,
    t_max: f64,
    m: EvenOrder,
    eps: f64,
    graph_norm: f64,
) -> Result<PlannerComparison> {
    let opts = PlanOptions {
        max_nodes: SWEEP_MAX_NODES,
    };
    let plan = plan_with(eps, delta, m, t_max, c, graph_norm, opts)?;
    let scheme = Scheme::HighOrder { m };
    let planned = total_budget(scheme, c, delta, t_max, plan.h, plan.n_half, graph_norm)?;
    let (h_optimal, optimal) = optimize_spacing(scheme, c, delta, t_max, plan.n_half, graph_norm)?;
    Ok(PlannerComparison {
        m: m.get(),
        eps,
        n_half: plan.n_half,
        h_planned: plan.h,
        planned,
        h_optimal,
        optimal,
    })
}

const BOUND_COLUMNS: [&str; 13] = [
    "scheme",
    "mode",
    "M",
    "delta",
    "a",
    "m",
    "t",
    "h",
    "N",
    "graph_norm",
    "e_disc",
    "e_trunc",
    "total",
];

#[allow(clippy::too_many_arguments)]
fn bound_row(
    scheme: Scheme,
    mode: &str,
    c: SemigroupConstants,
    delta: f64,
    t: f64,
    h: f64,
    n: u64,
    b: &ErrorBudget,
) -> Vec<String> {
    let (name, a, m) = match scheme {
        Scheme::SecondOrder { a } => ("second-order", num(a), "2".to_owned()),
        Scheme::HighOrder { m } => ("order-m", String::new(), int(m)),
    };
    vec![
        name.to_owned(),
        mode.to_owned(),
        num(c.growth()),
        num(delta),
        a,
        m,
        num(t),
        num(h),
        int(n),
        num(b.graph_norm),
        num(b.e_disc),
        num(b.e_trunc),
        num(b.total),
    ]
}

/// `bounds`: sweeps of the closed-form bounds.
pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let b = &cfg.bounds;
    let c = constants(&cfg.scheme)?;
    let delta = cfg.scheme.delta;
    match b.figure {
        Figure::NodeSweep => {
            let a = b.a_values.first().copied().unwrap_or(delta);
            let norm = b.norm.unwrap_or(1.0);
            let scheme = Scheme::SecondOrder { a };
            let hs = if b.h_values.is_empty() {
                vec![0.5]
            } else {
                b.h_values.clone()
            };
            let mut t = Table::new("bounds_nodes", &BOUND_COLUMNS);
            let mut optimized = Vec::new();
            for &n in &b.n_values {
                for &h in &hs {
                    let bud = total_budget(scheme, c, delta, b.t, h, n, norm)?;
                    t.push(bound_row(scheme, "fixed", c, delta, b.t, h, n, &bud));
                }
                let (h, bud) = optimize_spacing(scheme, c, delta, b.t, n, norm)?;
                t.push(bound_row(scheme, "optimized", c, delta, b.t, h, n, &bud));
                optimized.push((n as f64, bud.total));
            }
            let mut s = Table::new("bounds_nodes_slope", &["mode", "slope"]);
            if let Some(v) = loglog_slope(&optimized) {
                s.push(vec!["optimized".into(), num(v)]);
            }
            Ok(vec![t, s])
        }
        Figure::PoleSweep => {
            let a_values = if b.a_values.is_empty() {
                (1..=100).map(|i| 0.1 * f64::from(i)).collect()
            } else {
                b.a_values.clone()
            };
            let mut t = Table::new("bounds_pole", &BOUND_COLUMNS);
            for &n in &b.n_values {
                for &a in &a_values {
                    let norm = b.norm.unwrap_or((delta + a) * (delta + a));
                    let scheme = Scheme::SecondOrder { a };
                    let (h, bud) = optimize_spacing(scheme, c, delta, b.t, n, norm)?;
                    t.push(bound_row(scheme, "optimized", c, delta, b.t, h, n, &bud));
                }
            }
            Ok(vec![t])
        }
        Figure::PlannerSweep => {
            let eps_values = if b.eps_values.is_empty() {
                (1..=8).map(|k| 10f64.powi(-k)).collect()
            } else {
                b.eps_values.clone()
            };
            let mut t = Table::new(
                "bounds_planner",
                &[
                    "m",
                    "eps",
                    "M",
                    "delta",
                    "T",
                    "graph_norm",
                    "N",
                    "h_planned",
                    "total_planned",
                    "h_optimal",
                    "total_optimal",
                    "ratio",
                ],
            );
            for &m in &b.orders {
                let m = EvenOrder::new(m)?;
                let norm = b.norm.unwrap_or(2f64.powi(m.get() as i32 - 2));
                for &eps in &eps_values {
                    let p = planner_comparison(c, delta, b.t, m, eps, norm)?;
                    t.push(vec![
                        int(m),
                        num(eps),
                        num(c.growth()),
                        num(delta),
                        num(b.t),
                        num(norm),
                        int(p.n_half),
                        num(p.h_planned),
                        num(p.planned.total),
                        num(p.h_optimal),
                        num(p.optimal.total),
                        num(p.planned.total / p.optimal.total),
                    ]);
                }
            }
            Ok(vec![t])
        }
    }
}

/// Smallest Chebyshev degree per `(δ, ε′)` for the resolvent at `z = δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourCost {
    pub deltas: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// `needed[i][j]`: degree for `deltas[i]`, `tolerances[j]`; `None` when no
    /// ladder entry reaches it.
    pub needed: Vec<Vec<Option<usize>>>,
    /// `(δ, n, relative error, residual)` for every ladder solve.
    pub errors: Vec<(f64, usize, f64, f64)>,
    /// `(δ, y, [R(δ)g](y))` from the reference solve.
    pub profiles: Vec<(f64, f64, f64)>,
}

fn resolvent_on_grid(n: usize, delta: f64, xs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let field = DiscreteField1d::chebyshev(n, velocity_example2)?;
    let backend = build_koopman_1d(&field)?;
    let g = field.sample(|x| Observable::Parabola.eval(&[x]));
    let s = solve_shifted(
        &backend,
        num_complex::Complex64::new(delta, 0.0),
        &to_complex(&g),
    )?;
    Ok((chebyshev_interpolate_many(&real_part(&s.u), xs), s.residual))
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

/// Resolvent cost against contour location for `ẋ = 2x − 8x³`, `g = 1 − x²`.
/// Errors are relative to a reference solve at `reference_n`, measured on a
/// uniform grid of `eval_points` through the interpolants.
pub fn contour_cost_study(cc: &ContourCostConfig) -> Result<ContourCost> {
    if cc.ladder.iter().any(|&n| n >= cc.reference_n) {
        return Err(Error::config(
            0,
            "reference_n must exceed every ladder entry",
        ));
    }
    let xs = linspace(-1.0, 1.0, cc.eval_points);
    let mut needed = Vec::with_capacity(cc.deltas.len());
    let mut errors = Vec::new();
    for &delta in &cc.deltas {
        let (reference, _) = resolvent_on_grid(cc.reference_n, delta, &xs)?;
        let scale = sup_norm_real(&reference);
        let mut row = vec![None; cc.tolerances.len()];
        for &n in &cc.ladder {
            let (approx, residual) = resolvent_on_grid(n, delta, &xs)?;
            let err = approx
                .iter()
                .zip(&reference)
                .fold(0.0f64, |acc, (a, r)| acc.max((a - r).abs()))
                / scale;
            errors.push((delta, n, err, residual));
            for (slot, &tol) in row.iter_mut().zip(&cc.tolerances) {
                if slot.is_none() && err <= tol {
                    *slot = Some(n);
                }
            }
        }
        needed.push(row);
    }
    let ys = linspace(-1.0, 1.0, cc.profile_points);
    let mut profiles = Vec::new();
    for &delta in &cc.profile_deltas {
        let (vals, _) = resolvent_on_grid(cc.reference_n, delta, &ys)?;
        profiles.extend(ys.iter().zip(vals).map(|(&y, v)| (delta, y, v)));
    }
    Ok(ContourCost {
        deltas: cc.deltas.clone(),
        tolerances: cc.tolerances.clone(),
        needed,
        errors,
        profiles,
    })
}

/// `contour-cost`: discretization size against contour location.
pub fn cmd_contour_cost(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let cc = &cfg.contour_cost;
    let study = contour_cost_study(cc)?;
    let mut t = Table::new(
        "contour_cost",
        &["delta", "tolerance", "n", "reached", "reference_n"],
    );
    for (delta, row) in study.deltas.iter().zip(&study.needed) {
        for (tol, n) in study.tolerances.iter().zip(row) {
            t.push(vec![
                num(*delta),
                num(*tol),
                n.map_or(String::new(), int),
                int(n.is_some()),
                int(cc.reference_n),
            ]);
        }
    }
    let mut e = Table::new(
        "contour_cost_errors",
        &["delta", "n", "rel_error", "residual"],
    );
    for &(delta, n, err, res) in &study.errors {
        e.push(vec![num(delta), int(n), num(err), num(res)]);
    }
    let mut p = Table::new("contour_profile", &["delta", "y", "value"]);
    for &(delta, y, v) in &study.profiles {
        p.push(vec![num(delta), num(y), num(v)]);
    }
    Ok(vec![t, e, p])
}
