//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers. `#` and `;` start comments. Keys are case-sensitive.
//!
//! ```text
//! [experiment]
//! example = 1
//!
//! [scheme]
//! m = 6
//! delta = 2
//! h = optimal        # number, auto, or optimal
//! N = 80             # number or auto
//! T = 1
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::contour::{Strategy, IMAG_TOLERANCE};
use crate::error::{Error, Result};
use crate::hypergeo::EvenOrder;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Raw parse: section name → key → value. Keys before any header go in `""`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    pub sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(p) => &line[..p],
        None => line,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ini = Ini::default();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line_no, "unterminated section header"))?
                    .trim();
                if !valid_name(name) {
                    return Err(Error::config(line_no, format!("bad section name '{name}'")));
                }
                if ini.sections.contains_key(name) {
                    return Err(Error::config(
                        line_no,
                        format!("duplicate section [{name}]"),
                    ));
                }
                current = name.to_owned();
                ini.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line_no, "expected 'key = value'"))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(Error::config(line_no, format!("bad key '{key}'")));
            }
            let section = ini.sections.entry(current.clone()).or_default();
            if section.contains_key(key) {
                return Err(Error::config(line_no, format!("duplicate key '{key}'")));
            }
            section.insert(
                key.to_owned(),
                Entry {
                    value: value.trim().to_owned(),
                    line: line_no,
                },
            );
        }
        Ok(ini)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }
}

/// A parameter that is given, left to the planner, or optimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param<T> {
    Fixed(T),
    /// Chosen by the tolerance planner.
    Auto,
    /// Spacing minimizing the bound for the given `N`.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Builtin(u32),
    /// No built-in dynamics; only bound evaluation and planning apply.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub m: EvenOrder,
    pub delta: f64,
    pub h: Param<f64>,
    pub n_half: Param<u64>,
    pub eps: Option<f64>,
    pub t_max: f64,
    /// Growth constant `M`.
    pub growth: f64,
    pub strategy: Strategy,
    /// Overrides the computed `‖(2δ − A)^m x‖`.
    pub graph_norm: Option<f64>,
    /// Relative tolerance on the imaginary part of assembled sums.
    pub imag_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Chebyshev degree (1D) or points per axis (2D).
    pub n: usize,
    /// Half-width `L` of the square `[−L, L]²` (2D only).
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Bound against `N`, fixed and optimized `h`.
    NodeSweep,
    /// Bound against the pole offset `a`.
    PoleSweep,
    /// Planned against optimized spacing over a tolerance sweep.
    PlannerSweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub figure: Figure,
    pub t: f64,
    pub n_values: Vec<u64>,
    pub a_values: Vec<f64>,
    pub h_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub orders: Vec<u32>,
    /// Fixed normalization; `None` uses each figure's default.
    pub norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub orders: Vec<u32>,
    pub n_values: Vec<u64>,
    pub t: f64,
    /// Errors below `10 × floor` are left out of the slope fit.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourCostConfig {
    pub deltas: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub ladder: Vec<usize>,
    pub reference_n: usize,
    pub profile_deltas: Vec<f64>,
    pub profile_points: usize,
    pub eval_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    pub scheme: SchemeConfig,
    pub grid: GridConfig,
    /// Evaluation times for `run`.
    pub times: Vec<f64>,
    /// Write the computed field at every time as well.
    pub export_solution: bool,
    pub bounds: BoundsConfig,
    pub converge: ConvergeConfig,
    pub contour_cost: ContourCostConfig,
}

fn parse_value<T: FromStr>(e: &Entry, what: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::config(e.line, format!("cannot read {what} from '{}'", e.value)))
}

fn parse_list<T: FromStr>(e: &Entry, what: &str) -> Result<Vec<T>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::config(e.line, format!("cannot read {what} from '{}'", s.trim()))
            })
        })
        .collect()
}

fn positive(e: &Entry, what: &str) -> Result<f64> {
    let v: f64 = parse_value(e, what)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(
            e.line,
            format!("{what} must be positive, got {v}"),
        ));
    }
    Ok(v)
}

fn all_positive(e: &Entry, what: &str, v: &[f64]) -> Result<()> {
    if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::config(
            e.line,
            format!("{what} must be positive, got {bad}"),
        ));
    }
    Ok(())
}

/// Tracks which keys were read so unknown ones can be reported.
struct Fields<'a> {
    ini: &'a Ini,
    seen: std::cell::RefCell<Vec<(String, String)>>,
}

impl<'a> Fields<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a Entry> {
        self.seen
            .borrow_mut()
            .push((section.to_owned(), key.to_owned()));
        self.ini.get(section, key)
    }

    fn check_unknown(&self) -> Result<()> {
        let seen = self.seen.borrow();
        for (sec, keys) in &self.ini.sections {
            for (key, e) in keys {
                if !seen.iter().any(|(s, k)| s == sec && k == key) {
                    let where_ = if sec.is_empty() {
                        String::new()
                    } else {
                        format!(" in [{sec}]")
                    };
                    return Err(Error::config(
                        e.line,
                        format!("unknown key '{key}'{where_}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn or<T>(e: Option<&Entry>, default: T, f: impl FnOnce(&Entry) -> Result<T>) -> Result<T> {
    e.map_or(Ok(default), f)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_ini(&Ini::parse(text)?)
    }

    pub fn from_ini(ini: &Ini) -> Result<Self> {
        let f = Fields {
            ini,
            seen: Default::default(),
        };

        let example = match f.get("experiment", "example") {
            None => Example::Builtin(1),
            Some(e) if e.value == "custom" => Example::Custom,
            Some(e) => {
                let k: u32 = parse_value(e, "example")?;
                if !(1..=4).contains(&k) {
                    return Err(Error::config(
                        e.line,
                        format!("example must be 1-4 or custom, got {k}"),
                    ));
                }
                Example::Builtin(k)
            }
        };

        let m = or(f.get("scheme", "m"), EvenOrder::new(6)?, |e| {
            let v: u32 = parse_value(e, "m")?;
            EvenOrder::new(v).map_err(|err| Error::config(e.line, err.to_string()))
        })?;
        let delta = or(f.get("scheme", "delta"), 2.0, |e| positive(e, "delta"))?;
        let h = or(f.get("scheme", "h"), Param::Optimal, |e| {
            match e.value.as_str() {
                "auto" => Ok(Param::Auto),
                "optimal" => Ok(Param::Optimal),
                _ => positive(e, "h").map(Param::Fixed),
            }
        })?;
        let n_entry = f.get("scheme", "N");
        let n_half = or(n_entry, Param::Fixed(80), |e| match e.value.as_str() {
            "auto" => Ok(Param::Auto),
            _ => {
                let v: u64 = parse_value(e, "N")?;
                if v == 0 {
                    return Err(Error::config(e.line, "N must be at least 1"));
                }
                Ok(Param::Fixed(v))
            }
        })?;
        let eps_entry = f.get("scheme", "eps");
        let eps = eps_entry.map(|e| positive(e, "eps")).transpose()?;
        let t_max = or(f.get("scheme", "T"), 1.0, |e| positive(e, "T"))?;
        let growth = or(f.get("scheme", "M"), 1.0, |e| {
            let v = positive(e, "M")?;
            if v < 1.0 {
                return Err(Error::config(e.line, "M must be at least 1"));
            }
            Ok(v)
        })?;
        let strategy = or(f.get("scheme", "strategy"), Strategy::Pre, |e| {
            match e.value.as_str() {
                "pre" => Ok(Strategy::Pre),
                "post" => Ok(Strategy::Post),
                v => Err(Error::config(
                    e.line,
                    format!("strategy must be pre or post, got '{v}'"),
                )),
            }
        })?;
        let graph_norm = f
            .get("scheme", "graph_norm")
            .map(|e| positive(e, "graph_norm"))
            .transpose()?;
        let imag_tol = or(f.get("scheme", "imag_tol"), IMAG_TOLERANCE, |e| {
            positive(e, "imag_tol")
        })?;

        let uses_planner = matches!(h, Param::Auto) || matches!(n_half, Param::Auto);
        if uses_planner && eps.is_none() {
            let line = n_entry.or(f.get("scheme", "h")).map_or(0, |e| e.line);
            return Err(Error::config(line, "h or N = auto requires eps"));
        }
        if matches!(h, Param::Optimal) && matches!(n_half, Param::Auto) {
            let line = n_entry.map_or(0, |e| e.line);
            return Err(Error::config(line, "h = optimal needs a fixed N"));
        }
        let scheme = SchemeConfig {
            m,
            delta,
            h,
            n_half,
            eps,
            t_max,
            growth,
            strategy,
            graph_norm,
            imag_tol,
        };

        let two_d = matches!(example, Example::Builtin(3 | 4));
        let default_n = if two_d { 201 } else { 64 };
        let default_l = match example {
            Example::Builtin(3) => 3.0,
            _ => 1.0,
        };
        let grid = GridConfig {
            n: or(f.get("grid", "n"), default_n, |e| {
                let v: usize = parse_value(e, "grid n")?;
                let min = if two_d { 3 } else { 1 };
                if v < min {
                    return Err(Error::config(
                        e.line,
                        format!("grid n must be at least {min}"),
                    ));
                }
                Ok(v)
            })?,
            half_width: or(f.get("grid", "L"), default_l, |e| positive(e, "L"))?,
        };

        let times = match (f.get("run", "times"), f.get("run", "t_points")) {
            (Some(_), Some(e)) => {
                return Err(Error::config(e.line, "give either times or t_points"))
            }
            (Some(e), None) => {
                let v: Vec<f64> = parse_list(e, "times")?;
                if let Some(bad) = v.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                    return Err(Error::config(
                        e.line,
                        format!("times must be non-negative, got {bad}"),
                    ));
                }
                v
            }
            (None, Some(e)) => {
                let k: usize = parse_value(e, "t_points")?;
                if k > MAX_POINTS {
                    return Err(Error::config(
                        e.line,
                        format!("t_points above {MAX_POINTS}"),
                    ));
                }
                uniform_times(t_max, k)
            }
            (None, None) => uniform_times(t_max, 11),
        };

        let export_solution = or(f.get("run", "solution"), false, |e| {
            parse_value(e, "solution")
        })?;

        let bounds = BoundsConfig {
            figure: or(f.get("bounds", "figure"), Figure::NodeSweep, |e| {
                match e.value.as_str() {
                    "2" | "nodes" => Ok(Figure::NodeSweep),
                    "3" | "pole" => Ok(Figure::PoleSweep),
                    "4" | "planner" => Ok(Figure::PlannerSweep),
                    v => Err(Error::config(e.line, format!("unknown figure '{v}'"))),
                }
            })?,
            t: or(f.get("bounds", "t"), 1.0, |e| positive(e, "t"))?,
            n_values: or(f.get("bounds", "N"), vec![100, 200, 400, 800], |e| {
                parse_list(e, "N")
            })?,
            a_values: or(f.get("bounds", "a"), Vec::new(), |e| {
                let v = parse_list(e, "a")?;
                all_positive(e, "a", &v)?;
                Ok(v)
            })?,
            h_values: or(f.get("bounds", "h"), Vec::new(), |e| {
                let v = parse_list(e, "h")?;
                all_positive(e, "h", &v)?;
                Ok(v)
            })?,
            eps_values: or(f.get("bounds", "eps"), Vec::new(), |e| {
                let v = parse_list(e, "eps")?;
                all_positive(e, "eps", &v)?;
                Ok(v)
            })?,
            orders: or(f.get("bounds", "orders"), vec![2, 4, 6, 8], |e| {
                parse_orders(e)
            })?,
            norm: f
                .get("bounds", "norm")
                .map(|e| positive(e, "norm"))
                .transpose()?,
        };
        if let Some(e) = f.get("bounds", "N") {
            if bounds.n_values.contains(&0) {
                return Err(Error::config(e.line, "N values must be at least 1"));
            }
        }

        let converge = ConvergeConfig {
            orders: or(f.get("converge", "orders"), vec![2, 4, 6, 8], |e| {
                parse_orders(e)
            })?,
            n_values: or(f.get("converge", "N"), vec![10, 20, 40, 80, 160], |e| {
                let v: Vec<u64> = parse_list(e, "N")?;
                if v.contains(&0) {
                    return Err(Error::config(e.line, "N values must be at least 1"));
                }
                Ok(v)
            })?,
            t: or(f.get("converge", "t"), t_max, |e| positive(e, "t"))?,
            floor: or(f.get("converge", "floor"), 1e-12, |e| positive(e, "floor"))?,
        };

        let contour_cost = ContourCostConfig {
            deltas: or(
                f.get("contour_cost", "deltas"),
                (1..=10).map(f64::from).collect(),
                |e| {
                    let v = parse_list(e, "deltas")?;
                    all_positive(e, "deltas", &v)?;
                    Ok(v)
                },
            )?,
            tolerances: or(f.get("contour_cost", "tolerances"), vec![1e-4, 1e-8], |e| {
                let v = parse_list(e, "tolerances")?;
                all_positive(e, "tolerances", &v)?;
                Ok(v)
            })?,
            ladder: or(
                f.get("contour_cost", "ladder"),
                vec![8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512],
                |e| {
                    let v: Vec<usize> = parse_list(e, "ladder")?;
                    if v.contains(&0) {
                        return Err(Error::config(e.line, "ladder entries must be at least 1"));
                    }
                    Ok(v)
                },
            )?,
            reference_n: or(f.get("contour_cost", "reference_n"), 1024, |e| {
                parse_value(e, "reference_n")
            })?,
            profile_deltas: or(
                f.get("contour_cost", "profile_deltas"),
                vec![2.0, 5.0, 10.0],
                |e| {
                    let v = parse_list(e, "profile_deltas")?;
                    all_positive(e, "profile_deltas", &v)?;
                    Ok(v)
                },
            )?,
            profile_points: or(f.get("contour_cost", "profile_points"), 401, |e| {
                point_count(e, "profile_points")
            })?,
            eval_points: or(f.get("contour_cost", "eval_points"), 2001, |e| {
                point_count(e, "eval_points")
            })?,
        };
        if let Some(e) = f.get("contour_cost", "reference_n") {
            if contour_cost
                .ladder
                .iter()
                .any(|&n| n >= contour_cost.reference_n)
            {
                return Err(Error::config(
                    e.line,
                    "reference_n must exceed every ladder entry",
                ));
            }
        }

        f.check_unknown()?;
        Ok(ExperimentConfig {
            example,
            scheme,
            grid,
            times,
            export_solution,
            bounds,
            converge,
            contour_cost,
        })
    }
}

const MAX_POINTS: usize = 1_000_000;

fn point_count(e: &Entry, what: &str) -> Result<usize> {
    let k: usize = parse_value(e, what)?;
    if !(2..=MAX_POINTS).contains(&k) {
        return Err(Error::config(
            e.line,
            format!("{what} must lie in [2, {MAX_POINTS}]"),
        ));
    }
    Ok(k)
}

fn parse_orders(e: &Entry) -> Result<Vec<u32>> {
    let v: Vec<u32> = parse_list(e, "orders")?;
    for &m in &v {
        EvenOrder::new(m).map_err(|err| Error::config(e.line, err.to_string()))?;
    }
    Ok(v)
}

/// `k` evenly spaced times on `[0, T]`; a single point is `T` itself.
pub fn uniform_times(t_max: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..k).map(|i| t_max * i as f64 / (k - 1) as f64).collect(),
    }
}
