//! Quadrature nodes, coefficients, resolvent sampling and assembly.
//!
//! The approximation of `exp(At)x` is
//!
//! ```text
//! S(t) = Σ_{k=−N}^{N} c_k(t) u_k,   c_k(t) = h/(2π) · e^{(δ+ihk)t} / (δ−ihk)^m
//! ```
//!
//! where `u_k` solves `(z_k − A) u_k = (2δ − A)^m x` (pre-regularized) or
//! `(z_k − A) u_k = x` followed by one application of `(2δ − A)^m` to the sum
//! (post-regularized). The solves do not depend on `t`, so one sample set
//! serves every evaluation time.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergeo::EvenOrder;
use crate::operators::{apply_shift_poly, solve_shifted, sup_norm, GeneratorBackend};
use crate::params::ContourPlan;

/// Default relative tolerance on the imaginary part of an assembled sum.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Default residual ceiling, relative to the right-hand side's sup-norm.
pub const RESIDUAL_CEILING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub k: i64,
    pub z: Complex64,
}

/// Nodes `z_k = δ + ihk` in ascending `k`.
pub fn nodes(plan: &ContourPlan) -> Result<Vec<QuadratureNode>> {
    plan.validate()?;
    let n = plan.n_half as i64;
    Ok((-n..=n)
        .map(|k| QuadratureNode {
            k,
            z: node(plan, k),
        })
        .collect())
}

fn node(plan: &ContourPlan, k: i64) -> Complex64 {
    Complex64::new(plan.delta, plan.h * k as f64)
}

/// `c_k(t) = h/(2π) · e^{(δ+ihk)t} / (δ−ihk)^m`, built from modulus and
/// argument so that large `m` or `t` cannot overflow an intermediate power.
pub fn coefficient(plan: &ContourPlan, k: i64, t: f64) -> Complex64 {
    let (delta, hk) = (plan.delta, plan.h * k as f64);
    let m = plan.m.as_f64();
    let log_mod =
        plan.h.ln() - (2.0 * PI).ln() + delta * t - 0.5 * m * (delta * delta + hk * hk).ln();
    let arg = hk * t + m * hk.atan2(delta);
    Complex64::from_polar(log_mod.exp(), arg)
}

/// `max_k |c_k| / min_k |c_k| = ((δ² + h²N²)/δ²)^{m/2}`.
pub fn coefficient_dynamic_range(plan: &ContourPlan) -> f64 {
    let ratio = plan.h * plan.n_half as f64 / plan.delta;
    (0.5 * plan.m.as_f64() * (ratio * ratio).ln_1p()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Solve against `(2δ − A)^m x`, return the sum directly.
    #[default]
    Pre,
    /// Solve against `x`, apply `(2δ − A)^m` to the sum.
    Post,
}

impl Strategy {
    fn code(self) -> u8 {
        match self {
            Strategy::Pre => 0,
            Strategy::Post => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Strategy::Pre),
            1 => Ok(Strategy::Post),
            _ => Err(Error::Decode(format!("unknown strategy code {c}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub k: i64,
    pub z: Complex64,
    pub u: Vec<Complex64>,
    /// `‖(z − A) u − rhs‖_∞`, recomputed.
    pub residual: f64,
}

/// The `2N + 1` resolvent samples of one input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSampleSet {
    pub plan: ContourPlan,
    /// Ascending `k = −N..=N`.
    pub samples: Vec<Sample>,
    pub x_tag: String,
    pub strategy: Strategy,
    /// Negative-`k` samples were mirrored from `k > 0` rather than solved.
    pub mirrored: bool,
    /// Some node exceeded the residual ceiling.
    pub residual_warning: bool,
}

impl ResolventSampleSet {
    pub fn dimension(&self) -> usize {
        self.samples.first().map_or(0, |s| s.u.len())
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, s| acc.max(s.residual))
    }

    /// Checks count, ordering, node positions and vector lengths.
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        let n = self.plan.n_half as i64;
        if self.samples.len() as u64 != 2 * self.plan.n_half + 1 {
            return Err(Error::Samples(format!(
                "expected {} samples, found {}",
                2 * n + 1,
                self.samples.len()
            )));
        }
        let dim = self.dimension();
        for (s, k) in self.samples.iter().zip(-n..=n) {
            if s.k != k {
                return Err(Error::Samples(format!(
                    "sample for k = {k} missing (found k = {})",
                    s.k
                )));
            }
            let z = node(&self.plan, k);
            if (s.z - z).norm() > 1e-12 * z.norm() {
                return Err(Error::Samples(format!(
                    "sample k = {k} is at {} not {z}",
                    s.z
                )));
            }
            if s.u.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: s.u.len(),
                });
            }
        }
        Ok(())
    }

    /// Largest `‖u_{−k} − conj(u_k)‖_∞`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.plan.n_half as usize;
        (1..=n)
            .map(|k| {
                let (a, b) = (&self.samples[n + k].u, &self.samples[n - k].u);
                a.iter()
                    .zip(b)
                    .fold(0.0f64, |acc, (p, q)| acc.max((p.conj() - q).norm()))
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_k |c_k(t)| · ‖r_k‖/δ`, the solve-error contribution to the sum.
    pub fn solve_error_bound(&self, t: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| coefficient(&self.plan, s.k, t).norm() * s.residual / self.plan.delta)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct PrecomputeOptions {
    pub strategy: Strategy,
    /// Solve only `k ≥ 0` and mirror; ignored for complex data.
    pub symmetry: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub residual_ceiling: f64,
    pub x_tag: String,
}

impl Default for PrecomputeOptions {
    fn default() -> Self {
        PrecomputeOptions {
            strategy: Strategy::Pre,
            symmetry: true,
            workers: None,
            residual_ceiling: RESIDUAL_CEILING,
            x_tag: String::new(),
        }
    }
}

/// Precompute for a real input vector.
pub fn precompute(
    backend: &dyn GeneratorBackend,
    x: &[f64],
    plan: &ContourPlan,
    opts: &PrecomputeOptions,
) -> Result<ResolventSampleSet> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    precompute_complex(backend, &xc, plan, opts)
}

/// Solve `(z_k − A) u_k = rhs` at every node. The solves are independent and
/// run on a rayon pool; results are merged in `k` order.
pub fn precompute_complex(
    backend: &dyn GeneratorBackend,
    x: &[Complex64],
    plan: &ContourPlan,
    opts: &PrecomputeOptions,
) -> Result<ResolventSampleSet> {
    plan.validate()?;
    if x.len() != backend.dimension() {
        return Err(Error::Dimension {
            expected: backend.dimension(),
            got: x.len(),
        });
    }
    let rhs = match opts.strategy {
        Strategy::Pre => apply_shift_poly(backend, x, 2.0 * plan.delta, plan.m.get())?,
        Strategy::Post => x.to_vec(),
    };
    let real_data = backend.is_real() && x.iter().all(|v| v.im == 0.0);
    let mirrored = opts.symmetry && real_data;
    let n = plan.n_half as i64;
    let ks: Vec<i64> = if mirrored {
        (0..=n).collect()
    } else {
        (-n..=n).collect()
    };

    log::debug!(
        "precompute: {} solves of size {}, coefficient range {:.3e}",
        ks.len(),
        x.len(),
        coefficient_dynamic_range(plan)
    );

    let solve = |&k: &i64| -> Result<Sample> {
        let z = node(plan, k);
        let s = solve_shifted(backend, z, &rhs)?;
        Ok(Sample {
            k,
            z,
            u: s.u,
            residual: s.residual,
        })
    };
    let solved: Vec<Sample> = match opts.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
            pool.install(|| ks.par_iter().map(solve).collect::<Result<_>>())?
        }
        None => ks.par_iter().map(solve).collect::<Result<_>>()?,
    };

    let samples = if mirrored {
        let mut all: Vec<Sample> = solved[1..]
            .iter()
            .rev()
            .map(|s| Sample {
                k: -s.k,
                z: s.z.conj(),
                u: s.u.iter().map(|v| v.conj()).collect(),
                residual: s.residual,
            })
            .collect();
        all.extend(solved);
        all
    } else {
        solved
    };

    let limit = opts.residual_ceiling * sup_norm(&rhs);
    let worst = samples.iter().fold(0.0f64, |acc, s| acc.max(s.residual));
    let residual_warning = worst > limit;
    if residual_warning {
        log::warn!("node residual {worst:.3e} exceeds ceiling {limit:.3e}");
    }
    Ok(ResolventSampleSet {
        plan: *plan,
        samples,
        x_tag: opts.x_tag.clone(),
        strategy: opts.strategy,
        mirrored,
        residual_warning,
    })
}

/// `S(t)` as a complex vector, without the symmetry check.
pub fn assemble_complex(
    set: &ResolventSampleSet,
    t: f64,
    backend: &dyn GeneratorBackend,
) -> Result<Vec<Complex64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    set.validate()?;
    if t > set.plan.t_max {
        log::warn!("t = {t} lies beyond the planned horizon {}", set.plan.t_max);
    }
    let dim = set.dimension();
    let mut sum = vec![Complex64::new(0.0, 0.0); dim];
    for s in &set.samples {
        let c = coefficient(&set.plan, s.k, t);
        for (acc, u) in sum.iter_mut().zip(&s.u) {
            *acc += c * u;
        }
    }
    match set.strategy {
        Strategy::Pre => Ok(sum),
        Strategy::Post => apply_shift_poly(backend, &sum, 2.0 * set.plan.delta, set.plan.m.get()),
    }
}

/// Approximation of `exp(At)x` for real data.
pub fn assemble(
    set: &ResolventSampleSet,
    t: f64,
    backend: &dyn GeneratorBackend,
) -> Result<Vec<f64>> {
    assemble_with_tolerance(set, t, backend, IMAG_TOLERANCE)
}

/// As [`assemble`], with the imaginary-part tolerance given explicitly.
pub fn assemble_with_tolerance(
    set: &ResolventSampleSet,
    t: f64,
    backend: &dyn GeneratorBackend,
    imag_tol: f64,
) -> Result<Vec<f64>> {
    let sum = assemble_complex(set, t, backend)?;
    let total = sup_norm(&sum);
    let imag = sum.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
    if imag > imag_tol * total {
        return Err(Error::Symmetry {
            imag,
            limit: imag_tol * total,
        });
    }
    Ok(sum.iter().map(|v| v.re).collect())
}

const MAGIC: &[u8; 4] = b"SQRS";
const VERSION: u8 = 1;

/// Serialize a sample set (little-endian binary).
pub fn encode_samples(set: &ResolventSampleSet) -> Vec<u8> {
    let dim = set.dimension();
    let mut out = Vec::with_capacity(64 + set.samples.len() * (32 + 16 * dim));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(set.strategy.code());
    out.push(u8::from(set.mirrored));
    out.push(u8::from(set.residual_warning));
    for v in [set.plan.delta, set.plan.h] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&set.plan.n_half.to_le_bytes());
    out.extend_from_slice(&set.plan.m.get().to_le_bytes());
    out.extend_from_slice(&set.plan.t_max.to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    out.extend_from_slice(&(set.x_tag.len() as u32).to_le_bytes());
    out.extend_from_slice(set.x_tag.as_bytes());
    out.extend_from_slice(&(set.samples.len() as u64).to_le_bytes());
    for s in &set.samples {
        out.extend_from_slice(&s.k.to_le_bytes());
        for v in [s.z.re, s.z.im, s.residual] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for u in &s.u {
            out.extend_from_slice(&u.re.to_le_bytes());
            out.extend_from_slice(&u.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Decode("unexpected end of input".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64> {
        let v = f64::from_le_bytes(self.array()?);
        if !v.is_finite() {
            return Err(Error::Decode("non-finite value".into()));
        }
        Ok(v)
    }
}

fn flag(b: u8) -> Result<bool> {
    match b {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::Decode(format!("bad flag byte {b}"))),
    }
}

/// Inverse of [`encode_samples`]. Never panics on malformed input.
pub fn decode_samples(bytes: &[u8]) -> Result<ResolventSampleSet> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let strategy = Strategy::from_code(r.u8()?)?;
    let mirrored = flag(r.u8()?)?;
    let residual_warning = flag(r.u8()?)?;
    let delta = r.f64()?;
    let h = r.f64()?;
    let n_half = r.u64()?;
    let m = EvenOrder::new(r.u32()?).map_err(|e| Error::Decode(e.to_string()))?;
    let t_max = r.f64()?;
    let plan =
        ContourPlan::new(delta, h, n_half, m, t_max).map_err(|e| Error::Decode(e.to_string()))?;
    let dim = r.u64()?;
    let tag_len = r.u32()? as usize;
    let x_tag = std::str::from_utf8(r.take(tag_len)?)
        .map_err(|_| Error::Decode("tag is not UTF-8".into()))?
        .to_owned();
    let count = r.u64()?;
    if n_half > (u64::MAX - 1) / 2 || count != 2 * n_half + 1 {
        return Err(Error::Decode(format!(
            "sample count {count} does not match N = {n_half}"
        )));
    }
    // every sample needs 32 bytes of header plus the payload
    let per_sample = dim
        .checked_mul(16)
        .and_then(|p| p.checked_add(32))
        .ok_or_else(|| Error::Decode("vector length overflows".into()))?;
    let needed = per_sample
        .checked_mul(count)
        .ok_or_else(|| Error::Decode("payload size overflows".into()))?;
    if needed != r.buf.len() as u64 {
        return Err(Error::Decode(format!(
            "payload is {} bytes, expected {needed}",
            r.buf.len()
        )));
    }
    let dim = dim as usize;
    let mut samples = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let k = r.i64()?;
        let z = Complex64::new(r.f64()?, r.f64()?);
        let residual = r.f64()?;
        if residual < 0.0 {
            return Err(Error::Decode("negative residual".into()));
        }
        let mut u = Vec::with_capacity(dim);
        for _ in 0..dim {
            u.push(Complex64::new(r.f64()?, r.f64()?));
        }
        samples.push(Sample { k, z, u, residual });
    }
    let set = ResolventSampleSet {
        plan,
        samples,
        x_tag,
        strategy,
        mirrored,
        residual_warning,
    };
    set.validate().map_err(|e| Error::Decode(e.to_string()))?;
    Ok(set)
}
