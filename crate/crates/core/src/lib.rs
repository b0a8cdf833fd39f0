//! Semigroup evaluation `exp(tA)x` by regularized contour quadrature of the
//! resolvent along a vertical line.
//!
//! ```
//! use semiquad::discretize::{build_koopman_1d, DiscreteField1d};
//! use semiquad::operators::graph_norm;
//! use semiquad::{assemble, plan, precompute, EvenOrder, PrecomputeOptions, SemigroupConstants};
//!
//! # fn main() -> semiquad::Result<()> {
//! let field = DiscreteField1d::chebyshev(64, |x| -x)?;
//! let backend = build_koopman_1d(&field)?;
//! let x = field.sample(|x| (std::f64::consts::PI * x).sin() * (1.0 - x * x));
//!
//! let m = EvenOrder::new(6)?;
//! let norm = graph_norm(&backend, &x, 2.0, m.get())?;
//! let p = plan(1e-6, 2.0, m, 1.0, SemigroupConstants::contraction(), norm)?;
//! let samples = precompute(&backend, &x, &p, &PrecomputeOptions::default())?;
//! let u = assemble(&samples, 0.5, &backend)?;
//!
//! let exact = field.sample(|x| {
//!     let y = x * (-0.5f64).exp();
//!     (std::f64::consts::PI * y).sin() * (1.0 - y * y)
//! });
//! let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
//! assert!(err < 1e-5);
//! # Ok(())
//! # }
//! ```

pub mod bounds;
pub mod config;
pub mod contour;
pub mod discretize;
pub mod error;
pub mod experiments;
pub mod flows;
pub mod hypergeo;
pub mod operators;
pub mod params;

pub use bounds::{total_budget, ErrorBudget, Scheme, SemigroupConstants};
pub use config::ExperimentConfig;
pub use contour::{
    assemble, decode_samples, encode_samples, precompute, PrecomputeOptions, ResolventSampleSet,
    Strategy,
};
pub use error::{Error, Result};
pub use hypergeo::EvenOrder;
pub use operators::{DenseBackend, GeneratorBackend, SparseBackend};
pub use params::{optimize_spacing, plan, ContourPlan};
