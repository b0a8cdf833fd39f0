//! Sample reuse across times, and residual-based solve error bounds.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiquad::bounds::SemigroupConstants;
use semiquad::contour::{assemble, precompute, PrecomputeOptions};
use semiquad::discretize::{build_koopman_1d, DiscreteField1d};
use semiquad::flows::velocity_example1;
use semiquad::hypergeo::EvenOrder;
use semiquad::operators::{
    aposteriori_bound, residual_norm, sup_norm, DenseBackend, GeneratorBackend,
};
use semiquad::params::ContourPlan;
use semiquad::Result;

struct Counting {
    inner: DenseBackend,
    solves: AtomicUsize,
}

impl GeneratorBackend for Counting {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn constants(&self) -> SemigroupConstants {
        self.inner.constants()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.inner.apply(x)
    }
    fn solve_raw(&self, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.inner.solve_raw(z, x)
    }
}

fn example1(n: usize) -> DenseBackend {
    build_koopman_1d(&DiscreteField1d::chebyshev(n, velocity_example1).unwrap()).unwrap()
}

#[test]
fn many_times_cost_one_precompute() {
    let backend = Counting {
        inner: example1(32),
        solves: AtomicUsize::new(0),
    };
    let plan = ContourPlan::new(2.0, 0.3, 40, EvenOrder::new(6).unwrap(), 1.0).unwrap();
    let x: Vec<f64> = (0..=32).map(|i| (i as f64 * 0.2).sin()).collect();
    let set = precompute(&backend, &x, &plan, &PrecomputeOptions::default()).unwrap();
    assert_eq!(backend.solves.load(Ordering::Relaxed), 41);
    for i in 0..100 {
        assemble(&set, i as f64 / 99.0, &backend).unwrap();
    }
    assert_eq!(backend.solves.load(Ordering::Relaxed), 41);
}

#[test]
fn without_symmetry_every_node_is_solved() {
    let backend = Counting {
        inner: example1(16),
        solves: AtomicUsize::new(0),
    };
    let plan = ContourPlan::new(2.0, 0.3, 10, EvenOrder::new(2).unwrap(), 1.0).unwrap();
    let opts = PrecomputeOptions {
        symmetry: false,
        ..PrecomputeOptions::default()
    };
    precompute(&backend, &[1.0; 17], &plan, &opts).unwrap();
    assert_eq!(backend.solves.load(Ordering::Relaxed), 21);
}

#[test]
fn residual_over_delta_dominates_solve_error() {
    let backend = example1(24);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = backend.dimension();
    for delta in [0.5, 2.0, 10.0] {
        for _ in 0..30 {
            let z = Complex64::new(delta, rng.gen_range(-50.0..50.0));
            let b: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                .collect();
            let u = backend.solve_raw(z, &b).unwrap();
            let scale = 10f64.powf(rng.gen_range(-12.0..-2.0));
            let noisy: Vec<Complex64> = u
                .iter()
                .map(|v| {
                    v + scale * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .collect();
            let err = sup_norm(&noisy.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
            let r = residual_norm(&backend, z, &noisy, &b);
            assert!(
                err <= aposteriori_bound(r, delta).unwrap() * (1.0 + 1e-6),
                "δ={delta}: {err} > {r}/δ"
            );
        }
    }
}
