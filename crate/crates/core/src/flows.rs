//! Exact flows of the example vector fields, their observables, and an
//! adaptive Dormand–Prince integrator used as an independent reference.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `ẋ = −x`.
pub fn flow_example1(x: f64, t: f64) -> f64 {
    x * (-t).exp()
}

/// `ẋ = 2x − 8x³`: `x e^{2t} / √(1 + 4x²(e^{4t} − 1))`, evaluated after
/// dividing through by `e^{2t}` so large `t` cannot overflow.
pub fn flow_example2(x: f64, t: f64) -> f64 {
    let decay = (-4.0 * t).exp();
    x / (decay - 4.0 * x * x * (-4.0 * t).exp_m1()).sqrt()
}

/// `ẋ = Bx` with `B = [0 1; −1 0]`.
pub fn flow_example3(p: [f64; 2], t: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    [c * p[0] + s * p[1], -s * p[0] + c * p[1]]
}

/// Example 2 in each coordinate.
pub fn flow_example4(p: [f64; 2], t: f64) -> [f64; 2] {
    [flow_example2(p[0], t), flow_example2(p[1], t)]
}

/// Velocity fields of the examples.
pub fn velocity_example1(x: f64) -> f64 {
    -x
}

pub fn velocity_example2(x: f64) -> f64 {
    2.0 * x - 8.0 * x * x * x
}

pub fn velocity_example3(x: f64, y: f64) -> [f64; 2] {
    [y, -x]
}

pub fn velocity_example4(x: f64, y: f64) -> [f64; 2] {
    [velocity_example2(x), velocity_example2(y)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMap {
    Example1,
    Example2,
    Example3,
    Example4,
}

impl FlowMap {
    pub fn from_example(example: u32) -> Result<Self> {
        match example {
            1 => Ok(FlowMap::Example1),
            2 => Ok(FlowMap::Example2),
            3 => Ok(FlowMap::Example3),
            4 => Ok(FlowMap::Example4),
            _ => Err(Error::domain(format!(
                "no built-in flow for example {example}"
            ))),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            FlowMap::Example1 | FlowMap::Example2 => 1,
            FlowMap::Example3 | FlowMap::Example4 => 2,
        }
    }

    pub fn evaluate(self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("time must be non-negative, got {t}")));
        }
        Ok(match self {
            FlowMap::Example1 => vec![flow_example1(x[0], t)],
            FlowMap::Example2 => vec![flow_example2(x[0], t)],
            FlowMap::Example3 => flow_example3([x[0], x[1]], t).to_vec(),
            FlowMap::Example4 => flow_example4([x[0], x[1]], t).to_vec(),
        })
    }

    /// `F(x)` into `out`.
    pub fn velocity(self, x: &[f64], out: &mut [f64]) {
        match self {
            FlowMap::Example1 => out[0] = velocity_example1(x[0]),
            FlowMap::Example2 => out[0] = velocity_example2(x[0]),
            FlowMap::Example3 => out.copy_from_slice(&velocity_example3(x[0], x[1])),
            FlowMap::Example4 => out.copy_from_slice(&velocity_example4(x[0], x[1])),
        }
    }
}

/// Observables of the examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `sin(πx)(1 − x²)` on `[−1, 1]`.
    SinBump,
    /// `1 − x²` on `[−1, 1]`.
    Parabola,
    /// `exp(−2x² − y²/2)` on the plane.
    Gaussian,
}

impl Observable {
    pub fn for_example(example: u32) -> Result<Self> {
        match example {
            1 => Ok(Observable::SinBump),
            2 => Ok(Observable::Parabola),
            3 | 4 => Ok(Observable::Gaussian),
            _ => Err(Error::domain(format!(
                "no built-in observable for example {example}"
            ))),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Observable::SinBump | Observable::Parabola => 1,
            Observable::Gaussian => 2,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Observable::SinBump => (PI * x[0]).sin() * (1.0 - x[0] * x[0]),
            Observable::Parabola => 1.0 - x[0] * x[0],
            Observable::Gaussian => (-2.0 * x[0] * x[0] - 0.5 * x[1] * x[1]).exp(),
        }
    }

    fn contains(self, x: &[f64]) -> bool {
        match self {
            Observable::SinBump | Observable::Parabola => x[0].abs() <= 1.0 + 1e-12,
            Observable::Gaussian => x.iter().all(|v| v.is_finite()),
        }
    }
}

/// `[K(t)g](x) = g(φ(x, t))`.
pub fn exact_pullback(flow: FlowMap, g: Observable, x: &[f64], t: f64) -> Result<f64> {
    if flow.dim() != g.dim() {
        return Err(Error::Dimension {
            expected: g.dim(),
            got: flow.dim(),
        });
    }
    let y = flow.evaluate(x, t)?;
    if !g.contains(&y) {
        return Err(Error::domain(format!(
            "flow leaves the observable's domain at {y:?}"
        )));
    }
    Ok(g.eval(&y))
}

// Dormand–Prince 5(4) tableau; the fields are autonomous so the nodes c_i are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `ẋ = F(x)` from `x0` over `[0, t]` with local tolerance `tol`
/// (mixed absolute/relative).
pub fn ode_oracle(
    f: impl Fn(&[f64], &mut [f64]),
    x0: &[f64],
    t: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::domain(format!(
            "tolerance must lie in [1e-14, 1e-6], got {tol}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    let d = x0.len();
    let mut y = x0.to_vec();
    if t == 0.0 {
        return Ok(y);
    }
    let mut k = vec![vec![0.0; d]; 7];
    let mut stage = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut s = 0.0;
    let mut h = (0.01 * t).min(tol.powf(0.2));
    f(&y, &mut k[0]);
    let floor = 1e-14 * t.max(1.0);
    while t - s > floor {
        if s + h > t {
            h = t - s;
        }
        if h < floor {
            return Err(Error::domain("step size underflow in ODE integration"));
        }
        for i in 1..7 {
            for j in 0..d {
                let mut acc = y[j];
                for (l, kl) in k.iter().enumerate().take(i) {
                    acc += h * A[i][l] * kl[j];
                }
                stage[j] = acc;
            }
            f(&stage, &mut k[i]);
        }
        let mut err: f64 = 0.0;
        for j in 0..d {
            let mut hi = y[j];
            let mut e = 0.0;
            for i in 0..7 {
                hi += h * B5[i] * k[i][j];
                e += h * (B5[i] - B4[i]) * k[i][j];
            }
            trial[j] = hi;
            err = err.max(e.abs() / (tol * y[j].abs().max(hi.abs()).max(1.0)));
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            s += h;
            y.copy_from_slice(&trial);
            // first-same-as-last: stage 7 is F at the accepted point
            let last = k[6].clone();
            k[0] = last;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn example1_values() {
        assert_eq!(flow_example1(0.0, 3.0), 0.0);
        assert_relative_eq!(flow_example1(1.0, 2f64.ln()), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn example2_fixed_points_and_limit() {
        for t in [0.0, 0.5, 3.0, 50.0] {
            assert_eq!(flow_example2(0.0, t), 0.0);
            assert_relative_eq!(flow_example2(0.5, t), 0.5, max_relative = 1e-15);
            assert_relative_eq!(flow_example2(-0.5, t), -0.5, max_relative = 1e-15);
        }
        assert_relative_eq!(flow_example2(0.01, 1e3), 0.5, max_relative = 1e-15);
        assert_relative_eq!(flow_example2(0.9, 1e3), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn example3_rotation_direction() {
        let p = flow_example3([1.0, 0.0], PI / 2.0);
        assert!(p[0].abs() < 1e-15);
        assert_relative_eq!(p[1], -1.0, max_relative = 1e-15);
        let q = flow_example3([0.3, -0.7], 2.0 * PI);
        assert!((q[0] - 0.3).abs() < 1e-14 && (q[1] + 0.7).abs() < 1e-14);
    }

    #[test]
    fn example4_is_componentwise() {
        let p = flow_example4([0.2, -0.9], 0.7);
        assert_eq!(p, [flow_example2(0.2, 0.7), flow_example2(-0.9, 0.7)]);
        assert_eq!(flow_example4([0.0, 0.0], 4.0), [0.0, 0.0]);
    }

    #[test]
    fn oracle_linear_decay() {
        let y = ode_oracle(|x, out| out[0] = -x[0], &[1.0], 1.0, 1e-13).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_bad_tolerance() {
        assert!(ode_oracle(|_, out| out[0] = 0.0, &[1.0], 1.0, 1e-3).is_err());
        assert!(ode_oracle(|_, out| out[0] = 0.0, &[1.0], -1.0, 1e-10).is_err());
    }

    #[test]
    fn pullback_examples() {
        let g = Observable::SinBump;
        for &x in &[-0.8, 0.1, 0.6] {
            assert_eq!(
                exact_pullback(FlowMap::Example1, g, &[x], 0.0).unwrap(),
                g.eval(&[x])
            );
        }
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(
                exact_pullback(FlowMap::Example1, g, &[0.0], t).unwrap(),
                0.0
            );
        }
        assert!(exact_pullback(FlowMap::Example1, Observable::Gaussian, &[0.1], 1.0).is_err());
        assert!(FlowMap::Example2.evaluate(&[0.1], -1.0).is_err());
    }
}
