use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::linalg::RealMatrix;
#[allow(unused_imports)]
use num_traits::Float;

/// The Lorenz system `(σ(v − u), u(r − w) − v, uv − bw)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lorenz {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl Default for Lorenz {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
        }
    }
}

pub fn builtin_lorenz() -> Lorenz {
    Lorenz::default()
}

impl VectorField for Lorenz {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> &str {
        "lorenz"
    }

    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let (u, v, w) = (x[0], x[1], x[2]);
        out[0] = self.sigma * (v - u);
        out[1] = u * (self.r - w) - v;
        out[2] = u * v - self.b * w;
    }

    fn jacobian(&self, _t: f64, x: &[f64]) -> Option<RealMatrix> {
        let (u, v, w) = (x[0], x[1], x[2]);
        Some(
            RealMatrix::from_rows(&[
                [-self.sigma, self.sigma, 0.0],
                [self.r - w, -1.0, -u],
                [v, u, -self.b],
            ])
            .expect("finite 3×3"),
        )
    }
}

/// `ẋ = A(t)x` with `A(t) = R(−ωt) A₀ R(ωt)`, `A₀ = [[−10, 12], [0, −1]]`,
/// ω = 6 and `R` the rotation matrix.
///
/// Every `A(t)` has eigenvalues −1 and −10, yet in the rotating frame
/// `y = R(ωt)x` the system is `ẏ = My` with `M = [[−10, 6], [6, −1]]`,
/// whose eigenvalues are 2 and −13, so solutions grow like `e^{2t}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NonautonomousLinear;

pub fn builtin_nonautonomous_linear() -> NonautonomousLinear {
    NonautonomousLinear
}

impl NonautonomousLinear {
    pub const OMEGA: f64 = 6.0;

    /// Initial condition of the reference solution.
    pub const X0: [f64; 2] = [5.0, 5.0];

    pub fn matrix(&self, t: f64) -> RealMatrix {
        let (s, c) = (Self::OMEGA * t).sin_cos();
        RealMatrix::from_rows(&[
            [-1.0 - 9.0 * c * c + 12.0 * s * c, 12.0 * c * c + 9.0 * s * c],
            [-12.0 * s * s + 9.0 * s * c, -1.0 - 9.0 * s * s - 12.0 * s * c],
        ])
        .expect("finite 2×2")
    }

    /// Exact solution from `x(0) = (5, 5)`.
    pub fn solution(&self, t: f64) -> [f64; 2] {
        self.solution_from(Self::X0, t)
    }

    /// Exact solution `x(t) = R(−ωt) e^{Mt} x₀`.
    ///
    /// `M` has eigenvectors (1, 2) for 2 and (2, −1) for −13.
    pub fn solution_from(&self, x0: [f64; 2], t: f64) -> [f64; 2] {
        let a = (x0[0] + 2.0 * x0[1]) / 5.0;
        let b = (2.0 * x0[0] - x0[1]) / 5.0;
        let grow = a * (2.0 * t).exp();
        let decay = b * (-13.0 * t).exp();
        let y = [grow + 2.0 * decay, 2.0 * grow - decay];
        let (s, c) = (Self::OMEGA * t).sin_cos();
        [c * y[0] + s * y[1], -s * y[0] + c * y[1]]
    }
}

impl VectorField for NonautonomousLinear {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "nonautonomous_linear"
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let (s, c) = (Self::OMEGA * t).sin_cos();
        out[0] = (-1.0 - 9.0 * c * c + 12.0 * s * c) * x[0] + (12.0 * c * c + 9.0 * s * c) * x[1];
        out[1] = (-12.0 * s * s + 9.0 * s * c) * x[0] + (-1.0 - 9.0 * s * s - 12.0 * s * c) * x[1];
    }

    fn jacobian(&self, t: f64, _x: &[f64]) -> Option<RealMatrix> {
        Some(self.matrix(t))
    }
}

/// Autonomous linear field `ẋ = Ax`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearField {
    a: RealMatrix,
}

impl LinearField {
    pub fn new(a: RealMatrix) -> Option<Self> {
        a.is_square().then_some(Self { a })
    }

    /// `ẋ = a·x` in dimension m.
    pub fn scalar(m: usize, a: f64) -> Option<Self> {
        let data: Vec<f64> = (0..m * m)
            .map(|k| if k % (m + 1) == 0 { a } else { 0.0 })
            .collect();
        Self::new(RealMatrix::new(m, m, data).ok()?)
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.a
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn name(&self) -> &str {
        "linear"
    }

    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.a.mul_vec(x, out);
    }

    fn jacobian(&self, _t: f64, _x: &[f64]) -> Option<RealMatrix> {
        Some(self.a.clone())
    }
}
