use super::CouplingFunction;
use crate::linalg::RealMatrix;
#[allow(unused_imports)]
use num_traits::Float;

/// `h(x) = Γx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoupling {
    gamma: RealMatrix,
}

impl LinearCoupling {
    pub fn new(gamma: RealMatrix) -> Option<Self> {
        gamma.is_square().then_some(Self { gamma })
    }
}

impl CouplingFunction for LinearCoupling {
    fn dim(&self) -> usize {
        self.gamma.rows()
    }

    fn name(&self) -> &str {
        "linear"
    }

    fn linearization(&self) -> &RealMatrix {
        &self.gamma
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.gamma.mul_vec(x, out);
    }
}

/// `h(x) = Γ tanh(x)` with `tanh` applied componentwise; `Dh(0) = Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TanhCoupling {
    gamma: RealMatrix,
}

impl TanhCoupling {
    pub fn new(gamma: RealMatrix) -> Option<Self> {
        gamma.is_square().then_some(Self { gamma })
    }
}

impl CouplingFunction for TanhCoupling {
    fn dim(&self) -> usize {
        self.gamma.rows()
    }

    fn name(&self) -> &str {
        "tanh"
    }

    fn linearization(&self) -> &RealMatrix {
        &self.gamma
    }

    fn is_linear(&self) -> bool {
        false
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (g, xk) in self.gamma.row(i).iter().zip(x) {
                acc += g * xk.tanh();
            }
            *o = acc;
        }
    }
}
