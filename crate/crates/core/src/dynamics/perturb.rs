use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::RealMatrix;
#[allow(unused_imports)]
use num_traits::Float;

/// Per-node perturbations `gᵢ(t, x)` with `sup ‖gᵢ‖ ≤ ε₀`.
pub trait Perturbation: Send + Sync {
    fn nodes(&self) -> usize;

    fn dim(&self) -> usize;

    /// The declared bound ε₀.
    fn eps0(&self) -> f64;

    fn eval(&self, node: usize, t: f64, x: &[f64], out: &mut [f64]);
}

/// Constant biases `gᵢ(t, x) = bᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantBias {
    biases: RealMatrix,
    eps0: f64,
}

impl ConstantBias {
    /// Biases given as the rows of an `n × m` matrix; ε₀ is the largest row
    /// norm.
    pub fn new(biases: RealMatrix) -> Self {
        let eps0 = (0..biases.rows())
            .map(|i| biases.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Self { biases, eps0 }
    }

    /// Seeded random directions, each of Euclidean norm exactly `eps0` up to
    /// rounding.
    pub fn random(n: usize, m: usize, eps0: f64, seed: u64) -> Option<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * m);
        for _ in 0..n {
            let dir = unit_vector(&mut rng, m);
            data.extend(dir.into_iter().map(|d| d * eps0));
        }
        let biases = RealMatrix::new(n, m, data).ok()?;
        Some(Self { biases, eps0 })
    }

    /// Same directions, magnitudes multiplied by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            biases: self.biases.scale(factor),
            eps0: self.eps0 * factor,
        }
    }

    pub fn biases(&self) -> &RealMatrix {
        &self.biases
    }
}

impl Perturbation for ConstantBias {
    fn nodes(&self) -> usize {
        self.biases.rows()
    }

    fn dim(&self) -> usize {
        self.biases.cols()
    }

    fn eps0(&self) -> f64 {
        self.eps0
    }

    fn eval(&self, node: usize, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.biases.row(node));
    }
}

/// Uniformly distributed direction on the unit sphere in ℝᵐ.
pub(crate) fn unit_vector<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
