//! Node dynamics, coupling functions, the network vector field and
//! fixed-step Runge–Kutta integration.
//!
//! Network states are flat slices in node-major order: component k of node i
//! sits at index `i·m + k`.

mod coupling;
mod fields;
mod integrate;
mod perturb;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::RealMatrix;
use crate::network::WeightMatrix;

pub use coupling::{LinearCoupling, TanhCoupling};
pub use fields::{
    builtin_lorenz, builtin_nonautonomous_linear, LinearField, Lorenz, NonautonomousLinear,
};
pub use integrate::{
    integrate, integrate_observed, max_node_norm, Divergence, DivergenceKind, IntegrationSettings,
    Method, Trajectory,
};
pub use perturb::{ConstantBias, Perturbation};
pub(crate) use perturb::unit_vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("step size must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },
    #[error("integration interval [{t0}, {t1}] is empty or not finite")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("coupling strength must be non-negative and finite, got {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("{0}")]
    Invalid(&'static str),
}

/// Isolated node dynamics `ẋ = f(t, x)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// `D₂f(t, x)` when known in closed form.
    fn jacobian(&self, _t: f64, _x: &[f64]) -> Option<RealMatrix> {
        None
    }
}

/// Coupling function `h` with `h(0) = 0` and linearisation `Γ = Dh(0)`.
pub trait CouplingFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    /// `Γ = Dh(0)`.
    fn linearization(&self) -> &RealMatrix;

    /// True when `h(x) = Γx` exactly.
    fn is_linear(&self) -> bool;

    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// A system of ODEs `ẏ = F(t, y)` with caller-provided scratch space.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// State dimension of one node; the full state for a single system.
    fn node_dim(&self) -> usize {
        self.dim()
    }

    fn scratch_len(&self) -> usize {
        0
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64], scratch: &mut [f64]);
}

/// Adapts a single vector field to [`OdeSystem`].
pub struct Isolated<'a>(pub &'a dyn VectorField);

impl OdeSystem for Isolated<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64], _scratch: &mut [f64]) {
        self.0.eval(t, y, dy);
    }
}

/// `ẋᵢ = f(t, xᵢ) + gᵢ(t, xᵢ) + α Σⱼ Wᵢⱼ h(xⱼ − xᵢ)`.
#[derive(Clone)]
pub struct NetworkSystem {
    field: Arc<dyn VectorField>,
    coupling: Arc<dyn CouplingFunction>,
    weights: WeightMatrix,
    alpha: f64,
    perturbation: Option<Arc<dyn Perturbation>>,
}

impl core::fmt::Debug for NetworkSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NetworkSystem")
            .field("field", &self.field.name())
            .field("coupling", &self.coupling.name())
            .field("n", &self.weights.n())
            .field("alpha", &self.alpha)
            .field("perturbed", &self.perturbation.is_some())
            .finish()
    }
}

impl NetworkSystem {
    pub fn new(
        field: Arc<dyn VectorField>,
        coupling: Arc<dyn CouplingFunction>,
        weights: WeightMatrix,
        alpha: f64,
    ) -> Result<Self, DynamicsError> {
        if field.dim() != coupling.dim() {
            return Err(DynamicsError::Dimension {
                what: "coupling function",
                expected: field.dim(),
                got: coupling.dim(),
            });
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(DynamicsError::InvalidAlpha { alpha });
        }
        Ok(Self {
            field,
            coupling,
            weights,
            alpha,
            perturbation: None,
        })
    }

    pub fn with_perturbation(
        mut self,
        perturbation: Arc<dyn Perturbation>,
    ) -> Result<Self, DynamicsError> {
        if perturbation.nodes() != self.n() || perturbation.dim() != self.m() {
            return Err(DynamicsError::Dimension {
                what: "perturbation",
                expected: self.n() * self.m(),
                got: perturbation.nodes() * perturbation.dim(),
            });
        }
        self.perturbation = Some(perturbation);
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, DynamicsError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(DynamicsError::InvalidAlpha { alpha });
        }
        let mut s = self.clone();
        s.alpha = alpha;
        Ok(s)
    }

    pub fn with_coupling(&self, coupling: Arc<dyn CouplingFunction>) -> Result<Self, DynamicsError> {
        let mut s = Self::new(self.field.clone(), coupling, self.weights.clone(), self.alpha)?;
        s.perturbation = self.perturbation.clone();
        Ok(s)
    }

    pub fn field(&self) -> &Arc<dyn VectorField> {
        &self.field
    }

    pub fn coupling(&self) -> &Arc<dyn CouplingFunction> {
        &self.coupling
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn perturbation(&self) -> Option<&Arc<dyn Perturbation>> {
        self.perturbation.as_ref()
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn m(&self) -> usize {
        self.field.dim()
    }

    /// The synchronised state `𝟙 ⊗ s`.
    pub fn replicate(&self, s: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n() * s.len());
        for _ in 0..self.n() {
            x.extend_from_slice(s);
        }
        x
    }
}

impl OdeSystem for NetworkSystem {
    fn dim(&self) -> usize {
        self.n() * self.m()
    }

    fn node_dim(&self) -> usize {
        self.m()
    }

    fn scratch_len(&self) -> usize {
        3 * self.m()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64], scratch: &mut [f64]) {
        let n = self.n();
        let m = self.m();
        let w = self.weights.matrix();
        let (diff, rest) = scratch.split_at_mut(m);
        let (h, acc) = rest.split_at_mut(m);
        for i in 0..n {
            let xi = &x[i * m..(i + 1) * m];
            let out = &mut dx[i * m..(i + 1) * m];
            self.field.eval(t, xi, out);
            if let Some(g) = &self.perturbation {
                g.eval(i, t, xi, h);
                for k in 0..m {
                    out[k] += h[k];
                }
            }
            acc.fill(0.0);
            for j in 0..n {
                let wij = w[(i, j)];
                if wij == 0.0 {
                    continue;
                }
                let xj = &x[j * m..(j + 1) * m];
                for k in 0..m {
                    diff[k] = xj[k] - xi[k];
                }
                self.coupling.eval(diff, h);
                for k in 0..m {
                    acc[k] += wij * h[k];
                }
            }
            for k in 0..m {
                out[k] += self.alpha * acc[k];
            }
        }
    }
}

/// Evaluates the network vector field at `(t, X)`.
pub fn network_rhs(system: &NetworkSystem, t: f64, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let dim = OdeSystem::dim(system);
    if x.len() != dim {
        return Err(DynamicsError::Dimension {
            what: "network state",
            expected: dim,
            got: x.len(),
        });
    }
    let mut dx = vec![0.0; dim];
    let mut scratch = vec![0.0; system.scratch_len()];
    system.rhs(t, x, &mut dx, &mut scratch);
    Ok(dx)
}

/// Central finite-difference Jacobian of a vector field.
pub fn finite_difference_jacobian(field: &dyn VectorField, t: f64, x: &[f64], h: f64) -> RealMatrix {
    let m = field.dim();
    let mut jac = RealMatrix::zeros(m, m);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for k in 0..m {
        xp[k] = x[k] + h;
        field.eval(t, &xp, &mut fp);
        xp[k] = x[k] - h;
        field.eval(t, &xp, &mut fm);
        xp[k] = x[k];
        for i in 0..m {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}
