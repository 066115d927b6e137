//! Synchronisation certificates.
//!
//! With Laplacian eigenvalues λᵢ and coupling eigenvalues βⱼ, the network
//! synchronises locally once `α > ρ/γ`, where `γ = min Re(λᵢβⱼ)` over the
//! non-zero λᵢ and ρ bounds the Jacobian of the node dynamics in the
//! coordinates that diagonalise the coupling. The rate is `αγ − ρ`.

mod coupling;

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{operator_norm, ComplexMatrix, LinalgError, Norm, RealMatrix};
use crate::network::{DiagonalizableApproximation, LaplacianBundle, NetworkError};

pub use coupling::{CouplingSpec, CouplingStructure};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("network is disconnected: zero eigenvalue has multiplicity {zero_multiplicity}")]
    Disconnected { zero_multiplicity: usize },
    #[error("smallest Laplacian eigenvalue has modulus {modulus:e}, above tol_zero = {tol_zero:e}")]
    SpectralConsistency { modulus: f64, tol_zero: f64 },
    #[error("coupling matrix has repeated eigenvalues; supply its Jordan form")]
    RequiresJordanForm,
    #[error("{0}")]
    Domain(&'static str),
}

/// Constants the analysis leaves open, reported with every certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Norm-equivalence factor in `ρ ≤ c·ϱ·κ(Q)`.
    pub c: f64,
    /// Constant of the diagonal-dominance stability estimate, `K ≥ 1`.
    #[serde(rename = "K")]
    pub k: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c: 1.0, k: 1.0 }
    }
}

/// `γ = min Re(λᵢ βⱼ)` over all coupling eigenvalues and all Laplacian
/// eigenvalues except the one of smallest modulus, which must be zero.
pub fn compute_gamma(
    laplacian: &LaplacianBundle,
    coupling: &CouplingSpec,
) -> Result<f64, StabilityError> {
    if laplacian.zero_multiplicity() != 1 {
        return Err(StabilityError::Disconnected {
            zero_multiplicity: laplacian.zero_multiplicity(),
        });
    }
    let lambdas = laplacian.spectrum().values();
    let excluded = lambdas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let modulus = lambdas[excluded].norm();
    if modulus > laplacian.tol_zero() {
        return Err(StabilityError::SpectralConsistency {
            modulus,
            tol_zero: laplacian.tol_zero(),
        });
    }
    let mut gamma = f64::INFINITY;
    for (i, lambda) in lambdas.iter().enumerate() {
        if i == excluded {
            continue;
        }
        for beta in coupling.beta_spectrum().values() {
            gamma = gamma.min((lambda * beta).re);
        }
    }
    Ok(gamma)
}

/// Analytic bound on ρ together with its factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoBound {
    pub value: f64,
    pub varrho: f64,
    pub c: f64,
    /// `κ₂(Q)`.
    pub kappa_q: f64,
    /// `κ∞` of the Jordan perturbation basis; 1 unless the coupling is
    /// defective.
    pub kappa_jordan: f64,
    /// Perturbation scale `r·β_min` used for defective couplings.
    pub jordan_eps: Option<f64>,
}

/// `ρ ≤ c·ϱ` for symmetric Γ, `c·ϱ·κ₂(Q)` for diagonalisable Γ and
/// `c·ϱ·κ₂(Q)·κ∞(R)` for defective Γ, with `R` the perturbation basis at
/// `ε = r·β_min`.
pub fn rho_bound(
    varrho: f64,
    coupling: &CouplingSpec,
    jordan_eps_ratio: f64,
    c: f64,
) -> Result<RhoBound, StabilityError> {
    if !(varrho > 0.0 && varrho.is_finite()) {
        return Err(StabilityError::Domain("ϱ must be positive and finite"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(StabilityError::Domain("c must be positive and finite"));
    }
    let (kappa_q, kappa_jordan, jordan_eps) = match coupling.structure() {
        CouplingStructure::Symmetric => (1.0, 1.0, None),
        CouplingStructure::Diagonalizable => (coupling.kappa_q()?, 1.0, None),
        CouplingStructure::Defective => {
            if !(jordan_eps_ratio > 0.0 && jordan_eps_ratio < 1.0) {
                return Err(StabilityError::Domain("jordan_eps_ratio must lie in (0, 1)"));
            }
            if coupling.beta_min() <= 0.0 {
                return Err(StabilityError::Domain(
                    "defective coupling needs β_min > 0 so perturbed eigenvalues stay off zero",
                ));
            }
            let eps = jordan_eps_ratio * coupling.beta_min();
            (
                coupling.kappa_q()?,
                coupling.jordan_condition(eps)?,
                Some(eps),
            )
        }
    };
    Ok(RhoBound {
        value: c * varrho * kappa_q * kappa_jordan,
        varrho,
        c,
        kappa_q,
        kappa_jordan,
        jordan_eps,
    })
}

/// Inputs assembled into a [`SyncAnalysis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisInputs {
    pub gamma: f64,
    pub rho: RhoBound,
    /// `κ∞(P)` of the Laplacian eigenvector matrix.
    pub kappa_p: f64,
    pub constants: Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncAnalysis {
    pub gamma: f64,
    pub rho_bound: f64,
    pub varrho: f64,
    /// `ρ/γ`; absent when `γ ≤ 0`.
    pub alpha_threshold: Option<f64>,
    #[serde(rename = "C_estimate")]
    pub c_estimate: f64,
    pub a3_satisfied: bool,
    pub constants: Constants,
    pub kappa_p: f64,
    pub kappa_q: f64,
    pub kappa_jordan: f64,
}

impl SyncAnalysis {
    /// `αγ − ρ`.
    pub fn rate(&self, alpha: f64) -> f64 {
        alpha * self.gamma - self.rho_bound
    }

    pub fn certifies(&self, alpha: f64) -> bool {
        self.a3_satisfied && self.rate(alpha) > 0.0
    }
}

pub fn alpha_threshold(inputs: &AnalysisInputs) -> Result<SyncAnalysis, StabilityError> {
    let AnalysisInputs {
        gamma,
        rho,
        kappa_p,
        constants,
    } = *inputs;
    if constants.k < 1.0 {
        return Err(StabilityError::Domain("K must be at least 1"));
    }
    if kappa_p < 1.0 {
        return Err(StabilityError::Domain("κ(P) is at least 1"));
    }
    let a3_satisfied = gamma > 0.0;
    Ok(SyncAnalysis {
        gamma,
        rho_bound: rho.value,
        varrho: rho.varrho,
        alpha_threshold: a3_satisfied.then(|| rho.value / gamma),
        c_estimate: constants.k * kappa_p * rho.kappa_q,
        a3_satisfied,
        constants,
        kappa_p,
        kappa_q: rho.kappa_q,
        kappa_jordan: rho.kappa_jordan,
    })
}

/// γ, the ρ bound and the threshold in one call.
pub fn analyze(
    laplacian: &LaplacianBundle,
    approximation: &DiagonalizableApproximation,
    coupling: &CouplingSpec,
    varrho: f64,
    jordan_eps_ratio: f64,
    constants: Constants,
) -> Result<SyncAnalysis, StabilityError> {
    let gamma = compute_gamma(laplacian, coupling)?;
    let rho = rho_bound(varrho, coupling, jordan_eps_ratio, constants.c)?;
    // Rounding can push κ of an orthogonal matrix a hair below 1.
    let kappa_p = approximation.condition(Norm::Inf)?.max(1.0);
    alpha_threshold(&AnalysisInputs {
        gamma,
        rho,
        kappa_p,
        constants,
    })
}

/// Largest `‖D₂f‖₂` over a set of Jacobian samples.
pub fn estimate_varrho(jacobians: &[RealMatrix]) -> Result<f64, StabilityError> {
    if jacobians.is_empty() {
        return Err(StabilityError::Domain("no Jacobian samples"));
    }
    let mut best: f64 = 0.0;
    for j in jacobians {
        best = best.max(operator_norm(j, Norm::Two)?);
    }
    Ok(best)
}

/// `μ = −max [Re(Ã_kk − αλβ_k) + Σ_{j≠k} |Ã_kj|]` over samples and rows.
///
/// A positive margin certifies exponential decay at rate μ for the sampled
/// window.
pub fn diagonal_dominance_margin(
    samples: &[ComplexMatrix],
    alpha: f64,
    lambda: Complex64,
    b_diag: &[Complex64],
) -> Result<f64, StabilityError> {
    if samples.is_empty() {
        return Err(StabilityError::Domain("no samples for the diagonal-dominance margin"));
    }
    let m = b_diag.len();
    let mut worst = f64::NEG_INFINITY;
    for a in samples {
        if a.rows() != m || a.cols() != m {
            return Err(LinalgError::ShapeMismatch {
                left: (a.rows(), a.cols()),
                right: (m, m),
            }
            .into());
        }
        for k in 0..m {
            let mut row = (a[(k, k)] - alpha * lambda * b_diag[k]).re;
            for j in (0..m).filter(|&j| j != k) {
                row += a[(k, j)].norm();
            }
            worst = worst.max(row);
        }
    }
    Ok(-worst)
}

/// `μ̂ = μ − δK`.
pub fn roughness_adjust(mu: f64, k: f64, delta: f64) -> f64 {
    mu - delta * k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceBound {
    pub eps0: f64,
    /// `C·ε₀/(αγ − ρ)`.
    pub asymptotic_error: f64,
    /// The constant multiplying `ε₀/(αγ − ρ)`.
    #[serde(rename = "K_corollary")]
    pub k_corollary: f64,
    /// `αγ − ρ`.
    pub rate: f64,
}

pub fn persistence_bound(
    c: f64,
    eps0: f64,
    alpha: f64,
    gamma: f64,
    rho: f64,
) -> Result<PersistenceBound, StabilityError> {
    let rate = alpha * gamma - rho;
    if !(rate > 0.0) {
        return Err(StabilityError::Domain("αγ ≤ ρ: no persistence certificate"));
    }
    if !(eps0 >= 0.0) {
        return Err(StabilityError::Domain("ε₀ must be non-negative"));
    }
    Ok(PersistenceBound {
        eps0,
        asymptotic_error: c * eps0 / rate,
        k_corollary: c,
        rate,
    })
}

/// Admissible initial spread `δ = (αγ − ρ)/(4σC‖π_N‖)`, with σ a bound on
/// the second derivative of the coupled vector field.
pub fn delta_estimate(
    rate: f64,
    sigma: f64,
    c: f64,
    projection_norm: f64,
) -> Result<f64, StabilityError> {
    if !(rate > 0.0) {
        return Err(StabilityError::Domain("αγ ≤ ρ: no admissible initial spread"));
    }
    if !(sigma > 0.0 && c > 0.0 && projection_norm > 0.0) {
        return Err(StabilityError::Domain("σ, C and ‖π_N‖ must be positive"));
    }
    Ok(rate / (4.0 * sigma * c * projection_norm))
}

/// Samples of `Q⁻¹ D₂f Q` for use with [`diagonal_dominance_margin`].
pub fn conjugate_samples(
    jacobians: &[RealMatrix],
    coupling: &CouplingSpec,
) -> Result<Vec<ComplexMatrix>, StabilityError> {
    let (q, q_inv) = coupling.similarity()?;
    jacobians
        .iter()
        .map(|j| Ok(q_inv.matmul(&j.to_complex())?.matmul(&q)?))
        .collect()
}

#[cfg(test)]
mod tests;
