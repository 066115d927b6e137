use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StabilityError;
use crate::linalg::{
    condition_number_complex, eigenvalues, eigenvectors, jordan_blocks, similarity_residual,
    symmetric_eigen, ComplexMatrix, JordanBlock, JordanPerturbationBasis, LinalgError, Norm,
    RealMatrix, Spectrum,
};
use crate::tolerances::{DISTINCT_EIG_REL, SYMMETRY_REL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingStructure {
    Symmetric,
    Diagonalizable,
    Defective,
}

/// The linearised coupling `Γ = Dh(0)` with its spectral data.
///
/// `Q` is the similarity with `Q⁻¹ΓQ` diagonal, or in Jordan form when Γ is
/// defective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSpec {
    gamma: RealMatrix,
    beta_spectrum: Spectrum,
    beta_min: f64,
    structure: CouplingStructure,
    q: ComplexMatrix,
    /// `Q⁻¹ΓQ`.
    b: ComplexMatrix,
    blocks: Vec<JordanBlock>,
}

impl CouplingSpec {
    /// Classifies Γ. Symmetric and distinct-eigenvalue matrices are
    /// diagonalised numerically; a matrix already in Jordan form is taken
    /// with `Q = I`. Anything else needs [`CouplingSpec::with_jordan_form`].
    pub fn new(gamma: RealMatrix) -> Result<Self, StabilityError> {
        let m = gamma.rows();
        if !gamma.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m,
                cols: gamma.cols(),
            }
            .into());
        }
        if gamma.is_symmetric(SYMMETRY_REL) {
            let (values, vectors) = symmetric_eigen(&gamma)?;
            let values: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            return Ok(Self::assemble(
                gamma,
                CouplingStructure::Symmetric,
                vectors.to_complex(),
                ComplexMatrix::diagonal(&values),
            ));
        }
        if let Ok(blocks) = jordan_blocks(&gamma.to_complex()) {
            if blocks.iter().any(|b| b.size > 1) {
                let b = gamma.to_complex();
                return Ok(Self::assemble(
                    gamma,
                    CouplingStructure::Defective,
                    ComplexMatrix::identity(m),
                    b,
                ));
            }
        }
        let spectrum = eigenvalues(&gamma)?;
        if spectrum.min_separation() <= DISTINCT_EIG_REL * gamma.norm_inf().max(f64::MIN_POSITIVE) {
            return Err(StabilityError::RequiresJordanForm);
        }
        let q = eigenvectors(&gamma, &spectrum)?;
        let b = ComplexMatrix::diagonal(spectrum.values());
        Ok(Self::assemble(gamma, CouplingStructure::Diagonalizable, q, b))
    }

    /// Γ together with a factorisation `Γ = Q J Q⁻¹`.
    pub fn with_jordan_form(
        gamma: RealMatrix,
        q: ComplexMatrix,
        j: ComplexMatrix,
    ) -> Result<Self, StabilityError> {
        let m = gamma.rows();
        if !gamma.is_square() || q.rows() != m || q.cols() != m || j.rows() != m || j.cols() != m {
            return Err(LinalgError::ShapeMismatch {
                left: (gamma.rows(), gamma.cols()),
                right: (j.rows(), j.cols()),
            }
            .into());
        }
        let blocks = jordan_blocks(&j)?;
        let sim = similarity_residual(&q, &j, &gamma)?;
        let tolerance = 1e-9 * gamma.norm_inf().max(1.0) * sim.condition_inf;
        if sim.residual > tolerance {
            return Err(LinalgError::Consistency {
                what: "‖Q J Q⁻¹ − Γ‖∞",
                computed: sim.residual,
                expected: 0.0,
                tolerance,
            }
            .into());
        }
        let structure = if blocks.iter().any(|b| b.size > 1) {
            CouplingStructure::Defective
        } else {
            CouplingStructure::Diagonalizable
        };
        Ok(Self::assemble(gamma, structure, q, j))
    }

    /// `Γ = I_m`.
    pub fn identity(m: usize) -> Result<Self, StabilityError> {
        Self::scaled_identity(m, 1.0)
    }

    /// `Γ = β I_m`.
    pub fn scaled_identity(m: usize, beta: f64) -> Result<Self, StabilityError> {
        let data = (0..m * m)
            .map(|k| if k % (m + 1) == 0 { beta } else { 0.0 })
            .collect();
        Self::new(RealMatrix::new(m, m, data)?)
    }

    /// A single `m × m` Jordan block with eigenvalue β.
    pub fn jordan_block(m: usize, beta: f64) -> Result<Self, StabilityError> {
        let data = (0..m * m)
            .map(|k| match (k / m, k % m) {
                (i, j) if i == j => beta,
                (i, j) if j == i + 1 => 1.0,
                _ => 0.0,
            })
            .collect();
        Self::new(RealMatrix::new(m, m, data)?)
    }

    fn assemble(
        gamma: RealMatrix,
        structure: CouplingStructure,
        q: ComplexMatrix,
        b: ComplexMatrix,
    ) -> Self {
        let diag = b.diag();
        let blocks = match structure {
            CouplingStructure::Defective => {
                jordan_blocks(&b).expect("validated Jordan form")
            }
            _ => diag
                .iter()
                .enumerate()
                .map(|(offset, &lambda)| JordanBlock {
                    offset,
                    size: 1,
                    lambda,
                })
                .collect(),
        };
        let beta_spectrum = Spectrum::new(diag);
        Self {
            beta_min: beta_spectrum.min_re(),
            beta_spectrum,
            gamma,
            structure,
            q,
            b,
            blocks,
        }
    }

    /// `Γ = Dh(0)`.
    pub fn gamma(&self) -> &RealMatrix {
        &self.gamma
    }

    pub fn m(&self) -> usize {
        self.gamma.rows()
    }

    pub fn beta_spectrum(&self) -> &Spectrum {
        &self.beta_spectrum
    }

    /// `β = minⱼ Re βⱼ`.
    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    pub fn structure(&self) -> CouplingStructure {
        self.structure
    }

    pub fn diagonalizable(&self) -> bool {
        self.structure != CouplingStructure::Defective
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    /// `B = Q⁻¹ΓQ`, diagonal unless Γ is defective.
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    /// `κ₂(Q)`, clamped below at 1 against rounding.
    pub fn kappa_q(&self) -> Result<f64, LinalgError> {
        Ok(condition_number_complex(&self.q, Norm::Two)?.max(1.0))
    }

    /// `κ∞` of the block-diagonal Jordan perturbation basis at scale `eps`.
    pub fn jordan_condition(&self, eps: f64) -> Result<f64, LinalgError> {
        let mut norm_r: f64 = 0.0;
        let mut norm_r_inv: f64 = 0.0;
        for b in &self.blocks {
            let basis = JordanPerturbationBasis::new(b.size, b.lambda, eps)?;
            norm_r = norm_r.max(basis.r().norm_inf());
            norm_r_inv = norm_r_inv.max(basis.r_inv().norm_inf());
        }
        Ok(norm_r * norm_r_inv)
    }

    /// `(Q, Q⁻¹)`.
    pub fn similarity(&self) -> Result<(ComplexMatrix, ComplexMatrix), LinalgError> {
        Ok((self.q.clone(), self.q.inverse()?))
    }
}
