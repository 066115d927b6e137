//! Small dense real and complex matrix algebra.

mod complex;
mod eigen;
mod jordan;
mod matrix;
mod svd;

use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use complex::{ComplexLu, ComplexMatrix};
pub use eigen::{
    characteristic_residual, cmp_complex, eigenvalues, eigenvectors, symmetric_eigen, Spectrum,
};
pub use jordan::{
    conjugated_perturbation_norm, jordan_blocks, jordan_bound_factor, similarity_residual,
    JordanBlock, JordanPerturbationBasis, Similarity, MAX_JORDAN_BLOCK,
};
pub use matrix::RealMatrix;
pub use svd::singular_values;

use crate::tolerances::SINGULAR_REL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix shape {rows}x{cols} is empty")]
    EmptyShape { rows: usize, cols: usize },
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("{algorithm} did not converge after {iterations} iterations")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
    },
    #[error("matrix is singular: σ_min = {smallest_singular_value:e}, σ_max = {largest_singular_value:e}")]
    Singular {
        smallest_singular_value: f64,
        largest_singular_value: f64,
    },
    #[error("{what} = {value} outside [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("{what}: computed {computed:e}, expected {expected:e} (tolerance {tolerance:e})")]
    Consistency {
        what: &'static str,
        computed: f64,
        expected: f64,
        tolerance: f64,
    },
    #[error("invalid Jordan form: {0}")]
    InvalidJordanForm(&'static str),
    #[error("{0}")]
    Other(String),
}

/// Operator norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Spectral norm, the largest singular value.
    Two,
    /// Maximum absolute row sum.
    Inf,
}

/// Operator norm of a real matrix.
pub fn operator_norm(m: &RealMatrix, p: Norm) -> Result<f64, LinalgError> {
    match p {
        Norm::Inf => Ok(m.norm_inf()),
        Norm::Two => Ok(singular_values(m)?[0]),
    }
}

/// Operator norm of a complex matrix.
pub fn operator_norm_complex(m: &ComplexMatrix, p: Norm) -> Result<f64, LinalgError> {
    match p {
        Norm::Inf => Ok(m.norm_inf()),
        Norm::Two => Ok(singular_values(&m.real_embedding())?[0]),
    }
}

fn check_singular_values(sv: &[f64]) -> Result<(), LinalgError> {
    let largest = sv[0];
    let smallest = *sv.last().unwrap_or(&0.0);
    if largest == 0.0 || smallest < SINGULAR_REL * largest {
        return Err(LinalgError::Singular {
            smallest_singular_value: smallest,
            largest_singular_value: largest,
        });
    }
    Ok(())
}

pub(crate) fn check_invertible_complex(m: &ComplexMatrix) -> Result<(), LinalgError> {
    check_singular_values(&singular_values(&m.real_embedding())?)
}

/// `κ_p(M) = ‖M‖_p ‖M⁻¹‖_p`.
pub fn condition_number(m: &RealMatrix, p: Norm) -> Result<f64, LinalgError> {
    m.require_square()?;
    let sv = singular_values(m)?;
    check_singular_values(&sv)?;
    match p {
        Norm::Two => Ok(sv[0] / sv[sv.len() - 1]),
        Norm::Inf => {
            let inv = m.to_complex().lu()?.inverse();
            Ok(m.norm_inf() * inv.norm_inf())
        }
    }
}

/// `κ_p(M)` for a complex matrix.
pub fn condition_number_complex(m: &ComplexMatrix, p: Norm) -> Result<f64, LinalgError> {
    m.require_square()?;
    let sv = singular_values(&m.real_embedding())?;
    check_singular_values(&sv)?;
    match p {
        Norm::Two => Ok(sv[0] / sv[sv.len() - 1]),
        Norm::Inf => Ok(m.norm_inf() * m.lu()?.inverse().norm_inf()),
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kronecker(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let (p, q) = (b.rows(), b.cols());
    RealMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// Kronecker product of complex matrices.
pub fn kronecker_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

/// `‖A − B‖∞` for equally shaped matrices.
pub fn distance_inf(a: &RealMatrix, b: &RealMatrix) -> Result<f64, LinalgError> {
    Ok(a.sub(b)?.norm_inf())
}
