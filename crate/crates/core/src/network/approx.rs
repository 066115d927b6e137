//! Diagonalisable approximations of Laplacians.
//!
//! A Laplacian with a simple zero eigenvalue and distinct remaining
//! eigenvalues is already diagonalisable and is returned unchanged. A
//! defective one must come with a Jordan factorisation `L = O J O⁻¹`; it is
//! replaced by `L̃ = O (J + E) O⁻¹` with `E = diag(0, ε, …, (n−1)ε)`, whose
//! eigenvector matrix `P = O R` is known in closed form block by block.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LaplacianBundle, NetworkError};
use crate::linalg::{
    condition_number_complex, eigenvectors, jordan_blocks, jordan_bound_factor, similarity_residual,
    symmetric_eigen, ComplexMatrix, JordanBlock, JordanPerturbationBasis, LinalgError, Norm,
    RealMatrix, Spectrum,
};

/// `L = O J O⁻¹` with `J` in Jordan canonical form, the 1×1 zero block first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanForm {
    pub o: ComplexMatrix,
    pub j: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalizableApproximation {
    ltilde: RealMatrix,
    p: ComplexMatrix,
    lambda_tilde: ComplexMatrix,
    eps: f64,
    conjugated_error: f64,
    blocks: Vec<JordanBlock>,
}

impl DiagonalizableApproximation {
    /// `L̃`.
    pub fn ltilde(&self) -> &RealMatrix {
        &self.ltilde
    }

    /// Eigenvector matrix of `L̃`; its first column spans the kernel.
    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    /// `Λ̃ = P⁻¹ L̃ P`, diagonal.
    pub fn lambda_tilde(&self) -> &ComplexMatrix {
        &self.lambda_tilde
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `‖P⁻¹ (L̃ − L) P‖∞`.
    pub fn conjugated_error(&self) -> f64 {
        self.conjugated_error
    }

    /// Jordan structure of `L`; all blocks have size 1 when `L` is
    /// diagonalisable.
    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn is_perturbed(&self) -> bool {
        self.blocks.iter().any(|b| b.size > 1)
    }

    /// Largest Jordan block size.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(1)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::new(self.lambda_tilde.diag())
    }

    /// `κ_p(P)`.
    pub fn condition(&self, norm: Norm) -> Result<f64, LinalgError> {
        condition_number_complex(&self.p, norm)
    }

    /// `‖L̃ 𝟙‖∞`.
    pub fn kernel_residual(&self) -> f64 {
        let n = self.ltilde.rows();
        (0..n)
            .map(|i| self.ltilde.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Diagonalisable `L̃` close to `L` with simple eigenvalue zero and `L̃𝟙 = 0`.
pub fn approx_diagonalizable(
    bundle: &LaplacianBundle,
    jordan_form: Option<&JordanForm>,
    eps: f64,
) -> Result<DiagonalizableApproximation, NetworkError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LinalgError::Range {
            what: "perturbation scale",
            value: eps,
            min: 0.0,
            max: f64::INFINITY,
        }
        .into());
    }
    if bundle.zero_multiplicity() != 1 {
        return Err(NetworkError::Disconnected {
            zero_multiplicity: bundle.zero_multiplicity(),
        });
    }
    match jordan_form {
        Some(form) => perturb_jordan(bundle, form, eps),
        None => unperturbed(bundle, eps),
    }
}

fn unperturbed(
    bundle: &LaplacianBundle,
    eps: f64,
) -> Result<DiagonalizableApproximation, NetworkError> {
    let l = bundle.laplacian();
    let n = bundle.n();
    let (values, p) = if bundle.is_symmetric() {
        let (values, vectors) = symmetric_eigen(l)?;
        let order = zero_first(&values.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let p = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(vectors[(i, order[j])], 0.0));
        let values = order.iter().map(|&k| Complex64::new(values[k], 0.0)).collect();
        (values, p)
    } else {
        let separation = bundle.spectrum().min_separation();
        if separation <= bundle.tol_distinct() {
            return Err(NetworkError::RequiresJordanForm { separation });
        }
        let raw = bundle.spectrum().values();
        let order = zero_first(raw);
        let values: Vec<Complex64> = order.iter().map(|&k| raw[k]).collect();
        let p = eigenvectors(l, &Spectrum::new(values.clone()))?;
        (values, p)
    };
    let blocks = values
        .iter()
        .enumerate()
        .map(|(offset, &lambda)| JordanBlock {
            offset,
            size: 1,
            lambda,
        })
        .collect();
    Ok(DiagonalizableApproximation {
        ltilde: l.clone(),
        p,
        lambda_tilde: ComplexMatrix::diagonal(&values),
        eps,
        conjugated_error: 0.0,
        blocks,
    })
}

/// Smallest-modulus eigenvalue first, the rest in lexicographic order.
fn zero_first(values: &[Complex64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    let zero = order
        .iter()
        .copied()
        .min_by(|&a, &b| {
            values[a]
                .norm()
                .partial_cmp(&values[b].norm())
                .unwrap_or(Ordering::Equal)
        })
        .unwrap_or(0);
    order.retain(|&k| k != zero);
    order.sort_by(|&a, &b| crate::linalg::cmp_complex(&values[a], &values[b]));
    order.insert(0, zero);
    order
}

fn perturb_jordan(
    bundle: &LaplacianBundle,
    form: &JordanForm,
    eps: f64,
) -> Result<DiagonalizableApproximation, NetworkError> {
    let l = bundle.laplacian();
    let n = bundle.n();
    if form.o.rows() != n || form.o.cols() != n || form.j.rows() != n || form.j.cols() != n {
        return Err(LinalgError::ShapeMismatch {
            left: (n, n),
            right: (form.j.rows(), form.j.cols()),
        }
        .into());
    }
    let blocks = jordan_blocks(&form.j)?;
    if blocks[0].size != 1 || blocks[0].lambda.norm() > bundle.tol_zero() {
        return Err(NetworkError::InvalidJordanForm(
            "the first block must be the 1×1 zero block",
        ));
    }

    let sim = similarity_residual(&form.o, &form.j, l)?;
    let o_inv = sim.inverse;
    let scale = l.norm_inf().max(1.0) * sim.condition_inf;
    let residual = sim.residual;
    let tolerance = 1e-9 * scale;
    if residual > tolerance {
        return Err(NetworkError::Factorisation {
            residual,
            tolerance,
        });
    }

    let mut r = ComplexMatrix::zeros(n, n);
    let mut r_inv = ComplexMatrix::zeros(n, n);
    let mut diag = Vec::with_capacity(n);
    for b in &blocks {
        let basis = JordanPerturbationBasis::new(b.size, b.lambda + b.offset as f64 * eps, eps)?;
        for i in 0..b.size {
            for k in 0..b.size {
                r[(b.offset + i, b.offset + k)] = Complex64::new(basis.r()[(i, k)], 0.0);
                r_inv[(b.offset + i, b.offset + k)] = Complex64::new(basis.r_inv()[(i, k)], 0.0);
            }
        }
        diag.extend_from_slice(basis.diag());
    }
    if let Some(z) = diag[1..].iter().find(|z| z.norm() <= bundle.tol_zero()) {
        return Err(NetworkError::ZeroCrossing { modulus: z.norm() });
    }

    let e: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64 * eps, 0.0)).collect();
    let e = ComplexMatrix::diagonal(&e);
    let ltilde_c = form.o.matmul(&form.j.add(&e)?)?.matmul(&o_inv)?;
    let imag = ltilde_c.max_abs_im();
    if imag > 1e-9 * scale {
        return Err(NetworkError::ComplexApproximation { imag });
    }
    let conjugated_error = r_inv.matmul(&e)?.matmul(&r)?.norm_inf();
    debug_assert!(conjugated_error <= jordan_bound_factor(n) * eps * (1.0 + 1e-9));

    Ok(DiagonalizableApproximation {
        ltilde: ltilde_c.re(),
        p: form.o.matmul(&r)?,
        lambda_tilde: ComplexMatrix::diagonal(&diag),
        eps,
        conjugated_error,
        blocks,
    })
}
