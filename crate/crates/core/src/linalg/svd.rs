//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Column pairs are rotated until mutually orthogonal; the singular values are
//! then the column norms. The method is slow for large matrices but accurate
//! to high relative precision in the small singular values, which the
//! singularity test depends on.

use alloc::vec::Vec;


use super::{LinalgError, RealMatrix};
use crate::tolerances::JACOBI_MAX_SWEEPS;
#[allow(unused_imports)]
use num_traits::Float;

/// Singular values in descending order.
pub fn singular_values(m: &RealMatrix) -> Result<Vec<f64>, LinalgError> {
    let a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = (a.rows(), a.cols());
    // Column-major working copy.
    let mut cols_data: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)]).collect())
        .collect();

    let eps = f64::EPSILON;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let cp = &cols_data[p];
                    let cq = &cols_data[q];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..rows {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols_data.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for i in 0..rows {
                    let x = cp[i];
                    let y = cq[i];
                    cp[i] = c * x - s * y;
                    cq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            algorithm: "one-sided Jacobi SVD",
            iterations: JACOBI_MAX_SWEEPS,
        });
    }
    let mut sv: Vec<f64> = cols_data
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_values() {
        let m = RealMatrix::diagonal(&[3.0, -5.0, 0.5]);
        let sv = singular_values(&m).unwrap();
        assert_eq!(sv, [5.0, 3.0, 0.5]);
    }

    #[test]
    fn rank_deficient_and_wide() {
        let m = RealMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]).unwrap();
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - (14.0f64 * 5.0).sqrt()).abs() < 1e-12);
        assert!(sv[1] < 1e-14);
    }

    #[test]
    fn tiny_singular_value_resolved() {
        // [[1, 1], [1, 1 + 1e-10]] has σ_min ≈ 5e-11.
        let m = RealMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0 + 1e-10]]).unwrap();
        let sv = singular_values(&m).unwrap();
        let prod = sv[0] * sv[1];
        let det = 1.0e-10 + 1.0 - 1.0;
        assert!((prod - det).abs() / det < 1e-5, "{sv:?}");
    }
}
