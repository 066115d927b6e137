//! Explicit eigenbasis of a perturbed Jordan block.
//!
//! For a Jordan block `J = λI + N` of size m and `E = diag(0, ε, 2ε, …, (m−1)ε)`,
//! `J + E` has the distinct eigenvalues `λ + (i−1)ε`. The upper-triangular
//! matrix with entries `R_{ℓj} = (j−1)!/(j−ℓ)! · ε^{ℓ−1}` (ℓ ≤ j) collects its
//! eigenvectors, and its inverse is known in closed form:
//! `R⁻¹_{ik} = (−1)^{i+k} / ((i−1)!(k−i)!) · ε^{−(k−1)}` (i ≤ k).
//! Conjugating the perturbation gives `R⁻¹ E R` with diagonal `(i−1)ε`,
//! superdiagonal `−iε` and zeros elsewhere, so
//! `‖R⁻¹ E R‖∞ = max{2m−3, m−1}·ε`.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LinalgError, RealMatrix};
use crate::tolerances::IDENTITY_ABS;
#[allow(unused_imports)]
use num_traits::Float;

/// Largest block size whose factorials are handled exactly.
pub const MAX_JORDAN_BLOCK: usize = 12;

/// Closed-form eigenbasis of `J + E` for one Jordan block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanPerturbationBasis {
    m: usize,
    lambda: Complex64,
    eps: f64,
    r: RealMatrix,
    r_inv: RealMatrix,
    diag: Vec<Complex64>,
    bound: f64,
}

/// `a!/b!` for `b ≤ a`, exact in integers.
fn falling_ratio(a: usize, b: usize) -> u128 {
    ((b + 1)..=a).map(|k| k as u128).product()
}

fn factorial(k: usize) -> u128 {
    (1..=k).map(|v| v as u128).product()
}

/// `max{2m−3, m−1}` as a real factor (zero for m = 1).
pub fn jordan_bound_factor(m: usize) -> f64 {
    let m = m as i64;
    (2 * m - 3).max(m - 1).max(0) as f64
}

impl JordanPerturbationBasis {
    /// Builds `R`, `R⁻¹` and the perturbed eigenvalues from their closed forms.
    pub fn new(m: usize, lambda: Complex64, eps: f64) -> Result<Self, LinalgError> {
        if m == 0 || m > MAX_JORDAN_BLOCK {
            return Err(LinalgError::Range {
                what: "Jordan block size",
                value: m as f64,
                min: 1.0,
                max: MAX_JORDAN_BLOCK as f64,
            });
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LinalgError::Range {
                what: "Jordan perturbation scale",
                value: eps,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        // 1-based formulas, 0-based storage.
        let r = RealMatrix::from_fn(m, m, |l, j| {
            let (l, j) = (l + 1, j + 1);
            if l > j {
                0.0
            } else {
                falling_ratio(j - 1, j - l) as f64 * eps.powi(l as i32 - 1)
            }
        });
        let r_inv = RealMatrix::from_fn(m, m, |i, k| {
            let (i, k) = (i + 1, k + 1);
            if i > k {
                0.0
            } else {
                let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                let denom = factorial(i - 1) * factorial(k - i);
                sign / denom as f64 * eps.powi(-(k as i32 - 1))
            }
        });
        let diag = (0..m)
            .map(|i| lambda + Complex64::new(i as f64 * eps, 0.0))
            .collect();
        Ok(Self {
            m,
            lambda,
            eps,
            r,
            r_inv,
            diag,
            bound: jordan_bound_factor(m) * eps,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r(&self) -> &RealMatrix {
        &self.r
    }

    pub fn r_inv(&self) -> &RealMatrix {
        &self.r_inv
    }

    /// Eigenvalues of `J + E`, i.e. `λ + (i−1)ε`.
    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    /// `max{2m−3, m−1}·ε`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `E = diag(0, ε, …, (m−1)ε)`.
    pub fn perturbation(&self) -> RealMatrix {
        let d: Vec<f64> = (0..self.m).map(|i| i as f64 * self.eps).collect();
        RealMatrix::diagonal(&d)
    }

    /// The Jordan block `λI + N`.
    pub fn jordan_block(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.m, self.m, |i, j| {
            if i == j {
                self.lambda
            } else if j == i + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `R⁻¹ E R`, evaluated by explicit matrix products.
    pub fn conjugated_perturbation(&self) -> RealMatrix {
        self.conjugate(&self.perturbation())
    }

    /// `R⁻¹ (J + E) R`.
    ///
    /// The scalar part `λI` commutes with `R` and is added exactly; only the
    /// real part `N + E` is conjugated numerically, which keeps rounding from
    /// being amplified by `κ(R)` times `|λ|`.
    pub fn conjugated_block(&self) -> ComplexMatrix {
        let mut ne = self.perturbation();
        for i in 0..self.m.saturating_sub(1) {
            ne[(i, i + 1)] = 1.0;
        }
        let c = self.conjugate(&ne);
        ComplexMatrix::from_fn(self.m, self.m, |i, j| {
            let z = Complex64::new(c[(i, j)], 0.0);
            if i == j {
                z + self.lambda
            } else {
                z
            }
        })
    }

    /// `‖R R⁻¹ − I‖∞`.
    pub fn identity_residual(&self) -> f64 {
        let prod = self.r.matmul(&self.r_inv).expect("square factors");
        prod.sub(&RealMatrix::identity(self.m))
            .expect("same shape")
            .norm_inf()
    }

    /// `κ∞(R) = ‖R‖∞ ‖R⁻¹‖∞`.
    pub fn condition_inf(&self) -> f64 {
        self.r.norm_inf() * self.r_inv.norm_inf()
    }

    fn conjugate(&self, middle: &RealMatrix) -> RealMatrix {
        self.r_inv
            .matmul(middle)
            .and_then(|x| x.matmul(&self.r))
            .expect("square factors of equal size")
    }
}

/// `‖R⁻¹ E R‖∞` computed from the explicit product, checked against the
/// closed-form bound `max{2m−3, m−1}·ε`.
pub fn conjugated_perturbation_norm(basis: &JordanPerturbationBasis) -> Result<f64, LinalgError> {
    let norm = basis.conjugated_perturbation().norm_inf();
    if (norm - basis.bound()).abs() > IDENTITY_ABS {
        return Err(LinalgError::Consistency {
            what: "‖R⁻¹ E R‖∞ against max{2m−3, m−1}·ε",
            computed: norm,
            expected: basis.bound(),
            tolerance: IDENTITY_ABS,
        });
    }
    Ok(norm)
}

/// One Jordan block of size `size` starting at row `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub offset: usize,
    pub size: usize,
    pub lambda: Complex64,
}

/// Splits an upper-bidiagonal Jordan matrix into its blocks.
pub fn jordan_blocks(j: &ComplexMatrix) -> Result<Vec<JordanBlock>, LinalgError> {
    let n = j.rows();
    let tol = 1e-12 * j.norm_inf().max(1.0);
    for r in 0..n {
        for c in 0..n {
            if (c < r || c > r + 1) && j[(r, c)].norm() > tol {
                return Err(LinalgError::InvalidJordanForm(
                    "entries outside the diagonal and superdiagonal",
                ));
            }
        }
    }
    let mut blocks = Vec::new();
    let mut offset = 0;
    while offset < n {
        let lambda = j[(offset, offset)];
        let mut size = 1;
        while offset + size < n {
            let sup = j[(offset + size - 1, offset + size)];
            if sup.norm() <= tol {
                break;
            }
            if (sup - 1.0).norm() > tol {
                return Err(LinalgError::InvalidJordanForm(
                    "superdiagonal entries must be 0 or 1",
                ));
            }
            if (j[(offset + size, offset + size)] - lambda).norm() > tol {
                return Err(LinalgError::InvalidJordanForm(
                    "a block's diagonal must be constant",
                ));
            }
            size += 1;
        }
        blocks.push(JordanBlock {
            offset,
            size,
            lambda,
        });
        offset += size;
    }
    Ok(blocks)
}

/// Result of checking `O J O⁻¹` against a target matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub inverse: ComplexMatrix,
    /// `‖O J O⁻¹ − target‖∞`.
    pub residual: f64,
    /// `κ∞(O)`.
    pub condition_inf: f64,
}

/// Inverts `o` and measures how well `O J O⁻¹` reproduces `target`.
pub fn similarity_residual(
    o: &ComplexMatrix,
    j: &ComplexMatrix,
    target: &RealMatrix,
) -> Result<Similarity, LinalgError> {
    let inverse = o.inverse()?;
    let residual = o
        .matmul(j)?
        .matmul(&inverse)?
        .sub(&target.to_complex())?
        .norm_inf();
    Ok(Similarity {
        condition_inf: o.norm_inf() * inverse.norm_inf(),
        inverse,
        residual,
    })
}
