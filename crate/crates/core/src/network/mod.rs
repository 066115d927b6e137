//! Weight matrices, graph Laplacians and their spectra.
//!
//! `Wᵢⱼ` is the strength with which node j acts on node i. The Laplacian is
//! `L = V − W` with `V = diag(Σⱼ Wᵢⱼ)`, so `L𝟙 = 0` for every network, directed
//! or not.

mod approx;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigenvalues, symmetric_eigen, LinalgError, RealMatrix, Spectrum};
use crate::tolerances::{DISTINCT_EIG_REL, ROW_SUM_REL, SYMMETRY_REL, ZERO_EIG_REL};

pub use approx::{approx_diagonalizable, DiagonalizableApproximation, JordanForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("weight matrix has non-zero self-coupling W[{node}][{node}] = {value}")]
    SelfCoupling { node: usize, value: f64 },
    #[error("Laplacian is not symmetric: ‖L − Lᵀ‖∞ = {asymmetry:e}")]
    Asymmetric { asymmetry: f64 },
    #[error("network is disconnected: zero eigenvalue has multiplicity {zero_multiplicity}")]
    Disconnected { zero_multiplicity: usize },
    #[error(
        "Laplacian has repeated eigenvalues (separation {separation:e}); \
         supply its Jordan form"
    )]
    RequiresJordanForm { separation: f64 },
    #[error("invalid Jordan form: {0}")]
    InvalidJordanForm(&'static str),
    #[error("O·J·O⁻¹ differs from L by {residual:e} (tolerance {tolerance:e})")]
    Factorisation { residual: f64, tolerance: f64 },
    #[error("perturbed Laplacian is not real: max |Im| = {imag:e}")]
    ComplexApproximation { imag: f64 },
    #[error("perturbation moves a non-zero eigenvalue onto zero (|λ| = {modulus:e})")]
    ZeroCrossing { modulus: f64 },
}

/// Square weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealMatrix", into = "RealMatrix")]
pub struct WeightMatrix {
    w: RealMatrix,
}

impl TryFrom<RealMatrix> for WeightMatrix {
    type Error = NetworkError;

    fn try_from(w: RealMatrix) -> Result<Self, Self::Error> {
        Self::new(w)
    }
}

impl From<WeightMatrix> for RealMatrix {
    fn from(w: WeightMatrix) -> Self {
        w.w
    }
}

impl WeightMatrix {
    pub fn new(w: RealMatrix) -> Result<Self, NetworkError> {
        let n = if w.is_square() {
            w.rows()
        } else {
            return Err(LinalgError::NotSquare {
                rows: w.rows(),
                cols: w.cols(),
            }
            .into());
        };
        if let Some(node) = (0..n).find(|&i| w[(i, i)] != 0.0) {
            return Err(NetworkError::SelfCoupling {
                node,
                value: w[(node, node)],
            });
        }
        Ok(Self { w })
    }

    /// Undirected ring `0 – 1 – … – (n−1) – 0` with uniform weight.
    pub fn ring(n: usize, weight: f64) -> Result<Self, NetworkError> {
        Self::uniform(n, |i, j| i != j && (j == (i + 1) % n || i == (j + 1) % n), weight)
    }

    /// Complete graph with uniform weight.
    pub fn complete(n: usize, weight: f64) -> Result<Self, NetworkError> {
        Self::uniform(n, |i, j| i != j, weight)
    }

    /// Undirected path `0 – 1 – … – (n−1)`.
    pub fn path(n: usize, weight: f64) -> Result<Self, NetworkError> {
        Self::uniform(n, |i, j| i.abs_diff(j) == 1, weight)
    }

    fn uniform(
        n: usize,
        edge: impl Fn(usize, usize) -> bool,
        weight: f64,
    ) -> Result<Self, NetworkError> {
        let data = (0..n * n)
            .map(|k| if edge(k / n, k % n) { weight } else { 0.0 })
            .collect();
        Self::new(RealMatrix::new(n, n, data)?)
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.w
    }

    pub fn is_symmetric(&self) -> bool {
        self.w.is_symmetric(SYMMETRY_REL)
    }

    /// Conjugates by a node permutation.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            w: self.w.permuted(perm),
        }
    }
}

/// A Laplacian together with its spectrum and zero-eigenvalue count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianBundle {
    laplacian: RealMatrix,
    intensities: Vec<f64>,
    spectrum: Spectrum,
    zero_multiplicity: usize,
    symmetric: bool,
}

impl LaplacianBundle {
    pub fn laplacian(&self) -> &RealMatrix {
        &self.laplacian
    }

    /// `Vᵢ = Σⱼ Wᵢⱼ`.
    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn zero_multiplicity(&self) -> usize {
        self.zero_multiplicity
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn n(&self) -> usize {
        self.laplacian.rows()
    }

    /// Eigenvalues with modulus at or below this count as zero.
    pub fn tol_zero(&self) -> f64 {
        ZERO_EIG_REL * self.laplacian.norm_inf()
    }

    /// Eigenvalues closer than this are treated as repeated.
    pub fn tol_distinct(&self) -> f64 {
        DISTINCT_EIG_REL * self.laplacian.norm_inf()
    }

    /// Largest row sum of `L` in absolute value.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.n())
            .map(|i| self.laplacian.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_connected(&self) -> bool {
        self.zero_multiplicity == 1
    }
}

/// `L = V − W`, its spectrum and the multiplicity of the zero eigenvalue.
///
/// The diagonal entry of each row is the negated sum of that row's
/// off-diagonal entries, so summing a row off-diagonal first gives exactly 0.
pub fn build_laplacian(w: &WeightMatrix) -> Result<LaplacianBundle, NetworkError> {
    let n = w.n();
    let wm = w.matrix();
    let mut laplacian = RealMatrix::zeros(n, n);
    let mut intensities = vec![0.0; n];
    for i in 0..n {
        let mut off = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            laplacian[(i, j)] = -wm[(i, j)];
            off += laplacian[(i, j)];
        }
        laplacian[(i, i)] = -off;
        intensities[i] = wm.row(i).iter().sum();
    }
    let symmetric = laplacian.is_symmetric(SYMMETRY_REL);
    let spectrum = if symmetric {
        let (values, _) = symmetric_eigen(&laplacian)?;
        Spectrum::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    } else {
        eigenvalues(&laplacian)?
    };
    let tol = ZERO_EIG_REL * laplacian.norm_inf();
    let zero_multiplicity = spectrum.count_near_zero(tol);
    let bundle = LaplacianBundle {
        laplacian,
        intensities,
        spectrum,
        zero_multiplicity,
        symmetric,
    };
    debug_assert!(bundle.row_sum_residual() <= ROW_SUM_REL * bundle.laplacian.norm_inf());
    Ok(bundle)
}

/// Number of weakly connected components; `i` and `j` are adjacent when
/// `|Wᵢⱼ| + |Wⱼᵢ| > 0`.
pub fn connectivity(w: &WeightMatrix) -> usize {
    let n = w.n();
    let m = w.matrix();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && m[(i, j)].abs() + m[(j, i)].abs() > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    components
}

/// Smallest non-zero eigenvalue of a symmetric Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    /// `λ₂`, or 0 when the network is disconnected.
    pub lambda2: f64,
    pub disconnected: bool,
}

pub fn spectral_gap(bundle: &LaplacianBundle) -> Result<SpectralGap, NetworkError> {
    if !bundle.symmetric {
        return Err(NetworkError::Asymmetric {
            asymmetry: bundle.laplacian.asymmetry(),
        });
    }
    if bundle.zero_multiplicity != 1 {
        return Ok(SpectralGap {
            lambda2: 0.0,
            disconnected: true,
        });
    }
    let mut values: Vec<f64> = bundle.spectrum.values().iter().map(|z| z.re).collect();
    values.sort_by(f64::total_cmp);
    Ok(SpectralGap {
        lambda2: values.get(1).copied().unwrap_or(0.0),
        disconnected: false,
    })
}
