//! Numerical tolerances used across the crate.
//!
//! Every threshold that decides a branch (zero eigenvalue, distinct
//! eigenvalues, singularity, symmetry) is defined here so certificates can be
//! reproduced and audited.

/// Absolute tolerance for algebraic identities, before scaling by the
/// relevant condition number.
pub const IDENTITY_ABS: f64 = 1e-10;

/// A matrix whose smallest singular value is below this fraction of its
/// largest singular value is treated as singular.
pub const SINGULAR_REL: f64 = 1e-12;

/// Laplacian eigenvalues with modulus below `ZERO_EIG_REL · ‖L‖∞` count as zero.
pub const ZERO_EIG_REL: f64 = 1e-9;

/// Eigenvalues closer than `DISTINCT_EIG_REL · ‖L‖∞` are treated as repeated.
pub const DISTINCT_EIG_REL: f64 = 1e-6;

/// Relative asymmetry `‖L − Lᵀ‖∞ / ‖L‖∞` below which a matrix is symmetric.
pub const SYMMETRY_REL: f64 = 1e-12;

/// Row sums of a Laplacian must vanish to `ROW_SUM_REL · ‖L‖∞`.
pub const ROW_SUM_REL: f64 = 1e-12;

/// Spreads below this value are at the floating-point floor and excluded from
/// decay-rate fits.
pub const SPREAD_FLOOR: f64 = 1e-13;

/// Default guard on the max-node Euclidean norm beyond which a trajectory is
/// flagged as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Maximum QR sweeps per eigenvalue before the iteration is declared
/// non-convergent.
pub const QR_MAX_ITER_PER_EIG: usize = 60;

/// Maximum number of Jacobi sweeps in the symmetric eigen-solver and the SVD.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Tolerance set threaded through operations that need several thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub identity_abs: f64,
    pub singular_rel: f64,
    pub zero_eig_rel: f64,
    pub distinct_eig_rel: f64,
    pub symmetry_rel: f64,
    pub row_sum_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_abs: IDENTITY_ABS,
            singular_rel: SINGULAR_REL,
            zero_eig_rel: ZERO_EIG_REL,
            distinct_eig_rel: DISTINCT_EIG_REL,
            symmetry_rel: SYMMETRY_REL,
            row_sum_rel: ROW_SUM_REL,
        }
    }
}
