//! Dense eigenvalue computations.
//!
//! General real matrices go through balancing, Householder reduction to upper
//! Hessenberg form and the Francis double-shift QR iteration. Symmetric
//! matrices use cyclic Jacobi rotations, which also deliver an orthonormal
//! eigenbasis. Eigenvectors of general matrices with simple eigenvalues are
//! recovered by inverse iteration.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LinalgError, RealMatrix};
use crate::tolerances::{JACOBI_MAX_SWEEPS, QR_MAX_ITER_PER_EIG};
#[allow(unused_imports)]
use num_traits::Float;

/// Eigenvalues of a square matrix, with algebraic multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest real part.
    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Largest modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sum of imaginary parts; zero up to rounding for real matrices.
    pub fn imag_sum(&self) -> f64 {
        self.values.iter().map(|z| z.im).sum()
    }

    /// Values sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        v.sort_by(cmp_complex);
        v
    }

    /// Smallest pairwise distance between eigenvalues (infinite for n < 2).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.values.iter().enumerate() {
            for b in &self.values[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Number of eigenvalues with modulus at most `tol`.
    pub fn count_near_zero(&self, tol: f64) -> usize {
        self.values.iter().filter(|z| z.norm() <= tol).count()
    }
}

/// Lexicographic order on (re, im).
pub fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// All eigenvalues of a real square matrix.
///
/// Complex eigenvalues are produced in exact conjugate pairs.
pub fn eigenvalues(m: &RealMatrix) -> Result<Spectrum, LinalgError> {
    let n = m.require_square()?;
    if n == 1 {
        return Ok(Spectrum::new(vec![Complex64::new(m[(0, 0)], 0.0)]));
    }
    let mut h = m.clone();
    balance(&mut h);
    reduce_to_hessenberg(&mut h);
    let values = hessenberg_qr(&h)?;
    Ok(Spectrum::new(values))
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// orthogonal matrix whose columns are the corresponding eigenvectors.
pub fn symmetric_eigen(m: &RealMatrix) -> Result<(Vec<f64>, RealMatrix), LinalgError> {
    let n = m.require_square()?;
    let mut a = m.clone();
    // Symmetrise to remove rounding-level asymmetry.
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let mut v = RealMatrix::identity(n);
    let mut converged = n == 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            algorithm: "cyclic Jacobi eigen-solver",
            iterations: JACOBI_MAX_SWEEPS,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvector matrix for the given (simple) eigenvalues by inverse iteration.
///
/// Columns are normalised to unit Euclidean length with their
/// largest-modulus component real and positive.
pub fn eigenvectors(m: &RealMatrix, spectrum: &Spectrum) -> Result<ComplexMatrix, LinalgError> {
    let n = m.require_square()?;
    let mc = m.to_complex();
    let scale = m.norm_inf().max(1.0);
    let mut out = ComplexMatrix::zeros(n, n);
    for (col, &lambda) in spectrum.values().iter().enumerate() {
        let shift = lambda + Complex64::new(scale * 1e-10, 0.0);
        let mut shifted = mc.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu()?;
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.0))
            .collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            normalise(&mut x);
        }
        for (i, xi) in x.into_iter().enumerate() {
            out[(i, col)] = xi;
        }
    }
    Ok(out)
}

fn normalise(x: &mut [Complex64]) {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let pivot = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(Ordering::Equal))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    for z in x.iter_mut() {
        *z = *z * phase / norm;
    }
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable.
fn balance(a: &mut RealMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (in place).
fn reduce_to_hessenberg(h: &mut RealMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let high = n - 1;
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
///
/// Indices are 1-based internally to keep the deflation logic readable.
fn hessenberg_qr(hess: &RealMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = hess.rows();
    let dim = n + 1;
    let mut a = vec![0.0; dim * dim];
    let idx = |i: usize, j: usize| i * dim + j;
    for i in 0..n {
        for j in 0..n {
            a[idx(i + 1, j + 1)] = hess[(i, j)];
        }
    }
    let mut wr = vec![0.0; dim];
    let mut wi = vec![0.0; dim];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[idx(i, j)].abs();
        }
    }
    let sign = |a: f64, b: f64| if b >= 0.0 { a.abs() } else { -a.abs() };

    let mut nn = n as isize;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let nnu = nn as usize;
            // Look for a single small subdiagonal element.
            let mut l = nnu;
            while l >= 2 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() + s == s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[idx(nnu, nnu)];
            if l == nnu {
                wr[nnu] = x + t;
                wi[nnu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[idx(nnu - 1, nnu - 1)];
            let mut w = a[idx(nnu, nnu - 1)] * a[idx(nnu - 1, nnu)];
            if l == nnu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nnu - 1] = x + z;
                    wr[nnu] = x + z;
                    if z != 0.0 {
                        wr[nnu] = x - w / z;
                    }
                    wi[nnu - 1] = 0.0;
                    wi[nnu] = 0.0;
                } else {
                    wr[nnu - 1] = x + p;
                    wr[nnu] = x + p;
                    wi[nnu - 1] = -z;
                    wi[nnu] = z;
                }
                nn -= 2;
                break;
            }
            if its == QR_MAX_ITER_PER_EIG {
                return Err(LinalgError::NoConvergence {
                    algorithm: "Francis QR",
                    iterations: its,
                });
            }
            if its.is_multiple_of(10) && its > 0 {
                // Exceptional shift.
                t += x;
                for i in 1..=nnu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nnu, nnu - 1)].abs() + a[idx(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Form the shift and look for two consecutive small subdiagonals.
            let mut m = nnu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[idx(m, m)];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - r - s;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nnu {
                a[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[idx(i, i - 3)] = 0.0;
                }
            }
            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k < nnu {
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = 0.0;
                    if k != nnu - 1 {
                        r = a[idx(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nnu {
                        let mut pp = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if k != nnu - 1 {
                            pp += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pp * z;
                        }
                        a[idx(k + 1, j)] -= pp * y;
                        a[idx(k, j)] -= pp * x;
                    }
                    let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[idx(i, k)] + y * a[idx(i, k + 1)];
                        if k != nnu - 1 {
                            pp += z * a[idx(i, k + 2)];
                            a[idx(i, k + 2)] -= pp * r;
                        }
                        a[idx(i, k + 1)] -= pp * q;
                        a[idx(i, k)] -= pp;
                    }
                }
                k += 1;
            }
            if l >= nnu - 1 {
                break;
            }
        }
    }
    let values = (1..=n)
        .map(|i| Complex64::new(wr[i], wi[i]))
        .collect::<Vec<_>>();
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NoConvergence {
            algorithm: "Francis QR (non-finite eigenvalue)",
            iterations: 0,
        });
    }
    Ok(values)
}

/// `|det(M − λI)|`, used to validate computed eigenvalues.
pub fn characteristic_residual(m: &RealMatrix, lambda: Complex64) -> Result<f64, LinalgError> {
    let n = m.require_square()?;
    let mut shifted = m.to_complex();
    for i in 0..n {
        shifted[(i, i)] -= lambda;
    }
    match shifted.lu() {
        Ok(lu) => Ok(lu.det().norm()),
        // A zero pivot means an exact eigenvalue.
        Err(LinalgError::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}
