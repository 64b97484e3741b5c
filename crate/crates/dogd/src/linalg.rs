//! Dense vector and small-matrix routines used throughout the crate.
//!
//! Everything here is deterministic: summations run left to right, the
//! eigensolve uses a fixed sweep order, and no parallelism is involved.
//! Matrices are stored row-major in a flat `Vec<f64>`; all of them are
//! square and small (dimension at most a few hundred), so `O(n^3)` direct
//! methods are appropriate.

use crate::error::{Error, Result};

/// Compensated accumulator (Kahan summation, Neumaier variant).
///
/// Long regret ledgers add up to 2 * 10^5 terms whose running sums span
/// several orders of magnitude; compensation keeps the cumulative rounding
/// error at a few ulps independent of length. `value()` returns the
/// compensated total.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    /// Empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    /// Compensated total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(terms: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Inner product of two equal-length vectors.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance between two vectors.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s.sqrt()
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

/// `out = m * x` for a row-major `n x n` matrix.
pub fn mat_vec(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        out[i] = dot(&m[i * n..(i + 1) * n], x);
    }
}

/// Frobenius norm of a flat-stored matrix.
#[inline]
pub fn frobenius_norm(m: &[f64]) -> f64 {
    norm(m)
}

/// True when every entry is finite.
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Attempts a Cholesky factorization of a symmetric matrix; succeeds exactly
/// when the matrix is positive definite (up to roundoff). Only the lower
/// triangle of the input is read. The factor itself is discarded; this is a
/// definiteness test.
pub fn is_positive_definite(m: &[f64], n: usize) -> bool {
    debug_assert_eq!(m.len(), n * n);
    let mut l = vec![0.0_f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run in a fixed `(p, q)` order until every off-diagonal entry is
/// below `tol * frobenius_norm`, so the result is bit-reproducible across
/// runs. Eigenvalues are returned in ascending order. Intended for the small
/// matrices of the fractional losses (n <= a few hundred).
pub fn symmetric_eigenvalues(m: &[f64], n: usize, tol: f64) -> Result<Vec<f64>> {
    debug_assert_eq!(m.len(), n * n);
    if !all_finite(m) {
        return Err(Error::NonFinite("symmetric_eigenvalues input"));
    }
    // Verify symmetry up to roundoff before destroying the input copy.
    let scale = frobenius_norm(m).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[i * n + j] - m[j * n + i]).abs() > 1e-8 * scale {
                return Err(Error::InvalidParameter {
                    name: "matrix",
                    reason: format!(
                        "not symmetric at ({i}, {j}): {} vs {}",
                        m[i * n + j],
                        m[j * n + i]
                    ),
                });
            }
        }
    }

    let mut a = m.to_vec();
    let threshold = tol * scale;
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= threshold {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= threshold * 1e-3 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotation angle that zeroes (p, q); the symmetric-Schur
                // formulas keep |t| <= 1 for numerical stability.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q * n + q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    Err(Error::NoConvergence {
        solver: "jacobi eigensolve",
        max_iter: MAX_SWEEPS as u64,
        residual: f64::NAN,
    })
}

/// Smallest eigenvalue of a symmetric matrix (Jacobi, tolerance 1e-10).
pub fn smallest_eigenvalue(m: &[f64], n: usize) -> Result<f64> {
    Ok(symmetric_eigenvalues(m, n, 1e-10)?[0])
}

/// Largest eigenvalue of a symmetric matrix (Jacobi, tolerance 1e-10).
pub fn largest_eigenvalue(m: &[f64], n: usize) -> Result<f64> {
    Ok(*symmetric_eigenvalues(m, n, 1e-10)?
        .last()
        .expect("nonempty spectrum"))
}
