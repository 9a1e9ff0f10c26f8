//! Hermitian operators and their spectral decomposition.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// Symmetry tolerance accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// A square complex matrix equal to its conjugate transpose.
///
/// Constructors symmetrize the stored entries exactly, so the diagonal is
/// real and `m[(i, j)] == m[(j, i)].conj()` bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Wraps `m` if it is Hermitian within [`HERMITIAN_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = m.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self {
            m: CMatrix::from_real_diagonal(diag),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    /// `Tr(self · other)`, real for Hermitian pairs.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        // B_ki = conj(B_ik), so Tr(AB) = Σ Re(A_ik conj(B_ik))
        assert_eq!(self.dim(), other.dim());
        self.m
            .as_slice()
            .iter()
            .zip(other.m.as_slice())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn eigen(&self) -> Eigen {
        jacobi(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let e = self.eigen();
        let mapped: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
        e.compose(&mapped)
    }

    /// Square root of the positive part; negative eigenvalues are clipped to zero.
    pub fn sqrt_psd(&self) -> HermitianOperator {
        self.map_spectrum(|l| libm::sqrt(l.max(0.0)))
    }
}

/// Spectral decomposition `m = V diag(values) V†`, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: CMatrix,
}

impl Eigen {
    /// Rebuilds `V diag(values) V†` with substituted eigenvalues.
    pub fn compose(&self, values: &[f64]) -> HermitianOperator {
        let n = self.vectors.rows();
        let v = &self.vectors;
        let m = CMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &l) in values.iter().enumerate() {
                acc += v[(i, k)] * v[(j, k)].conj() * l;
            }
            acc
        });
        HermitianOperator { m: symmetrize(&m) }
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.compose(&self.values)
    }
}

/// Returns `(m + m†)/2`.
pub fn hermitize(m: &CMatrix) -> Result<HermitianOperator> {
    check_square(m)?;
    Ok(HermitianOperator { m: symmetrize(m) })
}

pub fn eigendecompose(m: &HermitianOperator) -> Eigen {
    m.eigen()
}

fn check_square(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(())
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

/// Cyclic complex Jacobi.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation to the resulting
/// real 2x2 block.
fn jacobi(input: &CMatrix) -> Eigen {
    let n = input.rows();
    let mut a = symmetrize(input);
    let mut v = CMatrix::identity(n);

    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Eigen {
            values: alloc::vec![0.0; n],
            vectors: v,
        };
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if libm::sqrt(off) <= f64::EPSILON * 1e-3 * scale {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let abs_b = libm::hypot(b.re, b.im);
                if abs_b <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // phase removal: e^{-iφ} with b = |b| e^{iφ}
                let phase = Complex64::new(b.re / abs_b, -b.im / abs_b);

                let tau = (aqq - app) / (2.0 * abs_b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;

                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = phase * (-s);
                let j_qq = phase * c;

                // A ← A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                // V ← V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigen { values, vectors }
}
