//! Density matrices, POVM elements and state metrics.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{hermitize, HermitianOperator};
use crate::matrix::CMatrix;

/// Eigenvalues down to this value count as non-negative.
pub const PSD_TOL: f64 = 1e-8;

/// Trace tolerance for [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;

/// A positive semi-definite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        validate_density(&op, TRACE_TOL.max(PSD_TOL))
    }

    /// `1/dim`, the completely mixed state.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(diag))
    }

    /// `|v̂⟩⟨v̂|` for the normalized `v`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let p = projector(v)?;
        Ok(Self { op: p })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }
}

/// A positive semi-definite measurement operator `Π_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    op: HermitianOperator,
}

impl PovmElement {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let min_eigenvalue = op.min_eigenvalue();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::Negativity { min_eigenvalue });
        }
        Ok(Self { op })
    }

    /// `|v⟩⟨v|` without normalizing `v`; PSD by construction.
    pub fn rank_one(v: &[Complex64]) -> Self {
        let m = CMatrix::outer(v, v);
        Self {
            op: hermitize(&m).expect("outer product is square"),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(diag))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }
}

pub(crate) fn projector(v: &[Complex64]) -> Result<HermitianOperator> {
    let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if v.is_empty() || !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
        return Err(Error::ZeroVector);
    }
    let inv = 1.0 / libm::sqrt(norm_sqr);
    let unit: Vec<Complex64> = v.iter().map(|z| z * inv).collect();
    hermitize(&CMatrix::outer(&unit, &unit))
}

/// Divides by the trace.
pub fn normalize(m: &HermitianOperator) -> Result<DensityMatrix> {
    let trace = m.trace();
    if !(trace > f64::MIN_POSITIVE) || !trace.is_finite() {
        return Err(Error::NonNormalizable { trace });
    }
    Ok(DensityMatrix {
        op: m.scale(1.0 / trace),
    })
}

pub fn validate_density(m: &HermitianOperator, tol: f64) -> Result<DensityMatrix> {
    let trace = m.trace();
    if !((trace - 1.0).abs() <= tol) {
        return Err(Error::TraceViolation { trace });
    }
    let min_eigenvalue = m.min_eigenvalue();
    if min_eigenvalue < -tol {
        return Err(Error::Negativity { min_eigenvalue });
    }
    Ok(DensityMatrix { op: m.clone() })
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`, clamped to `[0, 1]`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let sa = a.op().sqrt_psd();
    let inner = sa.matrix().matmul(b.matrix()).matmul(sa.matrix());
    let inner = hermitize(&inner)?;
    let root_trace: f64 = inner
        .eigen()
        .values
        .iter()
        .map(|&l| libm::sqrt(l.max(0.0)))
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}
