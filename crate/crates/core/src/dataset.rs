//! Measurement records and the POVM sum `G = Σ_j Π_j`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::CMatrix;
use crate::state::PovmElement;

/// Relative tolerance between a stated total and the sum of counts.
pub const TOTAL_REL_TOL: f64 = 1e-9;

/// Condition estimates above this make `G` singular.
pub const G_MAX_CONDITION: f64 = 1e12;

/// One measurement channel and how often it fired. Counts are real so that
/// weighted or binned records fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub element: PovmElement,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    records: Vec<Record>,
    total: f64,
}

impl Dataset {
    /// Builds a dataset, taking `N` as the sum of counts.
    pub fn new(records: Vec<Record>) -> Result<Self> {
        let sum = validate_records(&records)?;
        let dim = records[0].element.dim();
        Ok(Self {
            dim,
            records,
            total: sum,
        })
    }

    /// Builds a dataset with an explicit `N`, which must agree with the counts.
    pub fn with_total(records: Vec<Record>, total: f64) -> Result<Self> {
        let sum = validate_records(&records)?;
        if !((total - sum).abs() <= TOTAL_REL_TOL * sum.abs().max(total.abs())) {
            return Err(Error::TotalMismatch { total, sum });
        }
        let dim = records[0].element.dim();
        Ok(Self {
            dim,
            records,
            total,
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PovmElement, f64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(element, count)| Record { element, count })
                .collect(),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.count)
    }

    /// `Σ_j Π_j`
    pub fn povm_sum(&self) -> HermitianOperator {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for r in &self.records {
            acc.add_scaled_assign(1.0, r.element.matrix());
        }
        HermitianOperator::new(acc).expect("sum of Hermitian elements")
    }

    /// Max elementwise deviation of `Σ_j Π_j` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        self.povm_sum()
            .matrix()
            .max_abs_diff(&CMatrix::identity(self.dim))
    }

    pub fn g_operator(&self) -> Result<GOperator> {
        GOperator::from_sum(self.povm_sum())
    }
}

fn validate_records(records: &[Record]) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let dim = first.element.dim();
    let mut sum = 0.0;
    let mut any_positive = false;
    for (index, r) in records.iter().enumerate() {
        if r.element.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.element.dim(),
            });
        }
        if !(r.count >= 0.0) || !r.count.is_finite() {
            return Err(Error::InvalidCount {
                index,
                count: r.count,
            });
        }
        any_positive |= r.count > 0.0;
        sum += r.count;
    }
    if !any_positive {
        return Err(Error::NoPositiveCounts);
    }
    Ok(sum)
}

/// `G = Σ_j Π_j` together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GOperator {
    op: HermitianOperator,
    inverse: HermitianOperator,
    condition: f64,
}

impl GOperator {
    pub fn from_sum(op: HermitianOperator) -> Result<Self> {
        let eig = op.eigen();
        let max = eig.values.first().copied().unwrap_or(0.0);
        let min = eig.values.last().copied().unwrap_or(0.0);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= G_MAX_CONDITION) {
            return Err(Error::SingularG { condition });
        }
        let inv: Vec<f64> = eig.values.iter().map(|&l| 1.0 / l).collect();
        let inverse = eig.compose(&inv);
        Ok(Self {
            op,
            inverse,
            condition,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
            inverse: HermitianOperator::identity(dim),
            condition: 1.0,
        }
    }

    #[inline]
    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    #[inline]
    pub fn inverse(&self) -> &HermitianOperator {
        &self.inverse
    }

    #[inline]
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}
