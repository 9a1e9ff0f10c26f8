//! Seeded synthetic measurement data from a known state.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Record};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::povm::{harmonic_wavefunctions, QuadratureSample};
use crate::state::{DensityMatrix, PovmElement};

/// Generator behind every seeded stream in this crate.
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Completeness tolerance for multinomial sampling.
pub const COMPLETENESS_TOL: f64 = 1e-8;

pub const QUADRATURE_GRID_LO: f64 = -6.0;
pub const QUADRATURE_GRID_HI: f64 = 6.0;
pub const QUADRATURE_GRID_POINTS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub true_state: DensityMatrix,
    pub seed: u64,
    pub samples: usize,
}

impl SimulationSpec {
    pub fn new(true_state: DensityMatrix, seed: u64, samples: usize) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidConfig("sample count must be at least 1"));
        }
        Ok(Self {
            true_state,
            seed,
            samples,
        })
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Multinomial counts over a complete POVM with probabilities
/// `Tr(Π_j ρ_true)`. Every element appears in the dataset, including those
/// that never fired.
pub fn sample_counts(spec: &SimulationSpec, povm: &[PovmElement]) -> Result<Dataset> {
    let first = povm.first().ok_or(Error::EmptyDataset)?;
    let dim = spec.true_state.dim();
    let mut sum = CMatrix::zeros(dim, dim);
    for e in povm {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.dim(),
            });
        }
        sum.add_scaled_assign(1.0, e.matrix());
    }
    let deviation = sum.max_abs_diff(&CMatrix::identity(first.dim()));
    if deviation > COMPLETENESS_TOL {
        return Err(Error::IncompletePovm { deviation });
    }

    let probs: Vec<f64> = povm
        .iter()
        .map(|e| e.op().trace_product(spec.true_state.op()).max(0.0))
        .collect();
    let cdf = cumulative(&probs);
    let total = *cdf.last().expect("non-empty");

    let mut rng = spec.rng();
    let mut counts = alloc::vec![0.0; povm.len()];
    for _ in 0..spec.samples {
        let u = rng.gen::<f64>() * total;
        // first index with cdf > u, skipping zero-probability outcomes
        let j = cdf.partition_point(|&c| c <= u).min(povm.len() - 1);
        counts[j] += 1.0;
    }

    Dataset::new(
        povm.iter()
            .cloned()
            .zip(counts)
            .map(|(element, count)| Record { element, count })
            .collect(),
    )
}

/// Quadrature marginal `p(x|θ) = Tr(Π(x,θ) ρ)` on the sampling grid.
pub fn quadrature_density_table(state: &DensityMatrix, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let dim = state.dim();
    let m = state.matrix();
    let step = (QUADRATURE_GRID_HI - QUADRATURE_GRID_LO) / (QUADRATURE_GRID_POINTS - 1) as f64;
    let mut xs = Vec::with_capacity(QUADRATURE_GRID_POINTS);
    let mut ps = Vec::with_capacity(QUADRATURE_GRID_POINTS);
    for i in 0..QUADRATURE_GRID_POINTS {
        let x = QUADRATURE_GRID_LO + step * i as f64;
        let psi = harmonic_wavefunctions(dim, x);
        // Σ_{mn} ρ_{nm} e^{i(m−n)θ} ψ_m ψ_n
        let mut p = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                let phase = (a as f64 - b as f64) * theta;
                let z = m[(b, a)];
                p += psi[a] * psi[b] * (z.re * libm::cos(phase) - z.im * libm::sin(phase));
            }
        }
        xs.push(x);
        ps.push(p.max(0.0));
    }
    (xs, ps)
}

/// Draws homodyne samples: a phase uniformly from `phases`, then `x` by
/// inverse-CDF sampling of the tabulated marginal (piecewise-linear density,
/// so the CDF is inverted exactly within each cell).
pub fn sample_quadratures(
    spec: &SimulationSpec,
    phases: &[f64],
    dim: usize,
) -> Result<Vec<QuadratureSample>> {
    if phases.is_empty() {
        return Err(Error::EmptySamples);
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim != spec.true_state.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: spec.true_state.dim(),
        });
    }

    let tables: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = phases
        .iter()
        .map(|&theta| {
            let (xs, ps) = quadrature_density_table(&spec.true_state, theta);
            let cdf = trapezoid_cdf(&xs, &ps);
            (xs, ps, cdf)
        })
        .collect();

    let mut rng = spec.rng();
    let mut out = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let k = rng.gen_range(0..phases.len());
        let (xs, ps, cdf) = &tables[k];
        let u = rng.gen::<f64>() * cdf[cdf.len() - 1];
        out.push(QuadratureSample {
            theta: phases[k],
            x: invert_cell(xs, ps, cdf, u),
        });
    }
    Ok(out)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

fn trapezoid_cdf(xs: &[f64], ps: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(xs.len());
    cdf.push(0.0);
    for i in 1..xs.len() {
        let area = 0.5 * (ps[i] + ps[i - 1]) * (xs[i] - xs[i - 1]);
        cdf.push(cdf[i - 1] + area);
    }
    cdf
}

/// Solves `cdf(x) = u` inside the cell holding `u`, with the density linear
/// across the cell.
fn invert_cell(xs: &[f64], ps: &[f64], cdf: &[f64], u: f64) -> f64 {
    let i = cdf.partition_point(|&c| c <= u).clamp(1, xs.len() - 1);
    let (x0, h) = (xs[i - 1], xs[i] - xs[i - 1]);
    let (p0, p1) = (ps[i - 1], ps[i]);
    let target = u - cdf[i - 1];
    // ∫_0^t (p0 + s t') dt' = p0 t + s t²/2 = target, s = (p1 − p0)/h
    let slope = (p1 - p0) / h;
    let t = if slope.abs() <= 1e-300 || (slope * target).abs() < 1e-12 * p0 * p0 {
        if p0 > 0.0 {
            target / p0
        } else {
            0.0
        }
    } else {
        let disc = (p0 * p0 + 2.0 * slope * target).max(0.0);
        // numerically stable root of s t²/2 + p0 t − target = 0
        2.0 * target / (p0 + libm::sqrt(disc))
    };
    x0 + t.clamp(0.0, h)
}
