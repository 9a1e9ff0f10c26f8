//! Likelihood maximization over density matrices.
//!
//! For a record `{(Π_j, f_j)}` with `N = Σ f_j` the log-likelihood is
//! `log L(ρ) = Σ_j f_j log pr_j` with `pr_j = Tr(Π_j ρ)`, and its stationary
//! points satisfy `R(ρ) ρ = ρ` where `R(ρ) = (1/N) Σ_j (f_j / pr_j) Π_j`.
//!
//! The step maps here all have the form `ρ ← N[M ρ M†]`:
//!
//! | map                  | `M`                                   |
//! |----------------------|---------------------------------------|
//! | [`rhor_step`]        | `R`                                   |
//! | [`diluted_step`]     | `(1 + εR)/(1+ε)`                      |
//! | [`g_corrected_step`] | `(1 + ε·Tr(Gρ)·G⁻¹R)/(1+ε)`           |
//!
//! so positivity is preserved exactly and only normalization is needed.

mod convergence;
mod reconstruct;
mod strategy;

use alloc::vec::Vec;

use crate::dataset::{Dataset, GOperator};
use crate::error::{Error, Result};
use crate::hermitian::{hermitize, HermitianOperator};
use crate::matrix::CMatrix;
use crate::state::{normalize, DensityMatrix};

pub use convergence::iterations_to_reference;
pub use reconstruct::{
    reconstruct, reconstruct_with, IterationEvent, ReconstructionConfig, ReconstructionResult,
    StallDiagnostics, Termination,
};
pub use strategy::{choose_epsilon_line_search, EpsilonStrategy, LineSearchParams};

/// Default lower clamp on outcome probabilities.
pub const DEFAULT_FLOOR: f64 = 1e-12;

fn check_dims(rho: &DensityMatrix, data: &Dataset) -> Result<()> {
    if rho.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `pr_j = max(Tr(Π_j ρ), floor)` for every record.
pub fn outcome_probabilities(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Result<Vec<f64>> {
    check_dims(rho, data)?;
    Ok(probabilities(rho, data, floor))
}

/// `Σ_j f_j log pr_j` with floored probabilities (natural log).
pub fn log_likelihood(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Result<f64> {
    check_dims(rho, data)?;
    Ok(loglik_from_probs(data, &probabilities(rho, data, floor)))
}

/// `R(ρ) = (1/N) Σ_j (f_j / pr_j) Π_j`
pub fn r_operator(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Result<HermitianOperator> {
    check_dims(rho, data)?;
    Ok(r_from_probs(data, &probabilities(rho, data, floor)))
}

/// One step of the undiluted iteration, `N[R ρ R]`.
pub fn rhor_step(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Result<DensityMatrix> {
    diluted_step(rho, data, f64::INFINITY, floor)
}

/// `N[(1+εR)/(1+ε) ρ (1+εR)/(1+ε)]`. `ε = ∞` gives [`rhor_step`].
pub fn diluted_step(
    rho: &DensityMatrix,
    data: &Dataset,
    epsilon: f64,
    floor: f64,
) -> Result<DensityMatrix> {
    check_epsilon(epsilon)?;
    let obj = Objective::new(data, floor, None)?;
    obj.check(rho)?;
    let eval = obj.evaluate(rho);
    obj.step(rho, &obj.generator(rho, &eval), epsilon)
}

/// Diluted step for POVMs whose elements do not sum to the identity.
///
/// The generator is `K = Tr(Gρ)·G⁻¹R`, which equals the identity at the
/// maximum of the renormalized likelihood `Σ_j f_j log(pr_j / Tr(Gρ))`. With
/// `ε = ∞` the map is `N[G⁻¹RρRG⁻¹]`; with `G = 1` it is [`diluted_step`].
pub fn g_corrected_step(
    rho: &DensityMatrix,
    data: &Dataset,
    g: &GOperator,
    epsilon: f64,
    floor: f64,
) -> Result<DensityMatrix> {
    check_epsilon(epsilon)?;
    let obj = Objective::new(data, floor, Some(g))?;
    obj.check(rho)?;
    let eval = obj.evaluate(rho);
    obj.step(rho, &obj.generator(rho, &eval), epsilon)
}

/// `‖R ρ − ρ‖_F`, zero exactly at stationary points.
pub fn extremal_residual(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Result<f64> {
    check_dims(rho, data)?;
    let r = r_from_probs(data, &probabilities(rho, data, floor));
    Ok(residual_of(r.matrix(), rho))
}

/// First-order likelihood increase of a diluted step, `2ε(Tr(RρR) − 1)`.
pub fn likelihood_gain_first_order(
    rho: &DensityMatrix,
    data: &Dataset,
    epsilon: f64,
    floor: f64,
) -> Result<f64> {
    check_dims(rho, data)?;
    let r = r_from_probs(data, &probabilities(rho, data, floor));
    Ok(2.0 * epsilon * (trace_r_rho_r(&r, rho) - 1.0))
}

/// `log L(to) − log L(from)`, summed term by term from the state difference
/// so that tiny steps keep full relative precision.
pub fn likelihood_gain(
    from: &DensityMatrix,
    to: &DensityMatrix,
    data: &Dataset,
    floor: f64,
) -> Result<f64> {
    check_dims(from, data)?;
    check_dims(to, data)?;
    let obj = Objective::new(data, floor, None)?;
    let base = obj.evaluate(from);
    Ok(obj.evaluate_step(from, &base, to).1)
}

/// `Tr(R ρ R)`
pub fn trace_r_rho_r(r: &HermitianOperator, rho: &DensityMatrix) -> f64 {
    let rho_r = rho.matrix().matmul(r.matrix());
    r.matrix().matmul(&rho_r).trace().re
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive"));
    }
    Ok(())
}

fn probabilities(rho: &DensityMatrix, data: &Dataset, floor: f64) -> Vec<f64> {
    data.records()
        .iter()
        .map(|r| r.element.op().trace_product(rho.op()).max(floor))
        .collect()
}

fn loglik_from_probs(data: &Dataset, probs: &[f64]) -> f64 {
    data.records()
        .iter()
        .zip(probs)
        .filter(|(r, _)| r.count > 0.0)
        .map(|(r, &p)| r.count * libm::log(p))
        .sum()
}

fn r_from_probs(data: &Dataset, probs: &[f64]) -> HermitianOperator {
    let n = data.dim();
    let total = data.total();
    let mut acc = CMatrix::zeros(n, n);
    for (r, &p) in data.records().iter().zip(probs) {
        if r.count > 0.0 {
            acc.add_scaled_assign(r.count / (total * p), r.element.matrix());
        }
    }
    hermitize(&acc).expect("square accumulator")
}

fn residual_of(generator: &CMatrix, rho: &DensityMatrix) -> f64 {
    generator
        .matmul(rho.matrix())
        .sub(rho.matrix())
        .frobenius_norm()
}

/// Likelihood of the current state plus what is needed to build the step.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub probs: Vec<f64>,
    pub loglik: f64,
    /// `Tr(Gρ)`; 1 without G-correction.
    pub g_weight: f64,
}

/// Bundles the dataset, floor and optional G-correction so that the
/// reconstruction loop evaluates each candidate state exactly once.
pub(crate) struct Objective<'a> {
    data: &'a Dataset,
    floor: f64,
    g: Option<&'a GOperator>,
}

impl<'a> Objective<'a> {
    pub fn new(data: &'a Dataset, floor: f64, g: Option<&'a GOperator>) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidConfig("probability floor must be positive"));
        }
        if let Some(g) = g {
            if g.dim() != data.dim() {
                return Err(Error::DimensionMismatch {
                    expected: data.dim(),
                    found: g.dim(),
                });
            }
        }
        Ok(Self { data, floor, g })
    }

    pub fn check(&self, rho: &DensityMatrix) -> Result<()> {
        check_dims(rho, self.data)
    }

    /// Log-likelihood; with G-correction, `Σ f_j log pr_j − N log Tr(Gρ)`.
    pub fn evaluate(&self, rho: &DensityMatrix) -> Evaluation {
        let probs = probabilities(rho, self.data, self.floor);
        let mut loglik = loglik_from_probs(self.data, &probs);
        let g_weight = match self.g {
            Some(g) => {
                let w = g.op().trace_product(rho.op());
                loglik -= self.data.total() * libm::log(w);
                w
            }
            None => 1.0,
        };
        Evaluation {
            probs,
            loglik,
            g_weight,
        }
    }

    /// Evaluates `next` and its log-likelihood gain over `base`, taking the
    /// state difference from the two matrices.
    pub fn evaluate_step(
        &self,
        base: &DensityMatrix,
        base_eval: &Evaluation,
        next: &DensityMatrix,
    ) -> (Evaluation, f64) {
        let eval = self.evaluate(next);
        let diff = next.matrix().sub(base.matrix());
        let gain = self.gain(base_eval, &eval, &diff);
        (eval, gain)
    }

    /// Applies the map and returns the new state, its evaluation and the
    /// exact gain of the map.
    ///
    /// `Δρ` is assembled from `δ = M − I` rather than by subtracting two
    /// rounded states, so gains keep full relative precision near the
    /// maximum where they shrink quadratically with the residual.
    pub fn propose(
        &self,
        rho: &DensityMatrix,
        base_eval: &Evaluation,
        generator: &CMatrix,
        epsilon: f64,
    ) -> Result<(DensityMatrix, Evaluation, f64)> {
        let n = generator.rows();
        let mut delta = generator.sub(&CMatrix::identity(n));
        if epsilon.is_finite() {
            delta = delta.scale(epsilon / (1.0 + epsilon));
        }
        // MρM† − ρ = δρ + ρδ† + δρδ†
        let d_rho = delta.matmul(rho.matrix());
        let mut change = d_rho.add(&d_rho.adjoint());
        change.add_scaled_assign(1.0, &d_rho.matmul(&delta.adjoint()));
        let s = change.trace().re;
        change.add_scaled_assign(-s, rho.matrix());
        let diff = change.scale(1.0 / (1.0 + s));

        let next = self.step(rho, generator, epsilon)?;
        let eval = self.evaluate(&next);
        let gain = self.gain(base_eval, &eval, &diff);
        Ok((next, eval, gain))
    }

    /// `Σ f_j log1p(Tr(Π_j Δρ)/pr_j)`, minus `N log1p(Tr(GΔρ)/Tr(Gρ))` with
    /// G-correction. Floored probabilities fall back to the plain ratio.
    fn gain(&self, base_eval: &Evaluation, eval: &Evaluation, diff: &CMatrix) -> f64 {
        let diff = hermitize(diff).expect("square");
        let mut gain = 0.0;
        for ((r, &p0), &p1) in self
            .data
            .records()
            .iter()
            .zip(&base_eval.probs)
            .zip(&eval.probs)
        {
            if r.count <= 0.0 {
                continue;
            }
            let floored = p0 <= self.floor || p1 <= self.floor;
            let term = if floored {
                libm::log(p1 / p0)
            } else {
                libm::log1p(r.element.op().trace_product(&diff) / p0)
            };
            gain += r.count * term;
        }
        if let Some(g) = self.g {
            let dw = g.op().trace_product(&diff);
            gain -= self.data.total() * libm::log1p(dw / base_eval.g_weight);
        }
        gain
    }

    /// `R`, or `Tr(Gρ)·G⁻¹R` with G-correction.
    pub fn generator(&self, _rho: &DensityMatrix, eval: &Evaluation) -> CMatrix {
        let r = r_from_probs(self.data, &eval.probs);
        match self.g {
            Some(g) => g.inverse().matrix().matmul(r.matrix()).scale(eval.g_weight),
            None => r.into_matrix(),
        }
    }

    pub fn residual(&self, generator: &CMatrix, rho: &DensityMatrix) -> f64 {
        residual_of(generator, rho)
    }

    pub fn step(
        &self,
        rho: &DensityMatrix,
        generator: &CMatrix,
        epsilon: f64,
    ) -> Result<DensityMatrix> {
        let m = if epsilon.is_infinite() {
            generator.clone()
        } else {
            let n = generator.rows();
            let mut m = CMatrix::identity(n);
            m.add_scaled_assign(epsilon, generator);
            m.scale(1.0 / (1.0 + epsilon))
        };
        let out = m.matmul(rho.matrix()).matmul(&m.adjoint());
        normalize(&hermitize(&out)?)
    }
}
