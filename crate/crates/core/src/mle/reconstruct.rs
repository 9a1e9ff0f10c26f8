//! The top-level reconstruction loop.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::state::DensityMatrix;

use super::strategy::{line_search, EpsilonStrategy, RANDOM_EPSILON_MIN};
use super::{Evaluation, Objective, DEFAULT_FLOOR};

/// Two iterates this close (max elementwise modulus) count as the same state
/// for cycle detection.
pub const CYCLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub strategy: EpsilonStrategy,
    /// Stop when `‖Rρ − ρ‖_F` falls to this value.
    pub tol_residual: f64,
    /// Stop when one step changes the log-likelihood by at most this much.
    pub tol_loglik: f64,
    /// Stop when no matrix element moves by more than this (complex modulus).
    pub tol_element: f64,
    pub max_iterations: usize,
    /// Use the `G⁻¹`-corrected map for POVMs that do not sum to the identity.
    pub g_correction: bool,
    pub floor: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            strategy: EpsilonStrategy::adaptive_default(),
            tol_residual: 1e-10,
            tol_loglik: 1e-30,
            tol_element: 1e-13,
            max_iterations: 10_000,
            g_correction: false,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl ReconstructionConfig {
    pub fn with_strategy(strategy: EpsilonStrategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error::InvalidConfig;
        self.strategy.validate()?;
        if !(self.tol_residual > 0.0 && self.tol_loglik > 0.0 && self.tol_element > 0.0) {
            return Err(InvalidConfig("tolerances must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(InvalidConfig("max iterations must be at least 1"));
        }
        if !(self.floor > 0.0) {
            return Err(InvalidConfig("probability floor must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ResidualMet,
    ElementChangeMet,
    LikelihoodStalled,
    MaxIterations,
    CycleDetected,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ResidualMet => "ResidualMet",
            Self::ElementChangeMet => "ElementChangeMet",
            Self::LikelihoodStalled => "LikelihoodStalled",
            Self::MaxIterations => "MaxIterations",
            Self::CycleDetected => "CycleDetected",
        }
    }

    /// `true` for the two criteria that certify a stationary point.
    pub fn is_converged(&self) -> bool {
        matches!(self, Self::ResidualMet | Self::ElementChangeMet)
    }
}

/// Why a monitored strategy gave up on improving the likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StallDiagnostics {
    /// Iteration (0-based) at which no improving step was found.
    pub iteration: usize,
    pub attempts: u32,
    pub last_epsilon: f64,
    /// Best log-likelihood change seen among the rejected candidates.
    pub best_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub estimate: DensityMatrix,
    /// `log L` of every iterate, starting with the initial state.
    pub log_likelihood: Vec<f64>,
    /// ε used for each accepted step; `f64::INFINITY` for plain `RρR`.
    pub epsilon: Vec<f64>,
    /// Extremal residual of the final estimate.
    pub residual: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub stall: Option<StallDiagnostics>,
}

impl ReconstructionResult {
    /// Largest single-step decrease of the log-likelihood (0 if monotone).
    pub fn max_loglik_decrease(&self) -> f64 {
        self.log_likelihood
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Per-iteration progress report for [`reconstruct_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationEvent {
    pub iteration: usize,
    pub epsilon: f64,
    pub log_likelihood: f64,
    /// Residual of the state the step started from.
    pub residual: f64,
    /// Max elementwise change produced by the step.
    pub change: f64,
}

pub fn reconstruct(data: &Dataset, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    reconstruct_with(data, cfg, |_| {})
}

/// Runs the reconstruction from the maximally mixed state, calling `observer`
/// after every accepted step.
pub fn reconstruct_with(
    data: &Dataset,
    cfg: &ReconstructionConfig,
    mut observer: impl FnMut(&IterationEvent),
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let g = if cfg.g_correction {
        Some(data.g_operator()?)
    } else {
        None
    };
    let obj = Objective::new(data, cfg.floor, g.as_ref())?;

    let mut rho = DensityMatrix::maximally_mixed(data.dim())?;
    let mut eval = obj.evaluate(&rho);
    let mut previous: Option<DensityMatrix> = None;
    let mut loglik_trace = alloc::vec![eval.loglik];
    let mut eps_trace = Vec::new();
    let mut rng = match cfg.strategy {
        EpsilonStrategy::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let detect_cycles = matches!(
        cfg.strategy,
        EpsilonStrategy::InfiniteRhoR | EpsilonStrategy::Fixed { .. }
    );

    let mut termination = Termination::MaxIterations;
    let mut stall = None;
    let mut iterations = 0;

    for k in 0..cfg.max_iterations {
        let generator = obj.generator(&rho, &eval);
        let residual = obj.residual(&generator, &rho);
        if residual <= cfg.tol_residual {
            termination = Termination::ResidualMet;
            break;
        }

        let proposal = match cfg.strategy {
            EpsilonStrategy::InfiniteRhoR => {
                let (next, ev, gain) = obj.propose(&rho, &eval, &generator, f64::INFINITY)?;
                Ok((f64::INFINITY, next, ev, gain))
            }
            EpsilonStrategy::Fixed { epsilon } => {
                let (next, ev, gain) = obj.propose(&rho, &eval, &generator, epsilon)?;
                Ok((epsilon, next, ev, gain))
            }
            EpsilonStrategy::AdaptiveBackoff {
                initial,
                shrink,
                max_retries,
            } => adaptive(
                &obj,
                &rho,
                &generator,
                &eval,
                k,
                initial,
                shrink,
                max_retries,
            )?,
            EpsilonStrategy::LineSearch(params) => {
                let out = line_search(&obj, &rho, &eval, &generator, &params)?;
                match out.state {
                    Some((next, ev)) => Ok((out.epsilon, next, ev, out.gain)),
                    None => Err(StallDiagnostics {
                        iteration: k,
                        attempts: (params.grid_points + params.refinements) as u32,
                        last_epsilon: out.epsilon,
                        best_change: out.gain,
                    }),
                }
            }
            EpsilonStrategy::Random {
                max_epsilon,
                max_retries,
                ..
            } => random(
                &obj,
                &rho,
                &generator,
                &eval,
                k,
                max_epsilon,
                max_retries,
                rng.as_mut().expect("seeded for random strategy"),
            )?,
        };

        let (epsilon, next, next_eval, loglik_change) = match proposal {
            Ok(p) => p,
            Err(diag) => {
                stall = Some(diag);
                termination = Termination::LikelihoodStalled;
                break;
            }
        };

        let change = next.matrix().max_abs_diff(rho.matrix());
        loglik_trace.push(next_eval.loglik);
        eps_trace.push(epsilon);
        iterations = k + 1;
        observer(&IterationEvent {
            iteration: k,
            epsilon,
            log_likelihood: next_eval.loglik,
            residual,
            change,
        });

        let cycled = detect_cycles
            && change > cfg.tol_element
            && previous
                .as_ref()
                .is_some_and(|p| next.matrix().max_abs_diff(p.matrix()) <= CYCLE_TOL);

        previous = Some(core::mem::replace(&mut rho, next));
        eval = next_eval;

        if cycled {
            termination = Termination::CycleDetected;
            break;
        }
        if change <= cfg.tol_element {
            termination = Termination::ElementChangeMet;
            break;
        }
        if loglik_change.abs() <= cfg.tol_loglik {
            termination = Termination::LikelihoodStalled;
            break;
        }
    }

    let generator = obj.generator(&rho, &eval);
    let residual = obj.residual(&generator, &rho);
    Ok(ReconstructionResult {
        estimate: rho,
        log_likelihood: loglik_trace,
        epsilon: eps_trace,
        residual,
        iterations,
        termination,
        stall,
    })
}

/// Accepted `(ε, state, evaluation, gain)`, or why nothing was accepted.
type Proposal = core::result::Result<(f64, DensityMatrix, Evaluation, f64), StallDiagnostics>;

#[allow(clippy::too_many_arguments)]
fn adaptive(
    obj: &Objective<'_>,
    rho: &DensityMatrix,
    generator: &crate::matrix::CMatrix,
    eval: &Evaluation,
    iteration: usize,
    initial: f64,
    shrink: f64,
    max_retries: u32,
) -> Result<Proposal> {
    let (next, ev, gain) = obj.propose(rho, eval, generator, f64::INFINITY)?;
    if gain >= 0.0 {
        return Ok(Ok((f64::INFINITY, next, ev, gain)));
    }
    let mut best_change = gain;
    let mut epsilon = initial;
    for _ in 0..max_retries {
        let (next, ev, gain) = obj.propose(rho, eval, generator, epsilon)?;
        if gain >= 0.0 {
            return Ok(Ok((epsilon, next, ev, gain)));
        }
        best_change = best_change.max(gain);
        epsilon *= shrink;
    }
    Ok(Err(StallDiagnostics {
        iteration,
        attempts: max_retries + 1,
        last_epsilon: epsilon / shrink,
        best_change,
    }))
}

#[allow(clippy::too_many_arguments)]
fn random(
    obj: &Objective<'_>,
    rho: &DensityMatrix,
    generator: &crate::matrix::CMatrix,
    eval: &Evaluation,
    iteration: usize,
    max_epsilon: f64,
    max_retries: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Proposal> {
    let (lo, hi) = (libm::log(RANDOM_EPSILON_MIN), libm::log(max_epsilon));
    let mut best_change = f64::NEG_INFINITY;
    let mut epsilon = max_epsilon;
    for _ in 0..max_retries {
        // (lo, hi]: 1 - u with u in [0, 1)
        let u: f64 = 1.0 - rng.gen::<f64>();
        epsilon = libm::exp(lo + (hi - lo) * u);
        let (next, ev, gain) = obj.propose(rho, eval, generator, epsilon)?;
        if gain > 0.0 {
            return Ok(Ok((epsilon, next, ev, gain)));
        }
        best_change = best_change.max(gain);
    }
    Ok(Err(StallDiagnostics {
        iteration,
        attempts: max_retries,
        last_epsilon: epsilon,
        best_change,
    }))
}
