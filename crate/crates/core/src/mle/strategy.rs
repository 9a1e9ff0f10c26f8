//! How the dilution parameter ε is picked at each step.

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::state::DensityMatrix;

use super::{Evaluation, Objective};

/// Smallest ε drawn by [`EpsilonStrategy::Random`].
pub const RANDOM_EPSILON_MIN: f64 = 1e-4;

/// Number of halvings below the grid tried when no grid point improves the
/// likelihood.
const LINE_SEARCH_FALLBACK_HALVINGS: usize = 30;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonStrategy {
    /// Plain `RρR` (`ε = ∞`), with cycle detection.
    InfiniteRhoR,
    Fixed {
        epsilon: f64,
    },
    /// Try `ε = ∞`; on a likelihood decrease retry from `initial`, shrinking
    /// geometrically.
    AdaptiveBackoff {
        initial: f64,
        shrink: f64,
        max_retries: u32,
    },
    /// Pick the ε that maximizes the actual likelihood gain.
    LineSearch(LineSearchParams),
    /// Draw ε log-uniformly from `(1e-4, max_epsilon]` until the likelihood
    /// increases.
    Random {
        max_epsilon: f64,
        max_retries: u32,
        seed: u64,
    },
}

impl EpsilonStrategy {
    pub const fn adaptive_default() -> Self {
        Self::AdaptiveBackoff {
            initial: 1.0,
            shrink: 0.5,
            max_retries: 60,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InfiniteRhoR => "rhor",
            Self::Fixed { .. } => "fixed",
            Self::AdaptiveBackoff { .. } => "adaptive",
            Self::LineSearch(_) => "linesearch",
            Self::Random { .. } => "random",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        match *self {
            Self::InfiniteRhoR => Ok(()),
            Self::Fixed { epsilon } if positive(epsilon) => Ok(()),
            Self::Fixed { .. } => Err(Error::InvalidConfig("fixed epsilon must be positive")),
            Self::AdaptiveBackoff {
                initial,
                shrink,
                max_retries,
            } => {
                if !positive(initial) {
                    Err(Error::InvalidConfig("initial epsilon must be positive"))
                } else if !(shrink > 0.0 && shrink < 1.0) {
                    Err(Error::InvalidConfig("shrink factor must lie in (0, 1)"))
                } else if max_retries == 0 {
                    Err(Error::InvalidConfig("max retries must be positive"))
                } else {
                    Ok(())
                }
            }
            Self::LineSearch(p) => p.validate(),
            Self::Random {
                max_epsilon,
                max_retries,
                ..
            } => {
                if !(positive(max_epsilon) && max_epsilon > RANDOM_EPSILON_MIN) {
                    Err(Error::InvalidConfig("random max epsilon must exceed 1e-4"))
                } else if max_retries == 0 {
                    Err(Error::InvalidConfig("max retries must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Logarithmic grid on `[lo, hi]` followed by golden-section refinement in
/// `log ε` around the best grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub refinements: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1e3,
            grid_points: 25,
            refinements: 20,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(Error::InvalidConfig("line search needs 0 < lo <= hi < inf"));
        }
        if self.grid_points == 0 {
            return Err(Error::InvalidConfig(
                "line search needs at least one grid point",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        if n == 1 {
            return alloc::vec![self.lo];
        }
        let (a, b) = (libm::log(self.lo), libm::log(self.hi));
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i == n - 1 {
                    self.hi
                } else {
                    libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }
}

/// Best ε found by the line search and the achieved gain in log-likelihood.
pub(crate) struct LineSearchOutcome {
    pub epsilon: f64,
    pub gain: f64,
    /// Improved state and its evaluation; `None` when no ε increased the
    /// likelihood.
    pub state: Option<(DensityMatrix, Evaluation)>,
}

pub(crate) fn line_search(
    obj: &Objective<'_>,
    rho: &DensityMatrix,
    base: &Evaluation,
    generator: &CMatrix,
    params: &LineSearchParams,
) -> Result<LineSearchOutcome> {
    let mut best: Option<(f64, f64, DensityMatrix, Evaluation)> = None;
    let eval_at =
        |eps: f64, best: &mut Option<(f64, f64, DensityMatrix, Evaluation)>| -> Result<f64> {
            let (cand, ev, gain) = obj.propose(rho, base, generator, eps)?;
            if best.as_ref().is_none_or(|b| gain > b.1) {
                *best = Some((eps, gain, cand, ev));
            }
            Ok(gain)
        };

    let grid = params.grid();
    let mut best_idx = 0;
    let mut best_grid_gain = f64::NEG_INFINITY;
    for (i, &eps) in grid.iter().enumerate() {
        let g = eval_at(eps, &mut best)?;
        if g > best_grid_gain {
            best_grid_gain = g;
            best_idx = i;
        }
    }

    if grid.len() > 1 && params.refinements > 0 {
        let mut a = libm::log(grid[best_idx.saturating_sub(1)]);
        let mut b = libm::log(grid[(best_idx + 1).min(grid.len() - 1)]);
        let mut c = b - (b - a) * INV_PHI;
        let mut d = a + (b - a) * INV_PHI;
        let mut fc = eval_at(libm::exp(c), &mut best)?;
        let mut fd = eval_at(libm::exp(d), &mut best)?;
        for _ in 1..params.refinements {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * INV_PHI;
                fc = eval_at(libm::exp(c), &mut best)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * INV_PHI;
                fd = eval_at(libm::exp(d), &mut best)?;
            }
        }
    }

    let (eps, gain, state, ev) = best.expect("grid is non-empty");
    if gain > 0.0 {
        return Ok(LineSearchOutcome {
            epsilon: eps,
            gain,
            state: Some((state, ev)),
        });
    }

    // Nothing on the grid improved: walk below it, where a small enough step
    // always helps unless the state is already stationary.
    let mut eps = params.lo;
    for _ in 0..LINE_SEARCH_FALLBACK_HALVINGS {
        eps *= 0.5;
        let (cand, ev, gain) = obj.propose(rho, base, generator, eps)?;
        if gain > 0.0 {
            return Ok(LineSearchOutcome {
                epsilon: eps,
                gain,
                state: Some((cand, ev)),
            });
        }
    }
    Ok(LineSearchOutcome {
        epsilon: params.lo,
        gain: 0.0,
        state: None,
    })
}

/// Returns `(ε*, gain)`, the ε that maximizes the log-likelihood increase of
/// one diluted step from `rho` and the increase it achieves. The gain is never
/// negative; it is zero when no step improves on `rho`.
pub fn choose_epsilon_line_search(
    rho: &DensityMatrix,
    data: &Dataset,
    params: &LineSearchParams,
    floor: f64,
) -> Result<(f64, f64)> {
    params.validate()?;
    let obj = Objective::new(data, floor, None)?;
    obj.check(rho)?;
    let ev = obj.evaluate(rho);
    let generator = obj.generator(rho, &ev);
    let out = line_search(&obj, rho, &ev, &generator, params)?;
    Ok((out.epsilon, out.gain))
}
