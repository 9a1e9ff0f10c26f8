use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rhor_core::{EpsilonStrategy, LineSearchParams, ReconstructionConfig};
use serde_json::json;

use crate::error::CliError;

/// Maximum-likelihood quantum state reconstruction with the diluted RρR
/// iteration.
///
/// Quadrature data follow the convention x = (a + a†)/√2, so the vacuum has
/// variance 1/2. Environment variables are never consulted.
#[derive(Debug, Parser)]
#[command(name = "rhor", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct a density matrix from a dataset.
    Reconstruct(ReconstructArgs),
    /// Count iterations to reach a reference solution across ε and tolerances.
    Sweep(SweepArgs),
    /// Generate a synthetic dataset from a known state.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    /// Plain RρR (ε = ∞).
    Rhor,
    /// Constant ε (`--epsilon`).
    Fixed,
    /// Start at `--epsilon` and shrink until the likelihood does not drop.
    Adaptive,
    /// Maximize the likelihood gain over ε at every step.
    Linesearch,
    /// Random ε in (0, `--epsilon`], retried until the likelihood rises.
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "adaptive")]
    pub strategy: StrategyName,
    /// ε for `fixed`; initial ε for `adaptive` (default 1); upper bound for `random` (default 10).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Factor applied to ε after a rejected `adaptive` step.
    #[arg(long, default_value_t = 0.5)]
    pub shrink: f64,
    /// Rejected proposals tolerated per step before stopping (`adaptive`, `random`).
    #[arg(long, default_value_t = 60)]
    pub max_retries: u32,
    /// Lower end of the `linesearch` ε grid.
    #[arg(long, default_value_t = 1e-3)]
    pub grid_lo: f64,
    /// Upper end of the `linesearch` ε grid.
    #[arg(long, default_value_t = 1e3)]
    pub grid_hi: f64,
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,
    /// Golden-section refinements after the grid scan.
    #[arg(long, default_value_t = 20)]
    pub refinements: usize,
    /// Stop when ‖Rρ − ρ‖_F falls below this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_residual: f64,
    /// Stop when no matrix element moves by more than this in one step.
    #[arg(long, default_value_t = 1e-13)]
    pub tol_element: f64,
    /// Stop (not converged) when the log-likelihood gain of a step falls below this.
    #[arg(long, default_value_t = 1e-30)]
    pub tol_loglik: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Use the G⁻¹-corrected map for incomplete measurements.
    #[arg(long)]
    pub g_correction: bool,
    /// Lower bound applied to outcome probabilities.
    #[arg(long, default_value_t = 1e-12)]
    pub floor: f64,
    /// Seed for the `random` strategy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EngineArgs {
    pub fn strategy(&self) -> Result<EpsilonStrategy, CliError> {
        let s = match self.strategy {
            StrategyName::Rhor => EpsilonStrategy::InfiniteRhoR,
            StrategyName::Fixed => EpsilonStrategy::Fixed {
                epsilon: self.epsilon.ok_or_else(|| {
                    CliError::Validation("--strategy fixed needs --epsilon".into())
                })?,
            },
            StrategyName::Adaptive => EpsilonStrategy::AdaptiveBackoff {
                initial: self.epsilon.unwrap_or(1.0),
                shrink: self.shrink,
                max_retries: self.max_retries,
            },
            StrategyName::Linesearch => EpsilonStrategy::LineSearch(self.line_search()),
            StrategyName::Random => EpsilonStrategy::Random {
                max_epsilon: self.epsilon.unwrap_or(10.0),
                max_retries: self.max_retries,
                seed: self.seed,
            },
        };
        Ok(s)
    }

    pub fn line_search(&self) -> LineSearchParams {
        LineSearchParams {
            lo: self.grid_lo,
            hi: self.grid_hi,
            grid_points: self.grid_points,
            refinements: self.refinements,
        }
    }

    pub fn config(&self) -> Result<ReconstructionConfig, CliError> {
        let cfg = ReconstructionConfig {
            strategy: self.strategy()?,
            tol_residual: self.tol_residual,
            tol_loglik: self.tol_loglik,
            tol_element: self.tol_element,
            max_iterations: self.max_iters,
            g_correction: self.g_correction,
            floor: self.floor,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Config echo for manifests.
pub fn config_json(cfg: &ReconstructionConfig) -> serde_json::Value {
    let strategy = match cfg.strategy {
        EpsilonStrategy::InfiniteRhoR => json!({ "name": "rhor" }),
        EpsilonStrategy::Fixed { epsilon } => json!({ "name": "fixed", "epsilon": epsilon }),
        EpsilonStrategy::AdaptiveBackoff {
            initial,
            shrink,
            max_retries,
        } => json!({
            "name": "adaptive", "initial": initial, "shrink": shrink, "max_retries": max_retries
        }),
        EpsilonStrategy::LineSearch(p) => json!({
            "name": "linesearch", "lo": p.lo, "hi": p.hi,
            "grid_points": p.grid_points, "refinements": p.refinements
        }),
        EpsilonStrategy::Random {
            max_epsilon,
            max_retries,
            seed,
        } => json!({
            "name": "random", "max_epsilon": max_epsilon, "max_retries": max_retries, "seed": seed
        }),
    };
    json!({
        "strategy": strategy,
        "tol_residual": cfg.tol_residual,
        "tol_element": cfg.tol_element,
        "tol_loglik": cfg.tol_loglik,
        "max_iterations": cfg.max_iterations,
        "g_correction": cfg.g_correction,
        "floor": cfg.floor,
    })
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Dataset file (.json counts or .csv quadratures).
    pub input: PathBuf,
    /// Fock-space truncation for quadrature CSV input.
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Result JSON path; the manifest goes to `<stem>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dataset file (.json counts or .csv quadratures).
    pub input: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    /// ε values; `inf` (plain RρR) is always included.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.3,1,3,10,30,100,inf"
    )]
    pub epsilons: Vec<f64>,
    /// Convergence tolerances on the max elementwise distance to the reference.
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-5,1e-7")]
    pub tolerances: Vec<f64>,
    /// Iteration cap per ε; rows that hit it are marked not converged.
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub g_correction: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub floor: f64,
    /// Residual tolerance of the line-search reference solve.
    #[arg(long, default_value_t = 1e-10)]
    pub reference_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub reference_max_iters: usize,
    /// Reference cache directory (default: `.rhor-cache` beside `--out`).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Always recompute the reference.
    #[arg(long)]
    pub no_cache: bool,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// |0⟩
    Vacuum,
    /// (|0⟩ + |1⟩)/√2
    Superposition01,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "state"])))]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// True state as JSON `{"re": [[..]], "im": [[..]]}`.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Fock-space dimension for presets.
    #[arg(long, default_value_t = 15)]
    pub dim: usize,
    /// Number of samples.
    #[arg(long)]
    pub n: usize,
    /// Number of homodyne phases θ_k = kπ/K (CSV output).
    #[arg(long, default_value_t = 12)]
    pub phases: usize,
    /// POVM for count output (default: computational basis).
    #[arg(long)]
    pub povm: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `.csv` writes quadrature samples, `.json` writes counts.
    #[arg(long)]
    pub out: PathBuf,
}
