use std::time::Instant;

use rhor_core::{reconstruct_with, IterationEvent, ReconstructionResult, RNG_ALGORITHM};
use serde::Serialize;

use crate::args::{config_json, ReconstructArgs, StrategyName};
use crate::error::{CliError, Status};
use crate::format::{nums, MatrixJson, Num};
use crate::io::{parse_dataset, write_json};
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct ResultFile {
    dim: usize,
    strategy: &'static str,
    termination: &'static str,
    converged: bool,
    iterations: usize,
    residual: Num,
    estimate: MatrixJson,
    /// Includes the starting state, so one longer than `epsilon`.
    log_likelihood: Vec<Num>,
    /// `null` marks plain RρR steps.
    epsilon: Vec<Num>,
    stall: Option<StallJson>,
}

#[derive(Serialize)]
struct StallJson {
    iteration: usize,
    attempts: u32,
    last_epsilon: Num,
    best_change: Num,
}

impl From<&ReconstructionResult> for ResultFile {
    fn from(r: &ReconstructionResult) -> Self {
        ResultFile {
            dim: r.estimate.dim(),
            strategy: "",
            termination: r.termination.as_str(),
            converged: r.termination.is_converged(),
            iterations: r.iterations,
            residual: Num(r.residual),
            estimate: MatrixJson::from(r.estimate.matrix()),
            log_likelihood: nums(&r.log_likelihood),
            epsilon: nums(&r.epsilon),
            stall: r.stall.as_ref().map(|s| StallJson {
                iteration: s.iteration,
                attempts: s.attempts,
                last_epsilon: Num(s.last_epsilon),
                best_change: Num(s.best_change),
            }),
        }
    }
}

pub fn run(args: &ReconstructArgs) -> Result<Status, CliError> {
    let cfg = args.engine.config()?;
    let data = parse_dataset(&args.input, args.dim)?;

    let start = Instant::now();
    let mut last = start;
    let mut per_iteration = Vec::new();
    let mut observer = |_: &IterationEvent| {
        let now = Instant::now();
        per_iteration.push((now - last).as_secs_f64());
        last = now;
    };
    let result = reconstruct_with(&data, &cfg, &mut observer)?;
    let total = start.elapsed().as_secs_f64();

    let file = ResultFile {
        strategy: cfg.strategy.name(),
        ..ResultFile::from(&result)
    };
    write_json(&args.out, &file)?;

    let mut manifest = RunManifest::new("reconstruct", Some(&args.input), config_json(&cfg));
    manifest.outputs.push(args.out.clone());
    if args.engine.strategy == StrategyName::Random {
        manifest.seed = Some(args.engine.seed);
        manifest.rng = Some(RNG_ALGORITHM);
    }
    manifest.timing.total_seconds = total;
    manifest.timing.per_iteration_seconds = per_iteration;
    manifest.write_beside(&args.out)?;

    println!(
        "{} after {} iterations (residual {:.3e}, log-likelihood {:.10e})",
        result.termination.as_str(),
        result.iterations,
        result.residual,
        result.log_likelihood.last().copied().unwrap_or(f64::NAN),
    );
    Ok(if result.termination.is_converged() {
        Status::Success
    } else {
        Status::NotConverged
    })
}
