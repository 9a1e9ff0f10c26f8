use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rhor_core::{
    iterations_to_reference, reconstruct, CMatrix, Dataset, DensityMatrix, EpsilonStrategy,
    HermitianOperator, LineSearchParams, ReconstructionConfig, Termination,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::args::{config_json, SweepArgs};
use crate::error::{CliError, Status};
use crate::format::{fmt_short, MatrixJson};
use crate::io::{dataset_hash, parse_dataset, write_json};
use crate::manifest::RunManifest;

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub epsilon: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct CachedReference {
    key: String,
    dataset_sha256: String,
    iterations: usize,
    termination: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn reference_config(args: &SweepArgs) -> ReconstructionConfig {
    ReconstructionConfig {
        strategy: EpsilonStrategy::LineSearch(LineSearchParams::default()),
        tol_residual: args.reference_tol,
        tol_loglik: f64::MIN_POSITIVE,
        tol_element: f64::MIN_POSITIVE,
        max_iterations: args.reference_max_iters,
        g_correction: args.g_correction,
        floor: args.floor,
    }
}

fn cache_key(data_hash: &str, cfg: &ReconstructionConfig) -> String {
    let mut h = Sha256::new();
    h.update(data_hash.as_bytes());
    h.update(config_json(cfg).to_string().as_bytes());
    hex::encode(h.finalize())
}

fn load_cached(path: &Path, key: &str, dim: usize) -> Option<DensityMatrix> {
    let text = fs::read_to_string(path).ok()?;
    let cached: CachedReference = serde_json::from_str(&text).ok()?;
    if cached.key != key || cached.re.len() != dim {
        return None;
    }
    let m = CMatrix::from_parts(&cached.re, &cached.im).ok()?;
    DensityMatrix::new(HermitianOperator::new(m).ok()?).ok()
}

fn store_cached(
    path: &Path,
    key: &str,
    data_hash: &str,
    reference: &DensityMatrix,
    iterations: usize,
    termination: &str,
) -> Result<(), CliError> {
    let m = reference.matrix();
    let part = |f: fn(&rhor_core::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    let cached = CachedReference {
        key: key.to_string(),
        dataset_sha256: data_hash.to_string(),
        iterations,
        termination: termination.to_string(),
        re: part(|c| c.re),
        im: part(|c| c.im),
    };
    write_json(path, &cached)
}

/// High-accuracy reference, from the cache when available.
fn reference(
    args: &SweepArgs,
    data: &Dataset,
) -> Result<(DensityMatrix, serde_json::Value), CliError> {
    let cfg = reference_config(args);
    let data_hash = dataset_hash(data);
    let key = cache_key(&data_hash, &cfg);
    let cache_dir = args.cache_dir.clone().unwrap_or_else(|| {
        args.out
            .parent()
            .unwrap_or(Path::new(""))
            .join(".rhor-cache")
    });
    let cache_file: PathBuf = cache_dir.join(format!("{key}.json"));

    if !args.no_cache {
        if let Some(rho) = load_cached(&cache_file, &key, data.dim()) {
            let info =
                json!({ "source": "cache", "file": cache_file, "dataset_sha256": data_hash });
            return Ok((rho, info));
        }
    }
    let result = reconstruct(data, &cfg)?;
    // a stall means no ε raises the likelihood beyond roundoff: the
    // "no longer changes" stopping point for a reference
    let settled =
        result.termination.is_converged() || result.termination == Termination::LikelihoodStalled;
    if !settled {
        return Err(CliError::NotConverged(format!(
            "reference solve stopped with {} after {} iterations (residual {:e})",
            result.termination.as_str(),
            result.iterations,
            result.residual
        )));
    }
    if !args.no_cache {
        store_cached(
            &cache_file,
            &key,
            &data_hash,
            &result.estimate,
            result.iterations,
            result.termination.as_str(),
        )?;
    }
    let info = json!({
        "source": "computed",
        "file": (!args.no_cache).then_some(cache_file),
        "dataset_sha256": data_hash,
        "iterations": result.iterations,
        "residual": result.residual,
        "termination": result.termination.as_str(),
        "config": config_json(&cfg),
    });
    Ok((result.estimate, info))
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Iteration counts for every (ε, tolerance) pair, ordered by (tolerance, ε).
///
/// Rows run in parallel over ε; the order of the result does not depend on
/// scheduling.
pub fn sweep_rows(
    data: &Dataset,
    reference: &DensityMatrix,
    epsilons: &[f64],
    tolerances: &[f64],
    max_iters: usize,
    floor: f64,
    g_correction: bool,
) -> Result<(Vec<Row>, Vec<f64>), CliError> {
    let g = if g_correction {
        Some(data.g_operator()?)
    } else {
        None
    };
    let per_eps = epsilons
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let hits = iterations_to_reference(
                data,
                eps,
                reference,
                tolerances,
                max_iters,
                floor,
                g.as_ref(),
            )?;
            Ok((hits, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>, rhor_core::Error>>()?;

    let mut rows = Vec::with_capacity(epsilons.len() * tolerances.len());
    for (t, &tolerance) in tolerances.iter().enumerate() {
        for (&epsilon, (hits, _)) in epsilons.iter().zip(&per_eps) {
            rows.push(Row {
                epsilon,
                tolerance,
                iterations: hits[t].unwrap_or(max_iters),
                converged: hits[t].is_some(),
            });
        }
    }
    Ok((rows, per_eps.into_iter().map(|(_, s)| s).collect()))
}

fn write_rows(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let io_err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(["epsilon", "tolerance", "iterations", "converged"])
        .map_err(io_err)?;
    for r in rows {
        w.write_record([
            fmt_short(r.epsilon),
            fmt_short(r.tolerance),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run(args: &SweepArgs) -> Result<Status, CliError> {
    if let Some(bad) = args.epsilons.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(CliError::Validation(format!(
            "ε must be positive, got {bad}"
        )));
    }
    if let Some(bad) = args
        .tolerances
        .iter()
        .find(|t| !(t.is_finite() && **t > 0.0))
    {
        return Err(CliError::Validation(format!(
            "tolerances must be positive, got {bad}"
        )));
    }
    if args.tolerances.is_empty() {
        return Err(CliError::Validation("no tolerances given".into()));
    }
    reference_config(args).validate()?;

    let data = parse_dataset(&args.input, args.dim)?;
    let start = Instant::now();
    let (reference, reference_info) = reference(args, &data)?;

    let mut epsilons = args.epsilons.clone();
    epsilons.push(f64::INFINITY);
    let epsilons = sorted_unique(epsilons);
    let tolerances = sorted_unique(args.tolerances.clone());
    let (rows, per_eps_seconds) = sweep_rows(
        &data,
        &reference,
        &epsilons,
        &tolerances,
        args.max_iters,
        args.floor,
        args.g_correction,
    )?;
    write_rows(&args.out, &rows)?;

    let config = json!({
        "epsilons": epsilons.iter().map(|&e| fmt_short(e)).collect::<Vec<_>>(),
        "tolerances": tolerances,
        "max_iterations": args.max_iters,
        "g_correction": args.g_correction,
        "floor": args.floor,
        "reference": reference_info,
        "reference_estimate": MatrixJson::from(reference.matrix()),
    });
    let mut manifest = RunManifest::new("sweep", Some(&args.input), config);
    manifest.outputs.push(args.out.clone());
    manifest.timing.total_seconds = start.elapsed().as_secs_f64();
    manifest.timing.per_iteration_seconds = per_eps_seconds;
    manifest.write_beside(&args.out)?;

    let missed = rows.iter().filter(|r| !r.converged).count();
    println!(
        "{} rows written to {} ({missed} did not reach tolerance)",
        rows.len(),
        args.out.display()
    );
    Ok(Status::Success)
}
