use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use rhor_core::{
    sample_counts, sample_quadratures, Complex64, DensityMatrix, PovmElement, SimulationSpec,
    RNG_ALGORITHM,
};
use serde_json::json;

use crate::args::{Preset, SimulateArgs};
use crate::error::{CliError, Status};
use crate::io::{format_of, parse_povm, parse_state, write_dataset, write_quadratures, Format};
use crate::manifest::RunManifest;

pub fn preset_state(preset: Preset, dim: usize) -> Result<DensityMatrix, CliError> {
    let min = match preset {
        Preset::Vacuum => 1,
        Preset::Superposition01 => 2,
    };
    if dim < min {
        return Err(CliError::Validation(format!(
            "preset needs --dim of at least {min}"
        )));
    }
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    match preset {
        Preset::Vacuum => v[0] = Complex64::new(1.0, 0.0),
        Preset::Superposition01 => {
            v[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
            v[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        }
    }
    Ok(DensityMatrix::pure(&v)?)
}

fn computational_basis(dim: usize) -> Result<Vec<PovmElement>, CliError> {
    (0..dim)
        .map(|i| {
            let mut d = vec![0.0; dim];
            d[i] = 1.0;
            PovmElement::from_diagonal(&d).map_err(CliError::from)
        })
        .collect()
}

/// Homodyne phases `θ_k = kπ/K`, `k = 0..K`.
pub fn phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * PI / count as f64).collect()
}

pub fn run(args: &SimulateArgs) -> Result<Status, CliError> {
    let format = format_of(&args.out)?;
    if args.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let state = match (&args.preset, &args.state) {
        (Some(p), _) => preset_state(*p, args.dim)?,
        (None, Some(path)) => parse_state(path)?,
        (None, None) => unreachable!("clap enforces a state source"),
    };
    let spec = SimulationSpec::new(state, args.seed, args.n)?;

    let start = Instant::now();
    let mut config = json!({
        "preset": args.preset.map(|p| format!("{p:?}").to_lowercase()),
        "state": args.state,
        "dim": spec.true_state.dim(),
        "n": args.n,
    });
    match format {
        Format::Csv => {
            let phases = phases(args.phases);
            let samples = sample_quadratures(&spec, &phases, spec.true_state.dim())?;
            write_quadratures(&args.out, &samples)?;
            config["phases"] = json!(args.phases);
        }
        Format::Json => {
            let povm = match &args.povm {
                Some(path) => parse_povm(path)?,
                None => computational_basis(spec.true_state.dim())?,
            };
            let data = sample_counts(&spec, &povm)?;
            write_dataset(&args.out, &data)?;
            config["povm"] = json!(args
                .povm
                .as_ref()
                .map_or("computational".into(), |p| p.display().to_string()));
        }
    }

    let mut manifest = RunManifest::new("simulate", args.state.as_deref(), config);
    manifest.outputs.push(args.out.clone());
    manifest.seed = Some(args.seed);
    manifest.rng = Some(RNG_ALGORITHM);
    manifest.timing.total_seconds = start.elapsed().as_secs_f64();
    manifest.write_beside(&args.out)?;
    println!("{} samples written to {}", args.n, args.out.display());
    Ok(Status::Success)
}
