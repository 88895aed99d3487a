//! Output bundles: observable CSVs, the disorder realization and a JSON
//! metadata sidecar, all in one directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use spinring_core::observables::overlap_map_with;
use spinring_core::propagator::TrajectoryMetadata;
use spinring_core::{
    return_fidelity, revival_report, sample_disorder, Execution, FidelitySeries, OverlapMap, Propagator,
    RevivalReport, SpectralCache, Trajectory,
};

use crate::config::{ExperimentConfig, Resolved};
use crate::error::{CliError, Result};

pub const OVERLAP_CSV: &str = "overlap.csv";
pub const FIDELITY_CSV: &str = "fidelity.csv";
pub const REVIVALS_CSV: &str = "revivals.csv";
pub const DISORDER_CSV: &str = "disorder.csv";
pub const METADATA_JSON: &str = "metadata.json";

/// Observables of one run, kept in memory.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub trajectory: Trajectory,
    pub overlap: Option<OverlapMap>,
    pub fidelity: Option<FidelitySeries>,
    pub revivals: Option<RevivalReport>,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    code_version: &'static str,
    config: &'a ExperimentConfig,
    seed: u64,
    initial_input_norm: f64,
    initial_renormalized: bool,
    t_final: f64,
    n_samples: usize,
    evolution: &'a TrajectoryMetadata,
    files: Vec<&'static str>,
    started_unix_seconds: f64,
    wall_seconds: f64,
}

/// Evolves a resolved config and computes the requested observables.
pub fn compute(resolved: &Resolved, cache: Option<Arc<SpectralCache>>) -> Result<Outcome> {
    let c = &resolved.config;
    let disorder = sample_disorder(&c.disorder, c.ring.n_sites, c.disorder.seed)?;
    let mut p = Propagator::new(c.ring, disorder)?;
    if let Some(cache) = cache {
        p = p.with_cache(cache);
    }
    let trajectory = p.evolve(&resolved.initial.state, &resolved.plan)?;
    let overlap = c
        .outputs
        .overlap
        .map(|probe| overlap_map_with(&trajectory, probe, Execution::Sequential))
        .transpose()?;
    let reference = resolved.reference.as_ref().unwrap_or(&resolved.initial);
    let fidelity = (c.outputs.fidelity || c.outputs.revivals)
        .then(|| return_fidelity(&trajectory, &reference.state))
        .transpose()?;
    let revivals = match (c.outputs.revivals, &fidelity, c.schedule.period()) {
        (true, Some(series), Some(period)) => Some(revival_report(series, period)?),
        _ => None,
    };
    Ok(Outcome {
        trajectory,
        overlap,
        fidelity,
        revivals,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(CliError::output(path))
}

fn finish(dir: &Path, name: &str, written: spinring_core::Result<()>) -> Result<()> {
    written.map_err(|e| match e {
        spinring_core::Error::Io(source) => CliError::Output {
            path: dir.join(name),
            source,
        },
        other => other.into(),
    })
}

/// Runs a config and writes its bundle into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path, cache: Option<Arc<SpectralCache>>) -> Result<Outcome> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let resolved = config.resolve()?;
    fs::create_dir_all(dir).map_err(CliError::output(dir))?;
    let outcome = compute(&resolved, cache)?;

    let mut files = Vec::new();
    if let Some(map) = &outcome.overlap {
        finish(dir, OVERLAP_CSV, map.write_csv(create(dir, OVERLAP_CSV)?))?;
        files.push(OVERLAP_CSV);
    }
    if let Some(series) = &outcome.fidelity {
        if config.outputs.fidelity {
            finish(dir, FIDELITY_CSV, series.write_csv(create(dir, FIDELITY_CSV)?))?;
            files.push(FIDELITY_CSV);
        }
    }
    if let Some(report) = &outcome.revivals {
        finish(dir, REVIVALS_CSV, report.write_csv(create(dir, REVIVALS_CSV)?))?;
        files.push(REVIVALS_CSV);
    }
    let disorder = sample_disorder(&config.disorder, config.ring.n_sites, config.disorder.seed)?;
    finish(dir, DISORDER_CSV, disorder.write_csv(create(dir, DISORDER_CSV)?))?;
    files.push(DISORDER_CSV);

    let meta = Metadata {
        code_version: env!("CARGO_PKG_VERSION"),
        config,
        seed: config.disorder.seed,
        initial_input_norm: resolved.initial.input_norm,
        initial_renormalized: resolved.initial.was_renormalized(),
        t_final: resolved.plan.t_final,
        n_samples: resolved.plan.sample_times.len(),
        evolution: &outcome.trajectory.metadata,
        files,
        started_unix_seconds: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    let path = dir.join(METADATA_JSON);
    let mut w = create(dir, METADATA_JSON)?;
    serde_json::to_writer_pretty(&mut w, &meta)
        .map_err(|e| CliError::Output {
            path: path.clone(),
            source: e.into(),
        })
        .and_then(|_| w.write_all(b"\n").map_err(CliError::output(path.clone())))
        .and_then(|_| w.flush().map_err(CliError::output(path)))?;
    Ok(outcome)
}

/// Output directory: explicit flag, then `outputs.dir`, then the
/// `SPINRING_OUT` root joined with `name`, then `./spinring-out/name`.
pub fn output_dir(explicit: Option<&Path>, config: &ExperimentConfig, name: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &config.outputs.dir {
        return p.clone();
    }
    default_root().join(name)
}

pub const OUTPUT_ROOT_ENV: &str = "SPINRING_OUT";

pub fn default_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("spinring-out"))
}
