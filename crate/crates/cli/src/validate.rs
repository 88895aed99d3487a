//! Static diagnostics for a config: sector sizes, memory, and whether the
//! requested dynamics revive exactly.

use std::f64::consts::PI;
use std::fmt::Write as _;

use spinring_core::hamiltonian::DENSE_LIMIT;
use spinring_core::basis::binomial;
use spinring_core::{Distribution, PhaseSchedule};

use crate::config::{ExperimentConfig, Resolved};
use crate::error::Result;

/// Tolerance for calling a multiple of π an integer.
const COMMENSURATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SectorReport {
    pub n_magnons: usize,
    pub dim: usize,
    pub dense: bool,
    /// Bytes held while evolving this sector.
    pub bytes: usize,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub sectors: Vec<SectorReport>,
    pub lines: Vec<String>,
}

impl Report {
    pub fn total_bytes(&self) -> usize {
        self.sectors.iter().map(|s| s.bytes).sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

/// `x` as a short decimal: 4, 3.8, 0.25.
fn trim(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn human_bytes(b: usize) -> String {
    const UNITS: [&str; 4] = ["B", "KiB", "MiB", "GiB"];
    let mut v = b as f64;
    let mut unit = 0;
    while v >= 1024.0 && unit + 1 < UNITS.len() {
        v /= 1024.0;
        unit += 1;
    }
    format!("{} {}", trim((v * 10.0).round() / 10.0), UNITS[unit])
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < COMMENSURATE_TOL
}

fn distinct_phases(schedule: &PhaseSchedule) -> usize {
    match schedule {
        PhaseSchedule::Constant { .. } => 1,
        PhaseSchedule::StepPeriodic { .. } => 2,
        PhaseSchedule::FourierTruncated { .. } => 0,
    }
}

fn spread(d: &Distribution) -> bool {
    !matches!(*d, Distribution::None | Distribution::Gaussian { sigma: 0.0 } | Distribution::Uniform { halfwidth: 0.0 })
}

/// Resolves the config and describes what a run would do.
pub fn validate(config: &ExperimentConfig) -> Result<Report> {
    let Resolved { initial, plan, .. } = config.resolve()?;
    let ring = config.ring;
    let n = ring.n_sites;
    let populated = initial.state.populated_sectors();
    let phases = distinct_phases(&config.schedule);
    let c16 = std::mem::size_of::<spinring_core::Complex64>();

    let mut lines = vec![format!(
        "ring: N = {n}, B = {}, λ = {}, hop scale {}",
        trim(ring.b_field),
        trim(ring.coupling),
        trim(ring.hop_scale)
    )];
    let mut sectors = Vec::new();
    for &k in &populated {
        let dim = binomial(n, k).unwrap_or(usize::MAX);
        let dense = dim <= DENSE_LIMIT && phases > 0;
        let bytes = if dense {
            // eigenvectors per distinct phase plus one working matrix
            (phases + 1) * dim.saturating_mul(dim).saturating_mul(c16)
        } else {
            // amplitudes and a few Krylov-sized work vectors
            8 * dim * c16 + dim * k * 4
        };
        lines.push(format!(
            "sector n = {k}: dim {dim}, {}, ~{}",
            if dense { "dense spectral" } else if phases == 0 { "midpoint integrator" } else { "sparse Taylor" },
            human_bytes(bytes)
        ));
        sectors.push(SectorReport { n_magnons: k, dim, dense, bytes });
    }
    let snapshots = plan.sample_times.len() * sectors.iter().map(|s| s.dim).sum::<usize>() * c16;
    lines.push(format!(
        "{} samples to t = {}; snapshots ~{}",
        plan.sample_times.len(),
        trim(plan.t_final),
        human_bytes(snapshots)
    ));
    let report_total = sectors.iter().map(|s| s.bytes).sum::<usize>() + snapshots;
    lines.push(format!("estimated peak memory ~{}", human_bytes(report_total)));

    match config.schedule {
        PhaseSchedule::Constant { theta0 } => {
            lines.push(format!("schedule: static phase θ = {}", trim(theta0)));
        }
        PhaseSchedule::StepPeriodic { .. } => {
            lines.push("schedule: commuting family (Δθ = π)".to_string());
            if spread(&config.disorder.delta) {
                lines.push("warning: field disorder breaks the commutation of the two phases".to_string());
            }
        }
        PhaseSchedule::FourierTruncated { .. } => {
            let h = plan.integrator_step.map(Ok).unwrap_or_else(|| {
                let disorder = spinring_core::sample_disorder(&config.disorder, n, config.disorder.seed)?;
                spinring_core::Propagator::new(ring, disorder)?.default_integrator_step(&initial.state, &config.schedule)
            })?;
            lines.push(format!(
                "schedule: non-commuting, {} harmonics up to frequency {}, integrator step {h:.3e}",
                config.schedule.fourier_terms().len(),
                config.schedule.max_frequency()
            ));
        }
    }

    if let Some(period) = config.schedule.period() {
        if populated.len() < 2 {
            lines.push("single magnon sector: storage exact for any B".to_string());
        } else {
            let step = populated.windows(2).fold(0, |g, w| gcd(g, w[1] - w[0]));
            let bt = ring.b_field * period / PI;
            let exact = is_integer(step as f64 * bt);
            lines.push(format!(
                "BT = {}π: cross-sector {}",
                trim(bt),
                if exact { "storage exact" } else { "revivals approximate" }
            ));
        }
    }
    Ok(Report { sectors, lines })
}
