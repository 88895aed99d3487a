//! One-parameter sweeps over a base config.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use spinring_core::parallel;
use spinring_core::{Distribution, Execution, PhaseSchedule};

use crate::bundle::run_to_dir;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const INDEX_JSON: &str = "index.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Harmonics,
    SigmaEta,
    SigmaDelta,
    #[serde(rename = "B_over_lambda")]
    BOverLambda,
    Theta0,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Harmonics, Axis::SigmaEta, Axis::SigmaDelta, Axis::BOverLambda, Axis::Theta0];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Harmonics => "harmonics",
            Axis::SigmaEta => "sigma_eta",
            Axis::SigmaDelta => "sigma_delta",
            Axis::BOverLambda => "B_over_lambda",
            Axis::Theta0 => "theta0",
        }
    }

    /// The base config with this axis set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = base.clone();
        match self {
            Axis::Harmonics => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(CliError::Config(format!("harmonics must be a positive integer, got {value}")));
                }
                let harmonics = value as usize;
                c.schedule = match base.schedule {
                    PhaseSchedule::FourierTruncated { theta0, period, counting, .. } => {
                        PhaseSchedule::FourierTruncated { theta0, period, harmonics, counting }
                    }
                    PhaseSchedule::StepPeriodic { theta0, period } => PhaseSchedule::fourier(theta0, period, harmonics),
                    PhaseSchedule::Constant { .. } => {
                        return Err(CliError::Config("a harmonics sweep needs a step or fourier schedule".into()))
                    }
                };
            }
            Axis::SigmaEta => c.disorder.eta = rescale(base.disorder.eta, value),
            Axis::SigmaDelta => c.disorder.delta = rescale(base.disorder.delta, value),
            Axis::BOverLambda => c.ring.b_field = value * base.ring.coupling,
            Axis::Theta0 => c.schedule = base.schedule.with_theta0(value),
        }
        Ok(c)
    }
}

/// Same family with a new width; a zero width removes the term.
fn rescale(d: Distribution, width: f64) -> Distribution {
    if width == 0.0 {
        return Distribution::None;
    }
    match d {
        Distribution::Uniform { .. } => Distribution::Uniform { halfwidth: width },
        _ => Distribution::Gaussian { sigma: width },
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let valid: Vec<&str> = Axis::ALL.iter().map(|a| a.name()).collect();
            CliError::Config(format!("unknown sweep axis {s:?}; valid axes: {}", valid.join(", ")))
        })
    }
}

/// Parses `0,pi/2,1.5,-3pi/4`.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_value)
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    Ok(values)
}

fn parse_value(s: &str) -> Result<f64> {
    let bad = || CliError::Config(format!("cannot read sweep value {s:?}"));
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let lower = s.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (lower.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*');
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * std::f64::consts::PI / den)
}

#[derive(Debug, Serialize)]
pub struct IndexEntry {
    pub value: f64,
    pub dir: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct SweepIndex {
    pub axis: Axis,
    pub entries: Vec<IndexEntry>,
}

fn label(axis: Axis, value: f64) -> String {
    format!("{}={}", axis.name(), value)
}

/// Runs one bundle per value under `root` and writes `index.json`.
pub fn sweep(base: &ExperimentConfig, axis: Axis, values: &[f64], root: &Path, exec: Execution) -> Result<SweepIndex> {
    let mut configs = Vec::with_capacity(values.len());
    let mut seen = std::collections::BTreeSet::new();
    for &v in values {
        let l = label(axis, v);
        if !seen.insert(l.clone()) {
            return Err(CliError::Config(format!("sweep value {v} given twice")));
        }
        let mut c = axis.apply(base, v)?;
        c.outputs.dir = None;
        c.resolve()?;
        configs.push((v, root.join(l), c));
    }
    fs::create_dir_all(root).map_err(CliError::output(root))?;
    parallel::map(exec, &configs, |(_, dir, c)| run_to_dir(c, dir, None).map(|_| ()))
        .into_iter()
        .collect::<Result<Vec<()>>>()?;
    let index = SweepIndex {
        axis,
        entries: configs
            .into_iter()
            .map(|(value, dir, _)| IndexEntry {
                value,
                dir: dir.strip_prefix(root).map(Path::to_path_buf).unwrap_or(dir),
            })
            .collect(),
    };
    let path = root.join(INDEX_JSON);
    let text = serde_json::to_string_pretty(&index).expect("index serializes") + "\n";
    fs::write(&path, text).map_err(CliError::output(path))?;
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn values_accept_multiples_of_pi() {
        assert_eq!(parse_values("0, pi/2,1.5").unwrap(), vec![0.0, PI / 2.0, 1.5]);
        assert_eq!(parse_values("-3pi/4,2*pi,-pi").unwrap(), vec![-0.75 * PI, 2.0 * PI, -PI]);
        assert!(parse_values("").is_err());
        assert!(parse_values("x").is_err());
        assert!(parse_values("pi/zero").is_err());
    }

    #[test]
    fn unknown_axis_lists_valid_ones() {
        let msg = "colour".parse::<Axis>().unwrap_err().to_string();
        for a in Axis::ALL {
            assert!(msg.contains(a.name()));
        }
    }

    #[test]
    fn axes_edit_the_right_field() {
        let base = crate::presets::preset(crate::presets::Figure::Fig4).remove(0).1;
        let c = Axis::Harmonics.apply(&base, 13.0).unwrap();
        assert_eq!(c.schedule.max_frequency(), 25);
        assert!(Axis::Harmonics.apply(&base, 2.5).is_err());
        assert_eq!(Axis::BOverLambda.apply(&base, 1.9).unwrap().ring.b_field, 1.9);
        assert_eq!(Axis::Theta0.apply(&base, 0.0).unwrap().schedule.theta0(), 0.0);
        let c = Axis::SigmaEta.apply(&base, 0.2).unwrap();
        assert_eq!(c.disorder.eta, Distribution::Gaussian { sigma: 0.2 });
        assert_eq!(Axis::SigmaEta.apply(&c, 0.0).unwrap().disorder.eta, Distribution::None);
        let c = Axis::SigmaDelta.apply(&base, 5.0).unwrap();
        assert_eq!(c.disorder.delta, Distribution::Gaussian { sigma: 5.0 });
    }
}
