//! Overlap maps, return fidelities and revival summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::MultiSectorState;
use crate::error::{domain, Result};
use crate::parallel::{self, Execution};
use crate::propagator::Trajectory;

/// Reference states indexed by a site offset d.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    /// The one-magnon state localized at site d.
    #[default]
    SiteBasis,
    /// The initial state translated around the ring by d.
    TranslatedInitial,
}

/// F_d(t) on a time × offset grid. `values[k][j]` belongs to `times[k]`
/// and `sites[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMap {
    pub times: Vec<f64>,
    pub sites: Vec<i64>,
    pub values: Vec<Vec<f64>>,
    pub probe: ProbeFamily,
}

impl OverlapMap {
    /// The largest entry.
    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// The column for offset `d`, if present.
    pub fn column(&self, d: i64) -> Option<Vec<f64>> {
        let j = self.sites.iter().position(|&s| s == d)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    /// Long format `t,d,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,d,value")?;
        for (t, row) in self.times.iter().zip(&self.values) {
            for (d, v) in self.sites.iter().zip(row) {
                writeln!(w, "{t:.16e},{d},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// |⟨reference|ψ(t)⟩|² over a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub probe: String,
}

impl FidelitySeries {
    /// Plain average over the samples.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Trapezoidal time average over the sampled window.
    pub fn time_average(&self) -> f64 {
        let span = match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) if b > a => b - a,
            _ => return self.mean(),
        };
        let area: f64 = self
            .times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum();
        area / span
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevivalEntry {
    pub m: usize,
    pub t: f64,
    pub fidelity: f64,
}

/// Fidelities at t = mT, m ≥ 1, with summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevivalReport {
    pub period: f64,
    pub entries: Vec<RevivalEntry>,
    pub min: f64,
    pub max: f64,
    /// Least-squares slope of fidelity against m.
    pub slope: f64,
}

impl RevivalReport {
    pub fn fidelities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.fidelity).collect()
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|e| e.fidelity).sum::<f64>() / self.entries.len() as f64
    }

    /// Largest fidelity over revivals with m in `lo..=hi`.
    pub fn max_over(&self, lo: usize, hi: usize) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| (lo..=hi).contains(&e.m))
            .map(|e| e.fidelity)
            .reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "m,t,fidelity")?;
        for e in &self.entries {
            writeln!(w, "{},{:.16e},{:.16e}", e.m, e.t, e.fidelity)?;
        }
        Ok(())
    }
}

/// Offsets −⌊N/2⌋ ..= ⌈N/2⌉ − 1.
pub fn centered_offsets(n_sites: usize) -> Vec<i64> {
    let lo = -((n_sites / 2) as i64);
    (0..n_sites as i64).map(|k| lo + k).collect()
}

/// F_d(t) for every snapshot and every offset.
pub fn overlap_map(traj: &Trajectory, probe: ProbeFamily) -> Result<OverlapMap> {
    overlap_map_with(traj, probe, Execution::default())
}

pub fn overlap_map_with(traj: &Trajectory, probe: ProbeFamily, exec: Execution) -> Result<OverlapMap> {
    let n_sites = traj.initial.n_sites();
    let sites = centered_offsets(n_sites);
    let values = match probe {
        ProbeFamily::SiteBasis => {
            if traj.initial.sector(1).is_none() {
                return Err(domain(
                    "site-basis overlaps need a one-magnon component; use the translated-initial probe",
                ));
            }
            parallel::map(exec, &traj.states, |state| {
                sites
                    .iter()
                    .map(|&d| {
                        let site = d.rem_euclid(n_sites as i64) as usize;
                        state.amplitude(&[site]).norm_sqr()
                    })
                    .collect()
            })
        }
        ProbeFamily::TranslatedInitial => {
            let probes: Vec<MultiSectorState> = sites.iter().map(|&d| traj.initial.translated(d)).collect();
            let rows = parallel::map(exec, &traj.states, |state| {
                probes
                    .iter()
                    .map(|p| p.inner(state).map(|z| z.norm_sqr()))
                    .collect::<Result<Vec<f64>>>()
            });
            rows.into_iter().collect::<Result<Vec<_>>>()?
        }
    };
    Ok(OverlapMap {
        times: traj.times.clone(),
        sites,
        values,
        probe,
    })
}

/// |⟨reference|ψ(t)⟩|² for every snapshot.
pub fn return_fidelity(traj: &Trajectory, reference: &MultiSectorState) -> Result<FidelitySeries> {
    if reference.n_sites() != traj.initial.n_sites() {
        return Err(domain(format!(
            "reference has {} sites but trajectory has {}",
            reference.n_sites(),
            traj.initial.n_sites()
        )));
    }
    let values = traj
        .states
        .iter()
        .map(|s| reference.inner(s).map(|z| z.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelitySeries {
        times: traj.times.clone(),
        values,
        probe: describe(reference),
    })
}

fn describe(state: &MultiSectorState) -> String {
    let sectors: Vec<String> = state.populated_sectors().iter().map(|n| n.to_string()).collect();
    format!("reference state in sectors n={{{}}}", sectors.join(","))
}

/// Picks the sample nearest each t = mT, m = 1, 2, ..., up to the last
/// sample. Every mT must have a sample within T/10⁴.
pub fn revival_report(series: &FidelitySeries, period: f64) -> Result<RevivalReport> {
    if !(period.is_finite() && period > 0.0) {
        return Err(domain(format!("period must be > 0, got {period}")));
    }
    let last = series.times.last().copied().unwrap_or(0.0);
    let tol = period * 1e-4;
    let count = ((last + tol) / period).floor() as usize;
    let mut entries = Vec::with_capacity(count);
    for m in 1..=count {
        let target = m as f64 * period;
        let k = nearest(&series.times, target);
        let t = series.times[k];
        if (t - target).abs() > tol {
            return Err(domain(format!(
                "no sample within T/1e4 of t={target} (nearest is {t}); sample the revival times densely"
            )));
        }
        entries.push(RevivalEntry {
            m,
            t,
            fidelity: series.values[k],
        });
    }
    if entries.is_empty() {
        return Err(domain("series does not reach the first revival time"));
    }
    let f: Vec<f64> = entries.iter().map(|e| e.fidelity).collect();
    Ok(RevivalReport {
        period,
        min: f.iter().copied().fold(f64::INFINITY, f64::min),
        max: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        slope: slope(&entries),
        entries,
    })
}

fn nearest(times: &[f64], target: f64) -> usize {
    let k = times.partition_point(|&t| t < target);
    match k {
        0 => 0,
        k if k == times.len() => k - 1,
        k if (times[k] - target).abs() < (target - times[k - 1]).abs() => k,
        k => k - 1,
    }
}

fn slope(entries: &[RevivalEntry]) -> f64 {
    let n = entries.len() as f64;
    if entries.len() < 2 {
        return 0.0;
    }
    let mx = entries.iter().map(|e| e.m as f64).sum::<f64>() / n;
    let my = entries.iter().map(|e| e.fidelity).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for e in entries {
        let dx = e.m as f64 - mx;
        sxy += dx * (e.fidelity - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{realize_state, RingSpec, StateSpec, StateTerm};
    use crate::disorder::DisorderRealization;
    use crate::propagator::{EvolutionPlan, Propagator};
    use crate::schedule::PhaseSchedule;

    fn series(times: Vec<f64>, values: Vec<f64>) -> FidelitySeries {
        FidelitySeries {
            times,
            values,
            probe: "test".into(),
        }
    }

    #[test]
    fn offsets_are_centered() {
        assert_eq!(centered_offsets(5), vec![-2, -1, 0, 1, 2]);
        assert_eq!(centered_offsets(6), vec![-3, -2, -1, 0, 1, 2]);
    }

    #[test]
    fn constant_series_report() {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let r = revival_report(&series(times.clone(), vec![0.3; 41]), 2.0).unwrap();
        assert_eq!(r.entries.len(), 5);
        assert!(r.entries.iter().all(|e| e.fidelity == 0.3));
        assert!(r.slope.abs() < 1e-15);
        assert_eq!((r.min, r.max), (0.3, 0.3));
    }

    #[test]
    fn report_requires_dense_samples() {
        let times = vec![0.0, 0.9, 2.1];
        assert!(revival_report(&series(times, vec![1.0; 3]), 1.0).is_err());
        assert!(revival_report(&series(vec![0.0, 1.0], vec![1.0; 2]), -1.0).is_err());
    }

    #[test]
    fn report_slope_and_csv() {
        let times: Vec<f64> = (0..=4).map(f64::from).collect();
        let r = revival_report(&series(times, vec![1.0, 0.9, 0.8, 0.7, 0.6]), 1.0).unwrap();
        assert!((r.slope + 0.1).abs() < 1e-12);
        assert_eq!(r.max_over(2, 3), Some(0.8));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("m,t,fidelity\n1,1.0000000000000000e0,"));
    }

    #[test]
    fn time_average_of_linear_series() {
        let s = series(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 3.0]);
        assert!((s.time_average() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn maps_at_time_zero() {
        let n = 9;
        let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
        let p = Propagator::new(RingSpec::new(n, 1.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
        let plan = EvolutionPlan::uniform(PhaseSchedule::constant(0.0), 3.0, 7).unwrap();
        let traj = p.evolve(&init, &plan).unwrap();
        let m = overlap_map(&traj, ProbeFamily::SiteBasis).unwrap();
        assert_eq!(m.column(0).unwrap()[0], 1.0);
        assert!(m.values[0].iter().filter(|&&v| v != 0.0).count() == 1);
        for row in &m.values {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let translated = overlap_map(&traj, ProbeFamily::TranslatedInitial).unwrap();
        let ret = return_fidelity(&traj, &init).unwrap();
        assert_eq!(translated.column(0).unwrap(), ret.values);
        assert_eq!(ret.values[0], 1.0);
    }

    #[test]
    fn site_probe_needs_one_magnon_sector() {
        let n = 6;
        let init = realize_state(&StateSpec::new(vec![StateTerm::new(1.0, &[0, 1])]), n).unwrap().state;
        let p = Propagator::new(RingSpec::new(n, 1.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
        let plan = EvolutionPlan::uniform(PhaseSchedule::constant(0.0), 1.0, 3).unwrap();
        let traj = p.evolve(&init, &plan).unwrap();
        assert!(overlap_map(&traj, ProbeFamily::SiteBasis).is_err());
        assert!(overlap_map(&traj, ProbeFamily::TranslatedInitial).is_ok());
        let other = realize_state(&StateSpec::localized(0), 7).unwrap().state;
        assert!(return_fidelity(&traj, &other).is_err());
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        series(vec![0.5], vec![0.25]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n5.0000000000000000e-1,2.5000000000000000e-1\n");
    }
}
