//! Static imperfections: coupling offsets ηᵢ on bond (i, i+1) and local
//! field offsets δᵢ on site i.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::CounterRng;

const ETA_STREAM: u64 = 0;
const DELTA_STREAM: u64 = 1;

/// Zero-mean distribution of a per-site imperfection, widths in units of λ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    #[default]
    None,
    Gaussian { sigma: f64 },
    Uniform { halfwidth: f64 },
}

impl Distribution {
    fn width(&self) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Gaussian { sigma } => sigma,
            Distribution::Uniform { halfwidth } => halfwidth,
        }
    }
}

/// How a Gaussian width parameter is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// The parameter is the standard deviation.
    #[default]
    StdDev,
    /// The parameter is the half width at half maximum, σ = w / √(2 ln 2).
    Hwhm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    #[serde(default)]
    pub eta: Distribution,
    #[serde(default)]
    pub delta: Distribution,
    #[serde(default)]
    pub width_convention: WidthConvention,
    #[serde(default)]
    pub seed: u64,
}

impl DisorderSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("eta", &self.eta), ("delta", &self.delta)] {
            let w = d.width();
            if !(w.is_finite() && w >= 0.0) {
                return Err(domain(format!(
                    "{name} distribution width must be finite and >= 0, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.eta.width() == 0.0 && self.delta.width() == 0.0
    }
}

/// One sampled set of imperfections for an N-site ring.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    eta: Vec<f64>,
    delta: Vec<f64>,
    spec: DisorderSpec,
    seed_used: u64,
}

impl DisorderRealization {
    pub fn clean(n_sites: usize) -> Self {
        Self {
            eta: vec![0.0; n_sites],
            delta: vec![0.0; n_sites],
            spec: DisorderSpec::clean(),
            seed_used: 0,
        }
    }

    /// Wraps explicit vectors, e.g. a realization read back from CSV.
    pub fn from_vectors(eta: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        if eta.len() != delta.len() {
            return Err(domain(format!(
                "eta has {} entries but delta has {}",
                eta.len(),
                delta.len()
            )));
        }
        if eta.iter().chain(&delta).any(|x| !x.is_finite()) {
            return Err(domain("disorder entries must be finite"));
        }
        Ok(Self {
            eta,
            delta,
            spec: DisorderSpec::clean(),
            seed_used: 0,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.eta.len()
    }

    /// Coupling offsets; `eta()[i]` belongs to the bond between i and i+1.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn spec(&self) -> &DisorderSpec {
        &self.spec
    }

    pub fn seed_used(&self) -> u64 {
        self.seed_used
    }

    /// Writes `site,eta,delta` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "site,eta,delta")?;
        for (i, (e, d)) in self.eta.iter().zip(&self.delta).enumerate() {
            writeln!(w, "{i},{e:.16e},{d:.16e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("site,eta,delta") {
            return Err(Error::Parse("disorder CSV must start with header site,eta,delta".into()));
        }
        let (mut eta, mut delta) = (Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("disorder CSV line {}: {line:?}", lineno + 2));
            let mut cols = line.split(',');
            let site: usize = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(bad)?;
            let e: f64 = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(bad)?;
            let d: f64 = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(bad)?;
            if site != eta.len() || cols.next().is_some() {
                return Err(bad());
            }
            eta.push(e);
            delta.push(d);
        }
        Self::from_vectors(eta, delta)
    }
}

fn draw(dist: Distribution, convention: WidthConvention, rng: &CounterRng, n: usize) -> Vec<f64> {
    match dist {
        Distribution::None => vec![0.0; n],
        Distribution::Gaussian { sigma } => {
            let sigma = match convention {
                WidthConvention::StdDev => sigma,
                WidthConvention::Hwhm => sigma / (2.0 * std::f64::consts::LN_2).sqrt(),
            };
            (0..n as u64).map(|i| sigma * rng.normal_at(i)).collect()
        }
        Distribution::Uniform { halfwidth } => (0..n as u64)
            .map(|i| halfwidth * (2.0 * rng.unit_at(i) - 1.0))
            .collect(),
    }
}

/// Samples ηᵢ and δᵢ for an N-site ring. Output depends only on
/// `(spec, n_sites, seed)`; `spec.seed` is ignored in favour of `seed`.
pub fn sample_disorder(spec: &DisorderSpec, n_sites: usize, seed: u64) -> Result<DisorderRealization> {
    if n_sites < 3 {
        return Err(domain(format!("disorder needs a ring of >= 3 sites, got {n_sites}")));
    }
    spec.validate()?;
    let eta = draw(spec.eta, spec.width_convention, &CounterRng::new(seed, ETA_STREAM), n_sites);
    let delta = draw(
        spec.delta,
        spec.width_convention,
        &CounterRng::new(seed, DELTA_STREAM),
        n_sites,
    );
    Ok(DisorderRealization {
        eta,
        delta,
        spec: DisorderSpec { seed, ..*spec },
        seed_used: seed,
    })
}
