//! Experiment configuration: one JSON document, overridable key by key.
//!
//! ```json
//! {
//!   "ring":     { "n_sites": 201, "b_field": 100.0, "coupling": 1.0 },
//!   "disorder": { "eta": { "kind": "gaussian", "sigma": 0.2 }, "seed": 7 },
//!   "schedule": { "type": "step", "theta0": 1.5707963267948966, "period": 6.283185307179586 },
//!   "initial":  [ { "coeff": [1.0, 0.0], "sites": [0] } ],
//!   "plan":     { "t_final": 20.0, "samples": 600 },
//!   "outputs":  { "overlap": "site_basis", "fidelity": true, "revivals": true }
//! }
//! ```
//!
//! `--set plan.samples=200` replaces one leaf; the value is read as JSON when
//! it parses and as a string otherwise.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use spinring_core::{
    realize_state, DisorderSpec, EvolutionPlan, PhaseSchedule, ProbeFamily, RealizedState, RingSpec, StateSpec,
};

use crate::error::{CliError, Result};

pub const DEFAULT_SAMPLES: usize = 600;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ring: RingSpec,
    #[serde(default)]
    pub disorder: DisorderSpec,
    pub schedule: PhaseSchedule,
    pub initial: StateSpec,
    pub plan: PlanConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// Sampling window. Exactly one of `t_final` and `periods` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_step: Option<f64>,
    /// Add every t = mT to the grid.
    #[serde(default = "yes")]
    pub revival_times: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Emit `overlap.csv` with this probe family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<ProbeFamily>,
    /// Emit `fidelity.csv` against the initial state (or `reference`).
    #[serde(default)]
    pub fidelity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<StateSpec>,
    /// Emit `revivals.csv` (needs a periodic schedule).
    #[serde(default)]
    pub revivals: bool,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn yes() -> bool {
    true
}

impl PlanConfig {
    pub fn window(t_final: f64) -> Self {
        Self {
            t_final: Some(t_final),
            periods: None,
            samples: DEFAULT_SAMPLES,
            integrator_step: None,
            revival_times: true,
        }
    }

    pub fn periods(periods: usize) -> Self {
        Self {
            t_final: None,
            periods: Some(periods),
            ..Self::window(0.0)
        }
    }
}

/// A config that passed every check, with its derived objects.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub initial: RealizedState,
    pub reference: Option<RealizedState>,
    pub plan: EvolutionPlan,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads `path` and applies `k=v` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut value = serde_json::to_value(self).expect("config serializes");
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn t_final(&self) -> Result<f64> {
        match (self.plan.t_final, self.plan.periods) {
            (Some(t), None) => Ok(t),
            (None, Some(m)) => {
                let period = self.schedule.period().ok_or_else(|| {
                    CliError::Config("plan.periods needs a periodic schedule; set plan.t_final".into())
                })?;
                Ok(m as f64 * period)
            }
            (Some(_), Some(_)) => Err(CliError::Config("set only one of plan.t_final and plan.periods".into())),
            (None, None) => Err(CliError::Config("plan needs t_final or periods".into())),
        }
    }

    /// Checks everything and builds the evolution plan.
    pub fn resolve(&self) -> Result<Resolved> {
        fn field(name: &'static str) -> impl Fn(spinring_core::Error) -> CliError {
            move |e| CliError::Config(format!("{name}: {e}"))
        }
        self.ring.validate().map_err(field("ring"))?;
        self.disorder.validate().map_err(field("disorder"))?;
        self.schedule.validate().map_err(field("schedule"))?;
        let initial = realize_state(&self.initial, self.ring.n_sites).map_err(field("initial"))?;
        let reference = self
            .outputs
            .reference
            .as_ref()
            .map(|r| realize_state(r, self.ring.n_sites))
            .transpose()
            .map_err(field("outputs.reference"))?;
        let t_final = self.t_final()?;
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(CliError::Config(format!("plan: window must be positive, got {t_final}")));
        }
        if self.plan.samples < 2 {
            return Err(CliError::Config("plan.samples must be at least 2".into()));
        }
        if self.outputs.revivals && self.schedule.period().is_none() {
            return Err(CliError::Config("outputs.revivals needs a periodic schedule".into()));
        }
        if self.outputs.overlap == Some(ProbeFamily::SiteBasis) && initial.state.sector(1).is_none() {
            return Err(CliError::Config(
                "outputs.overlap=site_basis needs a one-magnon component in the initial state".into(),
            ));
        }
        let mut plan = EvolutionPlan::uniform(self.schedule, t_final, self.plan.samples).map_err(field("plan"))?;
        if self.plan.revival_times {
            plan = plan.with_revival_times();
        }
        if let Some(h) = self.plan.integrator_step {
            plan = plan.with_integrator_step(h);
        }
        plan.validate().map_err(field("plan"))?;
        Ok(Resolved {
            config: self.clone(),
            initial,
            reference,
            plan,
        })
    }
}

/// Sets one dotted path in a JSON tree. Missing objects along the path are
/// created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {assignment:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override {assignment:?} has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().unwrap()
            }
            _ => {
                return Err(CliError::Config(format!(
                    "override {key}: {} is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split always yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use spinring_core::{Distribution, StateTerm, WidthConvention};

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            ring: RingSpec::new(21, 2.0, 1.0).unwrap(),
            disorder: DisorderSpec::default(),
            schedule: PhaseSchedule::step(0.5, 6.0),
            initial: StateSpec::localized(0),
            plan: PlanConfig::periods(3),
            outputs: OutputConfig {
                fidelity: true,
                revivals: true,
                ..OutputConfig::default()
            },
        }
    }

    #[test]
    fn overrides_set_nested_leaves() {
        let c = sample()
            .with_overrides(&[
                "ring.b_field=1.9".into(),
                "disorder.eta={\"kind\":\"gaussian\",\"sigma\":0.2}".into(),
                "outputs.overlap=site_basis".into(),
                "plan.samples=50".into(),
            ])
            .unwrap();
        assert_eq!(c.ring.b_field, 1.9);
        assert_eq!(c.disorder.eta, Distribution::Gaussian { sigma: 0.2 });
        assert_eq!(c.outputs.overlap, Some(ProbeFamily::SiteBasis));
        assert_eq!(c.plan.samples, 50);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        for bad in ["ring.b_field", "=3", "ring.n_sites.x=3", "ring.n_sites=abc", "ring.colour=1"] {
            let err = sample().with_overrides(&[bad.into()]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn resolve_checks_consistency() {
        assert!(sample().resolve().is_ok());
        let mut c = sample();
        c.plan.t_final = Some(3.0);
        assert!(c.resolve().is_err());
        let mut c = sample();
        c.schedule = PhaseSchedule::constant(0.0);
        assert!(c.resolve().is_err());
        let mut c = sample();
        c.initial = StateSpec::new(vec![StateTerm::new(1.0, &[40])]);
        let msg = c.resolve().unwrap_err().to_string();
        assert!(msg.contains("initial"), "{msg}");
        let mut c = sample();
        c.initial = StateSpec::new(vec![StateTerm::new(1.0, &[0, 1])]);
        c.outputs.overlap = Some(ProbeFamily::SiteBasis);
        assert!(c.resolve().is_err());
    }

    #[test]
    fn periods_include_every_revival() {
        let r = sample().resolve().unwrap();
        assert_eq!(r.plan.t_final, 18.0);
        for m in 0..=3 {
            assert!(r.plan.sample_times.contains(&(6.0 * m as f64)));
        }
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            3usize..300,
            -1e3..1e3f64,
            0.0..10.0f64,
            prop_oneof![Just(1.0), 0.1..8.0f64],
            any::<u64>(),
            0.0..2.0f64,
            -10.0..10.0f64,
            0.01..100.0f64,
            1usize..200,
            prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -500i64..500), 1..4),
            prop::option::of(1e-6..1.0f64),
        )
            .prop_map(|(n, b, lam, hs, seed, sigma, th, period, harmonics, terms, h)| ExperimentConfig {
                ring: RingSpec::new(n, b, lam).unwrap().with_hop_scale(hs),
                disorder: DisorderSpec {
                    eta: Distribution::Gaussian { sigma },
                    delta: Distribution::Uniform { halfwidth: sigma / 3.0 },
                    width_convention: WidthConvention::Hwhm,
                    seed,
                },
                schedule: PhaseSchedule::fourier(th, period, harmonics),
                initial: StateSpec::new(
                    terms.into_iter().map(|(re, im, s)| StateTerm::new(spinring_core::Complex64::new(re, im), &[s])).collect(),
                ),
                plan: PlanConfig {
                    integrator_step: h,
                    ..PlanConfig::window(period * 3.3)
                },
                outputs: OutputConfig {
                    overlap: Some(ProbeFamily::TranslatedInitial),
                    ..OutputConfig::default()
                },
            })
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(c in arb_config()) {
            let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.to_json(), c.to_json());
        }
    }
}
