//! Figure presets. Each figure is one or more labelled configs.
//!
//! Choices the figures leave open: N = 201 for figs 1-5 (odd, site 0 in
//! the middle, wavefront does not wrap before λt = 20), window λt ∈ [0, 20]
//! for figs 1-5 and 50 periods for figs 6-8, constant phase π/2 for the
//! unmodulated figures.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use spinring_core::{Complex64, DisorderSpec, PhaseSchedule, ProbeFamily, RingSpec, StateSpec, StateTerm};

use crate::config::{ExperimentConfig, OutputConfig, PlanConfig};
use crate::error::CliError;

pub const LARGE_RING: usize = 201;
pub const FIG6_RING: usize = 90;
pub const FIELD: f64 = 100.0;
pub const PERIOD: f64 = 2.0 * PI;
pub const WINDOW: f64 = 20.0;
pub const PERIODS: usize = 50;
pub const FIG7_HARMONICS: [usize; 5] = [5, 13, 25, 50, 100];
pub const FIG8_HARMONICS: [usize; 3] = [5, 25, 100];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown figure {s:?}; expected fig1..fig8")))
    }
}

/// |Ψ₀⟩.
pub fn psi0() -> StateSpec {
    StateSpec::localized(0)
}

/// (|Ψ₁⟩ + |Ψ₋₁⟩)/√2.
pub fn symmetric_pair() -> StateSpec {
    StateSpec::new(vec![StateTerm::new(1.0, &[1]), StateTerm::new(1.0, &[-1])])
}

/// (|Ψ₁⟩ + |Ψ₀⟩)/√2.
pub fn neighbour_pair() -> StateSpec {
    StateSpec::new(vec![StateTerm::new(1.0, &[1]), StateTerm::new(1.0, &[0])])
}

/// −(√2/3)|Ψ₂₀⟩ + (1/3)|Ψ₇₂⟩ + √(2/3)|Ψ⁽²⁾₀,₅⟩.
pub fn mixed_sector_state() -> StateSpec {
    StateSpec::new(vec![
        StateTerm::new(Complex64::new(-(2.0f64).sqrt() / 3.0, 0.0), &[20]),
        StateTerm::new(Complex64::new(1.0 / 3.0, 0.0), &[72]),
        StateTerm::new(Complex64::new((2.0f64 / 3.0).sqrt(), 0.0), &[0, 5]),
    ])
}

fn large_ring() -> RingSpec {
    RingSpec::new(LARGE_RING, FIELD, 1.0).expect("valid ring")
}

fn overlap_map(schedule: PhaseSchedule, initial: StateSpec) -> ExperimentConfig {
    ExperimentConfig {
        ring: large_ring(),
        disorder: DisorderSpec::default(),
        schedule,
        initial,
        plan: PlanConfig::window(WINDOW),
        outputs: OutputConfig {
            overlap: Some(ProbeFamily::SiteBasis),
            fidelity: true,
            ..OutputConfig::default()
        },
    }
}

fn revival_run(ring: RingSpec, schedule: PhaseSchedule, initial: StateSpec) -> ExperimentConfig {
    ExperimentConfig {
        ring,
        disorder: DisorderSpec::default(),
        schedule,
        initial,
        plan: PlanConfig::periods(PERIODS),
        outputs: OutputConfig {
            fidelity: true,
            revivals: true,
            ..OutputConfig::default()
        },
    }
}

/// Labelled configs behind a figure, in legend order.
pub fn preset(figure: Figure) -> Vec<(String, ExperimentConfig)> {
    let unmodulated = PhaseSchedule::constant(FRAC_PI_2);
    let step = PhaseSchedule::step(FRAC_PI_2, PERIOD);
    let one = |c: ExperimentConfig| vec![("main".to_string(), c)];
    match figure {
        Figure::Fig1 => one(overlap_map(unmodulated, psi0())),
        Figure::Fig2 => one(overlap_map(unmodulated, symmetric_pair())),
        Figure::Fig3 => vec![
            ("psi0".into(), overlap_map(unmodulated, psi0())),
            ("superposition".into(), overlap_map(unmodulated, symmetric_pair())),
        ],
        Figure::Fig4 => one(overlap_map(step, psi0())),
        Figure::Fig5 => vec![
            // θ alternates between −π/2 and π/2
            ("a".into(), overlap_map(PhaseSchedule::step(-FRAC_PI_2, PERIOD), symmetric_pair())),
            // θ alternates between 0 and π
            ("b".into(), overlap_map(PhaseSchedule::step(0.0, PERIOD), symmetric_pair())),
        ],
        Figure::Fig6 => [("a", 2.0), ("b", 1.9)]
            .into_iter()
            .map(|(label, b)| {
                let ring = RingSpec::new(FIG6_RING, b, 1.0).expect("valid ring");
                (label.to_string(), revival_run(ring, step, mixed_sector_state()))
            })
            .collect(),
        Figure::Fig7 => FIG7_HARMONICS
            .iter()
            .map(|&m| {
                let schedule = PhaseSchedule::fourier(FRAC_PI_2, PERIOD, m);
                (format!("m{m}"), revival_run(large_ring(), schedule, psi0()))
            })
            .collect(),
        Figure::Fig8 => FIG8_HARMONICS
            .iter()
            .flat_map(|&m| {
                let schedule = PhaseSchedule::fourier(FRAC_PI_2, PERIOD, m);
                [
                    (format!("m{m}_psi0"), revival_run(large_ring(), schedule, psi0())),
                    (format!("m{m}_superposition"), revival_run(large_ring(), schedule, neighbour_pair())),
                ]
            })
            .collect(),
    }
}
