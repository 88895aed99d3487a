//! Control laws θ(t) for the global hopping phase.
//!
//! The step law holds θ₀ on [0, T/2) and θ₀ + π on [T/2, T), repeated with
//! period T. Its Fourier series is
//!
//! ```text
//! θ(t) = θ₀ + π/2 − 2 Σ_{n odd} sin(2πnt/T) / n
//! ```
//!
//! and the truncated variant keeps a finite number of those terms.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// How the harmonic count of a truncated schedule is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicCounting {
    /// `m` harmonics are the first m non-vanishing terms n = 1, 3, ..., 2m−1.
    #[default]
    OddTerms,
    /// `m` harmonics are all n ≤ m; the even ones vanish.
    IndexBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseSchedule {
    Constant {
        theta0: f64,
    },
    #[serde(rename = "step")]
    StepPeriodic {
        theta0: f64,
        period: f64,
    },
    #[serde(rename = "fourier")]
    FourierTruncated {
        theta0: f64,
        period: f64,
        harmonics: usize,
        #[serde(default)]
        counting: HarmonicCounting,
    },
}

impl PhaseSchedule {
    pub fn constant(theta0: f64) -> Self {
        Self::Constant { theta0 }
    }

    pub fn step(theta0: f64, period: f64) -> Self {
        Self::StepPeriodic { theta0, period }
    }

    pub fn fourier(theta0: f64, period: f64, harmonics: usize) -> Self {
        Self::FourierTruncated {
            theta0,
            period,
            harmonics,
            counting: HarmonicCounting::OddTerms,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let theta0 = self.theta0();
        if !theta0.is_finite() {
            return Err(domain(format!("theta0 must be finite, got {theta0}")));
        }
        if let Some(period) = self.period() {
            if !(period.is_finite() && period > 0.0) {
                return Err(domain(format!("period must be positive, got {period}")));
            }
        }
        if let Self::FourierTruncated { harmonics, .. } = self {
            if *harmonics == 0 {
                return Err(domain("a Fourier schedule needs at least one harmonic"));
            }
        }
        Ok(())
    }

    pub fn theta0(&self) -> f64 {
        match *self {
            Self::Constant { theta0 }
            | Self::StepPeriodic { theta0, .. }
            | Self::FourierTruncated { theta0, .. } => theta0,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            Self::Constant { .. } => None,
            Self::StepPeriodic { period, .. } | Self::FourierTruncated { period, .. } => Some(period),
        }
    }

    /// True when every pair of phases differs by a multiple of π, so the
    /// Hamiltonians at all times commute.
    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self, Self::FourierTruncated { .. })
    }

    pub fn with_theta0(mut self, value: f64) -> Self {
        match &mut self {
            Self::Constant { theta0 }
            | Self::StepPeriodic { theta0, .. }
            | Self::FourierTruncated { theta0, .. } => *theta0 = value,
        }
        self
    }

    /// Odd frequencies n kept by a truncated schedule.
    pub fn fourier_terms(&self) -> Vec<usize> {
        match *self {
            Self::FourierTruncated {
                harmonics, counting, ..
            } => match counting {
                HarmonicCounting::OddTerms => (1..=harmonics).map(|j| 2 * j - 1).collect(),
                HarmonicCounting::IndexBound => (1..=harmonics).step_by(2).collect(),
            },
            _ => Vec::new(),
        }
    }

    /// Highest frequency present, in units of 2π/T.
    pub fn max_frequency(&self) -> usize {
        self.fourier_terms().last().copied().unwrap_or(0)
    }

    /// θ(t). Values are not reduced mod 2π.
    pub fn phase_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("phase requested at negative time t={t}")));
        }
        Ok(match *self {
            Self::Constant { theta0 } => theta0,
            Self::StepPeriodic { theta0, period } => {
                if t.rem_euclid(period) >= 0.5 * period {
                    theta0 + PI
                } else {
                    theta0
                }
            }
            Self::FourierTruncated { theta0, period, .. } => {
                let w = 2.0 * PI * (t / period).rem_euclid(1.0);
                // kept frequencies are 1, 3, 5, ...; step e^{inw} by e^{2iw}
                let (mut re, mut im) = (w.cos(), w.sin());
                let (rc, rs) = ((2.0 * w).cos(), (2.0 * w).sin());
                let mut series = 0.0;
                for n in (1..=self.max_frequency()).step_by(2) {
                    series += im / n as f64;
                    (re, im) = (re * rc - im * rs, re * rs + im * rc);
                }
                theta0 + FRAC_PI_2 - 2.0 * series
            }
        })
    }

    /// Times in (0, horizon] where the phase jumps.
    pub fn jump_times(&self, horizon: f64) -> Vec<f64> {
        match *self {
            Self::StepPeriodic { period, .. } => {
                let half = 0.5 * period;
                (1..)
                    .map(|k| k as f64 * half)
                    .take_while(|&t| t <= horizon)
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}
