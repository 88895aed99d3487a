//! Time evolution under H(θ(t)).
//!
//! Piecewise-constant schedules are propagated exactly: on a segment of
//! fixed θ each sector evolves as V e^{−iΛΔt} V† ψ with the eigenpairs of
//! H(θ) restricted to that sector. A step schedule only ever needs the two
//! phases θ₀ and θ₀ + π, so each sector is diagonalized twice and the result
//! cached. Smooth schedules use the second-order midpoint exponential
//!
//! ```text
//! ψ(t + h) = exp(−i H(θ(t + h/2)) h) ψ(t)
//! ```
//!
//! with the exponential applied as a truncated Taylor series.
//!
//! The sector constant B(2n − N) never enters a decomposition; it is applied
//! as the phase e^{−iB(2n−N)t}. Decompositions therefore depend only on
//! (θ, sector, λ, hop scale, disorder) and are shared across B values.
//!
//! A snapshot requested exactly at a jump time is taken at the end of the
//! segment to the left of the jump. The state is continuous, so this only
//! fixes which Hamiltonian is used for the evolution that follows.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use faer::{ColRef, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{l2_norm, MultiSectorState, RingSpec, SectorBasis, SectorComponent, SectorState};
use crate::disorder::{sample_disorder, DisorderRealization, DisorderSpec};
use crate::error::{domain, Error, Result};
use crate::expm::{expm_action, Workspace};
use crate::hamiltonian::{build_hamiltonian, SectorHamiltonian};
use crate::parallel::{self, Execution};
use crate::schedule::PhaseSchedule;

/// Norm drift above which the integrator gives up.
const INTEGRATOR_DRIFT_LIMIT: f64 = 1e-6;
/// Default bound on ‖H − B(2n−N)‖_max · h.
const DEFAULT_STEP_NORM: f64 = 0.1;
/// Default integrator steps per period of the fastest harmonic.
const STEPS_PER_HARMONIC: f64 = 20.0;

#[derive(Debug)]
struct EigenCore {
    values: Vec<f64>,
    vectors: Mat<Complex64>,
}

/// Eigenpairs of one sector Hamiltonian at a fixed phase.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    theta: f64,
    n_magnons: usize,
    offset: f64,
    core: Arc<EigenCore>,
}

impl SpectralDecomposition {
    /// Diagonalizes a dense sector Hamiltonian.
    pub fn compute(h: &SectorHamiltonian) -> Result<Self> {
        let core = decompose(h)?;
        Ok(Self {
            theta: h.theta(),
            n_magnons: h.basis().n_magnons(),
            offset: h.offset(),
            core: Arc::new(core),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_magnons(&self) -> usize {
        self.n_magnons
    }

    pub fn dim(&self) -> usize {
        self.core.values.len()
    }

    /// Energies ε^α in nondecreasing order.
    pub fn energies(&self) -> Vec<f64> {
        self.core.values.iter().map(|v| v + self.offset).collect()
    }

    pub fn eigenvectors(&self) -> &Mat<Complex64> {
        &self.core.vectors
    }

    /// Expansion coefficients c_α = ⟨α|ψ⟩.
    pub fn coefficients(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let out = self.core.vectors.adjoint() * ColRef::from_slice(psi);
        out.iter().copied().collect()
    }

    /// Σ_α c_α e^{−iε^α dt}|α⟩.
    pub fn synthesize(&self, coeffs: &[Complex64], dt: f64) -> Vec<Complex64> {
        let global = Complex64::from_polar(1.0, -self.offset * dt);
        let rotated: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.core.values)
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * dt) * global)
            .collect();
        let out = &self.core.vectors * ColRef::from_slice(&rotated);
        out.iter().copied().collect()
    }

    /// max |VΛV† − H| relative to max |H|.
    pub fn reconstruction_error(&self, h: &SectorHamiltonian) -> f64 {
        let v = &self.core.vectors;
        let scaled = Mat::<Complex64>::from_fn(v.nrows(), v.ncols(), |i, j| {
            v[(i, j)] * (self.core.values[j] + self.offset)
        });
        let rebuilt = &scaled * v.adjoint();
        let m = h.to_dense();
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                err = err.max((rebuilt[(i, j)] - m[(i, j)]).norm());
                scale = scale.max(m[(i, j)].norm());
            }
        }
        err / scale.max(f64::MIN_POSITIVE)
    }

    /// max |V†V − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = &self.core.vectors;
        let g = v.adjoint() * v;
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

fn decompose(h: &SectorHamiltonian) -> Result<EigenCore> {
    let numeric = |message: String| Error::Numeric {
        n_magnons: h.basis().n_magnons(),
        theta: h.theta(),
        message,
    };
    if !h.is_dense() {
        return Err(numeric(format!(
            "sector dimension {} is above the dense limit; use the sparse propagator",
            h.dim()
        )));
    }
    let m = h.residual_dense();
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| numeric(format!("eigendecomposition did not converge: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(numeric("eigendecomposition produced non-finite eigenvalues".into()));
    }
    Ok(EigenCore {
        values,
        vectors: polish(evd.U().to_owned()),
    })
}

/// One Newton-Schulz step V ← V(3I − V†V)/2 toward the nearest unitary.
/// Removes the systematic part of the eigensolver's orthonormality error,
/// which otherwise accumulates as norm drift over many segments.
fn polish(v: Mat<Complex64>) -> Mat<Complex64> {
    let gram = v.adjoint() * &v;
    let correction = Mat::<Complex64>::from_fn(gram.nrows(), gram.ncols(), |i, j| {
        let id = if i == j { 1.5 } else { 0.0 };
        Complex64::new(id, 0.0) - gram[(i, j)] * 0.5
    });
    &v * &correction
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    n_sites: usize,
    n_magnons: usize,
    theta: u64,
    coupling: u64,
    hop_scale: u64,
    eta: Vec<u64>,
    delta: Vec<u64>,
}

impl CacheKey {
    fn of(h: &SectorHamiltonian) -> Self {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect();
        Self {
            n_sites: h.basis().n_sites(),
            n_magnons: h.basis().n_magnons(),
            theta: h.theta().to_bits(),
            coupling: h.ring().coupling.to_bits(),
            hop_scale: h.ring().hop_scale.to_bits(),
            eta: bits(h.disorder().eta()),
            delta: bits(h.disorder().delta()),
        }
    }
}

type Slot = Arc<Mutex<Option<Arc<EigenCore>>>>;

/// Thread-safe store of sector decompositions. Concurrent requests for the
/// same key wait for a single computation.
#[derive(Default)]
pub struct SpectralCache {
    slots: Mutex<HashMap<CacheKey, Slot>>,
    computed: AtomicUsize,
}

impl SpectralCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of eigendecompositions actually performed.
    pub fn decompositions_computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn decomposition(&self, h: &SectorHamiltonian) -> Result<SpectralDecomposition> {
        let slot = {
            let mut slots = self.slots.lock().expect("cache lock poisoned");
            Arc::clone(slots.entry(CacheKey::of(h)).or_default())
        };
        let mut guard = slot.lock().expect("cache slot poisoned");
        let core = match guard.as_ref() {
            Some(core) => Arc::clone(core),
            None => {
                let core = Arc::new(decompose(h)?);
                self.computed.fetch_add(1, Ordering::Relaxed);
                *guard = Some(Arc::clone(&core));
                core
            }
        };
        Ok(SpectralDecomposition {
            theta: h.theta(),
            n_magnons: h.basis().n_magnons(),
            offset: h.offset(),
            core,
        })
    }
}

impl std::fmt::Debug for SpectralCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralCache")
            .field("entries", &self.len())
            .field("computed", &self.decompositions_computed())
            .finish()
    }
}

/// Where and how long to evolve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub t_final: f64,
    /// Sorted snapshot times in [0, t_final].
    pub sample_times: Vec<f64>,
    /// Integrator step for smooth schedules; `None` picks a default.
    pub integrator_step: Option<f64>,
    pub schedule: PhaseSchedule,
}

impl EvolutionPlan {
    pub fn new(schedule: PhaseSchedule, t_final: f64, sample_times: Vec<f64>) -> Result<Self> {
        let plan = Self {
            t_final,
            sample_times,
            integrator_step: None,
            schedule,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// `samples` equally spaced times covering [0, t_final].
    pub fn uniform(schedule: PhaseSchedule, t_final: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(domain("a uniform plan needs at least 2 samples"));
        }
        let times = (0..samples)
            .map(|k| t_final * k as f64 / (samples - 1) as f64)
            .collect();
        Self::new(schedule, t_final, times)
    }

    /// Samples at t = 0, T, 2T, ..., periods·T of a periodic schedule.
    pub fn revivals(schedule: PhaseSchedule, periods: usize) -> Result<Self> {
        let period = schedule
            .period()
            .ok_or_else(|| domain("revival sampling needs a periodic schedule"))?;
        let times = (0..=periods).map(|m| m as f64 * period).collect();
        Self::new(schedule, periods as f64 * period, times)
    }

    /// Adds every revival time mT ≤ t_final to the sample grid.
    pub fn with_revival_times(mut self) -> Self {
        if let Some(period) = self.schedule.period() {
            let extra = (1..)
                .map(|m| m as f64 * period)
                .take_while(|&t| t <= self.t_final * (1.0 + 1e-12));
            self.sample_times.extend(extra.map(|t| t.min(self.t_final)));
            self.sample_times.sort_by(f64::total_cmp);
            self.sample_times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        self
    }

    pub fn with_integrator_step(mut self, h: f64) -> Self {
        self.integrator_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(domain(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if self.sample_times.is_empty() {
            return Err(domain("plan has no sample times"));
        }
        if self.sample_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("sample times must be strictly increasing"));
        }
        let (first, last) = (self.sample_times[0], *self.sample_times.last().unwrap());
        if !(first >= 0.0 && last <= self.t_final) {
            return Err(domain(format!(
                "sample times [{first}, {last}] fall outside [0, {}]",
                self.t_final
            )));
        }
        if let Some(h) = self.integrator_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(domain(format!("integrator step must be > 0, got {h}")));
            }
        }
        Ok(())
    }
}

/// A constant-phase stretch of evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub theta: f64,
    pub duration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact eigendecomposition per constant-phase segment.
    Spectral,
    /// Taylor exponential per constant-phase segment (sectors above the dense limit).
    SparseTaylor,
    /// Second-order midpoint exponential integrator.
    MidpointExponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub ring: RingSpec,
    pub disorder: DisorderSpec,
    pub disorder_seed: u64,
    /// Method used per magnon number.
    pub methods: BTreeMap<usize, Method>,
    pub integrator_step: Option<f64>,
}

/// Snapshots of an evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MultiSectorState>,
    pub initial: MultiSectorState,
    pub plan: EvolutionPlan,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    /// max_t |‖ψ(t)‖ − 1|.
    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evolves states on one ring with one disorder realization.
#[derive(Clone, Debug)]
pub struct Propagator {
    ring: RingSpec,
    disorder: Arc<DisorderRealization>,
    cache: Arc<SpectralCache>,
}

impl Propagator {
    pub fn new(ring: RingSpec, disorder: impl Into<Arc<DisorderRealization>>) -> Result<Self> {
        ring.validate()?;
        let disorder = disorder.into();
        if disorder.n_sites() != ring.n_sites {
            return Err(domain(format!(
                "disorder has {} sites but ring has {}",
                disorder.n_sites(),
                ring.n_sites
            )));
        }
        Ok(Self {
            ring,
            disorder,
            cache: Arc::new(SpectralCache::new()),
        })
    }

    /// Shares a decomposition cache with other propagators.
    pub fn with_cache(mut self, cache: Arc<SpectralCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn disorder(&self) -> &Arc<DisorderRealization> {
        &self.disorder
    }

    pub fn cache(&self) -> &Arc<SpectralCache> {
        &self.cache
    }

    /// Fails with a numeric error when the generator has non-finite entries.
    pub fn hamiltonian(&self, theta: f64, basis: &Arc<SectorBasis>) -> Result<SectorHamiltonian> {
        let h = build_hamiltonian(&self.ring, &self.disorder, theta, basis)?;
        if !h.residual_norm_bound().is_finite() {
            return Err(Error::Numeric {
                n_magnons: basis.n_magnons(),
                theta,
                message: "Hamiltonian has non-finite entries".into(),
            });
        }
        Ok(h)
    }

    pub fn decomposition(&self, theta: f64, basis: &Arc<SectorBasis>) -> Result<SpectralDecomposition> {
        self.cache.decomposition(&self.hamiltonian(theta, basis)?)
    }

    fn check_initial(&self, initial: &MultiSectorState) -> Result<()> {
        if initial.n_sites() != self.ring.n_sites {
            return Err(domain(format!(
                "initial state has {} sites but ring has {}",
                initial.n_sites(),
                self.ring.n_sites
            )));
        }
        Ok(())
    }

    fn metadata(&self, methods: BTreeMap<usize, Method>, step: Option<f64>) -> TrajectoryMetadata {
        TrajectoryMetadata {
            ring: self.ring,
            disorder: *self.disorder.spec(),
            disorder_seed: self.disorder.seed_used(),
            methods,
            integrator_step: step,
        }
    }

    /// Picks the exact propagator for piecewise-constant schedules and the
    /// integrator otherwise.
    pub fn evolve(&self, initial: &MultiSectorState, plan: &EvolutionPlan) -> Result<Trajectory> {
        if plan.schedule.is_piecewise_constant() {
            self.evolve_piecewise(initial, plan)
        } else {
            self.evolve_continuous(initial, plan)
        }
    }

    /// Exact evolution for constant and step schedules.
    pub fn evolve_piecewise(&self, initial: &MultiSectorState, plan: &EvolutionPlan) -> Result<Trajectory> {
        plan.validate()?;
        if !plan.schedule.is_piecewise_constant() {
            return Err(domain(
                "evolve_piecewise needs a constant or step schedule; use evolve_continuous",
            ));
        }
        let mut cuts = vec![0.0];
        cuts.extend(plan.schedule.jump_times(plan.t_final));
        if *cuts.last().unwrap() < plan.t_final {
            cuts.push(plan.t_final);
        }
        let segments = cuts
            .windows(2)
            .map(|w| {
                Ok(Segment {
                    theta: plan.schedule.phase_at(0.5 * (w[0] + w[1]))?,
                    duration: w[1] - w[0],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (states, methods) = self.run_segments(initial, &segments, &plan.sample_times)?;
        Ok(Trajectory {
            times: plan.sample_times.clone(),
            states,
            initial: initial.clone(),
            plan: plan.clone(),
            metadata: self.metadata(methods, None),
        })
    }

    /// Exact evolution through an explicit list of constant-phase segments,
    /// with snapshots at `sample_times` (measured from the start).
    pub fn evolve_segments(
        &self,
        initial: &MultiSectorState,
        segments: &[Segment],
        sample_times: &[f64],
    ) -> Result<Vec<MultiSectorState>> {
        let total: f64 = segments.iter().map(|s| s.duration).sum();
        if sample_times.windows(2).any(|w| !(w[0] < w[1]))
            || sample_times.first().is_some_and(|&t| t < 0.0)
            || sample_times.last().is_some_and(|&t| t > total * (1.0 + 1e-12))
        {
            return Err(domain("sample times must be increasing and within the segment span"));
        }
        Ok(self.run_segments(initial, segments, sample_times)?.0)
    }

    fn run_segments(
        &self,
        initial: &MultiSectorState,
        segments: &[Segment],
        sample_times: &[f64],
    ) -> Result<(Vec<MultiSectorState>, BTreeMap<usize, Method>)> {
        self.check_initial(initial)?;
        if segments.iter().any(|s| !(s.duration >= 0.0 && s.theta.is_finite())) {
            return Err(domain("segments need finite phases and non-negative durations"));
        }
        let mut per_sector = BTreeMap::new();
        let mut methods = BTreeMap::new();
        for (&n, comp) in initial.components() {
            let basis = comp.state.basis();
            let (snaps, method) = if basis.dim() <= crate::hamiltonian::DENSE_LIMIT {
                (self.spectral_sector(comp.state.amplitudes(), basis, segments, sample_times)?, Method::Spectral)
            } else {
                (self.taylor_sector(comp.state.amplitudes(), basis, segments, sample_times)?, Method::SparseTaylor)
            };
            per_sector.insert(n, snaps);
            methods.insert(n, method);
        }
        Ok((assemble(initial, per_sector, sample_times.len()), methods))
    }

    fn spectral_sector(
        &self,
        psi0: &[Complex64],
        basis: &Arc<SectorBasis>,
        segments: &[Segment],
        samples: &[f64],
    ) -> Result<Vec<Vec<Complex64>>> {
        let mut out = Vec::with_capacity(samples.len());
        let mut psi = psi0.to_vec();
        let mut next = 0;
        while next < samples.len() && samples[next] <= 0.0 {
            out.push(psi.clone());
            next += 1;
        }
        let mut start = 0.0;
        for (k, seg) in segments.iter().enumerate() {
            let end = start + seg.duration;
            let last = k + 1 == segments.len();
            let in_segment = |t: f64| t <= end || (last && t <= end * (1.0 + 1e-12));
            if seg.duration > 0.0 {
                let dec = self.decomposition(seg.theta, basis)?;
                let coeffs = dec.coefficients(&psi);
                while next < samples.len() && in_segment(samples[next]) {
                    out.push(dec.synthesize(&coeffs, samples[next] - start));
                    next += 1;
                }
                psi = dec.synthesize(&coeffs, seg.duration);
            }
            start = end;
        }
        while out.len() < samples.len() {
            out.push(psi.clone());
        }
        Ok(out)
    }

    fn taylor_sector(
        &self,
        psi0: &[Complex64],
        basis: &Arc<SectorBasis>,
        segments: &[Segment],
        samples: &[f64],
    ) -> Result<Vec<Vec<Complex64>>> {
        let h = self.hamiltonian(0.0, basis)?;
        let bound = h.residual_norm_bound();
        let offset = h.offset();
        let mut ws = Workspace::default();
        let mut psi = psi0.to_vec();
        let mut out = Vec::with_capacity(samples.len());
        let mut now = 0.0;
        let mut next = 0;
        let mut start = 0.0;
        let snapshot = |psi: &[Complex64], t: f64| -> Vec<Complex64> {
            let g = Complex64::from_polar(1.0, -offset * t);
            psi.iter().map(|a| a * g).collect()
        };
        for (k, seg) in segments.iter().enumerate() {
            let end = start + seg.duration;
            let last = k + 1 == segments.len();
            while next < samples.len() && (samples[next] <= end || (last && samples[next] <= end * (1.0 + 1e-12))) {
                let dt = samples[next] - now;
                if dt > 0.0 {
                    expm_action(|x, y| h.apply_residual_at(seg.theta, x, y), bound, dt, &mut psi, &mut ws);
                    now = samples[next];
                }
                out.push(snapshot(&psi, now));
                next += 1;
            }
            let dt = end - now;
            if dt > 0.0 {
                expm_action(|x, y| h.apply_residual_at(seg.theta, x, y), bound, dt, &mut psi, &mut ws);
            }
            now = end;
            start = end;
        }
        while out.len() < samples.len() {
            out.push(snapshot(&psi, now));
        }
        Ok(out)
    }

    /// Default integrator step: ‖H − B(2n−N)‖_max·h ≤ 0.1 and at least
    /// 20 steps per period of the fastest harmonic.
    pub fn default_integrator_step(&self, initial: &MultiSectorState, schedule: &PhaseSchedule) -> Result<f64> {
        let mut scale = 0.0f64;
        for comp in initial.components().values() {
            scale = scale.max(self.hamiltonian(0.0, comp.state.basis())?.residual_max_abs());
        }
        let mut h = if scale > 0.0 { DEFAULT_STEP_NORM / scale } else { f64::INFINITY };
        if let (Some(period), f) = (schedule.period(), schedule.max_frequency()) {
            if f > 0 {
                h = h.min(period / (STEPS_PER_HARMONIC * f as f64));
            }
        }
        if !h.is_finite() {
            h = DEFAULT_STEP_NORM;
        }
        Ok(h)
    }

    /// Midpoint-exponential integration of any schedule.
    pub fn evolve_continuous(&self, initial: &MultiSectorState, plan: &EvolutionPlan) -> Result<Trajectory> {
        plan.validate()?;
        self.check_initial(initial)?;
        let step = match plan.integrator_step {
            Some(h) => h,
            None => self.default_integrator_step(initial, &plan.schedule)?,
        };
        let mut per_sector = BTreeMap::new();
        let mut methods = BTreeMap::new();
        for (&n, comp) in initial.components() {
            let snaps = self.integrate_sector(comp.state.amplitudes(), comp.state.basis(), plan, step)?;
            per_sector.insert(n, snaps);
            methods.insert(n, Method::MidpointExponential);
        }
        Ok(Trajectory {
            times: plan.sample_times.clone(),
            states: assemble(initial, per_sector, plan.sample_times.len()),
            initial: initial.clone(),
            plan: plan.clone(),
            metadata: self.metadata(methods, Some(step)),
        })
    }

    fn integrate_sector(
        &self,
        psi0: &[Complex64],
        basis: &Arc<SectorBasis>,
        plan: &EvolutionPlan,
        step: f64,
    ) -> Result<Vec<Vec<Complex64>>> {
        let h = self.hamiltonian(plan.schedule.theta0(), basis)?;
        let bound = h.residual_norm_bound();
        let offset = h.offset();
        let mut ws = Workspace::default();
        let mut psi = psi0.to_vec();
        let norm0 = l2_norm(&psi);
        let mut out = Vec::with_capacity(plan.sample_times.len());
        let mut now = 0.0;
        for &target in &plan.sample_times {
            let span = target - now;
            if span > 0.0 {
                let steps = (span / step - 1e-9).ceil().max(1.0) as usize;
                let hh = span / steps as f64;
                for k in 0..steps {
                    let theta = plan.schedule.phase_at(now + (k as f64 + 0.5) * hh)?;
                    expm_action(|x, y| h.apply_residual_at(theta, x, y), bound, hh, &mut psi, &mut ws);
                }
                now = target;
                let drift = (l2_norm(&psi) - norm0).abs();
                if !(drift <= INTEGRATOR_DRIFT_LIMIT) {
                    return Err(Error::Numeric {
                        n_magnons: basis.n_magnons(),
                        theta: plan.schedule.phase_at(now)?,
                        message: format!(
                            "norm drift {drift:.3e} at t={now}; reduce the integrator step (h={step})"
                        ),
                    });
                }
            }
            let g = Complex64::from_polar(1.0, -offset * now);
            out.push(psi.iter().map(|a| a * g).collect());
        }
        Ok(out)
    }
}

fn assemble(
    initial: &MultiSectorState,
    mut per_sector: BTreeMap<usize, Vec<Vec<Complex64>>>,
    n_samples: usize,
) -> Vec<MultiSectorState> {
    let mut iters: BTreeMap<usize, std::vec::IntoIter<Vec<Complex64>>> = per_sector
        .iter_mut()
        .map(|(&n, v)| (n, std::mem::take(v).into_iter()))
        .collect();
    (0..n_samples)
        .map(|_| {
            let components = initial
                .components()
                .iter()
                .map(|(&n, comp)| {
                    let amps = iters.get_mut(&n).and_then(Iterator::next).expect("one snapshot per sample");
                    (
                        n,
                        SectorComponent {
                            weight: comp.weight,
                            state: SectorState::from_evolved(Arc::clone(comp.state.basis()), amps),
                        },
                    )
                })
                .collect();
            MultiSectorState::from_parts(initial.n_sites(), components)
        })
        .collect()
}

/// One trajectory per disorder seed. Seeds are independent work items and
/// run under `exec`; each trajectory is computed sequentially.
pub fn evolve_ensemble(
    exec: Execution,
    ring: &RingSpec,
    spec: &DisorderSpec,
    seeds: &[u64],
    initial: &MultiSectorState,
    plan: &EvolutionPlan,
) -> Result<Vec<Trajectory>> {
    parallel::map(exec, seeds, |&seed| {
        let disorder = sample_disorder(spec, ring.n_sites, seed)?;
        Propagator::new(*ring, disorder)?.evolve(initial, plan)
    })
    .into_iter()
    .collect()
}

/// Exact evolution for constant and step schedules on a fresh propagator.
pub fn evolve_piecewise(
    initial: &MultiSectorState,
    ring: &RingSpec,
    disorder: &DisorderRealization,
    plan: &EvolutionPlan,
) -> Result<Trajectory> {
    Propagator::new(*ring, disorder.clone())?.evolve_piecewise(initial, plan)
}

/// Midpoint-exponential integration on a fresh propagator.
pub fn evolve_continuous(
    initial: &MultiSectorState,
    ring: &RingSpec,
    disorder: &DisorderRealization,
    plan: &EvolutionPlan,
) -> Result<Trajectory> {
    Propagator::new(*ring, disorder.clone())?.evolve_continuous(initial, plan)
}
