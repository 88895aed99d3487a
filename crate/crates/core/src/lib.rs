//! Numerically exact dynamics of spin-1/2 rings with XY residual couplings
//! under a global Aharonov-Bohm (Peierls) phase.
//!
//! The Hamiltonian conserves total magnetization, so every computation runs
//! inside fixed-magnon sectors:
//!
//! * [`basis`] ranks n-magnon configurations and holds sector states.
//! * [`hamiltonian`] assembles the sector matrix for a given phase.
//! * [`schedule`] is the control law θ(t).
//! * [`disorder`] samples reproducible static imperfections.
//! * [`propagator`] evolves states, exactly on piecewise-constant phase
//!   segments or with a midpoint-exponential integrator for smooth schedules.
//! * [`observables`] turns trajectories into overlap maps and fidelities.
//! * [`oracle`] holds brute-force references (full 2^N space, Bessel walk).

pub mod basis;
pub mod disorder;
pub mod error;
mod expm;
pub mod hamiltonian;
pub mod observables;
pub mod oracle;
pub mod parallel;
pub mod propagator;
pub mod rng;
pub mod schedule;

pub use basis::{
    build_sector_basis, magnetization, realize_state, MultiSectorState, RealizedState, RingSpec,
    SectorBasis, SectorComponent, SectorState, StateSpec, StateTerm,
};
pub use disorder::{sample_disorder, DisorderRealization, DisorderSpec, Distribution, WidthConvention};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, commutator_norm, one_magnon_dispersion, SectorHamiltonian};
pub use observables::{
    overlap_map, return_fidelity, revival_report, FidelitySeries, OverlapMap, ProbeFamily,
    RevivalReport,
};
pub use parallel::Execution;
pub use propagator::{evolve_ensemble, EvolutionPlan, Propagator, Segment, SpectralCache, SpectralDecomposition, Trajectory};
pub use schedule::{HarmonicCounting, PhaseSchedule};

pub use num_complex::Complex64;
