//! Sequential vs rayon execution over independent work items.
//!
//!   cargo bench -p spinring-core
//!   cargo bench -p spinring-core --no-default-features   (both arms sequential)

use std::f64::consts::{FRAC_PI_2, PI};

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinring_core::observables::overlap_map_with;
use spinring_core::{
    evolve_ensemble, realize_state, return_fidelity, revival_report, DisorderRealization, DisorderSpec,
    Distribution, EvolutionPlan, Execution, PhaseSchedule, ProbeFamily, Propagator, RingSpec, StateSpec,
};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn disorder_ensemble(c: &mut Criterion) {
    let n = 90;
    let ring = RingSpec::new(n, 100.0, 1.0).unwrap();
    let spec = DisorderSpec {
        eta: Distribution::Gaussian { sigma: 0.2 },
        ..DisorderSpec::default()
    };
    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let plan = EvolutionPlan::revivals(PhaseSchedule::step(FRAC_PI_2, 2.0 * PI), 50).unwrap();
    let seeds: Vec<u64> = (0..16).collect();

    let mut group = c.benchmark_group("revival_ensemble_16_seeds");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let trajs = evolve_ensemble(exec, &ring, &spec, &seeds, &init, &plan).unwrap();
                trajs
                    .iter()
                    .map(|t| revival_report(&return_fidelity(t, &init).unwrap(), 2.0 * PI).unwrap().min)
                    .fold(1.0, f64::min)
            })
        });
    }
    group.finish();
}

fn overlap_rows(c: &mut Criterion) {
    let n = 201;
    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let p = Propagator::new(RingSpec::new(n, 100.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let plan = EvolutionPlan::uniform(PhaseSchedule::step(FRAC_PI_2, 2.0 * PI), 20.0, 600).unwrap();
    let traj = p.evolve_piecewise(&init, &plan).unwrap();

    let mut group = c.benchmark_group("overlap_map_translated_n201_600_samples");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| overlap_map_with(&traj, ProbeFamily::TranslatedInitial, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, disorder_ensemble, overlap_rows);
criterion_main!(benches);
