//! Physical properties of the exact step-modulated dynamics.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use proptest::prelude::*;
use spinring_core::oracle::bessel_j;
use spinring_core::{
    magnetization, overlap_map, realize_state, return_fidelity, revival_report, sample_disorder, Complex64,
    DisorderRealization, DisorderSpec, Distribution, EvolutionPlan, MultiSectorState, PhaseSchedule, ProbeFamily,
    Propagator, RingSpec, Segment, StateSpec, StateTerm,
};

fn eta(sigma: f64, n: usize, seed: u64) -> DisorderRealization {
    let spec = DisorderSpec {
        eta: Distribution::Gaussian { sigma },
        ..DisorderSpec::default()
    };
    sample_disorder(&spec, n, seed).unwrap()
}

fn state(n: usize, terms: Vec<StateTerm>) -> MultiSectorState {
    realize_state(&StateSpec::new(terms), n).unwrap().state
}

fn arb_sector_state(n_sites: usize) -> impl Strategy<Value = (usize, Vec<StateTerm>)> {
    (1usize..=3).prop_flat_map(move |n| {
        let term = (
            -1.0..1.0f64,
            -1.0..1.0f64,
            prop::sample::subsequence((0..n_sites as i64).collect::<Vec<_>>(), n),
        )
            .prop_map(|(re, im, sites)| StateTerm::new(Complex64::new(re, im + 0.01), &sites));
        (Just(n), prop::collection::vec(term, 1..4))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Inside one sector the local field is a constant, so any B works.
    #[test]
    fn single_sector_states_revive(
        theta0 in 0.0..std::f64::consts::TAU,
        b in 0.0..5.0f64,
        seed in any::<u64>(),
        (_, terms) in arb_sector_state(12),
    ) {
        let n = 12;
        let init = state(n, terms);
        let p = Propagator::new(RingSpec::new(n, b, 1.0).unwrap(), eta(0.3, n, seed)).unwrap();
        let plan = EvolutionPlan::revivals(PhaseSchedule::step(theta0, 1.7), 50).unwrap();
        let traj = p.evolve_piecewise(&init, &plan).unwrap();
        let report = revival_report(&return_fidelity(&traj, &init).unwrap(), 1.7).unwrap();
        prop_assert_eq!(report.entries.len(), 50);
        prop_assert!((report.min - 1.0).abs() < 1e-10, "min {}", report.min);
        prop_assert!((report.max - 1.0).abs() < 1e-10);
    }

    /// Mixed sectors revive when BT is a multiple of 2π.
    #[test]
    fn mixed_sectors_revive_when_bt_is_commensurate(
        theta0 in 0.0..std::f64::consts::TAU,
        l in 1u32..4,
        seed in any::<u64>(),
    ) {
        let n = 10;
        let period = 2.0 * PI / 1.3;
        let b = 2.0 * PI * l as f64 / period;
        let init = state(n, vec![
            StateTerm::new(1.0, &[0]),
            StateTerm::new(Complex64::new(0.2, 0.7), &[2, 3]),
            StateTerm::new(0.3, &[1, 4, 8]),
        ]);
        let p = Propagator::new(RingSpec::new(n, b, 1.0).unwrap(), eta(0.2, n, seed)).unwrap();
        let plan = EvolutionPlan::revivals(PhaseSchedule::step(theta0, period), 20).unwrap();
        let traj = p.evolve_piecewise(&init, &plan).unwrap();
        let report = revival_report(&return_fidelity(&traj, &init).unwrap(), period).unwrap();
        prop_assert!((report.min - 1.0).abs() < 1e-10, "min {}", report.min);
    }

    /// Unmodulated or modulated, amplitudes stay in their sector.
    #[test]
    fn sector_magnetization_is_frozen(seed in any::<u64>(), theta0 in 0.0..6.0f64) {
        let n = 9;
        let init = state(n, vec![StateTerm::new(1.0, &[0]), StateTerm::new(1.0, &[1, 5])]);
        let p = Propagator::new(RingSpec::new(n, 0.4, 1.0).unwrap(), eta(0.3, n, seed)).unwrap();
        let plan = EvolutionPlan::uniform(PhaseSchedule::step(theta0, 2.3), 9.0, 31).unwrap();
        let traj = p.evolve_piecewise(&init, &plan).unwrap();
        let m0 = magnetization(&init);
        for s in &traj.states {
            prop_assert_eq!(&magnetization(s), &m0);
            for (n, c) in s.components() {
                let w0 = init.sector(*n).unwrap().weight.norm();
                prop_assert!((c.weight.norm() * c.state.norm() - w0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn field_mismatch_corrupts_mixed_sector_revivals() {
    let n = 10;
    let period = 2.0 * PI;
    let init = state(n, vec![StateTerm::new(1.0, &[0]), StateTerm::new(1.0, &[1, 2])]);
    let p = Propagator::new(RingSpec::new(n, 1.9, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let plan = EvolutionPlan::revivals(PhaseSchedule::step(FRAC_PI_2, period), 10).unwrap();
    let traj = p.evolve_piecewise(&init, &plan).unwrap();
    let report = revival_report(&return_fidelity(&traj, &init).unwrap(), period).unwrap();
    assert!(report.min < 1.0 - 1e-3, "{report:?}");
}

/// Fig. 4-like setup: the packet never leaves |d| ≤ ⌈2λT⌉.
#[test]
fn step_modulation_confines_the_packet() {
    let n = 201;
    let period = 2.0 * PI;
    let bound = (2.0 * period).ceil() as i64;
    // on the infinite chain the widest moment is t = T/2
    let widest = (0..=60).filter(|d| bessel_j(*d, period).powi(2) > 1e-3).max().unwrap();
    assert!(widest <= bound, "free wavefront at T/2 reaches {widest}");

    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let p = Propagator::new(RingSpec::new(n, 100.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let plan = EvolutionPlan::uniform(PhaseSchedule::step(FRAC_PI_2, period), 5.0 * period, 501).unwrap();
    let map = overlap_map(&p.evolve_piecewise(&init, &plan).unwrap(), ProbeFamily::SiteBasis).unwrap();
    let mut reach = 0;
    for row in &map.values {
        for (d, v) in map.sites.iter().zip(row) {
            if *v > 1e-3 {
                reach = reach.max(d.abs());
            }
        }
    }
    assert!(reach <= bound, "support reached |d| = {reach} > {bound}");
    assert_eq!(reach, widest);
}

#[test]
fn initial_phase_does_not_change_site_populations() {
    let n = 201;
    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let p = Propagator::new(RingSpec::new(n, 100.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let maps: Vec<_> = [0.0, FRAC_PI_4, FRAC_PI_2]
        .iter()
        .map(|&th| {
            let plan = EvolutionPlan::uniform(PhaseSchedule::step(th, 2.0 * PI), 20.0, 201).unwrap();
            overlap_map(&p.evolve_piecewise(&init, &plan).unwrap(), ProbeFamily::SiteBasis).unwrap()
        })
        .collect();
    for other in &maps[1..] {
        for (a, b) in maps[0].values.iter().zip(&other.values) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn clean_ring_is_translation_covariant() {
    let n = 15;
    let p = Propagator::new(RingSpec::new(n, 0.5, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let chi = state(n, vec![StateTerm::new(1.0, &[0]), StateTerm::new(Complex64::new(0.0, 0.5), &[1, 3])]);
    let plan = EvolutionPlan::uniform(PhaseSchedule::step(0.3, 2.5), 8.0, 17).unwrap();
    let base = p.evolve_piecewise(&chi, &plan).unwrap();
    for shift in [1i64, 4, -3] {
        let moved = p.evolve_piecewise(&chi.translated(shift), &plan).unwrap();
        for (a, b) in base.states.iter().zip(&moved.states) {
            let expected = a.translated(shift);
            assert!((expected.fidelity(b).unwrap() - 1.0).abs() < 1e-10);
        }
        let ma = overlap_map(&base, ProbeFamily::TranslatedInitial).unwrap();
        let mb = overlap_map(&moved, ProbeFamily::TranslatedInitial).unwrap();
        for (ra, rb) in ma.values.iter().zip(&mb.values) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn one_magnon_populations_sum_to_one() {
    let n = 31;
    let p = Propagator::new(RingSpec::new(n, 2.0, 1.0).unwrap(), eta(0.3, n, 4)).unwrap();
    let init = state(n, vec![StateTerm::new(1.0, &[1]), StateTerm::new(1.0, &[-1])]);
    for schedule in [PhaseSchedule::constant(0.2), PhaseSchedule::step(FRAC_PI_2, 2.0 * PI)] {
        let plan = EvolutionPlan::uniform(schedule, 20.0, 81).unwrap();
        let map = overlap_map(&p.evolve(&init, &plan).unwrap(), ProbeFamily::SiteBasis).unwrap();
        for row in &map.values {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}

/// At θ = π/2 the two halves cancel on site 0 and F_d = ((d/t)J_d(2t))²/2
/// never exceeds 1/2. At θ = 0 they add on site 0 and reach 2·max J₁² ≈ 0.68.
#[test]
fn superposition_peak_depends_on_phase() {
    let n = 201;
    let p = Propagator::new(RingSpec::new(n, 100.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let init = state(n, vec![StateTerm::new(1.0, &[1]), StateTerm::new(1.0, &[-1])]);
    let peak = |schedule| {
        let plan = EvolutionPlan::uniform(schedule, 20.0, 401).unwrap();
        overlap_map(&p.evolve_piecewise(&init, &plan).unwrap(), ProbeFamily::SiteBasis)
            .unwrap()
            .max_value()
    };
    for schedule in [
        PhaseSchedule::constant(FRAC_PI_2),
        PhaseSchedule::step(FRAC_PI_2, 2.0 * PI),
        PhaseSchedule::step(-FRAC_PI_2, 2.0 * PI),
    ] {
        let m = peak(schedule);
        assert!(m <= 0.5 + 1e-10, "{schedule:?}: {m}");
    }
    let j1_max = (0..2000).map(|k| bessel_j(1, k as f64 * 1e-3 + 1.0).powi(2)).fold(0.0, f64::max);
    let m = peak(PhaseSchedule::constant(0.0));
    assert!((m - 2.0 * j1_max).abs() < 1e-3, "{m} vs {}", 2.0 * j1_max);
}

#[test]
fn unmodulated_ring_follows_bessel_walk() {
    let n = 400;
    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let p = Propagator::new(RingSpec::new(n, 0.0, 1.0).unwrap(), DisorderRealization::clean(n)).unwrap();
    let plan = EvolutionPlan::uniform(PhaseSchedule::constant(0.0), 10.0, 101).unwrap();
    let traj = p.evolve_piecewise(&init, &plan).unwrap();
    let mut worst = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        for d in -20i64..=20 {
            let site = d.rem_euclid(n as i64) as usize;
            let amp = s.amplitude(&[site]);
            worst = worst.max((amp.norm_sqr() - bessel_j(d, 2.0 * t).powi(2)).abs());
        }
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn spectral_norm_drift_over_ten_thousand_segments() {
    let n = 20;
    let p = Propagator::new(RingSpec::new(n, 1.0, 1.0).unwrap(), eta(0.2, n, 9)).unwrap();
    let init = state(n, vec![StateTerm::new(1.0, &[0]), StateTerm::new(1.0, &[0, 7])]);
    let segments: Vec<Segment> = (0..10_000)
        .map(|k| Segment {
            theta: 0.4 + PI * (k % 2) as f64,
            duration: 0.37 + 0.01 * (k % 7) as f64,
        })
        .collect();
    let total: f64 = segments.iter().map(|s| s.duration).sum();
    let out = p.evolve_segments(&init, &segments, &[total]).unwrap();
    assert!((out[0].norm() - 1.0).abs() < 1e-12, "{}", out[0].norm());
    assert_eq!(p.cache().decompositions_computed(), 4);
}

#[test]
fn shared_cache_across_threads() {
    let n = 30;
    let dis = Arc::new(eta(0.2, n, 1));
    let cache = Arc::new(spinring_core::SpectralCache::new());
    let init = realize_state(&StateSpec::localized(0), n).unwrap().state;
    let plan = EvolutionPlan::revivals(PhaseSchedule::step(0.1, 2.0), 5).unwrap();
    std::thread::scope(|s| {
        for b in [1.0, 2.0, 3.0, 4.0] {
            let (dis, cache, init, plan) = (Arc::clone(&dis), Arc::clone(&cache), &init, &plan);
            s.spawn(move || {
                let p = Propagator::new(RingSpec::new(n, b, 1.0).unwrap(), dis).unwrap().with_cache(cache);
                p.evolve_piecewise(init, plan).unwrap();
            });
        }
    });
    assert_eq!(cache.decompositions_computed(), 2);
}
