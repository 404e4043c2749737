//! Property checks for the dynamics, herding and analytics invariants.
//!
//! Each check runs its own deterministic proptest runner so the same code
//! backs both the `invariants` test target and the acceptance gate.

use std::f64::consts::PI;

use beliefsim::analytics::{classify_phases, Dtw, RunDistance};
use beliefsim::dynamics::{
    apply_boundary, falloff, init_world, slew_orientation, target_orientation, Agent, Border, Environment,
    PopulationConfig, World, WorldConfig,
};
use beliefsim::herding::{apply_amplification, select_amplified, HerdingMode, HerdingPolicy};
use beliefsim::rng::{stream, StreamPurpose};
use beliefsim::vector::BeliefVector;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

use super::oracle::{brute_force_dtw, trajectory};

pub const CASES: u32 = 1000;

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn unit_vector(d: usize) -> impl Strategy<Value = BeliefVector> {
    prop::collection::vec(-1.0..1.0f64, d)
        .prop_filter("non-degenerate", |c| c.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|c| BeliefVector::from_slice(&c).unwrap().normalize().unwrap())
}

fn pair_of_units() -> impl Strategy<Value = (BeliefVector, BeliefVector)> {
    (2..=6usize).prop_flat_map(|d| (unit_vector(d), unit_vector(d)))
}

fn border(i: u8) -> Border {
    match i % 3 {
        0 => Border::None,
        1 => Border::Reflect,
        _ => Border::Respawn,
    }
}

fn mode(i: u8) -> HerdingMode {
    match i % 5 {
        0 => HerdingMode::Off,
        1 => HerdingMode::ClosestToMean,
        2 => HerdingMode::FixedLeader,
        3 => HerdingMode::RandomEachCycle,
        _ => HerdingMode::Opposing,
    }
}

#[derive(Debug, Clone)]
struct WorldCase {
    config: WorldConfig,
    seed: u64,
    steps: u64,
}

fn world_case() -> impl Strategy<Value = WorldCase> {
    (
        2..=4usize,
        1..=10usize,
        0..=6usize,
        0.0..4.0f64,
        0.0..4.0f64,
        any::<u8>(),
        any::<u8>(),
        any::<u64>(),
        1..=8u64,
    )
        .prop_map(|(d, n0, n1, sih0, sih1, b, m, seed, steps)| {
            let mut pops = vec![PopulationConfig::new(n0, sih0)];
            if n1 > 0 {
                let mut p = PopulationConfig::new(n1, sih1);
                p.sees_other = m % 2 == 0;
                pops.push(p);
            }
            let mut config = WorldConfig::new(d, pops);
            config.extent = 3.0;
            config.init_half_range = 2.5;
            config.border = border(b);
            let mut h = HerdingPolicy::new(mode(m), 10.0, 3.0);
            if h.mode == HerdingMode::Opposing {
                if n1 > 0 {
                    h.target_population = 1;
                } else {
                    h.mode = HerdingMode::ClosestToMean;
                }
            }
            config.herding = h;
            WorldCase { config, seed, steps }
        })
}

fn world(case: &WorldCase) -> World {
    init_world(case.config.clone(), case.seed).unwrap()
}

// core-dynamics

pub fn unit_norm(cases: u32) -> Result<(), String> {
    check(cases, world_case(), |case| {
        let mut w = world(&case);
        for _ in 0..case.steps {
            w.step();
            for a in w.agents() {
                prop_assert!((a.orientation.norm() - 1.0).abs() <= 1e-9, "agent {} norm {}", a.id, a.orientation.norm());
            }
        }
        Ok(())
    })
}

pub fn slew_monotonic(cases: u32) -> Result<(), String> {
    check(cases, (pair_of_units(), 0.0..2.0f64), |((current, target), f)| {
        let next = slew_orientation(&current, &target, f, 1.0);
        let before = current.angle_to(&target);
        let after = next.angle_to(&target);
        prop_assert!(after <= before + 1e-9, "{after} > {before}");
        if f > 1e-6 && before > 1e-6 {
            prop_assert!(after < before, "no progress: {after} vs {before}");
        }
        if f == 0.0 {
            prop_assert_eq!(next, current);
        }
        Ok(())
    })
}

pub fn slew_in_plane(cases: u32) -> Result<(), String> {
    check(cases, (pair_of_units(), 0.0..2.0f64), |((current, target), f)| {
        let next = slew_orientation(&current, &target, f, 1.0);
        prop_assert!((next.norm() - 1.0).abs() < 1e-9);
        // Residual of `next` after projecting onto span(current, target).
        let mut e2 = target;
        e2.add_scaled(&current, -current.dot(&target));
        let mut residual = next;
        residual.add_scaled(&current, -next.dot(&current));
        if let Ok(e2) = e2.normalize() {
            residual.add_scaled(&e2, -next.dot(&e2));
        }
        let antiparallel = PI - current.angle_to(&target) < 1e-6;
        prop_assert!(antiparallel || residual.norm() < 1e-9, "residual {}", residual.norm());
        Ok(())
    })
}

pub fn nomad_locality(cases: u32) -> Result<(), String> {
    let strategy = (2..=4usize, 1..=12usize, 0.0..5.0f64, any::<u8>(), any::<u64>(), 1..=10u64);
    check(cases, strategy, |(d, others, sih, b, seed, steps)| {
        let mut nomad = PopulationConfig::new(1, 0.0);
        nomad.sees_other = true;
        let mut crowd = WorldConfig::new(d, vec![nomad.clone(), PopulationConfig::new(others, sih)]);
        crowd.border = border(b);
        let mut solo = crowd.clone();
        solo.populations.truncate(1);
        let mut a = init_world(crowd, seed).unwrap();
        let mut s = init_world(solo, seed).unwrap();
        for _ in 0..steps {
            a.step();
            s.step();
            let (x, y) = (a.agents()[0], s.agents()[0]);
            prop_assert_eq!(x.position, y.position);
            prop_assert_eq!(x.orientation, y.orientation);
            prop_assert_eq!(x.speed, y.speed);
        }
        Ok(())
    })
}

pub fn falloff_monotonic(cases: u32) -> Result<(), String> {
    let strategy = (0.01..10.0f64, 1.0..10.0f64, 0.0..1.0f64, 0.0..1.0f64);
    check(cases, strategy, |(sih, weight, u, v)| {
        let reach = weight * sih;
        let (d, d2) = (u.min(v) * reach, u.max(v) * reach);
        prop_assume!(d2 - d > 1e-9 * reach && d2 < reach);
        prop_assert!(falloff(d, weight, sih) > falloff(d2, weight, sih));
        // Same through the full influence computation.
        let me = Agent::new(0, 0, BeliefVector::zeros(2), BeliefVector::axis(2, 0), 1.0, sih, 1.0);
        let mut n = Agent::new(1, 0, BeliefVector::zeros(2), BeliefVector::axis(2, 1), 1.0, sih, 1.0);
        n.weight = weight;
        n.position = BeliefVector::axis(2, 0) * d;
        let near = target_orientation(&me, &[me, n], |_| true).map_or(0.0, |i| i.total_weight);
        n.position = BeliefVector::axis(2, 0) * d2;
        let far = target_orientation(&me, &[me, n], |_| true).map_or(0.0, |i| i.total_weight);
        prop_assert!(near > far, "{near} <= {far}");
        Ok(())
    })
}

pub fn reflect_bound(cases: u32) -> Result<(), String> {
    let strategy = (2..=5usize, 1.0..20.0f64)
        .prop_flat_map(|(d, extent)| (Just(extent), prop::collection::vec(-3.0 * extent..3.0 * extent, d), unit_vector(d)));
    check(cases, strategy, |(extent, pos, ori)| {
        let d = pos.len();
        let env = Environment::new(d, extent, Border::Reflect, extent / 2.0, 0.5);
        let mut a = Agent::new(0, 0, BeliefVector::from_slice(&pos).unwrap(), ori, 1.0, 1.0, 1.0);
        let mut rng = stream(0, 0, 0, StreamPurpose::Respawn);
        let events = apply_boundary(&mut a, &env, (0.1, 2.0), 0, &mut rng);
        let crossed = pos.iter().filter(|c| c.abs() > extent).count();
        prop_assert_eq!(events.len(), crossed);
        for k in 0..d {
            prop_assert!(a.position[k].abs() <= extent + 1e-12, "dim {} at {}", k, a.position[k]);
        }
        prop_assert!((a.orientation.norm() - 1.0).abs() < 1e-9);
        Ok(())
    })
}

pub fn order_independence(cases: u32) -> Result<(), String> {
    let strategy = world_case().prop_flat_map(|case| {
        let n = case.config.agent_count();
        (Just(case), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    check(cases, strategy, |(case, order)| {
        let mut a = world(&case);
        let mut b = world(&case);
        for _ in 0..case.steps {
            a.step();
            b.step_in_order(&order);
        }
        prop_assert_eq!(a.agents(), b.agents());
        Ok(())
    })
}

pub fn heatmap_conservation(cases: u32) -> Result<(), String> {
    check(cases, world_case(), |mut case| {
        if case.config.border == Border::Respawn {
            case.config.border = Border::Reflect;
        }
        let mut w = world(&case);
        w.run(case.steps);
        let total = w.environment().heatmap.total();
        prop_assert_eq!(total, case.steps * case.config.agent_count() as u64);
        Ok(())
    })
}

// herding-controller

fn amplified_in(w: &World, population: usize) -> usize {
    w.agents()
        .iter()
        .filter(|a| a.population == population && a.weight != 1.0)
        .count()
}

pub fn exactly_one_amplified(cases: u32) -> Result<(), String> {
    check(cases, world_case(), |case| {
        let mut w = world(&case);
        let h = case.config.herding.clone();
        for _ in 0..case.steps {
            w.step();
            let expected = usize::from(h.mode != HerdingMode::Off);
            prop_assert_eq!(amplified_in(&w, h.target_population), expected);
            for a in w.agents().iter().filter(|a| a.weight == 1.0) {
                prop_assert_eq!(a.sih, case.config.populations[a.population].sih);
            }
            for p in 0..case.config.populations.len() {
                prop_assert!(amplified_in(&w, p) <= 1);
            }
        }
        Ok(())
    })
}

pub fn restoration(cases: u32) -> Result<(), String> {
    check(cases, world_case(), |case| {
        let mut w = world(&case);
        w.run(case.steps);
        w.set_herding(HerdingPolicy::off()).unwrap();
        w.step();
        for a in w.agents() {
            prop_assert_eq!(a.weight, 1.0);
            prop_assert!(!a.amplified);
            prop_assert_eq!(a.sih, case.config.populations[a.population].sih);
        }
        Ok(())
    })
}

fn snapshot() -> impl Strategy<Value = Vec<Agent>> {
    (2..=4usize, 1..=8usize, 1..=8usize).prop_flat_map(|(d, n0, n1)| {
        prop::collection::vec(unit_vector(d), n0 + n1).prop_map(move |headings| {
            headings
                .into_iter()
                .enumerate()
                .map(|(i, h)| {
                    let population = usize::from(i >= n0);
                    Agent::new(i as u32, population, BeliefVector::zeros(d), h, 1.0, 1.0, 1.0)
                })
                .collect()
        })
    })
}

fn opposing_policy() -> HerdingPolicy {
    HerdingPolicy {
        target_population: 1,
        opposing_source: 0,
        ..HerdingPolicy::new(HerdingMode::Opposing, 10.0, 5.0)
    }
}

pub fn opposing_anti_alignment(cases: u32) -> Result<(), String> {
    check(cases, snapshot(), |agents| {
        let mut sum = BeliefVector::zeros(agents[0].dimensions());
        for a in agents.iter().filter(|a| a.population == 0) {
            sum += a.orientation;
        }
        let Ok(mean) = sum.normalize() else {
            return Ok(());
        };
        let mut rng = stream(1, 0, 0, StreamPurpose::Selection);
        let sel = select_amplified(&opposing_policy(), &agents, None, &mut rng);
        let pick = *sel.picks.last().unwrap();
        prop_assert_eq!(agents[pick as usize].population, 1);
        let exists = agents
            .iter()
            .any(|a| a.population == 1 && a.orientation.dot(&mean) <= 0.0);
        if exists {
            prop_assert!(agents[pick as usize].orientation.dot(&mean) <= 0.0);
        }
        let mut amplified = agents.clone();
        apply_amplification(&mut amplified, &sel, &opposing_policy());
        prop_assert_eq!(amplified[pick as usize].weight, 10.0);
        Ok(())
    })
}

pub fn selection_determinism(cases: u32) -> Result<(), String> {
    check(cases, (snapshot(), any::<u64>(), any::<u64>()), |(agents, s1, s2)| {
        for mode in [HerdingMode::ClosestToMean, HerdingMode::Opposing] {
            let policy = HerdingPolicy {
                mode,
                ..opposing_policy()
            };
            let a = select_amplified(&policy, &agents, None, &mut stream(s1, 0, 0, StreamPurpose::Selection));
            let b = select_amplified(&policy, &agents, None, &mut stream(s2, 0, 0, StreamPurpose::Selection));
            if !a.fell_back && !b.fell_back {
                prop_assert_eq!(a.picks, b.picks);
            }
        }
        let policy = HerdingPolicy::new(HerdingMode::RandomEachCycle, 10.0, 5.0);
        let a = select_amplified(&policy, &agents, None, &mut stream(s1, 7, 0, StreamPurpose::Selection));
        let b = select_amplified(&policy, &agents, None, &mut stream(s1, 7, 0, StreamPurpose::Selection));
        prop_assert_eq!(a.picks, b.picks);
        Ok(())
    })
}

// trajectory-analytics

fn sequence(max_len: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, d), 1..=max_len)
}

fn sequence_pair(max_len: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1..=3usize).prop_flat_map(move |d| (sequence(max_len, d), sequence(max_len, d)))
}

pub fn dtw_pseudo_metric(cases: u32) -> Result<(), String> {
    check(cases, sequence_pair(12), |(a, b)| {
        let (ta, tb) = (trajectory(&a), trajectory(&b));
        let dtw = Dtw::new();
        let ab = dtw.distance(&ta, &tb).unwrap();
        let ba = dtw.distance(&tb, &ta).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert_eq!(dtw.distance(&ta, &ta).unwrap(), 0.0);
        Ok(())
    })
}

pub fn dtw_below_lockstep(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize, 1..=12usize).prop_flat_map(|(d, n)| {
        let s = prop::collection::vec(prop::collection::vec(-10.0..10.0f64, d), n);
        (s.clone(), s)
    });
    check(cases, strategy, |(a, b)| {
        let lockstep: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
            .sum();
        let d = Dtw::new().distance(&trajectory(&a), &trajectory(&b)).unwrap();
        prop_assert!(d <= lockstep + 1e-9, "{d} > {lockstep}");
        Ok(())
    })
}

pub fn dtw_matches_oracle(cases: u32) -> Result<(), String> {
    check(cases, (sequence_pair(6), prop::option::of(0..4usize)), |((a, b), window)| {
        let mut dtw = Dtw::new();
        if let Some(w) = window {
            dtw = dtw.with_window(w);
        }
        let dp = dtw.distance(&trajectory(&a), &trajectory(&b)).unwrap();
        let oracle = brute_force_dtw(&a, &b, window);
        prop_assert!((dp - oracle).abs() <= 1e-9, "dp {dp} oracle {oracle}");
        Ok(())
    })
}

pub fn classification_scale_invariant(cases: u32) -> Result<(), String> {
    let strategy = (prop::collection::vec(0.0..1000.0f64, 3..30), 1e-3..1e3f64);
    check(cases, strategy, |(distances, scale)| {
        let runs = |k: f64| -> Vec<RunDistance> {
            distances
                .iter()
                .enumerate()
                .map(|(i, &d)| RunDistance {
                    run_id: i.to_string(),
                    sih: 0.0,
                    mean_distance: d * k,
                })
                .collect()
        };
        match (classify_phases(&runs(1.0)), classify_phases(&runs(scale))) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.labels, b.labels);
                if a.separation.is_finite() {
                    prop_assert!((a.separation - b.separation).abs() <= 1e-6 * a.separation.abs().max(1.0));
                }
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => return Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
        }
        Ok(())
    })
}

type Property = (&'static str, fn(u32) -> Result<(), String>);

pub const ALL: &[Property] = &[
    ("unit-norm", unit_norm),
    ("slew-monotonic", slew_monotonic),
    ("slew-in-plane", slew_in_plane),
    ("nomad-locality", nomad_locality),
    ("falloff-monotonic", falloff_monotonic),
    ("reflect-bound", reflect_bound),
    ("order-independence", order_independence),
    ("heatmap-conservation", heatmap_conservation),
    ("exactly-one-amplified", exactly_one_amplified),
    ("restoration", restoration),
    ("opposing-anti-alignment", opposing_anti_alignment),
    ("selection-determinism", selection_determinism),
    ("dtw-pseudo-metric", dtw_pseudo_metric),
    ("dtw-below-lockstep", dtw_below_lockstep),
    ("dtw-matches-oracle", dtw_matches_oracle),
    ("classification-scale-invariant", classification_scale_invariant),
];

pub fn run_all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    ALL.iter().map(|(name, f)| (*name, f(cases))).collect()
}
