use std::collections::BTreeMap;

use ils_core::accel::AccelIndex;
use ils_core::fixtures::room8;
use ils_core::ils::{
    contribution_matrix, energy_report, evaluate_scenario, optimize, ContributionMatrix, GroundTruth, ILSConfig, Mode, DEFAULT_OVERHEAD_WATTS,
    HOURS_PER_DAY,
};
use ils_core::perception::LuxmeterConfig;
use ils_core::radiosity::build_basis;
use ils_core::Error;
use proptest::prelude::*;

const W: f64 = 96.8;

#[test]
fn room8_daily_energy_figures() {
    let scene = room8().unwrap();
    let powers = scene.powers();
    assert_eq!(powers, vec![W; 8]);
    let all = energy_report(&[1.0; 8], &powers, HOURS_PER_DAY, DEFAULT_OVERHEAD_WATTS).unwrap();
    assert_eq!(all.baseline_wh, 18585.6);
    let two_on = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let r = energy_report(&two_on, &powers, HOURS_PER_DAY, DEFAULT_OVERHEAD_WATTS).unwrap();
    assert!((r.ils_wh - 6206.4).abs() < 1e-9, "{}", r.ils_wh);
    assert!((r.saving_fraction - 0.6661).abs() < 1e-4, "{}", r.saving_fraction);
    assert_eq!(r.delta_watt, 580.8);
}

#[test]
fn delta_watt_column() {
    let powers = [W; 8];
    for (off, expect) in [(2, 193.6), (4, 387.2), (6, 580.8)] {
        let dims: Vec<f64> = (0..8).map(|l| if l < off { 0.0 } else { 1.0 }).collect();
        let r = energy_report(&dims, &powers, 24.0, 65.0).unwrap();
        assert_eq!(r.delta_watt, expect);
    }
}

/// Every binary pattern; least power wins, equal power goes to the
/// lexicographically smallest dims listed by luminaire id.
fn brute_force(a: &ContributionMatrix, powers: &[f64], delta: f64) -> (Vec<f64>, f64) {
    let n = powers.len();
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by_key(|&i| a.luminaire_ids[i]);
    let tol = 1e-9 * (1.0 + powers.iter().sum::<f64>());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << n) {
        let dims: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
        let feasible = a.a.iter().zip(&a.full_lit).all(|(row, full)| {
            let lit: f64 = row.iter().zip(&dims).map(|(x, d)| x * d).sum();
            full - lit <= delta + 1e-9 * (1.0 + full.abs())
        });
        if !feasible {
            continue;
        }
        let power: f64 = powers.iter().zip(&dims).map(|(p, d)| p * d).sum();
        let key = |d: &[f64]| by_id.iter().map(|&i| d[i] as u8).collect::<Vec<_>>();
        best = match best {
            None => Some((dims, power)),
            Some((bd, bp)) if power < bp - tol || ((power - bp).abs() <= tol && key(&dims) < key(&bd)) => Some((dims, power)),
            keep => keep,
        };
    }
    best.expect("all-ones is feasible")
}

fn cfg(delta: f64, mode: Mode) -> ILSConfig {
    ILSConfig {
        delta_max_lux: delta,
        mode,
        ..ILSConfig::default()
    }
}

#[test]
fn hand_enumerated_example() {
    let a = ContributionMatrix::from_rows(vec![vec![300.0, 50.0]], vec![1], vec![1, 2]).unwrap();
    let s = optimize(&a, &[W, W], &cfg(200.0, Mode::Binary), None).unwrap();
    assert_eq!(s.dims, vec![1.0, 0.0]);
    assert_eq!(brute_force(&a, &[W, W], 200.0).0, vec![1.0, 0.0]);
}

#[test]
fn room8_binary_matches_brute_force() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 16).unwrap();
    let a = contribution_matrix(&scene, &basis, &accel, &LuxmeterConfig::default()).unwrap();
    let powers = scene.powers();
    for delta in [0.0, 50.0, 100.0, 200.0, 400.0, 1e6] {
        let s = optimize(&a, &powers, &cfg(delta, Mode::Binary), None).unwrap();
        let (dims, power) = brute_force(&a, &powers, delta);
        assert_eq!(s.dims, dims, "delta {delta}");
        assert!((s.power - power).abs() < 1e-9);
        let c = optimize(&a, &powers, &cfg(delta, Mode::Continuous), None).unwrap();
        assert!(c.power <= s.power + 1e-6);
        for d in c.drops {
            assert!(d <= delta + 1e-6);
        }
    }
}

#[test]
fn scenario_self_consistency_and_offsets() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 9).unwrap();
    let lux = LuxmeterConfig {
        n_rays: 2000,
        ..LuxmeterConfig::default()
    };
    let ils = ILSConfig::default();
    let dims = [1.0, 0.0, 0.5, 1.0, 0.0, 1.0, 0.25, 0.0];
    let first = evaluate_scenario(&scene, &basis, &dims, &GroundTruth::new(), &accel, &lux, &ils).unwrap();
    assert!(first.sensors.iter().all(|s| s.epsilon.is_none()));

    let truth: GroundTruth = first.sensors.iter().map(|s| (s.sensor_id, s.estimate)).collect();
    let again = evaluate_scenario(&scene, &basis, &dims, &truth, &accel, &lux, &ils).unwrap();
    assert!(again.sensors.iter().all(|s| s.epsilon == Some(0.0)));

    let mut shifted = truth.clone();
    *shifted.get_mut(&4).unwrap() += 10.0;
    let off = evaluate_scenario(&scene, &basis, &dims, &shifted, &accel, &lux, &ils).unwrap();
    let eps: BTreeMap<u32, f64> = off.epsilon_est();
    assert!((eps[&4] - 10.0).abs() < 1e-9);
    assert!(eps.iter().filter(|(id, _)| **id != 4).all(|(_, e)| *e == 0.0));

    let full = evaluate_scenario(&scene, &basis, &[1.0; 8], &GroundTruth::new(), &accel, &lux, &ils).unwrap();
    assert!(full.delta_lux.iter().all(|d| *d == 0.0));
    assert_eq!(full.delta_watt, 0.0);

    let unknown: GroundTruth = [(99u32, 1.0)].into();
    assert!(matches!(
        evaluate_scenario(&scene, &basis, &dims, &unknown, &accel, &lux, &ils),
        Err(Error::UnknownId { id: 99, .. })
    ));
}

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, f64)> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(l, k)| {
        (
            prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.0..400.0], l), k),
            prop::collection::vec(prop_oneof![Just(96.8), 10.0..150.0], l),
            0.0..600.0,
        )
    })
}

fn matrix(rows: Vec<Vec<f64>>) -> ContributionMatrix {
    let l = rows[0].len();
    let k = rows.len() as u32;
    // ids deliberately not in scene order
    let ids = (0..l as u32).map(|i| (i * 5 + 3) % 97).collect();
    ContributionMatrix::from_rows(rows, (0..k).collect(), ids).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn budget_soundness_and_optimality((rows, powers, delta) in problem()) {
        let a = matrix(rows);
        for mode in [Mode::Binary, Mode::Continuous] {
            let s = optimize(&a, &powers, &cfg(delta, mode), None).unwrap();
            for d in &s.drops {
                prop_assert!(*d <= delta + 1e-6, "{:?} drop {}", mode, d);
            }
            prop_assert!(s.dims.iter().all(|d| (0.0..=1.0).contains(d)));
        }
        let s = optimize(&a, &powers, &cfg(delta, Mode::Binary), None).unwrap();
        let (dims, power) = brute_force(&a, &powers, delta);
        prop_assert_eq!(&s.dims, &dims);
        prop_assert!((s.power - power).abs() <= 1e-9 * (1.0 + power));
    }

    #[test]
    fn monotone_in_budget((rows, powers, delta) in problem(), extra in 0.0..300.0) {
        let a = matrix(rows);
        for mode in [Mode::Binary, Mode::Continuous] {
            let tight = optimize(&a, &powers, &cfg(delta, mode), None).unwrap();
            let loose = optimize(&a, &powers, &cfg(delta + extra, mode), None).unwrap();
            prop_assert!(loose.power <= tight.power + 1e-6 * (1.0 + tight.power));
        }
    }

    #[test]
    fn power_scaling((rows, powers, delta) in problem(), c in 0.01f64..100.0) {
        let a = matrix(rows);
        let scaled: Vec<f64> = powers.iter().map(|p| p * c).collect();
        let s = optimize(&a, &powers, &cfg(delta, Mode::Binary), None).unwrap();
        let t = optimize(&a, &scaled, &cfg(delta, Mode::Binary), None).unwrap();
        prop_assert_eq!(&s.dims, &t.dims);
        prop_assert!((t.power - c * s.power).abs() <= 1e-9 * (1.0 + t.power));
        let sc = optimize(&a, &powers, &cfg(delta, Mode::Continuous), None).unwrap();
        let tc = optimize(&a, &scaled, &cfg(delta, Mode::Continuous), None).unwrap();
        prop_assert!((tc.power - c * sc.power).abs() <= 1e-6 * (1.0 + tc.power));
    }

    #[test]
    fn power_bookkeeping(dims in prop::collection::vec(0.0..=1.0, 1..=8), p in 1.0..200.0) {
        let powers = vec![p; dims.len()];
        let r = energy_report(&dims, &powers, 24.0, 65.0).unwrap();
        let active: f64 = powers.iter().zip(&dims).map(|(p, d)| p * d).sum();
        let total: f64 = powers.iter().sum();
        prop_assert!((r.delta_watt + active - total).abs() <= 1e-12 * total);
        prop_assert!((r.ils_wh - (active + 65.0) * 24.0).abs() <= 1e-9 * r.ils_wh);
    }
}
