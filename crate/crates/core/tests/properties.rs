use ils_core::accel::AccelIndex;
use ils_core::fixtures::downlight_ldc;
use ils_core::geom::Vec3;
use ils_core::perception::{LuxmeterConfig, PatchField, SensorPose};
use ils_core::photometry::{Ldc, Lsc};
use ils_core::radiosity::{build_basis, emission_vector, form_factor_matrix, RadiositySystem, SolverOptions};
use ils_core::scene::{
    albedo_from_observations, box_shell, load_scene, patchify_depth, save_scene, Camera, DepthImage, Intrinsics, Luminaire, Occupant,
    PatchifyOptions, Scene, Sensor, SensorRole, ShellAlbedo,
};
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm() > 0.1 {
            return v.normalize();
        }
    }
}

fn lsc(rng: &mut ChaCha8Rng) -> Lsc {
    if rng.random_bool(0.5) {
        return Lsc::cosine();
    }
    let mut angles = vec![0.0];
    let mut weights = vec![1.0];
    let mut a: f64 = 0.0;
    for _ in 0..rng.random_range(1..6) {
        a += rng.random_range(1.0..20.0);
        angles.push(a.min(90.0));
        weights.push(rng.random_range(0.0..1.0));
        if a >= 90.0 {
            break;
        }
    }
    Lsc::new(angles, weights).unwrap()
}

fn ldc(rng: &mut ChaCha8Rng) -> Ldc {
    if rng.random_bool(0.5) {
        return downlight_ldc(rng.random_range(10.0..2000.0)).unwrap();
    }
    let polar = vec![0.0, 30.0, 75.0, 180.0];
    let planes = vec![0.0, 90.0, 180.0, 270.0];
    let rows = planes
        .iter()
        .map(|_| polar.iter().map(|_| rng.random_range(0.0..800.0)).collect())
        .collect();
    Ldc::new(polar, planes, rows).unwrap()
}

/// Box room with random photometry, sensors, occupants and camera.
fn random_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = Vec3::new(rng.random_range(2.0..5.0), rng.random_range(2.0..5.0), rng.random_range(2.5..3.5));
    let albedo = ShellAlbedo {
        floor: rng.random_range(0.0..0.99),
        ceiling: rng.random_range(0.0..0.99),
        walls: rng.random_range(0.0..0.99),
    };
    let patches = box_shell(size, rng.random_range(0.7..1.5), albedo, rng.random_range(0..100)).unwrap();
    let inside = |rng: &mut ChaCha8Rng| {
        Vec3::new(
            rng.random_range(0.2..size.x - 0.2),
            rng.random_range(0.2..size.y - 0.2),
            rng.random_range(0.2..size.z - 0.2),
        )
    };
    let luminaires = (0..rng.random_range(1..5))
        .map(|l| Luminaire {
            id: l * 2 + 1,
            position: inside(&mut rng),
            orientation: if rng.random_bool(0.5) {
                Luminaire::downlight_orientation()
            } else {
                *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(unit(&mut rng)), rng.random_range(0.0..6.0)).matrix()
            },
            ldc: ldc(&mut rng),
            power_watts: rng.random_range(0.0..150.0),
            dim: rng.random_range(0.0..=1.0),
        })
        .collect();
    let sensors = (0..rng.random_range(0..4))
        .map(|s| Sensor {
            id: s + 100,
            position: inside(&mut rng),
            facing: unit(&mut rng),
            lsc: lsc(&mut rng),
            role: if rng.random_bool(0.5) { SensorRole::Spatial } else { SensorRole::Gaze },
        })
        .collect();
    let occupants = (0..rng.random_range(0..3))
        .map(|k| Occupant {
            id: k + 1,
            head_position: inside(&mut rng),
            gaze: unit(&mut rng),
            vfoa_aperture_deg: rng.random_range(1.0..179.0),
            lsc: lsc(&mut rng),
        })
        .collect();
    let camera = rng.random_bool(0.5).then(|| Camera {
        intrinsics: Intrinsics {
            fx: rng.random_range(100.0..600.0),
            fy: rng.random_range(100.0..600.0),
            cx: 31.5,
            cy: 23.5,
            width: 64,
            height: 48,
        },
        rotation: Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)),
        position: Vec3::new(size.x / 2.0, size.y / 2.0, size.z - 0.05),
    });
    let scene = Scene {
        patches,
        luminaires,
        sensors,
        occupants,
        camera,
        world_up: Vec3::z(),
    };
    scene.validate().unwrap();
    scene
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scene_round_trip(seed in any::<u64>()) {
        let scene = random_scene(seed);
        let text = save_scene(&scene);
        let back = load_scene(&text).unwrap();
        prop_assert_eq!(&back, &scene);
        prop_assert_eq!(save_scene(&back), text);
    }

    #[test]
    fn albedo_is_scale_consistent(pairs in prop::collection::vec((0.0f64..500.0, 1.0f64..1000.0), 1..20), c in 1.0f64..1e3) {
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|(o, p)| (o * c, p * c)).collect();
        let (a, b) = (albedo_from_observations(&pairs, 1.0), albedo_from_observations(&scaled, 1.0));
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{} vs {}", a, b);
    }

    #[test]
    fn patchify_normals_face_camera(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let camera = Camera {
            intrinsics: Intrinsics { fx: 80.0, fy: 80.0, cx: 31.5, cy: 23.5, width: 64, height: 48 },
            rotation: Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)),
            position: Vec3::new(0.0, 0.0, 3.0),
        };
        // a tilted plane plus a box step
        let (a, b, c) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(1.5..3.0));
        let depth: Vec<f64> = (0..48)
            .flat_map(|v| (0..64).map(move |u| (u, v)))
            .map(|(u, v)| {
                let (x, y) = ((u as f64 - 31.5) / 80.0, (v as f64 - 23.5) / 80.0);
                let z = c + a * x * c + b * y * c;
                if (20..30).contains(&u) && (10..20).contains(&v) { z - 0.6 } else { z }
            })
            .collect();
        let patches = patchify_depth(&DepthImage::new(64, 48, depth).unwrap(), &camera, 0.3, &PatchifyOptions::default()).unwrap();
        prop_assert!(!patches.is_empty());
        for p in &patches {
            prop_assert!((p.normal.norm() - 1.0).abs() <= 1e-9);
            prop_assert!(p.normal.dot(&(camera.position - p.center)) > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn radiosity_properties(seed in any::<u64>(), alpha in 0.0f64..3.0, beta in 0.0f64..3.0) {
        let scene = random_scene(seed);
        let accel = AccelIndex::build(&scene.patches).unwrap();
        let ff = form_factor_matrix(&scene.patches, &accel, 4).unwrap();
        let rho = scene.albedo();
        let dense = RadiositySystem::new(&ff, &rho, SolverOptions::default()).unwrap();
        let iterative = RadiositySystem::new(&ff, &rho, SolverOptions { dense_limit: 0, ..SolverOptions::default() }).unwrap();
        prop_assert!(dense.is_dense() && !iterative.is_dense());

        let n = scene.patches.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let e1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
        let e2: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.3) { rng.random_range(0.0..500.0) } else { 0.0 }).collect();
        let combined: Vec<f64> = e1.iter().zip(&e2).map(|(x, y)| alpha * x + beta * y).collect();
        let (b1, b2) = (dense.solve(&e1).unwrap(), dense.solve(&e2).unwrap());
        let b = dense.solve(&combined).unwrap();
        let recombined: Vec<f64> = b1.exitance.iter().zip(&b2.exitance).map(|(x, y)| alpha * x + beta * y).collect();
        prop_assert!(rel_err(&recombined, &b.exitance) < 1e-9);

        // solver independence
        let bi = iterative.solve(&combined).unwrap();
        prop_assert!(rel_err(&bi.exitance, &b.exitance) < 1e-8, "{}", rel_err(&bi.exitance, &b.exitance));
        prop_assert!(b.residual < 1e-8 && bi.residual < 1e-8);

        // nonnegative, interreflection only adds light, energy bounded
        let areas = ff.areas();
        let rho_max = rho.iter().cloned().fold(0.0, f64::max);
        let (mut out, mut inp) = (0.0, 0.0);
        for i in 0..n {
            prop_assert!(b.exitance[i] >= 0.0);
            prop_assert!(b.exitance[i] >= rho[i] * combined[i] - 1e-9);
            out += areas[i] * b.exitance[i];
            inp += areas[i] * rho[i] * combined[i];
        }
        prop_assert!(out <= inp / (1.0 - rho_max) * (1.0 + 1e-9) + 1e-9, "{} > {}", out, inp / (1.0 - rho_max));
    }

    #[test]
    fn dims_monotone_and_luxmeter_linear(seed in any::<u64>()) {
        let scene = random_scene(seed);
        let accel = AccelIndex::build(&scene.patches).unwrap();
        let basis = build_basis(&scene, &accel, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let l = scene.luminaires.len();
        let d1: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..0.5)).collect();
        let d2: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..0.5)).collect();
        let sum: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();

        // raising dims never lowers any exitance
        let (lo, hi) = (basis.exitance(&d1).unwrap(), basis.exitance(&sum).unwrap());
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(*b >= *a - 1e-12 * a.abs().max(1.0));
        }
        let direct = emission_vector(&scene, &sum, &accel).unwrap();
        prop_assert!(rel_err(&hi, &basis.system().solve(&direct.values).unwrap().exitance) < 1e-8);

        let pose = SensorPose { position: Vec3::new(1.0, 1.0, 1.2), facing: unit(&mut rng) };
        let cfg = LuxmeterConfig { n_rays: 3000, ..LuxmeterConfig::default() };
        let lsc = Lsc::cosine();
        let read = |d: &[f64]| ils_core::perception::virtual_luxmeter(&scene, PatchField::Basis(&basis), &pose, &lsc, d, &accel, &cfg).unwrap();
        let (r1, r2, r) = (read(&d1), read(&d2), read(&sum));
        prop_assert!((r.total - r.patch_term - r.direct_term).abs() <= 1e-9 * r.total.max(1.0));
        let parts = r1.total + r2.total;
        prop_assert!((r.total - parts).abs() <= 1e-12 * parts.max(1e-300), "{} vs {}", r.total, parts);
    }
}
