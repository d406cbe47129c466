use std::f64::consts::PI;

use ils_core::accel::AccelIndex;
use ils_core::fixtures::{closed_cube, room8};
use ils_core::geom::Vec3;
use ils_core::radiosity::{build_basis, emission_vector, form_factor, form_factor_matrix, RadiositySystem, SolverOptions};
use ils_core::scene::Patch;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn closed_cube_row_sums_and_uniform_exitance() {
    let scene = closed_cube(1.0, 0.25, 0.5).unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let ff = form_factor_matrix(&scene.patches, &accel, 16).unwrap();
    let sums = ff.row_sums();
    let (lo, hi) = sums.iter().fold((f64::MAX, f64::MIN), |(l, h), s| (l.min(*s), h.max(*s)));
    assert!(lo >= 0.97 && hi <= 1.001, "row sums in [{lo}, {hi}]");

    let n = scene.patches.len();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (ff.areas()[i] * ff.get(i, j), ff.areas()[j] * ff.get(j, i));
            assert!((a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-300), "{i} {j}");
        }
    }

    // ρ = 1/2 and a perfect enclosure give B = ρE / (1 − ρ) = E
    let system = RadiositySystem::new(&ff, &scene.albedo(), SolverOptions::default()).unwrap();
    let b = system.solve(&vec![100.0; n]).unwrap().exitance;
    let mean = b.iter().sum::<f64>() / n as f64;
    for v in &b {
        assert!(rel(*v, mean) < 0.02, "{v} vs mean {mean}");
    }
    assert!(rel(mean, 100.0) < 0.03, "{mean}");
}

fn square(id: u32, center: Vec3, normal: Vec3) -> Patch {
    Patch::new(id, center, normal, Vec3::x(), [0.5, 0.5], 0.5).unwrap()
}

/// Cosine-weighted hemisphere shooting from uniform points on the emitter,
/// counting hits on the receiver square by direct intersection.
fn shooting_oracle(samples: usize, gap: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let (x, y) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let r = u1.sqrt();
        let phi = 2.0 * PI * u2;
        let (dx, dy, dz) = (r * phi.cos(), r * phi.sin(), (1.0 - u1).sqrt());
        if dz <= 0.0 {
            continue;
        }
        let t = gap / dz;
        let (hx, hy) = (x + t * dx, y + t * dy);
        if hx.abs() <= 0.5 && hy.abs() <= 0.5 {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

/// Closed form for coaxial parallel unit squares one unit apart.
fn parallel_squares_exact() -> f64 {
    let (x, y) = (1.0f64, 1.0f64);
    let (xx, yy) = (1.0 + x * x, 1.0 + y * y);
    2.0 / (PI * x * y)
        * (((xx * yy) / (1.0 + x * x + y * y)).sqrt().ln() + x * yy.sqrt() * (x / yy.sqrt()).atan() + y * xx.sqrt() * (y / xx.sqrt()).atan()
            - x * x.atan()
            - y * y.atan())
}

#[test]
fn parallel_unit_squares() {
    let exact = parallel_squares_exact();
    assert!((exact - 0.19982).abs() < 1e-5, "{exact}");
    let oracle = shooting_oracle(1_000_000, 1.0, 7);
    assert!(rel(oracle, exact) < 0.02, "oracle {oracle}");

    let a = square(0, Vec3::zeros(), Vec3::z());
    let b = square(1, Vec3::new(0.0, 0.0, 1.0), -Vec3::z());
    let accel = AccelIndex::build(&[a.clone(), b.clone()]).unwrap();
    let f = form_factor(&a, &b, &accel, 16);
    assert!(rel(f, oracle) < 0.02, "engine {f} oracle {oracle}");
    let ff = form_factor_matrix(&[a, b], &accel, 16).unwrap();
    assert!(rel(ff.get(0, 1), ff.get(1, 0)) < 1e-12);
}

#[test]
fn occluder_blocks_exchange() {
    let a = square(0, Vec3::zeros(), Vec3::z());
    let b = square(1, Vec3::new(0.0, 0.0, 1.0), -Vec3::z());
    let wall = Patch::new(2, Vec3::new(0.0, 0.0, 0.5), Vec3::z(), Vec3::x(), [2.0, 2.0], 0.5).unwrap();
    let patches = vec![a.clone(), b.clone(), wall];
    let accel = AccelIndex::build(&patches).unwrap();
    assert_eq!(form_factor(&a, &b, &accel, 16), 0.0);
}

/// Downlight table interpolated independently of the engine.
fn room8_intensity(gamma_deg: f64) -> f64 {
    if gamma_deg >= 90.0 {
        return 0.0;
    }
    let node = |k: usize| if k >= 9 { 0.0 } else { 955.0 * (10.0 * k as f64).to_radians().cos() };
    let k = (gamma_deg / 10.0).floor() as usize;
    let t = gamma_deg / 10.0 - k as f64;
    node(k) * (1.0 - t) + node(k + 1) * t
}

#[test]
fn room8_emission_matches_double_loop() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let dims = vec![1.0; scene.luminaires.len()];
    let e = emission_vector(&scene, &dims, &accel).unwrap().values;
    for (i, p) in scene.patches.iter().enumerate() {
        let mut expect = 0.0;
        for l in &scene.luminaires {
            let d = p.center - l.position;
            let r2 = d.norm_squared();
            let cos_in = -d.dot(&p.normal) / r2.sqrt();
            if cos_in <= 0.0 {
                continue;
            }
            // downlight axis points to −Z; the room is an empty convex box
            let gamma = (-d.z / r2.sqrt()).clamp(-1.0, 1.0).acos().to_degrees();
            expect += room8_intensity(gamma) * cos_in / r2;
        }
        assert!((e[i] - expect).abs() <= 1e-9 * expect.max(1.0), "patch {}: {} vs {expect}", p.id, e[i]);
    }
}

#[test]
fn superposition_matches_direct_solves() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut worst: f64 = 0.0;
    for _ in 0..24 {
        let dims: Vec<f64> = (0..scene.luminaires.len()).map(|_| rng.random::<f64>()).collect();
        let combined = basis.exitance(&dims).unwrap();
        let emission = emission_vector(&scene, &dims, &accel).unwrap();
        let direct = basis.system().solve(&emission.values).unwrap().exitance;
        let num: f64 = combined.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = direct.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn room8_residuals_and_row_sums() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 16).unwrap();
    assert!(basis.max_residual() < 1e-8);
    for s in basis.form_factors().row_sums() {
        assert!((0.95..=1.001).contains(&s), "{s}");
    }
    let b = basis.exitance(&[1.0; 8]).unwrap();
    assert!(b.iter().all(|v| *v >= 0.0 && v.is_finite()));
}

#[test]
fn row_sums_hold_for_small_sample_counts() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    for n in [1, 2, 4, 9] {
        let ff = form_factor_matrix(&scene.patches, &accel, n).unwrap();
        let max = ff.row_sums().into_iter().fold(0.0, f64::max);
        assert!(max <= 1.001, "{n}: {max}");
    }
}
