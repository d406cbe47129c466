use ils_core::accel::AccelIndex;
use ils_core::fixtures::{closed_cube, room8};
use ils_core::geom::Vec3;
use ils_core::ils::contribution_matrix;
use ils_core::perception::{virtual_luxmeter, LuxmeterConfig, PatchField, SensorPose};
use ils_core::photometry::Lsc;
use ils_core::radiosity::build_basis;

/// `2B ∫₀^{π/2} lsc(θ) sin θ dθ` by composite Simpson: the reading of a
/// sensor surrounded by a uniform Lambertian emitter of exitance `B`.
fn enclosure_oracle(lsc: &Lsc, b: f64) -> f64 {
    let n = 20_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |k: usize| {
        let t = k as f64 * h;
        lsc.eval(t.to_degrees()) * t.sin()
    };
    let mut s = f(0) + f(n);
    for k in 1..n {
        s += f(k) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * b * s * h / 3.0
}

fn enclosure_reading(lsc: &Lsc, facing: Vec3, n_rays: usize) -> f64 {
    let scene = closed_cube(2.0, 0.25, 0.5).unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let b = vec![500.0; scene.patches.len()];
    let pose = SensorPose {
        position: Vec3::new(0.9, 1.1, 1.05),
        facing,
    };
    let cfg = LuxmeterConfig {
        n_rays,
        ..LuxmeterConfig::default()
    };
    virtual_luxmeter(&scene, PatchField::Exitance(&b), &pose, lsc, &[], &accel, &cfg)
        .unwrap()
        .total
}

#[test]
fn uniform_enclosure_cosine() {
    let lsc = Lsc::cosine();
    let oracle = enclosure_oracle(&lsc, 500.0);
    assert!((oracle - 500.0).abs() < 1.0, "{oracle}");
    for facing in [Vec3::z(), -Vec3::x(), Vec3::new(1.0, 2.0, -0.5).normalize()] {
        let got = enclosure_reading(&lsc, facing, 100_000);
        assert!((got - 500.0).abs() / 500.0 < 0.02, "{got}");
        assert!((got - oracle).abs() / oracle < 2e-3, "{got} vs {oracle}");
    }
}

#[test]
fn uniform_enclosure_custom_curve() {
    let lsc = Lsc::new(vec![0.0, 20.0, 45.0, 70.0, 80.0], vec![1.0, 0.97, 0.6, 0.2, 0.0]).unwrap();
    let oracle = enclosure_oracle(&lsc, 500.0);
    let got = enclosure_reading(&lsc, Vec3::y(), 100_000);
    assert!((got - oracle).abs() / oracle < 2e-3, "{got} vs {oracle}");
}

#[test]
fn more_rays_converge() {
    let lsc = Lsc::cosine();
    let oracle = enclosure_oracle(&lsc, 500.0);
    let coarse = (enclosure_reading(&lsc, Vec3::z(), 500) - oracle).abs();
    let fine = (enclosure_reading(&lsc, Vec3::z(), 50_000) - oracle).abs();
    assert!(fine <= coarse + 1e-9, "{fine} > {coarse}");
}

#[test]
fn contribution_matrix_matches_single_readings() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 16).unwrap();
    let cfg = LuxmeterConfig {
        n_rays: 4000,
        ..LuxmeterConfig::default()
    };
    let a = contribution_matrix(&scene, &basis, &accel, &cfg).unwrap();
    assert_eq!(a.a.len(), 2);
    for (k, occupant) in scene.occupants.iter().enumerate() {
        let pose = SensorPose {
            position: occupant.head_position,
            facing: occupant.gaze,
        };
        for l in 0..8 {
            let mut dims = vec![0.0; 8];
            dims[l] = 1.0;
            let single = virtual_luxmeter(&scene, PatchField::Basis(&basis), &pose, &occupant.lsc, &dims, &accel, &cfg)
                .unwrap()
                .total;
            assert!((a.a[k][l] - single).abs() <= 1e-9 * single.max(1.0), "{k} {l}: {} vs {single}", a.a[k][l]);
            assert!(a.a[k][l] >= 0.0);
        }
        let all = virtual_luxmeter(&scene, PatchField::Basis(&basis), &pose, &occupant.lsc, &[1.0; 8], &accel, &cfg)
            .unwrap()
            .total;
        let sum: f64 = a.a[k].iter().sum();
        assert!((a.full_lit[k] - sum).abs() <= 1e-9 * sum);
        assert!((all - sum).abs() <= 1e-9 * sum, "{all} vs {sum}");
    }
}

#[test]
fn dark_room_reads_zero() {
    let scene = room8().unwrap();
    let accel = AccelIndex::build(&scene.patches).unwrap();
    let basis = build_basis(&scene, &accel, 4).unwrap();
    let o = &scene.occupants[0];
    let pose = SensorPose {
        position: o.head_position,
        facing: o.gaze,
    };
    let r = virtual_luxmeter(
        &scene,
        PatchField::Basis(&basis),
        &pose,
        &o.lsc,
        &[0.0; 8],
        &accel,
        &LuxmeterConfig::default(),
    )
    .unwrap();
    assert_eq!(r.total, 0.0);
}
