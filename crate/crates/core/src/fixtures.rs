//! Bundled synthetic scenes.

use nalgebra::Matrix3;

use crate::error::Result;
use crate::geom::Vec3;
use crate::photometry::{Ldc, Lsc};
use crate::scene::{box_shell, Camera, Intrinsics, Luminaire, Occupant, Scene, Sensor, SensorRole, ShellAlbedo, DEFAULT_VFOA_APERTURE_DEG};

pub const ROOM8_SIZE: [f64; 3] = [6.0, 4.0, 3.0];
pub const ROOM8_PATCH_SIZE: f64 = 0.5;
/// Peak downward intensity of the room's luminaires, cd.
pub const ROOM8_PEAK_CD: f64 = 955.0;

/// Cosine-shaped downlight distribution tabulated every 10°.
pub fn downlight_ldc(peak_cd: f64) -> Result<Ldc> {
    let polar: Vec<f64> = (0..=9).map(|k| 10.0 * k as f64).collect();
    // exact zero at the horizon rather than cos(π/2) round-off
    let row = polar
        .iter()
        .map(|g: &f64| if *g >= 90.0 { 0.0 } else { peak_cd * g.to_radians().cos() })
        .collect();
    Ldc::new(polar, vec![0.0], vec![row])
}

fn unit(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z).normalize()
}

/// Office room 6 × 4 × 3 m with eight ceiling downlights, nine desk-height
/// spatial sensors, two occupants wearing forehead sensors and a top-view
/// depth camera.
pub fn room8() -> Result<Scene> {
    room8_with_patch_size(ROOM8_PATCH_SIZE)
}

pub fn room8_with_patch_size(patch_size: f64) -> Result<Scene> {
    let [sx, sy, sz] = ROOM8_SIZE;
    let albedo = ShellAlbedo {
        floor: 0.3,
        ceiling: 0.8,
        walls: 0.6,
    };
    let patches = box_shell(Vec3::new(sx, sy, sz), patch_size, albedo, 0)?;
    let ldc = downlight_ldc(ROOM8_PEAK_CD)?;
    let mut luminaires = Vec::new();
    for y in [1.0, 3.0] {
        for x in [0.75, 2.25, 3.75, 5.25] {
            luminaires.push(Luminaire {
                id: luminaires.len() as u32 + 1,
                position: Vec3::new(x, y, sz - 0.1),
                orientation: Luminaire::downlight_orientation(),
                ldc: ldc.clone(),
                power_watts: crate::ils::DEFAULT_LUMINAIRE_WATTS,
                dim: 1.0,
            });
        }
    }
    let mut sensors = Vec::new();
    for y in [1.0, 2.0, 3.0] {
        for x in [1.5, 3.0, 4.5] {
            sensors.push(Sensor {
                id: sensors.len() as u32 + 1,
                position: Vec3::new(x, y, 0.75),
                facing: Vec3::z(),
                lsc: Lsc::cosine(),
                role: SensorRole::Spatial,
            });
        }
    }
    let occupants = vec![
        Occupant {
            id: 1,
            head_position: Vec3::new(1.2, 1.5, 1.2),
            gaze: unit(1.0, 0.0, 0.45),
            vfoa_aperture_deg: DEFAULT_VFOA_APERTURE_DEG,
            lsc: Lsc::cosine(),
        },
        Occupant {
            id: 2,
            head_position: Vec3::new(4.6, 2.6, 1.7),
            gaze: unit(-0.6, 0.8, 0.3),
            vfoa_aperture_deg: DEFAULT_VFOA_APERTURE_DEG,
            lsc: Lsc::cosine(),
        },
    ];
    for o in &occupants {
        sensors.push(Sensor {
            id: 9 + o.id,
            position: o.head_position,
            facing: o.gaze,
            lsc: Lsc::cosine(),
            role: SensorRole::Gaze,
        });
    }
    let camera = Camera {
        intrinsics: Intrinsics {
            fx: 365.0,
            fy: 365.0,
            cx: 255.5,
            cy: 211.5,
            width: 512,
            height: 424,
        },
        // looking straight down, image +x along world +x
        rotation: Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)),
        position: Vec3::new(sx / 2.0, sy / 2.0, sz - 0.05),
    };
    let scene = Scene {
        patches,
        luminaires,
        sensors,
        occupants,
        camera: Some(camera),
        world_up: Vec3::z(),
    };
    scene.validate()?;
    Ok(scene)
}

/// Closed box with uniform albedo and no luminaires.
pub fn closed_cube(edge: f64, patch_size: f64, albedo: f64) -> Result<Scene> {
    let patches = box_shell(Vec3::new(edge, edge, edge), patch_size, ShellAlbedo::uniform(albedo), 0)?;
    Ok(Scene { patches, ..Scene::default() })
}
