//! World model: patches, luminaires, sensors, occupants and the camera.

mod albedo;
pub mod builders;
mod depth;
mod format;

use std::collections::HashSet;

use nalgebra::Matrix3;

pub use albedo::{albedo_from_observations, estimate_albedo, AlbedoOptions, IntensityImage};
pub use builders::{body_box, box_shell, subdivide_rect, ShellAlbedo};
pub use depth::{patchify_depth, CameraSidecar, DepthImage, PatchifyOptions};
pub use format::{load_scene, load_scene_file, load_scene_with_base, save_scene, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::photometry::{Ldc, Lsc};

/// Default patch edge length used when discretizing surfaces, in meters.
pub const DEFAULT_PATCH_SIZE: f64 = 0.25;

/// Reflectance ceiling: albedo is clamped to `1 - ALBEDO_EPSILON`.
pub const ALBEDO_EPSILON: f64 = 1e-3;

/// Oriented rectangle; the radiosity unknown lives here.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub id: u32,
    pub center: Vec3,
    pub normal: Vec3,
    /// First in-plane axis; the second is `normal × tangent`.
    pub tangent: Vec3,
    pub half_extents: [f64; 2],
    pub albedo: f64,
}

impl Patch {
    pub fn new(id: u32, center: Vec3, normal: Vec3, tangent: Vec3, half_extents: [f64; 2], albedo: f64) -> Result<Self> {
        let patch = Patch {
            id,
            center,
            normal,
            tangent,
            half_extents,
            albedo,
        };
        patch.validate()?;
        Ok(patch)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invariant("patch", self.id, m));
        if !geom::is_finite(&self.center) {
            return fail("center is not finite");
        }
        if !geom::is_unit(&self.normal) {
            return fail("normal is not unit length");
        }
        if !geom::is_unit(&self.tangent) || self.tangent.dot(&self.normal).abs() > geom::UNIT_TOL {
            return fail("tangent is not a unit vector orthogonal to the normal");
        }
        if !self.half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            return fail("half extents must be positive");
        }
        if !(self.albedo >= 0.0 && self.albedo < 1.0) {
            return fail(&format!("albedo {} outside [0, 1)", self.albedo));
        }
        Ok(())
    }

    pub fn bitangent(&self) -> Vec3 {
        self.normal.cross(&self.tangent)
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_extents[0] * self.half_extents[1]
    }

    /// Point at local coordinates `(s, t)` in `[-1, 1]²`.
    pub fn point_at(&self, s: f64, t: f64) -> Vec3 {
        self.center + self.tangent * (s * self.half_extents[0]) + self.bitangent() * (t * self.half_extents[1])
    }

    /// Corners in counter-clockwise order seen from the front side.
    pub fn corners(&self) -> [Vec3; 4] {
        [
            self.point_at(-1.0, -1.0),
            self.point_at(1.0, -1.0),
            self.point_at(1.0, 1.0),
            self.point_at(-1.0, 1.0),
        ]
    }

    /// Plane offset `normal · center`.
    pub fn offset(&self) -> f64 {
        self.normal.dot(&self.center)
    }
}

/// A point luminaire shaped by a light distribution curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Luminaire {
    pub id: u32,
    pub position: Vec3,
    /// Luminaire frame → world.
    pub orientation: Matrix3<f64>,
    pub ldc: Ldc,
    pub power_watts: f64,
    pub dim: f64,
}

impl Luminaire {
    /// Orientation of a ceiling downlight: local +Z (emission axis) points
    /// along world −Z.
    pub fn downlight_orientation() -> Matrix3<f64> {
        geom::mat3([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invariant("luminaire", self.id, m));
        if !geom::is_finite(&self.position) {
            return fail("position is not finite");
        }
        if !geom::is_rotation(&self.orientation) {
            return fail("orientation is not a proper rotation");
        }
        if !(self.power_watts.is_finite() && self.power_watts >= 0.0) {
            return fail("power must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.dim) {
            return fail("dim must lie in [0, 1]");
        }
        Ok(())
    }

    /// Intensity (cd) emitted towards the world-space unit `direction`, at full output.
    pub fn intensity_towards(&self, direction: &Vec3) -> f64 {
        self.ldc.eval(&(self.orientation.transpose() * direction))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensorRole {
    /// Fixed luxmeter measuring the spatial field.
    Spatial,
    /// Luxmeter worn at an occupant's forehead.
    Gaze,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub id: u32,
    pub position: Vec3,
    pub facing: Vec3,
    pub lsc: Lsc,
    pub role: SensorRole,
}

impl Sensor {
    pub fn validate(&self) -> Result<()> {
        if !geom::is_finite(&self.position) {
            return Err(Error::invariant("sensor", self.id, "position is not finite"));
        }
        if !geom::is_unit(&self.facing) {
            return Err(Error::invariant("sensor", self.id, "facing is not unit length"));
        }
        Ok(())
    }
}

/// Default full aperture of the attention cone, degrees.
pub const DEFAULT_VFOA_APERTURE_DEG: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Occupant {
    pub id: u32,
    pub head_position: Vec3,
    pub gaze: Vec3,
    pub vfoa_aperture_deg: f64,
    pub lsc: Lsc,
}

impl Occupant {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invariant("occupant", self.id, m));
        if !geom::is_finite(&self.head_position) {
            return fail("head position is not finite");
        }
        if !geom::is_unit(&self.gaze) {
            return fail("gaze is not unit length");
        }
        if !(self.vfoa_aperture_deg > 0.0 && self.vfoa_aperture_deg < 180.0) {
            return fail("aperture must lie in (0, 180) degrees");
        }
        Ok(())
    }
}

/// Pinhole intrinsics in pixels. Camera frame: +X right, +Y down, +Z forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    /// Camera frame → world.
    pub rotation: Matrix3<f64>,
    pub position: Vec3,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        let k = &self.intrinsics;
        let fail = |m: &str| Err(Error::invariant("camera", 0, m));
        if !(k.fx.is_finite() && k.fy.is_finite() && k.fx > 0.0 && k.fy > 0.0) {
            return fail("focal lengths must be positive");
        }
        if !(k.cx.is_finite() && k.cy.is_finite()) {
            return fail("principal point is not finite");
        }
        if !geom::is_rotation(&self.rotation) {
            return fail("rotation is not a proper rotation");
        }
        if !geom::is_finite(&self.position) {
            return fail("position is not finite");
        }
        Ok(())
    }

    /// Camera-frame point for pixel `(u, v)` at depth `z` (meters along +Z).
    pub fn back_project_camera(&self, u: f64, v: f64, z: f64) -> Vec3 {
        let k = &self.intrinsics;
        Vec3::new((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z)
    }

    pub fn back_project(&self, u: f64, v: f64, z: f64) -> Vec3 {
        self.rotation * self.back_project_camera(u, v, z) + self.position
    }

    /// Pixel coordinates of a world point, `None` if behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let c = self.rotation.transpose() * (p - self.position);
        if c.z <= 0.0 {
            return None;
        }
        let k = &self.intrinsics;
        Some((k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy))
    }
}

/// Occupant bodies as box occluders around the head position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyModel {
    pub radius: f64,
    pub albedo: f64,
    /// Height of the floor along `world_up`.
    pub floor: f64,
    /// Gap between the top of the body box and the head point.
    pub neck: f64,
}

impl Default for BodyModel {
    fn default() -> Self {
        BodyModel {
            radius: 0.20,
            albedo: 0.3,
            floor: 0.0,
            neck: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub patches: Vec<Patch>,
    pub luminaires: Vec<Luminaire>,
    pub sensors: Vec<Sensor>,
    pub occupants: Vec<Occupant>,
    pub camera: Option<Camera>,
    pub world_up: Vec3,
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            patches: Vec::new(),
            luminaires: Vec::new(),
            sensors: Vec::new(),
            occupants: Vec::new(),
            camera: None,
            world_up: Vec3::z(),
        }
    }
}

impl Scene {
    /// Checks every entity invariant and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        if !geom::is_unit(&self.world_up) {
            return Err(Error::InvalidArgument("world_up is not unit length".into()));
        }
        unique("patch", self.patches.iter().map(|p| p.id))?;
        unique("luminaire", self.luminaires.iter().map(|l| l.id))?;
        unique("sensor", self.sensors.iter().map(|s| s.id))?;
        unique("occupant", self.occupants.iter().map(|o| o.id))?;
        self.patches.iter().try_for_each(Patch::validate)?;
        self.luminaires.iter().try_for_each(Luminaire::validate)?;
        self.sensors.iter().try_for_each(Sensor::validate)?;
        self.occupants.iter().try_for_each(Occupant::validate)?;
        if let Some(camera) = &self.camera {
            camera.validate()?;
        }
        Ok(())
    }

    pub fn albedo(&self) -> Vec<f64> {
        self.patches.iter().map(|p| p.albedo).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.luminaires.iter().map(|l| l.power_watts).collect()
    }

    pub fn dims(&self) -> Vec<f64> {
        self.luminaires.iter().map(|l| l.dim).collect()
    }

    pub fn patch_index(&self, id: u32) -> Option<usize> {
        self.patches.iter().position(|p| p.id == id)
    }

    /// Returns a copy with patch albedos replaced (clamped to `[0, 1 − ε]`).
    pub fn with_albedo(&self, albedo: &[f64]) -> Result<Scene> {
        if albedo.len() != self.patches.len() {
            return Err(Error::Dimension {
                what: "albedo vector",
                expected: self.patches.len(),
                got: albedo.len(),
            });
        }
        let mut scene = self.clone();
        for (p, a) in scene.patches.iter_mut().zip(albedo) {
            p.albedo = a.clamp(0.0, 1.0 - ALBEDO_EPSILON);
        }
        Ok(scene)
    }

    /// Returns a copy with six occluder patches per occupant appended.
    pub fn with_occupant_bodies(&self, model: &BodyModel) -> Result<Scene> {
        let mut scene = self.clone();
        let mut next_id = self.patches.iter().map(|p| p.id).max().map_or(0, |m| m + 1);
        for occupant in &self.occupants {
            for patch in builders::body_box(occupant, &self.world_up, model, next_id)? {
                next_id = patch.id + 1;
                scene.patches.push(patch);
            }
        }
        Ok(scene)
    }
}

fn unique(entity: &'static str, ids: impl Iterator<Item = u32>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId { entity, id: id.into() });
        }
    }
    Ok(())
}
