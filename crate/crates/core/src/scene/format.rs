//! JSON scene document.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "world_up": [0, 0, 1],
//!   "camera": { "intrinsics": {...}, "position": [..], "rotation": [[..],[..],[..]] },
//!   "patches": [ { "id", "center", "normal", "tangent", "half_extents", "albedo" } ],
//!   "luminaires": [ { "id", "position", "rotation"?, "ldc", "power_watts", "dim"? } ],
//!   "sensors": [ { "id", "position", "facing", "role", "lsc"? } ],
//!   "occupants": [ { "id", "head_position", "gaze", "vfoa_aperture_deg"?, "lsc"? } ]
//! }
//! ```
//!
//! `ldc` is one of `{"isotropic_lm": f}`, `{"table": {...}}` or `{"file": "x.csv"}`;
//! `lsc` is `"cosine"`, `{"table": {...}}` or `{"file": "x.csv"}`. File
//! references are resolved relative to the scene file's directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{arr3, mat3, rows3, vec3};
use crate::photometry::{Ldc, Lsc};
use crate::scene::{Camera, Intrinsics, Luminaire, Occupant, Patch, Scene, Sensor, SensorRole, DEFAULT_VFOA_APERTURE_DEG};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    schema_version: u32,
    #[serde(default = "default_up")]
    world_up: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    camera: Option<CameraDoc>,
    #[serde(default)]
    patches: Vec<PatchDoc>,
    #[serde(default)]
    luminaires: Vec<LuminaireDoc>,
    #[serde(default)]
    sensors: Vec<SensorDoc>,
    #[serde(default)]
    occupants: Vec<OccupantDoc>,
}

fn default_up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_dim() -> f64 {
    1.0
}

fn default_aperture() -> f64 {
    DEFAULT_VFOA_APERTURE_DEG
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct IntrinsicsDoc {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraDoc {
    intrinsics: IntrinsicsDoc,
    position: [f64; 3],
    rotation: [[f64; 3]; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchDoc {
    id: u32,
    center: [f64; 3],
    normal: [f64; 3],
    tangent: [f64; 3],
    half_extents: [f64; 2],
    albedo: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LdcTableDoc {
    polar_deg: Vec<f64>,
    azimuth_deg: Vec<f64>,
    candela: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LdcSource {
    IsotropicLm(f64),
    Table(LdcTableDoc),
    File(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LscTableDoc {
    angles_deg: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LscSource {
    #[default]
    Cosine,
    Table(LscTableDoc),
    File(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LuminaireDoc {
    id: u32,
    position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<[[f64; 3]; 3]>,
    ldc: LdcSource,
    power_watts: f64,
    #[serde(default = "default_dim")]
    dim: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RoleDoc {
    Spatial,
    Gaze,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorDoc {
    id: u32,
    position: [f64; 3],
    facing: [f64; 3],
    role: RoleDoc,
    #[serde(default)]
    lsc: LscSource,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OccupantDoc {
    id: u32,
    head_position: [f64; 3],
    gaze: [f64; 3],
    #[serde(default = "default_aperture")]
    vfoa_aperture_deg: f64,
    #[serde(default)]
    lsc: LscSource,
}

/// Parses a scene document that carries all tables inline.
pub fn load_scene(document: &str) -> Result<Scene> {
    load_scene_with_base(document, None)
}

/// Reads and parses a scene file, resolving table file references relative
/// to its directory.
pub fn load_scene_file(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scene_with_base(&text, Some(path.parent().unwrap_or(Path::new("."))))
}

/// Parses a scene document; `base` is the directory used for table file
/// references (`None` rejects them).
pub fn load_scene_with_base(document: &str, base: Option<&Path>) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let doc: SceneDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            what: "scene",
            line: (inner.line() > 0).then_some(inner.line()),
            path: if path == "." { String::new() } else { path },
            message: inner.to_string(),
        }
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse {
            what: "scene",
            line: None,
            path: "schema_version".into(),
            message: format!("unsupported schema version {} (expected {SCHEMA_VERSION})", doc.schema_version),
        });
    }
    let scene = from_doc(doc, base)?;
    scene.validate()?;
    Ok(scene)
}

/// Serializes a scene with every table written inline.
pub fn save_scene(scene: &Scene) -> String {
    let doc = to_doc(scene);
    let mut text = serde_json::to_string_pretty(&doc).expect("scene serializes");
    text.push('\n');
    text
}

fn read_table(base: Option<&Path>, file: &str, entity: &'static str, id: u32) -> Result<String> {
    let base = base.ok_or_else(|| Error::invariant(entity, id, format!("table file `{file}` cannot be resolved without a base directory")))?;
    let path = base.join(file);
    std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
}

fn resolve_ldc(src: LdcSource, base: Option<&Path>, id: u32) -> Result<Ldc> {
    let wrap = |e: Error| match e {
        Error::InvalidArgument(m) => Error::invariant("luminaire", id, m),
        other => other,
    };
    match src {
        LdcSource::IsotropicLm(flux) => Ldc::isotropic(flux).map_err(wrap),
        LdcSource::Table(t) => Ldc::new(t.polar_deg, t.azimuth_deg, t.candela).map_err(wrap),
        LdcSource::File(f) => Ldc::from_csv(&read_table(base, &f, "luminaire", id)?),
    }
}

fn resolve_lsc(src: LscSource, base: Option<&Path>, entity: &'static str, id: u32) -> Result<Lsc> {
    match src {
        LscSource::Cosine => Ok(Lsc::cosine()),
        LscSource::Table(t) => Lsc::new(t.angles_deg, t.weights).map_err(|e| Error::invariant(entity, id, e.to_string())),
        LscSource::File(f) => Lsc::from_csv(&read_table(base, &f, entity, id)?),
    }
}

fn from_doc(doc: SceneDoc, base: Option<&Path>) -> Result<Scene> {
    let patches = doc
        .patches
        .into_iter()
        .map(|p| Patch {
            id: p.id,
            center: vec3(p.center),
            normal: vec3(p.normal),
            tangent: vec3(p.tangent),
            half_extents: p.half_extents,
            albedo: p.albedo,
        })
        .collect();
    let luminaires = doc
        .luminaires
        .into_iter()
        .map(|l| {
            Ok(Luminaire {
                id: l.id,
                position: vec3(l.position),
                orientation: l.rotation.map(mat3).unwrap_or_else(Luminaire::downlight_orientation),
                ldc: resolve_ldc(l.ldc, base, l.id)?,
                power_watts: l.power_watts,
                dim: l.dim,
            })
        })
        .collect::<Result<_>>()?;
    let sensors = doc
        .sensors
        .into_iter()
        .map(|s| {
            Ok(Sensor {
                id: s.id,
                position: vec3(s.position),
                facing: vec3(s.facing),
                lsc: resolve_lsc(s.lsc, base, "sensor", s.id)?,
                role: match s.role {
                    RoleDoc::Spatial => SensorRole::Spatial,
                    RoleDoc::Gaze => SensorRole::Gaze,
                },
            })
        })
        .collect::<Result<_>>()?;
    let occupants = doc
        .occupants
        .into_iter()
        .map(|o| {
            Ok(Occupant {
                id: o.id,
                head_position: vec3(o.head_position),
                gaze: vec3(o.gaze),
                vfoa_aperture_deg: o.vfoa_aperture_deg,
                lsc: resolve_lsc(o.lsc, base, "occupant", o.id)?,
            })
        })
        .collect::<Result<_>>()?;
    let camera = doc.camera.map(|c| Camera {
        intrinsics: Intrinsics {
            fx: c.intrinsics.fx,
            fy: c.intrinsics.fy,
            cx: c.intrinsics.cx,
            cy: c.intrinsics.cy,
            width: c.intrinsics.width,
            height: c.intrinsics.height,
        },
        rotation: mat3(c.rotation),
        position: vec3(c.position),
    });
    Ok(Scene {
        patches,
        luminaires,
        sensors,
        occupants,
        camera,
        world_up: vec3(doc.world_up),
    })
}

fn lsc_doc(lsc: &Lsc) -> LscSource {
    LscSource::Table(LscTableDoc {
        angles_deg: lsc.angles_deg().to_vec(),
        weights: lsc.weights().to_vec(),
    })
}

fn to_doc(scene: &Scene) -> SceneDoc {
    SceneDoc {
        schema_version: SCHEMA_VERSION,
        world_up: arr3(&scene.world_up),
        camera: scene.camera.as_ref().map(|c| CameraDoc {
            intrinsics: IntrinsicsDoc {
                fx: c.intrinsics.fx,
                fy: c.intrinsics.fy,
                cx: c.intrinsics.cx,
                cy: c.intrinsics.cy,
                width: c.intrinsics.width,
                height: c.intrinsics.height,
            },
            position: arr3(&c.position),
            rotation: rows3(&c.rotation),
        }),
        patches: scene
            .patches
            .iter()
            .map(|p| PatchDoc {
                id: p.id,
                center: arr3(&p.center),
                normal: arr3(&p.normal),
                tangent: arr3(&p.tangent),
                half_extents: p.half_extents,
                albedo: p.albedo,
            })
            .collect(),
        luminaires: scene
            .luminaires
            .iter()
            .map(|l| LuminaireDoc {
                id: l.id,
                position: arr3(&l.position),
                rotation: Some(rows3(&l.orientation)),
                ldc: LdcSource::Table(LdcTableDoc {
                    polar_deg: l.ldc.polar_deg().to_vec(),
                    azimuth_deg: l.ldc.azimuth_deg().to_vec(),
                    candela: l.ldc.candela().to_vec(),
                }),
                power_watts: l.power_watts,
                dim: l.dim,
            })
            .collect(),
        sensors: scene
            .sensors
            .iter()
            .map(|s| SensorDoc {
                id: s.id,
                position: arr3(&s.position),
                facing: arr3(&s.facing),
                role: match s.role {
                    SensorRole::Spatial => RoleDoc::Spatial,
                    SensorRole::Gaze => RoleDoc::Gaze,
                },
                lsc: lsc_doc(&s.lsc),
            })
            .collect(),
        occupants: scene
            .occupants
            .iter()
            .map(|o| OccupantDoc {
                id: o.id,
                head_position: arr3(&o.head_position),
                gaze: arr3(&o.gaze),
                vfoa_aperture_deg: o.vfoa_aperture_deg,
                lsc: lsc_doc(&o.lsc),
            })
            .collect(),
    }
}
