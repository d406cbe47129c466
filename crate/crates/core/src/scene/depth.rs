//! Depth images and their conversion into planar patches.

use std::collections::BTreeMap;
use std::io::Cursor;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, mat3, rows3, vec3, Vec3};
use crate::scene::format::IntrinsicsDoc;
use crate::scene::{Camera, Intrinsics, Patch};

/// Per-pixel depth in meters along the camera axis; `0` marks invalid pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    depth: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != width as usize * height as usize {
            return Err(Error::Dimension {
                what: "depth pixels",
                expected: width as usize * height as usize,
                got: depth.len(),
            });
        }
        if let Some(d) = depth.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::InvalidArgument(format!("depth value {d} is not finite and >= 0")));
        }
        Ok(DepthImage { width, height, depth })
    }

    /// Decodes a 16-bit single-channel PNG; each unit is `unit_m` meters.
    pub fn from_png(bytes: &[u8], unit_m: f64) -> Result<Self> {
        if !(unit_m.is_finite() && unit_m > 0.0) {
            return Err(Error::InvalidArgument(format!("depth unit {unit_m} must be positive")));
        }
        let decoded = image::ImageReader::with_format(Cursor::new(bytes), image::ImageFormat::Png)
            .decode()
            .map_err(|e| Error::parse("depth image", None, e.to_string()))?;
        let image::DynamicImage::ImageLuma16(gray) = decoded else {
            return Err(Error::parse("depth image", None, "expected a 16-bit single-channel image"));
        };
        let (w, h) = gray.dimensions();
        let depth = gray.into_raw().into_iter().map(|v| v as f64 * unit_m).collect();
        DepthImage::new(w, h, depth)
    }

    /// Encodes as a 16-bit PNG with `unit_m` meters per unit (values rounded,
    /// saturating at 65535).
    pub fn to_png(&self, unit_m: f64) -> Vec<u8> {
        let raw: Vec<u16> = self
            .depth
            .iter()
            .map(|d| (d / unit_m).round().clamp(0.0, u16::MAX as f64) as u16)
            .collect();
        let img = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(self.width, self.height, raw).expect("sized buffer");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).expect("png encoding to memory");
        out.into_inner()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.depth[v as usize * self.width as usize + u as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.depth
    }
}

/// Intrinsics + pose sidecar file accompanying a depth image.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSidecar {
    intrinsics: IntrinsicsDoc,
    #[serde(default)]
    position: [f64; 3],
    #[serde(default = "identity_rows")]
    rotation: [[f64; 3]; 3],
    /// Meters per depth unit (default: millimeters).
    #[serde(default = "default_unit")]
    depth_unit_m: f64,
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn default_unit() -> f64 {
    1e-3
}

impl CameraSidecar {
    pub fn parse(text: &str) -> Result<(Camera, f64)> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: CameraSidecar = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                what: "camera sidecar",
                line: (inner.line() > 0).then_some(inner.line()),
                path: if path == "." { String::new() } else { path },
                message: inner.to_string(),
            }
        })?;
        if !(doc.depth_unit_m.is_finite() && doc.depth_unit_m > 0.0) {
            return Err(Error::parse("camera sidecar", None, "depth_unit_m must be positive"));
        }
        let camera = Camera {
            intrinsics: Intrinsics {
                fx: doc.intrinsics.fx,
                fy: doc.intrinsics.fy,
                cx: doc.intrinsics.cx,
                cy: doc.intrinsics.cy,
                width: doc.intrinsics.width,
                height: doc.intrinsics.height,
            },
            rotation: mat3(doc.rotation),
            position: vec3(doc.position),
        };
        camera.validate()?;
        Ok((camera, doc.depth_unit_m))
    }

    pub fn render(camera: &Camera, depth_unit_m: f64) -> String {
        let k = &camera.intrinsics;
        let doc = CameraSidecar {
            intrinsics: IntrinsicsDoc {
                fx: k.fx,
                fy: k.fy,
                cx: k.cx,
                cy: k.cy,
                width: k.width,
                height: k.height,
            },
            position: geom::arr3(&camera.position),
            rotation: rows3(&camera.rotation),
            depth_unit_m,
        };
        serde_json::to_string_pretty(&doc).expect("sidecar serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchifyOptions {
    /// Cells with fewer valid pixels are dropped.
    pub min_pixels: usize,
    /// Albedo assigned to every emitted patch until estimated.
    pub albedo: f64,
    pub first_id: u32,
}

impl Default for PatchifyOptions {
    fn default() -> Self {
        PatchifyOptions {
            min_pixels: 8,
            albedo: 0.5,
            first_id: 0,
        }
    }
}

/// Back-projects valid pixels to world points, bins them into cubic cells of
/// edge `patch_size` and fits one planar patch per populated cell. Normals
/// face the camera. Cells are emitted in lexicographic cell order.
pub fn patchify_depth(depth: &DepthImage, camera: &Camera, patch_size: f64, opts: &PatchifyOptions) -> Result<Vec<Patch>> {
    if !(patch_size.is_finite() && patch_size > 0.0) {
        return Err(Error::InvalidArgument(format!("patch size {patch_size} must be positive")));
    }
    camera.validate()?;
    let fx = camera.intrinsics.fx;

    // (world point, pixel footprint in meters)
    let mut cells: BTreeMap<[i64; 3], Vec<(Vec3, f64)>> = BTreeMap::new();
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let z = depth.get(u, v);
            if z <= 0.0 {
                continue;
            }
            let p = camera.back_project(u as f64, v as f64, z);
            let key = [
                (p.x / patch_size).floor() as i64,
                (p.y / patch_size).floor() as i64,
                (p.z / patch_size).floor() as i64,
            ];
            cells.entry(key).or_default().push((p, z / fx));
        }
    }

    let fitted: Vec<Option<FittedCell>> = cells
        .into_par_iter()
        .map(|(_, points)| fit_cell(&points, &camera.position, opts.min_pixels))
        .collect();

    let mut out = Vec::new();
    for cell in fitted.into_iter().flatten() {
        let id = opts.first_id + out.len() as u32;
        out.push(Patch::new(id, cell.center, cell.normal, cell.tangent, cell.half_extents, opts.albedo)?);
    }
    if out.is_empty() {
        return Err(Error::Empty("no depth cell holds enough valid pixels"));
    }
    Ok(out)
}

struct FittedCell {
    center: Vec3,
    normal: Vec3,
    tangent: Vec3,
    half_extents: [f64; 2],
}

fn fit_cell(points: &[(Vec3, f64)], camera_pos: &Vec3, min_pixels: usize) -> Option<FittedCell> {
    if points.len() < min_pixels.max(3) {
        return None;
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vec3::zeros(), |acc, (p, _)| acc + p) / n;
    let mut cov = Matrix3::zeros();
    for (p, _) in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    // points on a line (or a single point) do not define a plane
    let scale = eig.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if !(eig.eigenvalues[order[1]] > 1e-12 * scale) {
        return None;
    }
    let mut normal: Vec3 = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let to_camera = camera_pos - centroid;
    let facing = normal.dot(&to_camera);
    if facing == 0.0 || !facing.is_finite() {
        return None;
    }
    if facing < 0.0 {
        normal = -normal;
    }
    let tangent = geom::any_tangent(&normal);
    let bitangent = normal.cross(&tangent);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut footprint = 0.0;
    for (p, f) in points {
        let d = p - centroid;
        for (k, axis) in [tangent, bitangent].iter().enumerate() {
            let s = d.dot(axis);
            lo[k] = lo[k].min(s);
            hi[k] = hi[k].max(s);
        }
        footprint += f;
    }
    footprint /= n;
    // center on the bounding rectangle so the patch covers the points
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let center = centroid + tangent * mid[0] + bitangent * mid[1];
    let half_extents = [(hi[0] - lo[0] + footprint) / 2.0, (hi[1] - lo[1] + footprint) / 2.0];
    Some(FittedCell {
        center,
        normal,
        tangent,
        half_extents,
    })
}
