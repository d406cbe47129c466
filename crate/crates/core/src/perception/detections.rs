use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::photometry::Lsc;
use crate::scene::{Camera, DepthImage, Occupant, DEFAULT_VFOA_APERTURE_DEG};

/// Side of the square pixel window searched for head depth.
pub const HEAD_WINDOW_PX: u32 = 5;

/// One detected person in one frame: body box, head pixel and a coarse
/// head-orientation class out of `k`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub frame_id: u64,
    pub person_id: u32,
    /// `(x, y, w, h)` in pixels.
    pub bbox: [f64; 4],
    #[serde(rename = "head_px")]
    pub head_center_px: [f64; 2],
    pub pose_class: u32,
    #[serde(rename = "K")]
    pub k: u32,
}

impl DetectionRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.k != 4 && self.k != 8 {
            return Err(format!("K must be 4 or 8, got {}", self.k));
        }
        if self.pose_class >= self.k {
            return Err(format!("pose_class {} out of range for K = {}", self.pose_class, self.k));
        }
        let [x, y, w, h] = self.bbox;
        if !self.bbox.iter().all(|v| v.is_finite()) || x < 0.0 || y < 0.0 || w < 0.0 || h < 0.0 {
            return Err("bbox must be finite with non-negative origin and size".into());
        }
        if !self.head_center_px.iter().all(|v| v.is_finite()) {
            return Err("head_px must be finite".into());
        }
        Ok(())
    }

    /// Checks the box and head pixel against an image of `width × height`.
    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        let [x, y, w, h] = self.bbox;
        let [u, v] = self.head_center_px;
        let (wf, hf) = (width as f64, height as f64);
        if x + w > wf || y + h > hf {
            return Err(Error::InvalidArgument(format!(
                "person {} frame {}: bbox exceeds {width}x{height} image",
                self.person_id, self.frame_id
            )));
        }
        if !(u >= 0.0 && v >= 0.0 && u < wf && v < hf) {
            return Err(Error::InvalidArgument(format!(
                "person {} frame {}: head pixel outside image",
                self.person_id, self.frame_id
            )));
        }
        Ok(())
    }
}

/// Parses line-delimited JSON detection records (blank lines ignored) and
/// returns them ordered by frame (stable within a frame).
pub fn ingest_detections(stream: &str) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (k, line) in stream.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = Some(k + 1);
        let record: DetectionRecord = serde_json::from_str(line).map_err(|e| Error::parse("detections", at, e.to_string()))?;
        record.validate().map_err(|m| Error::parse("detections", at, m))?;
        out.push(record);
    }
    out.sort_by_key(|r| r.frame_id);
    Ok(out)
}

/// World position of the detected head: median valid depth in a 5×5 window
/// around the head pixel, back-projected through the camera.
pub fn head_to_3d(record: &DetectionRecord, depth: &DepthImage, camera: &Camera) -> Result<Vec3> {
    let [u, v] = record.head_center_px;
    let (iu, iv) = (u.round(), v.round());
    if !(iu >= 0.0 && iv >= 0.0 && iu < depth.width() as f64 && iv < depth.height() as f64) {
        return Err(Error::InvalidArgument(format!(
            "person {} frame {}: head pixel ({u}, {v}) outside the depth image",
            record.person_id, record.frame_id
        )));
    }
    let half = (HEAD_WINDOW_PX / 2) as i64;
    let (cu, cv) = (iu as i64, iv as i64);
    let mut valid = Vec::new();
    for y in (cv - half).max(0)..=(cv + half).min(depth.height() as i64 - 1) {
        for x in (cu - half).max(0)..=(cu + half).min(depth.width() as i64 - 1) {
            let z = depth.get(x as u32, y as u32);
            if z > 0.0 {
                valid.push(z);
            }
        }
    }
    let z = geom::median(&mut valid).ok_or(Error::NoDepth { u, v })?;
    Ok(camera.back_project(u, v, z))
}

/// Horizontal gaze for orientation class `pose_class` of `k`: azimuth
/// `pose_class · 360°/k` from world +X (projected onto the ground plane),
/// counter-clockwise about `world_up`.
pub fn gaze_from_class(pose_class: u32, k: u32, world_up: &Vec3) -> Result<Vec3> {
    if k != 4 && k != 8 {
        return Err(Error::InvalidArgument(format!("orientation class count must be 4 or 8, got {k}")));
    }
    if pose_class >= k {
        return Err(Error::InvalidArgument(format!("pose class {pose_class} out of range for {k} classes")));
    }
    if !geom::is_unit(world_up) {
        return Err(Error::InvalidArgument("world_up is not unit length".into()));
    }
    let reference = if world_up.cross(&Vec3::x()).norm() > 1e-6 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let x_axis = (reference - world_up * world_up.dot(&reference)).normalize();
    let y_axis = world_up.cross(&x_axis);
    let azimuth = (pose_class as f64 * 360.0 / k as f64).to_radians();
    let gaze = x_axis * azimuth.cos() + y_axis * azimuth.sin();
    // remove any residual along up so the gaze is exactly horizontal
    Ok((gaze - world_up * world_up.dot(&gaze)).normalize())
}

/// Attributes given to occupants created from detections.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupantDefaults {
    pub vfoa_aperture_deg: f64,
    pub lsc: Lsc,
}

impl Default for OccupantDefaults {
    fn default() -> Self {
        OccupantDefaults {
            vfoa_aperture_deg: DEFAULT_VFOA_APERTURE_DEG,
            lsc: Lsc::cosine(),
        }
    }
}

/// One occupant per person, from that person's latest record. Occupant ids
/// are person ids.
pub fn occupants_from_detections(
    records: &[DetectionRecord],
    depth: &DepthImage,
    camera: &Camera,
    world_up: &Vec3,
    defaults: &OccupantDefaults,
) -> Result<Vec<Occupant>> {
    let mut latest: BTreeMap<u32, &DetectionRecord> = BTreeMap::new();
    for r in records {
        latest
            .entry(r.person_id)
            .and_modify(|cur| {
                if r.frame_id >= cur.frame_id {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    latest
        .into_values()
        .map(|r| {
            let occupant = Occupant {
                id: r.person_id,
                head_position: head_to_3d(r, depth, camera)?,
                gaze: gaze_from_class(r.pose_class, r.k, world_up)?,
                vfoa_aperture_deg: defaults.vfoa_aperture_deg,
                lsc: defaults.lsc.clone(),
            };
            occupant.validate()?;
            Ok(occupant)
        })
        .collect()
}
