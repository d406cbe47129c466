//! Virtual luxmeter: sensitivity-weighted ray casting over the patch field
//! plus an explicit term for directly visible luminaires.

use rayon::prelude::*;

use crate::accel::{AccelIndex, Ray};
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::perception::sampling::fibonacci_hemisphere;
use crate::photometry::Lsc;
use crate::radiosity::LuminaireBasis;
use crate::scene::Scene;

pub const DEFAULT_RAYS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuxmeterConfig {
    pub n_rays: usize,
    /// Add the light arriving straight from visible luminaires.
    pub direct_term: bool,
    /// Selects the rotation of the direction sequence.
    pub sequence_id: u32,
}

impl Default for LuxmeterConfig {
    fn default() -> Self {
        LuxmeterConfig {
            n_rays: DEFAULT_RAYS,
            direct_term: true,
            sequence_id: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPose {
    pub position: Vec3,
    pub facing: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedLux {
    pub total: f64,
    /// Contribution of light reflected by patches.
    pub patch_term: f64,
    /// Contribution of directly visible luminaires.
    pub direct_term: f64,
    pub n_rays: usize,
}

/// Where patch exitance comes from.
#[derive(Debug, Clone, Copy)]
pub enum PatchField<'a> {
    /// Recombined from a per-luminaire basis under the reading's dims.
    Basis(&'a LuminaireBasis),
    /// A fixed exitance vector (indexed like the acceleration index patches).
    Exitance(&'a [f64]),
}

/// The rays of one reading, traced once: each front-face hit keeps its
/// patch index and its quadrature weight, so readings for any exitance
/// vector reuse the same sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LuxmeterRays {
    hits: Vec<(usize, f64)>,
    n_rays: usize,
}

impl LuxmeterRays {
    /// Casts `n_rays` Fibonacci-hemisphere rays around `pose.facing`. Each
    /// hit contributes `(2π / n) · lsc(θ) / π` per unit exitance.
    pub fn trace(pose: &SensorPose, lsc: &Lsc, accel: &AccelIndex, n_rays: usize, sequence_id: u32) -> Result<Self> {
        if n_rays == 0 {
            return Err(Error::InvalidArgument("luxmeter needs at least one ray".into()));
        }
        if !geom::is_unit(&pose.facing) {
            return Err(Error::InvalidArgument("sensor facing is not unit length".into()));
        }
        let (u, v) = geom::frame_around(&pose.facing);
        let scale = 2.0 / n_rays as f64;
        let hits: Vec<Option<(usize, f64)>> = fibonacci_hemisphere(n_rays, sequence_id)
            .into_par_iter()
            .map(|local| {
                let dir = (u * local.x + v * local.y + pose.facing * local.z).normalize();
                let weight = lsc.eval(local.z.clamp(-1.0, 1.0).acos().to_degrees());
                if weight == 0.0 {
                    return None;
                }
                let ray = Ray {
                    origin: pose.position,
                    direction: dir,
                    t_max: f64::INFINITY,
                };
                let hit = accel.cast_ray(&ray)?;
                // back faces emit nothing
                if accel.patches()[hit.patch_index].normal.dot(&dir) >= 0.0 {
                    return None;
                }
                Some((hit.patch_index, scale * weight))
            })
            .collect();
        Ok(LuxmeterRays {
            hits: hits.into_iter().flatten().collect(),
            n_rays,
        })
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }

    /// Fraction of the reading's rays that ended on each patch index.
    pub fn hit_fractions(&self, n_patches: usize) -> Vec<f64> {
        let mut counts = vec![0.0; n_patches];
        for (i, _) in &self.hits {
            counts[*i] += 1.0;
        }
        counts.iter().map(|c| c / self.n_rays as f64).collect()
    }

    /// Patch term for the given exitance vector.
    pub fn patch_term(&self, exitance: &[f64]) -> f64 {
        self.hits.iter().map(|(i, w)| w * exitance[*i]).sum()
    }
}

/// Per-luminaire lux reaching the sensor straight from each luminaire at full
/// output: `lsc(θ) · I / r²` when unoccluded, else zero.
pub fn direct_contributions(scene: &Scene, pose: &SensorPose, lsc: &Lsc, accel: &AccelIndex) -> Vec<f64> {
    scene
        .luminaires
        .iter()
        .map(|lum| {
            let to_lum = lum.position - pose.position;
            let r2 = to_lum.norm_squared();
            if r2 == 0.0 {
                return 0.0;
            }
            let dir = to_lum / r2.sqrt();
            let weight = lsc.eval(geom::angle_deg(&dir, &pose.facing));
            if weight == 0.0 || !accel.visible(&pose.position, &lum.position, &[]) {
                return 0.0;
            }
            weight * lum.intensity_towards(&-dir) / r2
        })
        .collect()
}

/// Lux perceived by a sensor with sensitivity `lsc` at `pose` under `dims`.
pub fn virtual_luxmeter(
    scene: &Scene,
    field: PatchField<'_>,
    pose: &SensorPose,
    lsc: &Lsc,
    dims: &[f64],
    accel: &AccelIndex,
    cfg: &LuxmeterConfig,
) -> Result<PerceivedLux> {
    if dims.len() != scene.luminaires.len() {
        return Err(Error::Dimension {
            what: "dim vector",
            expected: scene.luminaires.len(),
            got: dims.len(),
        });
    }
    let rays = LuxmeterRays::trace(pose, lsc, accel, cfg.n_rays, cfg.sequence_id)?;
    let patch_term = match field {
        PatchField::Basis(basis) => rays.patch_term(&basis.exitance(dims)?),
        PatchField::Exitance(b) => {
            if b.len() != accel.patches().len() {
                return Err(Error::Dimension {
                    what: "exitance vector",
                    expected: accel.patches().len(),
                    got: b.len(),
                });
            }
            rays.patch_term(b)
        }
    };
    let direct_term = if cfg.direct_term {
        direct_contributions(scene, pose, lsc, accel).iter().zip(dims).map(|(c, d)| c * d).sum()
    } else {
        0.0
    };
    Ok(PerceivedLux {
        total: patch_term + direct_term,
        patch_term,
        direct_term,
        n_rays: cfg.n_rays,
    })
}
