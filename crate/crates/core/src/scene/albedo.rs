//! Per-patch albedo from images captured under known luminaire activations.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::geom;
use crate::radiosity::direct_illuminance;
use crate::scene::{Scene, ALBEDO_EPSILON};

/// Single-channel image of linear radiometric values (radiance-like units,
/// so that `π · value` is the exitance of a Lambertian surface).
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl IntensityImage {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Dimension {
                what: "image pixels",
                expected: width as usize * height as usize,
                got: data.len(),
            });
        }
        Ok(IntensityImage { width, height, data })
    }

    /// Nearest-pixel lookup; `None` outside the image.
    pub fn sample(&self, u: f64, v: f64) -> Option<f64> {
        let (x, y) = (u.round(), v.round());
        if !(x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64) {
            return None;
        }
        Some(self.data[y as usize * self.width as usize + x as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlbedoOptions {
    /// Observations with predicted direct illuminance below this (lux) are
    /// skipped.
    pub min_illuminance: f64,
}

impl Default for AlbedoOptions {
    fn default() -> Self {
        AlbedoOptions { min_illuminance: 1.0 }
    }
}

/// Median of `π · observed / predicted` over usable `(observed, predicted)`
/// pairs, clamped to `[0, 1 − ε]`. `None` if every pair is skipped.
pub fn albedo_from_observations(observations: &[(f64, f64)], min_illuminance: f64) -> Option<f64> {
    let mut ratios: Vec<f64> = observations
        .iter()
        .filter(|(obs, pred)| obs.is_finite() && pred.is_finite() && *pred >= min_illuminance && *pred > 0.0)
        .map(|(obs, pred)| PI * obs / pred)
        .collect();
    geom::median(&mut ratios).map(|rho| rho.clamp(0.0, 1.0 - ALBEDO_EPSILON))
}

/// Estimates every patch's albedo. `activations[k]` is the dim vector that
/// was active when `images[k]` was captured; patch centers are projected
/// through the scene camera to find their pixel.
pub fn estimate_albedo(
    images: &[IntensityImage],
    activations: &[Vec<f64>],
    scene: &Scene,
    accel: &AccelIndex,
    opts: &AlbedoOptions,
) -> Result<Vec<f64>> {
    if images.is_empty() {
        return Err(Error::Empty("albedo estimation needs at least one image"));
    }
    if images.len() != activations.len() {
        return Err(Error::Dimension {
            what: "activation vectors",
            expected: images.len(),
            got: activations.len(),
        });
    }
    for dims in activations {
        if dims.len() != scene.luminaires.len() {
            return Err(Error::Dimension {
                what: "dim vector",
                expected: scene.luminaires.len(),
                got: dims.len(),
            });
        }
    }
    let camera = scene
        .camera
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("albedo estimation needs a scene camera".into()))?;

    scene
        .patches
        .par_iter()
        .map(|patch| {
            let pixel = camera.project(&patch.center);
            let observations: Vec<(f64, f64)> = images
                .iter()
                .zip(activations)
                .filter_map(|(image, dims)| {
                    let (u, v) = pixel?;
                    let observed = image.sample(u, v)?;
                    let predicted: f64 = scene
                        .luminaires
                        .iter()
                        .zip(dims)
                        .map(|(lum, d)| direct_illuminance(patch, lum, *d, accel))
                        .sum();
                    Some((observed, predicted))
                })
                .collect();
            albedo_from_observations(&observations, opts.min_illuminance).ok_or(Error::NoObservation { patch_id: patch.id })
        })
        .collect()
}
