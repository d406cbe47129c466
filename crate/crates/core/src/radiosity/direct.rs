use rayon::prelude::*;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::scene::{Luminaire, Patch, Scene};

/// Direct illuminance source term together with the dims that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionVector {
    pub values: Vec<f64>,
    pub dims: Vec<f64>,
}

/// Illuminance (lux) at the patch center from one luminaire at `dim`:
/// `dim · I · cos θ / r²`, zero when the patch faces away or the segment is
/// blocked.
pub fn direct_illuminance(patch: &Patch, luminaire: &Luminaire, dim: f64, accel: &AccelIndex) -> f64 {
    let to_patch = patch.center - luminaire.position;
    let r2 = to_patch.norm_squared();
    if r2 == 0.0 {
        return 0.0;
    }
    let dir = to_patch / r2.sqrt();
    let cos_in = -dir.dot(&patch.normal);
    if cos_in <= 0.0 {
        return 0.0;
    }
    if !accel.visible(&luminaire.position, &patch.center, &[patch.id]) {
        return 0.0;
    }
    dim * (luminaire.intensity_towards(&dir) * cos_in / r2)
}

/// Per-patch illuminance from luminaire `l` alone at full output.
pub fn luminaire_emission(scene: &Scene, l: usize, accel: &AccelIndex) -> Vec<f64> {
    let lum = &scene.luminaires[l];
    scene.patches.par_iter().map(|p| direct_illuminance(p, lum, 1.0, accel)).collect()
}

/// `E[i] = Σ_l direct_illuminance(patch_i, lum_l, dims[l])`.
pub fn emission_vector(scene: &Scene, dims: &[f64], accel: &AccelIndex) -> Result<EmissionVector> {
    if dims.len() != scene.luminaires.len() {
        return Err(Error::Dimension {
            what: "dim vector",
            expected: scene.luminaires.len(),
            got: dims.len(),
        });
    }
    let values = scene
        .patches
        .par_iter()
        .map(|p| {
            scene
                .luminaires
                .iter()
                .zip(dims)
                .map(|(lum, d)| direct_illuminance(p, lum, *d, accel))
                .sum()
        })
        .collect();
    Ok(EmissionVector { values, dims: dims.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::photometry::Ldc;

    fn lamp(cd: f64) -> Luminaire {
        Luminaire {
            id: 1,
            position: Vec3::new(0.0, 0.0, 2.0),
            orientation: Luminaire::downlight_orientation(),
            ldc: Ldc::constant(cd).unwrap(),
            power_watts: 10.0,
            dim: 1.0,
        }
    }

    fn floor_patch(id: u32, center: Vec3, normal: Vec3) -> Patch {
        Patch::new(id, center, normal, crate::geom::any_tangent(&normal), [0.05, 0.05], 0.5).unwrap()
    }

    #[test]
    fn inverse_square_normal_incidence() {
        let p = floor_patch(1, Vec3::zeros(), Vec3::z());
        assert_eq!(direct_illuminance(&p, &lamp(1000.0), 1.0, &AccelIndex::empty()), 250.0);
    }

    #[test]
    fn cosine_incidence() {
        // tilt the receiving patch by 60° about X
        let n = Vec3::new(0.0, 60f64.to_radians().sin(), 60f64.to_radians().cos());
        let p = floor_patch(1, Vec3::zeros(), n);
        let e = direct_illuminance(&p, &lamp(1000.0), 1.0, &AccelIndex::empty());
        assert!((e - 125.0).abs() < 1e-9, "{e}");
    }

    #[test]
    fn occluded_and_backfacing() {
        let p = floor_patch(1, Vec3::zeros(), Vec3::z());
        let blocker = floor_patch(2, Vec3::new(0.0, 0.0, 1.0), Vec3::z());
        let accel = AccelIndex::build(&[p.clone(), blocker]).unwrap();
        assert_eq!(direct_illuminance(&p, &lamp(1000.0), 1.0, &accel), 0.0);
        let back = floor_patch(3, Vec3::zeros(), -Vec3::z());
        assert_eq!(direct_illuminance(&back, &lamp(1000.0), 1.0, &AccelIndex::empty()), 0.0);
    }

    #[test]
    fn dims_scale_linearly() {
        let p = floor_patch(1, Vec3::new(0.3, -0.2, 0.0), Vec3::z());
        let full = direct_illuminance(&p, &lamp(800.0), 1.0, &AccelIndex::empty());
        let half = direct_illuminance(&p, &lamp(800.0), 0.5, &AccelIndex::empty());
        assert_eq!(half, 0.5 * full);
    }
}
