use rayon::prelude::*;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::perception::{direct_contributions, LuxmeterConfig, LuxmeterRays, SensorPose};
use crate::photometry::Lsc;
use crate::radiosity::LuminaireBasis;
use crate::scene::{Scene, SensorRole};

/// Perceived lux at each occupant from each luminaire alone at full output.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionMatrix {
    /// `a[k][l]`, occupants × luminaires, scene order.
    pub a: Vec<Vec<f64>>,
    /// Reading of each occupant with every luminaire at full output.
    pub full_lit: Vec<f64>,
    pub occupant_ids: Vec<u32>,
    pub luminaire_ids: Vec<u32>,
    /// Rows for spatial sensors, used by the optional lux floor.
    pub floor: Option<FloorRows>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorRows {
    pub a: Vec<Vec<f64>>,
    pub full_lit: Vec<f64>,
    pub sensor_ids: Vec<u32>,
}

impl ContributionMatrix {
    /// Builds a matrix directly from its rows; `full_lit` is the row sums.
    pub fn from_rows(a: Vec<Vec<f64>>, occupant_ids: Vec<u32>, luminaire_ids: Vec<u32>) -> Result<Self> {
        if a.len() != occupant_ids.len() {
            return Err(Error::Dimension {
                what: "contribution rows",
                expected: occupant_ids.len(),
                got: a.len(),
            });
        }
        for row in &a {
            if row.len() != luminaire_ids.len() {
                return Err(Error::Dimension {
                    what: "contribution row",
                    expected: luminaire_ids.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidArgument("contributions must be finite and non-negative".into()));
            }
        }
        let full_lit = a.iter().map(|r| r.iter().sum()).collect();
        Ok(ContributionMatrix {
            a,
            full_lit,
            occupant_ids,
            luminaire_ids,
            floor: None,
        })
    }

    pub fn n_occupants(&self) -> usize {
        self.a.len()
    }

    pub fn n_luminaires(&self) -> usize {
        self.luminaire_ids.len()
    }

    /// `(A·d)[k]` for every occupant.
    pub fn readings(&self, dims: &[f64]) -> Vec<f64> {
        apply(&self.a, dims)
    }
}

pub(crate) fn apply(rows: &[Vec<f64>], dims: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| r.iter().zip(dims).map(|(a, d)| a * d).sum()).collect()
}

/// Per-luminaire readings for one pose, all from the same ray sequence.
pub(crate) fn reading_row(
    scene: &Scene,
    basis: &LuminaireBasis,
    pose: &SensorPose,
    lsc: &Lsc,
    accel: &AccelIndex,
    cfg: &LuxmeterConfig,
) -> Result<Vec<f64>> {
    let rays = LuxmeterRays::trace(pose, lsc, accel, cfg.n_rays, cfg.sequence_id)?;
    let direct = if cfg.direct_term {
        direct_contributions(scene, pose, lsc, accel)
    } else {
        vec![0.0; scene.luminaires.len()]
    };
    Ok((0..basis.len())
        .map(|l| rays.patch_term(&basis.solution(l).exitance) + direct[l])
        .collect())
}

/// Reads every occupant under each single-luminaire activation.
pub fn contribution_matrix(scene: &Scene, basis: &LuminaireBasis, accel: &AccelIndex, cfg: &LuxmeterConfig) -> Result<ContributionMatrix> {
    if scene.occupants.is_empty() {
        return Err(Error::Empty("occupants"));
    }
    check_basis(scene, basis)?;
    let rows = scene
        .occupants
        .par_iter()
        .map(|o| {
            let pose = SensorPose {
                position: o.head_position,
                facing: o.gaze,
            };
            reading_row(scene, basis, &pose, &o.lsc, accel, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let occupant_ids = scene.occupants.iter().map(|o| o.id).collect();
    let luminaire_ids = scene.luminaires.iter().map(|l| l.id).collect();
    ContributionMatrix::from_rows(rows, occupant_ids, luminaire_ids)
}

/// Single-luminaire readings for every sensor with the given role.
pub fn sensor_rows(scene: &Scene, basis: &LuminaireBasis, accel: &AccelIndex, role: SensorRole, cfg: &LuxmeterConfig) -> Result<FloorRows> {
    check_basis(scene, basis)?;
    let sensors: Vec<_> = scene.sensors.iter().filter(|s| s.role == role).collect();
    let a = sensors
        .par_iter()
        .map(|s| {
            let pose = SensorPose {
                position: s.position,
                facing: s.facing,
            };
            reading_row(scene, basis, &pose, &s.lsc, accel, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let full_lit = a.iter().map(|r: &Vec<f64>| r.iter().sum()).collect();
    Ok(FloorRows {
        a,
        full_lit,
        sensor_ids: sensors.iter().map(|s| s.id).collect(),
    })
}

fn check_basis(scene: &Scene, basis: &LuminaireBasis) -> Result<()> {
    if basis.len() != scene.luminaires.len() {
        return Err(Error::Dimension {
            what: "luminaire basis",
            expected: scene.luminaires.len(),
            got: basis.len(),
        });
    }
    Ok(())
}
