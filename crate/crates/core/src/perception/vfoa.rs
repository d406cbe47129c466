use std::collections::BTreeSet;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::scene::{Occupant, Scene};

/// Visual frustum of attention: an unbounded cone at the head along the gaze.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vfoa {
    pub apex: Vec3,
    pub axis: Vec3,
    pub aperture_deg: f64,
}

impl Vfoa {
    pub fn new(apex: Vec3, axis: Vec3, aperture_deg: f64) -> Result<Self> {
        if !geom::is_unit(&axis) {
            return Err(Error::InvalidArgument("attention axis is not unit length".into()));
        }
        if !(aperture_deg > 0.0 && aperture_deg < 180.0) {
            return Err(Error::InvalidArgument(format!("aperture {aperture_deg} outside (0, 180)")));
        }
        Ok(Vfoa { apex, axis, aperture_deg })
    }

    pub fn of(occupant: &Occupant) -> Result<Self> {
        Vfoa::new(occupant.head_position, occupant.gaze, occupant.vfoa_aperture_deg)
    }

    /// True iff `point` lies within half the aperture of the axis.
    pub fn contains(&self, point: &Vec3) -> bool {
        let d = point - self.apex;
        let len = d.norm();
        if len == 0.0 {
            return true;
        }
        geom::angle_deg(&(d / len), &self.axis) <= self.aperture_deg / 2.0
    }
}

/// Luminaires inside the occupant's cone that are also unoccluded from the head.
pub fn vfoa_visible_luminaires(occupant: &Occupant, scene: &Scene, accel: &AccelIndex) -> Result<BTreeSet<u32>> {
    let cone = Vfoa::of(occupant)?;
    Ok(scene
        .luminaires
        .iter()
        .filter(|l| cone.contains(&l.position) && accel.visible(&cone.apex, &l.position, &[]))
        .map(|l| l.id)
        .collect())
}
