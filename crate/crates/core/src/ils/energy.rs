use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_LUMINAIRE_WATTS: f64 = 96.8;
pub const DEFAULT_OVERHEAD_WATTS: f64 = 65.0;
pub const HOURS_PER_DAY: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub hours: f64,
    /// Every luminaire at full output, no controller.
    pub baseline_wh: f64,
    /// Dimmed luminaires plus the controller's own draw.
    pub ils_wh: f64,
    pub delta_watt: f64,
    pub saving_fraction: f64,
}

pub fn energy_report(dims: &[f64], powers: &[f64], hours: f64, overhead_watts: f64) -> Result<EnergyRecord> {
    if dims.len() != powers.len() {
        return Err(Error::Dimension {
            what: "dim vector",
            expected: powers.len(),
            got: dims.len(),
        });
    }
    if !(hours > 0.0 && hours.is_finite()) {
        return Err(Error::InvalidArgument(format!("hours must be positive, got {hours}")));
    }
    if !(overhead_watts >= 0.0 && overhead_watts.is_finite()) {
        return Err(Error::InvalidArgument(format!("overhead must be non-negative, got {overhead_watts}")));
    }
    let total: f64 = powers.iter().sum();
    let active: f64 = powers.iter().zip(dims).map(|(p, d)| p * d).sum();
    let delta_watt: f64 = powers.iter().zip(dims).map(|(p, d)| p * (1.0 - d)).sum();
    let baseline_wh = total * hours;
    let ils_wh = (active + overhead_watts) * hours;
    let saving_fraction = if baseline_wh > 0.0 { 1.0 - ils_wh / baseline_wh } else { 0.0 };
    Ok(EnergyRecord {
        hours,
        baseline_wh,
        ils_wh,
        delta_watt,
        saving_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_hours() {
        assert!(energy_report(&[1.0], &[10.0], 0.0, 0.0).is_err());
        assert!(energy_report(&[1.0], &[10.0], 1.0, -1.0).is_err());
        assert!(energy_report(&[1.0, 1.0], &[10.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn half_dim() {
        let r = energy_report(&[0.5], &[100.0], 2.0, 0.0).unwrap();
        assert_eq!(r.baseline_wh, 200.0);
        assert_eq!(r.ils_wh, 100.0);
        assert_eq!(r.delta_watt, 50.0);
        assert_eq!(r.saving_fraction, 0.5);
    }
}
