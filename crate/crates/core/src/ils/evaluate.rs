use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::contribution::reading_row;
use super::energy::{energy_report, EnergyRecord, HOURS_PER_DAY};
use super::optimize::ILSConfig;
use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::perception::{LuxmeterConfig, SensorPose};
use crate::photometry::csv_error;
use crate::radiosity::LuminaireBasis;
use crate::scene::Scene;

/// Measured lux keyed by sensor id.
pub type GroundTruth = BTreeMap<u32, f64>;

/// Parses `sensor_id,lux` rows (header required).
pub fn parse_ground_truth(text: &str) -> Result<GroundTruth> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error("ground truth", e))?.clone();
    if headers.len() != 2 || &headers[0] != "sensor_id" || &headers[1] != "lux" {
        return Err(Error::parse("ground truth", Some(1), "expected header `sensor_id,lux`"));
    }
    let mut out = GroundTruth::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error("ground truth", e))?;
        let line = record.position().map(|p| p.line() as usize);
        let id: u32 = record[0]
            .parse()
            .map_err(|_| Error::parse("ground truth", line, format!("bad sensor id `{}`", &record[0])))?;
        let lux: f64 = record[1]
            .parse()
            .map_err(|_| Error::parse("ground truth", line, format!("bad lux value `{}`", &record[1])))?;
        if !(lux.is_finite() && lux >= 0.0) {
            return Err(Error::parse(
                "ground truth",
                line,
                format!("lux must be finite and non-negative, got {lux}"),
            ));
        }
        if out.insert(id, lux).is_some() {
            return Err(Error::DuplicateId {
                entity: "ground-truth sensor",
                id: id.into(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorReading {
    pub sensor_id: u32,
    pub estimate: f64,
    pub ground_truth: Option<f64>,
    /// `|estimate − ground truth|`, when ground truth is known.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub dims: Vec<f64>,
    pub luminaire_ids: Vec<u32>,
    pub sensors: Vec<SensorReading>,
    pub occupant_ids: Vec<u32>,
    /// Per-occupant drop below the full-lit reading.
    pub delta_lux: Vec<f64>,
    pub delta_watt: f64,
    /// One day of operation.
    pub energy: EnergyRecord,
}

impl ScenarioResult {
    /// Mean ε over sensors with ground truth.
    pub fn mean_epsilon(&self) -> Option<f64> {
        let eps: Vec<f64> = self.sensors.iter().filter_map(|s| s.epsilon).collect();
        (!eps.is_empty()).then(|| eps.iter().sum::<f64>() / eps.len() as f64)
    }

    pub fn epsilon_est(&self) -> BTreeMap<u32, f64> {
        self.sensors.iter().filter_map(|s| s.epsilon.map(|e| (s.sensor_id, e))).collect()
    }
}

fn dot(row: &[f64], dims: &[f64]) -> f64 {
    row.iter().zip(dims).map(|(a, d)| a * d).sum()
}

/// Reads every sensor and occupant under `dims` and compares sensors with
/// `ground_truth`.
pub fn evaluate_scenario(
    scene: &Scene,
    basis: &LuminaireBasis,
    dims: &[f64],
    ground_truth: &GroundTruth,
    accel: &AccelIndex,
    lux: &LuxmeterConfig,
    cfg: &ILSConfig,
) -> Result<ScenarioResult> {
    cfg.validate()?;
    let n = scene.luminaires.len();
    if dims.len() != n || basis.len() != n {
        return Err(Error::Dimension {
            what: "dim vector",
            expected: n,
            got: if dims.len() != n { dims.len() } else { basis.len() },
        });
    }
    if let Some(d) = dims.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::InvalidArgument(format!("dim {d} outside [0, 1]")));
    }
    for id in ground_truth.keys() {
        if !scene.sensors.iter().any(|s| s.id == *id) {
            return Err(Error::UnknownId { entity: "sensor", id: *id });
        }
    }
    let sensor_rows = scene
        .sensors
        .par_iter()
        .map(|s| {
            let pose = SensorPose {
                position: s.position,
                facing: s.facing,
            };
            reading_row(scene, basis, &pose, &s.lsc, accel, lux)
        })
        .collect::<Result<Vec<_>>>()?;
    let occupant_rows = scene
        .occupants
        .par_iter()
        .map(|o| {
            let pose = SensorPose {
                position: o.head_position,
                facing: o.gaze,
            };
            reading_row(scene, basis, &pose, &o.lsc, accel, lux)
        })
        .collect::<Result<Vec<_>>>()?;
    let sensors = scene
        .sensors
        .iter()
        .zip(&sensor_rows)
        .map(|(s, row)| {
            let estimate = dot(row, dims);
            let gt = ground_truth.get(&s.id).copied();
            SensorReading {
                sensor_id: s.id,
                estimate,
                ground_truth: gt,
                epsilon: gt.map(|g| (estimate - g).abs()),
            }
        })
        .collect();
    let ones = vec![1.0; n];
    let delta_lux = occupant_rows.iter().map(|row| dot(row, &ones) - dot(row, dims)).collect();
    let energy = energy_report(dims, &scene.powers(), HOURS_PER_DAY, cfg.overhead_watts)?;
    Ok(ScenarioResult {
        dims: dims.to_vec(),
        luminaire_ids: scene.luminaires.iter().map(|l| l.id).collect(),
        sensors,
        occupant_ids: scene.occupants.iter().map(|o| o.id).collect(),
        delta_lux,
        delta_watt: energy.delta_watt,
        energy,
    })
}
