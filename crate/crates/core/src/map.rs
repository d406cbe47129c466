//! Per-patch illumination maps and their file formats.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::photometry::csv_error;
use crate::radiosity::RadiositySolution;
use crate::scene::Patch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub patch_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
    pub area: f64,
    /// lm/m²
    pub exitance: f64,
    /// lux
    pub incident: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationMap {
    pub records: Vec<MapRecord>,
}

impl IlluminationMap {
    /// One record per patch from a solved exitance vector and the incident
    /// illuminance that produced it.
    pub fn new(patches: &[Patch], solution: &RadiositySolution, incident: &[f64]) -> Result<Self> {
        for (what, len) in [("exitance vector", solution.exitance.len()), ("incident vector", incident.len())] {
            if len != patches.len() {
                return Err(Error::Dimension {
                    what,
                    expected: patches.len(),
                    got: len,
                });
            }
        }
        let records = patches
            .iter()
            .zip(&solution.exitance)
            .zip(incident)
            .map(|((p, b), e)| MapRecord {
                patch_id: p.id,
                cx: p.center.x,
                cy: p.center.y,
                cz: p.center.z,
                nx: p.normal.x,
                ny: p.normal.y,
                nz: p.normal.z,
                area: p.area(),
                exitance: *b,
                incident: *e,
            })
            .collect();
        Ok(IlluminationMap { records })
    }

    pub fn exitance(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.exitance).collect()
    }

    pub fn incident(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.incident).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Csv,
    /// ASCII PLY, one quad per patch with per-vertex lux.
    Mesh,
}

impl FromStr for MapFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MapFormat::Csv),
            "mesh" | "ply" => Ok(MapFormat::Mesh),
            _ => Err(Error::InvalidArgument(format!("unsupported map format `{s}` (csv, mesh)"))),
        }
    }
}

impl MapFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MapFormat::Csv => "csv",
            MapFormat::Mesh => "ply",
        }
    }
}

/// Renders the map. `comment` becomes a leading comment line.
pub fn export_map(map: &IlluminationMap, patches: &[Patch], format: MapFormat, comment: Option<&str>) -> Result<String> {
    match format {
        MapFormat::Csv => Ok(to_csv(map, comment)),
        MapFormat::Mesh => to_ply(map, patches, comment),
    }
}

fn to_csv(map: &IlluminationMap, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &map.records {
        w.serialize(r).expect("in-memory csv");
    }
    if map.records.is_empty() {
        w.write_record(["patch_id", "cx", "cy", "cz", "nx", "ny", "nz", "area", "exitance", "incident"])
            .expect("in-memory csv");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory csv")).expect("csv output is utf-8"));
    out
}

fn to_ply(map: &IlluminationMap, patches: &[Patch], comment: Option<&str>) -> Result<String> {
    if patches.len() != map.records.len() {
        return Err(Error::Dimension {
            what: "patch list",
            expected: map.records.len(),
            got: patches.len(),
        });
    }
    let n = patches.len();
    let mut out = String::from("ply\nformat ascii 1.0\n");
    if let Some(c) = comment {
        let _ = writeln!(out, "comment {c}");
    }
    let _ = write!(
        out,
        "element vertex {}\nproperty double x\nproperty double y\nproperty double z\nproperty double lux\nelement face {n}\nproperty list uchar int vertex_indices\nend_header\n",
        4 * n
    );
    for (p, r) in patches.iter().zip(&map.records) {
        for c in p.corners() {
            let _ = writeln!(out, "{} {} {} {}", c.x, c.y, c.z, r.incident);
        }
    }
    for k in 0..n {
        let b = 4 * k;
        let _ = writeln!(out, "4 {} {} {} {}", b, b + 1, b + 2, b + 3);
    }
    Ok(out)
}

/// Reads a CSV map back, skipping `#` comment lines.
pub fn read_map_csv(text: &str) -> Result<IlluminationMap> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let records = reader
        .deserialize()
        .map(|r| r.map_err(|e| csv_error("illumination map", e)))
        .collect::<Result<Vec<MapRecord>>>()?;
    Ok(IlluminationMap { records })
}

impl MapRecord {
    pub fn center(&self) -> Vec3 {
        Vec3::new(self.cx, self.cy, self.cz)
    }
}
