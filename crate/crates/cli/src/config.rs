//! Command-line flags, the optional run-config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ils_core::ils::Mode;
use ils_core::map::MapFormat;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "ILS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "ils",
    version,
    about = "Radiosity-based perceived-illuminance estimation and occupant-aware dimming"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build scene patches from a depth image.
    Patchify,
    /// Solve radiosity for the scene's dims; write the illumination map and residuals.
    Solve,
    /// Simulate sensor and occupant luxmeter readings.
    Simulate,
    /// Choose luminaire dims under the perceived-lux budget.
    Optimize,
    /// Compare simulated sensor readings with ground truth.
    Evaluate,
    /// Write the illumination map as CSV or a PLY mesh.
    ExportMap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Patchify => "patchify",
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
            Command::Evaluate => "evaluate",
            Command::ExportMap => "export-map",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Run-config file (TOML); command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Scene document (JSON).
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Person detections, one JSON record per line.
    #[arg(long, global = true)]
    pub detections: Option<PathBuf>,
    /// Measured lux per sensor (CSV `sensor_id,lux`).
    #[arg(long = "ground-truth", global = true)]
    pub ground_truth: Option<PathBuf>,
    /// 16-bit depth image (PNG).
    #[arg(long, global = true)]
    pub depth: Option<PathBuf>,
    /// Camera sidecar (JSON intrinsics, pose and depth unit).
    #[arg(long, global = true)]
    pub intrinsics: Option<PathBuf>,
    /// Output directory [default: $ILS_OUT_DIR or the current directory].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Patch edge length in meters.
    #[arg(long = "patch-size", global = true)]
    pub patch_size: Option<f64>,
    /// Sample points per patch for form factors.
    #[arg(long = "ff-samples", global = true)]
    pub ff_samples: Option<usize>,
    /// Rays per virtual luxmeter reading.
    #[arg(long, global = true)]
    pub rays: Option<usize>,
    /// Largest tolerated perceived-lux drop per occupant.
    #[arg(long = "delta-max", global = true)]
    pub delta_max: Option<f64>,
    /// Optimizer mode: binary, continuous or vfoa.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Map format: csv or mesh.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Rotation of the luxmeter ray sequence.
    #[arg(long = "sequence-id", global = true)]
    pub sequence_id: Option<u32>,
    /// Constant draw of the control system in watts.
    #[arg(long = "overhead-watts", global = true)]
    pub overhead_watts: Option<f64>,
    /// Keep every spatial sensor at or above this lux (capped at full-lit).
    #[arg(long = "spatial-floor", global = true)]
    pub spatial_floor: Option<f64>,
    /// Comma-separated dims, scene order (default: the scene's dims).
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Option<Vec<f64>>,
    /// Form-factor cache file, read when its key matches and rewritten otherwise.
    #[arg(long = "ff-cache", global = true)]
    pub ff_cache: Option<PathBuf>,
    /// Add box-shaped body occluders below each occupant's head.
    #[arg(long, global = true)]
    pub bodies: bool,
    /// Leave out light arriving straight from luminaires.
    #[arg(long = "no-direct", global = true)]
    pub no_direct: bool,
}

/// The run-config file: every knob optional, same names as the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scene: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub depth: Option<PathBuf>,
    pub intrinsics: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub patch_size: Option<f64>,
    pub ff_samples: Option<usize>,
    pub rays: Option<usize>,
    pub delta_max: Option<f64>,
    pub mode: Option<String>,
    pub threads: Option<usize>,
    pub format: Option<String>,
    pub sequence_id: Option<u32>,
    pub overhead_watts: Option<f64>,
    pub spatial_floor: Option<f64>,
    pub dims: Option<Vec<f64>>,
    pub ff_cache: Option<PathBuf>,
    pub bodies: Option<bool>,
    pub direct_term: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| ils_core::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| ils_core::Error::Parse {
            what: "run config",
            line: None,
            path: path.display().to_string(),
            message: e.message().to_string(),
        })?;
        // paths inside the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.scene,
            &mut cfg.detections,
            &mut cfg.ground_truth,
            &mut cfg.depth,
            &mut cfg.intrinsics,
            &mut cfg.out,
            &mut cfg.ff_cache,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    // inputs are hashed by content, so their paths stay out
    #[serde(skip)]
    pub scene: Option<PathBuf>,
    #[serde(skip)]
    pub detections: Option<PathBuf>,
    #[serde(skip)]
    pub ground_truth: Option<PathBuf>,
    #[serde(skip)]
    pub depth: Option<PathBuf>,
    #[serde(skip)]
    pub intrinsics: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
    pub patch_size: f64,
    pub ff_samples: usize,
    pub rays: usize,
    pub delta_max: f64,
    pub mode: Mode,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub format: MapFormat,
    pub sequence_id: u32,
    pub overhead_watts: f64,
    pub spatial_floor: Option<f64>,
    pub dims: Option<Vec<f64>>,
    #[serde(skip)]
    pub ff_cache: Option<PathBuf>,
    pub bodies: bool,
    pub direct_term: bool,
}

pub const MAX_FF_SAMPLES: usize = 1024;
pub const MAX_RAYS: usize = 10_000_000;

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mode_name = flags.mode.or(file.mode).unwrap_or_else(|| "binary".into());
        let format_name = flags.format.or(file.format).unwrap_or_else(|| "csv".into());
        let cfg = RunConfig {
            command,
            scene: flags.scene.or(file.scene),
            detections: flags.detections.or(file.detections),
            ground_truth: flags.ground_truth.or(file.ground_truth),
            depth: flags.depth.or(file.depth),
            intrinsics: flags.intrinsics.or(file.intrinsics),
            out: flags.out.or(file.out).or(env_out).unwrap_or_else(|| PathBuf::from(".")),
            patch_size: flags.patch_size.or(file.patch_size).unwrap_or(ils_core::scene::DEFAULT_PATCH_SIZE),
            ff_samples: flags.ff_samples.or(file.ff_samples).unwrap_or(ils_core::radiosity::DEFAULT_FF_SAMPLES),
            rays: flags.rays.or(file.rays).unwrap_or(ils_core::perception::DEFAULT_RAYS),
            delta_max: flags.delta_max.or(file.delta_max).unwrap_or(ils_core::ils::DEFAULT_DELTA_MAX_LUX),
            mode: mode_name.parse().map_err(|e: ils_core::Error| CliError::Usage(e.to_string()))?,
            threads: flags.threads.or(file.threads),
            format: format_name.parse().map_err(|e: ils_core::Error| CliError::Usage(e.to_string()))?,
            sequence_id: flags.sequence_id.or(file.sequence_id).unwrap_or(0),
            overhead_watts: flags
                .overhead_watts
                .or(file.overhead_watts)
                .unwrap_or(ils_core::ils::DEFAULT_OVERHEAD_WATTS),
            spatial_floor: flags.spatial_floor.or(file.spatial_floor),
            dims: flags.dims.or(file.dims),
            ff_cache: flags.ff_cache.or(file.ff_cache),
            bodies: flags.bodies || file.bodies.unwrap_or(false),
            direct_term: !flags.no_direct && file.direct_term.unwrap_or(true),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.patch_size.is_finite() && self.patch_size > 0.0) {
            return usage(format!("--patch-size must be positive, got {}", self.patch_size));
        }
        if !(1..=MAX_FF_SAMPLES).contains(&self.ff_samples) {
            return usage(format!("--ff-samples must lie in 1..={MAX_FF_SAMPLES}, got {}", self.ff_samples));
        }
        if !(1..=MAX_RAYS).contains(&self.rays) {
            return usage(format!("--rays must lie in 1..={MAX_RAYS}, got {}", self.rays));
        }
        if !(self.delta_max.is_finite() && self.delta_max >= 0.0) {
            return usage(format!("--delta-max must be non-negative, got {}", self.delta_max));
        }
        if !(self.overhead_watts.is_finite() && self.overhead_watts >= 0.0) {
            return usage(format!("--overhead-watts must be non-negative, got {}", self.overhead_watts));
        }
        if let Some(f) = self.spatial_floor {
            if !(f.is_finite() && f >= 0.0) {
                return usage(format!("--spatial-floor must be non-negative, got {f}"));
            }
        }
        if self.threads == Some(0) {
            return usage("--threads must be at least 1".into());
        }
        let needs_scene = self.command != Command::Patchify;
        if needs_scene && self.scene.is_none() {
            return usage(format!("`{}` needs --scene", self.command.name()));
        }
        if self.command == Command::Patchify && self.depth.is_none() {
            return usage("`patchify` needs --depth".into());
        }
        if self.command == Command::Evaluate && self.ground_truth.is_none() {
            return usage("`evaluate` needs --ground-truth".into());
        }
        if self.detections.is_some() && self.depth.is_none() {
            return usage("--detections needs --depth to place heads".into());
        }
        Ok(())
    }
}
