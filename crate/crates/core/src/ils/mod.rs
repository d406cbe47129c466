//! Occupant-aware dimming: perceived-lux contributions, power minimization
//! under a per-occupant lux-drop budget, and energy accounting.

mod contribution;
mod energy;
mod evaluate;
mod optimize;
pub mod report;

pub use contribution::{contribution_matrix, sensor_rows, ContributionMatrix, FloorRows};
pub use energy::{energy_report, EnergyRecord, DEFAULT_LUMINAIRE_WATTS, DEFAULT_OVERHEAD_WATTS, HOURS_PER_DAY};
pub use evaluate::{evaluate_scenario, parse_ground_truth, GroundTruth, ScenarioResult, SensorReading};
pub use optimize::{drops, optimize, vfoa_sets, ILSConfig, Mode, Selection, DEFAULT_DELTA_MAX_LUX, EXHAUSTIVE_LIMIT, FEASIBILITY_TOL};
