//! From detections to occupants, attention cones, and the lux an occupant
//! perceives at the forehead.

mod detections;
mod luxmeter;
pub mod sampling;
mod vfoa;

pub use detections::{gaze_from_class, head_to_3d, ingest_detections, occupants_from_detections, DetectionRecord, OccupantDefaults, HEAD_WINDOW_PX};
pub use luxmeter::{direct_contributions, virtual_luxmeter, LuxmeterConfig, LuxmeterRays, PatchField, PerceivedLux, SensorPose, DEFAULT_RAYS};
pub use vfoa::{vfoa_visible_luminaires, Vfoa};
