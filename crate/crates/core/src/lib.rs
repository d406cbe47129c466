//! Photometric engine for occupant-aware lighting control: scene model,
//! ray acceleration, radiosity, perceived-illuminance estimation and
//! luminaire dimming optimization.

pub mod accel;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod ils;
pub mod map;
pub mod perception;
pub mod photometry;
pub mod radiosity;
pub mod scene;

pub use error::{Error, ErrorKind, Result};
