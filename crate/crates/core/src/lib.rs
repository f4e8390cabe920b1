//! Data-driven form generation on UV-mapped terrain.
//!
//! Sparse wind-station observations are interpolated into continuous rasters
//! ([`fieldkit`]), bound to a triangulated terrain through its UV chart
//! ([`terrain`]), and then drive three generators:
//!
//! - [`morphscatter`]: morph-target instances arrayed over the terrain, with
//!   frame and yaw taken from the field;
//! - [`iktrail`]: a FABRIK joint chain whose sampled poses are accumulated
//!   into a single "long exposure" form;
//! - [`swarm`]: a deterministic boids swarm bound to the terrain surface and
//!   steered by weighted attractor tracks.
//!
//! Output geometry is solidified and written by [`formout`]. [`config`] and
//! [`session`] hold the project configuration and the replayable interactive
//! session used by the CLI and the HTTP service.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fieldkit;
pub mod formout;
pub mod iktrail;
pub mod mesh;
pub mod morphscatter;
pub mod rng;
pub mod session;
pub mod swarm;
pub mod terrain;

pub use glam::{DMat3, DMat4, DVec2, DVec3};

pub use error::{Error, Result};
pub use fieldkit::{FieldRaster, GridSpec, IdwParams, StationRecord};
pub use formout::{InstanceSet, Scene, TrailSet};
pub use iktrail::{JointChain, ParamCurve, SweepJob};
pub use mesh::Mesh;
pub use swarm::{AgentState, AttractorTrack, BoidParams, SwarmSim};
pub use terrain::{SurfacePoint, TerrainMesh};
