//! Deterministic core of the aerial goal-navigation harness.
//!
//! The crate is `no_std` + `alloc`: geometry, the discrete-action simulator,
//! semantic camera rendering, the path oracle, baseline policies, the episode
//! loop, the enhancement mechanisms and all trajectory metrics live here. IO,
//! model gateways and the HTTP service are in the `aeronav` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod camera;
pub mod enhancements;
pub mod episode;
pub mod geom;
pub mod metrics;
pub mod planner;
pub mod policy;
pub mod scenario;
pub mod world;

pub use camera::{CameraIntrinsics, CameraPose, SemanticObservation, ViewSet, ViewTag};
pub use geom::{Aabb, Vec3};
pub use world::{apply_action, distance_to_goal, Action, ActionCategory, AgentPose, CityWorld, MotionConfig};
