//! Grounded geometric control, simulator-backed action imagination and
//! overlap-gated sparse memory.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::camera::{fov_overlap, render, CameraIntrinsics, SemanticObservation, DEFAULT_OVERLAP_SAMPLES};
use crate::geom::Vec3;
use crate::policy::{Decision, Policy, PolicyError};
use crate::world::{apply_action, Action, AgentPose, CityWorld, MotionConfig};

/// Ten percent of the default image width.
pub const DEFAULT_DEAD_ZONE: f64 = 56.0;
pub const DEFAULT_MAX_ITERS: usize = 10;

/// Where a named target appears in the current camera image.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GroundingResult {
    pub found: bool,
    pub pixel_box: [f64; 4],
    pub center: [f64; 2],
    pub label: String,
}

impl GroundingResult {
    pub fn not_found(label: &str) -> Self {
        Self {
            found: false,
            pixel_box: [0.0; 4],
            center: [0.0; 2],
            label: String::from(label),
        }
    }

    /// Reads the target straight from an already rendered observation.
    pub fn from_observation(obs: &SemanticObservation, label: &str) -> Self {
        match obs.entity(label) {
            Some(e) => Self {
                found: true,
                pixel_box: e.image_box,
                center: e.center_px,
                label: String::from(label),
            },
            None => Self::not_found(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundingError {
    UnknownLabel(String),
}

impl fmt::Display for GroundingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundingError::UnknownLabel(l) => write!(f, "no entity labeled {l:?} in this world"),
        }
    }
}

impl core::error::Error for GroundingError {}

pub fn ground_target(
    world: &CityWorld,
    pose: &AgentPose,
    intr: &CameraIntrinsics,
    label: &str,
) -> Result<GroundingResult, GroundingError> {
    if !world.has_label(label) {
        return Err(GroundingError::UnknownLabel(String::from(label)));
    }
    Ok(GroundingResult::from_observation(&render(world, pose, intr), label))
}

/// Centers the target horizontally, then vertically, then flies at it.
///
/// Horizontal alignment takes priority. An unseen target triggers a search
/// rotation to the left.
pub fn grounded_controller_step(g: &GroundingResult, dead_zone: f64, intr: &CameraIntrinsics) -> Action {
    if !g.found {
        return Action::TurnLeft;
    }
    let (cu, cv) = intr.center();
    let [u, v] = g.center;
    if libm::fabs(u - cu) > dead_zone {
        if u > cu {
            Action::TurnRight
        } else {
            Action::TurnLeft
        }
    } else if libm::fabs(v - cv) > dead_zone {
        if v > cv {
            Action::GimbalDown
        } else {
            Action::GimbalUp
        }
    } else {
        Action::MoveForth
    }
}

/// Flies toward a labeled target using only its image position.
#[derive(Debug, Clone)]
pub struct GroundedPolicy {
    label: String,
    dead_zone: f64,
    intrinsics: CameraIntrinsics,
}

impl GroundedPolicy {
    pub fn new(label: impl Into<String>, intrinsics: CameraIntrinsics) -> Self {
        Self {
            label: label.into(),
            dead_zone: DEFAULT_DEAD_ZONE,
            intrinsics,
        }
    }

    pub fn with_dead_zone(mut self, px: f64) -> Self {
        self.dead_zone = px;
        self
    }
}

impl Policy for GroundedPolicy {
    fn name(&self) -> &str {
        "grounded"
    }

    fn reset(&mut self, _instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        Ok(())
    }

    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        let g = GroundingResult::from_observation(observation, &self.label);
        let action = grounded_controller_step(&g, self.dead_zone, &self.intrinsics);
        let why = if g.found {
            alloc::format!("{} at ({:.0}, {:.0}) px", self.label, g.center[0], g.center[1])
        } else {
            alloc::format!("{} not in view, searching", self.label)
        };
        Ok(Decision::new(action, why))
    }
}

/// A candidate action played forward in the simulator without committing it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImaginedOutcome {
    pub action: Action,
    pub before: AgentPose,
    pub after: AgentPose,
    pub blocked: bool,
    pub observation: SemanticObservation,
}

/// A scorer's judgement of one imagined outcome. Higher scores are better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub accept: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImaginationResult {
    pub action: Action,
    pub accepted: bool,
    pub iterations: usize,
}

/// Proposal order used by [`cycling_proposer`]: translations before
/// rotations, so the first candidate is always a forward move.
pub const PROPOSAL_ORDER: [Action; 10] = [
    Action::MoveForth,
    Action::MoveLeft,
    Action::MoveRight,
    Action::MoveBack,
    Action::MoveUp,
    Action::MoveDown,
    Action::TurnLeft,
    Action::TurnRight,
    Action::GimbalUp,
    Action::GimbalDown,
];

pub fn cycling_proposer() -> impl FnMut(usize) -> Action {
    |i| PROPOSAL_ORDER[i % PROPOSAL_ORDER.len()]
}

/// Accepts any outcome that strictly reduces the distance to `goal`.
pub fn distance_scorer(goal: Vec3) -> impl FnMut(&ImaginedOutcome) -> Verdict {
    move |o| {
        let before = o.before.position.distance(goal);
        let after = o.after.position.distance(goal);
        Verdict {
            accept: !o.blocked && after < before,
            score: -after,
        }
    }
}

/// Proposes, simulates and scores candidates until one is accepted.
///
/// The proposer receives the zero-based iteration number. When `max_iters`
/// candidates have been rejected the best-scored one is returned; ties keep
/// the earliest. `pose` is never modified.
///
/// # Panics
///
/// Panics if `max_iters` is zero or the proposer returns [`Action::Stop`].
pub fn imagination_loop(
    world: &CityWorld,
    pose: &AgentPose,
    motion: &MotionConfig,
    intr: &CameraIntrinsics,
    max_iters: usize,
    mut proposer: impl FnMut(usize) -> Action,
    mut scorer: impl FnMut(&ImaginedOutcome) -> Verdict,
) -> ImaginationResult {
    assert!(max_iters >= 1, "imagination needs at least one iteration");
    let mut best: Option<(Action, f64)> = None;
    for i in 0..max_iters {
        let action = proposer(i);
        let (after, blocked) = apply_action(pose, action, world, motion);
        let outcome = ImaginedOutcome {
            action,
            before: *pose,
            after,
            blocked,
            observation: render(world, &after, intr),
        };
        let verdict = scorer(&outcome);
        if verdict.accept {
            return ImaginationResult {
                action,
                accepted: true,
                iterations: i + 1,
            };
        }
        if best.is_none_or(|(_, s)| verdict.score > s) {
            best = Some((action, verdict.score));
        }
    }
    ImaginationResult {
        action: best.expect("at least one iteration").0,
        accepted: false,
        iterations: max_iters,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SparseMemoryConfig {
    /// Admit a frame only if its overlap with every recent stored frame is
    /// below this.
    pub threshold: f64,
    /// Number of most recent stored frames compared against.
    pub lookback: usize,
    pub samples: usize,
}

impl Default for SparseMemoryConfig {
    fn default() -> Self {
        Self {
            threshold: 0.7,
            lookback: 5,
            samples: DEFAULT_OVERLAP_SAMPLES,
        }
    }
}

impl SparseMemoryConfig {
    pub fn is_valid(&self) -> bool {
        self.threshold > 0.0 && self.threshold <= 1.0 && self.lookback >= 1 && self.samples >= 1
    }
}

pub fn sparse_memory_admit(
    world: &CityWorld,
    new_pose: &AgentPose,
    stored: &[AgentPose],
    cfg: &SparseMemoryConfig,
    intr: &CameraIntrinsics,
) -> bool {
    let recent = &stored[stored.len().saturating_sub(cfg.lookback)..];
    recent
        .iter()
        .map(|s| fov_overlap(world, new_pose, s, intr, cfg.samples))
        .fold(0.0, f64::max)
        < cfg.threshold
}

/// Stored poses of an overlap-gated frame buffer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseMemory {
    pub config: SparseMemoryConfig,
    stored: Vec<AgentPose>,
}

impl SparseMemory {
    pub fn new(config: SparseMemoryConfig) -> Self {
        Self {
            config,
            stored: Vec::new(),
        }
    }

    /// Stores `pose` if it adds enough new view and reports whether it did.
    pub fn offer(&mut self, world: &CityWorld, pose: &AgentPose, intr: &CameraIntrinsics) -> bool {
        let admit = sparse_memory_admit(world, pose, &self.stored, &self.config, intr);
        if admit {
            self.stored.push(*pose);
        }
        admit
    }

    pub fn stored(&self) -> &[AgentPose] {
        &self.stored
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }
}
