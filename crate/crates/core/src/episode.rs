//! The observe, decide, act loop and its structured log.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::camera::{render_camera, CameraIntrinsics, CameraPose, SemanticObservation};
use crate::geom::Vec3;
use crate::planner::polyline_length;
use crate::policy::{Decision, Policy};
use crate::scenario::Scenario;
use crate::world::{apply_action, distance_to_goal, Action, AgentPose, CityWorld, MotionConfig};

/// Success radius used when a scenario does not carry its own.
pub const DEFAULT_EPSILON: f64 = 20.0;
pub const DEFAULT_MAX_STEPS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EpisodeConfig {
    pub max_steps: u32,
    /// Success radius in meters. A scenario's own value takes precedence.
    pub epsilon: f64,
    pub seed: u64,
    pub motion: MotionConfig,
    pub intrinsics: CameraIntrinsics,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            epsilon: DEFAULT_EPSILON,
            seed: 0,
            motion: MotionConfig::default(),
            intrinsics: CameraIntrinsics::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), EpisodeError> {
        if self.max_steps == 0 {
            return Err(EpisodeError::InvalidConfig("max_steps must be at least 1"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(EpisodeError::InvalidConfig("epsilon must be positive"));
        }
        self.motion
            .validate()
            .map_err(|_| EpisodeError::InvalidConfig("invalid motion config"))
    }

    /// The radius that applies to `scenario`.
    pub fn epsilon_for(&self, scenario: &Scenario) -> f64 {
        scenario.goal.epsilon.unwrap_or(self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    Success,
    FailureTimeout,
    FailureStoppedFar,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::FailureTimeout => "failure_timeout",
            Outcome::FailureStoppedFar => "failure_stopped_far",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One executed action. `pose` and `distance_to_goal` describe the state
/// after the action.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct StepRecord {
    pub index: u32,
    pub pose: AgentPose,
    pub action: Action,
    pub blocked: bool,
    pub distance_to_goal: f64,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EpisodeLog {
    pub scenario_id: String,
    pub policy: String,
    pub goal: Vec3,
    pub epsilon: f64,
    /// Ground-truth trajectory length `l_i` used by SPL.
    pub optimal_length: f64,
    pub initial_pose: AgentPose,
    pub initial_distance: f64,
    pub steps: Vec<StepRecord>,
    /// `None` while the episode is still running.
    pub outcome: Option<Outcome>,
    pub final_distance: f64,
    /// Set when the policy failed and the episode was cut short.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub error: Option<String>,
}

impl EpisodeLog {
    pub fn is_success(&self) -> bool {
        self.outcome.is_some_and(Outcome::is_success)
    }

    /// Distance to goal before the first action and after every action.
    pub fn distances(&self) -> Vec<f64> {
        core::iter::once(self.initial_distance)
            .chain(self.steps.iter().map(|s| s.distance_to_goal))
            .collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        core::iter::once(self.initial_pose.position)
            .chain(self.steps.iter().map(|s| s.pose.position))
            .collect()
    }

    /// Sum of consecutive position changes. Blocked and rotation steps add 0.
    pub fn traveled_length(&self) -> f64 {
        polyline_length(&self.positions())
    }

    pub fn final_pose(&self) -> AgentPose {
        self.steps.last().map_or(self.initial_pose, |s| s.pose)
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpisodeError {
    InvalidConfig(&'static str),
    /// The episode has already ended.
    Finished(Outcome),
}

impl fmt::Display for EpisodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpisodeError::InvalidConfig(m) => write!(f, "invalid episode config: {m}"),
            EpisodeError::Finished(o) => write!(f, "episode already finished ({o})"),
        }
    }
}

impl core::error::Error for EpisodeError {}

/// Episode state machine driven one action at a time.
///
/// [`run_episode`] drives it from a [`Policy`]; the control service drives it
/// from remote requests. Both produce identical logs for identical actions.
#[derive(Debug, Clone)]
pub struct EpisodeStepper {
    world: CityWorld,
    motion: MotionConfig,
    intrinsics: CameraIntrinsics,
    max_steps: u32,
    pose: AgentPose,
    log: EpisodeLog,
}

impl EpisodeStepper {
    pub fn new(scenario: &Scenario, policy_name: &str, cfg: &EpisodeConfig) -> Self {
        let epsilon = cfg.epsilon_for(scenario);
        let goal = scenario.goal.position;
        let start = scenario.start;
        let d0 = distance_to_goal(&start, goal);
        Self {
            world: scenario.world.clone(),
            motion: cfg.motion,
            intrinsics: cfg.intrinsics,
            max_steps: cfg.max_steps,
            pose: start,
            log: EpisodeLog {
                scenario_id: scenario.id.clone(),
                policy: policy_name.to_string(),
                goal,
                epsilon,
                optimal_length: scenario.ground_truth.length,
                initial_pose: start,
                initial_distance: d0,
                steps: Vec::new(),
                outcome: None,
                final_distance: d0,
                error: None,
            },
        }
    }

    pub fn pose(&self) -> AgentPose {
        self.pose
    }

    pub fn world(&self) -> &CityWorld {
        &self.world
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn step_count(&self) -> u32 {
        self.log.steps.len() as u32
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.log.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.log.outcome.is_some()
    }

    pub fn observation(&self) -> SemanticObservation {
        render_camera(
            &self.world,
            &CameraPose::from(&self.pose),
            &self.intrinsics,
            self.step_count(),
        )
    }

    /// Executes one action and returns its record. A stop, or reaching the
    /// step cap, ends the episode.
    pub fn apply(&mut self, decision: Decision) -> Result<&StepRecord, EpisodeError> {
        if let Some(o) = self.log.outcome {
            return Err(EpisodeError::Finished(o));
        }
        let (pose, blocked) = if decision.action == Action::Stop {
            (self.pose, false)
        } else {
            apply_action(&self.pose, decision.action, &self.world, &self.motion)
        };
        self.pose = pose;
        let d = distance_to_goal(&pose, self.log.goal);
        self.log.steps.push(StepRecord {
            index: self.step_count(),
            pose,
            action: decision.action,
            blocked,
            distance_to_goal: d,
            rationale: decision.rationale,
        });
        self.log.final_distance = d;
        let within = d <= self.log.epsilon;
        if decision.action == Action::Stop {
            self.log.outcome = Some(if within { Outcome::Success } else { Outcome::FailureStoppedFar });
        } else if self.step_count() >= self.max_steps {
            self.log.outcome = Some(if within { Outcome::Success } else { Outcome::FailureTimeout });
        }
        Ok(self.log.steps.last().expect("step just pushed"))
    }

    /// Ends the episode because the policy failed.
    pub fn abort(&mut self, reason: impl Into<String>) {
        if self.log.outcome.is_none() {
            self.log.outcome = Some(Outcome::FailureTimeout);
            self.log.error = Some(reason.into());
        }
    }

    pub fn into_log(self) -> EpisodeLog {
        self.log
    }
}

/// Runs `policy` on `scenario` until it stops or the step cap is reached.
pub fn run_episode(scenario: &Scenario, policy: &mut dyn Policy, cfg: &EpisodeConfig) -> EpisodeLog {
    let mut stepper = EpisodeStepper::new(scenario, policy.name(), cfg);
    let initial = stepper.observation();
    if let Err(e) = policy.reset(&scenario.goal.instruction, &initial) {
        stepper.abort(e.to_string());
        return stepper.into_log();
    }
    while !stepper.is_finished() {
        let observation = stepper.observation();
        match policy.next_action(&observation) {
            Ok(decision) => {
                stepper.apply(decision).expect("stepper checked as running");
            }
            Err(e) => stepper.abort(e.to_string()),
        }
    }
    stepper.into_log()
}
