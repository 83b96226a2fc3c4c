//! Reference policies that need no model backend.

use alloc::format;
use alloc::string::String;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::SemanticObservation;
use crate::geom::{angle_diff, rad_to_deg, Vec3};
use crate::planner::DistanceField;
use crate::policy::{Decision, Policy, PolicyError};
use crate::world::{apply_action, Action, ActionCategory, CityWorld, MotionConfig, GIMBAL_MIN};

/// Uniform over the ten motion commands. Never stops on its own; episodes
/// end at the step cap.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> Action {
        Action::MOTIONS[self.rng.random_range(0..Action::MOTIONS.len())]
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, _instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(())
    }

    fn next_action(&mut self, _observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        Ok(Decision::new(self.draw(), "uniform random draw"))
    }
}

/// Dataset-level share of horizontal, vertical and rotation/gimbal actions.
pub const ACTION_PRIOR: [(ActionCategory, f64); 3] = [
    (ActionCategory::Horizontal, 0.450),
    (ActionCategory::Vertical, 0.282),
    (ActionCategory::Rotation, 0.268),
];

/// Samples an action category from [`ACTION_PRIOR`], then an action
/// uniformly within that category.
#[derive(Debug, Clone)]
pub struct ActionSamplingPolicy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl ActionSamplingPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn draw(&mut self) -> Action {
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut category = ACTION_PRIOR[ACTION_PRIOR.len() - 1].0;
        for (c, w) in ACTION_PRIOR {
            acc += w;
            if u < acc {
                category = c;
                break;
            }
        }
        let members: alloc::vec::Vec<Action> = Action::MOTIONS
            .into_iter()
            .filter(|a| a.category() == Some(category))
            .collect();
        members[self.rng.random_range(0..members.len())]
    }
}

impl Policy for ActionSamplingPolicy {
    fn name(&self) -> &str {
        "action_sampling"
    }

    fn reset(&mut self, _instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(())
    }

    fn next_action(&mut self, _observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        Ok(Decision::new(self.draw(), "sampled from the dataset action prior"))
    }
}

const TRANSLATIONS: [Action; 6] = [
    Action::MoveForth,
    Action::MoveLeft,
    Action::MoveRight,
    Action::MoveBack,
    Action::MoveUp,
    Action::MoveDown,
];

/// Privileged shortest-path follower used as the human-pilot stand-in.
///
/// Each step it first turns to face the furthest directly reachable point
/// on the optimal route (to within half a turn step, re-turning only once the
/// error exceeds three quarters of one, so it does not zigzag), optionally tilts the gimbal toward the goal, and then
/// takes the translation that most reduces the path-oracle cost-to-go. It
/// stops inside `arrival_radius` or when no translation makes progress.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    field: DistanceField,
    motion: MotionConfig,
    arrival_radius: f64,
    track_gimbal: bool,
    aligned: bool,
}

impl OraclePolicy {
    /// Fails with the planner error when the goal is blocked or unreachable.
    pub fn new(world: &CityWorld, goal: Vec3, motion: &MotionConfig) -> Result<Self, PolicyError> {
        let field = DistanceField::new(world, goal, motion)?;
        Ok(Self {
            field,
            motion: *motion,
            arrival_radius: motion.translation_step / 2.0,
            track_gimbal: false,
            aligned: false,
        })
    }

    /// Stop as soon as the goal is within `radius` meters.
    pub fn with_arrival_radius(mut self, radius: f64) -> Self {
        self.arrival_radius = radius;
        self
    }

    /// Keep the camera pitched toward the goal like a pilot framing the target.
    pub fn with_gimbal_tracking(mut self, on: bool) -> Self {
        self.track_gimbal = on;
        self
    }

    pub fn field(&self) -> &DistanceField {
        &self.field
    }

    fn decide(&mut self, obs: &SemanticObservation) -> Decision {
        let pose = obs.agent_pose();
        let world = self.field.world();
        let goal = self.field.goal();
        let here = self.field.cost_to_go(pose.position);
        let dist = pose.position.distance(goal);
        if dist <= self.arrival_radius {
            return Decision::new(Action::Stop, format!("arrived, {dist:.1} m from goal"));
        }
        let Some(target) = self.field.lookahead(pose.position) else {
            return Decision::new(Action::Stop, String::from("no route from here"));
        };
        let to_target = target - pose.position;
        if to_target.horizontal_norm() >= self.motion.translation_step / 2.0 {
            let desired = rad_to_deg(libm::atan2(to_target.y, to_target.x));
            let err = angle_diff(pose.yaw, desired);
            let tolerance = if self.aligned { 0.75 } else { 0.5 } * self.motion.turn_step;
            if libm::fabs(err) > tolerance {
                self.aligned = false;
                let a = if err > 0.0 { Action::TurnLeft } else { Action::TurnRight };
                return Decision::new(a, format!("heading error {err:.1}°"));
            }
        }
        self.aligned = true;
        if self.track_gimbal {
            let to_goal = goal - pose.position;
            let elevation = rad_to_deg(libm::atan2(to_goal.z, to_goal.horizontal_norm()));
            let step = self.motion.gimbal_step;
            let wanted = (libm::round(elevation / step) * step).clamp(GIMBAL_MIN, 0.0);
            if libm::fabs(wanted - pose.gimbal) >= step / 2.0 {
                let a = if wanted > pose.gimbal { Action::GimbalUp } else { Action::GimbalDown };
                return Decision::new(a, format!("framing goal at elevation {elevation:.1}°"));
            }
        }
        let mut best: Option<(Action, f64)> = None;
        for a in TRANSLATIONS {
            let (next, blocked) = apply_action(&pose, a, world, &self.motion);
            if blocked {
                continue;
            }
            let c = self.field.cost_to_go(next.position);
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((a, c));
            }
        }
        match best {
            Some((a, c)) if c < here - 1e-9 => Decision::new(a, format!("cost-to-go {here:.1} -> {c:.1} m")),
            _ => Decision::new(Action::Stop, format!("no improving move, {dist:.1} m from goal")),
        }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn reset(&mut self, _instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        self.aligned = false;
        Ok(())
    }

    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        Ok(self.decide(observation))
    }
}
