//! City geometry, agent state and the discrete-action dynamics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::geom::{deg_to_rad, normalize_yaw, Aabb, Vec3};

pub const GIMBAL_MIN: f64 = -90.0;
pub const GIMBAL_MAX: f64 = 0.0;

/// Full controllable state of the aircraft.
///
/// Yaw is measured in degrees counterclockwise from +x. Gimbal pitch is
/// 0 for a horizontal view and -90 for straight down.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AgentPose {
    pub position: Vec3,
    pub yaw: f64,
    pub gimbal: f64,
}

impl AgentPose {
    /// Builds a pose with the position snapped to the simulation lattice,
    /// yaw wrapped into `[0, 360)` and gimbal clamped to `[-90, 0]`.
    pub fn new(position: Vec3, yaw: f64, gimbal: f64) -> Self {
        Self {
            position: position.snapped(),
            yaw: normalize_yaw(yaw),
            gimbal: gimbal.clamp(GIMBAL_MIN, GIMBAL_MAX),
        }
    }

    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z), 0.0, 0.0)
    }

    pub fn with_yaw(mut self, yaw: f64) -> Self {
        self.yaw = normalize_yaw(yaw);
        self
    }

    pub fn with_gimbal(mut self, gimbal: f64) -> Self {
        self.gimbal = gimbal.clamp(GIMBAL_MIN, GIMBAL_MAX);
        self
    }

    /// Horizontal unit vector the aircraft is facing.
    pub fn heading(&self) -> Vec3 {
        let r = deg_to_rad(self.yaw);
        Vec3::new(libm::cos(r), libm::sin(r), 0.0)
    }

    /// Horizontal unit vector pointing to the aircraft's left.
    pub fn left(&self) -> Vec3 {
        let r = deg_to_rad(self.yaw + 90.0);
        Vec3::new(libm::cos(r), libm::sin(r), 0.0)
    }
}

/// Broad action families used for dataset statistics and the
/// action-sampling prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ActionCategory {
    Horizontal,
    Vertical,
    /// Turns and gimbal adjustments.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    TurnLeft,
    TurnRight,
    MoveForth,
    MoveLeft,
    MoveRight,
    MoveBack,
    MoveUp,
    MoveDown,
    GimbalUp,
    GimbalDown,
    /// Terminal meta-action; never passed to [`apply_action`].
    Stop,
}

impl Action {
    /// The ten motion commands in canonical order.
    pub const MOTIONS: [Action; 10] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::MoveForth,
        Action::MoveLeft,
        Action::MoveRight,
        Action::MoveBack,
        Action::MoveUp,
        Action::MoveDown,
        Action::GimbalUp,
        Action::GimbalDown,
    ];

    pub const ALL: [Action; 11] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::MoveForth,
        Action::MoveLeft,
        Action::MoveRight,
        Action::MoveBack,
        Action::MoveUp,
        Action::MoveDown,
        Action::GimbalUp,
        Action::GimbalDown,
        Action::Stop,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::MoveForth => "move_forth",
            Action::MoveLeft => "move_left",
            Action::MoveRight => "move_right",
            Action::MoveBack => "move_back",
            Action::MoveUp => "move_up",
            Action::MoveDown => "move_down",
            Action::GimbalUp => "gimbal_up",
            Action::GimbalDown => "gimbal_down",
            Action::Stop => "stop",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn category(self) -> Option<ActionCategory> {
        use Action::*;
        match self {
            MoveForth | MoveBack | MoveLeft | MoveRight => Some(ActionCategory::Horizontal),
            MoveUp | MoveDown => Some(ActionCategory::Vertical),
            TurnLeft | TurnRight | GimbalUp | GimbalDown => Some(ActionCategory::Rotation),
            Stop => None,
        }
    }

    pub fn is_translation(self) -> bool {
        matches!(
            self.category(),
            Some(ActionCategory::Horizontal | ActionCategory::Vertical)
        )
    }

    pub fn inverse(self) -> Action {
        use Action::*;
        match self {
            TurnLeft => TurnRight,
            TurnRight => TurnLeft,
            MoveForth => MoveBack,
            MoveBack => MoveForth,
            MoveLeft => MoveRight,
            MoveRight => MoveLeft,
            MoveUp => MoveDown,
            MoveDown => MoveUp,
            GimbalUp => GimbalDown,
            GimbalDown => GimbalUp,
            Stop => Stop,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MotionConfig {
    /// Horizontal displacement per translation, meters.
    pub translation_step: f64,
    /// Vertical displacement per up/down, meters.
    pub vertical_step: f64,
    /// Yaw change per turn, degrees.
    pub turn_step: f64,
    /// Pitch change per gimbal command, degrees.
    pub gimbal_step: f64,
    /// Clearance kept from building surfaces, meters.
    pub safety_radius: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            translation_step: 10.0,
            vertical_step: 10.0,
            turn_step: 22.5,
            gimbal_step: 45.0,
            safety_radius: 1.0,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let positive = [
            self.translation_step,
            self.vertical_step,
            self.turn_step,
            self.gimbal_step,
            self.safety_radius,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        let divides = {
            let q = 90.0 / self.gimbal_step;
            libm::fabs(q - libm::round(q)) < 1e-9
        };
        if positive && divides {
            Ok(())
        } else {
            Err(WorldError::InvalidMotionConfig)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Building {
    pub label: String,
    pub min: Vec3,
    pub max: Vec3,
}

impl Building {
    pub fn new(label: impl Into<String>, min: Vec3, max: Vec3) -> Self {
        let b = Aabb::new(min, max);
        Self {
            label: label.into(),
            min: b.min,
            max: b.max,
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb {
            min: self.min,
            max: self.max,
        }
    }

    pub fn top(&self) -> f64 {
        self.max.z
    }
}

fn default_landmark_size() -> f64 {
    2.0
}

/// A labeled point of interest, rendered as a small cube of edge `size`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Landmark {
    pub label: String,
    pub position: Vec3,
    #[cfg_attr(feature = "serde", serde(default))]
    pub parent: Option<String>,
    #[cfg_attr(feature = "serde", serde(default = "default_landmark_size"))]
    pub size: f64,
}

impl Landmark {
    pub fn new(label: impl Into<String>, position: Vec3) -> Self {
        Self {
            label: label.into(),
            position,
            parent: None,
            size: default_landmark_size(),
        }
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::new(self.position, self.position).inflate(self.size * 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorldError {
    DegenerateBuilding(String),
    DuplicateLabel(String),
    LandmarkOutOfBounds(String),
    UnknownParent(String),
    InvalidBounds,
    InvalidMotionConfig,
}

impl fmt::Display for WorldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldError::DegenerateBuilding(l) => write!(f, "building `{l}` has zero volume"),
            WorldError::DuplicateLabel(l) => write!(f, "label `{l}` is used more than once"),
            WorldError::LandmarkOutOfBounds(l) => write!(f, "landmark `{l}` lies outside the world bounds"),
            WorldError::UnknownParent(l) => write!(f, "landmark parent `{l}` is not a building"),
            WorldError::InvalidBounds => f.write_str("world bounds are empty or not finite"),
            WorldError::InvalidMotionConfig => {
                f.write_str("motion steps must be positive and the gimbal step must divide 90")
            }
        }
    }
}

impl core::error::Error for WorldError {}

/// Immutable desk-scale city: box buildings, labeled landmarks and bounds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CityWorld {
    buildings: Vec<Building>,
    landmarks: Vec<Landmark>,
    bounds: Aabb,
    z_min: f64,
}

impl CityWorld {
    pub const DEFAULT_Z_MIN: f64 = 2.0;

    pub fn new(
        buildings: Vec<Building>,
        landmarks: Vec<Landmark>,
        bounds: Aabb,
        z_min: f64,
    ) -> Result<Self, WorldError> {
        let world = Self {
            buildings,
            landmarks,
            bounds,
            z_min,
        };
        world.validate()?;
        Ok(world)
    }

    /// World with no geometry at all.
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            buildings: Vec::new(),
            landmarks: Vec::new(),
            bounds,
            z_min: Self::DEFAULT_Z_MIN,
        }
    }

    /// Checks the structural invariants. Deserialized worlds must pass this
    /// before use.
    pub fn validate(&self) -> Result<(), WorldError> {
        let b = &self.bounds;
        if !(b.min.is_finite() && b.max.is_finite()) || b.volume() <= 0.0 || !self.z_min.is_finite() {
            return Err(WorldError::InvalidBounds);
        }
        let mut labels: Vec<&str> = Vec::new();
        for building in &self.buildings {
            if building.aabb().volume() <= 0.0 {
                return Err(WorldError::DegenerateBuilding(building.label.clone()));
            }
            labels.push(&building.label);
        }
        for lm in &self.landmarks {
            if !b.contains(lm.position) {
                return Err(WorldError::LandmarkOutOfBounds(lm.label.clone()));
            }
            if let Some(p) = &lm.parent {
                if !self.buildings.iter().any(|bd| &bd.label == p) {
                    return Err(WorldError::UnknownParent(p.clone()));
                }
            }
            labels.push(&lm.label);
        }
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(WorldError::DuplicateLabel(w[0].into()));
        }
        Ok(())
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn with_z_min(mut self, z_min: f64) -> Self {
        self.z_min = z_min;
        self
    }

    pub fn landmark(&self, label: &str) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.label == label)
    }

    pub fn building(&self, label: &str) -> Option<&Building> {
        self.buildings.iter().find(|b| b.label == label)
    }

    /// True when `label` names any building or landmark.
    pub fn has_label(&self, label: &str) -> bool {
        self.landmark(label).is_some() || self.building(label).is_some()
    }

    /// Whether an aircraft may occupy `p`.
    pub fn is_free(&self, p: Vec3, safety_radius: f64) -> bool {
        p.z >= self.z_min
            && self.bounds.contains(p)
            && !self
                .buildings
                .iter()
                .any(|b| b.aabb().inflate(safety_radius).contains_strict(p))
    }

    /// Whether the straight flight `a -> b` is collision free.
    pub fn segment_free(&self, a: Vec3, b: Vec3, safety_radius: f64) -> bool {
        self.is_free(a, safety_radius)
            && self.is_free(b, safety_radius)
            && !self
                .buildings
                .iter()
                .any(|bd| bd.aabb().inflate(safety_radius).segment_crosses(a, b))
    }

    /// Line of sight between two points against raw building boxes.
    pub fn line_of_sight(&self, a: Vec3, b: Vec3) -> bool {
        self.line_of_sight_except(a, b, None)
    }

    /// Line of sight ignoring the building at index `skip`.
    pub fn line_of_sight_except(&self, a: Vec3, b: Vec3, skip: Option<usize>) -> bool {
        !self
            .buildings
            .iter()
            .enumerate()
            .any(|(i, bd)| Some(i) != skip && bd.aabb().segment_crosses(a, b))
    }

    /// Distance to the first building surface along a unit ray.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, max_range: f64) -> Option<f64> {
        self.buildings
            .iter()
            .filter_map(|b| b.aabb().ray_entry(origin, dir, max_range))
            .filter(|t| *t > 1e-9)
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
    }
}

/// The dynamics `p_t = f(a_t, p_{t-1})`.
///
/// Translations move along the yaw frame; a move that would cross an inflated
/// building, leave the bounds or drop below `z_min` is rejected and the pose is
/// returned unchanged with `blocked = true`.
///
/// # Panics
///
/// Panics on [`Action::Stop`], which has no dynamics.
pub fn apply_action(
    pose: &AgentPose,
    action: Action,
    world: &CityWorld,
    cfg: &MotionConfig,
) -> (AgentPose, bool) {
    let displacement = match action {
        Action::TurnLeft => return (pose.with_yaw(pose.yaw + cfg.turn_step), false),
        Action::TurnRight => return (pose.with_yaw(pose.yaw - cfg.turn_step), false),
        Action::GimbalUp => return (pose.with_gimbal(pose.gimbal + cfg.gimbal_step), false),
        Action::GimbalDown => return (pose.with_gimbal(pose.gimbal - cfg.gimbal_step), false),
        Action::MoveForth => pose.heading() * cfg.translation_step,
        Action::MoveBack => pose.heading() * -cfg.translation_step,
        Action::MoveLeft => pose.left() * cfg.translation_step,
        Action::MoveRight => pose.left() * -cfg.translation_step,
        Action::MoveUp => Vec3::new(0.0, 0.0, cfg.vertical_step),
        Action::MoveDown => Vec3::new(0.0, 0.0, -cfg.vertical_step),
        Action::Stop => panic!("stop has no dynamics"),
    };
    let target = pose.position + displacement.snapped();
    if world.segment_free(pose.position, target, cfg.safety_radius) {
        (
            AgentPose {
                position: target,
                ..*pose
            },
            false,
        )
    } else {
        (*pose, true)
    }
}

pub fn distance_to_goal(pose: &AgentPose, goal: Vec3) -> f64 {
    pose.position.distance(goal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn open_world() -> CityWorld {
        CityWorld::empty(Aabb::new(
            Vec3::new(-500.0, -500.0, 0.0),
            Vec3::new(500.0, 500.0, 200.0),
        ))
    }

    #[test]
    fn move_forth_along_yaw_zero() {
        let (p, blocked) = apply_action(
            &AgentPose::at(0.0, 0.0, 50.0),
            Action::MoveForth,
            &open_world(),
            &MotionConfig::default(),
        );
        assert!(!blocked);
        assert_eq!(p.position, Vec3::new(10.0, 0.0, 50.0));
    }

    #[test]
    fn turn_left_is_counterclockwise() {
        let (p, _) = apply_action(
            &AgentPose::at(0.0, 0.0, 50.0),
            Action::TurnLeft,
            &open_world(),
            &MotionConfig::default(),
        );
        assert_eq!(p.yaw, 22.5);
        let (p, _) = apply_action(&p, Action::MoveForth, &open_world(), &MotionConfig::default());
        assert!(p.position.y > 0.0);
    }

    #[test]
    fn left_is_ninety_degrees_ccw_of_heading() {
        let (p, _) = apply_action(
            &AgentPose::at(0.0, 0.0, 50.0),
            Action::MoveLeft,
            &open_world(),
            &MotionConfig::default(),
        );
        assert_eq!(p.position, Vec3::new(0.0, 10.0, 50.0));
    }

    #[test]
    fn gimbal_clamps_at_both_ends() {
        let w = open_world();
        let cfg = MotionConfig::default();
        let (p, blocked) = apply_action(&AgentPose::at(0.0, 0.0, 50.0), Action::GimbalUp, &w, &cfg);
        assert_eq!(p.gimbal, 0.0);
        assert!(!blocked);
        let down = AgentPose::at(0.0, 0.0, 50.0).with_gimbal(-90.0);
        let (p, _) = apply_action(&down, Action::GimbalDown, &w, &cfg);
        assert_eq!(p.gimbal, -90.0);
    }

    #[test]
    fn wall_blocks_forward_move() {
        let w = CityWorld::new(
            vec![Building::new(
                "wall",
                Vec3::new(5.0, -20.0, 0.0),
                Vec3::new(8.0, 20.0, 100.0),
            )],
            vec![],
            open_world().bounds(),
            2.0,
        )
        .unwrap();
        let start = AgentPose::at(0.0, 0.0, 50.0);
        let (p, blocked) = apply_action(&start, Action::MoveForth, &w, &MotionConfig::default());
        assert!(blocked);
        assert_eq!(p, start);
    }

    #[test]
    fn ground_clearance_blocks_descent() {
        let start = AgentPose::at(0.0, 0.0, 5.0);
        let (p, blocked) = apply_action(&start, Action::MoveDown, &open_world(), &MotionConfig::default());
        assert!(blocked);
        assert_eq!(p, start);
    }

    #[test]
    fn leaving_bounds_is_blocked() {
        let start = AgentPose::at(495.0, 0.0, 50.0);
        let (_, blocked) = apply_action(&start, Action::MoveForth, &open_world(), &MotionConfig::default());
        assert!(blocked);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_goal(&AgentPose::at(0.0, 0.0, 0.0), Vec3::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(distance_to_goal(&AgentPose::at(1.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 1.0)), 0.0);
        assert_eq!(distance_to_goal(&AgentPose::at(1.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 11.0)), 10.0);
    }

    #[test]
    fn world_validation_rejects_duplicates_and_flat_boxes() {
        let bounds = open_world().bounds();
        let flat = Building::new("flat", Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 0.0));
        assert_eq!(
            CityWorld::new(vec![flat], vec![], bounds, 2.0),
            Err(WorldError::DegenerateBuilding("flat".into()))
        );
        let a = Building::new("a", Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 10.0));
        let lm = Landmark::new("a", Vec3::new(1.0, 1.0, 11.0));
        assert_eq!(
            CityWorld::new(vec![a], vec![lm], bounds, 2.0),
            Err(WorldError::DuplicateLabel("a".into()))
        );
        let far = Landmark::new("far", Vec3::new(9999.0, 0.0, 0.0));
        assert!(matches!(
            CityWorld::new(vec![], vec![far], bounds, 2.0),
            Err(WorldError::LandmarkOutOfBounds(_))
        ));
    }

    #[test]
    fn motion_config_requires_gimbal_step_dividing_ninety() {
        assert!(MotionConfig::default().validate().is_ok());
        let bad = MotionConfig {
            gimbal_step: 40.0,
            ..MotionConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn motion_categories_partition_four_two_four() {
        let count = |c| Action::MOTIONS.iter().filter(|a| a.category() == Some(c)).count();
        assert_eq!(count(ActionCategory::Horizontal), 4);
        assert_eq!(count(ActionCategory::Vertical), 2);
        assert_eq!(count(ActionCategory::Rotation), 4);
        assert_eq!(Action::Stop.category(), None);
    }
}
