//! The policy contract shared by baselines, model-backed policies and the
//! agent, plus the history windowing and action-text parsing they rely on.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::camera::SemanticObservation;
use crate::geom::Vec3;
use crate::planner::PlanError;
use crate::world::{Action, AgentPose};

/// An action together with the policy's stated reason for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub rationale: String,
}

impl Decision {
    pub fn new(action: Action, rationale: impl Into<String>) -> Self {
        Self {
            action,
            rationale: rationale.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    /// A model backend failed after exhausting its retries.
    Backend(String),
    Plan(PlanError),
    NotReset,
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::Backend(m) => write!(f, "backend failure: {m}"),
            PolicyError::Plan(e) => write!(f, "planning failure: {e}"),
            PolicyError::NotReset => f.write_str("policy queried before reset"),
        }
    }
}

impl core::error::Error for PolicyError {}

impl From<PlanError> for PolicyError {
    fn from(e: PlanError) -> Self {
        PolicyError::Plan(e)
    }
}

/// Per-episode navigation policy `a_t = π(o_t, α_t, I)`.
///
/// The gimbal angle `α_t` travels inside the observation's camera pose.
/// Handles are stateful and must not be shared between episodes.
pub trait Policy {
    fn name(&self) -> &str;

    /// True when decisions come from a model backend rather than a seeded
    /// local computation.
    fn requires_backend(&self) -> bool {
        false
    }

    fn reset(&mut self, instruction: &str, initial: &SemanticObservation) -> Result<(), PolicyError>;

    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError>;
}

impl<P: Policy + ?Sized> Policy for alloc::boxed::Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn requires_backend(&self) -> bool {
        (**self).requires_backend()
    }
    fn reset(&mut self, instruction: &str, initial: &SemanticObservation) -> Result<(), PolicyError> {
        (**self).reset(instruction, initial)
    }
    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        (**self).next_action(observation)
    }
}

impl SemanticObservation {
    /// The agent pose this observation was rendered from.
    pub fn agent_pose(&self) -> AgentPose {
        AgentPose {
            position: self.camera_pose.position,
            yaw: self.camera_pose.yaw,
            gimbal: self.camera_pose.pitch,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.camera_pose.position
    }
}

/// Indices of the history moments kept in a bounded prompt window.
///
/// Short histories are returned whole. Longer ones are sampled uniformly with
/// `i_k = round(k (n - 1) / (capacity - 1))`, which always keeps the first and
/// the most recent moment.
///
/// # Panics
///
/// Panics if `capacity < 2`.
pub fn select_window(history_length: usize, capacity: usize) -> Vec<usize> {
    assert!(capacity >= 2, "window capacity must be at least 2");
    if history_length <= capacity {
        return (0..history_length).collect();
    }
    let span = history_length - 1;
    let den = capacity - 1;
    let mut out: Vec<usize> = Vec::with_capacity(capacity);
    for k in 0..capacity {
        // round-half-up in integer arithmetic
        let i = (2 * k * span + den) / (2 * den);
        if out.last() != Some(&i) {
            out.push(i);
        }
    }
    out
}

/// Default number of moments in a prompt memory window.
pub const MEMORY_WINDOW: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryMoment {
    pub observation: String,
    pub action: Option<Action>,
    pub rationale: String,
}

/// Full per-episode history with a bounded, uniformly sampled view.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryWindow {
    capacity: usize,
    history: Vec<MemoryMoment>,
}

impl Default for MemoryWindow {
    fn default() -> Self {
        Self::new(MEMORY_WINDOW)
    }
}

impl MemoryWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 2);
        Self {
            capacity,
            history: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, moment: MemoryMoment) {
        self.history.push(moment);
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn clear(&mut self) {
        self.history.clear();
    }

    pub fn last_mut(&mut self) -> Option<&mut MemoryMoment> {
        self.history.last_mut()
    }

    /// The sampled moments, each paired with its original step index.
    pub fn entries(&self) -> Vec<(usize, &MemoryMoment)> {
        select_window(self.history.len(), self.capacity)
            .into_iter()
            .map(|i| (i, &self.history[i]))
            .collect()
    }
}

/// Surface forms accepted for each action, in normalized token form.
const ALIASES: &[(&str, Action)] = &[
    ("adjust camera gimbal upwards", Action::GimbalUp),
    ("adjust camera gimbal upward", Action::GimbalUp),
    ("adjust camera gimbal downwards", Action::GimbalDown),
    ("adjust camera gimbal downward", Action::GimbalDown),
    ("gimbal up", Action::GimbalUp),
    ("gimbal down", Action::GimbalDown),
    ("angle up", Action::GimbalUp),
    ("angle down", Action::GimbalDown),
    ("turn left", Action::TurnLeft),
    ("turn right", Action::TurnRight),
    ("move forth", Action::MoveForth),
    ("move forward", Action::MoveForth),
    ("move back", Action::MoveBack),
    ("move backward", Action::MoveBack),
    ("move backwards", Action::MoveBack),
    ("move left", Action::MoveLeft),
    ("move right", Action::MoveRight),
    ("move up", Action::MoveUp),
    ("move down", Action::MoveDown),
    ("stop", Action::Stop),
];

fn tokenize(text: &str) -> Vec<String> {
    let lowered: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    lowered.split_whitespace().map(ToString::to_string).collect()
}

/// Finds the first action named in free text.
///
/// Matching ignores case and treats underscores, hyphens and whitespace alike;
/// a run-together form such as `moveforth` also matches. When several aliases
/// start at the same word the longest wins.
pub fn parse_action(text: &str) -> Option<Action> {
    let tokens = tokenize(text);
    let aliases: Vec<(Vec<&str>, String, Action)> = ALIASES
        .iter()
        .map(|(a, act)| {
            let words: Vec<&str> = a.split(' ').collect();
            let compact = words.concat();
            (words, compact, *act)
        })
        .collect();
    for i in 0..tokens.len() {
        let mut best: Option<(usize, Action)> = None;
        for (words, compact, act) in &aliases {
            let spaced = tokens.len() - i >= words.len() && words.iter().zip(&tokens[i..]).all(|(w, t)| w == t);
            let joined = tokens[i] == *compact;
            if (spaced || joined) && best.is_none_or(|(len, _)| words.len() > len) {
                best = Some((words.len(), *act));
            }
        }
        if let Some((_, act)) = best {
            return Some(act);
        }
    }
    None
}

/// Command list in the form presented to models.
pub fn command_list() -> String {
    let mut s = String::new();
    for a in Action::ALL {
        s.push_str("- ");
        s.push_str(a.name());
        s.push('\n');
    }
    s.pop();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn window_examples() {
        assert_eq!(select_window(5, 3), vec![0, 2, 4]);
        assert_eq!(select_window(30, 30), (0..30).collect::<Vec<_>>());
        assert_eq!(select_window(0, 30), Vec::<usize>::new());
    }

    #[test]
    fn window_of_hundred_has_gaps_of_three_or_four() {
        let w = select_window(100, 30);
        assert_eq!(w.len(), 30);
        assert_eq!((w[0], w[29]), (0, 99));
        assert!(w.windows(2).all(|p| matches!(p[1] - p[0], 3 | 4)));
    }

    #[test]
    #[should_panic]
    fn window_rejects_capacity_one() {
        select_window(10, 1);
    }

    #[test]
    fn parses_canonical_names_and_variants() {
        assert_eq!(parse_action("move_forth"), Some(Action::MoveForth));
        assert_eq!(parse_action("MOVE FORTH because the target is ahead"), Some(Action::MoveForth));
        assert_eq!(parse_action("Action: gimbal-down"), Some(Action::GimbalDown));
        assert_eq!(parse_action("adjust camera gimbal upwards"), Some(Action::GimbalUp));
        assert_eq!(parse_action("I will TurnRight now"), Some(Action::TurnRight));
        assert_eq!(parse_action("angle_down"), Some(Action::GimbalDown));
        assert_eq!(parse_action("nothing useful"), None);
    }

    #[test]
    fn earliest_mention_wins() {
        assert_eq!(parse_action("move_up, then later turn_left"), Some(Action::MoveUp));
    }

    #[test]
    fn memory_window_keeps_endpoints() {
        let mut m = MemoryWindow::default();
        for i in 0..100 {
            m.push(MemoryMoment {
                observation: alloc::format!("obs {i}"),
                action: Some(Action::MoveForth),
                rationale: String::new(),
            });
        }
        let e = m.entries();
        assert_eq!(e.len(), 30);
        assert_eq!(e.first().unwrap().0, 0);
        assert_eq!(e.last().unwrap().0, 99);
    }
}
