//! Six-module agent: localization, planning, imagination, decision-making,
//! active perception and memory, each backed by one prompt.
//!
//! Every step calls the gateway in the fixed order localize, plan, imagine,
//! decide, and adds one active-perception call when the decision is not
//! marked `CONFIDENT`. The optional enhancements plug in around that core.

use std::cell::RefCell;
use std::sync::Arc;

use aeronav_core::camera::{panorama, probe_views};
use aeronav_core::enhancements::{
    grounded_controller_step, imagination_loop, GroundingResult, SparseMemory, SparseMemoryConfig, Verdict,
    DEFAULT_DEAD_ZONE, DEFAULT_MAX_ITERS, PROPOSAL_ORDER,
};
use aeronav_core::policy::{command_list, parse_action, select_window, Decision, Policy, PolicyError, MEMORY_WINDOW};
use aeronav_core::{Action, AgentPose, CameraIntrinsics, CityWorld, MotionConfig, SemanticObservation};
use serde::{Deserialize, Serialize};

use crate::gateway::{GatewayHandle, Message};
use crate::lmm_policy::{ask, gimbal_text, labeled_line, one_line, rationale_of, render, SYSTEM_PROMPT};
use crate::prompts::{PromptKind, PromptSet};

pub const GOAL_MARKER: &str = "GOAL_REACHED";
pub const NO_ACTIONS_MARKER: &str = "no actions taken yet";
pub const UNKNOWN_EFFECT: &str = "unknown effect";
pub const UNSPECIFIED: &str = "unspecified";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Enhancements {
    pub grounding: bool,
    pub crossview: bool,
    pub imagination: bool,
    pub sparse_memory: bool,
}

impl Enhancements {
    /// Parses a comma-separated list such as `grounding,sparse_memory`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut e = Self::default();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "grounding" => e.grounding = true,
                "crossview" => e.crossview = true,
                "imagination" => e.imagination = true,
                "sparse_memory" => e.sparse_memory = true,
                other => return Err(format!("unknown enhancement `{other}`")),
            }
        }
        Ok(e)
    }

    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.grounding, "grounding"),
            (self.crossview, "crossview"),
            (self.imagination, "imagination"),
            (self.sparse_memory, "sparse_memory"),
        ]
        .into_iter()
        .filter_map(|(on, n)| on.then_some(n))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub enhancements: Enhancements,
    pub window: usize,
    pub dead_zone: f64,
    pub max_iters: usize,
    pub sparse: SparseMemoryConfig,
    pub motion: MotionConfig,
    pub intrinsics: CameraIntrinsics,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            enhancements: Enhancements::default(),
            window: MEMORY_WINDOW,
            dead_zone: DEFAULT_DEAD_ZONE,
            max_iters: DEFAULT_MAX_ITERS,
            sparse: SparseMemoryConfig::default(),
            motion: MotionConfig::default(),
            intrinsics: CameraIntrinsics::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub start: String,
    pub flight: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanState {
    pub inference: String,
    pub perception_plan: Vec<String>,
    pub route_plan: RoutePlan,
    pub progress_note: String,
    /// Parse problems, empty for a well-formed reply.
    pub flags: Vec<String>,
}

impl PlanState {
    /// Compact text form stored in memory and fed to later prompts.
    pub fn summary(&self) -> String {
        format!(
            "perception: {}; route: start {}, flight {}, end {}; progress: {}",
            self.perception_plan.join(" > "),
            self.route_plan.start,
            self.route_plan.flight,
            self.route_plan.end,
            self.progress_note
        )
    }
}

fn strip_item_marker(line: &str) -> &str {
    let l = line.trim();
    let l = l.trim_start_matches(['-', '*', '\u{2022}']).trim_start();
    let digits = l.find(|c: char| !c.is_ascii_digit()).unwrap_or(l.len());
    if digits > 0 && l[digits..].starts_with(['.', ')']) {
        l[digits + 1..].trim()
    } else {
        l
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Inference,
    Perception,
    Route,
    Progress,
}

fn section_header(line: &str) -> Option<(Section, &str)> {
    let l = line.trim().trim_start_matches(['#', '*', ' ']);
    let heads = [
        ("inference", Section::Inference),
        ("perception plan", Section::Perception),
        ("route plan", Section::Route),
        ("route", Section::Route),
        ("progress", Section::Progress),
    ];
    heads.into_iter().find_map(|(h, s)| {
        let head = l.get(..h.len())?;
        let rest = l[h.len()..].trim_start_matches('*').trim_start();
        (head.eq_ignore_ascii_case(h) && rest.starts_with(':')).then(|| (s, rest[1..].trim_start_matches('*').trim()))
    })
}

/// Parses a planning reply into its labeled sections.
pub fn parse_plan(text: &str) -> PlanState {
    let mut section = Section::None;
    let mut inference = Vec::new();
    let mut perception = Vec::new();
    let mut route_lines = Vec::new();
    let mut progress = Vec::new();
    for line in text.lines() {
        let (s, rest) = match section_header(line) {
            Some((s, rest)) => {
                section = s;
                (s, rest)
            }
            None => (section, line.trim()),
        };
        if rest.is_empty() {
            continue;
        }
        match s {
            Section::Inference => inference.push(rest.to_string()),
            Section::Perception => perception.push(strip_item_marker(rest).to_string()),
            Section::Route => route_lines.push(rest.to_string()),
            Section::Progress => progress.push(rest.to_string()),
            Section::None => {}
        }
    }
    perception.retain(|p| !p.is_empty());
    let mut flags = Vec::new();
    if perception.is_empty() {
        perception.push(String::from("locate goal"));
        flags.push(String::from("perception plan missing"));
    }
    let route_part = |key: &str| {
        route_lines
            .iter()
            .find_map(|l| labeled_line(strip_item_marker(l), key).map(str::to_string))
            .filter(|s| !s.is_empty())
    };
    let (start, flight, end) = (route_part("start"), route_part("flight"), route_part("end"));
    if start.is_none() || flight.is_none() || end.is_none() {
        flags.push(String::from("route plan incomplete"));
    }
    let or_unspecified = |v: Option<String>| v.unwrap_or_else(|| UNSPECIFIED.to_string());
    PlanState {
        inference: inference.join(" "),
        perception_plan: perception,
        route_plan: RoutePlan {
            start: or_unspecified(start),
            flight: or_unspecified(flight),
            end: or_unspecified(end),
        },
        progress_note: progress.join(" "),
        flags,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub action: Action,
    pub predicted_effect: String,
    pub score_hint: Option<f64>,
    /// True when the reply did not cover this action.
    pub backfilled: bool,
}

fn score_hint(text: &str) -> Option<f64> {
    let lower = text.to_ascii_lowercase();
    let i = lower.find("score")?;
    let rest = lower[i + 5..].trim_start_matches([':', '=', ' ']);
    let end = rest
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
        .unwrap_or(rest.len());
    rest[..end].parse().ok()
}

/// One outcome per motion action in canonical order; actions the reply did
/// not cover get [`UNKNOWN_EFFECT`].
pub fn parse_candidates(text: &str) -> Vec<CandidateOutcome> {
    let mut found: Vec<Option<CandidateOutcome>> = vec![None; Action::MOTIONS.len()];
    for line in text.lines() {
        let Some((head, effect)) = line.split_once(':') else {
            continue;
        };
        let Some(action) = parse_action(head) else {
            continue;
        };
        let Some(slot) = Action::MOTIONS.iter().position(|a| *a == action) else {
            continue;
        };
        if found[slot].is_none() {
            let effect = effect.trim();
            found[slot] = Some(CandidateOutcome {
                action,
                predicted_effect: effect.to_string(),
                score_hint: score_hint(effect),
                backfilled: false,
            });
        }
    }
    Action::MOTIONS
        .iter()
        .zip(found)
        .map(|(a, f)| {
            f.unwrap_or(CandidateOutcome {
                action: *a,
                predicted_effect: UNKNOWN_EFFECT.to_string(),
                score_hint: None,
                backfilled: true,
            })
        })
        .collect()
}

/// A parsed decision-module reply. `Stop` stands for the arrival marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub action: Action,
    pub confident: bool,
    /// True when the reply named no legal motion and the fallback was used.
    pub fallback: bool,
    pub rationale: String,
}

fn has_word(text: &str, word: &str) -> bool {
    text.split(|c: char| !c.is_ascii_alphanumeric() && c != '_').any(|w| w == word)
}

pub fn parse_choice(text: &str) -> Choice {
    let confident = has_word(text, "CONFIDENT") && !has_word(text, "UNSURE");
    let rationale = rationale_of(text);
    if text.contains(GOAL_MARKER) {
        return Choice {
            action: Action::Stop,
            confident,
            fallback: false,
            rationale,
        };
    }
    let named = labeled_line(text, "action").and_then(parse_action).or_else(|| parse_action(text));
    match named {
        Some(a) if a != Action::Stop => Choice {
            action: a,
            confident,
            fallback: false,
            rationale,
        },
        _ => Choice {
            action: Action::MoveForth,
            confident: false,
            fallback: true,
            rationale,
        },
    }
}

/// `M_t`: observations, plans and actions. Plans and actions grow by one per
/// step; observations carry their step index because sparse admission may
/// skip some.
#[derive(Debug, Clone, Default)]
pub struct AgentMemory {
    pub observations: Vec<(u32, String)>,
    pub plans: Vec<String>,
    pub actions: Vec<Action>,
    sparse: Option<SparseMemory>,
}

impl AgentMemory {
    pub fn new(sparse: Option<SparseMemoryConfig>) -> Self {
        Self {
            sparse: sparse.map(SparseMemory::new),
            ..Self::default()
        }
    }

    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    /// Appends one step; returns whether the observation was admitted.
    pub fn update(
        &mut self,
        world: &CityWorld,
        intr: &CameraIntrinsics,
        observation: &SemanticObservation,
        observation_text: &str,
        plan: &str,
        action: Action,
    ) -> bool {
        let admit = match &mut self.sparse {
            Some(m) => m.offer(world, &observation.agent_pose(), intr),
            None => true,
        };
        if admit {
            self.observations.push((observation.step, one_line(observation_text)));
        }
        self.plans.push(plan.to_string());
        self.actions.push(action);
        admit
    }

    /// Windowed history for the localization prompt.
    pub fn history_text(&self, capacity: usize) -> String {
        if self.actions.is_empty() {
            return format!("({NO_ACTIONS_MARKER})");
        }
        select_window(self.actions.len(), capacity)
            .into_iter()
            .map(|i| {
                let obs = self
                    .observations
                    .iter()
                    .find(|(s, _)| *s as usize == i)
                    .map_or("(not stored)", |(_, o)| o.as_str());
                format!("step {i}: observation: {obs}; action: {}", self.actions[i])
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// What one agent step produced, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: u32,
    pub localization: String,
    pub plan: PlanState,
    pub candidates: Vec<CandidateOutcome>,
    pub decision: Choice,
    pub perceived: Option<Choice>,
    pub grounded: Option<Action>,
    pub imagined: Option<Action>,
    pub action: Action,
    pub gateway_calls: usize,
}

pub struct Agent {
    gateway: GatewayHandle,
    prompts: Arc<PromptSet>,
    world: Arc<CityWorld>,
    cfg: AgentConfig,
    instruction: Option<String>,
    target: Option<String>,
    memory: AgentMemory,
    last: Option<StepTrace>,
}

impl Agent {
    pub fn new(gateway: GatewayHandle, prompts: Arc<PromptSet>, world: Arc<CityWorld>, cfg: AgentConfig) -> Self {
        Self {
            gateway,
            prompts,
            world,
            memory: AgentMemory::new(cfg.enhancements.sparse_memory.then_some(cfg.sparse)),
            cfg,
            instruction: None,
            target: None,
            last: None,
        }
    }

    pub fn memory(&self) -> &AgentMemory {
        &self.memory
    }

    pub fn last_trace(&self) -> Option<&StepTrace> {
        self.last.as_ref()
    }

    /// Landmark the grounding enhancement steers toward.
    pub fn target_label(&self) -> Option<&str> {
        self.target.as_deref()
    }

    fn call(&self, kind: PromptKind, values: &[(&str, &str)]) -> Result<String, PolicyError> {
        let prompt = render(&self.prompts, kind, values)?;
        ask(&self.gateway, kind, vec![Message::system(SYSTEM_PROMPT), Message::user(prompt)])
    }

    pub fn localize(&self, step: u32, gimbal: &str, observation: &str) -> Result<String, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let text = self.call(
            PromptKind::Localize,
            &[
                ("step", &step.to_string()),
                ("instruction", instruction),
                ("gimbal", gimbal),
                ("memory", &self.memory.history_text(self.cfg.window)),
                ("observation", observation),
            ],
        )?;
        Ok(text.trim().to_string())
    }

    pub fn plan(&self, step: u32, gimbal: &str, localization: &str, observation: &str) -> Result<PlanState, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let text = self.call(
            PromptKind::Plan,
            &[
                ("step", &step.to_string()),
                ("instruction", instruction),
                ("gimbal", gimbal),
                ("localization", localization),
                ("observation", observation),
            ],
        )?;
        Ok(parse_plan(&text))
    }

    pub fn imagine(
        &self,
        step: u32,
        gimbal: &str,
        plan: &PlanState,
        localization: &str,
        observation: &str,
    ) -> Result<Vec<CandidateOutcome>, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let motions = Action::MOTIONS.iter().map(|a| format!("- {a}")).collect::<Vec<_>>().join("\n");
        let text = self.call(
            PromptKind::Imagine,
            &[
                ("step", &step.to_string()),
                ("instruction", instruction),
                ("gimbal", gimbal),
                ("localization", localization),
                ("plan", &plan.summary()),
                ("observation", observation),
                ("commands", &motions),
            ],
        )?;
        Ok(parse_candidates(&text))
    }

    pub fn decide(
        &self,
        step: u32,
        gimbal: &str,
        candidates: &[CandidateOutcome],
        plan: &PlanState,
    ) -> Result<Choice, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let listing = candidates
            .iter()
            .map(|c| format!("{}: {}", c.action, c.predicted_effect))
            .collect::<Vec<_>>()
            .join("\n");
        let text = self.call(
            PromptKind::Decide,
            &[
                ("step", &step.to_string()),
                ("instruction", instruction),
                ("gimbal", gimbal),
                ("plan", &plan.summary()),
                ("candidates", &listing),
            ],
        )?;
        Ok(parse_choice(&text))
    }

    /// Renders the six probe views and asks for a revised action. The pose
    /// is only read.
    pub fn active_perceive(
        &self,
        step: u32,
        pose: &AgentPose,
        plan: &PlanState,
        localization: &str,
    ) -> Result<Choice, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let views = probe_views(&self.world, pose, &self.cfg.intrinsics);
        let text = self.call(
            PromptKind::Perceive,
            &[
                ("step", &step.to_string()),
                ("instruction", instruction),
                ("gimbal", &format!("{:.1}", pose.gimbal)),
                ("localization", localization),
                ("plan", &plan.summary()),
                ("views", &views.to_prompt_text()),
                ("commands", &command_list()),
            ],
        )?;
        Ok(parse_choice(&text))
    }

    /// Simulator-previewed accept-or-replan loop around `proposed`.
    fn imagination_check(&self, step: u32, pose: &AgentPose, plan: &PlanState, proposed: Action) -> Result<Action, PolicyError> {
        let instruction = self.instruction.as_deref().ok_or(PolicyError::NotReset)?;
        let order: Vec<Action> = std::iter::once(proposed)
            .chain(PROPOSAL_ORDER.iter().copied().filter(|a| *a != proposed))
            .collect();
        let failure: RefCell<Option<PolicyError>> = RefCell::new(None);
        let plan_text = plan.summary();
        let result = imagination_loop(
            &self.world,
            pose,
            &self.cfg.motion,
            &self.cfg.intrinsics,
            self.cfg.max_iters,
            |i| order[i % order.len()],
            |outcome| {
                if failure.borrow().is_some() {
                    return Verdict {
                        accept: false,
                        score: f64::NEG_INFINITY,
                    };
                }
                let mut seen = outcome.observation.to_prompt_text();
                if outcome.blocked {
                    seen = format!("(the move is blocked; the drone stays in place)\n{seen}");
                }
                let reply = self.call(
                    PromptKind::Verify,
                    &[
                        ("step", &step.to_string()),
                        ("instruction", instruction),
                        ("plan", &plan_text),
                        ("action", outcome.action.name()),
                        ("outcome", &seen),
                    ],
                );
                match reply {
                    Ok(text) => parse_verdict(&text),
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        Verdict {
                            accept: false,
                            score: f64::NEG_INFINITY,
                        }
                    }
                }
            },
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(result.action),
        }
    }
}

/// Reads `ACCEPT`/`REJECT` and an optional `SCORE:` from a verification reply.
pub fn parse_verdict(text: &str) -> Verdict {
    let accept = has_word(text, "ACCEPT") && !has_word(text, "REJECT");
    Verdict {
        accept,
        score: score_hint(text).unwrap_or(if accept { 1.0 } else { 0.0 }),
    }
}

fn longest_label_in(instruction: &str, world: &CityWorld) -> Option<String> {
    let lower = instruction.to_lowercase();
    world
        .landmarks()
        .iter()
        .filter(|l| lower.contains(&l.label.to_lowercase()))
        .max_by_key(|l| l.label.len())
        .map(|l| l.label.clone())
}

impl Policy for Agent {
    fn name(&self) -> &str {
        "agent"
    }

    fn requires_backend(&self) -> bool {
        true
    }

    fn reset(&mut self, instruction: &str, _initial: &SemanticObservation) -> Result<(), PolicyError> {
        self.instruction = Some(instruction.to_string());
        self.target = longest_label_in(instruction, &self.world);
        self.memory = AgentMemory::new(self.cfg.enhancements.sparse_memory.then_some(self.cfg.sparse));
        self.last = None;
        Ok(())
    }

    fn next_action(&mut self, observation: &SemanticObservation) -> Result<Decision, PolicyError> {
        let step = observation.step;
        let pose = observation.agent_pose();
        let gimbal = gimbal_text(observation);
        let obs_text = if self.cfg.enhancements.crossview {
            panorama(&self.world, &pose, &self.cfg.intrinsics).to_prompt_text()
        } else {
            observation.to_prompt_text()
        };

        let localization = self.localize(step, &gimbal, &obs_text)?;
        let plan = self.plan(step, &gimbal, &localization, &obs_text)?;
        let candidates = self.imagine(step, &gimbal, &plan, &localization, &obs_text)?;
        let decision = self.decide(step, &gimbal, &candidates, &plan)?;
        let mut calls = 4;
        let mut action = decision.action;
        let mut perceived = None;
        if !decision.confident {
            let revised = self.active_perceive(step, &pose, &plan, &localization)?;
            calls += 1;
            action = revised.action;
            perceived = Some(revised);
        }

        let mut grounded = None;
        if self.cfg.enhancements.grounding && action != Action::Stop {
            if let Some(label) = &self.target {
                let g = GroundingResult::from_observation(observation, label);
                if g.found {
                    action = grounded_controller_step(&g, self.cfg.dead_zone, &self.cfg.intrinsics);
                    grounded = Some(action);
                }
            }
        }
        let mut imagined = None;
        if self.cfg.enhancements.imagination && action != Action::Stop {
            let before = self.gateway.call_tags().len();
            action = self.imagination_check(step, &pose, &plan, action)?;
            calls += self.gateway.call_tags().len() - before;
            imagined = Some(action);
        }

        let plan_text = plan.summary();
        self.memory
            .update(&self.world, &self.cfg.intrinsics, observation, &obs_text, &plan_text, action);

        let final_reason = perceived.as_ref().unwrap_or(&decision);
        let mut rationale = format!(
            "localization: {} | plan: {} | decision: {}",
            one_line(&localization),
            plan_text,
            one_line(&final_reason.rationale)
        );
        for flag in &plan.flags {
            rationale.push_str(&format!(" | flag: {flag}"));
        }
        if candidates.iter().any(|c| c.backfilled) {
            rationale.push_str(" | flag: imagination back-filled");
        }
        if final_reason.fallback {
            rationale.push_str(" | flag: illegal action, fallback move_forth");
        }
        if let Some(a) = grounded {
            rationale.push_str(&format!(" | grounding: {a}"));
        }
        if let Some(a) = imagined {
            rationale.push_str(&format!(" | imagination: {a}"));
        }
        self.last = Some(StepTrace {
            step,
            localization,
            plan,
            candidates,
            decision,
            perceived,
            grounded,
            imagined,
            action,
            gateway_calls: calls,
        });
        Ok(Decision::new(action, rationale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_with_three_steps() {
        let p = parse_plan(
            "INFERENCE: the helipad is on a roof\nPERCEPTION PLAN:\n1. the tall tower\n2. its roof\n3. the helipad\nROUTE:\nstart: here\nflight: climb and fly north\nend: roof\nPROGRESS: just started",
        );
        assert_eq!(p.perception_plan, vec!["the tall tower", "its roof", "the helipad"]);
        assert_eq!(p.route_plan.flight, "climb and fly north");
        assert!(p.flags.is_empty(), "{:?}", p.flags);
    }

    #[test]
    fn plan_without_route_is_flagged() {
        let p = parse_plan("PERCEPTION PLAN:\n- a\n- b");
        assert_eq!(p.route_plan.start, UNSPECIFIED);
        assert_eq!(p.flags, vec!["route plan incomplete"]);
    }

    #[test]
    fn unparseable_plan_falls_back() {
        let p = parse_plan("I am not sure.");
        assert_eq!(p.perception_plan, vec!["locate goal"]);
        assert!(p.flags.contains(&String::from("perception plan missing")));
    }

    #[test]
    fn candidates_are_canonical_and_backfilled() {
        let text = "move_back: retreats\nturn_left: view swings left score=0.2\nnonsense\nstop: lands";
        let c = parse_candidates(text);
        assert_eq!(c.len(), 10);
        assert!(c.iter().map(|c| c.action).eq(Action::MOTIONS.iter().copied()));
        assert_eq!(c.iter().filter(|c| !c.backfilled).count(), 2);
        let tl = c.iter().find(|c| c.action == Action::TurnLeft).unwrap();
        assert_eq!(tl.score_hint, Some(0.2));
    }

    #[test]
    fn choice_tokens() {
        assert_eq!(parse_choice("move_up CONFIDENT").action, Action::MoveUp);
        assert!(parse_choice("move_up CONFIDENT").confident);
        assert!(!parse_choice("move_up").confident);
        assert!(!parse_choice("move_up UNSURE").confident);
        let c = parse_choice("fly sideways CONFIDENT");
        assert_eq!((c.action, c.confident, c.fallback), (Action::MoveForth, false, true));
        assert_eq!(parse_choice("GOAL_REACHED CONFIDENT").action, Action::Stop);
    }

    #[test]
    fn verdicts() {
        assert!(parse_verdict("ACCEPT").accept);
        assert!(!parse_verdict("REJECT, SCORE: 0.3").accept);
        assert_eq!(parse_verdict("REJECT, SCORE: 0.3").score, 0.3);
    }

    #[test]
    fn enhancement_list() {
        let e = Enhancements::parse("grounding, sparse_memory").unwrap();
        assert!(e.grounding && e.sparse_memory && !e.crossview && !e.imagination);
        assert_eq!(e.names(), vec!["grounding", "sparse_memory"]);
        assert!(Enhancements::parse("teleport").is_err());
    }
}
