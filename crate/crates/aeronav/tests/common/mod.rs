#![allow(dead_code)]

use std::sync::Arc;

use aeronav::agent::{Agent, AgentConfig};
use aeronav::gateway::{GatewayHandle, GatewayRequest, ScriptedBackend};
use aeronav::prompts::PromptSet;
use aeronav_core::episode::{run_episode, EpisodeConfig};
use aeronav_core::scenario::{generate, reference_oracle, GenerateParams, LengthGroup, Scenario};
use aeronav_core::{Action, AgentPose, Vec3};

/// The step index carried by every prompt as `Step N`.
pub fn step_of(req: &GatewayRequest) -> usize {
    let text = req.prompt_text();
    let i = text.find("Step ").expect("prompt names its step");
    text[i + 5..]
        .chars()
        .take_while(char::is_ascii_digit)
        .collect::<String>()
        .parse()
        .expect("step number")
}

pub fn oracle_actions(scenario: &Scenario, cfg: &EpisodeConfig) -> Vec<Action> {
    let mut oracle = reference_oracle(&scenario.world, scenario.goal.position, &cfg.motion).unwrap();
    run_episode(scenario, &mut oracle, cfg).actions()
}

pub const PLAN_REPLY: &str = "INFERENCE: the goal is ahead\nPERCEPTION PLAN:\n1. find the landmark\n2. approach it\nROUTE:\nstart: current position\nflight: toward the landmark\nend: beside it\nPROGRESS: under way";

pub fn imagine_reply() -> String {
    Action::MOTIONS
        .iter()
        .map(|a| format!("{a}: the view shifts"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn action_text(a: Action) -> String {
    if a == Action::Stop {
        String::from("GOAL_REACHED")
    } else {
        a.name().to_string()
    }
}

/// A backend that steers the agent along `actions`. Steps for which
/// `unsure` holds get a wrong, uncertain decision that the active
/// perception call then corrects.
pub fn oracle_backend(actions: Vec<Action>, unsure: impl Fn(usize) -> bool + Send + Sync + 'static) -> ScriptedBackend {
    ScriptedBackend::new(move |req| {
        let t = step_of(req);
        let a = actions.get(t).copied().unwrap_or(Action::Stop);
        match req.tag.as_str() {
            "Q_loc" => format!("Step {t}: hovering above the street, goal not yet reached."),
            "Q_plan" => PLAN_REPLY.to_string(),
            "Q_imgn" => imagine_reply(),
            "Q_DM" if unsure(t) => String::from("ACTION: turn_right UNSURE\nRATIONALE: hard to tell"),
            "Q_DM" => format!("ACTION: {} CONFIDENT\nRATIONALE: follows the plan", action_text(a)),
            "Q_imgn+Q_DM" => format!("ACTION: {}\nRATIONALE: the extra views settle it", action_text(a)),
            "Q_verify" => String::from("ACCEPT SCORE: 1"),
            _ => format!("ACTION: {}", a.name()),
        }
    })
}

pub fn agent(gateway: GatewayHandle, scenario: &Scenario, cfg: AgentConfig) -> Agent {
    Agent::new(
        gateway,
        Arc::new(PromptSet::load(None).unwrap()),
        Arc::new(scenario.world.clone()),
        cfg,
    )
}

pub fn generated(group: LengthGroup, seeds: impl Iterator<Item = u64>, n: usize) -> Vec<Scenario> {
    let params = GenerateParams::for_group(group);
    seeds.filter_map(|s| generate(s, &params).ok()).take(n).collect()
}

pub fn straight_scenario(id: &str, distance: f64) -> Scenario {
    Scenario::open_field(id, AgentPose::at(0.0, 0.0, 20.0), Vec3::new(distance, 0.0, 20.0))
}
