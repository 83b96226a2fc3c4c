mod common;

use std::sync::{Arc, Mutex};

use aeronav::agent::{AgentConfig, AgentMemory, Enhancements, NO_ACTIONS_MARKER};
use aeronav::gateway::{ChatBackend, Gateway, GatewayRequest, ScriptedBackend};
use aeronav_core::enhancements::SparseMemoryConfig;
use aeronav_core::episode::{run_episode, EpisodeConfig, EpisodeStepper};
use aeronav_core::policy::Policy;
use aeronav_core::{Action, CameraIntrinsics};

const CORE_ORDER: [&str; 4] = ["Q_loc", "Q_plan", "Q_imgn", "Q_DM"];

fn capturing(inner: ScriptedBackend) -> (ScriptedBackend, Arc<Mutex<Vec<GatewayRequest>>>) {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let s2 = seen.clone();
    let b = ScriptedBackend::fallible(move |r| {
        s2.lock().unwrap().push(r.clone());
        inner.complete(r).map(|c| c.text)
    });
    (b, seen)
}

#[test]
fn steered_agent_retraces_the_oracle_with_fixed_call_order() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 150.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let gw = Gateway::live("m", Arc::new(common::oracle_backend(oracle.clone(), |t| t % 3 == 1))).into_handle();
    let mut agent = common::agent(gw.clone(), &scenario, AgentConfig::default());
    let log = run_episode(&scenario, &mut agent, &cfg);
    assert_eq!(log.actions(), oracle);
    assert!(log.is_success());

    let tags = gw.call_tags();
    let mut i = 0;
    for t in 0..log.steps.len() {
        assert_eq!(&tags[i..i + 4], CORE_ORDER, "step {t}");
        i += 4;
        if t % 3 == 1 {
            assert_eq!(tags[i], "Q_imgn+Q_DM", "step {t}");
            i += 1;
        }
    }
    assert_eq!(i, tags.len());
}

#[test]
fn trace_reports_four_or_five_calls() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let gw = Gateway::live("m", Arc::new(common::oracle_backend(oracle, |t| t == 1))).into_handle();
    let mut agent = common::agent(gw, &scenario, AgentConfig::default());
    let mut stepper = EpisodeStepper::new(&scenario, "agent", &cfg);
    agent.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    for expected in [4, 5] {
        let before = stepper.pose();
        let d = agent.next_action(&stepper.observation()).unwrap();
        assert_eq!(agent.last_trace().unwrap().gateway_calls, expected);
        assert_eq!(stepper.pose(), before);
        stepper.apply(d).unwrap();
    }
    let trace = agent.last_trace().unwrap();
    assert_eq!(trace.decision.action, Action::TurnRight);
    assert_eq!(trace.perceived.as_ref().unwrap().action, trace.action);
}

#[test]
fn perception_prompt_lists_six_probe_views() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let (backend, seen) = capturing(common::oracle_backend(oracle, |t| t == 0));
    let gw = Gateway::live("m", Arc::new(backend)).into_handle();
    let mut agent = common::agent(gw, &scenario, AgentConfig::default());
    let stepper = EpisodeStepper::new(&scenario, "agent", &cfg);
    agent.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    agent.next_action(&stepper.observation()).unwrap();
    let seen = seen.lock().unwrap();
    let perceive = seen.iter().find(|r| r.tag == "Q_imgn+Q_DM").unwrap().prompt_text();
    assert_eq!(perceive.matches("[view: ").count(), 6);
    for tag in ["front", "left", "back", "right", "up", "down"] {
        assert!(perceive.contains(&format!("[view: {tag}]")), "{tag}");
    }
}

#[test]
fn malformed_replies_degrade_to_flagged_defaults() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let backend = ScriptedBackend::new(|r| match r.tag.as_str() {
        "Q_DM" => "ACTION: fly_sideways CONFIDENT".into(),
        "Q_imgn+Q_DM" => "ACTION: teleport".into(),
        "Q_imgn" => "move_up: climbs".into(),
        _ => "no structure at all".into(),
    });
    let gw = Gateway::live("m", Arc::new(backend)).into_handle();
    let mut agent = common::agent(gw, &scenario, AgentConfig::default());
    let stepper = EpisodeStepper::new(&scenario, "agent", &cfg);
    agent.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    let d = agent.next_action(&stepper.observation()).unwrap();
    assert_eq!(d.action, Action::MoveForth);
    let trace = agent.last_trace().unwrap();
    assert_eq!(trace.plan.perception_plan, ["locate goal"]);
    assert_eq!(trace.candidates.iter().filter(|c| c.backfilled).count(), 9);
    assert!(d.rationale.contains("route plan incomplete"));
    assert!(d.rationale.contains("imagination back-filled"));
    assert!(d.rationale.contains("fallback move_forth"));
}

#[test]
fn plan_and_imagination_fixtures_are_parsed() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let gw = Gateway::live("m", Arc::new(common::oracle_backend(oracle, |_| false))).into_handle();
    let mut agent = common::agent(gw, &scenario, AgentConfig::default());
    let stepper = EpisodeStepper::new(&scenario, "agent", &cfg);
    agent.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    agent.next_action(&stepper.observation()).unwrap();
    let trace = agent.last_trace().unwrap();
    assert_eq!(trace.plan.perception_plan, ["find the landmark", "approach it"]);
    assert_eq!(trace.plan.route_plan.flight, "toward the landmark");
    assert!(trace.plan.flags.is_empty());
    assert_eq!(trace.candidates.len(), 10);
    assert!(trace.candidates.iter().all(|c| !c.backfilled));
}

#[test]
fn memory_starts_with_the_empty_marker() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let (backend, seen) = capturing(common::oracle_backend(oracle, |_| false));
    let gw = Gateway::live("m", Arc::new(backend)).into_handle();
    let mut agent = common::agent(gw, &scenario, AgentConfig::default());
    run_episode(&scenario, &mut agent, &cfg);
    let seen = seen.lock().unwrap();
    let locs: Vec<String> = seen.iter().filter(|r| r.tag == "Q_loc").map(|r| r.prompt_text()).collect();
    assert!(locs[0].contains(NO_ACTIONS_MARKER));
    assert!(!locs[1].contains(NO_ACTIONS_MARKER));
    assert!(locs[1].contains("step 0: observation:"));
}

#[test]
fn sparse_memory_stores_one_frame_for_a_hover() {
    let scenario = common::straight_scenario("a", 60.0);
    let stepper = EpisodeStepper::new(&scenario, "agent", &EpisodeConfig::default());
    let obs = stepper.observation();
    let intr = CameraIntrinsics::default();
    let mut mem = AgentMemory::new(Some(SparseMemoryConfig::default()));
    let admitted: Vec<bool> = (0..5)
        .map(|_| mem.update(&scenario.world, &intr, &obs, "same view", "hover", Action::TurnLeft))
        .collect();
    assert_eq!(admitted, [true, false, false, false, false]);
    assert_eq!((mem.observations.len(), mem.actions.len(), mem.plans.len()), (1, 5, 5));
}

#[test]
fn long_history_is_windowed() {
    let scenario = common::straight_scenario("a", 60.0);
    let stepper = EpisodeStepper::new(&scenario, "agent", &EpisodeConfig::default());
    let obs = stepper.observation();
    let intr = CameraIntrinsics::default();
    let mut mem = AgentMemory::new(None);
    assert_eq!(mem.history_text(30), format!("({NO_ACTIONS_MARKER})"));
    for _ in 0..100 {
        mem.update(&scenario.world, &intr, &obs, "view", "plan", Action::MoveForth);
    }
    let text = mem.history_text(30);
    assert!(text.lines().count() <= 30);
    assert!(text.lines().next().unwrap().starts_with("step 0:"));
    assert!(text.lines().last().unwrap().starts_with("step 99:"));
}

#[test]
fn enhancements_only_add_their_own_calls() {
    let cfg = EpisodeConfig::default();
    let scenario = common::straight_scenario("a", 60.0);
    let oracle = common::oracle_actions(&scenario, &cfg);
    let gw = Gateway::live("m", Arc::new(common::oracle_backend(oracle, |_| false))).into_handle();
    let agent_cfg = AgentConfig {
        enhancements: Enhancements::parse("crossview,imagination").unwrap(),
        ..AgentConfig::default()
    };
    let mut agent = common::agent(gw.clone(), &scenario, agent_cfg);
    let stepper = EpisodeStepper::new(&scenario, "agent", &cfg);
    agent.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    agent.next_action(&stepper.observation()).unwrap();
    let tags = gw.call_tags();
    assert_eq!(&tags[..4], CORE_ORDER);
    assert_eq!(tags[4..], ["Q_verify"]);
    assert_eq!(agent.last_trace().unwrap().gateway_calls, 5);
}
