mod common;

use std::sync::Arc;

use aeronav::gateway::{Gateway, ScriptedBackend};
use aeronav::lmm_policy::{LanguagePolicy, FALLBACK_RATIONALE};
use aeronav::prompts::PromptSet;
use aeronav_core::episode::{run_episode, EpisodeConfig};
use aeronav_core::policy::Policy;
use aeronav_core::Action;

fn policy(answers: &[&str]) -> (LanguagePolicy, Arc<Gateway>) {
    let gw = Gateway::live("m", Arc::new(ScriptedBackend::sequence(answers.iter().map(|s| s.to_string()).collect())))
        .into_handle();
    (LanguagePolicy::new(gw.clone(), Arc::new(PromptSet::load(None).unwrap())), gw)
}

fn first_action(answers: &[&str]) -> (Action, String, usize) {
    let scenario = common::straight_scenario("l", 80.0);
    let (mut p, gw) = policy(answers);
    let stepper = aeronav_core::episode::EpisodeStepper::new(&scenario, "lmm", &EpisodeConfig::default());
    p.reset(&scenario.goal.instruction, &stepper.observation()).unwrap();
    let d = p.next_action(&stepper.observation()).unwrap();
    (d.action, d.rationale, gw.call_tags().len())
}

#[test]
fn bare_command_is_accepted() {
    assert_eq!(first_action(&["move_forth"]).0, Action::MoveForth);
}

#[test]
fn loose_phrasing_is_normalized() {
    let (a, _, calls) = first_action(&["MOVE FORTH because the goal is ahead"]);
    assert_eq!((a, calls), (Action::MoveForth, 1));
    assert_eq!(first_action(&["ACTION: Turn Left\nRATIONALE: tower on the left"]).0, Action::TurnLeft);
}

#[test]
fn unparseable_twice_falls_back_to_move_forth() {
    let (a, why, calls) = first_action(&["I would rather not say", "still nothing useful"]);
    assert_eq!((a, why.as_str(), calls), (Action::MoveForth, FALLBACK_RATIONALE, 2));
}

#[test]
fn reprompt_can_recover() {
    let (a, _, calls) = first_action(&["hmm", "ACTION: move_down"]);
    assert_eq!((a, calls), (Action::MoveDown, 2));
}

#[test]
fn prompt_carries_commands_and_empty_memory_note() {
    let scenario = common::straight_scenario("l", 80.0);
    let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
    let s2 = seen.clone();
    let gw = Gateway::live(
        "m",
        Arc::new(ScriptedBackend::new(move |r| {
            s2.lock().unwrap().push(r.prompt_text());
            "stop".into()
        })),
    )
    .into_handle();
    let mut p = LanguagePolicy::new(gw, Arc::new(PromptSet::load(None).unwrap()));
    let log = run_episode(&scenario, &mut p, &EpisodeConfig::default());
    assert_eq!(log.actions(), [Action::Stop]);
    let prompt = &seen.lock().unwrap()[0];
    for a in Action::ALL {
        assert!(prompt.contains(a.name()), "missing {a}");
    }
    assert!(prompt.contains("no actions taken yet"));
    assert!(prompt.contains(&scenario.goal.instruction));
}
