mod common;

use aeronav::store::{
    load_scenario, read_episode_log, save_scenario, scenario_from_str, scenario_to_string, write_episode_log, Corpus,
    RunDir, StoreError,
};
use aeronav_core::baselines::RandomPolicy;
use aeronav_core::episode::{run_episode, EpisodeConfig};
use aeronav_core::scenario::LengthGroup;

#[test]
fn generated_scenario_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for s in common::generated(LengthGroup::Middle, 40..60, 3) {
        let path = dir.path().join(format!("{}.json", s.id));
        save_scenario(&s, &path).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), s);
        assert_eq!(scenario_to_string(&scenario_from_str(&scenario_to_string(&s)).unwrap()), scenario_to_string(&s));
    }
}

#[test]
fn wrong_version_is_rejected_before_decoding() {
    let s = common::straight_scenario("v", 60.0);
    let mut v: serde_json::Value = serde_json::from_str(&scenario_to_string(&s)).unwrap();
    v["version"] = serde_json::json!(2);
    let err = scenario_from_str(&v.to_string()).unwrap_err();
    assert_eq!(err.path, "version");
    assert!(err.to_string().contains("schema v1"));
}

#[test]
fn nested_type_errors_name_their_path() {
    let s = common::straight_scenario("p", 60.0);
    let mut v: serde_json::Value = serde_json::from_str(&scenario_to_string(&s)).unwrap();
    v["goal"]["position"]["z"] = serde_json::json!("high");
    let err = scenario_from_str(&v.to_string()).unwrap_err();
    assert_eq!(err.path, "goal.position.z", "{err}");
}

#[test]
fn corpus_lists_and_loads_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = vec![common::straight_scenario("a", 60.0), common::straight_scenario("b", 90.0)];
    Corpus::create(dir.path(), &scenarios).unwrap();
    let corpus = Corpus::open(dir.path()).unwrap();
    assert_eq!(corpus.ids().collect::<Vec<_>>(), ["a", "b"]);
    assert_eq!(corpus.load("b").unwrap(), scenarios[1]);
    assert_eq!(corpus.manifest().entry("a").unwrap().ground_truth_length, scenarios[0].ground_truth.length);
    assert!(matches!(corpus.load("zzz"), Err(StoreError::UnknownScenario(_))));
}

#[test]
fn episode_log_round_trips_through_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::straight_scenario("r", 120.0);
    let log = run_episode(&scenario, &mut RandomPolicy::new(9), &EpisodeConfig::default());
    let run = RunDir::new(dir.path());
    write_episode_log(&run.log_path("r"), &log).unwrap();
    assert!(run.is_complete("r"));
    assert_eq!(read_episode_log(&run.log_path("r")).unwrap(), log);
    assert_eq!(run.load_logs().unwrap(), vec![log]);
}

#[test]
fn truncated_log_is_reported_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = common::straight_scenario("t", 120.0);
    let log = run_episode(&scenario, &mut RandomPolicy::new(3), &EpisodeConfig::default());
    let path = dir.path().join("t.jsonl");
    write_episode_log(&path, &log).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().take(3).collect();
    std::fs::write(&path, kept.join("\n")).unwrap();
    assert!(matches!(read_episode_log(&path), Err(StoreError::Log { .. })));
}
