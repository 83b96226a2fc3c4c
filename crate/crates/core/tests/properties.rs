mod oracles;

use aeronav_core::camera::{fov_overlap, panorama, render, ViewTag};
use aeronav_core::metrics::{detect_cdb, spl_term};
use aeronav_core::planner::shortest_path;
use aeronav_core::policy::{parse_action, select_window};
use aeronav_core::world::Building;
use aeronav_core::{apply_action, Aabb, Action, AgentPose, CameraIntrinsics, CityWorld, MotionConfig, Vec3};
use proptest::prelude::*;

fn big_bounds() -> Aabb {
    Aabb::new(Vec3::new(-2000.0, -2000.0, 0.0), Vec3::new(2000.0, 2000.0, 1000.0))
}

fn pose_strategy() -> impl Strategy<Value = AgentPose> {
    (-1500.0..1500.0f64, -1500.0..1500.0f64, 50.0..900.0f64, 0.0..360.0f64, 0u32..=2)
        .prop_map(|(x, y, z, yaw, g)| AgentPose::new(Vec3::new(x, y, z), yaw, -45.0 * g as f64))
}

fn yaw_close(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(360.0);
    d < 1e-9 || 360.0 - d < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn translations_and_turns_invert(p in pose_strategy()) {
        let w = CityWorld::empty(big_bounds());
        let cfg = MotionConfig::default();
        for a in [Action::MoveForth, Action::MoveBack, Action::MoveLeft, Action::MoveRight, Action::MoveUp, Action::MoveDown] {
            let (q, blocked) = apply_action(&p, a, &w, &cfg);
            prop_assert!(!blocked);
            let (r, _) = apply_action(&q, a.inverse(), &w, &cfg);
            prop_assert_eq!(r.position, p.position);
        }
        for a in [Action::TurnLeft, Action::TurnRight] {
            let (q, _) = apply_action(&p, a, &w, &cfg);
            let (r, _) = apply_action(&q, a.inverse(), &w, &cfg);
            prop_assert!(yaw_close(r.yaw, p.yaw));
            prop_assert_eq!(r.position, p.position);
        }
        // gimbal pairs away from the clamp
        let mid = p.with_gimbal(-45.0);
        for a in [Action::GimbalUp, Action::GimbalDown] {
            let (q, _) = apply_action(&mid, a, &w, &cfg);
            let (r, _) = apply_action(&q, a.inverse(), &w, &cfg);
            prop_assert_eq!(r.gimbal, mid.gimbal);
        }
    }

    #[test]
    fn four_quarter_turns_are_identity(p in pose_strategy()) {
        let w = CityWorld::empty(big_bounds());
        let cfg = MotionConfig { turn_step: 90.0, ..MotionConfig::default() };
        let mut q = p;
        for _ in 0..4 {
            q = apply_action(&q, Action::TurnLeft, &w, &cfg).0;
        }
        prop_assert!(yaw_close(q.yaw, p.yaw));
    }

    #[test]
    fn unblocked_translations_move_exactly_one_step(p in pose_strategy()) {
        let w = CityWorld::empty(big_bounds());
        let cfg = MotionConfig::default();
        for a in [Action::MoveForth, Action::MoveLeft, Action::MoveUp] {
            let (q, _) = apply_action(&p, a, &w, &cfg);
            prop_assert!((q.position.distance(p.position) - 10.0).abs() < 1e-5);
        }
    }

    #[test]
    fn spl_never_exceeds_sr(terms in prop::collection::vec((any::<bool>(), 1.0..500.0f64, 0.0..800.0f64), 1..40)) {
        let n = terms.len() as f64;
        let spl: f64 = terms.iter().map(|(s, l, g)| spl_term(*s, *l, *g)).sum::<f64>() / n;
        let sr = terms.iter().filter(|t| t.0).count() as f64 / n;
        prop_assert!(spl <= sr + 1e-12);
        prop_assert!(spl >= 0.0);
    }

    #[test]
    fn cdb_agrees_with_suffix_scan(d in prop::collection::vec(0.0..100.0f64, 2..30), failed in any::<bool>(), tol in prop_oneof![Just(0.0), 0.0..5.0f64]) {
        let r = detect_cdb(&d, failed, tol).unwrap();
        prop_assert_eq!(r.t_star, oracles::cdb_bruteforce(&d, failed, tol));
        prop_assert_eq!(r.found, r.t_star.is_some());
    }

    #[test]
    fn blocked_moves_keep_pose(x in 20.0..40.0f64, yaw_idx in 0u32..16) {
        let wall = Building::new("wall", Vec3::new(45.0, -200.0, 0.0), Vec3::new(55.0, 200.0, 200.0));
        let w = CityWorld::new(vec![wall], vec![], big_bounds(), 2.0).unwrap();
        let p = AgentPose::new(Vec3::new(x, 0.0, 50.0), yaw_idx as f64 * 22.5, 0.0);
        for a in Action::MOTIONS {
            let (q, blocked) = apply_action(&p, a, &w, &MotionConfig::default());
            if blocked {
                prop_assert_eq!(q, p);
            }
        }
    }
}

#[test]
fn select_window_exhaustive() {
    fn check(n: usize, cap: usize) {
        let w = select_window(n, cap);
        assert!(w.len() <= cap);
        assert!(w.windows(2).all(|p| p[0] < p[1]), "n={n} cap={cap}");
        if n > 0 {
            assert_eq!(w[0], 0);
            assert_eq!(*w.last().unwrap(), n - 1);
        } else {
            assert!(w.is_empty());
        }
        if n <= cap {
            assert_eq!(w.len(), n);
        }
    }
    for cap in 2..=120 {
        for n in 0..=400 {
            check(n, cap);
        }
    }
    for cap in [2, 3, 7, 30, 500, 9_999, 10_000] {
        for n in 0..=10_000 {
            check(n, cap);
        }
    }
}

#[test]
fn parser_accepts_surface_variants() {
    fn variants(name: &str) -> Vec<String> {
        let words: Vec<&str> = name.split('_').collect();
        let title = |w: &str| {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
        };
        vec![
            name.to_string(),
            name.to_uppercase(),
            words.join(" "),
            words.join("-"),
            words.join(""),
            words.join(" ").to_uppercase(),
            words.iter().map(|w| title(w)).collect::<Vec<_>>().join(" "),
            words.iter().map(|w| title(w)).collect::<Vec<_>>().join(""),
            words.join("  "),
            format!("  {}  ", words.join(" ")),
            format!("Action: {name}"),
            format!("I choose {}.", words.join(" ")),
            format!("**{name}**"),
            format!("`{name}`"),
            format!("{} because it helps", words.join(" ")),
            format!("[{}]", words.join("-").to_uppercase()),
            format!("\"{name}\""),
            format!("next: {}\n", words.join("_").to_uppercase()),
            format!("{}!", words.join(" ")),
            format!("Decision -> {}", words.join("\t")),
        ]
    }
    for a in Action::ALL {
        let vs = variants(a.name());
        assert_eq!(vs.len(), 20);
        for v in vs {
            assert_eq!(parse_action(&v), Some(a), "{v:?}");
        }
    }
}

#[test]
fn straight_path_is_tight() {
    let w = CityWorld::empty(Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(200.0, 100.0, 120.0)));
    let p = shortest_path(&w, Vec3::new(0.0, 0.0, 50.0), Vec3::new(100.0, 0.0, 50.0), &MotionConfig::default()).unwrap();
    assert!((p.length - 100.0).abs() <= 5.0);
}

#[test]
fn wall_detour_matches_taut_string() {
    let bounds = Aabb::new(Vec3::new(-50.0, -150.0, 0.0), Vec3::new(150.0, 150.0, 100.0));
    for half_width in [20.0, 30.0, 45.0, 70.0] {
        let wall = Aabb::new(Vec3::new(45.0, -half_width, 0.0), Vec3::new(55.0, half_width, 100.0));
        let w = CityWorld::new(vec![Building::new("wall", wall.min, wall.max)], vec![], bounds, 2.0).unwrap();
        let (a, b) = (Vec3::new(0.0, 0.0, 50.0), Vec3::new(100.0, 0.0, 50.0));
        let cfg = MotionConfig::default();
        let path = shortest_path(&w, a, b, &cfg).unwrap();
        let truth = oracles::taut_string_around(&wall, cfg.safety_radius, a, b);
        assert!((path.length - truth).abs() / truth <= 0.05, "{} vs {truth}", path.length);
        assert!(path.points.windows(2).all(|s| w.segment_free(s[0], s[1], cfg.safety_radius)));
    }
}

#[test]
fn path_length_is_monotone_under_obstacle_insertion() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(200.0, 200.0, 80.0));
    let cfg = MotionConfig::default();
    let mut checked = 0;
    for _ in 0..25 {
        let mut buildings = Vec::new();
        let (a, b) = (Vec3::new(10.0, 10.0, 20.0), Vec3::new(190.0, 185.0, 30.0));
        let mut last = shortest_path(&CityWorld::empty(bounds), a, b, &cfg).unwrap().length;
        for i in 0..5 {
            let x = rng.random_range(30.0..150.0);
            let y = rng.random_range(30.0..150.0);
            let h = rng.random_range(20.0..90.0);
            buildings.push(Building::new(format!("b{i}"), Vec3::new(x, y, 0.0), Vec3::new(x + 25.0, y + 25.0, h)));
            let w = CityWorld::new(buildings.clone(), vec![], bounds, 2.0).unwrap();
            if !w.is_free(a, 1.0) || !w.is_free(b, 1.0) {
                break;
            }
            match shortest_path(&w, a, b, &cfg) {
                Ok(p) => {
                    assert!(p.length >= last - 1e-9, "{} < {last}", p.length);
                    last = p.length;
                    checked += 1;
                }
                Err(_) => break,
            }
        }
    }
    assert!(checked > 50);
}

#[test]
fn render_matches_ray_march_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let intr = CameraIntrinsics::default();
    let bounds = Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 100.0));
    let (mut seen, mut hidden) = (0usize, 0usize);
    for scene in 0..100 {
        let mut buildings = Vec::new();
        for i in 0..rng.random_range(4..10) {
            let x = rng.random_range(-90.0..70.0);
            let y = rng.random_range(-90.0..70.0);
            let (w, d, h) = (rng.random_range(5.0..25.0), rng.random_range(5.0..25.0), rng.random_range(5.0..60.0));
            buildings.push(Building::new(format!("b{i}"), Vec3::new(x, y, 0.0), Vec3::new(x + w, y + d, h)));
        }
        let mut landmarks = Vec::new();
        for i in 0..rng.random_range(4..10) {
            let p = Vec3::new(rng.random_range(-95.0..95.0), rng.random_range(-95.0..95.0), rng.random_range(2.0..70.0));
            if buildings.iter().all(|b| !b.aabb().inflate(1.5).contains(p)) {
                landmarks.push(aeronav_core::world::Landmark::new(format!("lm{i}"), p));
            }
        }
        let world = CityWorld::new(buildings, landmarks, bounds, 2.0).unwrap();
        let pose = loop {
            let p = AgentPose::new(
                Vec3::new(rng.random_range(-95.0..95.0), rng.random_range(-95.0..95.0), rng.random_range(3.0..80.0)),
                rng.random_range(0.0..360.0),
                -45.0 * rng.random_range(0..3) as f64,
            );
            if world.is_free(p.position, 1.0) {
                break p;
            }
        };
        let got: std::collections::BTreeSet<String> = render(&world, &pose, &intr).entities.into_iter().map(|e| e.label).collect();
        let want = oracles::visible_labels(&world, &pose, 45.0, 0.02);
        let in_view = oracles::visible_labels(&world, &pose, 45.0, f64::INFINITY);
        assert_eq!(got, want, "scene {scene}");
        seen += want.len();
        hidden += in_view.len() - want.len();
    }
    // the scenes must exercise both visible and occluded entities
    assert!(seen > 300 && hidden > 20, "seen {seen} hidden {hidden}");
}

#[test]
fn overlap_matches_dense_oracle() {
    let w = CityWorld::empty(big_bounds());
    let intr = CameraIntrinsics::default();
    let a = AgentPose::at(0.0, 0.0, 100.0);
    let mut last = 1.0;
    for k in 0..=8 {
        let b = a.with_yaw(k as f64 * 22.5);
        let got = fov_overlap(&w, &a, &b, &intr, 4096);
        let want = oracles::dense_overlap(&a, &b, 64);
        assert!((got - want).abs() < 0.02, "yaw {} {got} {want}", k as f64 * 22.5);
        assert!(got <= last + 1e-12);
        last = got;
    }
}

#[test]
fn panorama_covers_every_bearing() {
    let intr = CameraIntrinsics::default();
    for deg in 0..360 {
        let r = (deg as f64).to_radians();
        let p = Vec3::new(60.0 * r.cos(), 60.0 * r.sin(), 50.0);
        let w = CityWorld::new(vec![], vec![aeronav_core::world::Landmark::new("t", p)], big_bounds(), 2.0).unwrap();
        let views = panorama(&w, &AgentPose::at(0.0, 0.0, 50.0).with_yaw(17.0), &intr);
        assert!(!views.tags_seeing("t").is_empty(), "bearing {deg}");
        assert!(views.tags_seeing("t").iter().all(|t| matches!(t, ViewTag::Panorama(_))));
    }
}
