use apexmr::exec::{self, JitterModel, PauseScript};
use apexmr::scenario::{load_scenario, Scenario};
use apexmr::tpg::{Edge, EdgeKind, NodeKind, NodeRef, Tpg, TpgNode};
use apexmr::world::Configuration;
use apexmr::{motion, taskplan, tpg};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn tiny() -> Scenario {
    load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tiny.scn")).unwrap()
}

fn node(task: usize, q: [f64; 2], prev: Option<[f64; 2]>) -> TpgNode {
    let q = Configuration::new(q.to_vec());
    let duration = prev.map_or(0.0, |p| Configuration::new(p.to_vec()).distance(&q));
    TpgNode { task: Some(task), kind: NodeKind::Pose, q, reference: Vec::new(), duration, timestamp: 0.0, attach: None }
}

/// Both arms of the tiny scene swing into the shared middle and back. Left
/// goes first; right may only start in once left is home again.
fn crossing() -> Tpg {
    let left = vec![node(0, [PI, 0.0], None), node(0, [0.0, 0.0], Some([PI, 0.0])), node(0, [PI, 0.0], Some([0.0, 0.0]))];
    let right = vec![node(1, [0.0, 0.0], None), node(1, [PI, 0.0], Some([0.0, 0.0])), node(1, [0.0, 0.0], Some([PI, 0.0]))];
    let edges = vec![Edge {
        from: NodeRef { robot: 0, index: 2 },
        to: NodeRef { robot: 1, index: 1 },
        kind: EdgeKind::MotionDependency,
    }];
    Tpg { chains: vec![left, right], edges, v_max: vec![1.0, 1.0] }
}

#[test]
fn crafted_crossing_is_safe_under_delays() {
    let sc = tiny();
    let g = crossing();
    assert!(g.audit(&sc.world).unwrap().is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..200 {
        let script = PauseScript::random(&mut rng, 2, 8.0, 3, 2.0);
        let trace = exec::simulate(&g, &sc.skills, JitterModel { skills: true, pose_slowdown: 0.5 }, seed, Some(&script)).unwrap();
        assert!(exec::verify_trace(&sc.world, &g, &trace, 0.01).safe, "seed {seed}");
    }
    for order in exec::linear_extensions(&g, 1000).unwrap() {
        assert_eq!(exec::verify_extension(&sc.world, &g, &order), None);
    }
}

#[test]
fn removed_motion_edge_is_flagged() {
    let sc = tiny();
    let mut g = crossing();
    g.edges.clear();
    assert_eq!(g.audit(&sc.world).unwrap().len(), 1);
    let trace = exec::simulate(&g, &sc.skills, JitterModel::none(), 0, None).unwrap();
    let verdict = exec::verify_trace(&sc.world, &g, &trace, 0.01);
    assert!(!verdict.safe);
    let v = verdict.first_violation.unwrap();
    assert_eq!((v.a.robot, v.b.map(|b| b.robot)), (0, Some(1)));
    let orders = exec::linear_extensions(&g, 1000).unwrap();
    assert!(orders.iter().any(|o| exec::verify_extension(&sc.world, &g, o).is_some()));
}

#[test]
fn single_robot_is_always_safe() {
    let sc = tiny();
    let mut g = crossing();
    g.chains.truncate(1);
    g.edges.clear();
    g.v_max.truncate(1);
    let trace = exec::simulate(&g, &sc.skills, JitterModel::skills(), 1, None).unwrap();
    assert!(exec::verify_trace(&sc.world, &g, &trace, 0.01).safe);
}

#[test]
fn extensions_of_independent_chains_are_binomial() {
    let mut g = crossing();
    g.edges.clear();
    // 3 + 3 nodes with no cross edges: C(6, 3) interleavings.
    assert_eq!(exec::linear_extensions(&g, 1000).unwrap().len(), 20);
    assert!(exec::linear_extensions(&g, 19).is_none());
    g = crossing();
    // left 0,1,2 must all precede right 1,2: right 0 can go anywhere before right 1.
    assert_eq!(exec::linear_extensions(&g, 1000).unwrap().len(), 4);
}

#[test]
fn tiny_fixture_every_extension_is_safe() {
    let sc = tiny();
    let plan = taskplan::plan_tasks(&sc).unwrap();
    let seq = motion::plan_sequential(&sc, &plan, &motion::MotionConfig::default()).unwrap();
    let g = tpg::build_tpg(&sc.world, &plan, &seq, 1).unwrap();
    assert!(g.n_nodes() <= 12);
    let orders = exec::linear_extensions(&g, 100_000).unwrap();
    assert!(!orders.is_empty());
    for o in &orders {
        assert!(exec::is_linear_extension(&g, o));
        assert_eq!(exec::verify_extension(&sc.world, &g, o), None);
    }
}

#[test]
fn trace_start_order_is_a_linear_extension() {
    let sc = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tower.scn")).unwrap();
    let plan = taskplan::plan_tasks(&sc).unwrap();
    let seq = motion::plan_sequential(&sc, &plan, &motion::MotionConfig::default()).unwrap();
    let g = tpg::build_tpg(&sc.world, &plan, &seq, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..5 {
        let script = PauseScript::random(&mut rng, 2, 60.0, 4, 5.0);
        let trace = exec::simulate(&g, &sc.skills, JitterModel::skills(), seed, Some(&script)).unwrap();
        assert!(exec::is_linear_extension(&g, &trace.start_order()));
    }
}
