use apexmr::exec::{self, JitterModel};
use apexmr::taskplan::assign::{solve_assignment, AssignmentProblem, StepChoice};
use apexmr::tpg::{transitive_reduce_reference, Edge, EdgeKind, NodeKind, NodeRef, Tpg, TpgNode};
use apexmr::world::Configuration;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn pose(duration: f64) -> TpgNode {
    TpgNode {
        task: None,
        kind: NodeKind::Pose,
        q: Configuration::new(vec![0.0]),
        reference: Vec::new(),
        duration,
        timestamp: 0.0,
        attach: None,
    }
}

/// Chains of 1..8 nodes on 2..4 robots, plus cross edges kept only when
/// they point forward in a fixed global order (so the graph stays acyclic).
fn graph() -> impl Strategy<Value = Tpg> {
    (2usize..=4)
        .prop_flat_map(|r| (prop::collection::vec(prop::collection::vec(0.1f64..2.0, 1..8), r), prop::collection::vec(any::<(u8, u8, u8, u8)>(), 0..24)))
        .prop_map(|(durs, raw)| {
            let r = durs.len();
            let chains: Vec<Vec<TpgNode>> = durs.iter().map(|c| c.iter().map(|&d| pose(d)).collect()).collect();
            // Global rank: index scaled by chain length, ties by robot.
            let rank = |n: NodeRef| (n.index as f64 / chains[n.robot].len() as f64, n.robot);
            let mut edges: Vec<Edge> = raw
                .into_iter()
                .filter_map(|(a, i, b, j)| {
                    let (a, b) = (a as usize % r, b as usize % r);
                    let from = NodeRef { robot: a, index: i as usize % chains[a].len() };
                    let to = NodeRef { robot: b, index: j as usize % chains[b].len() };
                    (a != b && rank(from) < rank(to)).then_some(Edge { from, to, kind: EdgeKind::MotionDependency })
                })
                .collect();
            edges.sort();
            edges.dedup();
            Tpg { chains, edges, v_max: vec![1.0; r] }
        })
}

fn reach_all(g: &Tpg) -> Vec<bool> {
    let c = g.clocks().unwrap();
    let nodes: Vec<NodeRef> =
        (0..g.n_robots()).flat_map(|r| (0..g.chains[r].len()).map(move |i| NodeRef { robot: r, index: i })).collect();
    nodes.iter().flat_map(|&a| nodes.iter().map(move |&b| (a, b))).map(|(a, b)| c.reaches(a, b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_keeps_reachability_and_matches_reference(g in graph()) {
        let mut reduced = g.clone();
        reduced.transitive_reduce().unwrap();
        prop_assert_eq!(reach_all(&reduced), reach_all(&g));
        prop_assert_eq!(&reduced.edges, &transitive_reduce_reference(&g).edges);
        prop_assert!(reduced.edges.len() <= g.edges.len());
        prop_assert_eq!(reduced.rollout().unwrap(), g.rollout().unwrap());
    }

    #[test]
    fn extra_edges_never_shorten_the_rollout(g in graph()) {
        let mut bare = g.clone();
        bare.edges.clear();
        prop_assert!(bare.rollout().unwrap().makespan <= g.rollout().unwrap().makespan + 1e-12);
    }

    #[test]
    fn nominal_execution_replays_the_rollout(g in graph()) {
        let roll = g.rollout().unwrap();
        let trace = exec::simulate(&g, &BTreeMap::new(), JitterModel::none(), 0, None).unwrap();
        prop_assert!((trace.makespan - roll.makespan).abs() < 1e-9);
    }

    #[test]
    fn slowdowns_never_finish_earlier(g in graph(), seed in any::<u64>()) {
        let roll = g.rollout().unwrap();
        let trace = exec::simulate(&g, &BTreeMap::new(), JitterModel { skills: false, pose_slowdown: 0.5 }, seed, None).unwrap();
        prop_assert!(trace.makespan >= roll.makespan - 1e-9);
        prop_assert!(exec::is_linear_extension(&g, &trace.start_order()));
    }

    #[test]
    fn joint_distance_is_a_metric(a in prop::collection::vec(-3.0f64..3.0, 3), b in prop::collection::vec(-3.0f64..3.0, 3), c in prop::collection::vec(-3.0f64..3.0, 3)) {
        let (a, b, c) = (Configuration::new(a), Configuration::new(b), Configuration::new(c));
        prop_assert_eq!(a.distance(&b), b.distance(&a));
        prop_assert_eq!(a.distance(&a), 0.0);
        prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c) + 1e-12);
    }
}

/// Unsupported single-robot-type problems, where any injective object choice is feasible.
fn plain_problem() -> impl Strategy<Value = AssignmentProblem> {
    (1usize..=4, 0usize..=2, 1usize..=2).prop_flat_map(|(na, extra, p)| {
        let nb = na + extra;
        prop::collection::vec(prop::collection::vec(prop::collection::vec(prop::collection::vec(1.0f64..9.0, p), nb), 2), na)
            .prop_map(move |x| AssignmentProblem {
                n_robots: 2,
                n_objects: nb,
                p,
                x_cost: x.into_iter().map(|r| r.into_iter().map(|o| o.into_iter().map(|g| g.into_iter().map(Some).collect()).collect()).collect()).collect(),
                y_cost: vec![vec![vec![None; p]; 2]; na],
                needs_support: vec![false; na],
                type_match: vec![vec![true; nb]; na],
                support_partner: vec![None; na],
                lambda: 0.5,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn assignment_beats_every_diagonal_choice(pr in plain_problem(), robots in prop::collection::vec(0usize..2, 4)) {
        let a = solve_assignment(&pr).unwrap();
        prop_assert!(pr.check(&a).is_ok());
        let (v, _, _) = pr.evaluate(&a.steps).unwrap();
        prop_assert!((v - a.objective_value).abs() < 1e-9);
        // Step j takes object j with grasp 0 on an arbitrary robot: feasible, so no better.
        let alt: Vec<StepChoice> = (0..pr.n_steps()).map(|j| StepChoice { robot: robots[j], object: j, grasp: 0, support: None }).collect();
        prop_assert!(a.objective_value <= pr.evaluate(&alt).unwrap().0 + 1e-9);
    }
}
