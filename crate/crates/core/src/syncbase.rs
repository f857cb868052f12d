//! Synchronous baseline: robots execute their tasks in rounds and wait for
//! the slowest robot before starting the next round. Transits inside a round
//! are planned jointly in the stacked configuration space.

use crate::error::{Error, Result};
use crate::motion::{
    attachments_during, csv_header, csv_row, discretize_and_timestamp, rrt_connect, shortcut_path, MotionConfig,
    MotionValidator, SequentialPlan, SkillPath, TaskMotion, TimedPath,
};
use crate::scenario::Scenario;
use crate::taskplan::{TaskKind, TaskPlan};
use crate::world::{Attached, Configuration, Placement, RobotGeometry, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Why a task was held back to a later round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitReason {
    /// A task-graph predecessor had not finished.
    TaskDependency,
    /// Its goal footprint collides with the blocking task or robot.
    GoalCollision,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaitDependency {
    /// The task that was deferred.
    pub task: usize,
    /// Task it waits for, or `None` when blocked by an idle robot's pose.
    pub blocker: Option<usize>,
    pub reason: WaitReason,
    /// Round the task was deferred out of.
    pub round: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncTaskPlan {
    /// Task ids started together, ascending.
    pub rounds: Vec<Vec<usize>>,
    pub waits: Vec<WaitDependency>,
}

struct Footprints {
    /// Geometry occupied once the task is done, or swept by a skill.
    goal: Vec<Vec<RobotGeometry>>,
    /// Every pose the task's sequential motion passes through.
    path: Vec<Vec<RobotGeometry>>,
    /// Robot geometry at the start of each task.
    start: Vec<RobotGeometry>,
    /// Robot geometry after each task, as held while idle.
    after: Vec<RobotGeometry>,
}

fn footprints(world: &WorldState, plan: &TaskPlan, seq: &SequentialPlan) -> Footprints {
    let carrying = attachments_during(plan);
    let mut pose: Vec<Configuration> = world.robots.iter().map(|r| r.home.clone()).collect();
    let mut fp = Footprints { goal: Vec::new(), path: Vec::new(), start: Vec::new(), after: Vec::new() };
    for t in &plan.tasks {
        let r = t.robot;
        let geo = |q: &Configuration, a: Option<Attached>| world.geometry(&Placement::new(r, q.clone(), a));
        fp.start.push(geo(&pose[r], carrying[t.id]));
        fp.goal.push(match &seq.motions[t.id] {
            TaskMotion::Skill(s) => s.reference.iter().map(|q| geo(q, carrying[t.id])).collect(),
            TaskMotion::Transit(_) => vec![geo(&t.goal, carrying[t.id])],
        });
        fp.path.push(match &seq.motions[t.id] {
            TaskMotion::Skill(_) => fp.goal[t.id].clone(),
            TaskMotion::Transit(p) => p.poses.iter().map(|q| geo(q, carrying[t.id])).collect(),
        });
        pose[r] = seq.motions[t.id].last_pose().clone();
        let held = if t.detach.is_some() { None } else { carrying[t.id] };
        fp.after.push(geo(&pose[r], held));
    }
    fp
}

fn any_overlap(world: &WorldState, a: &[RobotGeometry], b: &[RobotGeometry]) -> bool {
    a.iter().any(|x| b.iter().any(|y| world.pair_collides(x, y)))
}

/// Greedy round construction. Candidates are each robot's next task; a
/// candidate joins the round when its task-graph predecessors and every
/// earlier task whose motion its goal obstructs finished in earlier rounds, and its
/// goal footprint is clear of every other robot's footprint for the round.
/// On conflict the later-indexed task is deferred.
pub fn to_synchronous(world: &WorldState, plan: &TaskPlan, seq: &SequentialPlan) -> SyncTaskPlan {
    let fp = footprints(world, plan, seq);
    let n = plan.n_robots();
    let mut next = vec![0usize; n];
    let mut done = vec![false; plan.tasks.len()];
    // Geometry each robot holds when not moving; home until its first task.
    let mut held: Vec<RobotGeometry> =
        (0..n).map(|r| world.geometry(&Placement::new(r, world.robots[r].home.clone(), None))).collect();
    let mut preds: Vec<Vec<(usize, WaitReason)>> = vec![Vec::new(); plan.tasks.len()];
    for &(a, b) in &plan.graph.edges {
        preds[b].push((a, WaitReason::TaskDependency));
    }
    // A task never overtakes an earlier task of another robot whose motion
    // its goal would obstruct, so a robot that runs ahead never blocks the
    // earliest unfinished task.
    for c in 0..plan.tasks.len() {
        for a in 0..c {
            if plan.tasks[a].robot != plan.tasks[c].robot && any_overlap(world, &fp.goal[c], &fp.path[a]) {
                preds[c].push((a, WaitReason::GoalCollision));
            }
        }
    }
    let mut out = SyncTaskPlan { rounds: Vec::new(), waits: Vec::new() };
    while done.iter().any(|d| !d) {
        let round = out.rounds.len();
        let mut candidates: Vec<usize> = (0..n).filter_map(|r| plan.robot_tasks(r).get(next[r]).copied()).collect();
        candidates.sort_unstable();
        let mut ready = Vec::new();
        for &c in &candidates {
            match preds[c].iter().find(|p| !done[p.0]) {
                Some(&(p, reason)) => out.waits.push(WaitDependency { task: c, blocker: Some(p), reason, round }),
                None => ready.push(c),
            }
        }
        // Drop conflicting tasks until the round is stable against idle robots.
        let mut excluded: Vec<usize> = Vec::new();
        let mut idle_waits = Vec::new();
        let mut pair_waits;
        let chosen = loop {
            pair_waits = Vec::new();
            let mut chosen: Vec<usize> = Vec::new();
            for &c in ready.iter().filter(|c| !excluded.contains(c)) {
                let clash = chosen.iter().copied().find(|&a| {
                    any_overlap(world, &fp.goal[c], &fp.goal[a])
                        || any_overlap(world, &fp.goal[c], std::slice::from_ref(&fp.start[a]))
                        || any_overlap(world, std::slice::from_ref(&fp.start[c]), &fp.goal[a])
                });
                match clash {
                    Some(a) => pair_waits.push(WaitDependency {
                        task: c,
                        blocker: Some(a),
                        reason: WaitReason::GoalCollision,
                        round,
                    }),
                    None => chosen.push(c),
                }
            }
            let moving: Vec<usize> = chosen.iter().map(|&c| plan.tasks[c].robot).collect();
            let blocked = chosen.iter().copied().find(|&c| {
                (0..n)
                    .filter(|r| !moving.contains(r))
                    .any(|r| any_overlap(world, &fp.goal[c], std::slice::from_ref(&held[r])))
            });
            match blocked {
                Some(c) => {
                    idle_waits.push(WaitDependency { task: c, blocker: None, reason: WaitReason::GoalCollision, round });
                    excluded.push(c);
                }
                None => break chosen,
            }
        };
        // The globally earliest remaining task always has its predecessors
        // done, so a round is never empty.
        let chosen = if chosen.is_empty() {
            vec![(0..plan.tasks.len()).find(|&t| !done[t]).expect("a task remains")]
        } else {
            chosen
        };
        for &c in &chosen {
            let r = plan.tasks[c].robot;
            done[c] = true;
            next[r] += 1;
            held[r] = fp.after[c].clone();
        }
        out.waits.extend(idle_waits.into_iter().chain(pair_waits).filter(|w| !chosen.contains(&w.task)));
        out.rounds.push(chosen);
    }
    out
}

/// Several arms moving together; configurations are stacked in `robots` order.
pub struct Composite<'a> {
    pub world: &'a WorldState,
    pub robots: Vec<usize>,
    pub attach: Vec<Option<Attached>>,
    pub stationary: &'a [RobotGeometry],
    pub resolution: f64,
}

impl Composite<'_> {
    fn dofs(&self) -> Vec<usize> {
        self.robots.iter().map(|&r| self.world.robots[r].dof()).collect()
    }

    pub fn stack(parts: &[Configuration]) -> Configuration {
        Configuration(parts.iter().flat_map(|q| q.joints().iter().copied()).collect())
    }

    pub fn split(&self, q: &Configuration) -> Vec<Configuration> {
        let mut at = 0;
        self.dofs()
            .into_iter()
            .map(|d| {
                let part = Configuration(q.joints()[at..at + d].to_vec());
                at += d;
                part
            })
            .collect()
    }
}

impl MotionValidator for Composite<'_> {
    fn state_valid(&self, q: &Configuration) -> bool {
        let geoms: Vec<RobotGeometry> = self
            .split(q)
            .into_iter()
            .zip(self.robots.iter().zip(&self.attach))
            .map(|(part, (&r, &a))| self.world.geometry(&Placement::new(r, part, a)))
            .collect();
        geoms.iter().enumerate().all(|(i, g)| {
            !self.world.hits_static(g)
                && self.stationary.iter().all(|s| !self.world.pair_collides(g, s))
                && geoms[i + 1..].iter().all(|h| !self.world.pair_collides(g, h))
        })
    }

    fn motion_valid(&self, a: &Configuration, b: &Configuration) -> bool {
        let steps = (a.max_joint_delta(b) / self.resolution).ceil().max(1.0) as usize;
        (0..=steps).all(|s| self.state_valid(&a.lerp(b, s as f64 / steps as f64)))
    }
}

/// Joint path of the robots that transit together in one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositePath {
    pub robots: Vec<usize>,
    pub poses: Vec<Configuration>,
    pub times: Vec<f64>,
}

impl CompositePath {
    /// The `k`-th robot's share of the path.
    pub fn project(&self, world: &WorldState, k: usize, task: usize) -> TimedPath {
        let at: usize = self.robots[..k].iter().map(|&r| world.robots[r].dof()).sum();
        let d = world.robots[self.robots[k]].dof();
        TimedPath {
            robot: self.robots[k],
            task,
            poses: self.poses.iter().map(|q| Configuration(q.joints()[at..at + d].to_vec())).collect(),
            times: self.times.clone(),
        }
    }
}

/// RRT-Connect over the stacked configuration space, then shortcutting and
/// resampling with the single-arm rules. `v_max` is the slowest arm's.
pub fn plan_composite(
    v: &Composite,
    starts: &[Configuration],
    goals: &[Configuration],
    dt: f64,
    t0: f64,
    cfg: &MotionConfig,
    seed: u64,
) -> std::result::Result<CompositePath, String> {
    let start = Composite::stack(starts);
    let goal = Composite::stack(goals);
    let v_max = v.robots.iter().map(|&r| v.world.robots[r].v_max).fold(f64::INFINITY, f64::min);
    // The stacked space grows with every arm, so the tree budget does too.
    let cfg = &MotionConfig { max_iterations: cfg.max_iterations * v.robots.len().max(1), ..cfg.clone() };
    let mut last_err = String::new();
    for attempt in 0..cfg.retries.max(1) {
        let s = seed ^ attempt as u64;
        let raw = match rrt_connect(v, &start, &goal, cfg, s) {
            Ok(raw) => raw,
            Err(e) => {
                last_err = e;
                // Joint search failed; one arm at a time is still a path in
                // the stacked space.
                match staggered(v, starts, goals, cfg, s, attempt) {
                    Some(raw) => raw,
                    None => continue,
                }
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(s.wrapping_add(1));
        let short = shortcut_path(v, &raw, cfg.shortcut_iterations, &mut rng);
        let timed = discretize_and_timestamp(&short, dt, v_max, t0);
        if timed.iter().all(|(q, _)| v.state_valid(q)) {
            let (poses, times) = timed.into_iter().unzip();
            return Ok(CompositePath { robots: v.robots.clone(), poses, times });
        }
        last_err = "discretized path failed verification".into();
    }
    Err(last_err)
}

/// The composite space restricted to arm `k`, others frozen at `fixed`.
struct OneArm<'a, 'b> {
    inner: &'a Composite<'b>,
    fixed: Vec<Configuration>,
    k: usize,
}

impl OneArm<'_, '_> {
    fn lift(&self, q: &Configuration) -> Configuration {
        let mut parts = self.fixed.clone();
        parts[self.k] = q.clone();
        Composite::stack(&parts)
    }
}

impl MotionValidator for OneArm<'_, '_> {
    fn state_valid(&self, q: &Configuration) -> bool {
        self.inner.state_valid(&self.lift(q))
    }

    fn motion_valid(&self, a: &Configuration, b: &Configuration) -> bool {
        self.inner.motion_valid(&self.lift(a), &self.lift(b))
    }
}

/// Moves the arms one after another, starting with arm `rotation % n`.
fn staggered(
    v: &Composite,
    starts: &[Configuration],
    goals: &[Configuration],
    cfg: &MotionConfig,
    seed: u64,
    rotation: usize,
) -> Option<Vec<Configuration>> {
    let n = starts.len();
    let mut current = starts.to_vec();
    let mut path = vec![Composite::stack(&current)];
    for step in 0..n {
        let k = (rotation + step) % n;
        let one = OneArm { inner: v, fixed: current.clone(), k };
        let leg = rrt_connect(&one, &starts[k], &goals[k], cfg, seed ^ ((k as u64 + 1) << 32)).ok()?;
        path.extend(leg.iter().skip(1).map(|q| one.lift(q)));
        current[k] = goals[k].clone();
    }
    Some(path)
}

/// A lone transit may fall back to its sequential path, shifted to `t0`,
/// when that path is still clear.
fn reuse_sequential(v: &Composite, seq: &SequentialPlan, transits: &[usize], t0: f64) -> Option<CompositePath> {
    let [c] = transits else { return None };
    let TaskMotion::Transit(p) = &seq.motions[*c] else { return None };
    let clear = p.poses.iter().all(|q| v.state_valid(q)) && p.poses.windows(2).all(|w| v.motion_valid(&w[0], &w[1]));
    clear.then(|| CompositePath {
        robots: v.robots.clone(),
        poses: p.poses.clone(),
        times: p.times.iter().map(|x| x - p.times[0] + t0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncRound {
    pub tasks: Vec<usize>,
    pub start: f64,
    pub end: f64,
    pub composite: Option<CompositePath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncPlan {
    pub task_plan: SyncTaskPlan,
    pub rounds: Vec<SyncRound>,
    /// Per-task motions on the synchronous clock, shaped like a sequential plan.
    pub motions: SequentialPlan,
    pub makespan: f64,
}

/// Converts the task plan into rounds and plans each round's motions.
pub fn plan_synchronous(sc: &Scenario, plan: &TaskPlan, seq: &SequentialPlan, cfg: &MotionConfig) -> Result<SyncPlan> {
    let world = &sc.world;
    let tp = to_synchronous(world, plan, seq);
    let carrying = attachments_during(plan);
    let n = plan.n_robots();
    let mut pose: Vec<Configuration> = world.robots.iter().map(|r| r.home.clone()).collect();
    let mut held: Vec<Option<Attached>> = vec![None; n];
    let mut motions: Vec<Option<TaskMotion>> = vec![None; plan.tasks.len()];
    let mut rounds = Vec::with_capacity(tp.rounds.len());
    let mut t = 0.0;
    for (ri, ids) in tp.rounds.iter().enumerate() {
        let moving: Vec<usize> = ids.iter().map(|&c| plan.tasks[c].robot).collect();
        let transits: Vec<usize> = ids.iter().copied().filter(|&c| plan.tasks[c].kind == TaskKind::Transit).collect();
        let mut stationary: Vec<RobotGeometry> = (0..n)
            .filter(|r| !moving.contains(r))
            .map(|r| world.geometry(&Placement::new(r, pose[r].clone(), held[r])))
            .collect();
        let mut end = t;
        for &c in ids.iter().filter(|c| !transits.contains(c)) {
            let TaskMotion::Skill(s) = &seq.motions[c] else { unreachable!("skill task has a skill motion") };
            let r = plan.tasks[c].robot;
            stationary.extend(s.reference.iter().map(|q| world.geometry(&Placement::new(r, q.clone(), carrying[c]))));
            let duration = s.end_time - s.start_time;
            motions[c] = Some(TaskMotion::Skill(SkillPath { start_time: t, end_time: t + duration, ..s.clone() }));
            end = f64::max(end, t + duration);
        }
        let mut composite = None;
        if !transits.is_empty() {
            let robots: Vec<usize> = transits.iter().map(|&c| plan.tasks[c].robot).collect();
            let v = Composite {
                world,
                robots: robots.clone(),
                attach: transits.iter().map(|&c| carrying[c]).collect(),
                stationary: &stationary,
                resolution: cfg.resolution,
            };
            let starts: Vec<Configuration> = robots.iter().map(|&r| pose[r].clone()).collect();
            let goals: Vec<Configuration> = transits.iter().map(|&c| plan.tasks[c].goal.clone()).collect();
            let seed = cfg.seed ^ ((ri as u64) << 20) ^ 0x5a5a;
            let path = plan_composite(&v, &starts, &goals, sc.dt, t, cfg, seed)
                .or_else(|reason| reuse_sequential(&v, seq, &transits, t).ok_or(reason))
                .map_err(|reason| Error::Planning { task: format!("round {ri}"), reason })?;
            for (k, &c) in transits.iter().enumerate() {
                motions[c] = Some(TaskMotion::Transit(path.project(world, k, c)));
            }
            end = f64::max(end, *path.times.last().unwrap());
            composite = Some(path);
        }
        for &c in ids {
            let r = plan.tasks[c].robot;
            pose[r] = motions[c].as_ref().unwrap().last_pose().clone();
            held[r] = if plan.tasks[c].detach.is_some() { None } else { carrying[c] };
        }
        rounds.push(SyncRound { tasks: ids.clone(), start: t, end, composite });
        t = end;
    }
    let motions = SequentialPlan { motions: motions.into_iter().map(|m| m.expect("every task scheduled")).collect(), makespan: t };
    Ok(SyncPlan { task_plan: tp, rounds, motions, makespan: t })
}

impl SyncPlan {
    pub fn round_of(&self, task: usize) -> usize {
        self.rounds.iter().position(|r| r.tasks.contains(&task)).unwrap_or(0)
    }

    /// Per-robot CSV like the sequential dump, with a trailing `round` column.
    pub fn robot_csv(&self, plan: &TaskPlan, robot: usize) -> String {
        let rows = self.motions.robot_rows(plan, robot);
        let mut out = csv_header(rows.first().map_or(0, |r| r.1.dof()), &["round"]);
        for (t, q, id, kind) in rows {
            let tail = [id.to_string(), kind.to_string(), self.round_of(id).to_string()];
            let _ = writeln!(out, "{}", csv_row(t, q, &tail));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskplan::{Assignment, Task, TaskGraph};
    use std::f64::consts::PI;

    fn scene() -> Scenario {
        Scenario::from_json(include_str!("../fixtures/tiny.scn")).unwrap()
    }

    /// Transit-only plan in the given global order, with straight motions.
    fn transits(world: &WorldState, order: &[(usize, [f64; 2])]) -> (TaskPlan, SequentialPlan) {
        let n = world.robots.len();
        let mut per_robot = vec![Vec::new(); n];
        let mut pose: Vec<Configuration> = world.robots.iter().map(|r| r.home.clone()).collect();
        let (mut tasks, mut motions, mut t) = (Vec::new(), Vec::new(), 0.0);
        for (id, &(robot, q)) in order.iter().enumerate() {
            let goal = Configuration::new(q.to_vec());
            let d = pose[robot].distance(&goal);
            tasks.push(Task {
                id,
                robot,
                index: per_robot[robot].len(),
                step: None,
                kind: TaskKind::Transit,
                goal: goal.clone(),
                attach: None,
                detach: None,
            });
            per_robot[robot].push(id);
            let poses = vec![pose[robot].clone(), goal.clone()];
            motions.push(TaskMotion::Transit(TimedPath { robot, task: id, poses, times: vec![t, t + d] }));
            t += d;
            pose[robot] = goal;
        }
        let assignment = Assignment { steps: Vec::new(), objective_value: 0.0, z_max: Vec::new(), z_min: Vec::new() };
        (TaskPlan { tasks, per_robot, graph: TaskGraph::default(), assignment }, SequentialPlan { motions, makespan: t })
    }

    const UP: [f64; 2] = [PI / 2.0, 0.0];
    const DOWN: [f64; 2] = [-PI / 2.0, 0.0];

    #[test]
    fn single_robot_keeps_its_sequence() {
        let sc = scene();
        let (plan, seq) = transits(&sc.world, &[(0, UP), (0, DOWN), (0, [PI, 0.0])]);
        let s = to_synchronous(&sc.world, &plan, &seq);
        assert_eq!(s.rounds, vec![vec![0], vec![1], vec![2]]);
        assert!(s.waits.is_empty());
    }

    #[test]
    fn independent_robots_pair_up() {
        let sc = scene();
        let order = [(0, UP), (0, DOWN), (1, UP), (0, UP), (1, DOWN), (1, UP)];
        let (plan, seq) = transits(&sc.world, &order);
        let s = to_synchronous(&sc.world, &plan, &seq);
        assert_eq!(s.rounds, vec![vec![0, 2], vec![1, 4], vec![3, 5]]);
        let sync = plan_synchronous(&sc, &plan, &seq, &MotionConfig::default()).unwrap();
        assert_eq!(sync.rounds.len(), 3);
        for r in &sync.rounds {
            for &c in &r.tasks {
                assert_eq!(sync.motions.motions[c].start_time(), r.start);
            }
        }
    }

    #[test]
    fn colliding_goal_waits_for_the_other_robot() {
        // Robot 1's third goal points left into the middle, where robot 0's
        // second goal points right.
        let sc = scene();
        let order = [(0, UP), (0, [0.0, 0.0]), (1, UP), (1, DOWN), (1, [PI, 0.0]), (0, [PI, 0.0])];
        let (plan, seq) = transits(&sc.world, &order);
        let s = to_synchronous(&sc.world, &plan, &seq);
        let round = |t: usize| s.rounds.iter().position(|r| r.contains(&t)).unwrap();
        assert!(round(4) > round(1));
        assert!(s.waits.iter().any(|w| w.task == 4 && w.reason == WaitReason::GoalCollision));

        // Same plan with the third goal pointing up is not held back.
        let mut clear = order;
        clear[4] = (1, UP);
        let (plan, seq) = transits(&sc.world, &clear);
        let s = to_synchronous(&sc.world, &plan, &seq);
        assert!(s.waits.is_empty());
        assert_eq!(s.rounds.len(), 3);
    }

    fn both(world: &WorldState) -> Composite<'_> {
        Composite { world, robots: vec![0, 1], attach: vec![None, None], stationary: &[], resolution: 0.005 }
    }

    #[test]
    fn composite_identical_start_and_goal() {
        let sc = scene();
        let q = vec![sc.world.robots[0].home.clone(), sc.world.robots[1].home.clone()];
        let p = plan_composite(&both(&sc.world), &q, &q, sc.dt, 0.0, &MotionConfig::default(), 1).unwrap();
        assert_eq!(p.poses.first(), p.poses.last());
        assert_eq!(p.times[0], 0.0);
    }

    #[test]
    fn composite_swap_through_shared_space() {
        // Both arms end pointing into the middle, one above the other.
        let sc = scene();
        let v = both(&sc.world);
        let starts = vec![sc.world.robots[0].home.clone(), sc.world.robots[1].home.clone()];
        let goals = vec![Configuration::new(vec![0.4, 0.0]), Configuration::new(vec![PI + 0.4, 0.0])];
        let p = plan_composite(&v, &starts, &goals, sc.dt, 2.0, &MotionConfig::default(), 5).unwrap();
        assert_eq!(p.poses.first(), Some(&Composite::stack(&starts)));
        assert_eq!(p.poses.last(), Some(&Composite::stack(&goals)));
        assert_eq!(p.times[0], 2.0);
        // Dense re-check of every segment at a finer step.
        let fine = Composite { resolution: 0.001, ..v };
        for w in p.poses.windows(2) {
            assert!(fine.motion_valid(&w[0], &w[1]));
        }
        for k in 0..2 {
            let part = p.project(&sc.world, k, 0);
            assert_eq!(part.poses.last(), Some(&goals[k]));
        }
    }
}
