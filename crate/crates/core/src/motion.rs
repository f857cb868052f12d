//! Single-task motion planning and the sequential multi-arm plan.
//!
//! Tasks are planned one at a time in the task plan's global order; every
//! robot that is not moving is treated as a static obstacle at its current
//! pose. Transit paths come from RRT-Connect followed by shortcutting and are
//! resampled so no step exceeds `v_max · dt` in L1 joint distance.

use crate::error::{Error, Result};
use crate::scenario::{ReferenceGenerator, Scenario, SkillName};
use crate::taskplan::{TaskKind, TaskPlan};
use crate::world::{Attached, Configuration, Placement, RobotGeometry, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Validity oracle a sampling planner searches against.
pub trait MotionValidator {
    fn state_valid(&self, q: &Configuration) -> bool;
    fn motion_valid(&self, a: &Configuration, b: &Configuration) -> bool;
}

/// One arm moving among stationary robots and the static scene.
pub struct SingleArm<'a> {
    pub world: &'a WorldState,
    pub robot: usize,
    pub attach: Option<Attached>,
    pub stationary: &'a [RobotGeometry],
    pub resolution: f64,
}

impl MotionValidator for SingleArm<'_> {
    fn state_valid(&self, q: &Configuration) -> bool {
        self.world
            .placement_clear(&Placement::new(self.robot, q.clone(), self.attach), self.stationary)
    }

    fn motion_valid(&self, a: &Configuration, b: &Configuration) -> bool {
        self.world
            .path_clear(self.robot, self.attach, a, b, self.resolution, self.stationary)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    /// Tree extension step, L1 radians.
    pub step: f64,
    pub max_iterations: usize,
    /// Per-joint collision sampling resolution along straight motions.
    pub resolution: f64,
    pub shortcut_iterations: usize,
    /// Fresh seeds tried when a discretized path fails verification.
    pub retries: usize,
    pub seed: u64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iterations: 10_000,
            resolution: 0.005,
            shortcut_iterations: 200,
            retries: 5,
            seed: 0,
        }
    }
}

struct Tree {
    nodes: Vec<Configuration>,
    parent: Vec<usize>,
}

impl Tree {
    fn new(root: Configuration) -> Self {
        Self { nodes: vec![root], parent: vec![usize::MAX] }
    }

    fn nearest(&self, q: &Configuration) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, n) in self.nodes.iter().enumerate() {
            let d = n.distance(q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    fn add(&mut self, q: Configuration, parent: usize) -> usize {
        self.nodes.push(q);
        self.parent.push(parent);
        self.nodes.len() - 1
    }

    fn branch(&self, mut i: usize) -> Vec<Configuration> {
        let mut out = Vec::new();
        while i != usize::MAX {
            out.push(self.nodes[i].clone());
            i = self.parent[i];
        }
        out
    }
}

enum Extend {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

fn extend(tree: &mut Tree, q: &Configuration, step: f64, v: &dyn MotionValidator) -> Extend {
    let near = tree.nearest(q);
    let from = tree.nodes[near].clone();
    let d = from.distance(q);
    let (target, reached) = if d <= step { (q.clone(), true) } else { (from.lerp(q, step / d), false) };
    if !v.motion_valid(&from, &target) {
        return Extend::Trapped;
    }
    let id = tree.add(target, near);
    if reached {
        Extend::Reached(id)
    } else {
        Extend::Advanced(id)
    }
}

fn sample(rng: &mut ChaCha8Rng, dof: usize) -> Configuration {
    // (−π, π]: flip the half-open end of the uniform range.
    Configuration((0..dof).map(|_| -rng.gen_range(-PI..PI)).collect())
}

/// Bidirectional RRT; the returned path starts at `start` and ends at `goal`.
pub fn rrt_connect(
    v: &dyn MotionValidator,
    start: &Configuration,
    goal: &Configuration,
    cfg: &MotionConfig,
    seed: u64,
) -> std::result::Result<Vec<Configuration>, String> {
    if !v.state_valid(start) {
        return Err("start pose in collision".into());
    }
    if !v.state_valid(goal) {
        return Err("goal pose in collision".into());
    }
    if start == goal {
        return Ok(vec![start.clone()]);
    }
    if v.motion_valid(start, goal) {
        return Ok(vec![start.clone(), goal.clone()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Tree::new(start.clone());
    let mut b = Tree::new(goal.clone());
    let mut a_is_start = true;
    for _ in 0..cfg.max_iterations {
        let q = sample(&mut rng, start.dof());
        let new = match extend(&mut a, &q, cfg.step, v) {
            Extend::Trapped => None,
            Extend::Reached(i) | Extend::Advanced(i) => Some(i),
        };
        if let Some(ia) = new {
            let target = a.nodes[ia].clone();
            loop {
                match extend(&mut b, &target, cfg.step, v) {
                    Extend::Advanced(_) => continue,
                    Extend::Trapped => break,
                    Extend::Reached(ib) => {
                        let mut first = a.branch(ia);
                        first.reverse();
                        let mut second = b.branch(ib);
                        second.remove(0);
                        first.extend(second);
                        if !a_is_start {
                            first.reverse();
                        }
                        return Ok(first);
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Err(format!("no path after {} iterations", cfg.max_iterations))
}

fn path_length(path: &[Configuration]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

fn point_at(path: &[Configuration], s: f64) -> (usize, Configuration) {
    let mut acc = 0.0;
    for (i, w) in path.windows(2).enumerate() {
        let d = w[0].distance(&w[1]);
        if acc + d >= s && d > 0.0 {
            return (i, w[0].lerp(&w[1], (s - acc) / d));
        }
        acc += d;
    }
    (path.len() - 1, path[path.len() - 1].clone())
}

/// Randomized shortcutting between two points drawn along the path.
///
/// Endpoints never move and the result never gets longer.
pub fn shortcut_path(
    v: &dyn MotionValidator,
    path: &[Configuration],
    iterations: usize,
    rng: &mut impl Rng,
) -> Vec<Configuration> {
    let mut path = path.to_vec();
    for _ in 0..iterations {
        if path.len() < 3 {
            break;
        }
        let len = path_length(&path);
        let (mut s0, mut s1) = (rng.gen_range(0.0..=len), rng.gen_range(0.0..=len));
        if s0 > s1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        let (i0, q0) = point_at(&path, s0);
        let (i1, q1) = point_at(&path, s1);
        if i0 == i1 {
            continue;
        }
        if q0.distance(&q1) + 1e-12 >= s1 - s0 || !v.motion_valid(&q0, &q1) {
            continue;
        }
        let mut next = path[..=i0].to_vec();
        if next.last() != Some(&q0) {
            next.push(q0);
        }
        next.push(q1.clone());
        for q in &path[i1 + 1..] {
            if next.last() != Some(q) {
                next.push(q.clone());
            }
        }
        if path_length(&next) < len {
            path = next;
        }
    }
    path
}

/// Resamples a polyline so every step has L1 length at most `v_max · dt`,
/// stamping each pose with `t_prev + d / v_max`.
pub fn discretize_and_timestamp(
    path: &[Configuration],
    dt: f64,
    v_max: f64,
    t_start: f64,
) -> Vec<(Configuration, f64)> {
    let mut out = Vec::new();
    let Some(first) = path.first() else { return out };
    let step = v_max * dt;
    out.push((first.clone(), t_start));
    for w in path.windows(2) {
        let d = w[0].distance(&w[1]);
        if d == 0.0 {
            continue;
        }
        let n = ((d / step) - 1e-9).ceil().max(1.0) as usize;
        for s in 1..=n {
            let q = if s == n { w[1].clone() } else { w[0].lerp(&w[1], s as f64 / n as f64) };
            let (prev, t) = out.last().unwrap();
            let t = t + prev.distance(&q) / v_max;
            out.push((q, t));
        }
    }
    out
}

/// Resampled skill reference for a goal pose.
pub fn skill_reference(
    generator: ReferenceGenerator,
    twist: f64,
    start: &Configuration,
    goal: &Configuration,
    dt: f64,
    v_max: f64,
) -> Vec<Configuration> {
    let poly = match generator {
        ReferenceGenerator::TwoStepAttachTwist => {
            let mut twisted = goal.clone();
            if let Some(last) = twisted.0.last_mut() {
                *last = if *last + twist > PI { *last - twist } else { *last + twist };
            }
            vec![goal.clone(), twisted, goal.clone()]
        }
        ReferenceGenerator::SingleStepGoalReach => vec![start.clone(), goal.clone()],
    };
    discretize_and_timestamp(&poly, dt, v_max, 0.0)
        .into_iter()
        .map(|(q, _)| q)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedPath {
    pub robot: usize,
    pub task: usize,
    pub poses: Vec<Configuration>,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillPath {
    pub robot: usize,
    pub task: usize,
    pub skill: SkillName,
    pub reference: Vec<Configuration>,
    pub start_time: f64,
    pub end_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMotion {
    Transit(TimedPath),
    Skill(SkillPath),
}

impl TaskMotion {
    pub fn robot(&self) -> usize {
        match self {
            TaskMotion::Transit(p) => p.robot,
            TaskMotion::Skill(s) => s.robot,
        }
    }

    pub fn start_time(&self) -> f64 {
        match self {
            TaskMotion::Transit(p) => p.times[0],
            TaskMotion::Skill(s) => s.start_time,
        }
    }

    pub fn end_time(&self) -> f64 {
        match self {
            TaskMotion::Transit(p) => *p.times.last().unwrap(),
            TaskMotion::Skill(s) => s.end_time,
        }
    }

    pub fn last_pose(&self) -> &Configuration {
        match self {
            TaskMotion::Transit(p) => p.poses.last().unwrap(),
            TaskMotion::Skill(s) => s.reference.last().unwrap(),
        }
    }
}

/// Timed motions for every task, executed one after another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialPlan {
    /// Indexed by task id.
    pub motions: Vec<TaskMotion>,
    pub makespan: f64,
}

/// Attachment carried by each robot while each task runs.
pub fn attachments_during(plan: &TaskPlan) -> Vec<Option<Attached>> {
    let mut carrying: Vec<Option<Attached>> = vec![None; plan.n_robots()];
    let mut out = Vec::with_capacity(plan.tasks.len());
    for t in &plan.tasks {
        if let Some(a) = t.attach {
            carrying[t.robot] = Some(a);
        }
        out.push(carrying[t.robot]);
        if t.detach.is_some() {
            carrying[t.robot] = None;
        }
    }
    out
}

/// Plans every task in the plan's global order.
pub fn plan_sequential(sc: &Scenario, plan: &TaskPlan, cfg: &MotionConfig) -> Result<SequentialPlan> {
    let world = &sc.world;
    let n = sc.n_robots();
    let mut current: Vec<Configuration> = world.robots.iter().map(|r| r.home.clone()).collect();
    let mut carrying: Vec<Option<Attached>> = vec![None; n];
    let mut t = 0.0;
    let mut motions = Vec::with_capacity(plan.tasks.len());
    for task in &plan.tasks {
        let r = task.robot;
        if let Some(a) = task.attach {
            carrying[r] = Some(a);
        }
        let stationary: Vec<RobotGeometry> = (0..n)
            .filter(|&o| o != r)
            .map(|o| world.geometry(&Placement::new(o, current[o].clone(), carrying[o])))
            .collect();
        let v = SingleArm { world, robot: r, attach: carrying[r], stationary: &stationary, resolution: cfg.resolution };
        let robot = &world.robots[r];
        let fail = |reason: String| Error::Planning { task: task.label(), reason };
        let motion = match task.kind {
            TaskKind::Transit => {
                let mut last_err = String::new();
                let mut found = None;
                for attempt in 0..cfg.retries.max(1) {
                    let seed = cfg.seed ^ ((task.id as u64) << 16) ^ attempt as u64;
                    match rrt_connect(&v, &current[r], &task.goal, cfg, seed) {
                        Err(e) => last_err = e,
                        Ok(raw) => {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
                            let short = shortcut_path(&v, &raw, cfg.shortcut_iterations, &mut rng);
                            let timed = discretize_and_timestamp(&short, sc.dt, robot.v_max, t);
                            if timed.iter().all(|(q, _)| v.state_valid(q)) {
                                found = Some(timed);
                                break;
                            }
                            last_err = "discretized path failed verification".into();
                        }
                    }
                }
                let timed = found.ok_or_else(|| fail(last_err))?;
                let (poses, times) = timed.into_iter().unzip();
                TaskMotion::Transit(TimedPath { robot: r, task: task.id, poses, times })
            }
            TaskKind::Skill(name) => {
                let spec = sc.skill(name);
                let reference = skill_reference(
                    spec.reference_path_generator,
                    spec.twist,
                    &current[r],
                    &task.goal,
                    sc.dt,
                    robot.v_max,
                );
                if let Some(bad) = reference.iter().position(|q| !v.state_valid(q)) {
                    return Err(fail(format!("skill reference pose {bad} in collision")));
                }
                TaskMotion::Skill(SkillPath {
                    robot: r,
                    task: task.id,
                    skill: name,
                    reference,
                    start_time: t,
                    end_time: t + spec.nominal_duration,
                })
            }
        };
        t = motion.end_time();
        current[r] = motion.last_pose().clone();
        if task.detach.is_some() {
            carrying[r] = None;
        }
        motions.push(motion);
    }
    Ok(SequentialPlan { motions, makespan: t })
}

impl SequentialPlan {
    /// Timed rows `(t, q, task_id, kind)` of one robot in task order.
    ///
    /// Skill references are spread evenly over the skill's time span.
    pub fn robot_rows<'a>(&'a self, plan: &TaskPlan, robot: usize) -> Vec<(f64, &'a Configuration, usize, &'static str)> {
        let mut out = Vec::new();
        for &id in plan.robot_tasks(robot) {
            match &self.motions[id] {
                TaskMotion::Transit(p) => {
                    out.extend(p.times.iter().zip(&p.poses).map(|(&t, q)| (t, q, id, "transit")));
                }
                TaskMotion::Skill(s) => {
                    let n = s.reference.len();
                    for (i, q) in s.reference.iter().enumerate() {
                        let f = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                        out.push((s.start_time + f * (s.end_time - s.start_time), q, id, s.skill.as_str()));
                    }
                }
            }
        }
        out
    }

    /// Idle time of each robot before its last motion ends, summed.
    pub fn wait_time(&self, plan: &TaskPlan) -> f64 {
        (0..plan.n_robots())
            .filter_map(|r| {
                let ids = plan.robot_tasks(r);
                let last = self.motions[*ids.last()?].end_time();
                let busy: f64 = ids.iter().map(|&id| self.motions[id].end_time() - self.motions[id].start_time()).sum();
                Some((last - busy).max(0.0))
            })
            .fold(0.0, |a, b| a + b)
    }

    /// Per-robot CSV: `t, q_1..q_d, task_id, kind`.
    pub fn robot_csv(&self, plan: &TaskPlan, robot: usize) -> String {
        let rows = self.robot_rows(plan, robot);
        let mut out = csv_header(rows.first().map_or(0, |r| r.1.dof()), &[]);
        for (t, q, id, kind) in rows {
            let _ = writeln!(out, "{}", csv_row(t, q, &[id.to_string(), kind.to_string()]));
        }
        out
    }
}

pub(crate) fn csv_header(dof: usize, extra: &[&str]) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=dof).map(|i| format!("q_{i}")));
    cols.extend(["task_id", "kind"].iter().chain(extra).map(|s| s.to_string()));
    format!("{}\n", cols.join(","))
}

/// Floats use the shortest representation that parses back to the same bits.
pub(crate) fn csv_row(t: f64, q: &Configuration, tail: &[String]) -> String {
    let qs: Vec<String> = q.joints().iter().map(|v| format!("{v:?}")).collect();
    format!("{t:?},{},{}", qs.join(","), tail.join(","))
}

/// One row of a per-robot plan dump.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub q: Configuration,
    pub task: usize,
    pub kind: String,
    /// Columns after `kind`, such as the synchronous round.
    pub extra: Vec<String>,
}

/// Reads a per-robot plan dump back; values are bit-identical to the ones written.
pub fn parse_robot_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Parse("empty plan dump".into()))?.split(',').collect();
    let dof = header.iter().filter(|h| h.starts_with("q_")).count();
    if header.first() != Some(&"t") || header.get(dof + 1) != Some(&"task_id") {
        return Err(Error::Parse(format!("unexpected plan dump header: {}", header.join(","))));
    }
    let num = |s: &str, line: usize| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {line}: {e}")));
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != header.len() {
                return Err(Error::Parse(format!("line {line}: expected {} fields, got {}", header.len(), f.len())));
            }
            let q = f[1..=dof].iter().map(|s| num(s, line)).collect::<Result<Vec<_>>>()?;
            Ok(CsvRow {
                t: num(f[0], line)?,
                q: Configuration(q),
                task: f[dof + 1].parse().map_err(|e| Error::Parse(format!("line {line}: {e}")))?,
                kind: f[dof + 2].to_string(),
                extra: f[dof + 3..].iter().map(|s| s.to_string()).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Free;
    impl MotionValidator for Free {
        fn state_valid(&self, _: &Configuration) -> bool {
            true
        }
        fn motion_valid(&self, _: &Configuration, _: &Configuration) -> bool {
            true
        }
    }

    /// Joint 0 may not cross zero while joint 1 is below 1.0.
    struct Wall;
    impl MotionValidator for Wall {
        fn state_valid(&self, q: &Configuration) -> bool {
            !(q.0[0].abs() < 0.2 && q.0[1] < 1.0)
        }
        fn motion_valid(&self, a: &Configuration, b: &Configuration) -> bool {
            (0..=100).all(|s| self.state_valid(&a.lerp(b, s as f64 / 100.0)))
        }
    }

    #[test]
    fn one_radian_at_unit_speed() {
        let path = [Configuration(vec![0.0, 0.0]), Configuration(vec![1.0, 0.0])];
        let timed = discretize_and_timestamp(&path, 0.05, 1.0, 0.0);
        assert_eq!(timed.len(), 21);
        assert!((timed.last().unwrap().1 - 1.0).abs() < 1e-9);
        for w in timed.windows(2) {
            let d = w[0].0.distance(&w[1].0);
            assert!(d <= 0.05 + 1e-12);
            assert!((w[1].1 - w[0].1 - d).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_length_path_is_single_pose() {
        let q = Configuration(vec![0.3, 0.1]);
        let timed = discretize_and_timestamp(&[q.clone(), q.clone()], 0.05, 1.0, 2.0);
        assert_eq!(timed, vec![(q, 2.0)]);
    }

    #[test]
    fn rrt_finds_way_around_wall() {
        let cfg = MotionConfig::default();
        let a = Configuration(vec![-1.0, 0.0]);
        let b = Configuration(vec![1.0, 0.0]);
        let path = rrt_connect(&Wall, &a, &b, &cfg, 7).unwrap();
        assert_eq!(path.first(), Some(&a));
        assert_eq!(path.last(), Some(&b));
        for w in path.windows(2) {
            assert!(Wall.motion_valid(&w[0], &w[1]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let short = shortcut_path(&Wall, &path, 300, &mut rng);
        assert!(path_length(&short) <= path_length(&path) + 1e-12);
        assert_eq!(short.first(), Some(&a));
        assert_eq!(short.last(), Some(&b));
        for w in short.windows(2) {
            assert!(Wall.motion_valid(&w[0], &w[1]));
        }
    }

    #[test]
    fn rrt_is_deterministic_per_seed() {
        let cfg = MotionConfig::default();
        let a = Configuration(vec![-1.0, 0.0]);
        let b = Configuration(vec![1.0, 0.0]);
        assert_eq!(rrt_connect(&Wall, &a, &b, &cfg, 3), rrt_connect(&Wall, &a, &b, &cfg, 3));
    }

    #[test]
    fn zigzag_shortcuts_to_near_straight() {
        let pts: Vec<Configuration> = (0..=10)
            .map(|i| Configuration(vec![i as f64 * 0.2, if i % 2 == 0 { 0.0 } else { 0.5 }]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let short = shortcut_path(&Free, &pts, 200, &mut rng);
        let straight = pts[0].distance(&pts[10]);
        assert!(path_length(&short) <= straight * 1.05);
    }

    #[test]
    fn twist_reference_returns_to_goal() {
        let g = Configuration(vec![0.1, 0.2, 3.1]);
        let r = skill_reference(ReferenceGenerator::TwoStepAttachTwist, 0.05, &g, &g, 0.05, 1.0);
        assert_eq!(r.first(), Some(&g));
        assert_eq!(r.last(), Some(&g));
        assert!(r.iter().all(|q| q.0[2] <= PI));
    }
}
