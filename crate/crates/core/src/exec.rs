//! Delay-injected execution of a temporal plan graph, and a safety verifier
//! for the resulting traces.
//!
//! A central scheduler owns the graph. It sends a node to its robot's action
//! queue once every type-2 source of the node has finished; each robot agent
//! works through its queue one action at a time and reports completions back.
//! Plan timestamps are never consulted here.

use crate::error::{Error, Result};
use crate::scenario::{SkillName, SkillSpec};
use crate::tpg::{nodes_collide, NodeKind, NodeRef, Tpg};
use crate::world::{Configuration, Placement, RobotGeometry, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Enqueued,
    Started,
    Finished,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Enqueued => "enqueued",
            Phase::Started => "started",
            Phase::Finished => "finished",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecEvent {
    pub time: f64,
    pub robot: usize,
    pub node: usize,
    pub phase: Phase,
}

/// A robot freezes for `duration` seconds starting at `at`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pause {
    pub robot: usize,
    pub at: f64,
    pub duration: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauseScript {
    pub pauses: Vec<Pause>,
}

impl PauseScript {
    /// `count` pauses at uniform times in `[0, horizon)`, each up to `max_duration` long.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_robots: usize, horizon: f64, count: usize, max_duration: f64) -> Self {
        let pauses = (0..count)
            .map(|_| Pause {
                robot: rng.gen_range(0..n_robots.max(1)),
                at: rng.gen_range(0.0..horizon.max(f64::MIN_POSITIVE)),
                duration: rng.gen_range(0.0..=max_duration),
            })
            .collect();
        Self { pauses }
    }
}

/// How realized durations deviate from the nominal ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterModel {
    /// Draw skill durations from each skill's jitter distribution.
    pub skills: bool,
    /// Pose-node durations are stretched by a uniform factor in `[1, 1 + pose_slowdown]`.
    pub pose_slowdown: f64,
}

impl JitterModel {
    pub fn none() -> Self {
        Self { skills: false, pose_slowdown: 0.0 }
    }

    pub fn skills() -> Self {
        Self { skills: true, pose_slowdown: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    pub a: NodeRef,
    /// The other robot's node, or `None` for contact with the static scene.
    pub b: Option<NodeRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub samples: usize,
    pub first_violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecTrace {
    pub events: Vec<ExecEvent>,
    /// Pauses that were applied, sorted by robot then time.
    pub pauses: Vec<Pause>,
    pub makespan: f64,
    pub wait_time: f64,
    pub verdict: Option<SafetyVerdict>,
}

/// Pending completion; the heap pops the earliest, ties by robot then node.
#[derive(Debug, PartialEq)]
struct Pending {
    time: f64,
    robot: usize,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, o: &Self) -> Ordering {
        o.time.total_cmp(&self.time).then(o.robot.cmp(&self.robot)).then(o.node.cmp(&self.node))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Merged, sorted pause intervals of one robot.
fn intervals(pauses: &[Pause], robot: usize) -> Vec<(f64, f64)> {
    let mut iv: Vec<(f64, f64)> = pauses
        .iter()
        .filter(|p| p.robot == robot && p.duration > 0.0)
        .map(|p| (p.at, p.at + p.duration))
        .collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Earliest time not inside a pause.
fn resume_at(iv: &[(f64, f64)], t: f64) -> f64 {
    iv.iter().find(|&&(a, b)| a <= t && t < b).map_or(t, |&(_, b)| b)
}

/// Finish time of `work` seconds of motion begun at `start`.
fn finish_after(iv: &[(f64, f64)], start: f64, work: f64) -> f64 {
    let mut t = start;
    let mut left = work;
    for &(a, b) in iv {
        if b <= t {
            continue;
        }
        if a >= t + left {
            break;
        }
        left -= (a - t).max(0.0);
        t = b;
    }
    t + left
}

/// Active (unpaused) time between `s` and `t`.
fn active_between(iv: &[(f64, f64)], s: f64, t: f64) -> f64 {
    let paused: f64 = iv.iter().map(|&(a, b)| (b.min(t) - a.max(s)).max(0.0)).sum();
    (t - s - paused).max(0.0)
}

/// Realized durations for every node.
fn draw_durations(tpg: &Tpg, skills: &BTreeMap<SkillName, SkillSpec>, jitter: JitterModel, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tpg.chains
        .iter()
        .map(|c| {
            c.iter()
                .map(|n| match n.kind {
                    NodeKind::Skill(s) if jitter.skills => match skills.get(&s) {
                        Some(spec) => spec.duration_jitter.sample(&mut rng),
                        None => n.duration,
                    },
                    NodeKind::Skill(_) => n.duration,
                    NodeKind::Pose if jitter.pose_slowdown > 0.0 => {
                        n.duration * rng.gen_range(1.0..=1.0 + jitter.pose_slowdown)
                    }
                    NodeKind::Pose => n.duration,
                })
                .collect()
        })
        .collect()
}

/// Runs the scheduler and robot agents to completion.
pub fn simulate(
    tpg: &Tpg,
    skills: &BTreeMap<SkillName, SkillSpec>,
    jitter: JitterModel,
    seed: u64,
    script: Option<&PauseScript>,
) -> Result<ExecTrace> {
    let nr = tpg.n_robots();
    let pauses: Vec<Pause> = script.map(|s| s.pauses.clone()).unwrap_or_default();
    if let Some(p) = pauses.iter().find(|p| p.robot >= nr) {
        return Err(Error::UnknownRobot(p.robot));
    }
    if !tpg.is_acyclic() {
        return Err(Error::Internal("cannot execute a cyclic graph".into()));
    }
    let paused: Vec<Vec<(f64, f64)>> = (0..nr).map(|r| intervals(&pauses, r)).collect();
    let work = draw_durations(tpg, skills, jitter, seed);

    // Scheduler state: unfinished type-2 sources per node, and out-edges.
    let mut blockers: Vec<Vec<usize>> = tpg.chains.iter().map(|c| vec![0; c.len()]).collect();
    let mut out: HashMap<NodeRef, Vec<NodeRef>> = HashMap::new();
    for e in &tpg.edges {
        blockers[e.to.robot][e.to.index] += 1;
        out.entry(e.from).or_default().push(e.to);
    }
    // Next node each robot's queue will receive, and the queue contents.
    let mut next_enqueue = vec![0usize; nr];
    let mut queue: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); nr];
    let mut busy = vec![false; nr];
    let mut free_at = vec![0.0f64; nr];
    let mut events = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut finished = 0usize;
    let total = tpg.n_nodes();
    let mut last_finish = vec![0.0f64; nr];

    // Hands every newly enabled node to its robot, in chain order.
    let dispatch = |r: usize,
                    now: f64,
                    next_enqueue: &mut Vec<usize>,
                    queue: &mut Vec<std::collections::VecDeque<usize>>,
                    blockers: &Vec<Vec<usize>>,
                    events: &mut Vec<ExecEvent>| {
        while next_enqueue[r] < tpg.chains[r].len() && blockers[r][next_enqueue[r]] == 0 {
            let node = next_enqueue[r];
            queue[r].push_back(node);
            events.push(ExecEvent { time: now, robot: r, node, phase: Phase::Enqueued });
            next_enqueue[r] += 1;
        }
    };
    let start_next = |r: usize,
                      now: f64,
                      queue: &mut Vec<std::collections::VecDeque<usize>>,
                      busy: &mut Vec<bool>,
                      free_at: &[f64],
                      heap: &mut BinaryHeap<Pending>,
                      events: &mut Vec<ExecEvent>| {
        if busy[r] {
            return;
        }
        if let Some(node) = queue[r].pop_front() {
            let start = resume_at(&paused[r], now.max(free_at[r]));
            let w = work[r][node];
            let end = if w > 0.0 { finish_after(&paused[r], start, w) } else { start };
            events.push(ExecEvent { time: start, robot: r, node, phase: Phase::Started });
            heap.push(Pending { time: end, robot: r, node });
            busy[r] = true;
        }
    };

    for r in 0..nr {
        dispatch(r, 0.0, &mut next_enqueue, &mut queue, &blockers, &mut events);
        start_next(r, 0.0, &mut queue, &mut busy, &free_at, &mut heap, &mut events);
    }
    while let Some(Pending { time, robot, node }) = heap.pop() {
        events.push(ExecEvent { time, robot, node, phase: Phase::Finished });
        finished += 1;
        busy[robot] = false;
        free_at[robot] = time;
        last_finish[robot] = time;
        // Report to the scheduler, which may release nodes on other robots.
        let mut touched = vec![robot];
        if let Some(targets) = out.get(&NodeRef { robot, index: node }) {
            for t in targets {
                blockers[t.robot][t.index] -= 1;
                touched.push(t.robot);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for &r in &touched {
            dispatch(r, time, &mut next_enqueue, &mut queue, &blockers, &mut events);
        }
        for &r in &touched {
            start_next(r, time, &mut queue, &mut busy, &free_at, &mut heap, &mut events);
        }
    }
    if finished != total {
        return Err(Error::Internal(format!("deadlock: {finished} of {total} nodes finished")));
    }
    // Stable, so simultaneous events keep their causal order.
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let makespan = last_finish.iter().copied().fold(0.0, f64::max);
    let wait_time = (0..nr)
        .filter(|&r| !tpg.chains[r].is_empty())
        .map(|r| (last_finish[r] - work[r].iter().sum::<f64>()).max(0.0))
        .sum();
    let mut pauses = pauses;
    pauses.sort_by(|a, b| a.robot.cmp(&b.robot).then(a.at.total_cmp(&b.at)));
    Ok(ExecTrace { events, pauses, makespan, wait_time, verdict: None })
}

/// Where a robot is during one node's execution.
struct Span {
    node: usize,
    start: f64,
    end: f64,
}

fn pose_at(tpg: &Tpg, robot: usize, span: &Span, t: f64, paused: &[(f64, f64)]) -> Configuration {
    let chain = &tpg.chains[robot];
    let n = &chain[span.node];
    let total = active_between(paused, span.start, span.end);
    let f = if total > 0.0 { (active_between(paused, span.start, t) / total).clamp(0.0, 1.0) } else { 1.0 };
    match n.kind {
        NodeKind::Pose => match span.node.checked_sub(1) {
            Some(p) => chain[p].q.lerp(&n.q, f),
            None => n.q.clone(),
        },
        NodeKind::Skill(_) => {
            let refs = &n.reference;
            if refs.len() < 2 {
                return n.q.clone();
            }
            let x = f * (refs.len() - 1) as f64;
            let i = (x.floor() as usize).min(refs.len() - 2);
            refs[i].lerp(&refs[i + 1], x - i as f64)
        }
    }
}

/// Replays the trace as continuous motion, sampling global time every
/// `sample_dt`, and checks every robot pair and the static scene for contact.
pub fn verify_trace(world: &WorldState, tpg: &Tpg, trace: &ExecTrace, sample_dt: f64) -> SafetyVerdict {
    let nr = tpg.n_robots();
    let contact = WorldState { margin: 0.0, ..world.clone() };
    let paused: Vec<Vec<(f64, f64)>> = (0..nr).map(|r| intervals(&trace.pauses, r)).collect();
    let mut spans: Vec<Vec<Span>> = tpg.chains.iter().map(|c| Vec::with_capacity(c.len())).collect();
    let mut starts: HashMap<(usize, usize), f64> = HashMap::new();
    for e in &trace.events {
        match e.phase {
            Phase::Started => {
                starts.insert((e.robot, e.node), e.time);
            }
            Phase::Finished => {
                let start = starts.get(&(e.robot, e.node)).copied().unwrap_or(e.time);
                spans[e.robot].push(Span { node: e.node, start, end: e.time });
            }
            Phase::Enqueued => {}
        }
    }
    for s in &mut spans {
        s.sort_by(|a, b| a.node.cmp(&b.node));
    }
    let step = sample_dt.max(1e-6);
    let count = (trace.makespan / step).ceil() as usize + 1;
    let mut cursor = vec![0usize; nr];
    for k in 0..count {
        let t = (k as f64 * step).min(trace.makespan);
        let mut placed: Vec<Option<(usize, RobotGeometry)>> = Vec::with_capacity(nr);
        for r in 0..nr {
            let sp = &spans[r];
            while cursor[r] + 1 < sp.len() && sp[cursor[r]].end < t {
                cursor[r] += 1;
            }
            let Some(span) = sp.get(cursor[r]) else {
                placed.push(None);
                continue;
            };
            let (node, q) = if t < span.start {
                // Holding the previous node, or not yet at the first one.
                match span.node.checked_sub(1) {
                    Some(p) => (p, tpg.chains[r][p].q.clone()),
                    None => (0, tpg.chains[r][0].poses()[0].clone()),
                }
            } else if t >= span.end {
                (span.node, tpg.chains[r][span.node].q.clone())
            } else {
                (span.node, pose_at(tpg, r, span, t, &paused[r]))
            };
            let attach = tpg.chains[r][node].attach;
            placed.push(Some((node, contact.geometry(&Placement::new(r, q, attach)))));
        }
        for a in 0..nr {
            let Some((na, ga)) = &placed[a] else { continue };
            if contact.hits_static(ga) {
                let v = Violation { time: t, a: NodeRef { robot: a, index: *na }, b: None };
                return SafetyVerdict { safe: false, samples: k + 1, first_violation: Some(v) };
            }
            for b in a + 1..nr {
                let Some((nb, gb)) = &placed[b] else { continue };
                if contact.pair_collides(ga, gb) {
                    let v = Violation {
                        time: t,
                        a: NodeRef { robot: a, index: *na },
                        b: Some(NodeRef { robot: b, index: *nb }),
                    };
                    return SafetyVerdict { safe: false, samples: k + 1, first_violation: Some(v) };
                }
            }
        }
    }
    SafetyVerdict { safe: true, samples: count, first_violation: None }
}

/// Whether `order` lists every node once, each robot's nodes in chain
/// order, and every edge source before its target.
pub fn is_linear_extension(tpg: &Tpg, order: &[NodeRef]) -> bool {
    let mut pos: HashMap<NodeRef, usize> = HashMap::new();
    for (i, &n) in order.iter().enumerate() {
        if n.robot >= tpg.n_robots() || n.index >= tpg.chains[n.robot].len() || pos.insert(n, i).is_some() {
            return false;
        }
    }
    if pos.len() != tpg.n_nodes() {
        return false;
    }
    let chained = tpg.chains.iter().enumerate().all(|(r, c)| {
        (1..c.len()).all(|i| pos[&NodeRef { robot: r, index: i - 1 }] < pos[&NodeRef { robot: r, index: i }])
    });
    chained && tpg.edges.iter().all(|e| pos[&e.from] < pos[&e.to])
}

/// Every start order the graph allows, or `None` when there are more than `limit`.
pub fn linear_extensions(tpg: &Tpg, limit: usize) -> Option<Vec<Vec<NodeRef>>> {
    let nr = tpg.n_robots();
    let mut indeg: HashMap<NodeRef, usize> = HashMap::new();
    let mut out: HashMap<NodeRef, Vec<NodeRef>> = HashMap::new();
    for e in &tpg.edges {
        *indeg.entry(e.to).or_default() += 1;
        out.entry(e.from).or_default().push(e.to);
    }
    fn walk(
        tpg: &Tpg,
        next: &mut Vec<usize>,
        indeg: &mut HashMap<NodeRef, usize>,
        out: &HashMap<NodeRef, Vec<NodeRef>>,
        prefix: &mut Vec<NodeRef>,
        found: &mut Vec<Vec<NodeRef>>,
        limit: usize,
    ) -> bool {
        if prefix.len() == tpg.n_nodes() {
            found.push(prefix.clone());
            return found.len() <= limit;
        }
        for r in 0..next.len() {
            let n = NodeRef { robot: r, index: next[r] };
            if next[r] >= tpg.chains[r].len() || indeg.get(&n).copied().unwrap_or(0) > 0 {
                continue;
            }
            next[r] += 1;
            prefix.push(n);
            for t in out.get(&n).into_iter().flatten() {
                *indeg.get_mut(t).unwrap() -= 1;
            }
            let ok = walk(tpg, next, indeg, out, prefix, found, limit);
            for t in out.get(&n).into_iter().flatten() {
                *indeg.get_mut(t).unwrap() += 1;
            }
            prefix.pop();
            next[r] -= 1;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut found = Vec::new();
    let mut next = vec![0; nr];
    let ok = walk(tpg, &mut next, &mut indeg, &out, &mut Vec::new(), &mut found, limit);
    ok.then_some(found)
}

/// Replays a start order with every node left in progress until something
/// needs it finished, which maximizes overlap for that order. A robot in
/// progress on node `v` occupies the end pose of `v - 1` and the poses of
/// `v`; one that is done with `v` occupies its end pose. Returns the first
/// pair of robots found in contact, each named by its current node.
pub fn verify_extension(world: &WorldState, tpg: &Tpg, order: &[NodeRef]) -> Option<(NodeRef, NodeRef)> {
    let nr = tpg.n_robots();
    let held = |r: usize, i: usize| {
        let n = &tpg.chains[r][i];
        vec![world.geometry(&Placement::new(r, n.q.clone(), n.attach))]
    };
    let moving = |r: usize, i: usize| {
        let n = &tpg.chains[r][i];
        let mut g: Vec<RobotGeometry> =
            n.poses().iter().map(|q| world.geometry(&Placement::new(r, q.clone(), n.attach))).collect();
        if i > 0 {
            g.extend(held(r, i - 1));
        }
        g
    };
    let mut sources: HashMap<NodeRef, Vec<NodeRef>> = HashMap::new();
    for e in &tpg.edges {
        sources.entry(e.to).or_default().push(e.from);
    }
    // Current node per robot and whether it is still in progress.
    let mut current: Vec<Option<(usize, bool)>> = vec![None; nr];
    let mut occupied: Vec<Vec<RobotGeometry>> = (0..nr)
        .map(|r| match tpg.chains[r].first() {
            Some(n) => vec![world.geometry(&Placement::new(r, n.poses()[0].clone(), n.attach))],
            None => Vec::new(),
        })
        .collect();
    for &v in order {
        for u in sources.get(&v).into_iter().flatten() {
            if current[u.robot] == Some((u.index, true)) {
                current[u.robot] = Some((u.index, false));
                occupied[u.robot] = held(u.robot, u.index);
            }
        }
        current[v.robot] = Some((v.index, true));
        occupied[v.robot] = moving(v.robot, v.index);
        for r in (0..nr).filter(|&r| r != v.robot) {
            if nodes_collide(world, &occupied[v.robot], &occupied[r]) {
                let other = NodeRef { robot: r, index: current[r].map_or(0, |c| c.0) };
                return Some((v, other));
            }
        }
    }
    None
}

impl ExecTrace {
    /// `time, robot, node, phase` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,robot,node,phase\n");
        for e in &self.events {
            let _ = writeln!(out, "{:.9},{},{},{}", e.time, e.robot, e.node, e.phase.as_str());
        }
        out
    }

    /// `key=value` lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "makespan={:.9}", self.makespan);
        let _ = writeln!(out, "wait_time={:.9}", self.wait_time);
        let _ = writeln!(out, "events={}", self.events.len());
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "safe={}", v.safe);
            let _ = writeln!(out, "violations={}", usize::from(!v.safe));
            if let Some(x) = &v.first_violation {
                let other = x.b.map_or("static".to_string(), |b| format!("{}:{}", b.robot, b.index));
                let _ = writeln!(out, "first_violation={:.9},{}:{},{}", x.time, x.a.robot, x.a.index, other);
            }
        }
        out
    }

    /// Order in which nodes started.
    pub fn start_order(&self) -> Vec<NodeRef> {
        self.events
            .iter()
            .filter(|e| e.phase == Phase::Started)
            .map(|e| NodeRef { robot: e.robot, index: e.node })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{DurationJitter, ReferenceGenerator};
    use crate::tpg::tests::dummy_chains;
    use crate::tpg::{Edge, EdgeKind};

    fn skills() -> BTreeMap<SkillName, SkillSpec> {
        let spec = SkillSpec {
            name: SkillName::Pick,
            nominal_duration: 1.0,
            duration_jitter: DurationJitter { min: 0.8, median: 1.23, max: 3.0 },
            reference_path_generator: ReferenceGenerator::SingleStepGoalReach,
            twist: 0.0,
        };
        BTreeMap::from([(SkillName::Pick, spec)])
    }

    #[test]
    fn single_robot_sums_drawn_durations() {
        let mut chains = dummy_chains(&[4]);
        chains[0][2].kind = NodeKind::Skill(SkillName::Pick);
        let tpg = Tpg { chains, edges: vec![], v_max: vec![1.0] };
        let trace = simulate(&tpg, &skills(), JitterModel::skills(), 7, None).unwrap();
        let drawn = draw_durations(&tpg, &skills(), JitterModel::skills(), 7);
        let total: f64 = drawn[0].iter().sum();
        assert!((trace.makespan - total).abs() < 1e-12);
        assert_ne!(drawn[0][2], 1.0);
        assert_eq!(trace.wait_time, 0.0);
    }

    #[test]
    fn zero_jitter_matches_rollout() {
        let edges = vec![Edge {
            from: NodeRef { robot: 0, index: 2 },
            to: NodeRef { robot: 1, index: 1 },
            kind: EdgeKind::MotionDependency,
        }];
        let tpg = Tpg { chains: dummy_chains(&[3, 3]), edges, v_max: vec![1.0, 1.0] };
        let trace = simulate(&tpg, &skills(), JitterModel::none(), 0, None).unwrap();
        let roll = tpg.rollout().unwrap();
        assert_eq!(trace.makespan, roll.makespan);
        assert_eq!(trace.wait_time, roll.wait_time);
        assert_eq!(trace.events.len(), 18);
    }

    #[test]
    fn pause_freezes_motion() {
        let tpg = Tpg { chains: dummy_chains(&[3]), edges: vec![], v_max: vec![1.0] };
        let script = PauseScript { pauses: vec![Pause { robot: 0, at: 0.5, duration: 2.0 }] };
        let trace = simulate(&tpg, &skills(), JitterModel::none(), 0, Some(&script)).unwrap();
        assert!((trace.makespan - 5.0).abs() < 1e-12);
        assert!((trace.wait_time - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pause_on_unknown_robot_is_rejected() {
        let tpg = Tpg { chains: dummy_chains(&[2]), edges: vec![], v_max: vec![1.0] };
        let script = PauseScript { pauses: vec![Pause { robot: 3, at: 0.0, duration: 1.0 }] };
        let err = simulate(&tpg, &skills(), JitterModel::none(), 0, Some(&script)).unwrap_err();
        assert!(matches!(err, Error::UnknownRobot(3)));
    }

    #[test]
    fn pause_arithmetic() {
        let iv = intervals(&[Pause { robot: 0, at: 1.0, duration: 1.0 }, Pause { robot: 0, at: 1.5, duration: 1.0 }], 0);
        assert_eq!(iv, vec![(1.0, 2.5)]);
        assert_eq!(finish_after(&iv, 0.0, 2.0), 3.5);
        assert_eq!(resume_at(&iv, 2.0), 2.5);
        assert_eq!(active_between(&iv, 0.0, 3.5), 2.0);
    }
}
