//! Temporal plan graph: per-robot chains of pose and skill nodes plus
//! cross-robot precedence edges.
//!
//! An edge `u → v` means the robot owning `v` may not start moving into `v`
//! (or start the skill `v`) before the robot owning `u` has reached `u`
//! (or finished the skill `u`). Edges are derived from the task graph and from
//! every pair of nodes that would collide if occupied at the same time.

mod shortcut;

pub use shortcut::{shortcut_tpg, ShortcutOptions, ShortcutStats};

use crate::error::{Error, Result};
use crate::motion::{SequentialPlan, TaskMotion};
use crate::scenario::SkillName;
use crate::taskplan::TaskPlan;
use crate::world::{Attached, Configuration, Placement, RobotGeometry, WorldState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Pose,
    Skill(SkillName),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpgNode {
    pub task: Option<usize>,
    pub kind: NodeKind,
    /// The pose reached; for skill nodes the last reference pose.
    pub q: Configuration,
    /// Skill reference path; empty for pose nodes.
    pub reference: Vec<Configuration>,
    /// Nominal time to traverse into (pose) or execute (skill) the node.
    pub duration: f64,
    /// Time the node was reached (or the skill started) in the source plan.
    pub timestamp: f64,
    pub attach: Option<Attached>,
}

impl TpgNode {
    /// Every pose the robot occupies at this node.
    pub fn poses(&self) -> &[Configuration] {
        match self.kind {
            NodeKind::Pose => std::slice::from_ref(&self.q),
            NodeKind::Skill(_) => &self.reference,
        }
    }

    pub fn is_skill(&self) -> bool {
        matches!(self.kind, NodeKind::Skill(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub robot: usize,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    TaskDependency,
    MotionDependency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeRef,
    pub to: NodeRef,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tpg {
    /// One type-1 chain per robot.
    pub chains: Vec<Vec<TpgNode>>,
    /// Type-2 edges, sorted.
    pub edges: Vec<Edge>,
    pub v_max: Vec<f64>,
}

/// Node timings from a rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    /// Per robot, per node: `(start, finish)`.
    pub times: Vec<Vec<(f64, f64)>>,
    pub makespan: f64,
    pub wait_time: f64,
}

/// Reachability summary: `clock[v][r]` is the highest index of robot `r`'s
/// chain that reaches `v` (or `-1`).
#[derive(Clone, Debug)]
pub struct Clocks {
    pub offsets: Vec<usize>,
    pub clock: Vec<Vec<i64>>,
}

impl Clocks {
    pub fn reaches(&self, a: NodeRef, b: NodeRef) -> bool {
        self.clock[self.offsets[b.robot] + b.index][a.robot] >= a.index as i64
    }
}

impl Tpg {
    pub fn n_robots(&self) -> usize {
        self.chains.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn node(&self, r: NodeRef) -> &TpgNode {
        &self.chains[r.robot][r.index]
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.chains.len());
        let mut acc = 0;
        for c in &self.chains {
            off.push(acc);
            acc += c.len();
        }
        off
    }

    fn in_edges(&self) -> Vec<Vec<NodeRef>> {
        let off = self.offsets();
        let mut inc = vec![Vec::new(); self.n_nodes()];
        for e in &self.edges {
            inc[off[e.to.robot] + e.to.index].push(e.from);
        }
        inc
    }

    fn out_edges(&self) -> Vec<Vec<NodeRef>> {
        let off = self.offsets();
        let mut out = vec![Vec::new(); self.n_nodes()];
        for e in &self.edges {
            out[off[e.from.robot] + e.from.index].push(e.to);
        }
        out
    }

    /// Topological order over all nodes or an internal error on a cycle.
    pub fn topological_order(&self) -> Result<Vec<NodeRef>> {
        let off = self.offsets();
        let n = self.n_nodes();
        let out = self.out_edges();
        let mut indeg = vec![0usize; n];
        for (r, c) in self.chains.iter().enumerate() {
            for i in 1..c.len() {
                indeg[off[r] + i] += 1;
            }
        }
        for e in &self.edges {
            indeg[off[e.to.robot] + e.to.index] += 1;
        }
        let mut stack: Vec<NodeRef> = (0..self.n_robots())
            .rev()
            .filter(|&r| !self.chains[r].is_empty() && indeg[off[r]] == 0)
            .map(|r| NodeRef { robot: r, index: 0 })
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = stack.pop() {
            order.push(v);
            let mut next: Vec<NodeRef> = out[off[v.robot] + v.index].clone();
            if v.index + 1 < self.chains[v.robot].len() {
                next.push(NodeRef { robot: v.robot, index: v.index + 1 });
            }
            for w in next {
                let g = off[w.robot] + w.index;
                indeg[g] -= 1;
                if indeg[g] == 0 {
                    stack.push(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Internal("temporal plan graph has a cycle".into()));
        }
        Ok(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Backward vector clocks over the whole graph.
    pub fn clocks(&self) -> Result<Clocks> {
        let off = self.offsets();
        let order = self.topological_order()?;
        let inc = self.in_edges();
        let nr = self.n_robots();
        let mut clock = vec![vec![-1i64; nr]; self.n_nodes()];
        for v in order {
            let g = off[v.robot] + v.index;
            let mut c = if v.index > 0 { clock[g - 1].clone() } else { vec![-1; nr] };
            for u in &inc[g] {
                let cu = &clock[off[u.robot] + u.index];
                for r in 0..nr {
                    c[r] = c[r].max(cu[r]);
                }
            }
            c[v.robot] = v.index as i64;
            clock[g] = c;
        }
        Ok(Clocks { offsets: off, clock })
    }

    /// Forward clocks: `f[v][r]` is the lowest index of robot `r` reachable
    /// from `v`, or the chain length when none is.
    pub fn forward_clocks(&self) -> Result<Vec<Vec<usize>>> {
        let off = self.offsets();
        let order = self.topological_order()?;
        let out = self.out_edges();
        let nr = self.n_robots();
        let lens: Vec<usize> = self.chains.iter().map(Vec::len).collect();
        let mut f = vec![lens.clone(); self.n_nodes()];
        for v in order.into_iter().rev() {
            let g = off[v.robot] + v.index;
            let mut c = if v.index + 1 < lens[v.robot] { f[g + 1].clone() } else { lens.clone() };
            for w in &out[g] {
                let cw = &f[off[w.robot] + w.index];
                for r in 0..nr {
                    c[r] = c[r].min(cw[r]);
                }
            }
            c[v.robot] = v.index;
            f[g] = c;
        }
        Ok(f)
    }

    /// Drops every type-2 edge implied by another path; type-1 edges stay.
    pub fn transitive_reduce(&mut self) -> Result<()> {
        self.edges.sort();
        self.edges.dedup_by(|a, b| a.from == b.from && a.to == b.to);
        let clocks = self.clocks()?;
        let inc = self.in_edges();
        let off = clocks.offsets.clone();
        let keep: Vec<bool> = self
            .edges
            .iter()
            .map(|e| {
                let g = off[e.to.robot] + e.to.index;
                let chain_pred = (e.to.index > 0).then(|| NodeRef { robot: e.to.robot, index: e.to.index - 1 });
                let others = inc[g].iter().copied().filter(|w| *w != e.from).chain(chain_pred);
                !others.into_iter().any(|w| w == e.from || clocks.reaches(e.from, w))
            })
            .collect();
        let mut k = keep.into_iter();
        self.edges.retain(|_| k.next().unwrap());
        Ok(())
    }

    /// Earliest start and finish of every node under nominal durations.
    pub fn rollout(&self) -> Result<Rollout> {
        let off = self.offsets();
        let order = self.topological_order()?;
        let inc = self.in_edges();
        let mut finish = vec![0.0f64; self.n_nodes()];
        let mut times: Vec<Vec<(f64, f64)>> = self.chains.iter().map(|c| vec![(0.0, 0.0); c.len()]).collect();
        for v in order {
            let g = off[v.robot] + v.index;
            let mut start = if v.index > 0 { finish[g - 1] } else { 0.0 };
            for u in &inc[g] {
                start = start.max(finish[off[u.robot] + u.index]);
            }
            let f = start + self.node(v).duration;
            finish[g] = f;
            times[v.robot][v.index] = (start, f);
        }
        let mut makespan = 0.0f64;
        let mut wait = 0.0;
        for (r, c) in self.chains.iter().enumerate() {
            if let Some(&(_, last)) = times[r].last() {
                makespan = makespan.max(last);
                let own: f64 = c.iter().map(|n| n.duration).sum();
                wait += (last - own).max(0.0);
            }
        }
        Ok(Rollout { times, makespan, wait_time: wait })
    }

    /// Geometry of every pose held at each node.
    pub fn geometries(&self, world: &WorldState) -> Vec<Vec<Vec<RobotGeometry>>> {
        self.chains
            .iter()
            .enumerate()
            .map(|(r, c)| {
                c.par_iter()
                    .map(|n| {
                        n.poses()
                            .iter()
                            .map(|q| world.geometry(&Placement::new(r, q.clone(), n.attach)))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Exhaustive delay-robustness check: every colliding pair of nodes on
    /// different robots must be separated, i.e. one robot must have moved on
    /// before the other can enter. Returns the offending pairs.
    pub fn audit(&self, world: &WorldState) -> Result<Vec<(NodeRef, NodeRef)>> {
        let clocks = self.clocks()?;
        let geoms = self.geometries(world);
        let mut bad = Vec::new();
        for a_r in 0..self.n_robots() {
            for b_r in a_r + 1..self.n_robots() {
                let found: Vec<(NodeRef, NodeRef)> = (0..self.chains[a_r].len())
                    .into_par_iter()
                    .flat_map_iter(|ai| {
                        let a = NodeRef { robot: a_r, index: ai };
                        let clocks = &clocks;
                        let geoms = &geoms;
                        (0..self.chains[b_r].len()).filter_map(move |bi| {
                            let b = NodeRef { robot: b_r, index: bi };
                            let separated = |x: NodeRef, y: NodeRef| {
                                x.index + 1 < self.chains[x.robot].len()
                                    && clocks.reaches(NodeRef { robot: x.robot, index: x.index + 1 }, y)
                            };
                            if separated(a, b) || separated(b, a) {
                                return None;
                            }
                            nodes_collide(world, &geoms[a_r][ai], &geoms[b_r][bi]).then_some((a, b))
                        })
                    })
                    .collect();
                bad.extend(found);
            }
        }
        Ok(bad)
    }

    /// Graphviz rendering; type-2 edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tpg {\n  rankdir=LR;\n");
        let name = |r: usize, i: usize| format!("\"{}:{}:{}\"", r, self.chains[r][i].task.map_or(-1, |t| t as i64), i);
        for (r, c) in self.chains.iter().enumerate() {
            let _ = writeln!(s, "  subgraph cluster_{r} {{ label=\"robot {r}\";");
            for (i, n) in c.iter().enumerate() {
                let shape = if n.is_skill() { "box" } else { "ellipse" };
                let _ = writeln!(s, "    {} [shape={shape}];", name(r, i));
            }
            for i in 1..c.len() {
                let _ = writeln!(s, "    {} -> {};", name(r, i - 1), name(r, i));
            }
            let _ = writeln!(s, "  }}");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  {} -> {} [style=dashed];",
                name(e.from.robot, e.from.index),
                name(e.to.robot, e.to.index)
            );
        }
        s.push_str("}\n");
        s
    }

    /// Plain edge list: `type from_robot from_index to_robot to_index`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (r, c) in self.chains.iter().enumerate() {
            for i in 1..c.len() {
                let _ = writeln!(s, "type1 {r} {} {r} {i}", i - 1);
            }
        }
        for e in &self.edges {
            let tag = match e.kind {
                EdgeKind::TaskDependency => "task",
                EdgeKind::MotionDependency => "motion",
            };
            let _ = writeln!(s, "type2-{tag} {} {} {} {}", e.from.robot, e.from.index, e.to.robot, e.to.index);
        }
        s
    }
}

pub fn nodes_collide(world: &WorldState, a: &[RobotGeometry], b: &[RobotGeometry]) -> bool {
    a.iter().any(|x| b.iter().any(|y| world.pair_collides(x, y)))
}

/// Per-task anchors into the chains.
struct TaskAnchors {
    /// First surviving node at or after the task's start.
    first: Vec<usize>,
    /// Last surviving node at or before the task's end.
    last: Vec<Option<usize>>,
}

fn build_chains(world: &WorldState, plan: &TaskPlan, seq: &SequentialPlan) -> (Vec<Vec<TpgNode>>, TaskAnchors) {
    let n_tasks = plan.tasks.len();
    let mut anchors = TaskAnchors { first: vec![0; n_tasks], last: vec![None; n_tasks] };
    let carrying = crate::motion::attachments_during(plan);
    let mut chains = Vec::with_capacity(plan.n_robots());
    for r in 0..plan.n_robots() {
        let v_max = world.robots[r].v_max;
        let mut chain: Vec<TpgNode> = Vec::new();
        let home = world.robots[r].home.clone();
        if plan.robot_tasks(r).is_empty() {
            chain.push(TpgNode {
                task: None,
                kind: NodeKind::Pose,
                q: home.clone(),
                reference: Vec::new(),
                duration: 0.0,
                timestamp: 0.0,
                attach: None,
            });
        }
        for &id in plan.robot_tasks(r) {
            anchors.first[id] = chain.len();
            match &seq.motions[id] {
                TaskMotion::Transit(p) => {
                    for (q, &t) in p.poses.iter().zip(&p.times) {
                        let prev = chain.last().map(|n| &n.q);
                        if prev == Some(q) {
                            continue;
                        }
                        let duration = prev.map_or(0.0, |pq| pq.distance(q) / v_max);
                        chain.push(TpgNode {
                            task: Some(id),
                            kind: NodeKind::Pose,
                            q: q.clone(),
                            reference: Vec::new(),
                            duration,
                            timestamp: t,
                            attach: carrying[id],
                        });
                    }
                }
                TaskMotion::Skill(s) => chain.push(TpgNode {
                    task: Some(id),
                    kind: NodeKind::Skill(s.skill),
                    q: s.reference.last().cloned().unwrap_or_else(|| home.clone()),
                    reference: s.reference.clone(),
                    duration: s.end_time - s.start_time,
                    timestamp: s.start_time,
                    attach: carrying[id],
                }),
            }
            anchors.last[id] = chain.len().checked_sub(1);
        }
        chains.push(chain);
    }
    (chains, anchors)
}

fn task_edges(plan: &TaskPlan, chains: &[Vec<TpgNode>], anchors: &TaskAnchors) -> Vec<Edge> {
    let mut edges = Vec::new();
    for &(a, b) in &plan.graph.edges {
        let (ra, rb) = (plan.tasks[a].robot, plan.tasks[b].robot);
        let (Some(from), to) = (anchors.last[a], anchors.first[b]) else { continue };
        if ra == rb || to >= chains[rb].len() {
            continue;
        }
        edges.push(Edge {
            from: NodeRef { robot: ra, index: from },
            to: NodeRef { robot: rb, index: to },
            kind: EdgeKind::TaskDependency,
        });
    }
    edges
}

/// Total order used to orient collision edges: plan time, then robot.
fn earlier(a: &TpgNode, ra: usize, b: &TpgNode, rb: usize) -> bool {
    (a.timestamp, ra) < (b.timestamp, rb)
}

fn motion_edge(chains: &[Vec<TpgNode>], earlier_node: NodeRef, later: NodeRef) -> Result<Edge> {
    if earlier_node.index + 1 >= chains[earlier_node.robot].len() {
        return Err(Error::Internal(format!(
            "robot {} node {} collides with robot {} node {} but has no successor",
            earlier_node.robot, earlier_node.index, later.robot, later.index
        )));
    }
    Ok(Edge {
        from: NodeRef { robot: earlier_node.robot, index: earlier_node.index + 1 },
        to: later,
        kind: EdgeKind::MotionDependency,
    })
}

fn assemble(world: &WorldState, chains: Vec<Vec<TpgNode>>, edges: Vec<Edge>) -> Tpg {
    let mut edges = edges;
    edges.sort();
    edges.dedup();
    Tpg { chains, edges, v_max: world.robots.iter().map(|r| r.v_max).collect() }
}

/// Builds and transitively reduces the graph, scanning robot pairs on
/// `threads` workers. The result does not depend on the worker count.
pub fn build_tpg(world: &WorldState, plan: &TaskPlan, seq: &SequentialPlan, threads: usize) -> Result<Tpg> {
    let (chains, anchors) = build_chains(world, plan, seq);
    let deps = task_edges(plan, &chains, &anchors);
    let base = assemble(world, chains, deps);
    let base_clocks = base.clocks()?;
    let geoms = base.geometries(world);
    let nr = base.n_robots();
    let units: Vec<(usize, usize)> = (0..nr).flat_map(|i| (0..nr).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let scan = |&(i, o): &(usize, usize)| -> Result<Vec<Edge>> {
        // Edges into robot `i` from robot `o`.
        let (ci, co) = (&base.chains[i], &base.chains[o]);
        let mut own_max: i64 = -1;
        let mut out = Vec::new();
        for n in 0..ci.len() {
            let later = &ci[n];
            let latest = co.partition_point(|x| earlier(x, o, later, i));
            if latest == 0 {
                continue;
            }
            let g = base_clocks.offsets[i] + n;
            let bound = base_clocks.clock[g][o].max(own_max).max(0) as usize;
            let mut np = latest;
            while np > bound {
                np -= 1;
                if nodes_collide(world, &geoms[o][np], &geoms[i][n]) {
                    let e = motion_edge(&base.chains, NodeRef { robot: o, index: np }, NodeRef { robot: i, index: n })?;
                    own_max = own_max.max(e.from.index as i64);
                    out.push(e);
                    break;
                }
            }
        }
        Ok(out)
    };
    let found: Vec<Result<Vec<Edge>>> = pool.install(|| units.par_iter().map(scan).collect());
    let mut edges = base.edges.clone();
    for f in found {
        edges.extend(f?);
    }
    let mut tpg = assemble(world, base.chains, edges);
    tpg.transitive_reduce()?;
    Ok(tpg)
}

/// Reference constructor: every colliding cross-robot pair gets an edge,
/// no skipping, single thread. Used to cross-check [`build_tpg`].
pub fn build_tpg_reference(world: &WorldState, plan: &TaskPlan, seq: &SequentialPlan) -> Result<Tpg> {
    let (chains, anchors) = build_chains(world, plan, seq);
    let mut edges = task_edges(plan, &chains, &anchors);
    let probe = Tpg { chains, edges: Vec::new(), v_max: Vec::new() };
    let geoms = probe.geometries(world);
    for i in 0..probe.n_robots() {
        for o in 0..probe.n_robots() {
            if i == o {
                continue;
            }
            for (n, later) in probe.chains[i].iter().enumerate() {
                for (np, e) in probe.chains[o].iter().enumerate() {
                    if earlier(e, o, later, i) && nodes_collide(world, &geoms[o][np], &geoms[i][n]) {
                        edges.push(motion_edge(&probe.chains, NodeRef { robot: o, index: np }, NodeRef { robot: i, index: n })?);
                    }
                }
            }
        }
    }
    let mut tpg = assemble(world, probe.chains, edges);
    tpg.transitive_reduce()?;
    Ok(tpg)
}

/// Reachability-based reduction used as an oracle: an edge is dropped when
/// its head is reachable from its tail without it.
pub fn transitive_reduce_reference(tpg: &Tpg) -> Tpg {
    let off = tpg.offsets();
    let n = tpg.n_nodes();
    let mut edges: Vec<Edge> = tpg.edges.clone();
    edges.sort();
    edges.dedup_by(|a, b| a.from == b.from && a.to == b.to);
    let g = |r: NodeRef| off[r.robot] + r.index;
    let adjacency = |skip: Option<usize>| {
        let mut adj = vec![Vec::new(); n];
        for (r, c) in tpg.chains.iter().enumerate() {
            for i in 1..c.len() {
                adj[off[r] + i - 1].push(off[r] + i);
            }
        }
        for (k, e) in edges.iter().enumerate() {
            if Some(k) != skip {
                adj[g(e.from)].push(g(e.to));
            }
        }
        adj
    };
    let reach = |adj: &Vec<Vec<usize>>, s: usize, t: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            if v == t {
                return true;
            }
            for &w in &adj[v] {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
        false
    };
    let keep: BTreeSet<usize> = (0..edges.len())
        .filter(|&k| !reach(&adjacency(Some(k)), g(edges[k].from), g(edges[k].to)))
        .collect();
    let kept = edges.iter().enumerate().filter(|(k, _)| keep.contains(k)).map(|(_, e)| *e).collect();
    Tpg { chains: tpg.chains.clone(), edges: kept, v_max: tpg.v_max.clone() }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn dummy_chains(lens: &[usize]) -> Vec<Vec<TpgNode>> {
        lens.iter()
            .map(|&l| {
                (0..l)
                    .map(|i| TpgNode {
                        task: None,
                        kind: NodeKind::Pose,
                        q: Configuration(vec![i as f64]),
                        reference: Vec::new(),
                        duration: 1.0,
                        timestamp: i as f64,
                        attach: None,
                    })
                    .collect()
            })
            .collect()
    }

    fn e(a: (usize, usize), b: (usize, usize)) -> Edge {
        Edge {
            from: NodeRef { robot: a.0, index: a.1 },
            to: NodeRef { robot: b.0, index: b.1 },
            kind: EdgeKind::MotionDependency,
        }
    }

    #[test]
    fn redundant_edge_removed() {
        // a=(0,0) -> b=(1,0) -> c=(2,0) and a -> c
        let mut t = Tpg { chains: dummy_chains(&[1, 1, 1]), edges: vec![e((0, 0), (1, 0)), e((1, 0), (2, 0)), e((0, 0), (2, 0))], v_max: vec![] };
        t.transitive_reduce().unwrap();
        assert_eq!(t.edges, vec![e((0, 0), (1, 0)), e((1, 0), (2, 0))]);
        let again = {
            let mut u = t.clone();
            u.transitive_reduce().unwrap();
            u
        };
        assert_eq!(again, t);
    }

    #[test]
    fn edge_implied_by_chain_removed() {
        let mut t = Tpg { chains: dummy_chains(&[3, 3]), edges: vec![e((0, 1), (1, 1)), e((0, 0), (1, 2))], v_max: vec![] };
        t.transitive_reduce().unwrap();
        assert_eq!(t.edges, vec![e((0, 1), (1, 1))]);
    }

    #[test]
    fn cycle_is_internal_error() {
        let t = Tpg { chains: dummy_chains(&[2, 2]), edges: vec![e((0, 1), (1, 0)), e((1, 1), (0, 0))], v_max: vec![] };
        assert!(matches!(t.rollout(), Err(Error::Internal(_))));
    }

    #[test]
    fn rollout_single_and_independent() {
        let t = Tpg { chains: dummy_chains(&[3]), edges: vec![], v_max: vec![] };
        let r = t.rollout().unwrap();
        assert_eq!((r.makespan, r.wait_time), (3.0, 0.0));
        let t = Tpg { chains: dummy_chains(&[3, 5]), edges: vec![], v_max: vec![] };
        assert_eq!(t.rollout().unwrap().makespan, 5.0);
    }

    #[test]
    fn rollout_counts_waiting() {
        // robot 1 node 0 waits for robot 0 node 2 to finish at t=3
        let t = Tpg { chains: dummy_chains(&[3, 2]), edges: vec![e((0, 2), (1, 0))], v_max: vec![] };
        let r = t.rollout().unwrap();
        assert_eq!(r.times[1][0], (3.0, 4.0));
        assert_eq!(r.makespan, 5.0);
        assert_eq!(r.wait_time, 3.0);
    }
}
