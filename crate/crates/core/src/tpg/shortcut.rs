//! Anytime shortcutting of transit runs inside a temporal plan graph.

use super::{nodes_collide, Edge, EdgeKind, NodeKind, NodeRef, Tpg, TpgNode};
use crate::error::Result;
use crate::motion::discretize_and_timestamp;
use crate::world::{Placement, RobotGeometry, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct ShortcutOptions {
    pub time_budget: Duration,
    /// Stops after this many sampled shortcuts even if time remains.
    pub max_iterations: Option<usize>,
    pub seed: u64,
    pub dt: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShortcutStats {
    pub attempts: usize,
    pub accepted: usize,
    pub makespan_before: f64,
    pub makespan_after: f64,
}

/// Maximal ranges of consecutive pose nodes, as `(first, last)` indices.
fn pose_runs(chain: &[TpgNode]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, n) in chain.iter().enumerate() {
        match (n.kind, start) {
            (NodeKind::Pose, None) => start = Some(i),
            (NodeKind::Skill(_), Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, chain.len() - 1));
    }
    runs.retain(|&(s, e)| e >= s + 2);
    runs
}

/// Replaces transit detours with straight resampled segments while the
/// rollout makespan does not grow. Runs until the time budget or the
/// iteration cap is exhausted, then drops redundant edges.
pub fn shortcut_tpg(tpg: &mut Tpg, world: &WorldState, opts: &ShortcutOptions) -> Result<ShortcutStats> {
    let mut makespan = tpg.rollout()?.makespan;
    let mut stats = ShortcutStats { makespan_before: makespan, makespan_after: makespan, ..Default::default() };
    if opts.time_budget.is_zero() || opts.max_iterations == Some(0) {
        return Ok(stats);
    }
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut geoms = tpg.geometries(world);
    loop {
        if started.elapsed() >= opts.time_budget || opts.max_iterations.is_some_and(|m| stats.attempts >= m) {
            break;
        }
        let candidates: Vec<(usize, (usize, usize))> = (0..tpg.n_robots())
            .flat_map(|r| pose_runs(&tpg.chains[r]).into_iter().map(move |run| (r, run)))
            .collect();
        if candidates.is_empty() {
            break;
        }
        stats.attempts += 1;
        let (i, (s, e)) = candidates[rng.gen_range(0..candidates.len())];
        let a = rng.gen_range(s..=e - 2);
        let b = rng.gen_range(a + 2..=e);
        let chain = &tpg.chains[i];
        let attach = chain[a + 1].attach;
        if chain[a..=b].iter().any(|n| n.attach != attach) {
            continue;
        }
        let (qa, qb) = (&chain[a].q, &chain[b].q);
        let old_len: f64 = (a + 1..=b).map(|k| chain[k - 1].q.distance(&chain[k].q)).sum();
        if qa.distance(qb) >= old_len - 1e-9 {
            continue;
        }
        let v_max = tpg.v_max[i];
        let timed = discretize_and_timestamp(&[qa.clone(), qb.clone()], opts.dt, v_max, 0.0);
        let inner: Vec<_> = timed[1..timed.len() - 1].iter().map(|(q, _)| q.clone()).collect();

        let clocks = tpg.clocks()?;
        let fwd = tpg.forward_clocks()?;
        let ga = clocks.offsets[i] + a;
        let gb = clocks.offsets[i] + b;
        let new_geoms: Vec<RobotGeometry> =
            inner.iter().map(|q| world.geometry(&Placement::new(i, q.clone(), attach))).collect();
        let clear = new_geoms.iter().all(|g| {
            !world.hits_static(g)
                && (0..tpg.n_robots()).filter(|&r| r != i).all(|r| {
                    let lo = clocks.clock[ga][r].max(0) as usize;
                    let hi = fwd[gb][r];
                    (lo..hi).all(|y| !nodes_collide(world, std::slice::from_ref(g), &geoms[r][y]))
                })
        });
        if !clear {
            continue;
        }

        let (t0, t1) = (chain[a].timestamp, chain[b].timestamp);
        let task = chain[a + 1].task;
        let mut new_nodes = Vec::with_capacity(inner.len());
        let mut prev = qa.clone();
        for (k, q) in inner.iter().enumerate() {
            let f = (k + 1) as f64 / (inner.len() + 1) as f64;
            new_nodes.push(TpgNode {
                task,
                kind: NodeKind::Pose,
                q: q.clone(),
                reference: Vec::new(),
                duration: prev.distance(q) / v_max,
                timestamp: t0 + f * (t1 - t0),
                attach,
            });
            prev = q.clone();
        }
        let mut tail = chain[b..].to_vec();
        tail[0].duration = prev.distance(qb) / v_max;
        let mut new_chain = chain[..=a].to_vec();
        let k = new_nodes.len();
        new_chain.extend(new_nodes);
        new_chain.extend(tail);

        let remap = |n: NodeRef, outgoing: bool| -> NodeRef {
            if n.robot != i || n.index <= a {
                return n;
            }
            let index = if n.index >= b {
                n.index - (b - a - 1) + k
            } else if outgoing {
                // Edges leave from the node after the collision, so the
                // first node past `a` stands in for the removed source.
                a + 1
            } else {
                a + k + 1
            };
            NodeRef { robot: i, index }
        };
        let removed = |n: NodeRef| n.robot == i && n.index > a && n.index < b;
        let mut edges: Vec<Edge> = tpg
            .edges
            .iter()
            .map(|e| Edge { from: remap(e.from, true), to: remap(e.to, false), kind: e.kind })
            .collect();
        // Orderings that ran through the removed nodes between two other
        // robots are kept as direct edges.
        for inc in tpg.edges.iter().filter(|e| removed(e.to)) {
            for out in tpg.edges.iter().filter(|e| removed(e.from) && e.from.index >= inc.to.index) {
                if inc.from.robot != out.to.robot {
                    edges.push(Edge { from: inc.from, to: out.to, kind: EdgeKind::MotionDependency });
                }
            }
        }
        edges.sort();
        edges.dedup();
        let mut candidate = Tpg { chains: tpg.chains.clone(), edges, v_max: tpg.v_max.clone() };
        candidate.chains[i] = new_chain;
        let Ok(roll) = candidate.rollout() else { continue };
        if roll.makespan > makespan + 1e-9 {
            continue;
        }
        makespan = roll.makespan;
        let mut g = geoms[i][..=a].to_vec();
        g.extend(new_geoms.into_iter().map(|x| vec![x]));
        g.extend(geoms[i][b..].iter().cloned());
        geoms[i] = g;
        *tpg = candidate;
        stats.accepted += 1;
    }
    tpg.transitive_reduce()?;
    stats.makespan_after = tpg.rollout()?.makespan;
    log::debug!(
        "shortcut: {} of {} accepted, makespan {:.3} -> {:.3}",
        stats.accepted,
        stats.attempts,
        stats.makespan_before,
        stats.makespan_after
    );
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_split_at_skills() {
        let mut c = super::super::tests::dummy_chains(&[8]).remove(0);
        c[3].kind = NodeKind::Skill(crate::scenario::SkillName::Pick);
        assert_eq!(pose_runs(&c), vec![(0, 2), (4, 7)]);
    }
}
