//! The robot/object/grasp assignment program and its exact solver.
//!
//! Variables are grouped per assembly step: each step picks one primary
//! `(robot, object, grasp)` and, when it needs support, one `(robot, pose)`.
//! The objective adds a load-balance penalty over sliding windows of `N`
//! consecutive steps (`N` = number of robots): `λ · Σ_w (max_i z_iw − min_i z_iw)`
//! where `z_iw` counts the primary and support roles of robot `i` in window `w`.
//!
//! The solver is a depth-first branch-and-bound. Its bound is an exact dynamic
//! program over the window history that relaxes only the object-exclusivity
//! constraint, so it is tight on most instances.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Cost tensors; `None` marks an infeasible combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    pub n_robots: usize,
    pub n_objects: usize,
    pub p: usize,
    /// `x_cost[j][i][k][g]`
    pub x_cost: Vec<Vec<Vec<Vec<Option<f64>>>>>,
    /// `y_cost[j][i][g]`
    pub y_cost: Vec<Vec<Vec<Option<f64>>>>,
    pub needs_support: Vec<bool>,
    /// `type_match[j][k]`: object `k` has the type step `j` requires.
    pub type_match: Vec<Vec<bool>>,
    /// Steps whose support robot is fixed by the primary: `partner[i]`.
    pub support_partner: Vec<Option<Vec<Option<usize>>>>,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StepChoice {
    pub robot: usize,
    pub object: usize,
    pub grasp: usize,
    /// `(robot, support pose)` when the step is supported.
    pub support: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub steps: Vec<StepChoice>,
    pub objective_value: f64,
    /// Per-window maximum and minimum role counts.
    pub z_max: Vec<f64>,
    pub z_min: Vec<f64>,
}

impl Assignment {
    /// Chosen `(i, j, k, g)` quadruples.
    pub fn x(&self) -> Vec<(usize, usize, usize, usize)> {
        self.steps
            .iter()
            .enumerate()
            .map(|(j, c)| (c.robot, j, c.object, c.grasp))
            .collect()
    }

    /// Chosen `(i, j, g)` support triples.
    pub fn y(&self) -> Vec<(usize, usize, usize)> {
        self.steps
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.support.map(|(s, g)| (s, j, g)))
            .collect()
    }
}

/// Pluggable exact solvers.
pub trait AssignmentSolver {
    fn solve(&self, problem: &AssignmentProblem) -> Result<Assignment>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BranchAndBound;

impl AssignmentSolver for BranchAndBound {
    fn solve(&self, problem: &AssignmentProblem) -> Result<Assignment> {
        solve_assignment(problem)
    }
}

impl AssignmentProblem {
    pub fn n_steps(&self) -> usize {
        self.x_cost.len()
    }

    fn window_count(&self) -> usize {
        let (na, n) = (self.n_steps(), self.n_robots);
        if n == 0 || na < n {
            0
        } else {
            na - n + 1
        }
    }

    fn support_allowed(&self, j: usize, primary: usize, s: usize) -> bool {
        if s == primary {
            return false;
        }
        match &self.support_partner[j] {
            Some(partners) => partners.get(primary).copied().flatten() == Some(s),
            None => true,
        }
    }

    /// Window penalty and role counts for steps `w..w+N`.
    pub fn window_term(&self, roles: &[(usize, Option<usize>)]) -> (f64, f64, f64) {
        let mut z = vec![0usize; self.n_robots];
        for &(p, s) in roles {
            z[p] += 1;
            if let Some(s) = s {
                z[s] += 1;
            }
        }
        let max = *z.iter().max().unwrap_or(&0) as f64;
        let min = *z.iter().min().unwrap_or(&0) as f64;
        (max - min, max, min)
    }

    /// Objective of a complete choice vector, computed directly from the definition.
    pub fn evaluate(&self, steps: &[StepChoice]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let mut total = 0.0;
        for (j, c) in steps.iter().enumerate() {
            total += self.x_cost[j][c.robot][c.object][c.grasp]?;
            if let Some((s, g)) = c.support {
                total += self.y_cost[j][s][g]?;
            }
        }
        let roles: Vec<_> = steps.iter().map(|c| (c.robot, c.support.map(|s| s.0))).collect();
        let (mut zmax, mut zmin) = (Vec::new(), Vec::new());
        let mut penalty = 0.0;
        for w in 0..self.window_count() {
            let (t, mx, mn) = self.window_term(&roles[w..w + self.n_robots]);
            penalty += t;
            zmax.push(mx);
            zmin.push(mn);
        }
        Some((total + self.lambda * penalty, zmax, zmin))
    }

    /// Re-checks every constraint family; returns the first violation.
    pub fn check(&self, a: &Assignment) -> std::result::Result<(), String> {
        if a.steps.len() != self.n_steps() {
            return Err(format!("each step assigned exactly once: {} of {}", a.steps.len(), self.n_steps()));
        }
        let mut used = vec![false; self.n_objects];
        for (j, c) in a.steps.iter().enumerate() {
            if c.robot >= self.n_robots || c.object >= self.n_objects || c.grasp >= self.p {
                return Err(format!("step {j}: index out of range"));
            }
            if self.x_cost[j][c.robot][c.object][c.grasp].is_none() {
                return Err(format!("step {j}: infeasible primary combination"));
            }
            if c.support.is_some() != self.needs_support[j] {
                return Err(format!("support assigned iff required: step {j}"));
            }
            if let Some((s, g)) = c.support {
                if s == c.robot {
                    return Err(format!("robot is both primary and support in step {j}"));
                }
                if !self.support_allowed(j, c.robot, s) || self.y_cost[j][s][g].is_none() {
                    return Err(format!("step {j}: infeasible support"));
                }
            }
            if !self.type_match[j][c.object] {
                return Err(format!("object type matches step {j}"));
            }
            if std::mem::replace(&mut used[c.object], true) {
                return Err(format!("object {} used more than once", c.object));
            }
        }
        let (obj, zmax, zmin) = self.evaluate(&a.steps).ok_or("objective undefined")?;
        if (obj - a.objective_value).abs() > 1e-9 * obj.abs().max(1.0) || zmax != a.z_max || zmin != a.z_min {
            return Err(format!("objective mismatch: stored {} recomputed {}", a.objective_value, obj));
        }
        Ok(())
    }

    /// Writes the program in CPLEX LP text format.
    pub fn to_lp(&self) -> String {
        let mut s = String::new();
        let (na, n, nb, p) = (self.n_steps(), self.n_robots, self.n_objects, self.p);
        let xs = |j: usize| {
            let mut v = Vec::new();
            for i in 0..n {
                for k in 0..nb {
                    for g in 0..p {
                        if let Some(c) = self.x_cost[j][i][k][g] {
                            v.push((i, k, g, c));
                        }
                    }
                }
            }
            v
        };
        let ys = |j: usize| {
            let mut v = Vec::new();
            for i in 0..n {
                for g in 0..p {
                    if let Some(c) = self.y_cost[j][i][g] {
                        v.push((i, g, c));
                    }
                }
            }
            v
        };
        let _ = writeln!(s, "\\ robot/object/grasp assignment\nMinimize\n obj:");
        for j in 0..na {
            for (i, k, g, c) in xs(j) {
                let _ = writeln!(s, " + {c} X_{i}_{j}_{k}_{g}");
            }
            if self.needs_support[j] {
                for (i, g, c) in ys(j) {
                    let _ = writeln!(s, " + {c} Y_{i}_{j}_{g}");
                }
            }
        }
        for w in 0..self.window_count() {
            let _ = writeln!(s, " + {} ZM_{w} - {} Zm_{w}", self.lambda, self.lambda);
        }
        let _ = writeln!(s, "Subject To");
        for j in 0..na {
            let terms: Vec<_> = xs(j).iter().map(|(i, k, g, _)| format!("X_{i}_{j}_{k}_{g}")).collect();
            let _ = writeln!(s, " once_{j}: {} = 1", join_or_zero(&terms));
            let yt: Vec<_> = ys(j).iter().map(|(i, g, _)| format!("Y_{i}_{j}_{g}")).collect();
            let _ = writeln!(s, " sup_{j}: {} = {}", join_or_zero(&yt), self.needs_support[j] as u8);
            for i in 0..n {
                let mut t: Vec<_> = xs(j).iter().filter(|x| x.0 == i).map(|(i, k, g, _)| format!("X_{i}_{j}_{k}_{g}")).collect();
                t.extend(ys(j).iter().filter(|y| y.0 == i).map(|(i, g, _)| format!("Y_{i}_{j}_{g}")));
                if !t.is_empty() {
                    let _ = writeln!(s, " role_{i}_{j}: {} <= 1", t.join(" + "));
                }
                if let Some(Some(partner)) = self.support_partner[j].as_ref().map(|pp| pp.get(i).copied().flatten()) {
                    for (ii, k, g, _) in xs(j).into_iter().filter(|x| x.0 == i) {
                        let ysum: Vec<_> = ys(j).iter().filter(|y| y.0 == partner).map(|(pi, g2, _)| format!("Y_{pi}_{j}_{g2}")).collect();
                        let _ = writeln!(s, " partner_{ii}_{j}_{k}_{g}: X_{ii}_{j}_{k}_{g} - {} <= 0", join_or_zero(&ysum).replace(" + ", " - "));
                    }
                }
            }
        }
        for k in 0..nb {
            let mut t = Vec::new();
            for j in 0..na {
                t.extend(xs(j).iter().filter(|x| x.1 == k).map(|(i, k, g, _)| format!("X_{i}_{j}_{k}_{g}")));
            }
            if !t.is_empty() {
                let _ = writeln!(s, " obj_{k}: {} <= 1", t.join(" + "));
            }
        }
        for w in 0..self.window_count() {
            for i in 0..n {
                let mut t = Vec::new();
                for j in w..w + n {
                    t.extend(xs(j).iter().filter(|x| x.0 == i).map(|(i, k, g, _)| format!("X_{i}_{j}_{k}_{g}")));
                    t.extend(ys(j).iter().filter(|y| y.0 == i).map(|(i, g, _)| format!("Y_{i}_{j}_{g}")));
                }
                let z = join_or_zero(&t).replace(" + ", " - ");
                let _ = writeln!(s, " zmax_{i}_{w}: ZM_{w} - {z} >= 0");
                let _ = writeln!(s, " zmin_{i}_{w}: Zm_{w} - {z} <= 0");
            }
        }
        let _ = writeln!(s, "Binary");
        for j in 0..na {
            for (i, k, g, _) in xs(j) {
                let _ = writeln!(s, " X_{i}_{j}_{k}_{g}");
            }
            for (i, g, _) in ys(j) {
                let _ = writeln!(s, " Y_{i}_{j}_{g}");
            }
        }
        let _ = writeln!(s, "End");
        s
    }
}

fn join_or_zero(t: &[String]) -> String {
    if t.is_empty() {
        "0 X_none".to_string()
    } else {
        t.join(" + ")
    }
}

type Role = (usize, Option<usize>);

struct StepOptions {
    /// Primary options `(i, k, g, cost)`, lexicographic.
    x: Vec<(usize, usize, usize, f64)>,
    /// Support options `(s, g, cost)`, lexicographic.
    y: Vec<(usize, usize, f64)>,
    /// Cheapest cost per role, ignoring object exclusivity.
    roles: Vec<(Role, f64)>,
}

fn step_options(pr: &AssignmentProblem, j: usize) -> StepOptions {
    // Grasps and support poses only affect their own step, so the first
    // cheapest one dominates the rest without changing the tie order.
    let first_min = |costs: &[Option<f64>]| {
        costs
            .iter()
            .enumerate()
            .filter_map(|(g, c)| c.map(|c| (g, c)))
            .fold(None, |b: Option<(usize, f64)>, (g, c)| match b {
                Some((_, bc)) if bc <= c => b,
                _ => Some((g, c)),
            })
    };
    let mut x = Vec::new();
    for i in 0..pr.n_robots {
        for k in 0..pr.n_objects {
            if !pr.type_match[j][k] {
                continue;
            }
            if let Some((g, c)) = first_min(&pr.x_cost[j][i][k]) {
                x.push((i, k, g, c));
            }
        }
    }
    let mut y = Vec::new();
    if pr.needs_support[j] {
        for s in 0..pr.n_robots {
            if let Some((g, c)) = first_min(&pr.y_cost[j][s]) {
                y.push((s, g, c));
            }
        }
    }
    let mut roles = Vec::new();
    for i in 0..pr.n_robots {
        let Some(cx) = x.iter().filter(|o| o.0 == i).map(|o| o.3).min_by(f64::total_cmp) else { continue };
        if pr.needs_support[j] {
            for s in 0..pr.n_robots {
                if !pr.support_allowed(j, i, s) {
                    continue;
                }
                if let Some(cy) = y.iter().filter(|o| o.0 == s).map(|o| o.2).min_by(f64::total_cmp) {
                    roles.push(((i, Some(s)), cx + cy));
                }
            }
        } else {
            roles.push(((i, None), cx));
        }
    }
    StepOptions { x, y, roles }
}

/// Bound on remembered search states.
const SEEN_CAP: usize = 4_000_000;

struct Search<'a> {
    pr: &'a AssignmentProblem,
    opts: Vec<StepOptions>,
    /// Cheapest primary-plus-support cost of step `j` using object `k`.
    cmin: Vec<Vec<f64>>,
    memo: HashMap<(usize, Vec<Role>), f64>,
    window_memo: HashMap<(usize, Vec<Role>), f64>,
    /// Prices on object reuse for the Lagrangian bound.
    mu: Vec<f64>,
    /// Per step and robot, `(cost + price, object)` ascending under `mu`.
    priced_x: Vec<Vec<Vec<(f64, usize)>>>,
    /// Per step, cheapest support cost per robot.
    min_y: Vec<Vec<f64>>,
    /// Cheapest prefix seen per (depth, used objects, role history).
    seen: HashMap<(usize, Vec<u64>, Vec<Role>), f64>,
    best_value: f64,
    best: Option<Vec<StepChoice>>,
    used: Vec<bool>,
    current: Vec<StepChoice>,
}

impl<'a> Search<'a> {
    fn history_len(&self) -> usize {
        self.pr.n_robots.saturating_sub(1)
    }

    fn push_history(&self, hist: &[Role], r: Role) -> Vec<Role> {
        let mut h = hist.to_vec();
        h.push(r);
        let keep = self.history_len();
        if h.len() > keep {
            h.drain(..h.len() - keep);
        }
        h
    }

    /// Window penalty incurred when step `j` completes a window.
    fn window_cost(&self, j: usize, hist: &[Role], r: Role) -> f64 {
        let n = self.pr.n_robots;
        if self.pr.window_count() == 0 || j + 1 < n {
            return 0.0;
        }
        let mut roles = hist.to_vec();
        roles.push(r);
        self.pr.lambda * self.pr.window_term(&roles[roles.len() - n..]).0
    }

    /// Optimal remaining cost from step `j` with object exclusivity relaxed.
    fn relaxed(&mut self, j: usize, hist: Vec<Role>) -> f64 {
        if j == self.pr.n_steps() {
            return 0.0;
        }
        if let Some(v) = self.memo.get(&(j, hist.clone())) {
            return *v;
        }
        let mut best = f64::INFINITY;
        let roles = self.opts[j].roles.clone();
        for (r, c) in roles {
            let w = self.window_cost(j, &hist, r);
            let next = self.push_history(&hist, r);
            let v = c + w + self.relaxed(j + 1, next);
            best = best.min(v);
        }
        self.memo.insert((j, hist), best);
        best
    }

    /// Least window penalty still to come from step `j`, over feasible role sequences.
    fn window_floor(&mut self, j: usize, hist: Vec<Role>) -> f64 {
        if j == self.pr.n_steps() {
            return 0.0;
        }
        if let Some(v) = self.window_memo.get(&(j, hist.clone())) {
            return *v;
        }
        let mut best = f64::INFINITY;
        let roles: Vec<Role> = self.opts[j].roles.iter().map(|r| r.0).collect();
        for r in roles {
            let w = self.window_cost(j, &hist, r);
            let next = self.push_history(&hist, r);
            best = best.min(w + self.window_floor(j + 1, next));
        }
        self.window_memo.insert((j, hist), best);
        best
    }

    /// Lower bound from pricing object reuse: every remaining step may take
    /// any free object at cost plus `mu[k]`, role history and windows are
    /// kept exact, and the prices of all free objects are refunded. Valid for
    /// any non-negative `mu`. Also returns one minimizing object sequence.
    fn lagrange(&self, from: usize, hist: &[Role], mu: &[f64]) -> (f64, Vec<usize>) {
        let pr = self.pr;
        let mut states: HashMap<Vec<Role>, (f64, Vec<usize>)> = HashMap::from([(hist.to_vec(), (0.0, Vec::new()))]);
        for j in from..pr.n_steps() {
            let o = &self.opts[j];
            // Cheapest priced free object per primary robot.
            let mut px = vec![(f64::INFINITY, usize::MAX); pr.n_robots];
            for &(i, k, _, c) in &o.x {
                if !self.used[k] && c + mu[k] < px[i].0 {
                    px[i] = (c + mu[k], k);
                }
            }
            let mut ys = vec![f64::INFINITY; pr.n_robots];
            for &(s, _, c) in &o.y {
                ys[s] = ys[s].min(c);
            }
            let mut next: HashMap<Vec<Role>, (f64, Vec<usize>)> = HashMap::new();
            for (h, (cost, objs)) in &states {
                for &(r, _) in &o.roles {
                    let (cx, k) = px[r.0];
                    let cy = r.1.map_or(0.0, |s| ys[s]);
                    let v = cost + cx + cy + self.window_cost(j, h, r);
                    if !v.is_finite() {
                        continue;
                    }
                    let key = self.push_history(h, r);
                    if next.get(&key).map_or(true, |e| v < e.0) {
                        let mut path = objs.clone();
                        path.push(k);
                        next.insert(key, (v, path));
                    }
                }
            }
            states = next;
        }
        let refund: f64 = (0..pr.n_objects).filter(|&k| !self.used[k]).map(|k| mu[k]).sum();
        states
            .into_values()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map_or((f64::INFINITY, Vec::new()), |(v, path)| (v - refund, path))
    }

    fn price_tables(&mut self) {
        let pr = self.pr;
        self.priced_x = self
            .opts
            .iter()
            .map(|o| {
                let mut per = vec![Vec::new(); pr.n_robots];
                for &(i, k, _, c) in &o.x {
                    per[i].push((c + self.mu[k], k));
                }
                for v in &mut per {
                    v.sort_by(|a, b| a.0.total_cmp(&b.0));
                }
                per
            })
            .collect();
        self.min_y = self
            .opts
            .iter()
            .map(|o| {
                let mut ys = vec![f64::INFINITY; pr.n_robots];
                for &(s, _, c) in &o.y {
                    ys[s] = ys[s].min(c);
                }
                ys
            })
            .collect();
    }

    /// Value of [`Self::lagrange`] under the tuned prices, from the
    /// precomputed tables and without tracking the object sequence.
    fn priced(&self, from: usize, hist: &[Role]) -> f64 {
        let pr = self.pr;
        let mut states: Vec<(Vec<Role>, f64)> = vec![(hist.to_vec(), 0.0)];
        let mut next: Vec<(Vec<Role>, f64)> = Vec::new();
        let mut px = vec![f64::INFINITY; pr.n_robots];
        for j in from..pr.n_steps() {
            for (i, list) in self.priced_x[j].iter().enumerate() {
                px[i] = list.iter().find(|e| !self.used[e.1]).map_or(f64::INFINITY, |e| e.0);
            }
            let o = &self.opts[j];
            next.clear();
            for (h, cost) in &states {
                for &(r, _) in &o.roles {
                    let cy = r.1.map_or(0.0, |s| self.min_y[j][s]);
                    let v = cost + px[r.0] + cy + self.window_cost(j, h, r);
                    if !v.is_finite() {
                        continue;
                    }
                    let key = self.push_history(h, r);
                    match next.iter_mut().find(|e| e.0 == key) {
                        Some(e) => e.1 = e.1.min(v),
                        None => next.push((key, v)),
                    }
                }
            }
            std::mem::swap(&mut states, &mut next);
        }
        let refund: f64 = (0..pr.n_objects).filter(|&k| !self.used[k]).map(|k| self.mu[k]).sum();
        states.iter().map(|e| e.1).fold(f64::INFINITY, f64::min) - refund
    }

    /// Subgradient ascent on the object prices at the root.
    fn tune_prices(&mut self) {
        let n = self.pr.n_objects;
        let mut mu = vec![0.0; n];
        let (mut best, _) = self.lagrange(0, &[], &mu);
        let mut best_mu = mu.clone();
        if !best.is_finite() {
            return;
        }
        let scale = self.cmin.iter().flatten().copied().filter(|c| c.is_finite()).fold(0.0, f64::max).max(1e-9);
        let mut theta = 1.0;
        let mut stale = 0;
        for _ in 0..200 {
            let (value, path) = self.lagrange(0, &[], &mu);
            if value > best + 1e-12 {
                best = value;
                best_mu = mu.clone();
                stale = 0;
            } else {
                stale += 1;
                if stale >= 5 {
                    theta /= 2.0;
                    stale = 0;
                }
            }
            let mut g = vec![-1.0; n];
            for k in path {
                g[k] += 1.0;
            }
            // Prices already at zero cannot go lower.
            for k in 0..n {
                if mu[k] <= 0.0 && g[k] < 0.0 {
                    g[k] = 0.0;
                }
            }
            let norm: f64 = g.iter().map(|x| x * x).sum();
            if norm == 0.0 || theta < 1e-4 {
                break;
            }
            let gap = if self.best_value.is_finite() { (self.best_value - value).max(0.0) } else { scale };
            if gap <= self.eps() {
                break;
            }
            let step = theta * gap / norm;
            for k in 0..n {
                mu[k] = (mu[k] + step * g[k]).max(0.0);
            }
        }
        self.mu = best_mu;
    }

    /// Optimal matching of the remaining steps to the unused objects,
    /// ignoring the window term and robot exclusivity across steps.
    fn matching_bound(&self, from: usize) -> f64 {
        let free: Vec<usize> = (0..self.pr.n_objects).filter(|&k| !self.used[k]).collect();
        let rows: Vec<Vec<f64>> = (from..self.pr.n_steps())
            .map(|j| free.iter().map(|&k| self.cmin[j][k]).collect())
            .collect();
        min_cost_matching(&rows)
    }

    fn eps(&self) -> f64 {
        1e-9 * self.best_value.abs().max(1.0)
    }

    /// Whether a subtree with this bound can still hold the answer. Subtrees
    /// that sort after the incumbent must beat it strictly; earlier ones may
    /// tie and still win on order.
    fn prune(&self, bound: f64, after: bool) -> bool {
        if !self.best_value.is_finite() {
            return !bound.is_finite();
        }
        if after {
            bound >= self.best_value - self.eps()
        } else {
            bound > self.best_value + self.eps()
        }
    }

    /// Whether the current prefix extended by `c` sorts after the incumbent.
    fn sorts_after(&self, c: &StepChoice) -> bool {
        let Some(best) = &self.best else { return false };
        let j = self.current.len();
        match self.current.as_slice().cmp(&best[..j]) {
            std::cmp::Ordering::Equal => *c > best[j],
            o => o == std::cmp::Ordering::Greater,
        }
    }

    fn children(&self, j: usize) -> Vec<(StepChoice, f64)> {
        let o = &self.opts[j];
        let mut out = Vec::new();
        for &(i, k, g, cx) in &o.x {
            if self.used[k] {
                continue;
            }
            if self.pr.needs_support[j] {
                for &(s, gs, cy) in &o.y {
                    if self.pr.support_allowed(j, i, s) {
                        out.push((StepChoice { robot: i, object: k, grasp: g, support: Some((s, gs)) }, cx + cy));
                    }
                }
            } else {
                out.push((StepChoice { robot: i, object: k, grasp: g, support: None }, cx));
            }
        }
        out
    }

    fn role(c: &StepChoice) -> Role {
        (c.robot, c.support.map(|s| s.0))
    }

    /// Dive for an incumbent, looking ahead with the relaxed DP or, when
    /// `priced`, with the Lagrangian bound.
    fn greedy(&mut self, priced: bool) {
        let mut hist = Vec::new();
        let mut cost = 0.0;
        let mut chosen = Vec::new();
        for j in 0..self.pr.n_steps() {
            let mut pick: Option<(StepChoice, f64, f64, Vec<Role>)> = None;
            for (c, sc) in self.children(j) {
                let r = Self::role(&c);
                let step = sc + self.window_cost(j, &hist, r);
                let next = self.push_history(&hist, r);
                let ahead = if priced {
                    self.used[c.object] = true;
                    let v = self.priced(j + 1, &next);
                    self.used[c.object] = false;
                    v
                } else {
                    self.relaxed(j + 1, next.clone())
                };
                let v = step + ahead;
                if pick.as_ref().map_or(true, |p| v < p.1) {
                    pick = Some((c, v, step, next));
                }
            }
            let Some((c, _, step, next)) = pick else { break };
            cost += step;
            self.used[c.object] = true;
            chosen.push(c);
            hist = next;
        }
        for c in &chosen {
            self.used[c.object] = false;
        }
        if chosen.len() == self.pr.n_steps() {
            let better = match &self.best {
                None => true,
                Some(b) => cost < self.best_value - self.eps() || (cost <= self.best_value + self.eps() && chosen < *b),
            };
            if better {
                self.best_value = cost;
                self.best = Some(chosen);
            }
        }
    }

    fn dfs(&mut self, j: usize, running: f64, hist: Vec<Role>) {
        // Same remaining problem as an earlier, lexicographically smaller
        // prefix that cost no more: nothing here can win.
        if j > 0 && j < self.pr.n_steps() {
            let mut bits = vec![0u64; self.pr.n_objects.div_ceil(64)];
            for (k, &u) in self.used.iter().enumerate() {
                if u {
                    bits[k / 64] |= 1 << (k % 64);
                }
            }
            let key = (j, bits, hist.clone());
            match self.seen.get(&key) {
                Some(&prev) if prev <= running + self.eps() => return,
                _ if self.seen.len() < SEEN_CAP => {
                    self.seen.insert(key, running);
                }
                _ => {}
            }
        }
        if j == self.pr.n_steps() {
            let better = match &self.best {
                None => true,
                Some(best) => {
                    running < self.best_value - self.eps()
                        || (running <= self.best_value + self.eps() && self.current < *best)
                }
            };
            if better {
                self.best_value = running;
                self.best = Some(self.current.clone());
            }
            return;
        }
        // Children in lexicographic order, so the first optimum found is the tie winner.
        let kids: Vec<(f64, StepChoice, f64, Vec<Role>)> = self
            .children(j)
            .into_iter()
            .map(|(c, sc)| {
                let r = Self::role(&c);
                let child_running = running + sc + self.window_cost(j, &hist, r);
                let next = self.push_history(&hist, r);
                let bound = child_running + self.relaxed(j + 1, next.clone());
                (bound, c, child_running, next)
            })
            .collect();
        // Taking object k drops it from the refund and from the options, so
        // the priced bound with k free plus its price is already a bound.
        let mut free_bound: Vec<(Vec<Role>, f64)> = Vec::new();
        let mut matching: HashMap<usize, f64> = HashMap::new();
        for (bound, c, child_running, next) in kids {
            let after = self.sorts_after(&c);
            if self.prune(bound, after) {
                continue;
            }
            let fb = match free_bound.iter().find(|e| e.0 == next) {
                Some(e) => e.1,
                None => {
                    let v = self.priced(j + 1, &next);
                    free_bound.push((next.clone(), v));
                    v
                }
            };
            if self.prune(child_running + fb + self.mu[c.object] - self.eps() * 1e-3, after) {
                continue;
            }
            self.used[c.object] = true;
            let priced = self.priced(j + 1, &next);
            if self.prune(priced + child_running - self.eps() * 1e-3, after) {
                self.used[c.object] = false;
                continue;
            }
            let m = match matching.get(&c.object) {
                Some(m) => *m,
                None => {
                    let m = self.matching_bound(j + 1);
                    matching.insert(c.object, m);
                    m
                }
            };
            let floor = self.window_floor(j + 1, next.clone());
            if self.prune(child_running + m + floor, after) {
                self.used[c.object] = false;
                continue;
            }
            self.current.push(c);
            self.dfs(j + 1, child_running, next);
            self.current.pop();
            self.used[c.object] = false;
        }
    }
}

/// Minimum-cost assignment of every row to a distinct column (rows ≤ columns),
/// by the Hungarian method with potentials. Infinite when no complete
/// assignment avoids infinite entries.
fn min_cost_matching(cost: &[Vec<f64>]) -> f64 {
    const BIG: f64 = 1e15;
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let m = cost[0].len();
    if m < n {
        return f64::INFINITY;
    }
    let at = |i: usize, j: usize| {
        let c = cost[i - 1][j - 1];
        if c.is_finite() {
            c
        } else {
            BIG
        }
    };
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = at(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for j in 1..=m {
        if p[j] != 0 {
            let c = cost[p[j] - 1][j - 1];
            if !c.is_finite() {
                return f64::INFINITY;
            }
            total += c;
        }
    }
    // Guard against round-off making the bound exceed the true optimum.
    total - 1e-9 * total.abs().max(1.0)
}

/// Provably optimal assignment; ties go to the lexicographically smallest
/// choice sequence over `(j, i, k, g)`.
pub fn solve_assignment(pr: &AssignmentProblem) -> Result<Assignment> {
    let na = pr.n_steps();
    let opts: Vec<_> = (0..na).map(|j| step_options(pr, j)).collect();
    for (j, o) in opts.iter().enumerate() {
        if o.x.is_empty() {
            return Err(Error::Infeasible(format!("step {}: no primary robot/object/grasp (task-once, type-match)", j + 1)));
        }
        if o.roles.is_empty() {
            return Err(Error::Infeasible(format!("step {}: no distinct support robot (support-once, robot-once)", j + 1)));
        }
    }
    let cmin = (0..na)
        .map(|j| {
            (0..pr.n_objects)
                .map(|k| {
                    let o = &opts[j];
                    let mut best = f64::INFINITY;
                    for &(i, kk, _, cx) in &o.x {
                        if kk != k {
                            continue;
                        }
                        let cy = if pr.needs_support[j] {
                            o.y.iter()
                                .filter(|y| pr.support_allowed(j, i, y.0))
                                .map(|y| y.2)
                                .fold(f64::INFINITY, f64::min)
                        } else {
                            0.0
                        };
                        best = best.min(cx + cy);
                    }
                    best
                })
                .collect()
        })
        .collect();
    let mut s = Search {
        pr,
        cmin,
        opts,
        memo: HashMap::new(),
        window_memo: HashMap::new(),
        mu: vec![0.0; pr.n_objects],
        priced_x: Vec::new(),
        min_y: Vec::new(),
        seen: HashMap::new(),
        best_value: f64::INFINITY,
        best: None,
        used: vec![false; pr.n_objects],
        current: Vec::with_capacity(na),
    };
    if !s.relaxed(0, Vec::new()).is_finite() {
        return Err(Error::Infeasible("no role sequence satisfies the support constraints".into()));
    }
    s.greedy(false);
    s.tune_prices();
    s.price_tables();
    s.greedy(true);
    s.dfs(0, 0.0, Vec::new());
    let steps = s
        .best
        .ok_or_else(|| Error::Infeasible("objects cannot cover all steps (object-once)".into()))?;
    let (objective_value, z_max, z_min) = pr.evaluate(&steps).expect("feasible choice");
    Ok(Assignment { steps, objective_value, z_max, z_min })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, x: Vec<Vec<Vec<Vec<Option<f64>>>>>, lambda: f64) -> AssignmentProblem {
        let na = x.len();
        let nb = x.first().map_or(0, |s| s[0].len());
        let p = x.first().map_or(1, |s| s[0][0].len());
        AssignmentProblem {
            n_robots: n,
            n_objects: nb,
            p,
            y_cost: vec![vec![vec![None; p]; n]; na],
            needs_support: vec![false; na],
            type_match: vec![vec![true; nb]; na],
            support_partner: vec![None; na],
            x_cost: x,
            lambda,
        }
    }

    #[test]
    fn single_quadruple() {
        let pr = problem(1, vec![vec![vec![vec![Some(3.5)]]]], 1.0);
        let a = solve_assignment(&pr).unwrap();
        assert_eq!(a.x(), vec![(0, 0, 0, 0)]);
        assert_eq!(a.objective_value, 3.5);
        pr.check(&a).unwrap();
    }

    #[test]
    fn symmetric_costs_alternate_robots() {
        // Two robots, two steps, two objects, equal costs: the window penalty
        // is 2 when one robot takes both steps and 0 otherwise.
        let cell = vec![vec![Some(1.0)], vec![Some(1.0)]];
        let pr = problem(2, vec![vec![cell.clone(), cell.clone()], vec![cell.clone(), cell]], 0.5);
        let a = solve_assignment(&pr).unwrap();
        assert_ne!(a.steps[0].robot, a.steps[1].robot);
        assert!((a.objective_value - 2.0).abs() < 1e-12);
        // lexicographic tie-break: robot 0, object 0 first
        assert_eq!(a.steps[0], StepChoice { robot: 0, object: 0, grasp: 0, support: None });
    }

    #[test]
    fn missing_object_type_is_infeasible() {
        let mut pr = problem(1, vec![vec![vec![vec![Some(1.0)]]]], 0.0);
        pr.type_match[0][0] = false;
        assert!(matches!(solve_assignment(&pr), Err(Error::Infeasible(_))));
    }

    #[test]
    fn objects_exhausted_is_infeasible() {
        let pr = problem(1, vec![vec![vec![vec![Some(1.0)]]], vec![vec![vec![Some(1.0)]]]], 0.0);
        assert!(matches!(solve_assignment(&pr), Err(Error::Infeasible(_))));
    }

    #[test]
    fn support_must_differ_from_primary() {
        let mut pr = problem(2, vec![vec![vec![vec![Some(1.0)]], vec![vec![Some(5.0)]]]], 0.0);
        pr.needs_support[0] = true;
        pr.y_cost[0] = vec![vec![Some(0.1)], vec![Some(2.0)]];
        let a = solve_assignment(&pr).unwrap();
        // robot 0 primary (1.0) + robot 1 support (2.0) beats 5.0 + 0.1
        assert_eq!(a.steps[0].robot, 0);
        assert_eq!(a.steps[0].support, Some((1, 0)));
        pr.check(&a).unwrap();
    }

    #[test]
    fn matching_small_cases() {
        assert_eq!(min_cost_matching(&[]), 0.0);
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        assert!((min_cost_matching(&c) - 5.0).abs() < 1e-6);
        let inf = f64::INFINITY;
        assert!(min_cost_matching(&[vec![inf, 1.0], vec![inf, 2.0]]).is_infinite());
        assert!((min_cost_matching(&[vec![7.0, 3.0]]) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn lp_dump_mentions_every_family() {
        let cell = vec![vec![Some(1.0)], vec![Some(1.0)]];
        let pr = problem(2, vec![vec![cell.clone(), cell.clone()], vec![cell.clone(), cell]], 0.5);
        let lp = pr.to_lp();
        for key in ["Minimize", "once_0", "sup_1", "role_1_0", "obj_1", "zmax_0_0", "Binary", "End"] {
            assert!(lp.contains(key), "{key}");
        }
    }
}
