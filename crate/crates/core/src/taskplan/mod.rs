//! From a scenario to an ordered, per-robot task plan.
//!
//! Costs are joint-space lengths of the motions a choice implies; the
//! optimal assignment is expanded into transit and skill tasks together with
//! the cross-robot dependencies that make the plan physically consistent.

pub mod assign;

pub use assign::{solve_assignment, Assignment, AssignmentProblem, AssignmentSolver, BranchAndBound, StepChoice};

use crate::error::{Error, Result};
use crate::geom::Pose2;
use crate::scenario::{handover_partner, Scenario, SkillName};
use crate::world::{Attached, Configuration};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Fills the cost tensors from the scenario's candidate poses.
pub fn build_problem(sc: &Scenario) -> AssignmentProblem {
    let (na, n, nb, p) = (sc.steps.len(), sc.n_robots(), sc.n_objects(), sc.p);
    let home = |i: usize| &sc.world.robots[i].home;
    let mut x_cost = vec![vec![vec![vec![None; p]; nb]; n]; na];
    let mut y_cost = vec![vec![vec![None; p]; n]; na];
    let mut type_match = vec![vec![false; nb]; na];
    let mut support_partner = vec![None; na];
    for (j, step) in sc.steps.iter().enumerate() {
        for k in 0..nb {
            type_match[j][k] = sc.world.objects[k].type_tag == step.required_type;
        }
        if step.needs_handover {
            support_partner[j] = Some((0..n).map(|i| handover_partner(&sc.world, i)).collect::<Vec<_>>());
        }
        for i in 0..n {
            for k in 0..nb {
                if step.needs_handover {
                    let Some(partner) = handover_partner(&sc.world, i) else { continue };
                    let Some(hp) = sc.handover_candidates.get(&(j, i)) else { continue };
                    let Some(cands) = sc.grasp_candidates.get(&(j, partner, k)) else { continue };
                    for (g, c) in cands.iter().enumerate().take(p) {
                        let giver = home(partner).distance(&c.pick) + c.pick.distance(&c.place);
                        let receiver = home(i).distance(&hp.receive) + hp.receive.distance(&hp.place);
                        x_cost[j][i][k][g] = Some(giver + receiver);
                    }
                } else if let Some(cands) = sc.grasp_candidates.get(&(j, i, k)) {
                    for (g, c) in cands.iter().enumerate().take(p) {
                        x_cost[j][i][k][g] = Some(home(i).distance(&c.pick) + c.pick.distance(&c.place));
                    }
                }
            }
            if !step.needs_support {
                continue;
            }
            let Some(cands) = sc.support_candidates.get(&(j, i)) else { continue };
            for (g, q) in cands.iter().enumerate().take(p) {
                y_cost[j][i][g] = if step.needs_handover {
                    // The support arm arrives from its presenting pose.
                    (0..n)
                        .filter(|&pr| handover_partner(&sc.world, pr) == Some(i))
                        .filter_map(|pr| sc.handover_candidates.get(&(j, pr)))
                        .map(|hp| hp.give.distance(q))
                        .min_by(f64::total_cmp)
                } else {
                    Some(home(i).distance(q))
                };
            }
        }
    }
    let finite: Vec<f64> = x_cost.iter().flatten().flatten().flatten().filter_map(|c| *c).collect();
    let lambda = sc.lambda.unwrap_or_else(|| {
        if finite.is_empty() {
            0.0
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64 / 10.0
        }
    });
    AssignmentProblem {
        n_robots: n,
        n_objects: nb,
        p,
        x_cost,
        y_cost,
        needs_support: sc.steps.iter().map(|s| s.needs_support).collect(),
        type_match,
        support_partner,
        lambda,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Transit,
    Skill(SkillName),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub robot: usize,
    /// Position in the robot's own sequence, from 0.
    pub index: usize,
    /// Assembly step (0-based) the task serves; `None` for nothing.
    pub step: Option<usize>,
    pub kind: TaskKind,
    pub goal: Configuration,
    /// Object grasped when the task begins.
    pub attach: Option<Attached>,
    /// Object released when the task ends.
    pub detach: Option<usize>,
}

impl Task {
    pub fn label(&self) -> String {
        let kind = match self.kind {
            TaskKind::Transit => "transit",
            TaskKind::Skill(s) => s.as_str(),
        };
        format!("r{}:t{}:{}", self.robot, self.index + 1, kind)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub object: usize,
    pub pose: Pose2,
}

/// Cross-robot precedence among tasks plus object hand-offs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    /// `(a, b)`: task `b` may not start before task `a` has finished.
    pub edges: Vec<(usize, usize)>,
    pub object_nodes: Vec<ObjectNode>,
    /// `(object node, task)`: the object is grasped at the task's start.
    pub attach_edges: Vec<(usize, usize)>,
    /// `(task, object node)`: the object is released at the task's end.
    pub detach_edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskPlan {
    /// Every task in the sequential execution order; `tasks[id].id == id`.
    pub tasks: Vec<Task>,
    /// Task ids per robot, in execution order.
    pub per_robot: Vec<Vec<usize>>,
    pub graph: TaskGraph,
    pub assignment: Assignment,
}

struct Builder<'a> {
    sc: &'a Scenario,
    tasks: Vec<Task>,
    per_robot: Vec<Vec<usize>>,
    graph: TaskGraph,
}

impl<'a> Builder<'a> {
    fn push(&mut self, robot: usize, step: usize, kind: TaskKind, goal: &Configuration) -> usize {
        let id = self.tasks.len();
        let index = self.per_robot[robot].len();
        self.per_robot[robot].push(id);
        self.tasks.push(Task {
            id,
            robot,
            index,
            step: Some(step),
            kind,
            goal: goal.clone(),
            attach: None,
            detach: None,
        });
        id
    }

    fn transit(&mut self, robot: usize, step: usize, goal: &Configuration) -> usize {
        self.push(robot, step, TaskKind::Transit, goal)
    }

    fn skill(&mut self, robot: usize, step: usize, s: SkillName, goal: &Configuration) -> usize {
        self.push(robot, step, TaskKind::Skill(s), goal)
    }

    fn home(&mut self, robot: usize, step: usize) -> usize {
        let h = self.sc.world.robots[robot].home.clone();
        self.transit(robot, step, &h)
    }

    fn object_node(&mut self, object: usize, pose: Pose2) -> usize {
        self.graph.object_nodes.push(ObjectNode { object, pose });
        self.graph.object_nodes.len() - 1
    }

    fn attach(&mut self, task: usize, a: Attached, node: usize) {
        self.tasks[task].attach = Some(a);
        self.graph.attach_edges.push((node, task));
    }

    fn detach(&mut self, task: usize, object: usize, pose: Pose2) {
        self.tasks[task].detach = Some(object);
        let node = self.object_node(object, pose);
        self.graph.detach_edges.push((task, node));
    }
}

/// Expands an assignment into per-robot transit and skill tasks.
///
/// Returns the place task of every step as well, in order.
pub fn expand_to_task_plan(sc: &Scenario, a: &Assignment) -> Result<TaskPlan> {
    let mut b = Builder {
        sc,
        tasks: Vec::new(),
        per_robot: vec![Vec::new(); sc.n_robots()],
        graph: TaskGraph::default(),
    };
    let mut prev_place: Option<(usize, usize)> = None;
    for (j, (step, c)) in sc.steps.iter().zip(&a.steps).enumerate() {
        let k = c.object;
        let start_pose = sc.world.objects[k].pose;
        let initial = b.object_node(k, start_pose);
        let missing = |what: &str| Error::Internal(format!("step {}: assignment refers to missing {what}", j + 1));
        let place_task;
        if step.needs_handover {
            let (s, sg) = c.support.ok_or_else(|| missing("support"))?;
            let hp = sc.handover_candidates.get(&(j, c.robot)).ok_or_else(|| missing("handover poses"))?;
            let cand = sc
                .grasp_candidates
                .get(&(j, s, k))
                .and_then(|v| v.get(c.grasp))
                .ok_or_else(|| missing("grasp"))?;
            let sup = sc.support_candidates.get(&(j, s)).and_then(|v| v.get(sg)).ok_or_else(|| missing("support pose"))?;
            let give_grip = sc.grip_for(s, &cand.pick, k);
            let handed_pose = sc.world.end_effector(s, &cand.place).compose(&give_grip.grip);
            let recv_grip = Attached::at(k, &sc.world.end_effector(c.robot, &hp.receive), &handed_pose);

            b.transit(s, j, &cand.pick);
            let pick = b.skill(s, j, SkillName::Pick, &cand.pick);
            b.attach(pick, give_grip, initial);
            b.transit(s, j, &cand.place);
            let give = b.skill(s, j, SkillName::Handover, &cand.place);
            b.detach(give, k, handed_pose);
            let handed = b.graph.object_nodes.len() - 1;
            b.transit(s, j, sup);
            let support = b.skill(s, j, SkillName::SupportTop, sup);
            b.transit(c.robot, j, &hp.receive);
            let receive = b.skill(c.robot, j, SkillName::Handover, &hp.receive);
            b.attach(receive, recv_grip, handed);
            b.transit(c.robot, j, &hp.place);
            place_task = b.skill(c.robot, j, SkillName::PlaceUp, &hp.place);
            b.detach(place_task, k, step.target_pose);
            b.home(c.robot, j);
            let s_home = b.home(s, j);
            b.graph.edges.extend([(give, receive), (support, place_task), (place_task, s_home)]);
        } else {
            let cand = sc
                .grasp_candidates
                .get(&(j, c.robot, k))
                .and_then(|v| v.get(c.grasp))
                .ok_or_else(|| missing("grasp"))?;
            let grip = sc.grip_for(c.robot, &cand.pick, k);
            let mut support = None;
            if let Some((s, sg)) = c.support {
                let sup = sc.support_candidates.get(&(j, s)).and_then(|v| v.get(sg)).ok_or_else(|| missing("support pose"))?;
                b.transit(s, j, sup);
                support = Some((s, b.skill(s, j, SkillName::SupportBottom, sup)));
            }
            b.transit(c.robot, j, &cand.pick);
            let pick = b.skill(c.robot, j, SkillName::Pick, &cand.pick);
            b.attach(pick, grip, initial);
            b.transit(c.robot, j, &cand.place);
            place_task = b.skill(c.robot, j, SkillName::PlaceDown, &cand.place);
            b.detach(place_task, k, step.target_pose);
            b.home(c.robot, j);
            if let Some((s, sup)) = support {
                let s_home = b.home(s, j);
                b.graph.edges.extend([(sup, place_task), (place_task, s_home)]);
            }
        }
        if let Some((prev_robot, prev)) = prev_place {
            if prev_robot != c.robot {
                b.graph.edges.push((prev, place_task));
            }
        }
        prev_place = Some((c.robot, place_task));
    }
    let plan = TaskPlan {
        tasks: b.tasks,
        per_robot: b.per_robot,
        graph: b.graph,
        assignment: a.clone(),
    };
    plan.check_acyclic()?;
    Ok(plan)
}

impl TaskPlan {
    pub fn n_robots(&self) -> usize {
        self.per_robot.len()
    }

    /// Task ids of robot `r`.
    pub fn robot_tasks(&self, r: usize) -> &[usize] {
        &self.per_robot[r]
    }

    /// Verifies that per-robot order plus dependencies form a DAG consistent
    /// with the sequential order.
    pub fn check_acyclic(&self) -> Result<()> {
        let n = self.tasks.len();
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        let mut add = |a: usize, b: usize, succ: &mut Vec<Vec<usize>>| {
            succ[a].push(b);
            indeg[b] += 1;
        };
        for ids in &self.per_robot {
            for w in ids.windows(2) {
                add(w[0], w[1], &mut succ);
            }
        }
        for &(a, b) in &self.graph.edges {
            if a >= b {
                return Err(Error::Internal(format!("dependency {a}->{b} runs against the sequential order")));
            }
            add(a, b, &mut succ);
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if seen != n {
            return Err(Error::Internal("task graph has a cycle".into()));
        }
        Ok(())
    }
}

/// Assignment plus expansion in one call.
pub fn plan_tasks(sc: &Scenario) -> Result<TaskPlan> {
    let problem = build_problem(sc);
    let a = solve_assignment(&problem)?;
    problem.check(&a).map_err(Error::Internal)?;
    expand_to_task_plan(sc, &a)
}
