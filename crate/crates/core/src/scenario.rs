//! Assembly problems: file schema, validation, inverse kinematics and the
//! precomputed grasp/support candidate sets.

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Pose2};
use crate::world::{
    Attached, Configuration, ObjectShape, Obstacle, Placement, RobotGeometry, RobotModel,
    WorldState,
};
use rand::Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyStep {
    /// 1-based position in the assembly sequence.
    pub index: usize,
    pub required_type: String,
    pub target_pose: Pose2,
    #[serde(default)]
    pub needs_support: bool,
    #[serde(default)]
    pub needs_handover: bool,
    /// End-effector poses from which a second arm can brace the structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_region: Option<Vec<Pose2>>,
    /// Where the object is passed between arms on reorientation steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handover_pose: Option<Pose2>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkillName {
    Pick,
    PlaceDown,
    PlaceUp,
    Handover,
    SupportBottom,
    SupportTop,
}

impl SkillName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkillName::Pick => "pick",
            SkillName::PlaceDown => "place-down",
            SkillName::PlaceUp => "place-up",
            SkillName::Handover => "handover",
            SkillName::SupportBottom => "support-bottom",
            SkillName::SupportTop => "support-top",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DurationJitter {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl DurationJitter {
    /// Triangular draw over `[min, max]` peaking at the median.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.max <= self.min {
            return self.min;
        }
        Triangular::new(self.min, self.max, self.median)
            .map(|t| t.sample(rng))
            .unwrap_or(self.median)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceGenerator {
    /// Attach at the goal, twist the last joint, return.
    TwoStepAttachTwist,
    /// Reach and hold the goal pose.
    SingleStepGoalReach,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillSpec {
    pub name: SkillName,
    pub nominal_duration: f64,
    pub duration_jitter: DurationJitter,
    pub reference_path_generator: ReferenceGenerator,
    #[serde(default = "default_twist")]
    pub twist: f64,
}

fn default_twist() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "P", default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

fn default_p() -> usize {
    4
}

/// Pick configuration and matching place configuration for one grasp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pick: Configuration,
    pub place: Configuration,
}

/// Poses used when `robot` is the primary of a handover step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverPoses {
    /// Partner configuration presenting the object.
    pub give: Configuration,
    pub receive: Configuration,
    pub place: Configuration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspEntry {
    pub step: usize,
    pub robot: usize,
    pub object: usize,
    pub candidates: Vec<GraspCandidate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub step: usize,
    pub robot: usize,
    pub candidates: Vec<Configuration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverEntry {
    pub step: usize,
    pub robot: usize,
    pub poses: HandoverPoses,
}

/// On-disk scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub robots: Vec<RobotModel>,
    pub objects: Vec<ObjectShape>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub steps: Vec<AssemblyStep>,
    pub skills: Vec<SkillSpec>,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grasp_candidates: Option<Vec<GraspEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_candidates: Option<Vec<SupportEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handover_candidates: Option<Vec<HandoverEntry>>,
}

/// A validated problem. Step and robot keys below are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub world: WorldState,
    pub steps: Vec<AssemblyStep>,
    pub skills: BTreeMap<SkillName, SkillSpec>,
    /// Keyed by (step, robot, object).
    pub grasp_candidates: BTreeMap<(usize, usize, usize), Vec<GraspCandidate>>,
    /// Keyed by (step, robot).
    pub support_candidates: BTreeMap<(usize, usize), Vec<Configuration>>,
    /// Keyed by (step, primary robot).
    pub handover_candidates: BTreeMap<(usize, usize), HandoverPoses>,
    pub lambda: Option<f64>,
    pub dt: f64,
    pub p: usize,
    pub rng_seed: u64,
}

/// Joint solutions placing the end effector at `target`, elbow-up first.
///
/// Two-link arms match position only; three-link arms also match heading.
/// Unreachable targets give an empty list.
pub fn planar_ik(robot: &RobotModel, target: &Pose2) -> Vec<Configuration> {
    match robot.link_lengths.as_slice() {
        [l1, l2] => two_link_ik(robot.base, *l1, *l2, target.x, target.y)
            .into_iter()
            .map(|(a, b)| Configuration::new(vec![a, b]))
            .collect(),
        [l1, l2, l3] => {
            let wx = target.x - l3 * target.theta.cos();
            let wy = target.y - l3 * target.theta.sin();
            two_link_ik(robot.base, *l1, *l2, wx, wy)
                .into_iter()
                .map(|(a, b)| Configuration::new(vec![a, b, wrap_angle(target.theta - a - b)]))
                .collect()
        }
        _ => Vec::new(),
    }
}

fn two_link_ik(base: [f64; 2], l1: f64, l2: f64, x: f64, y: f64) -> Vec<(f64, f64)> {
    const TOL: f64 = 1e-12;
    let (px, py) = (x - base[0], y - base[1]);
    let d2 = px * px + py * py;
    let d = d2.sqrt();
    if d > l1 + l2 + TOL || d < (l1 - l2).abs() - TOL {
        return Vec::new();
    }
    let c2 = ((d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let solve = |q2: f64| {
        let q1 = py.atan2(px) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
        (q1, q2)
    };
    if c2 >= 1.0 - TOL || c2 <= -1.0 + TOL {
        return vec![solve(c2.acos())];
    }
    let q2 = c2.acos();
    vec![solve(-q2), solve(q2)]
}

/// Robot that picks and presents the object when `primary` receives it.
///
/// With two arms this is the other arm; with more, the arm whose base is
/// nearest (lowest index on ties).
pub fn handover_partner(world: &WorldState, primary: usize) -> Option<usize> {
    let b = world.robots[primary].base;
    (0..world.robots.len())
        .filter(|&i| i != primary)
        .map(|i| {
            let o = world.robots[i].base;
            (((o[0] - b[0]).powi(2) + (o[1] - b[1]).powi(2)).sqrt(), i)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, i)| i)
}

impl Scenario {
    pub fn n_robots(&self) -> usize {
        self.world.robots.len()
    }

    pub fn n_objects(&self) -> usize {
        self.world.objects.len()
    }

    pub fn skill(&self, name: SkillName) -> &SkillSpec {
        &self.skills[&name]
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let margin = file.params.margin.unwrap_or(crate::world::DEFAULT_MARGIN);
        let world = WorldState {
            robots: file.robots,
            objects: file.objects,
            static_obstacles: file.obstacles,
            margin,
        };
        validate_world(&world)?;
        if !(file.params.dt > 0.0) {
            return Err(Error::validation("dt > 0", format!("dt = {}", file.params.dt)));
        }
        if file.params.p == 0 {
            return Err(Error::validation("P >= 1", "P = 0"));
        }
        if let Some(l) = file.params.lambda {
            if !(l >= 0.0) {
                return Err(Error::validation("lambda >= 0", format!("lambda = {l}")));
            }
        }
        validate_steps(&file.steps)?;
        let mut skills = BTreeMap::new();
        for s in file.skills {
            let j = s.duration_jitter;
            if !(s.nominal_duration > 0.0 && j.min > 0.0 && j.min <= j.median && j.median <= j.max) {
                return Err(Error::validation(
                    "skill durations positive and min <= median <= max",
                    s.name.as_str(),
                ));
            }
            skills.insert(s.name, s);
        }
        for needed in required_skills(&file.steps) {
            if !skills.contains_key(&needed) {
                return Err(Error::validation("skill catalog complete", needed.as_str()));
            }
        }
        let mut sc = Scenario {
            world,
            steps: file.steps,
            skills,
            grasp_candidates: BTreeMap::new(),
            support_candidates: BTreeMap::new(),
            handover_candidates: BTreeMap::new(),
            lambda: file.params.lambda,
            dt: file.params.dt,
            p: file.params.p,
            rng_seed: file.params.seed,
        };
        match file.grasp_candidates {
            Some(entries) => {
                for e in entries {
                    sc.grasp_candidates.insert((e.step, e.robot, e.object), e.candidates);
                }
            }
            None => sc.grasp_candidates = sc.compute_grasp_candidates(),
        }
        match file.handover_candidates {
            Some(entries) => {
                for e in entries {
                    sc.handover_candidates.insert((e.step, e.robot), e.poses);
                }
            }
            None => sc.handover_candidates = sc.compute_handover_candidates(),
        }
        match file.support_candidates {
            Some(entries) => {
                for e in entries {
                    sc.support_candidates.insert((e.step, e.robot), e.candidates);
                }
            }
            None => sc.support_candidates = sc.compute_support_candidates(),
        }
        sc.validate_candidates()?;
        sc.check_feasibility()?;
        Ok(sc)
    }

    /// Canonical document: computed candidates are written out explicitly.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            robots: self.world.robots.clone(),
            objects: self.world.objects.clone(),
            obstacles: self.world.static_obstacles.clone(),
            steps: self.steps.clone(),
            skills: self.skills.values().cloned().collect(),
            params: Params {
                dt: self.dt,
                lambda: self.lambda,
                p: self.p,
                seed: self.rng_seed,
                margin: Some(self.world.margin),
            },
            grasp_candidates: Some(
                self.grasp_candidates
                    .iter()
                    .map(|(&(step, robot, object), c)| GraspEntry {
                        step,
                        robot,
                        object,
                        candidates: c.clone(),
                    })
                    .collect(),
            ),
            support_candidates: Some(
                self.support_candidates
                    .iter()
                    .map(|(&(step, robot), c)| SupportEntry {
                        step,
                        robot,
                        candidates: c.clone(),
                    })
                    .collect(),
            ),
            handover_candidates: Some(
                self.handover_candidates
                    .iter()
                    .map(|(&(step, robot), p)| HandoverEntry {
                        step,
                        robot,
                        poses: p.clone(),
                    })
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    /// Geometry of every robot but `except` parked at HOME.
    pub fn homes_except(&self, except: usize) -> Vec<RobotGeometry> {
        (0..self.n_robots())
            .filter(|&r| r != except)
            .map(|r| {
                self.world
                    .geometry(&Placement::new(r, self.world.robots[r].home.clone(), None))
            })
            .collect()
    }

    fn clear_at_load(&self, robot: usize, q: &Configuration, attach: Option<Attached>) -> bool {
        self.world
            .placement_clear(&Placement::new(robot, q.clone(), attach), &self.homes_except(robot))
    }

    fn heading_offsets(&self) -> Vec<f64> {
        (0..self.p)
            .map(|g| 2.0 * PI * g as f64 / self.p as f64)
            .collect()
    }

    /// Object carried from a pick at `pick` for object `k`.
    pub fn grip_for(&self, robot: usize, pick: &Configuration, k: usize) -> Attached {
        let ee = self.world.end_effector(robot, pick);
        Attached::at(k, &ee, &self.world.objects[k].pose)
    }

    fn compute_grasp_candidates(&self) -> BTreeMap<(usize, usize, usize), Vec<GraspCandidate>> {
        let mut out = BTreeMap::new();
        for (j, step) in self.steps.iter().enumerate() {
            for k in 0..self.n_objects() {
                let obj = &self.world.objects[k];
                if obj.type_tag != step.required_type {
                    continue;
                }
                for i in 0..self.n_robots() {
                    let robot = &self.world.robots[i];
                    let mut cands: Vec<GraspCandidate> = Vec::new();
                    // Non-handover steps place with the same arm; handover
                    // steps end at the presenting pose instead.
                    let place_target = if step.needs_handover {
                        step.handover_pose
                    } else {
                        Some(step.target_pose)
                    };
                    let Some(place_target) = place_target else { continue };
                    for h in self.heading_offsets() {
                        let picks = planar_ik(robot, &Pose2::new(obj.pose.x, obj.pose.y, wrap_angle(obj.pose.theta + h)));
                        let places = planar_ik(
                            robot,
                            &Pose2::new(place_target.x, place_target.y, wrap_angle(place_target.theta + h)),
                        );
                        for branch in 0..2 {
                            let (Some(pick), Some(place)) = (picks.get(branch).or(picks.first()), places.get(branch).or(places.first())) else {
                                continue;
                            };
                            let cand = GraspCandidate {
                                pick: pick.clone(),
                                place: place.clone(),
                            };
                            if cands.contains(&cand) || cands.len() >= self.p {
                                continue;
                            }
                            let att = self.grip_for(i, pick, k);
                            if self.clear_at_load(i, pick, Some(att)) && self.clear_at_load(i, place, Some(att)) {
                                cands.push(cand);
                            }
                        }
                    }
                    if !cands.is_empty() {
                        out.insert((j, i, k), cands);
                    }
                }
            }
        }
        out
    }

    /// Every arm other than `support` holding the step's part at its final
    /// place pose; a support pose must stay clear of all of them.
    fn placing_geometries(&self, j: usize, support: usize) -> Vec<RobotGeometry> {
        let mut out = Vec::new();
        for (&(jj, i, k), cands) in &self.grasp_candidates {
            if jj != j || i == support || self.steps[j].needs_handover {
                continue;
            }
            for c in cands {
                let att = self.grip_for(i, &c.pick, k);
                out.push(self.world.geometry(&Placement::new(i, c.place.clone(), Some(att))));
            }
        }
        for (&(jj, i), hp) in &self.handover_candidates {
            if jj != j || i == support {
                continue;
            }
            // The grip is only known once the giver is chosen; parts are
            // gripped at their centre, so an identity grip is a close stand-in.
            for k in 0..self.n_objects() {
                if self.world.objects[k].type_tag == self.steps[j].required_type {
                    let att = Attached { object: k, grip: Pose2::IDENTITY };
                    for q in [&hp.receive, &hp.place] {
                        out.push(self.world.geometry(&Placement::new(i, q.clone(), Some(att))));
                    }
                }
            }
        }
        out
    }

    fn compute_support_candidates(&self) -> BTreeMap<(usize, usize), Vec<Configuration>> {
        let mut out = BTreeMap::new();
        for (j, step) in self.steps.iter().enumerate() {
            if !step.needs_support {
                continue;
            }
            for i in 0..self.n_robots() {
                let mut cands: Vec<Configuration> = Vec::new();
                let placing = self.placing_geometries(j, i);
                for pose in step.support_region.iter().flatten() {
                    for q in planar_ik(&self.world.robots[i], pose) {
                        if cands.len() < self.p && !cands.contains(&q) && self.clear_at_load(i, &q, None) {
                            let g = self.world.geometry(&Placement::new(i, q.clone(), None));
                            if placing.iter().all(|p| !self.world.pair_collides(&g, p)) {
                                cands.push(q);
                            }
                        }
                    }
                }
                if !cands.is_empty() {
                    out.insert((j, i), cands);
                }
            }
        }
        out
    }

    fn compute_handover_candidates(&self) -> BTreeMap<(usize, usize), HandoverPoses> {
        let mut out = BTreeMap::new();
        for (j, step) in self.steps.iter().enumerate() {
            let (true, Some(hp)) = (step.needs_handover, step.handover_pose) else { continue };
            for i in 0..self.n_robots() {
                let Some(partner) = handover_partner(&self.world, i) else { continue };
                let give = planar_ik(&self.world.robots[partner], &hp)
                    .into_iter()
                    .find(|q| self.clear_at_load(partner, q, None));
                let receive = planar_ik(&self.world.robots[i], &hp)
                    .into_iter()
                    .find(|q| self.clear_at_load(i, q, None));
                let place = planar_ik(&self.world.robots[i], &step.target_pose)
                    .into_iter()
                    .find(|q| self.clear_at_load(i, q, None));
                if let (Some(give), Some(receive), Some(place)) = (give, receive, place) {
                    out.insert((j, i), HandoverPoses { give, receive, place });
                }
            }
        }
        out
    }

    fn validate_candidates(&self) -> Result<()> {
        let bad = |what: &str, key: String| Err(Error::validation(format!("{what} candidate valid"), key));
        for (&(j, i, k), cands) in &self.grasp_candidates {
            if j >= self.steps.len() || i >= self.n_robots() || k >= self.n_objects() {
                return bad("grasp", format!("({j},{i},{k}) out of range"));
            }
            if self.world.objects[k].type_tag != self.steps[j].required_type {
                return bad("grasp", format!("object {k} has wrong type for step {}", j + 1));
            }
            if cands.is_empty() || cands.len() > self.p {
                return bad("grasp", format!("({j},{i},{k}) has {} candidates, P = {}", cands.len(), self.p));
            }
            for c in cands {
                self.world.check_dof(i, &c.pick)?;
                self.world.check_dof(i, &c.place)?;
                let att = self.grip_for(i, &c.pick, k);
                if !self.clear_at_load(i, &c.pick, Some(att)) || !self.clear_at_load(i, &c.place, Some(att)) {
                    return bad("grasp", format!("({j},{i},{k}) collides"));
                }
            }
        }
        for (&(j, i), cands) in &self.support_candidates {
            if j >= self.steps.len() || i >= self.n_robots() || cands.is_empty() || cands.len() > self.p {
                return bad("support", format!("({j},{i})"));
            }
            for q in cands {
                self.world.check_dof(i, q)?;
                if !self.clear_at_load(i, q, None) {
                    return bad("support", format!("({j},{i}) collides"));
                }
            }
        }
        for (&(j, i), hp) in &self.handover_candidates {
            if j >= self.steps.len() || i >= self.n_robots() {
                return bad("handover", format!("({j},{i})"));
            }
            let partner = handover_partner(&self.world, i)
                .ok_or_else(|| Error::validation("handover partner exists", format!("robot {i}")))?;
            self.world.check_dof(partner, &hp.give)?;
            self.world.check_dof(i, &hp.receive)?;
            self.world.check_dof(i, &hp.place)?;
        }
        Ok(())
    }

    fn check_feasibility(&self) -> Result<()> {
        for (j, step) in self.steps.iter().enumerate() {
            if !self.world.objects.iter().any(|o| o.type_tag == step.required_type) {
                return Err(Error::Infeasible(format!(
                    "step {} needs type {:?} but no such object exists",
                    step.index, step.required_type
                )));
            }
            let feasible = (0..self.n_robots()).any(|i| {
                let support_ok = |s: usize| s != i && self.support_candidates.contains_key(&(j, s));
                if step.needs_handover {
                    let Some(partner) = handover_partner(&self.world, i) else { return false };
                    self.handover_candidates.contains_key(&(j, i))
                        && self.grasp_candidates.keys().any(|&(jj, ii, _)| jj == j && ii == partner)
                        && support_ok(partner)
                } else {
                    self.grasp_candidates.keys().any(|&(jj, ii, _)| jj == j && ii == i)
                        && (!step.needs_support || (0..self.n_robots()).any(support_ok))
                }
            });
            if !feasible {
                return Err(Error::Infeasible(format!(
                    "step {} has no feasible grasp/support combination",
                    step.index
                )));
            }
        }
        Ok(())
    }
}

fn required_skills(steps: &[AssemblyStep]) -> Vec<SkillName> {
    let mut v = Vec::new();
    for s in steps {
        v.push(SkillName::Pick);
        if s.needs_handover {
            v.extend([SkillName::Handover, SkillName::PlaceUp, SkillName::SupportTop]);
        } else {
            v.push(SkillName::PlaceDown);
            if s.needs_support {
                v.push(SkillName::SupportBottom);
            }
        }
    }
    v.sort();
    v.dedup();
    v
}

fn validate_world(w: &WorldState) -> Result<()> {
    if w.robots.is_empty() {
        return Err(Error::validation("at least one robot", "robots = []"));
    }
    if !(w.margin >= 0.0) {
        return Err(Error::validation("margin >= 0", format!("{}", w.margin)));
    }
    for (i, r) in w.robots.iter().enumerate() {
        let el = || format!("robot {i}");
        if r.link_lengths.is_empty() || r.link_lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::validation("link_lengths > 0", el()));
        }
        if !(r.link_radius > 0.0) {
            return Err(Error::validation("link_radius > 0", el()));
        }
        if !(r.v_max > 0.0) {
            return Err(Error::validation("v_max > 0", el()));
        }
        if r.home.dof() != r.dof() || !r.home.is_finite() {
            return Err(Error::validation("home matches DOF and is finite", el()));
        }
        if r.home.joints().iter().any(|a| *a <= -PI || *a > PI) {
            return Err(Error::validation("angles in (-pi, pi]", el()));
        }
        if !r.base[0].is_finite() || !r.base[1].is_finite() {
            return Err(Error::validation("base finite", el()));
        }
    }
    for (k, o) in w.objects.iter().enumerate() {
        if o.id != k {
            return Err(Error::validation("object ids are 0..N_b-1 in order", format!("object at {k} has id {}", o.id)));
        }
        if !o.kind.dimensions_positive() || !o.pose.is_finite() {
            return Err(Error::validation("object dimensions > 0 and pose finite", format!("object {k}")));
        }
    }
    for (n, o) in w.static_obstacles.iter().enumerate() {
        if !(o.width > 0.0 && o.height > 0.0) || !o.pose.is_finite() {
            return Err(Error::validation("obstacle dimensions > 0", format!("obstacle {n}")));
        }
    }
    let homes: Vec<_> = (0..w.robots.len())
        .map(|i| w.geometry(&Placement::new(i, w.robots[i].home.clone(), None)))
        .collect();
    for (i, g) in homes.iter().enumerate() {
        if w.hits_static(g) {
            return Err(Error::validation("home collision-free", format!("robot {i} home hits obstacle")));
        }
        for (j, h) in homes.iter().enumerate().skip(i + 1) {
            if w.pair_collides(g, h) {
                return Err(Error::validation("home collision-free", format!("robots {i} and {j} at home")));
            }
        }
    }
    Ok(())
}

fn validate_steps(steps: &[AssemblyStep]) -> Result<()> {
    for (n, s) in steps.iter().enumerate() {
        let el = || format!("step {}", s.index);
        if s.index != n + 1 {
            return Err(Error::validation("step indices contiguous 1..N_a", el()));
        }
        if !s.target_pose.is_finite() {
            return Err(Error::validation("target pose finite", el()));
        }
        if s.needs_handover && !s.needs_support {
            return Err(Error::validation("needs_handover implies needs_support", el()));
        }
        if s.needs_handover && s.handover_pose.is_none() {
            return Err(Error::validation("handover steps carry handover_pose", el()));
        }
        if s.needs_support && s.support_region.as_ref().map_or(true, |r| r.is_empty()) {
            return Err(Error::validation("supported steps carry a support_region", el()));
        }
    }
    Ok(())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{forward_kinematics, ShapeKind};

    fn arm2() -> RobotModel {
        RobotModel {
            base: [0.0, 0.0],
            link_lengths: vec![0.3, 0.25],
            link_radius: 0.02,
            home: Configuration::new(vec![PI, 0.0]),
            v_max: 1.0,
        }
    }

    #[test]
    fn ik_boundary_single_solution() {
        let r = arm2();
        let sols = planar_ik(&r, &Pose2::new(0.55, 0.0, 0.0));
        assert_eq!(sols.len(), 1);
        assert!(sols[0].joints()[1].abs() < 1e-6);
    }

    #[test]
    fn ik_unreachable_is_empty() {
        assert!(planar_ik(&arm2(), &Pose2::new(2.0, 0.0, 0.0)).is_empty());
        assert!(planar_ik(&arm2(), &Pose2::new(0.01, 0.0, 0.0)).is_empty());
    }

    #[test]
    fn ik_interior_roundtrip() {
        let r = arm2();
        let t = Pose2::new(0.2, 0.31, 0.0);
        let sols = planar_ik(&r, &t);
        assert_eq!(sols.len(), 2);
        // elbow-up first: negative elbow angle
        assert!(sols[0].joints()[1] < 0.0 && sols[1].joints()[1] > 0.0);
        for q in sols {
            let ee = forward_kinematics(&r, &q).unwrap().end_effector;
            assert!((ee.x - t.x).abs() < 1e-9 && (ee.y - t.y).abs() < 1e-9);
        }
    }

    #[test]
    fn ik_three_link_matches_heading() {
        let r = RobotModel {
            link_lengths: vec![0.3, 0.25, 0.1],
            home: Configuration::new(vec![PI, 0.0, 0.0]),
            ..arm2()
        };
        let t = Pose2::new(0.3, 0.2, 0.4);
        let sols = planar_ik(&r, &t);
        assert_eq!(sols.len(), 2);
        for q in sols {
            let ee = forward_kinematics(&r, &q).unwrap().end_effector;
            assert!((ee.x - t.x).abs() < 1e-9 && (ee.y - t.y).abs() < 1e-9);
            assert!(wrap_angle(ee.theta - t.theta).abs() < 1e-9);
        }
    }

    fn skill(name: SkillName) -> SkillSpec {
        SkillSpec {
            name,
            nominal_duration: 1.0,
            duration_jitter: DurationJitter { min: 0.9, median: 1.0, max: 3.0 },
            reference_path_generator: ReferenceGenerator::TwoStepAttachTwist,
            twist: 0.05,
        }
    }

    fn file(steps: Vec<AssemblyStep>) -> ScenarioFile {
        ScenarioFile {
            robots: vec![arm2()],
            objects: vec![ObjectShape {
                id: 0,
                kind: ShapeKind::Disc { radius: 0.02 },
                type_tag: "1x1".into(),
                pose: Pose2::new(0.0, 0.4, 0.0),
            }],
            obstacles: vec![],
            steps,
            skills: vec![skill(SkillName::Pick), skill(SkillName::PlaceDown)],
            params: Params { dt: 0.05, lambda: None, p: 4, seed: 0, margin: None },
            grasp_candidates: None,
            support_candidates: None,
            handover_candidates: None,
        }
    }

    fn step(t: &str) -> AssemblyStep {
        AssemblyStep {
            index: 1,
            required_type: t.into(),
            target_pose: Pose2::new(0.4, 0.1, 0.0),
            needs_support: false,
            needs_handover: false,
            support_region: None,
            handover_pose: None,
        }
    }

    #[test]
    fn empty_steps_are_valid() {
        let sc = Scenario::from_file(file(vec![])).unwrap();
        assert!(sc.steps.is_empty() && sc.grasp_candidates.is_empty());
    }

    #[test]
    fn missing_type_is_infeasible() {
        let err = Scenario::from_file(file(vec![step("2x2")])).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn handover_without_support_rejected() {
        let mut s = step("1x1");
        s.needs_handover = true;
        s.handover_pose = Some(Pose2::IDENTITY);
        let err = Scenario::from_file(file(vec![s])).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn zero_length_link_rejected() {
        let mut f = file(vec![]);
        f.robots[0].link_lengths = vec![0.3, 0.0];
        assert!(matches!(Scenario::from_file(f), Err(Error::Validation { .. })));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(Scenario::from_json("{ not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn canonical_roundtrip() {
        let sc = Scenario::from_file(file(vec![step("1x1")])).unwrap();
        assert!(!sc.grasp_candidates.is_empty());
        let again = Scenario::from_json(&sc.to_json()).unwrap();
        assert_eq!(sc, again);
    }

    #[test]
    fn triangular_jitter_within_envelope() {
        let j = DurationJitter { min: 1.0, median: 1.2, max: 3.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::SeedableRng;
        for _ in 0..1000 {
            let d = j.sample(&mut rng);
            assert!((1.0..=3.0).contains(&d));
        }
    }
}
