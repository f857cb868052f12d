//! Planar arm kinematics, object geometry and the collision oracle.
//!
//! Arms are serial chains of revolute joints whose links are capsules. Joint
//! values live in (−π, π] and joint-space motion is linear without wrap-around,
//! so the joint range is the interval itself and the metric is plain L1.
//!
//! Objects lying in the workspace sit below the arm layer: links sweep over
//! them. Once attached to an end effector an object is lifted into the arm
//! layer and collides with links, other carried objects and static obstacles.

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Aabb, Hull, Point, Pose2};
use serde::{Deserialize, Serialize};

/// Joint-space pose of one robot, in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Configuration(pub Vec<f64>);

impl Configuration {
    /// Builds a configuration with every angle mapped into (−π, π].
    pub fn new(joints: impl Into<Vec<f64>>) -> Self {
        Self(joints.into().into_iter().map(wrap_angle).collect())
    }

    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn joints(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// L1 joint-space distance.
    pub fn distance(&self, other: &Configuration) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn max_joint_delta(&self, other: &Configuration) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn lerp(&self, other: &Configuration, t: f64) -> Configuration {
        Configuration(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * t)
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub base: Point,
    pub link_lengths: Vec<f64>,
    pub link_radius: f64,
    pub home: Configuration,
    /// Bound on L1 joint speed, rad/s.
    pub v_max: f64,
}

impl RobotModel {
    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn check_dof(&self, robot: usize, q: &Configuration) -> Result<()> {
        if q.dof() != self.dof() {
            return Err(Error::DimensionMismatch {
                robot,
                expected: self.dof(),
                got: q.dof(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Disc { radius: f64 },
    Rectangle { width: f64, height: f64 },
}

impl ShapeKind {
    pub fn hull(&self, pose: &Pose2) -> Hull {
        match *self {
            ShapeKind::Disc { radius } => Hull::disc(pose.position(), radius),
            ShapeKind::Rectangle { width, height } => Hull::rect(pose, width, height),
        }
    }

    pub fn dimensions_positive(&self) -> bool {
        match *self {
            ShapeKind::Disc { radius } => radius > 0.0,
            ShapeKind::Rectangle { width, height } => width > 0.0 && height > 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectShape {
    pub id: usize,
    pub kind: ShapeKind,
    pub type_tag: String,
    pub pose: Pose2,
}

/// Axis-aligned or rotated static rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub pose: Pose2,
    pub width: f64,
    pub height: f64,
}

impl Obstacle {
    pub fn hull(&self) -> Hull {
        Hull::rect(&self.pose, self.width, self.height)
    }
}

/// An object rigidly carried by an end effector.
///
/// `grip` is the object pose expressed in the end-effector frame, fixed at
/// attach time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attached {
    pub object: usize,
    pub grip: Pose2,
}

impl Attached {
    /// Attachment recorded when the end effector sits at `ee` and the object at `object_pose`.
    pub fn at(object: usize, ee: &Pose2, object_pose: &Pose2) -> Self {
        Self {
            object,
            grip: ee.inverse().compose(object_pose),
        }
    }
}

pub const DEFAULT_MARGIN: f64 = 0.01;

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robots: Vec<RobotModel>,
    pub objects: Vec<ObjectShape>,
    pub static_obstacles: Vec<Obstacle>,
    /// Clearance added between any two shapes.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

/// One robot at a pose, possibly carrying an object.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub robot: usize,
    pub q: Configuration,
    pub attach: Option<Attached>,
}

impl Placement {
    pub fn new(robot: usize, q: Configuration, attach: Option<Attached>) -> Self {
        Self { robot, q, attach }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kinematics {
    /// Link capsules, base first.
    pub links: Vec<Hull>,
    pub end_effector: Pose2,
}

/// Link capsules from cumulative joint rotation, plus the end-effector pose.
pub fn forward_kinematics(robot: &RobotModel, q: &Configuration) -> Result<Kinematics> {
    robot.check_dof(usize::MAX, q)?;
    Ok(fk_unchecked(robot, q))
}

fn fk_unchecked(robot: &RobotModel, q: &Configuration) -> Kinematics {
    let mut p = robot.base;
    let mut heading = 0.0;
    let mut links = Vec::with_capacity(robot.dof());
    for (len, angle) in robot.link_lengths.iter().zip(q.joints()) {
        heading += angle;
        let next = [p[0] + len * heading.cos(), p[1] + len * heading.sin()];
        links.push(Hull::capsule(p, next, robot.link_radius));
        p = next;
    }
    Kinematics {
        links,
        end_effector: Pose2::new(p[0], p[1], wrap_angle(heading)),
    }
}

/// Everything a placed robot occupies, ready for repeated pairwise queries.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotGeometry {
    pub hulls: Vec<Hull>,
    pub aabb: Aabb,
}

impl RobotGeometry {
    pub fn overlaps(&self, other: &RobotGeometry, margin: f64) -> bool {
        if !self.aabb.intersects(&other.aabb, margin) {
            return false;
        }
        self.hulls
            .iter()
            .any(|a| a.aabb().intersects(&other.aabb, margin) && other.hulls.iter().any(|b| a.overlaps(b, margin)))
    }
}

impl WorldState {
    pub fn robot(&self, i: usize) -> &RobotModel {
        &self.robots[i]
    }

    pub fn end_effector(&self, robot: usize, q: &Configuration) -> Pose2 {
        fk_unchecked(&self.robots[robot], q).end_effector
    }

    pub fn object_shape(&self, id: usize) -> Option<&ObjectShape> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Links plus carried object for `p`.
    pub fn geometry(&self, p: &Placement) -> RobotGeometry {
        let kin = fk_unchecked(&self.robots[p.robot], &p.q);
        let mut hulls = kin.links;
        if let Some(att) = p.attach {
            if let Some(obj) = self.object_shape(att.object) {
                let pose = kin.end_effector.compose(&att.grip);
                hulls.push(obj.kind.hull(&pose));
            }
        }
        let mut aabb = Aabb::empty();
        for h in &hulls {
            aabb.merge(&h.aabb());
        }
        RobotGeometry { hulls, aabb }
    }

    pub fn hits_static(&self, g: &RobotGeometry) -> bool {
        self.static_obstacles.iter().any(|o| {
            let h = o.hull();
            h.aabb().intersects(&g.aabb, self.margin) && g.hulls.iter().any(|x| x.overlaps(&h, self.margin))
        })
    }

    /// True when either placement overlaps the other or a static obstacle.
    ///
    /// Symmetric in its arguments.
    pub fn in_collision(&self, a: &Placement, b: &Placement) -> bool {
        let ga = self.geometry(a);
        let gb = self.geometry(b);
        self.hits_static(&ga) || self.hits_static(&gb) || ga.overlaps(&gb, self.margin)
    }

    pub fn pair_collides(&self, a: &RobotGeometry, b: &RobotGeometry) -> bool {
        a.overlaps(b, self.margin)
    }

    /// A single placement against the static scene and a set of stationary robots.
    pub fn placement_clear(&self, p: &Placement, stationary: &[RobotGeometry]) -> bool {
        let g = self.geometry(p);
        !self.hits_static(&g) && stationary.iter().all(|s| !g.overlaps(s, self.margin))
    }

    /// Checks the straight joint-space motion `from → to` sampled at no more than
    /// `resolution` radians per joint, against the static scene and `stationary`.
    pub fn path_clear(
        &self,
        robot: usize,
        attach: Option<Attached>,
        from: &Configuration,
        to: &Configuration,
        resolution: f64,
        stationary: &[RobotGeometry],
    ) -> bool {
        assert!(resolution > 0.0, "resolution must be positive");
        let steps = (from.max_joint_delta(to) / resolution).ceil().max(1.0) as usize;
        (0..=steps).all(|s| {
            let q = from.lerp(to, s as f64 / steps as f64);
            self.placement_clear(&Placement::new(robot, q, attach), stationary)
        })
    }

    pub fn check_dof(&self, robot: usize, q: &Configuration) -> Result<()> {
        self.robots[robot].check_dof(robot, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn arm(base: Point) -> RobotModel {
        RobotModel {
            base,
            link_lengths: vec![1.0, 1.0],
            link_radius: 0.05,
            home: Configuration::new(vec![0.0, 0.0]),
            v_max: 1.0,
        }
    }

    fn world(robots: Vec<RobotModel>) -> WorldState {
        WorldState {
            robots,
            objects: vec![ObjectShape {
                id: 0,
                kind: ShapeKind::Disc { radius: 0.6 },
                type_tag: "big".into(),
                pose: Pose2::IDENTITY,
            }],
            static_obstacles: vec![],
            margin: 0.0,
        }
    }

    #[test]
    fn straight_arm_end_effector() {
        let r = arm([0.5, -1.0]);
        let k = forward_kinematics(&r, &Configuration::new(vec![0.0, 0.0])).unwrap();
        assert!((k.end_effector.x - 2.5).abs() < 1e-12 && (k.end_effector.y + 1.0).abs() < 1e-12);
        let k = forward_kinematics(&r, &Configuration::new(vec![PI / 2.0, 0.0])).unwrap();
        assert!((k.end_effector.x - 0.5).abs() < 1e-12 && (k.end_effector.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fk_dimension_mismatch() {
        let r = arm([0.0, 0.0]);
        assert!(matches!(
            forward_kinematics(&r, &Configuration::new(vec![0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reach_bound_over_random_configurations() {
        let r = RobotModel {
            link_lengths: vec![0.4, 0.7, 0.2],
            ..arm([0.3, 0.2])
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let q = Configuration::new((0..3).map(|_| rng.gen_range(-PI..PI)).collect::<Vec<_>>());
            let ee = forward_kinematics(&r, &q).unwrap().end_effector;
            let d = ((ee.x - 0.3).powi(2) + (ee.y - 0.2).powi(2)).sqrt();
            assert!(d <= 1.3 + 1e-12);
        }
    }

    #[test]
    fn fk_is_bit_identical() {
        let r = arm([0.1, 0.2]);
        let q = Configuration::new(vec![0.3, -1.1]);
        assert_eq!(forward_kinematics(&r, &q).unwrap(), forward_kinematics(&r, &q).unwrap());
    }

    #[test]
    fn disjoint_workspaces_never_collide() {
        let w = world(vec![arm([0.0, 0.0]), arm([5.0, 0.0])]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let qa = Configuration::new(vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
            let qb = Configuration::new(vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
            assert!(!w.in_collision(&Placement::new(0, qa, None), &Placement::new(1, qb, None)));
        }
    }

    #[test]
    fn facing_extended_arms_collide() {
        // Reaches 2 + 2 > base distance 3.5: tips overlap by 0.5.
        let w = world(vec![arm([0.0, 0.0]), arm([3.5, 0.0])]);
        let a = Placement::new(0, Configuration::new(vec![0.0, 0.0]), None);
        let b = Placement::new(1, Configuration::new(vec![PI, 0.0]), None);
        assert!(w.in_collision(&a, &b));
        assert!(w.in_collision(&b, &a));
    }

    #[test]
    fn attachment_bridges_gap() {
        // Tips at x=2 and x=2.5, capsules 0.4 apart; a 0.6 disc centered on
        // the tip of robot 0 reaches x=2.6, past robot 1's capsule edge at 2.45.
        let w = world(vec![arm([0.0, 0.0]), arm([4.5, 0.0])]);
        let qa = Configuration::new(vec![0.0, 0.0]);
        let qb = Configuration::new(vec![PI, 0.0]);
        let ee = w.end_effector(0, &qa);
        let att = Attached::at(0, &ee, &ee);
        let free = w.in_collision(&Placement::new(0, qa.clone(), None), &Placement::new(1, qb.clone(), None));
        let hit = w.in_collision(&Placement::new(0, qa, Some(att)), &Placement::new(1, qb, None));
        assert!(!free && hit);
    }

    #[test]
    fn static_obstacle_blocks_path() {
        let mut w = world(vec![arm([0.0, 0.0])]);
        w.static_obstacles.push(Obstacle {
            pose: Pose2::new(0.0, 1.5, 0.0),
            width: 0.2,
            height: 0.2,
        });
        let from = Configuration::new(vec![0.0, 0.0]);
        let to = Configuration::new(vec![PI, 0.0]);
        assert!(!w.path_clear(0, None, &from, &to, 0.05, &[]));
        let to2 = Configuration::new(vec![-PI / 2.0, 0.0]);
        assert!(w.path_clear(0, None, &from, &to2, 0.05, &[]));
    }
}
