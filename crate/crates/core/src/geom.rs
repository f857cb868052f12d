//! Planar primitives: poses, inflated convex hulls and their distance queries.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = [f64; 2];

/// Planar rigid transform: translation plus heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    pub fn transform_point(&self, p: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// `self ∘ other`: apply `other` in the frame of `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let p = self.transform_point([other.x, other.y]);
        Pose2::new(p[0], p[1], wrap_angle(self.theta + other.theta))
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            wrap_angle(-self.theta),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Maps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    dot(d, d).sqrt()
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    (d1 > 0.0 && d2 < 0.0 || d1 < 0.0 && d2 > 0.0) && (d3 > 0.0 && d4 < 0.0 || d3 < 0.0 && d4 > 0.0)
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// A convex point set (1, 2 or 4 vertices, counter-clockwise) swept by a disc.
///
/// One vertex is a disc, two a capsule, four an inflated rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct Hull {
    pub pts: Vec<Point>,
    pub radius: f64,
}

impl Hull {
    pub fn disc(c: Point, radius: f64) -> Self {
        Self { pts: vec![c], radius }
    }

    pub fn capsule(a: Point, b: Point, radius: f64) -> Self {
        Self { pts: vec![a, b], radius }
    }

    /// Rectangle of size `width` × `height` centered at `pose`.
    pub fn rect(pose: &Pose2, width: f64, height: f64) -> Self {
        let (hw, hh) = (width / 2.0, height / 2.0);
        let pts = [[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]]
            .into_iter()
            .map(|p| pose.transform_point(p))
            .collect();
        Self { pts, radius: 0.0 }
    }

    pub fn aabb(&self) -> Aabb {
        let mut bb = Aabb::empty();
        for p in &self.pts {
            bb.expand_point(*p);
        }
        bb.inflate(self.radius)
    }

    fn contains_core_point(&self, p: Point) -> bool {
        if self.pts.len() < 3 {
            return false;
        }
        let n = self.pts.len();
        (0..n).all(|i| orient(self.pts[i], self.pts[(i + 1) % n], p) >= 0.0)
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.pts.len();
        let m = if n <= 2 { 1 } else { n };
        (0..m).map(move |i| (self.pts[i], self.pts[(i + 1) % n]))
    }

    /// Distance between the un-inflated cores.
    fn core_distance(&self, other: &Hull) -> f64 {
        if other.pts.iter().any(|p| self.contains_core_point(*p))
            || self.pts.iter().any(|p| other.contains_core_point(*p))
        {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                best = best.min(segment_segment_distance(a, b, c, d));
                if best == 0.0 {
                    return 0.0;
                }
            }
        }
        best
    }

    pub fn distance(&self, other: &Hull) -> f64 {
        (self.core_distance(other) - self.radius - other.radius).max(0.0)
    }

    /// True when the two shapes, each grown by `margin / 2`, overlap.
    pub fn overlaps(&self, other: &Hull, margin: f64) -> bool {
        self.core_distance(other) < self.radius + other.radius + margin
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    pub fn expand_point(&mut self, p: Point) {
        for k in 0..2 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn merge(&mut self, o: &Aabb) {
        self.expand_point(o.min);
        self.expand_point(o.max);
    }

    pub fn inflate(mut self, r: f64) -> Self {
        for k in 0..2 {
            self.min[k] -= r;
            self.max[k] += r;
        }
        self
    }

    pub fn intersects(&self, o: &Aabb, margin: f64) -> bool {
        self.min[0] <= o.max[0] + margin
            && o.min[0] <= self.max[0] + margin
            && self.min[1] <= o.max[1] + margin
            && o.min[1] <= self.max[1] + margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pose_inverse_roundtrip() {
        let p = Pose2::new(0.3, -1.2, 0.7);
        let id = p.compose(&p.inverse());
        assert!(id.x.abs() < 1e-12 && id.y.abs() < 1e-12 && id.theta.abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_have_zero_distance() {
        assert_eq!(segment_segment_distance([0., 0.], [1., 1.], [0., 1.], [1., 0.]), 0.0);
        let d = segment_segment_distance([0., 0.], [1., 0.], [0., 1.], [1., 1.]);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capsule_inside_rect_overlaps() {
        let r = Hull::rect(&Pose2::new(0.0, 0.0, 0.3), 1.0, 1.0);
        let c = Hull::capsule([0.0, 0.0], [0.1, 0.0], 0.01);
        assert!(r.overlaps(&c, 0.0));
        let far = Hull::disc([3.0, 0.0], 0.5);
        assert!(!r.overlaps(&far, 0.0));
    }
}
