//! Bimanual manipulation plan generation.
//!
//! Two tasks over planar object shapes: Repose (grab two opposing surfaces
//! once and track a stream of sampled pose targets without letting go) and
//! Reorient (repeatedly grasp, rotate the object 45 degrees on the table,
//! and release). Hands approach along the table +y/-y axes; grasp surfaces
//! are chosen as the opposing pair best aligned with those axes at the pose
//! where the grasp happens.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::contact::{ContactGoal, ContactPlan};
use crate::error::CoreError;
use crate::math::{cos, fabs, hypot, sin, wrap_angle, Pose2, Vec2, PI};
use crate::rng::{rng_from_seed, uniform};

pub const NUM_HANDS: usize = 2;
pub const HAND_NAMES: [&str; NUM_HANDS] = ["left_hand", "right_hand"];

/// Targets farther than this from the table origin are rejected.
pub const WORKSPACE_HALF_EXTENT: f64 = 1.0;

/// Planar object shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObjectSpec {
    /// Axis-aligned rectangle (in its own frame) with the given half-extents.
    Box { half_extents: Vec2 },
    /// Circle of the given radius; contacts parameterize the rim.
    Disc { radius: f64 },
    /// Regular polygon with rounded corners: a core polygon of the given
    /// circumradius grown by the corner radius. Flat segments are the
    /// contactable faces.
    RoundedPolygon {
        sides: usize,
        core_circumradius: f64,
        corner_radius: f64,
    },
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        match *self {
            ObjectSpec::Box { half_extents } => {
                if !(half_extents.x > 0.0) || !(half_extents.y > 0.0) {
                    return Err(CoreError::InvalidArgument(format!(
                        "box half-extents must be positive, got ({}, {})",
                        half_extents.x, half_extents.y
                    )));
                }
            }
            ObjectSpec::Disc { radius } => {
                if !(radius > 0.0) {
                    return Err(CoreError::InvalidArgument(format!(
                        "disc radius must be positive, got {radius}"
                    )));
                }
            }
            ObjectSpec::RoundedPolygon {
                sides,
                core_circumradius,
                corner_radius,
            } => {
                if sides < 3 {
                    return Err(CoreError::InvalidArgument(format!(
                        "rounded polygon needs >= 3 sides, got {sides}"
                    )));
                }
                if !(core_circumradius > 0.0) || !(corner_radius >= 0.0) {
                    return Err(CoreError::InvalidArgument(String::from(
                        "rounded polygon radii must be positive",
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of flat faces (the disc has none; its rim is continuous).
    pub fn num_faces(&self) -> usize {
        match *self {
            ObjectSpec::Box { .. } => 4,
            ObjectSpec::Disc { .. } => 0,
            ObjectSpec::RoundedPolygon { sides, .. } => sides,
        }
    }

    /// Outward normal angle of a face in the object frame.
    fn face_normal_angle(&self, face: usize) -> f64 {
        match *self {
            ObjectSpec::Box { .. } => face as f64 * PI / 2.0,
            ObjectSpec::RoundedPolygon { sides, .. } => face as f64 * 2.0 * PI / sides as f64,
            ObjectSpec::Disc { .. } => 0.0,
        }
    }

    /// Distance from the object origin to a face's flat surface.
    fn face_depth(&self, face: usize) -> f64 {
        match *self {
            ObjectSpec::Box { half_extents } => {
                if face % 2 == 0 {
                    half_extents.x
                } else {
                    half_extents.y
                }
            }
            ObjectSpec::RoundedPolygon {
                sides,
                core_circumradius,
                corner_radius,
            } => core_circumradius * cos(PI / sides as f64) + corner_radius,
            ObjectSpec::Disc { .. } => 0.0,
        }
    }

    /// Half-length of a face's flat surface along its tangent.
    pub fn face_half_extent(&self, face: usize) -> f64 {
        match *self {
            ObjectSpec::Box { half_extents } => {
                if face % 2 == 0 {
                    half_extents.y
                } else {
                    half_extents.x
                }
            }
            ObjectSpec::RoundedPolygon {
                sides,
                core_circumradius,
                ..
            } => core_circumradius * sin(PI / sides as f64),
            ObjectSpec::Disc { .. } => 0.0,
        }
    }

    /// Signed distance from a point in the object frame to the boundary
    /// (positive outside).
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        match *self {
            ObjectSpec::Box { half_extents } => {
                let qx = fabs(p.x) - half_extents.x;
                let qy = fabs(p.y) - half_extents.y;
                let ox = qx.max(0.0);
                let oy = qy.max(0.0);
                hypot(ox, oy) + qx.max(qy).min(0.0)
            }
            ObjectSpec::Disc { radius } => p.norm() - radius,
            ObjectSpec::RoundedPolygon {
                sides,
                core_circumradius,
                corner_radius,
            } => {
                // signed distance to the core polygon, shrunk by the corner
                // radius
                let n = sides;
                let apothem = core_circumradius * cos(PI / n as f64);
                let mut max_plane = f64::NEG_INFINITY;
                for k in 0..n {
                    let a = self.face_normal_angle(k);
                    let d = p.dot(Vec2::new(cos(a), sin(a))) - apothem;
                    max_plane = max_plane.max(d);
                }
                let core = if max_plane <= 0.0 {
                    max_plane
                } else {
                    let mut best = f64::INFINITY;
                    for k in 0..n {
                        let va = vertex(core_circumradius, n, k);
                        let vb = vertex(core_circumradius, n, k + 1);
                        best = best.min(segment_distance(p, va, vb));
                    }
                    best
                };
                core - corner_radius
            }
        }
    }
}

fn vertex(circumradius: f64, sides: usize, k: usize) -> Vec2 {
    let a = 2.0 * PI * k as f64 / sides as f64 - PI / sides as f64;
    Vec2::new(circumradius * cos(a), circumradius * sin(a))
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let denom = ab.dot(ab);
    let t = if denom > 0.0 {
        (p - a).dot(ab).clamp(0.0, denom) / denom
    } else {
        0.0
    };
    p.dist(a + ab * t)
}

/// Where on the object's surface a contact lives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfaceContact {
    /// Flat-face contact: face index plus a tangential offset from the face
    /// center.
    Face { face: usize, offset: f64 },
    /// Rim contact on a disc, parameterized by the object-frame angle.
    Rim { angle: f64 },
}

/// World location of a surface contact under the given object pose.
pub fn surface_point(
    spec: &ObjectSpec,
    pose: Pose2,
    contact: &SurfaceContact,
) -> Result<Vec2, CoreError> {
    let local = match (*spec, contact) {
        (ObjectSpec::Disc { radius }, SurfaceContact::Rim { angle }) => {
            Vec2::new(radius * cos(*angle), radius * sin(*angle))
        }
        (ObjectSpec::Disc { .. }, SurfaceContact::Face { .. }) => {
            return Err(CoreError::InvalidArgument(String::from(
                "disc surfaces are parameterized by rim angle, not faces",
            )))
        }
        (_, SurfaceContact::Rim { .. }) => {
            return Err(CoreError::InvalidArgument(String::from(
                "rim contacts only apply to discs",
            )))
        }
        (spec, SurfaceContact::Face { face, offset }) => {
            if *face >= spec.num_faces() {
                return Err(CoreError::InvalidArgument(format!(
                    "face {face} out of range (object has {})",
                    spec.num_faces()
                )));
            }
            if fabs(*offset) > spec.face_half_extent(*face) {
                return Err(CoreError::InvalidArgument(format!(
                    "offset {offset} exceeds face extent {}",
                    spec.face_half_extent(*face)
                )));
            }
            let a = spec.face_normal_angle(*face);
            let normal = Vec2::new(cos(a), sin(a));
            let tangent = Vec2::new(-normal.y, normal.x);
            normal * spec.face_depth(*face) + tangent * *offset
        }
    };
    Ok(pose.apply(local))
}

/// Pick the opposing surface pair best aligned with the hands' approach axes
/// (+y for the first hand, -y for the second) at the given pose. Face-center
/// contacts; the two hands never share a surface.
pub fn opposing_grasp(
    spec: &ObjectSpec,
    pose: Pose2,
) -> Result<[SurfaceContact; 2], CoreError> {
    match *spec {
        ObjectSpec::Disc { .. } => {
            let top = wrap_angle(PI / 2.0 - pose.theta);
            let bottom = wrap_angle(-PI / 2.0 - pose.theta);
            Ok([
                SurfaceContact::Rim { angle: top },
                SurfaceContact::Rim { angle: bottom },
            ])
        }
        _ => {
            let n = spec.num_faces();
            if n % 2 != 0 {
                return Err(CoreError::InvalidArgument(format!(
                    "opposing grasp needs an even face count, got {n}"
                )));
            }
            let mut best_pair = 0;
            let mut best_score = f64::NEG_INFINITY;
            for k in 0..n / 2 {
                let world = pose.theta + spec.face_normal_angle(k);
                let score = fabs(sin(world));
                if score > best_score {
                    best_score = score;
                    best_pair = k;
                }
            }
            let (a, b) = (best_pair, best_pair + n / 2);
            // first hand takes the face whose outward normal points to +y
            let a_up = sin(pose.theta + spec.face_normal_angle(a)) >= 0.0;
            let (up, down) = if a_up { (a, b) } else { (b, a) };
            Ok([
                SurfaceContact::Face {
                    face: up,
                    offset: 0.0,
                },
                SurfaceContact::Face {
                    face: down,
                    offset: 0.0,
                },
            ])
        }
    }
}

/// A commanded object pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseGoal {
    pub position: Vec2,
    /// Wrapped to `(-pi, pi]`.
    pub angle: f64,
}

impl PoseGoal {
    pub fn new(position: Vec2, angle: f64) -> Self {
        PoseGoal {
            position,
            angle: wrap_angle(angle),
        }
    }

    pub fn pose(&self) -> Pose2 {
        Pose2 {
            pos: self.position,
            theta: self.angle,
        }
    }

    pub fn from_pose(p: Pose2) -> Self {
        Self::new(p.pos, p.theta)
    }
}

/// Sampling ranges for repose pose targets, relative to the start pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseRanges {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub yaw: (f64, f64),
}

impl PoseRanges {
    /// Ranges used for training.
    pub fn trained() -> Self {
        PoseRanges {
            x: (0.0, 0.1),
            y: (-0.15, 0.15),
            yaw: (-0.6, 0.6),
        }
    }

    /// Wider out-of-distribution evaluation ranges.
    pub fn evaluated() -> Self {
        PoseRanges {
            x: (0.0, 0.2),
            y: (-0.3, 0.3),
            yaw: (-1.2, 1.2),
        }
    }
}

/// A manipulation plan: contact sequences for both hands plus the aligned
/// pose-goal and grasp-geometry schedules.
#[derive(Clone, Debug)]
pub struct ManipPlan {
    pub plan: ContactPlan,
    /// The distinct commanded targets, in order.
    pub pose_goals: Vec<PoseGoal>,
    /// Commanded object pose per slot (what the achievement test checks).
    pub slot_pose_goals: Vec<PoseGoal>,
    /// Grasp geometry per slot per hand; swing slots carry the upcoming
    /// grasp.
    pub slot_contacts: Vec<[SurfaceContact; 2]>,
    pub object: ObjectSpec,
    pub start_pose: Pose2,
}

fn hand_goal_row(
    points: &[(Vec2, bool, f64)],
) -> Result<Vec<ContactGoal>, CoreError> {
    points
        .iter()
        .map(|&(p, c, d)| ContactGoal::new(p, c, d))
        .collect()
}

fn check_workspace(p: Vec2) -> Result<(), CoreError> {
    if fabs(p.x) > WORKSPACE_HALF_EXTENT || fabs(p.y) > WORKSPACE_HALF_EXTENT {
        return Err(CoreError::PlanInfeasible(format!(
            "pose target ({}, {}) outside workspace bound {WORKSPACE_HALF_EXTENT}",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Sustained two-hand hold tracking `n_targets` sampled pose goals.
///
/// Slot 0 is the initial reach (both hands free, converging on the grasp
/// surfaces); every later slot commands contact for both hands. Hold-slot
/// contact points are pinned where the grasp is made for the attach slot and
/// follow the slot's pose target afterwards.
pub fn repose_plan(
    spec: &ObjectSpec,
    start_pose: Pose2,
    n_targets: usize,
    ranges: &PoseRanges,
    seed: u64,
) -> Result<ManipPlan, CoreError> {
    spec.validate()?;
    if n_targets == 0 {
        return Err(CoreError::InvalidArgument(String::from(
            "repose needs at least one pose target",
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut targets = Vec::with_capacity(n_targets);
    for _ in 0..n_targets {
        let dx = uniform(&mut rng, ranges.x.0, ranges.x.1);
        let dy = uniform(&mut rng, ranges.y.0, ranges.y.1);
        let dyaw = uniform(&mut rng, ranges.yaw.0, ranges.yaw.1);
        let goal = PoseGoal::new(start_pose.pos + Vec2::new(dx, dy), start_pose.theta + dyaw);
        check_workspace(goal.position)?;
        targets.push(goal);
    }
    let contacts = opposing_grasp(spec, start_pose)?;
    let n_slots = 1 + n_targets;
    let mut durations = Vec::with_capacity(n_slots);
    for _ in 0..n_slots {
        durations.push(uniform(&mut rng, 1.0, 1.5));
    }

    let start_points = [
        surface_point(spec, start_pose, &contacts[0])?,
        surface_point(spec, start_pose, &contacts[1])?,
    ];
    let mut rows: [Vec<(Vec2, bool, f64)>; NUM_HANDS] = [Vec::new(), Vec::new()];
    let mut slot_pose_goals = Vec::with_capacity(n_slots);
    let mut slot_contacts = Vec::with_capacity(n_slots);
    for slot in 0..n_slots {
        let (points, in_contact, goal) = if slot == 0 {
            (start_points, false, PoseGoal::from_pose(start_pose))
        } else if slot == 1 {
            // the grasp is made here, with the object still at its start pose
            (start_points, true, targets[0])
        } else {
            let target = targets[slot - 1];
            let pts = [
                surface_point(spec, target.pose(), &contacts[0])?,
                surface_point(spec, target.pose(), &contacts[1])?,
            ];
            (pts, true, target)
        };
        for hand in 0..NUM_HANDS {
            rows[hand].push((points[hand], in_contact, durations[slot]));
        }
        slot_pose_goals.push(goal);
        slot_contacts.push(contacts);
    }
    let plan = ContactPlan::new(
        HAND_NAMES.iter().map(|n| n.to_string()).collect(),
        alloc::vec![hand_goal_row(&rows[0])?, hand_goal_row(&rows[1])?],
    )?;
    Ok(ManipPlan {
        plan,
        pose_goals: targets,
        slot_pose_goals,
        slot_contacts,
        object: *spec,
        start_pose,
    })
}

/// Alternating grasp/rotate/release plan: each rotation contributes a reach
/// slot, a hold slot that turns the object 45 degrees, and a detach slot.
pub fn reorient_plan(
    spec: &ObjectSpec,
    start_pose: Pose2,
    n_rotations: usize,
    seed: u64,
) -> Result<ManipPlan, CoreError> {
    spec.validate()?;
    if n_rotations == 0 {
        return Err(CoreError::InvalidArgument(String::from(
            "reorient needs at least one rotation",
        )));
    }
    let mut rng = rng_from_seed(seed);
    let step = PI / 4.0;
    // grasp pose and geometry per rotation, plus one past the end for the
    // final detach slot's lookahead
    let mut grasp_poses = Vec::with_capacity(n_rotations + 1);
    let mut grasp_contacts = Vec::with_capacity(n_rotations + 1);
    for k in 0..=n_rotations {
        let pose = Pose2 {
            pos: start_pose.pos,
            theta: start_pose.theta + k as f64 * step,
        };
        grasp_contacts.push(opposing_grasp(spec, pose)?);
        grasp_poses.push(pose);
    }
    let targets: Vec<PoseGoal> = (0..n_rotations)
        .map(|k| PoseGoal::new(start_pose.pos, start_pose.theta + (k + 1) as f64 * step))
        .collect();

    let mut rows: [Vec<(Vec2, bool, f64)>; NUM_HANDS] = [Vec::new(), Vec::new()];
    let mut slot_pose_goals = Vec::new();
    let mut slot_contacts = Vec::new();
    for k in 0..n_rotations {
        let here = [
            surface_point(spec, grasp_poses[k], &grasp_contacts[k][0])?,
            surface_point(spec, grasp_poses[k], &grasp_contacts[k][1])?,
        ];
        let next = [
            surface_point(spec, grasp_poses[k + 1], &grasp_contacts[k + 1][0])?,
            surface_point(spec, grasp_poses[k + 1], &grasp_contacts[k + 1][1])?,
        ];
        let slots = [
            (here, false, PoseGoal::from_pose(grasp_poses[k]), grasp_contacts[k]),
            (here, true, targets[k], grasp_contacts[k]),
            (next, false, targets[k], grasp_contacts[k + 1]),
        ];
        for (points, in_contact, goal, contacts) in slots {
            let duration = uniform(&mut rng, 1.0, 1.5);
            for hand in 0..NUM_HANDS {
                rows[hand].push((points[hand], in_contact, duration));
            }
            slot_pose_goals.push(goal);
            slot_contacts.push(contacts);
        }
    }
    let plan = ContactPlan::new(
        HAND_NAMES.iter().map(|n| n.to_string()).collect(),
        alloc::vec![hand_goal_row(&rows[0])?, hand_goal_row(&rows[1])?],
    )?;
    Ok(ManipPlan {
        plan,
        pose_goals: targets,
        slot_pose_goals,
        slot_contacts,
        object: *spec,
        start_pose,
    })
}
