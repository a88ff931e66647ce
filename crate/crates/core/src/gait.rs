//! Locomotion contact-plan generation.
//!
//! A gait is a periodic per-foot contact template; plan geometry comes from
//! sampled stride/stance/offset parameters and a steering mode (fixed heading
//! or constant yaw rate).  Footfalls are laid out along the reference path so
//! that a foot touching down at slot `k` lands under the hips of the
//! reference pose at slot `k`.
//!
//! Foot order everywhere: LF, RF, LH, RH.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::contact::{ContactGoal, ContactPlan};
use crate::error::CoreError;
use crate::math::{atan2, cos, fabs, hypot, sin, Pose2, Vec2};
use crate::rng::{rng_from_seed, uniform};

pub const NUM_FEET: usize = 4;
pub const FOOT_NAMES: [&str; NUM_FEET] = ["LF", "RF", "LH", "RH"];

/// Quadruped gait selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GaitType {
    /// Diagonal pairs alternate: {LF, RH} vs {RF, LH}.
    Trot,
    /// Lateral pairs alternate: {LF, LH} vs {RF, RH}.
    Pace,
    /// Front and hind pairs alternate: {LF, RF} vs {LH, RH}.
    Bound,
    /// All feet alternate together (stance slot, flight slot).
    Jump,
    /// One foot swings per slot, in the order LF, RH, RF, LH.
    Crawl,
}

impl GaitType {
    pub const ALL: [GaitType; 5] = [
        GaitType::Trot,
        GaitType::Pace,
        GaitType::Bound,
        GaitType::Jump,
        GaitType::Crawl,
    ];

    /// Template period in slots.
    pub fn period(self) -> usize {
        match self {
            GaitType::Crawl => 4,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GaitType::Trot => "trot",
            GaitType::Pace => "pace",
            GaitType::Bound => "bound",
            GaitType::Jump => "jump",
            GaitType::Crawl => "crawl",
        }
    }

    pub fn from_name(s: &str) -> Option<GaitType> {
        Self::ALL.iter().copied().find(|g| g.name() == s)
    }
}

/// Commanded contact indicator per foot for one template slot.
pub fn gait_template(gait: GaitType, slot: usize) -> [bool; NUM_FEET] {
    match gait {
        GaitType::Trot => {
            let even = slot % 2 == 0;
            [even, !even, !even, even]
        }
        GaitType::Pace => {
            let even = slot % 2 == 0;
            [even, !even, even, !even]
        }
        GaitType::Bound => {
            let even = slot % 2 == 0;
            [even, even, !even, !even]
        }
        GaitType::Jump => {
            let even = slot % 2 == 0;
            [even; NUM_FEET]
        }
        GaitType::Crawl => {
            // swing order LF, RH, RF, LH
            let swing = match slot % 4 {
                0 => 0,
                1 => 3,
                2 => 1,
                _ => 2,
            };
            let mut t = [true; NUM_FEET];
            t[swing] = false;
            t
        }
    }
}

/// Steering command for the reference path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Steering {
    /// Straight-line travel direction relative to the base frame; the base
    /// orientation stays fixed.
    Heading(f64),
    /// Constant yaw rate in rad/s; the base follows the resulting arc.
    YawRate(f64),
}

/// Sampling mode for [`sample_gait_params`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteeringMode {
    Heading,
    YawRate,
}

/// Sampling ranges for the gait parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitRanges {
    pub stride: (f64, f64),
    pub stance_width: (f64, f64),
    /// Per-foot offsets are sampled from `(-offset, offset)` in each axis.
    pub offset: f64,
    pub duration: (f64, f64),
    pub heading: (f64, f64),
    pub yaw_rate: (f64, f64),
}

impl Default for GaitRanges {
    fn default() -> Self {
        GaitRanges {
            stride: (0.0, 0.3),
            stance_width: (0.1, 0.3),
            offset: 0.15,
            duration: (0.34, 0.36),
            heading: (-crate::math::PI, crate::math::PI),
            yaw_rate: (-crate::math::PI, crate::math::PI),
        }
    }
}

/// Sampled geometry and timing of a locomotion plan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitParams {
    /// Stride length per pair: `[front, hind]`.
    pub stride: [f64; 2],
    /// Stance width per pair: `[front, hind]`.
    pub stance_width: [f64; 2],
    pub steering: Steering,
    /// Constant per-foot placement offsets in the reference frame.
    pub foot_offsets: [Vec2; NUM_FEET],
    /// Command duration per slot, seconds.
    pub duration: f64,
}

impl GaitParams {
    /// Reference-path advance per gait cycle: the mean of the pair strides.
    pub fn path_stride(&self) -> f64 {
        0.5 * (self.stride[0] + self.stride[1])
    }
}

/// Draw a parameter set; the same seed always produces the same set.
pub fn sample_gait_params(seed: u64, mode: SteeringMode, ranges: &GaitRanges) -> GaitParams {
    let mut rng = rng_from_seed(seed);
    let stride = [
        uniform(&mut rng, ranges.stride.0, ranges.stride.1),
        uniform(&mut rng, ranges.stride.0, ranges.stride.1),
    ];
    let stance_width = [
        uniform(&mut rng, ranges.stance_width.0, ranges.stance_width.1),
        uniform(&mut rng, ranges.stance_width.0, ranges.stance_width.1),
    ];
    let steering = match mode {
        SteeringMode::Heading => {
            Steering::Heading(uniform(&mut rng, ranges.heading.0, ranges.heading.1))
        }
        SteeringMode::YawRate => {
            Steering::YawRate(uniform(&mut rng, ranges.yaw_rate.0, ranges.yaw_rate.1))
        }
    };
    let mut foot_offsets = [Vec2::ZERO; NUM_FEET];
    for off in &mut foot_offsets {
        off.x = uniform(&mut rng, -ranges.offset, ranges.offset);
        off.y = uniform(&mut rng, -ranges.offset, ranges.offset);
    }
    let duration = uniform(&mut rng, ranges.duration.0, ranges.duration.1);
    GaitParams {
        stride,
        stance_width,
        steering,
        foot_offsets,
        duration,
    }
}

/// Hip anchors, leg workspace radius and terrain bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FootLayout {
    /// Hip anchor per foot in the base frame.
    pub hip: [Vec2; NUM_FEET],
    /// Maximum hip-to-foot distance before a stance foot slips.
    pub r_leg: f64,
    /// Footfalls must land within this square half-extent around the origin.
    pub terrain_half_extent: f64,
}

impl Default for FootLayout {
    fn default() -> Self {
        FootLayout {
            hip: [
                Vec2::new(0.2, 0.15),
                Vec2::new(0.2, -0.15),
                Vec2::new(-0.2, 0.15),
                Vec2::new(-0.2, -0.15),
            ],
            r_leg: 1.5,
            terrain_half_extent: 5.0,
        }
    }
}

impl FootLayout {
    /// The workspace radius must cover the farthest nominal footfall the
    /// given ranges can produce.
    pub fn validate(&self, ranges: &GaitRanges) -> Result<(), CoreError> {
        let worst_lateral = ranges.stance_width.1 / 2.0 + ranges.offset;
        let worst = hypot(ranges.offset, worst_lateral);
        if self.r_leg <= worst {
            return Err(CoreError::Config(format!(
                "r_leg {} does not cover nominal footfall distance {worst}",
                self.r_leg
            )));
        }
        if !(self.terrain_half_extent > 0.0) {
            return Err(CoreError::Config(String::from("terrain bound must be > 0")));
        }
        Ok(())
    }

    /// Lateral sign per foot: left feet displace +y, right feet -y.
    pub fn lateral_sign(foot: usize) -> f64 {
        if foot % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Pair index per foot: 0 front (LF, RF), 1 hind (LH, RH).
    pub fn pair(foot: usize) -> usize {
        foot / 2
    }

    /// Local anchor of a foot for the given parameters: hip, displaced
    /// laterally by half the pair's stance width, plus the foot's offset.
    pub fn local_anchor(&self, foot: usize, params: &GaitParams) -> Vec2 {
        let hip = self.hip[foot];
        let lat = Self::lateral_sign(foot) * params.stance_width[Self::pair(foot)] / 2.0;
        Vec2::new(hip.x, hip.y + lat) + params.foot_offsets[foot]
    }
}

/// Reference base pose at the start of slot `k`: the start pose advanced
/// along the commanded path by `k * path_stride / slots_per_cycle`.
pub fn reference_pose(
    params: &GaitParams,
    start: Pose2,
    slot: usize,
    slots_per_cycle: usize,
) -> Pose2 {
    let adv = params.path_stride() / slots_per_cycle as f64;
    let k = slot as f64;
    match params.steering {
        Steering::Heading(h) => {
            let dir_world = Vec2::new(cos(start.theta + h), sin(start.theta + h));
            Pose2 {
                pos: start.pos + dir_world * (k * adv),
                theta: start.theta,
            }
        }
        Steering::YawRate(omega) => {
            let t = k * params.duration;
            let speed = adv / params.duration;
            if fabs(omega) < 1e-9 {
                let dir_world = Vec2::new(cos(start.theta), sin(start.theta));
                Pose2 {
                    pos: start.pos + dir_world * (speed * t),
                    theta: start.theta,
                }
            } else {
                let th = start.theta + omega * t;
                let r = speed / omega;
                Pose2 {
                    pos: start.pos
                        + Vec2::new(
                            r * (sin(th) - sin(start.theta)),
                            r * (cos(start.theta) - cos(th)),
                        ),
                    theta: th,
                }
            }
        }
    }
}

/// World footfall per foot for a contact made at slot `k`.
pub fn footfall_locations(
    params: &GaitParams,
    layout: &FootLayout,
    slot: usize,
    start_pose: Pose2,
    slots_per_cycle: usize,
) -> Result<[Vec2; NUM_FEET], CoreError> {
    let rp = reference_pose(params, start_pose, slot, slots_per_cycle);
    let mut out = [Vec2::ZERO; NUM_FEET];
    for foot in 0..NUM_FEET {
        let p = rp.apply(layout.local_anchor(foot, params));
        let b = layout.terrain_half_extent;
        if fabs(p.x) > b || fabs(p.y) > b {
            return Err(CoreError::PlanInfeasible(format!(
                "footfall for {} at slot {slot} lands at ({}, {}) outside terrain bound {b}",
                FOOT_NAMES[foot], p.x, p.y
            )));
        }
        out[foot] = p;
    }
    Ok(out)
}

/// Assemble a full locomotion plan: indicators from the gait template, points
/// from the footfall geometry. During swing slots the point targets the next
/// touchdown, so the goal window always carries two meaningful switches.
pub fn build_plan(
    gait: GaitType,
    params: &GaitParams,
    layout: &FootLayout,
    horizon: usize,
    start_pose: Pose2,
) -> Result<ContactPlan, CoreError> {
    if horizon < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "plan horizon must be >= 2, got {horizon}"
        )));
    }
    let spc = gait.period();
    // Footfalls may be needed up to one period past the horizon for trailing
    // swing slots.
    let mut falls = Vec::with_capacity(horizon + spc);
    for slot in 0..horizon + spc {
        falls.push(footfall_locations(params, layout, slot, start_pose, spc)?);
    }
    let mut goals: Vec<Vec<ContactGoal>> = Vec::with_capacity(NUM_FEET);
    for foot in 0..NUM_FEET {
        let mut seq = Vec::with_capacity(horizon);
        for slot in 0..horizon {
            let in_contact = gait_template(gait, slot)[foot];
            let point = if in_contact {
                // touchdown slot = first slot of this stance stretch
                let mut td = slot;
                while td > 0 && gait_template(gait, td - 1)[foot] {
                    td -= 1;
                }
                falls[td][foot]
            } else {
                // next touchdown within one period
                let mut td = slot + 1;
                while !gait_template(gait, td)[foot] {
                    td += 1;
                }
                falls[td][foot]
            };
            seq.push(ContactGoal::new(point, in_contact, params.duration)?);
        }
        goals.push(seq);
    }
    ContactPlan::new(
        FOOT_NAMES.iter().map(|n| n.to_string()).collect(),
        goals,
    )
}

/// Outcome details of the velocity-to-parameters mapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityMapInfo {
    /// Stride the commanded velocity asks for before capping.
    pub requested_stride: f64,
    /// The requested stride exceeded the stride range and was capped.
    pub capped: bool,
    /// Speed the capped stride actually realizes at this cycle time; equals
    /// the command when uncapped. A longer cycle (more slots or a longer
    /// duration) would restore the commanded speed.
    pub achievable_speed: f64,
}

/// Map a commanded planar base velocity to plan parameters: heading from the
/// velocity direction, stride so that the mean base progression over one
/// cycle equals the command. Strides above the training range are capped and
/// flagged.
pub fn velocity_to_params(
    vx: f64,
    vy: f64,
    duration: f64,
    slots_per_cycle: usize,
) -> Result<(GaitParams, VelocityMapInfo), CoreError> {
    if !(duration > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    let speed = hypot(vx, vy);
    let heading = atan2(vy, vx);
    let cycle_time = slots_per_cycle as f64 * duration;
    let requested = speed * cycle_time;
    let max_stride = GaitRanges::default().stride.1;
    let capped = requested > max_stride;
    let stride = if capped { max_stride } else { requested };
    let params = GaitParams {
        stride: [stride, stride],
        stance_width: [0.2, 0.2],
        steering: Steering::Heading(heading),
        foot_offsets: [Vec2::ZERO; NUM_FEET],
        duration,
    };
    Ok((
        params,
        VelocityMapInfo {
            requested_stride: requested,
            capped,
            achievable_speed: stride / cycle_time,
        },
    ))
}
