//! White-box controllers that execute contact plans exactly.
//!
//! These read the environment's own state and command the motions its step
//! arithmetic will reproduce bit for bit: swing effectors land on their
//! goals at command expiry, intents mirror the commanded indicators, and the
//! base (or object) arrives inside the achievement radius at every switch.
//! A correct planner/environment/metric stack therefore shows exactly zero
//! plan deviation under these controllers, which is the end-to-end oracle
//! the whole pipeline is validated against before any learning.

use alloc::vec::Vec;

use crate::env::{Environment, LocoEnv, ManipEnv};
use crate::error::CoreError;
use crate::gait::NUM_FEET;
use crate::manip::{surface_point, NUM_HANDS};
use crate::math::{wrap_angle, Vec2};

/// Time slack below which a pursuit switches to its exact final step.
const FINAL_STEP_SLACK: f64 = 1e-9;

fn centroid(points: &[Vec2]) -> Vec2 {
    let mut c = Vec2::ZERO;
    for p in points {
        c += *p;
    }
    c * (1.0 / points.len() as f64)
}

/// Quadruped plan executor; see the module docs.
pub fn loco_oracle_action(env: &LocoEnv) -> Result<Vec<f64>, CoreError> {
    let cfg = env.cfg();
    let dt = cfg.dt;
    let windows = env.windows();
    let s_pre = env.tracker().s_remaining();
    let base = env.base();
    let mut action = alloc::vec![0.0; env.action_dim()];

    // intents mirror the commanded indicators
    for f in 0..NUM_FEET {
        action[3 + 2 * NUM_FEET + f] = if windows[f].current.in_contact {
            1.0
        } else {
            -1.0
        };
    }

    // base twist: arrive at the current goal centroid by expiry; before an
    // all-feet flight slot, arrive carrying the velocity the ballistic
    // phase must hold
    let cur_points: Vec<Vec2> = windows.iter().map(|w| w.current.point).collect();
    let cur_centroid = centroid(&cur_points);
    let all_contact = windows.iter().all(|w| w.current.in_contact);
    let next_none = windows.iter().all(|w| !w.next.in_contact);
    let v_world = if all_contact && next_none {
        // stance slot with a flight slot ahead
        let next_points: Vec<Vec2> = windows.iter().map(|w| w.next.point).collect();
        let next_centroid = centroid(&next_points);
        let flight_duration = windows[0].next.duration;
        let v_required = (next_centroid - cur_centroid) * (1.0 / flight_duration);
        if s_pre > dt + FINAL_STEP_SLACK {
            let waypoint = cur_centroid - v_required * dt;
            (waypoint - base.pos) * (1.0 / (s_pre - dt))
        } else {
            v_required
        }
    } else {
        (cur_centroid - base.pos) * (1.0 / s_pre.max(dt))
    };
    let v_base = base.inverse_rotate(v_world);
    action[0] = (v_base.x / cfg.max_base_speed).clamp(-1.0, 1.0);
    action[1] = (v_base.y / cfg.max_base_speed).clamp(-1.0, 1.0);
    let omega = match env.params().steering {
        crate::gait::Steering::YawRate(w) => w,
        crate::gait::Steering::Heading(_) => 0.0,
    };
    action[2] = (omega / cfg.max_base_yaw_rate).clamp(-1.0, 1.0);

    // swing feet pursue their touchdown targets in the frame the base will
    // occupy after this step, landing exactly at expiry; a foot commanded
    // into contact but not yet attached must finish the move this very step
    // (free feet are carried by the base frame while detached)
    let twist = env.scaled_twist(&action);
    let base_new = env.preview_base_motion(twist);
    let attached = env.attached();
    let feet = env.feet();
    for f in 0..NUM_FEET {
        let cmd_contact = windows[f].current.in_contact;
        if attached[f] && cmd_contact {
            continue;
        }
        let fb_target = base_new.inverse_apply(windows[f].current.point);
        let fb_now = base.inverse_apply(feet[f]);
        let horizon = if !cmd_contact && s_pre > dt + FINAL_STEP_SLACK {
            s_pre
        } else {
            dt
        };
        let v = (fb_target - fb_now) * (1.0 / horizon);
        action[3 + 2 * f] = (v.x / cfg.max_foot_speed).clamp(-1.0, 1.0);
        action[3 + 2 * f + 1] = (v.y / cfg.max_foot_speed).clamp(-1.0, 1.0);
    }
    Ok(action)
}

/// Bimanual plan executor; see the module docs.
pub fn manip_oracle_action(env: &ManipEnv) -> Result<Vec<f64>, CoreError> {
    let cfg = env.cfg();
    let dt = cfg.dt;
    let windows = env.windows();
    let s_pre = env.tracker().s_remaining();
    let mut action = alloc::vec![0.0; env.action_dim()];
    let hold_slot = windows[0].current.in_contact;
    let hands = env.hands();
    let attached = env.attached();

    for h in 0..NUM_HANDS {
        action[2 * NUM_HANDS + h] = if windows[h].current.in_contact {
            1.0
        } else {
            -1.0
        };
    }

    if !hold_slot {
        if attached[0] || attached[1] {
            // first tick after a hold: motion still sees the attachments, so
            // command stillness and let the intents break contact cleanly
            return Ok(action);
        }
        // free flight: converge on the live grasp points by expiry
        for h in 0..NUM_HANDS {
            let target = env.live_contact_point(h)?;
            let horizon = if s_pre > dt + FINAL_STEP_SLACK { s_pre } else { dt };
            let v = (target - hands[h]) * (1.0 / horizon);
            action[2 * h] = (v.x / cfg.max_hand_speed).clamp(-1.0, 1.0);
            action[2 * h + 1] = (v.y / cfg.max_hand_speed).clamp(-1.0, 1.0);
        }
        return Ok(action);
    }

    if !(attached[0] && attached[1]) {
        // first hold tick: hands already sit on their grasp points, the
        // intents attach them; command no motion
        return Ok(action);
    }

    // rotate/translate the object toward the slot goal, arriving at expiry
    let goal = env.current_pose_goal();
    let obj = env.object_pose();
    let frac = if s_pre > dt + FINAL_STEP_SLACK {
        dt / s_pre
    } else {
        1.0
    };
    let step_pose = crate::math::Pose2 {
        pos: obj.pos + (goal.position - obj.pos) * frac,
        theta: obj.theta + wrap_angle(goal.angle - obj.theta) * frac,
    };
    let contacts = env.current_contacts();
    for h in 0..NUM_HANDS {
        let q = surface_point(&cfg.object, step_pose, &contacts[h])?;
        let v = (q - hands[h]) * (1.0 / dt);
        action[2 * h] = (v.x / cfg.max_hand_speed).clamp(-1.0, 1.0);
        action[2 * h + 1] = (v.y / cfg.max_hand_speed).clamp(-1.0, 1.0);
    }
    Ok(action)
}
