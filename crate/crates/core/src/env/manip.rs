//! Tabletop bimanual environment: a planar object moved by rigidly attached
//! hands.
//!
//! Hands are kinematic point effectors. A positive intent attaches a hand
//! that is close enough to its commanded surface point, snapping it onto the
//! object. With both hands attached the object follows the unique planar
//! rigid transform that keeps the two attachment points coincident with the
//! commanded hand targets; with fewer than two attachments the object stays
//! put and an attached hand is simply pinned to its surface point.
//!
//! Step order mirrors the locomotion environment: scale action, move
//! (previous attachments), process intents, score rewards on the pre-tick
//! window, tick the tracker, build the observation.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{validate_action, Environment, StepInfo, StepOutcome};
use crate::contact::{achieved_manipulation, GoalTracker, GoalWindow};
use crate::error::CoreError;
use crate::manip::{
    reorient_plan, repose_plan, surface_point, ManipPlan, ObjectSpec, PoseGoal, PoseRanges,
    SurfaceContact, NUM_HANDS,
};
use crate::math::{angle_dist, fnv1a_str, wrap_angle, Pose2, Vec2};
use crate::reward::{
    bonus_reward, regularization_penalties, snapshots_from_windows, total_contact_reward,
    RewardConfig,
};
use crate::rng::{derive_seed, rng_from_seed, uniform, DetRng};

/// Which bimanual task the environment runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManipTask {
    /// Sustained two-hand hold tracking sampled pose targets.
    Repose {
        n_targets: usize,
        ranges: PoseRanges,
    },
    /// Repeated grasp / rotate-45-degrees / release.
    Reorient { n_rotations: usize },
}

#[derive(Clone, Debug)]
pub struct ManipConfig {
    pub dt: f64,
    pub object: ObjectSpec,
    pub task: ManipTask,
    /// Pose-achievement thresholds.
    pub tau_pos: f64,
    pub tau_rot: f64,
    pub reward: RewardConfig,
    /// A hand attaches when within this distance of its commanded surface
    /// point.
    pub eps_attach: f64,
    pub max_hand_speed: f64,
    /// Commanded hand speed above which an attachment counts as an impact.
    pub attach_impact_speed: f64,
    /// Hands start this far off their first grasp surfaces.
    pub hand_standoff: f64,
    pub step_limit: usize,
    pub reset_jitter_pos: f64,
    pub reset_jitter_theta: f64,
}

impl Default for ManipConfig {
    fn default() -> Self {
        ManipConfig {
            dt: 0.02,
            object: ObjectSpec::Box {
                half_extents: Vec2::new(0.1, 0.1),
            },
            task: ManipTask::Repose {
                n_targets: 4,
                ranges: PoseRanges::trained(),
            },
            tau_pos: 0.05,
            tau_rot: 0.1,
            reward: RewardConfig::default(),
            eps_attach: 0.03,
            max_hand_speed: 1.0,
            attach_impact_speed: 0.5,
            hand_standoff: 0.1,
            step_limit: 800,
            reset_jitter_pos: 0.01,
            reset_jitter_theta: 0.02,
        }
    }
}

impl ManipConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.dt > 0.0) {
            return Err(CoreError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        self.object.validate().map_err(|e| match e {
            CoreError::InvalidArgument(m) => CoreError::Config(m),
            other => other,
        })?;
        self.reward.validate()?;
        match self.task {
            ManipTask::Repose { n_targets, .. } if n_targets == 0 => {
                return Err(CoreError::Config(String::from("repose needs >= 1 target")))
            }
            ManipTask::Reorient { n_rotations } if n_rotations == 0 => {
                return Err(CoreError::Config(String::from(
                    "reorient needs >= 1 rotation",
                )))
            }
            _ => {}
        }
        for (name, v) in [
            ("tau_pos", self.tau_pos),
            ("tau_rot", self.tau_rot),
            ("eps_attach", self.eps_attach),
            ("max_hand_speed", self.max_hand_speed),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.step_limit == 0 {
            return Err(CoreError::Config(String::from("step limit must be > 0")));
        }
        Ok(())
    }
}

/// Action layout: per-hand velocity in the table frame (4), per-hand contact
/// intent (2).
pub const MANIP_ACTION_DIM: usize = 2 * NUM_HANDS + NUM_HANDS;

/// Observation layout, hands in left/right order: object position (2); object
/// orientation as cos/sin (2); object twist (3); hand positions (4); actual
/// contact flags (2); current indicators (2); next indicators (2); current
/// goal points (4); next goal points (4); hand-to-current-goal deltas (4);
/// commanded pose goal in the table frame (3); pose goal relative to the
/// object (3); remaining command time (1); current command duration (1).
pub const MANIP_OBS_DIM: usize = 37;

const MANIP_LAYOUT_DESC: &str = "manip/v1:obj_pos:2,obj_orient:2,obj_twist:3,hand_pos:4,\
hand_contact:2,cur_ind:2,next_ind:2,cur_goal:4,next_goal:4,goal_delta:4,goal_pose_abs:3,\
goal_pose_rel:3,s_remaining:1,duration:1|dim=37";

#[derive(Clone, Debug)]
struct ManipState {
    object: Pose2,
    obj_twist: [f64; 3],
    hands: [Vec2; NUM_HANDS],
    attached: [bool; NUM_HANDS],
    attach_contacts: [Option<SurfaceContact>; NUM_HANDS],
    tracker: GoalTracker,
    steps: usize,
    prev_action: Vec<f64>,
    done: bool,
}

/// The bimanual tabletop environment.
pub struct ManipEnv {
    cfg: ManipConfig,
    episode_rng: DetRng,
    plan_rng_base: u64,
    episode_index: u64,
    bundle: Option<ManipPlan>,
    state: Option<ManipState>,
}

impl ManipEnv {
    pub fn new(cfg: ManipConfig, seed: u64) -> Result<Self, CoreError> {
        cfg.validate()?;
        Ok(ManipEnv {
            cfg,
            episode_rng: rng_from_seed(derive_seed(seed, 0)),
            plan_rng_base: derive_seed(seed, 1),
            episode_index: 0,
            bundle: None,
            state: None,
        })
    }

    pub fn cfg(&self) -> &ManipConfig {
        &self.cfg
    }

    pub fn bundle(&self) -> &ManipPlan {
        self.bundle.as_ref().expect("environment not reset")
    }

    fn st(&self) -> &ManipState {
        self.state.as_ref().expect("environment not reset")
    }

    pub fn object_pose(&self) -> Pose2 {
        self.st().object
    }

    pub fn hands(&self) -> [Vec2; NUM_HANDS] {
        self.st().hands
    }

    pub fn attached(&self) -> [bool; NUM_HANDS] {
        self.st().attached
    }

    pub fn tracker(&self) -> &GoalTracker {
        &self.st().tracker
    }

    pub fn windows(&self) -> [GoalWindow; NUM_HANDS] {
        let t = &self.st().tracker;
        core::array::from_fn(|h| t.window(h))
    }

    /// Pose goal commanded for the current slot (the last slot's once the
    /// plan is exhausted).
    pub fn current_pose_goal(&self) -> PoseGoal {
        let bundle = self.bundle();
        let slot = self
            .st()
            .tracker
            .cursor()
            .min(bundle.slot_pose_goals.len() - 1);
        bundle.slot_pose_goals[slot]
    }

    /// Grasp geometry commanded for the current slot.
    pub fn current_contacts(&self) -> [SurfaceContact; NUM_HANDS] {
        let bundle = self.bundle();
        let slot = self
            .st()
            .tracker
            .cursor()
            .min(bundle.slot_contacts.len() - 1);
        bundle.slot_contacts[slot]
    }

    /// Where a hand's commanded surface point currently sits in the world
    /// (the grasp geometry carried by the object's live pose).
    pub fn live_contact_point(&self, hand: usize) -> Result<Vec2, CoreError> {
        let contacts = self.current_contacts();
        surface_point(&self.bundle().object, self.st().object, &contacts[hand])
    }

    pub fn scaled_hand_velocity(&self, action: &[f64], hand: usize) -> Vec2 {
        let m = self.cfg.max_hand_speed;
        Vec2::new(
            action[2 * hand].clamp(-1.0, 1.0) * m,
            action[2 * hand + 1].clamp(-1.0, 1.0) * m,
        )
    }

    /// Pose error of the object against the current slot's goal.
    pub fn pose_error(&self) -> (f64, f64) {
        let goal = self.current_pose_goal();
        let s = self.st();
        (
            s.object.pos.dist(goal.position),
            angle_dist(s.object.theta, goal.angle),
        )
    }

    fn build_observation(&self) -> Vec<f64> {
        let s = self.st();
        let mut obs = Vec::with_capacity(MANIP_OBS_DIM);
        obs.push(s.object.pos.x);
        obs.push(s.object.pos.y);
        obs.push(crate::math::cos(s.object.theta));
        obs.push(crate::math::sin(s.object.theta));
        obs.extend_from_slice(&s.obj_twist);
        for h in 0..NUM_HANDS {
            obs.push(s.hands[h].x);
            obs.push(s.hands[h].y);
        }
        for h in 0..NUM_HANDS {
            obs.push(if s.attached[h] { 1.0 } else { 0.0 });
        }
        let windows: [GoalWindow; NUM_HANDS] = core::array::from_fn(|h| s.tracker.window(h));
        for w in &windows {
            obs.push(if w.current.in_contact { 1.0 } else { 0.0 });
        }
        for w in &windows {
            obs.push(if w.next.in_contact { 1.0 } else { 0.0 });
        }
        for w in &windows {
            obs.push(w.current.point.x);
            obs.push(w.current.point.y);
        }
        for w in &windows {
            obs.push(w.next.point.x);
            obs.push(w.next.point.y);
        }
        for (h, w) in windows.iter().enumerate() {
            let d = w.current.point - s.hands[h];
            obs.push(d.x);
            obs.push(d.y);
        }
        let goal = self.current_pose_goal();
        obs.push(goal.position.x);
        obs.push(goal.position.y);
        obs.push(goal.angle);
        let rel = s.object.inverse_apply(goal.position);
        obs.push(rel.x);
        obs.push(rel.y);
        obs.push(wrap_angle(goal.angle - s.object.theta));
        obs.push(s.tracker.s_remaining());
        obs.push(s.tracker.current_duration());
        debug_assert_eq!(obs.len(), MANIP_OBS_DIM);
        obs
    }
}

impl Environment for ManipEnv {
    fn obs_dim(&self) -> usize {
        MANIP_OBS_DIM
    }

    fn action_dim(&self) -> usize {
        MANIP_ACTION_DIM
    }

    fn layout_hash(&self) -> u64 {
        fnv1a_str(MANIP_LAYOUT_DESC)
    }

    fn reset(&mut self) -> Result<Vec<f64>, CoreError> {
        let j = self.cfg.reset_jitter_pos;
        let jt = self.cfg.reset_jitter_theta;
        let start = Pose2::new(
            uniform(&mut self.episode_rng, -j, j),
            uniform(&mut self.episode_rng, -j, j),
            uniform(&mut self.episode_rng, -jt, jt),
        );
        let plan_seed = derive_seed(self.plan_rng_base, self.episode_index);
        self.episode_index += 1;
        let bundle = match self.cfg.task {
            ManipTask::Repose { n_targets, ranges } => {
                repose_plan(&self.cfg.object, start, n_targets, &ranges, plan_seed)?
            }
            ManipTask::Reorient { n_rotations } => {
                reorient_plan(&self.cfg.object, start, n_rotations, plan_seed)?
            }
        };
        let tracker = GoalTracker::new(Arc::new(bundle.plan.clone()));
        let mut hands = [Vec2::ZERO; NUM_HANDS];
        for h in 0..NUM_HANDS {
            let p = surface_point(&self.cfg.object, start, &bundle.slot_contacts[0][h])?;
            let out = p - start.pos;
            let n = out.norm();
            let dir = if n > 1e-12 {
                out * (1.0 / n)
            } else {
                Vec2::new(0.0, 1.0)
            };
            hands[h] = p + dir * self.cfg.hand_standoff;
        }
        self.bundle = Some(bundle);
        self.state = Some(ManipState {
            object: start,
            obj_twist: [0.0; 3],
            hands,
            attached: [false; NUM_HANDS],
            attach_contacts: [None; NUM_HANDS],
            tracker,
            steps: 0,
            prev_action: alloc::vec![0.0; MANIP_ACTION_DIM],
            done: false,
        });
        Ok(self.build_observation())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, CoreError> {
        validate_action(action, MANIP_ACTION_DIM)?;
        let hand_cmd: [Vec2; NUM_HANDS] =
            core::array::from_fn(|h| self.scaled_hand_velocity(action, h));
        let dt = self.cfg.dt;
        let cfg_reward = self.cfg.reward;
        let (tau_pos, tau_rot) = (self.cfg.tau_pos, self.cfg.tau_rot);
        let eps_attach = self.cfg.eps_attach;
        let impact_speed = self.cfg.attach_impact_speed;
        let step_limit = self.cfg.step_limit;
        let object_spec = self.cfg.object;

        // live commanded surface points and the slot goal, before motion
        let contacts = self.current_contacts();
        let slot_goal = self.current_pose_goal();
        let s = self.state.as_mut().ok_or_else(|| {
            CoreError::Env(String::from("step before reset"))
        })?;
        if s.done {
            return Err(CoreError::Env(String::from("step after episode end")));
        }

        // motion under last step's attachments
        let both_attached = s.attached[0] && s.attached[1];
        if both_attached {
            let p = [s.hands[0], s.hands[1]];
            let q = [p[0] + hand_cmd[0] * dt, p[1] + hand_cmd[1] * dt];
            let u = p[1] - p[0];
            let w = q[1] - q[0];
            let phi = if u.norm() > 1e-9 {
                crate::math::atan2(u.cross(w), u.dot(w))
            } else {
                0.0
            };
            let c = (p[0] + p[1]) * 0.5;
            let c_new = (q[0] + q[1]) * 0.5;
            let new_pos = (s.object.pos - c).rotated(phi) + c_new;
            let new_pose = Pose2 {
                pos: new_pos,
                theta: s.object.theta + phi,
            };
            s.obj_twist = [
                (new_pose.pos.x - s.object.pos.x) / dt,
                (new_pose.pos.y - s.object.pos.y) / dt,
                phi / dt,
            ];
            s.object = new_pose;
            // snap both hands onto their surface points under the new pose
            for h in 0..NUM_HANDS {
                if let Some(contact) = &s.attach_contacts[h] {
                    s.hands[h] = surface_point(&object_spec, s.object, contact)?;
                }
            }
        } else {
            s.obj_twist = [0.0; 3];
            for h in 0..NUM_HANDS {
                if !s.attached[h] {
                    s.hands[h] += hand_cmd[h] * dt;
                }
                // a single attached hand stays pinned to the static object
            }
        }

        // contact intents
        let mut impact_events = 0u32;
        for h in 0..NUM_HANDS {
            let intent = action[2 * NUM_HANDS + h];
            if intent > 0.0 {
                if !s.attached[h] {
                    let target = surface_point(&object_spec, s.object, &contacts[h])?;
                    if s.hands[h].dist(target) <= eps_attach {
                        s.hands[h] = target;
                        s.attached[h] = true;
                        s.attach_contacts[h] = Some(contacts[h]);
                        if hand_cmd[h].norm() > impact_speed {
                            impact_events += 1;
                        }
                    }
                }
            } else if s.attached[h] {
                s.attached[h] = false;
                s.attach_contacts[h] = None;
            }
        }

        // rewards on the pre-tick window
        let windows: [GoalWindow; NUM_HANDS] = core::array::from_fn(|h| s.tracker.window(h));
        let snaps = snapshots_from_windows(
            &windows,
            &s.hands,
            &s.attached,
            s.tracker.s_remaining(),
        );
        let dp = s.object.pos.dist(slot_goal.position);
        let dth = angle_dist(s.object.theta, slot_goal.angle);
        let (_, mut breakdown) = total_contact_reward(&snaps, Some((dp, dth)), &cfg_reward)?;
        let hand_speeds: Vec<f64> = hand_cmd.iter().map(|v| v.norm()).collect();
        breakdown.penalty = regularization_penalties(
            action,
            &s.prev_action,
            s.obj_twist[2],
            &hand_speeds,
            impact_events,
            &cfg_reward,
        )?;

        // achievement-gated advancement on the object pose
        let achieved = achieved_manipulation(s.object, slot_goal.pose(), tau_pos, tau_rot);
        let outcome = s.tracker.tick_in_place(dt, &[achieved; NUM_HANDS])?;
        breakdown.bonus = bonus_reward(outcome.bonus_fired, &cfg_reward);

        s.prev_action.clear();
        s.prev_action.extend_from_slice(action);
        s.steps += 1;

        let divergence = !s.object.is_finite() || s.hands.iter().any(|h| !h.is_finite());
        let terminal = outcome.terminal || divergence;
        let truncated = !terminal && s.steps >= step_limit;
        s.done = terminal || truncated;

        let info = StepInfo {
            advanced: outcome.advanced,
            bonus_fired: outcome.bonus_fired,
            slip_events: 0,
            impact_events,
            plan_exhausted: outcome.terminal,
            divergence,
            breakdown,
        };
        Ok(StepOutcome {
            obs: self.build_observation(),
            reward: info.breakdown.total(),
            terminal,
            truncated,
            info,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_cfg(task: ManipTask) -> ManipConfig {
        let mut cfg = ManipConfig::default();
        cfg.task = task;
        cfg.reset_jitter_pos = 0.0;
        cfg.reset_jitter_theta = 0.0;
        cfg
    }

    fn repose_cfg() -> ManipConfig {
        quiet_cfg(ManipTask::Repose {
            n_targets: 2,
            ranges: PoseRanges::trained(),
        })
    }

    /// Drive both hands onto their grasp points and attach them.
    fn attach_both(env: &mut ManipEnv) {
        for _ in 0..60 {
            let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
            let mut close = true;
            for h in 0..NUM_HANDS {
                let target = env.live_contact_point(h).unwrap();
                let d = target - env.hands()[h];
                let v = d * (1.0 / env.cfg().dt);
                act[2 * h] = (v.x / env.cfg().max_hand_speed).clamp(-1.0, 1.0);
                act[2 * h + 1] = (v.y / env.cfg().max_hand_speed).clamp(-1.0, 1.0);
                if d.norm() > env.cfg().eps_attach * 0.5 {
                    close = false;
                }
            }
            if close {
                act[4] = 1.0;
                act[5] = 1.0;
            }
            env.step(&act).unwrap();
            if env.attached() == [true, true] {
                return;
            }
        }
        panic!("failed to attach hands");
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = ManipEnv::new(repose_cfg(), 3).unwrap();
        let mut b = ManipEnv::new(repose_cfg(), 3).unwrap();
        assert_eq!(a.reset().unwrap(), b.reset().unwrap());
    }

    #[test]
    fn observation_zero_blocks_at_goal() {
        let mut cfg = repose_cfg();
        cfg.task = ManipTask::Repose {
            n_targets: 1,
            ranges: PoseRanges {
                x: (0.0, 0.0),
                y: (0.0, 0.0),
                yaw: (0.0, 0.0),
            },
        };
        let mut env = ManipEnv::new(cfg, 1).unwrap();
        let obs = env.reset().unwrap();
        assert_eq!(obs.len(), MANIP_OBS_DIM);
        // object at its (identity) goal: relative pose block is zero
        assert_eq!(&obs[31..34], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn translation_only_motion() {
        let mut env = ManipEnv::new(repose_cfg(), 5).unwrap();
        env.reset().unwrap();
        attach_both(&mut env);
        let before = env.object_pose();
        let hands_before = env.hands();
        // equal hand velocities: pure translation
        let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
        act[0] = 0.1;
        act[2] = 0.1;
        act[4] = 1.0;
        act[5] = 1.0;
        env.step(&act).unwrap();
        let after = env.object_pose();
        let moved = after.pos - before.pos;
        assert!((moved.x - 0.1 * 0.02).abs() < 1e-12);
        assert!(moved.y.abs() < 1e-12);
        assert!((after.theta - before.theta).abs() < 1e-12);
        // inter-hand distance preserved
        let hands_after = env.hands();
        let d0 = hands_before[0].dist(hands_before[1]);
        let d1 = hands_after[0].dist(hands_after[1]);
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn rigidity_over_many_steps() {
        let mut env = ManipEnv::new(repose_cfg(), 5).unwrap();
        env.reset().unwrap();
        attach_both(&mut env);
        let d0 = env.hands()[0].dist(env.hands()[1]);
        let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
        act[4] = 1.0;
        act[5] = 1.0;
        let mut rng = crate::rng::rng_from_seed(7);
        for _ in 0..1000 {
            for i in 0..4 {
                act[i] = crate::rng::uniform(&mut rng, -0.3, 0.3);
            }
            if env.step(&act).unwrap().done() {
                break;
            }
        }
        let d1 = env.hands()[0].dist(env.hands()[1]);
        assert!((d0 - d1).abs() <= 1e-9, "drift {}", (d0 - d1).abs());
        // attached hands still sit exactly on their surface points
        for h in 0..NUM_HANDS {
            if env.attached()[h] {
                let contact = env.st().attach_contacts[h].unwrap();
                let p =
                    surface_point(&env.cfg().object, env.object_pose(), &contact).unwrap();
                assert_eq!(p, env.hands()[h]);
            }
        }
    }

    #[test]
    fn single_hand_cannot_move_object() {
        let mut env = ManipEnv::new(repose_cfg(), 5).unwrap();
        env.reset().unwrap();
        // attach only the first hand
        for _ in 0..60 {
            let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
            let target = env.live_contact_point(0).unwrap();
            let d = target - env.hands()[0];
            let v = d * (1.0 / env.cfg().dt);
            act[0] = (v.x / env.cfg().max_hand_speed).clamp(-1.0, 1.0);
            act[1] = (v.y / env.cfg().max_hand_speed).clamp(-1.0, 1.0);
            if d.norm() <= env.cfg().eps_attach * 0.5 {
                act[4] = 1.0;
            }
            env.step(&act).unwrap();
            if env.attached()[0] {
                break;
            }
        }
        assert!(env.attached()[0]);
        let before = env.object_pose();
        let hand_before = env.hands()[0];
        let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
        act[0] = 1.0;
        act[1] = 1.0;
        act[4] = 1.0;
        env.step(&act).unwrap();
        assert_eq!(env.object_pose(), before);
        assert_eq!(env.hands()[0], hand_before);
    }

    #[test]
    fn attach_needs_proximity() {
        let mut env = ManipEnv::new(repose_cfg(), 5).unwrap();
        env.reset().unwrap();
        // hands start at standoff 0.1 > eps 0.03; intent alone cannot attach
        let mut act = alloc::vec![0.0; MANIP_ACTION_DIM];
        act[4] = 1.0;
        act[5] = 1.0;
        env.step(&act).unwrap();
        assert_eq!(env.attached(), [false, false]);
    }

    #[test]
    fn reorient_env_runs() {
        let mut env =
            ManipEnv::new(quiet_cfg(ManipTask::Reorient { n_rotations: 2 }), 8).unwrap();
        let obs = env.reset().unwrap();
        assert_eq!(obs.len(), MANIP_OBS_DIM);
        let out = env.step(&alloc::vec![0.0; MANIP_ACTION_DIM]).unwrap();
        // reach slot, hands free and clear: detach reward for both
        assert_eq!(out.info.breakdown.detach, 2.0);
    }
}
