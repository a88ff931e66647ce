//! Top-down quadruped environment with stance-pinned feet.
//!
//! Feet are kinematic point effectors: a positive contact intent pins a foot
//! to its current world position, the base moves only while enough feet are
//! pinned (with a one-slot ballistic carry for flight phases), and stance
//! feet dragged beyond the leg workspace slip off their anchors. Dynamics
//! stay simple enough that a white-box controller can execute any plan
//! exactly, which is what validates the whole pipeline.
//!
//! Step order within one tick: scale action, move base (previous
//! attachments), slip check, move swing feet, process intents, score
//! rewards against the pre-tick goal window, run the achievement-gated
//! tracker tick, then build the observation for the new window.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{validate_action, Environment, StepInfo, StepOutcome};
use crate::contact::{achieved_locomotion, GoalTracker, GoalWindow};
use crate::error::CoreError;
use crate::gait::{
    build_plan, sample_gait_params, FootLayout, GaitParams, GaitRanges, GaitType, SteeringMode,
    NUM_FEET,
};
use crate::math::{fnv1a_str, Pose2, Vec2};
use crate::reward::{
    bonus_reward, regularization_penalties, snapshots_from_windows, total_contact_reward,
    RewardConfig,
};
use crate::rng::{derive_seed, rng_from_seed, uniform, DetRng};

/// Which gait an environment instance runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaitSelection {
    Fixed(GaitType),
    /// Draw one of the five gaits at construction and keep it for the
    /// environment's lifetime.
    MultiGait,
}

#[derive(Clone, Debug)]
pub struct LocoConfig {
    pub dt: f64,
    pub layout: FootLayout,
    pub gait: GaitSelection,
    pub ranges: GaitRanges,
    pub steering_mode: SteeringMode,
    /// Plan length in slots.
    pub horizon_slots: usize,
    pub step_limit: usize,
    /// Base-to-goal-centroid radius for goal achievement.
    pub tau_base: f64,
    pub reward: RewardConfig,
    pub max_base_speed: f64,
    pub max_base_yaw_rate: f64,
    pub max_foot_speed: f64,
    /// Feet that must be attached before the base twist applies.
    pub min_stance_feet: usize,
    /// Commanded foot speed above which an attachment counts as an impact.
    pub attach_impact_speed: f64,
    pub reset_jitter_pos: f64,
    pub reset_jitter_theta: f64,
    /// Pin the command duration regardless of the sampled value.
    pub duration_override: Option<f64>,
    /// Replace sampling entirely with fixed parameters.
    pub params_override: Option<GaitParams>,
}

impl Default for LocoConfig {
    fn default() -> Self {
        LocoConfig {
            dt: 0.02,
            layout: FootLayout::default(),
            gait: GaitSelection::Fixed(GaitType::Trot),
            ranges: GaitRanges::default(),
            steering_mode: SteeringMode::Heading,
            horizon_slots: 32,
            step_limit: 400,
            tau_base: 0.1,
            reward: RewardConfig::default(),
            max_base_speed: 1.0,
            max_base_yaw_rate: 3.5,
            max_foot_speed: 2.5,
            min_stance_feet: 2,
            attach_impact_speed: 0.5,
            reset_jitter_pos: 0.01,
            reset_jitter_theta: 0.05,
            duration_override: None,
            params_override: None,
        }
    }
}

impl LocoConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.dt > 0.0) {
            return Err(CoreError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.horizon_slots < 2 {
            return Err(CoreError::Config(String::from("horizon must be >= 2 slots")));
        }
        if self.step_limit == 0 {
            return Err(CoreError::Config(String::from("step limit must be > 0")));
        }
        self.layout.validate(&self.ranges)?;
        self.reward.validate()?;
        for (name, v) in [
            ("max_base_speed", self.max_base_speed),
            ("max_base_yaw_rate", self.max_base_yaw_rate),
            ("max_foot_speed", self.max_foot_speed),
            ("tau_base", self.tau_base),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Action layout: base twist (3), per-foot velocity in the base frame (8),
/// per-foot contact intent (4).
pub const LOCO_ACTION_DIM: usize = 3 + 2 * NUM_FEET + NUM_FEET;

/// Observation layout, all per-foot blocks in LF, RF, LH, RH order:
/// applied base twist (3); base orientation as cos/sin (2); foot positions in
/// the base frame (8); actual contact flags (4); current indicators (4); next
/// indicators (4); current goal points in the base frame (8); next goal
/// points (8); foot-to-current-goal deltas in the base frame (8); remaining
/// command time (1); current command duration (1).
pub const LOCO_OBS_DIM: usize = 51;

const LOCO_LAYOUT_DESC: &str = "loco/v1:base_twist:3,orient:2,foot_pos:8,foot_contact:4,\
cur_ind:4,next_ind:4,cur_goal:8,next_goal:8,goal_delta:8,s_remaining:1,duration:1|dim=51";

#[derive(Clone, Debug)]
struct LocoState {
    base: Pose2,
    applied_twist: [f64; 3],
    feet: [Vec2; NUM_FEET],
    attached: [bool; NUM_FEET],
    tracker: GoalTracker,
    last_stance_twist: [f64; 3],
    flight_time: f64,
    steps: usize,
    prev_action: Vec<f64>,
    done: bool,
}

/// The quadruped environment.
pub struct LocoEnv {
    cfg: LocoConfig,
    gait: GaitType,
    params: GaitParams,
    episode_rng: DetRng,
    plan_start: Pose2,
    state: Option<LocoState>,
}

impl LocoEnv {
    pub fn new(cfg: LocoConfig, seed: u64) -> Result<Self, CoreError> {
        cfg.validate()?;
        let gait = match cfg.gait {
            GaitSelection::Fixed(g) => g,
            GaitSelection::MultiGait => {
                let mut rng = rng_from_seed(derive_seed(seed, 0));
                let idx = uniform(&mut rng, 0.0, 5.0) as usize;
                GaitType::ALL[idx.min(4)]
            }
        };
        let mut params = match cfg.params_override {
            Some(p) => p,
            None => sample_gait_params(derive_seed(seed, 1), cfg.steering_mode, &cfg.ranges),
        };
        if let Some(d) = cfg.duration_override {
            if !(d > 0.0) {
                return Err(CoreError::Config(format!(
                    "duration override must be > 0, got {d}"
                )));
            }
            params.duration = d;
        }
        Ok(LocoEnv {
            cfg,
            gait,
            params,
            episode_rng: rng_from_seed(derive_seed(seed, 2)),
            plan_start: Pose2::IDENTITY,
            state: None,
        })
    }

    pub fn cfg(&self) -> &LocoConfig {
        &self.cfg
    }

    pub fn gait(&self) -> GaitType {
        self.gait
    }

    pub fn params(&self) -> &GaitParams {
        &self.params
    }

    pub fn plan_start(&self) -> Pose2 {
        self.plan_start
    }

    fn st(&self) -> &LocoState {
        self.state.as_ref().expect("environment not reset")
    }

    pub fn base(&self) -> Pose2 {
        self.st().base
    }

    pub fn feet(&self) -> [Vec2; NUM_FEET] {
        self.st().feet
    }

    pub fn attached(&self) -> [bool; NUM_FEET] {
        self.st().attached
    }

    pub fn tracker(&self) -> &GoalTracker {
        &self.st().tracker
    }

    pub fn steps(&self) -> usize {
        self.st().steps
    }

    pub fn windows(&self) -> [GoalWindow; NUM_FEET] {
        let t = &self.st().tracker;
        core::array::from_fn(|f| t.window(f))
    }

    pub fn hip_world(&self, foot: usize) -> Vec2 {
        self.st().base.apply(self.cfg.layout.hip[foot])
    }

    /// Clamp a raw action entry and scale it to physical units.
    fn scale(raw: f64, max: f64) -> f64 {
        raw.clamp(-1.0, 1.0) * max
    }

    /// Physical base twist a raw action commands.
    pub fn scaled_twist(&self, action: &[f64]) -> [f64; 3] {
        [
            Self::scale(action[0], self.cfg.max_base_speed),
            Self::scale(action[1], self.cfg.max_base_speed),
            Self::scale(action[2], self.cfg.max_base_yaw_rate),
        ]
    }

    /// Physical base-frame velocity a raw action commands for one foot.
    pub fn scaled_foot_velocity(&self, action: &[f64], foot: usize) -> Vec2 {
        Vec2::new(
            Self::scale(action[3 + 2 * foot], self.cfg.max_foot_speed),
            Self::scale(action[3 + 2 * foot + 1], self.cfg.max_foot_speed),
        )
    }

    /// The stance rule: commanded twist with enough feet attached, ballistic
    /// carry of the last stance twist through at most one flight slot,
    /// otherwise no base motion. Returns the applied twist and the new pose.
    fn resolve_base_motion(
        base: Pose2,
        twist_cmd: [f64; 3],
        attached_count: usize,
        min_stance: usize,
        last_stance_twist: [f64; 3],
        flight_time: f64,
        flight_window: f64,
        dt: f64,
    ) -> ([f64; 3], Pose2, [f64; 3], f64) {
        let (applied, new_last, new_flight) = if attached_count >= min_stance {
            (twist_cmd, twist_cmd, 0.0)
        } else if attached_count == 0 && flight_time + dt <= flight_window + 1e-12 {
            (last_stance_twist, last_stance_twist, flight_time + dt)
        } else {
            ([0.0; 3], last_stance_twist, flight_time)
        };
        let delta = Vec2::new(applied[0] * dt, applied[1] * dt).rotated(base.theta);
        let pose = Pose2 {
            pos: base.pos + delta,
            theta: base.theta + applied[2] * dt,
        };
        (applied, pose, new_last, new_flight)
    }

    /// Base pose after one step with the given physical twist, using the
    /// current attachments; identical arithmetic to [`Self::step`].
    pub fn preview_base_motion(&self, twist_cmd: [f64; 3]) -> Pose2 {
        let s = self.st();
        let count = s.attached.iter().filter(|&&a| a).count();
        Self::resolve_base_motion(
            s.base,
            twist_cmd,
            count,
            self.cfg.min_stance_feet,
            s.last_stance_twist,
            s.flight_time,
            s.tracker.current_duration(),
            self.cfg.dt,
        )
        .1
    }

    /// Current goal points of all feet (swing feet point at their next
    /// touchdown); the achievement test runs against their centroid.
    pub fn goal_points(&self) -> [Vec2; NUM_FEET] {
        let t = &self.st().tracker;
        core::array::from_fn(|f| t.window(f).current.point)
    }

    fn build_observation(&self) -> Vec<f64> {
        let s = self.st();
        let mut obs = Vec::with_capacity(LOCO_OBS_DIM);
        obs.extend_from_slice(&s.applied_twist);
        obs.push(crate::math::cos(s.base.theta));
        obs.push(crate::math::sin(s.base.theta));
        for f in 0..NUM_FEET {
            let p = s.base.inverse_apply(s.feet[f]);
            obs.push(p.x);
            obs.push(p.y);
        }
        for f in 0..NUM_FEET {
            obs.push(if s.attached[f] { 1.0 } else { 0.0 });
        }
        let windows: [GoalWindow; NUM_FEET] = core::array::from_fn(|f| s.tracker.window(f));
        for w in &windows {
            obs.push(if w.current.in_contact { 1.0 } else { 0.0 });
        }
        for w in &windows {
            obs.push(if w.next.in_contact { 1.0 } else { 0.0 });
        }
        for w in &windows {
            let p = s.base.inverse_apply(w.current.point);
            obs.push(p.x);
            obs.push(p.y);
        }
        for w in &windows {
            let p = s.base.inverse_apply(w.next.point);
            obs.push(p.x);
            obs.push(p.y);
        }
        for (f, w) in windows.iter().enumerate() {
            let d = s.base.inverse_rotate(w.current.point - s.feet[f]);
            obs.push(d.x);
            obs.push(d.y);
        }
        obs.push(s.tracker.s_remaining());
        obs.push(s.tracker.current_duration());
        debug_assert_eq!(obs.len(), LOCO_OBS_DIM);
        obs
    }
}

impl Environment for LocoEnv {
    fn obs_dim(&self) -> usize {
        LOCO_OBS_DIM
    }

    fn action_dim(&self) -> usize {
        LOCO_ACTION_DIM
    }

    fn layout_hash(&self) -> u64 {
        fnv1a_str(LOCO_LAYOUT_DESC)
    }

    fn reset(&mut self) -> Result<Vec<f64>, CoreError> {
        let j = self.cfg.reset_jitter_pos;
        let jt = self.cfg.reset_jitter_theta;
        let start = Pose2::new(
            uniform(&mut self.episode_rng, -j, j),
            uniform(&mut self.episode_rng, -j, j),
            uniform(&mut self.episode_rng, -jt, jt),
        );
        let plan = build_plan(
            self.gait,
            &self.params,
            &self.cfg.layout,
            self.cfg.horizon_slots,
            start,
        )?;
        let tracker = GoalTracker::new(Arc::new(plan));
        let mut feet = [Vec2::ZERO; NUM_FEET];
        let mut attached = [false; NUM_FEET];
        let first = crate::gait::footfall_locations(
            &self.params,
            &self.cfg.layout,
            0,
            start,
            self.gait.period(),
        )?;
        for f in 0..NUM_FEET {
            feet[f] = first[f];
            attached[f] = tracker.window(f).current.in_contact;
        }
        self.plan_start = start;
        self.state = Some(LocoState {
            base: start,
            applied_twist: [0.0; 3],
            feet,
            attached,
            tracker,
            last_stance_twist: [0.0; 3],
            flight_time: 0.0,
            steps: 0,
            prev_action: alloc::vec![0.0; LOCO_ACTION_DIM],
            done: false,
        });
        Ok(self.build_observation())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, CoreError> {
        validate_action(action, LOCO_ACTION_DIM)?;
        let twist_cmd = self.scaled_twist(action);
        let foot_cmd: [Vec2; NUM_FEET] =
            core::array::from_fn(|f| self.scaled_foot_velocity(action, f));
        let dt = self.cfg.dt;
        let cfg_reward = self.cfg.reward;
        let tau_base = self.cfg.tau_base;
        let r_leg = self.cfg.layout.r_leg;
        let min_stance = self.cfg.min_stance_feet;
        let impact_speed = self.cfg.attach_impact_speed;
        let step_limit = self.cfg.step_limit;
        let hips = self.cfg.layout.hip;

        let s = self.state.as_mut().ok_or_else(|| {
            CoreError::Env(String::from("step before reset"))
        })?;
        if s.done {
            return Err(CoreError::Env(String::from("step after episode end")));
        }

        // base motion under the stance rule, using last step's attachments
        let attached_count = s.attached.iter().filter(|&&a| a).count();
        let (applied, new_base, new_last, new_flight) = Self::resolve_base_motion(
            s.base,
            twist_cmd,
            attached_count,
            min_stance,
            s.last_stance_twist,
            s.flight_time,
            s.tracker.current_duration(),
            dt,
        );

        // stance feet dragged out of the workspace slip off their anchors
        let mut slip_events = 0u32;
        for f in 0..NUM_FEET {
            if s.attached[f] && s.feet[f].dist(new_base.apply(hips[f])) > r_leg {
                s.attached[f] = false;
                slip_events += 1;
            }
        }

        // swing feet integrate their commanded base-frame velocity
        let old_base = s.base;
        for f in 0..NUM_FEET {
            if !s.attached[f] {
                let fb = old_base.inverse_apply(s.feet[f]) + foot_cmd[f] * dt;
                s.feet[f] = new_base.apply(fb);
            }
        }
        s.base = new_base;
        s.applied_twist = applied;
        s.last_stance_twist = new_last;
        s.flight_time = new_flight;

        // contact intents: positive attaches (within the workspace), other
        // values detach
        let mut impact_events = 0u32;
        for f in 0..NUM_FEET {
            let intent = action[3 + 2 * NUM_FEET + f];
            if intent > 0.0 {
                if !s.attached[f] && s.feet[f].dist(new_base.apply(hips[f])) <= r_leg {
                    s.attached[f] = true;
                    if foot_cmd[f].norm() > impact_speed {
                        impact_events += 1;
                    }
                }
            } else if s.attached[f] {
                s.attached[f] = false;
            }
        }

        // rewards against the window that was commanded during this step
        let windows: [GoalWindow; NUM_FEET] = core::array::from_fn(|f| s.tracker.window(f));
        let snaps = snapshots_from_windows(
            &windows,
            &s.feet,
            &s.attached,
            s.tracker.s_remaining(),
        );
        let (_, mut breakdown) = total_contact_reward(&snaps, None, &cfg_reward)?;
        let foot_speeds: Vec<f64> = foot_cmd.iter().map(|v| v.norm()).collect();
        breakdown.penalty = regularization_penalties(
            action,
            &s.prev_action,
            applied[2],
            &foot_speeds,
            slip_events + impact_events,
            &cfg_reward,
        )?;

        // achievement-gated goal advancement
        let goal_points: [Vec2; NUM_FEET] = core::array::from_fn(|f| windows[f].current.point);
        let achieved = achieved_locomotion(s.base.pos, &goal_points, tau_base)?;
        let outcome = s
            .tracker
            .tick_in_place(dt, &[achieved; NUM_FEET])?;
        breakdown.bonus = bonus_reward(outcome.bonus_fired, &cfg_reward);

        s.prev_action.clear();
        s.prev_action.extend_from_slice(action);
        s.steps += 1;

        let divergence = !s.base.is_finite() || s.feet.iter().any(|f| !f.is_finite());
        let terminal = outcome.terminal || divergence;
        let truncated = !terminal && s.steps >= step_limit;
        s.done = terminal || truncated;

        let info = StepInfo {
            advanced: outcome.advanced,
            bonus_fired: outcome.bonus_fired,
            slip_events,
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
