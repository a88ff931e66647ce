//! Run configuration: one JSON document with `env`, `reward`, `plan`,
//! `train` and `eval` sections. Every field has a default, unknown keys are
//! rejected, and the fully resolved document (defaults included) is dumped
//! alongside every run so it can be reproduced exactly. The published schema
//! lives at `schema/runconfig.schema.json`.

use anyhow::{bail, Context, Result};
use contactrl_core::env::{
    GaitSelection, LocoConfig, ManipConfig, ManipTask, ReachConfig,
};
use contactrl_core::gait::{GaitRanges, GaitType, SteeringMode};
use contactrl_core::manip::{ObjectSpec, PoseRanges};
use contactrl_core::math::Vec2;
use contactrl_core::reward::{PenaltyWeights, RewardConfig};
use contactrl_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};

use super::digest_bytes;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltySection {
    pub action_rate: f64,
    pub base_ang_vel: f64,
    pub effector_speed: f64,
    pub impact: f64,
}

impl Default for PenaltySection {
    fn default() -> Self {
        let w = PenaltyWeights::default();
        PenaltySection {
            action_rate: w.action_rate,
            base_ang_vel: w.base_ang_vel,
            effector_speed: w.effector_speed,
            impact: w.impact,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub sigma_sq: f64,
    pub alpha_hold: f64,
    pub delta: f64,
    pub c_pos: f64,
    pub c_rot: f64,
    pub eps_pos: f64,
    pub eps_rot: f64,
    pub bonus: f64,
    pub squared_distance: bool,
    pub penalties: PenaltySection,
}

impl Default for RewardSection {
    fn default() -> Self {
        let r = RewardConfig::default();
        RewardSection {
            sigma_sq: r.sigma_sq,
            alpha_hold: r.alpha_hold,
            delta: r.delta,
            c_pos: r.c_pos,
            c_rot: r.c_rot,
            eps_pos: r.eps_pos,
            eps_rot: r.eps_rot,
            bonus: r.bonus,
            squared_distance: r.squared_distance,
            penalties: PenaltySection::default(),
        }
    }
}

impl RewardSection {
    pub fn to_core(&self) -> RewardConfig {
        RewardConfig {
            sigma_sq: self.sigma_sq,
            alpha_hold: self.alpha_hold,
            delta: self.delta,
            c_pos: self.c_pos,
            c_rot: self.c_rot,
            eps_pos: self.eps_pos,
            eps_rot: self.eps_rot,
            bonus: self.bonus,
            squared_distance: self.squared_distance,
            penalties: PenaltyWeights {
                action_rate: self.penalties.action_rate,
                base_ang_vel: self.penalties.base_ang_vel,
                effector_speed: self.penalties.effector_speed,
                impact: self.penalties.impact,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectSection {
    /// "box", "disc" or "rounded_polygon".
    pub shape: String,
    pub half_extents: [f64; 2],
    pub radius: f64,
    pub sides: usize,
    pub core_circumradius: f64,
    pub corner_radius: f64,
}

impl Default for ObjectSection {
    fn default() -> Self {
        ObjectSection {
            shape: "box".into(),
            half_extents: [0.1, 0.1],
            radius: 0.12,
            sides: 8,
            core_circumradius: 0.12,
            corner_radius: 0.02,
        }
    }
}

impl ObjectSection {
    pub fn to_core(&self) -> Result<ObjectSpec> {
        let spec = match self.shape.as_str() {
            "box" => ObjectSpec::Box {
                half_extents: Vec2::new(self.half_extents[0], self.half_extents[1]),
            },
            "disc" => ObjectSpec::Disc {
                radius: self.radius,
            },
            "rounded_polygon" => ObjectSpec::RoundedPolygon {
                sides: self.sides,
                core_circumradius: self.core_circumradius,
                corner_radius: self.corner_radius,
            },
            other => bail!("unknown object shape {other:?}"),
        };
        spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    /// "loco", "manip" or "reach".
    pub kind: String,
    pub dt: f64,
    pub step_limit: usize,
    /// Gait name, or "multi" for per-environment sampling.
    pub gait: String,
    /// "heading" or "yaw_rate".
    pub steering_mode: String,
    pub horizon_slots: usize,
    pub tau_base: f64,
    pub max_base_speed: f64,
    pub max_base_yaw_rate: f64,
    pub max_foot_speed: f64,
    pub min_stance_feet: usize,
    pub attach_impact_speed: f64,
    pub r_leg: f64,
    pub terrain_half_extent: f64,
    pub reset_jitter_pos: f64,
    pub reset_jitter_theta: f64,
    pub duration_override: Option<f64>,
    /// "repose" or "reorient".
    pub task: String,
    pub n_targets: usize,
    pub n_rotations: usize,
    /// "trained" or "evaluated".
    pub pose_ranges: String,
    pub tau_pos: f64,
    pub tau_rot: f64,
    pub eps_attach: f64,
    pub max_hand_speed: f64,
    pub hand_standoff: f64,
    pub object: ObjectSection,
    pub goal_half_extent: f64,
    pub episode_len: usize,
    pub max_reach_speed: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        let l = LocoConfig::default();
        let m = ManipConfig::default();
        let r = ReachConfig::default();
        EnvSection {
            kind: "loco".into(),
            dt: l.dt,
            step_limit: l.step_limit,
            gait: "trot".into(),
            steering_mode: "heading".into(),
            horizon_slots: l.horizon_slots,
            tau_base: l.tau_base,
            max_base_speed: l.max_base_speed,
            max_base_yaw_rate: l.max_base_yaw_rate,
            max_foot_speed: l.max_foot_speed,
            min_stance_feet: l.min_stance_feet,
            attach_impact_speed: l.attach_impact_speed,
            r_leg: l.layout.r_leg,
            terrain_half_extent: l.layout.terrain_half_extent,
            reset_jitter_pos: l.reset_jitter_pos,
            reset_jitter_theta: l.reset_jitter_theta,
            duration_override: None,
            task: "repose".into(),
            n_targets: 4,
            n_rotations: 4,
            pose_ranges: "trained".into(),
            tau_pos: m.tau_pos,
            tau_rot: m.tau_rot,
            eps_attach: m.eps_attach,
            max_hand_speed: m.max_hand_speed,
            hand_standoff: m.hand_standoff,
            object: ObjectSection::default(),
            goal_half_extent: r.goal_half_extent,
            episode_len: r.episode_len,
            max_reach_speed: r.max_speed,
        }
    }
}

pub fn parse_gait_selection(name: &str) -> Result<GaitSelection> {
    if name == "multi" {
        return Ok(GaitSelection::MultiGait);
    }
    GaitType::from_name(name)
        .map(GaitSelection::Fixed)
        .with_context(|| format!("unknown gait {name:?}"))
}

pub fn parse_steering(name: &str) -> Result<SteeringMode> {
    match name {
        "heading" => Ok(SteeringMode::Heading),
        "yaw_rate" => Ok(SteeringMode::YawRate),
        other => bail!("unknown steering mode {other:?}"),
    }
}

pub fn parse_pose_ranges(name: &str) -> Result<PoseRanges> {
    match name {
        "trained" => Ok(PoseRanges::trained()),
        "evaluated" => Ok(PoseRanges::evaluated()),
        other => bail!("unknown pose ranges {other:?} (use trained or evaluated)"),
    }
}

impl EnvSection {
    pub fn to_loco(&self, reward: &RewardSection, plan: &PlanSection) -> Result<LocoConfig> {
        let mut cfg = LocoConfig::default();
        cfg.dt = self.dt;
        cfg.step_limit = self.step_limit;
        cfg.gait = parse_gait_selection(&self.gait)?;
        cfg.steering_mode = parse_steering(&self.steering_mode)?;
        cfg.horizon_slots = self.horizon_slots;
        cfg.tau_base = self.tau_base;
        cfg.max_base_speed = self.max_base_speed;
        cfg.max_base_yaw_rate = self.max_base_yaw_rate;
        cfg.max_foot_speed = self.max_foot_speed;
        cfg.min_stance_feet = self.min_stance_feet;
        cfg.attach_impact_speed = self.attach_impact_speed;
        cfg.layout.r_leg = self.r_leg;
        cfg.layout.terrain_half_extent = self.terrain_half_extent;
        cfg.reset_jitter_pos = self.reset_jitter_pos;
        cfg.reset_jitter_theta = self.reset_jitter_theta;
        cfg.duration_override = self.duration_override;
        cfg.ranges = plan.to_gait_ranges();
        cfg.reward = reward.to_core();
        cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(cfg)
    }

    pub fn to_manip(&self, reward: &RewardSection) -> Result<ManipConfig> {
        let mut cfg = ManipConfig::default();
        cfg.dt = self.dt;
        cfg.step_limit = self.step_limit;
        cfg.object = self.object.to_core()?;
        cfg.task = match self.task.as_str() {
            "repose" => ManipTask::Repose {
                n_targets: self.n_targets,
                ranges: parse_pose_ranges(&self.pose_ranges)?,
            },
            "reorient" => ManipTask::Reorient {
                n_rotations: self.n_rotations,
            },
            other => bail!("unknown manipulation task {other:?}"),
        };
        cfg.tau_pos = self.tau_pos;
        cfg.tau_rot = self.tau_rot;
        cfg.eps_attach = self.eps_attach;
        cfg.max_hand_speed = self.max_hand_speed;
        cfg.hand_standoff = self.hand_standoff;
        cfg.reset_jitter_pos = self.reset_jitter_pos;
        cfg.reset_jitter_theta = self.reset_jitter_theta;
        cfg.reward = reward.to_core();
        cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(cfg)
    }

    pub fn to_reach(&self, reward: &RewardSection) -> Result<ReachConfig> {
        let mut cfg = ReachConfig::default();
        cfg.dt = self.dt;
        cfg.max_speed = self.max_reach_speed;
        cfg.goal_half_extent = self.goal_half_extent;
        cfg.episode_len = self.episode_len;
        cfg.reward = reward.to_core();
        Ok(cfg)
    }
}

/// Plan-sampling ranges used at training and planning time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub seed: u64,
    pub stride: (f64, f64),
    pub stance_width: (f64, f64),
    pub offset: f64,
    pub duration: (f64, f64),
    pub heading: (f64, f64),
    pub yaw_rate: (f64, f64),
}

impl Default for PlanSection {
    fn default() -> Self {
        let r = GaitRanges::default();
        PlanSection {
            seed: 0,
            stride: r.stride,
            stance_width: r.stance_width,
            offset: r.offset,
            duration: r.duration,
            heading: r.heading,
            yaw_rate: r.yaw_rate,
        }
    }
}

impl PlanSection {
    pub fn to_gait_ranges(&self) -> GaitRanges {
        GaitRanges {
            stride: self.stride,
            stance_width: self.stance_width,
            offset: self.offset,
            duration: self.duration,
            heading: self.heading,
            yaw_rate: self.yaw_rate,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    pub entropy_coef_start: f64,
    pub entropy_coef_end: f64,
    pub value_coef: f64,
    pub grad_clip: f64,
    pub total_env_steps: u64,
    pub num_envs: usize,
    pub rollout_len: usize,
    pub hidden: Vec<usize>,
    pub recurrent: bool,
    pub rec_hidden: usize,
    pub seed: u64,
    pub init_log_std: f64,
    /// Write a checkpoint every this many iterations.
    pub checkpoint_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            gamma: t.gamma,
            gae_lambda: t.gae_lambda,
            clip: t.clip,
            epochs: t.epochs,
            minibatches: t.minibatches,
            learning_rate: t.learning_rate,
            entropy_coef_start: t.entropy_coef_start,
            entropy_coef_end: t.entropy_coef_end,
            value_coef: t.value_coef,
            grad_clip: t.grad_clip,
            total_env_steps: t.total_env_steps,
            num_envs: t.num_envs,
            rollout_len: t.rollout_len,
            hidden: t.hidden,
            recurrent: t.recurrent,
            rec_hidden: t.rec_hidden,
            seed: t.seed,
            init_log_std: t.init_log_std,
            checkpoint_every: 50,
        }
    }
}

impl TrainSection {
    pub fn to_core(&self, config_digest: u64) -> TrainConfig {
        TrainConfig {
            gamma: self.gamma,
            gae_lambda: self.gae_lambda,
            clip: self.clip,
            epochs: self.epochs,
            minibatches: self.minibatches,
            learning_rate: self.learning_rate,
            entropy_coef_start: self.entropy_coef_start,
            entropy_coef_end: self.entropy_coef_end,
            value_coef: self.value_coef,
            grad_clip: self.grad_clip,
            total_env_steps: self.total_env_steps,
            num_envs: self.num_envs,
            rollout_len: self.rollout_len,
            hidden: self.hidden.clone(),
            recurrent: self.recurrent,
            rec_hidden: self.rec_hidden,
            seed: self.seed,
            init_log_std: self.init_log_std,
            config_digest,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub seed: u64,
    pub episodes_per_cell: usize,
    pub episode_steps: usize,
    /// Velocity grid axis: from -max to +max in `velocity_steps` points.
    pub velocity_max: f64,
    pub velocity_points: usize,
    pub durations: Vec<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            seed: 0,
            episodes_per_cell: 100,
            episode_steps: 300,
            velocity_max: 1.0,
            velocity_points: 9,
            durations: vec![0.2, 0.3, 0.35, 0.5, 0.7, 0.9],
        }
    }
}

impl EvalSection {
    pub fn velocity_axis(&self) -> Vec<f64> {
        let n = self.velocity_points.max(2);
        (0..n)
            .map(|i| -self.velocity_max + 2.0 * self.velocity_max * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// The whole run configuration.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub env: EnvSection,
    pub reward: RewardSection,
    pub plan: PlanSection,
    pub train: TrainSection,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid run config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.env.kind.as_str() {
            "loco" => {
                self.env.to_loco(&self.reward, &self.plan)?;
            }
            "manip" => {
                self.env.to_manip(&self.reward)?;
            }
            "reach" => {
                self.env.to_reach(&self.reward)?;
            }
            other => bail!("unknown environment kind {other:?}"),
        }
        self.train
            .to_core(0)
            .validate()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(())
    }

    /// The fully resolved document, defaults included.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Digest of the resolved document; embedded in checkpoints and output
    /// file names.
    pub fn digest(&self) -> u64 {
        digest_bytes(self.resolved_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let cfg = RunConfig::default();
        let text = cfg.resolved_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"env": {"kind": "loco", "warp_drive": 9}}"#;
        assert!(RunConfig::from_json(text).is_err());
        let text = r#"{"unknown_section": {}}"#;
        assert!(RunConfig::from_json(text).is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let text = r#"{"env": {"kind": "manip", "task": "reorient"}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.env.task, "reorient");
        assert_eq!(cfg.train.gamma, 0.99);
        // resolved dump records the defaulted values
        assert!(cfg.resolved_json().contains("\"gae_lambda\": 0.95"));
    }

    #[test]
    fn invalid_values_rejected() {
        let text = r#"{"env": {"kind": "loco", "dt": 0.0}}"#;
        assert!(RunConfig::from_json(text).is_err());
        let text = r#"{"env": {"kind": "manip", "object": {"shape": "tetrahedron"}}}"#;
        assert!(RunConfig::from_json(text).is_err());
        let text = r#"{"reward": {"sigma_sq": -1.0}}"#;
        assert!(RunConfig::from_json(text).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.train.seed = 1;
        assert_ne!(a.digest(), b.digest());
    }
}
