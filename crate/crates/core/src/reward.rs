//! Contact rewards, object-pose reward, discovery bonus and regularization
//! penalties.
//!
//! The three phase rewards are mutually exclusive per effector and tick:
//! reach pays a distance kernel while a no-contact command is about to flip,
//! hold pays for realized commanded contact (plus a placement kernel), and
//! detach pays a unit for staying clear of contact early in a no-contact
//! command.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math::{exp, Vec2};

/// Weights for the regularization penalty terms; all must be <= 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyWeights {
    /// Multiplies the squared action-rate norm.
    pub action_rate: f64,
    /// Multiplies the squared base angular velocity.
    pub base_ang_vel: f64,
    /// Multiplies the summed squared effector speeds.
    pub effector_speed: f64,
    /// Multiplies the slip/impact event count.
    pub impact: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights {
            action_rate: -0.01,
            base_ang_vel: -0.05,
            effector_speed: -0.001,
            impact: -0.5,
        }
    }
}

/// Parameters of the contact and pose rewards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    /// Distance-kernel scale (denominator of the reach/hold exponent).
    pub sigma_sq: f64,
    /// Extra hold reward for contact at the commanded location.
    pub alpha_hold: f64,
    /// Reach threshold in seconds.
    pub delta: f64,
    /// Pose-reward numerators.
    pub c_pos: f64,
    pub c_rot: f64,
    /// Pose-reward softening offsets.
    pub eps_pos: f64,
    pub eps_rot: f64,
    /// Goal-discovery bonus.
    pub bonus: f64,
    /// Use squared distance in the kernel exponent instead of the plain
    /// L2 norm. Off by default.
    pub squared_distance: bool,
    pub penalties: PenaltyWeights,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            sigma_sq: 0.25,
            alpha_hold: 1.0,
            delta: 0.15,
            c_pos: 0.5,
            c_rot: 0.5,
            eps_pos: 0.05,
            eps_rot: 0.1,
            bonus: 5.0,
            squared_distance: false,
            penalties: PenaltyWeights::default(),
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.sigma_sq > 0.0) {
            return Err(CoreError::Config(format!(
                "sigma_sq must be > 0, got {}",
                self.sigma_sq
            )));
        }
        if !(self.eps_pos > 0.0) || !(self.eps_rot > 0.0) {
            return Err(CoreError::Config(format!(
                "eps_pos/eps_rot must be > 0, got {}/{}",
                self.eps_pos, self.eps_rot
            )));
        }
        if !(self.c_pos > 0.0) || !(self.c_rot > 0.0) {
            return Err(CoreError::Config(format!(
                "c_pos/c_rot must be > 0, got {}/{}",
                self.c_pos, self.c_rot
            )));
        }
        if self.alpha_hold < 0.0 || self.bonus < 0.0 || !(self.delta > 0.0) {
            return Err(CoreError::Config(format!(
                "alpha_hold/bonus must be >= 0 and delta > 0, got {}/{}/{}",
                self.alpha_hold, self.bonus, self.delta
            )));
        }
        let w = &self.penalties;
        for (name, v) in [
            ("action_rate", w.action_rate),
            ("base_ang_vel", w.base_ang_vel),
            ("effector_speed", w.effector_speed),
            ("impact", w.impact),
        ] {
            if v > 0.0 {
                return Err(CoreError::Config(format!(
                    "penalty weight {name} must be <= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything the phase rewards need to know about one effector at one tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectorSnapshot {
    /// Actual effector position in world coordinates.
    pub actual_pos: Vec2,
    /// Actual contact state.
    pub actual_contact: bool,
    /// Commanded contact point of the current switch.
    pub goal_point: Vec2,
    /// Commanded contact indicator of the current switch.
    pub commanded_contact: bool,
    /// Time remaining in the current command.
    pub s_remaining: f64,
}

fn kernel_distance(snap: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
    let d = snap.goal_point.dist(snap.actual_pos);
    if cfg.squared_distance {
        d * d
    } else {
        d
    }
}

/// Distance kernel gated on a no-contact command inside the reach window.
/// Value in [0, 1].
pub fn reach_reward(snap: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
    if snap.commanded_contact || snap.s_remaining > cfg.delta {
        return 0.0;
    }
    exp(-kernel_distance(snap, cfg) / cfg.sigma_sq)
}

/// Unit reward for realized commanded contact, plus a placement kernel
/// weighted by `alpha_hold`. Value in {0} or [1, 1 + alpha_hold].
pub fn hold_reward(snap: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
    if !(snap.commanded_contact && snap.actual_contact) {
        return 0.0;
    }
    1.0 + cfg.alpha_hold * exp(-kernel_distance(snap, cfg) / cfg.sigma_sq)
}

/// Unit reward for staying clear of contact while a no-contact command has
/// more than the reach threshold remaining. Value in {0, 1}.
pub fn detach_reward(snap: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
    if !snap.commanded_contact && !snap.actual_contact && snap.s_remaining > cfg.delta {
        1.0
    } else {
        0.0
    }
}

/// Object-pose tracking reward; strictly decreasing in both errors.
pub fn pose_reward(dp: f64, dtheta: f64, cfg: &RewardConfig) -> f64 {
    cfg.c_pos / (cfg.eps_pos + dp) + cfg.c_rot / (cfg.eps_rot + dtheta)
}

/// Per-term reward account for one step. `total` sums the fields in a fixed
/// order so the breakdown always reproduces the reported reward exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RewardBreakdown {
    pub reach: f64,
    pub hold: f64,
    pub detach: f64,
    pub pose: f64,
    pub bonus: f64,
    pub penalty: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.reach + self.hold + self.detach + self.pose + self.bonus + self.penalty
    }
}

/// Sum of the phase rewards over all effectors plus the optional pose term.
///
/// `pose_error` carries `(positional error, wrapped angular error)` for
/// manipulation tasks. Returns the scalar total together with the per-term
/// breakdown (bonus and penalty fields zero).
pub fn total_contact_reward(
    snapshots: &[EffectorSnapshot],
    pose_error: Option<(f64, f64)>,
    cfg: &RewardConfig,
) -> Result<(f64, RewardBreakdown), CoreError> {
    if snapshots.is_empty() {
        return Err(CoreError::InvalidArgument(alloc::string::String::from(
            "total contact reward needs at least one effector",
        )));
    }
    let mut b = RewardBreakdown::default();
    for snap in snapshots {
        b.reach += reach_reward(snap, cfg);
        b.hold += hold_reward(snap, cfg);
        b.detach += detach_reward(snap, cfg);
    }
    if let Some((dp, dtheta)) = pose_error {
        b.pose = pose_reward(dp, dtheta, cfg);
    }
    Ok((b.total(), b))
}

/// Weighted sum of squared motion norms and discrete slip/impact events;
/// non-positive for any valid config.
pub fn regularization_penalties(
    action: &[f64],
    prev_action: &[f64],
    base_ang_vel: f64,
    effector_speeds: &[f64],
    impact_events: u32,
    cfg: &RewardConfig,
) -> Result<f64, CoreError> {
    if action.len() != prev_action.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "action len {} vs previous {}",
            action.len(),
            prev_action.len()
        )));
    }
    let w = &cfg.penalties;
    let rate_sq: f64 = action
        .iter()
        .zip(prev_action)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    let speed_sq: f64 = effector_speeds.iter().map(|v| v * v).sum();
    Ok(w.action_rate * rate_sq
        + w.base_ang_vel * base_ang_vel * base_ang_vel
        + w.effector_speed * speed_sq
        + w.impact * f64::from(impact_events))
}

/// The discovery bonus: `cfg.bonus` when a goal advancement fired.
pub fn bonus_reward(bonus_fired: bool, cfg: &RewardConfig) -> f64 {
    if bonus_fired {
        cfg.bonus
    } else {
        0.0
    }
}

/// Convenience: assemble snapshots for all effectors of a tracker state.
pub fn snapshots_from_windows(
    windows: &[crate::contact::GoalWindow],
    actual_pos: &[Vec2],
    actual_contact: &[bool],
    s_remaining: f64,
) -> Vec<EffectorSnapshot> {
    windows
        .iter()
        .zip(actual_pos.iter().zip(actual_contact))
        .map(|(w, (p, c))| EffectorSnapshot {
            actual_pos: *p,
            actual_contact: *c,
            goal_point: w.current.point,
            commanded_contact: w.current.in_contact,
            s_remaining,
        })
        .collect()
}
