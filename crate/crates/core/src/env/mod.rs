//! Deterministic planar environments grounding the contact rewards.
//!
//! Environments are pure state machines: a trajectory is a function of
//! (config, seed, action sequence). Actions are task-space velocities plus
//! per-effector contact intents, all in `[-1, 1]` before scaling; attached
//! effectors are pinned to their anchors exactly, so contact timing and
//! placement are analytically checkable.

mod loco;
mod manip;
mod reach;

pub use loco::{GaitSelection, LocoConfig, LocoEnv};
pub use manip::{ManipConfig, ManipEnv, ManipTask};
pub use reach::{ReachConfig, ReachEnv};

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::reward::RewardBreakdown;

/// Diagnostics reported alongside every step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    /// The goal cursor advanced this step.
    pub advanced: bool,
    /// A discovery bonus was paid this step.
    pub bonus_fired: bool,
    /// Stance effectors forced off their anchors by workspace violations.
    pub slip_events: u32,
    /// Attachments made above the impact speed threshold.
    pub impact_events: u32,
    /// The plan's goals are exhausted.
    pub plan_exhausted: bool,
    /// Non-finite state was detected; the episode is over.
    pub divergence: bool,
    pub breakdown: RewardBreakdown,
}

/// Result of one control step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// The episode reached a true terminal state (plan exhausted or state
    /// diverged); no value bootstrap applies.
    pub terminal: bool,
    /// The step limit cut the episode; bootstrapping applies.
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// Common contract of the planar environments.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Stable hash of the observation layout; embedded in checkpoints.
    fn layout_hash(&self) -> u64;
    /// Start a new episode and return its first observation.
    fn reset(&mut self) -> Result<Vec<f64>, CoreError>;
    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, CoreError>;
}

pub(crate) fn validate_action(action: &[f64], dim: usize) -> Result<(), CoreError> {
    if action.len() != dim {
        return Err(CoreError::ShapeMismatch(format!(
            "action length {} vs expected {dim}",
            action.len()
        )));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(CoreError::Env(alloc::string::String::from(
            "non-finite action",
        )));
    }
    Ok(())
}

/// A batch of independent environments stepped in index order.
///
/// Outputs are bitwise identical to stepping each environment on its own:
/// environments share no state, so any parallel driver that preserves
/// per-index results matches this reference implementation exactly.
pub struct VecEnv<E: Environment> {
    envs: Vec<E>,
}

impl<E: Environment> VecEnv<E> {
    pub fn new(envs: Vec<E>) -> Result<Self, CoreError> {
        if envs.is_empty() {
            return Err(CoreError::InvalidArgument(alloc::string::String::from(
                "batch needs at least one environment",
            )));
        }
        let d = envs[0].obs_dim();
        let a = envs[0].action_dim();
        if envs.iter().any(|e| e.obs_dim() != d || e.action_dim() != a) {
            return Err(CoreError::ShapeMismatch(alloc::string::String::from(
                "environments in a batch must share dimensions",
            )));
        }
        Ok(VecEnv { envs })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[E] {
        &self.envs
    }

    pub fn envs_mut(&mut self) -> &mut [E] {
        &mut self.envs
    }

    pub fn reset_all(&mut self) -> Result<Vec<Vec<f64>>, CoreError> {
        self.envs.iter_mut().map(|e| e.reset()).collect()
    }

    /// Step every environment with its own action row.
    pub fn step_all(&mut self, actions: &[Vec<f64>]) -> Result<Vec<StepOutcome>, CoreError> {
        if actions.len() != self.envs.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} action rows for {} environments",
                actions.len(),
                self.envs.len()
            )));
        }
        let dim = self.envs[0].action_dim();
        for (i, row) in actions.iter().enumerate() {
            if row.len() != dim {
                return Err(CoreError::ShapeMismatch(format!(
                    "action row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
        }
        self.envs
            .iter_mut()
            .zip(actions)
            .map(|(e, a)| e.step(a))
            .collect()
    }
}
