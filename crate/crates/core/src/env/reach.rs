//! Single-effector reach toy: move a point to a sampled goal under the reach
//! kernel. Small enough to verify that the trainer actually learns.

use alloc::vec::Vec;

use super::{validate_action, Environment, StepInfo, StepOutcome};
use crate::error::CoreError;
use crate::math::{fnv1a_str, Vec2};
use crate::reward::{reach_reward, EffectorSnapshot, RewardConfig};
use crate::rng::{derive_seed, rng_from_seed, uniform, DetRng};

#[derive(Clone, Debug)]
pub struct ReachConfig {
    pub dt: f64,
    pub max_speed: f64,
    /// Goals are sampled uniformly from this square half-extent.
    pub goal_half_extent: f64,
    pub episode_len: usize,
    pub reward: RewardConfig,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            dt: 0.02,
            max_speed: 1.0,
            goal_half_extent: 1.0,
            episode_len: 60,
            reward: RewardConfig::default(),
        }
    }
}

pub const REACH_OBS_DIM: usize = 4;
pub const REACH_ACTION_DIM: usize = 2;

const REACH_LAYOUT_DESC: &str = "reach/v1:goal_delta:2,pos:2|dim=4";

/// The toy environment.
pub struct ReachEnv {
    cfg: ReachConfig,
    episode_rng: DetRng,
    pos: Vec2,
    goal: Vec2,
    steps: usize,
    done: bool,
}

impl ReachEnv {
    pub fn new(cfg: ReachConfig, seed: u64) -> Result<Self, CoreError> {
        if !(cfg.dt > 0.0) || !(cfg.max_speed > 0.0) || cfg.episode_len == 0 {
            return Err(CoreError::Config(alloc::string::String::from(
                "reach config values must be positive",
            )));
        }
        Ok(ReachEnv {
            cfg,
            episode_rng: rng_from_seed(derive_seed(seed, 0)),
            pos: Vec2::ZERO,
            goal: Vec2::ZERO,
            steps: 0,
            done: true,
        })
    }

    pub fn distance(&self) -> f64 {
        self.pos.dist(self.goal)
    }

    fn obs(&self) -> Vec<f64> {
        let d = self.goal - self.pos;
        alloc::vec![d.x, d.y, self.pos.x, self.pos.y]
    }
}

impl Environment for ReachEnv {
    fn obs_dim(&self) -> usize {
        REACH_OBS_DIM
    }

    fn action_dim(&self) -> usize {
        REACH_ACTION_DIM
    }

    fn layout_hash(&self) -> u64 {
        fnv1a_str(REACH_LAYOUT_DESC)
    }

    fn reset(&mut self) -> Result<Vec<f64>, CoreError> {
        let r = self.cfg.goal_half_extent;
        self.goal = Vec2::new(
            uniform(&mut self.episode_rng, -r, r),
            uniform(&mut self.episode_rng, -r, r),
        );
        self.pos = Vec2::ZERO;
        self.steps = 0;
        self.done = false;
        Ok(self.obs())
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, CoreError> {
        validate_action(action, REACH_ACTION_DIM)?;
        if self.done {
            return Err(CoreError::Env(alloc::string::String::from(
                "step after episode end",
            )));
        }
        let v = Vec2::new(
            action[0].clamp(-1.0, 1.0) * self.cfg.max_speed,
            action[1].clamp(-1.0, 1.0) * self.cfg.max_speed,
        );
        self.pos += v * self.cfg.dt;
        self.steps += 1;
        let snap = EffectorSnapshot {
            actual_pos: self.pos,
            actual_contact: false,
            goal_point: self.goal,
            commanded_contact: false,
            s_remaining: 0.0,
        };
        let reach = reach_reward(&snap, &self.cfg.reward);
        let truncated = self.steps >= self.cfg.episode_len;
        self.done = truncated;
        let mut info = StepInfo::default();
        info.breakdown.reach = reach;
        Ok(StepOutcome {
            obs: self.obs(),
            reward: reach,
            terminal: false,
            truncated,
            info,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_grows_towards_goal() {
        let mut env = ReachEnv::new(ReachConfig::default(), 1).unwrap();
        let obs = env.reset().unwrap();
        // drive straight at the goal
        let toward = [obs[0], obs[1]];
        let n = crate::math::hypot(toward[0], toward[1]);
        let act = alloc::vec![toward[0] / n, toward[1] / n];
        let first = env.step(&act).unwrap().reward;
        let mut last = first;
        for _ in 0..40 {
            let out = env.step(&act).unwrap();
            last = out.reward;
            if out.done() {
                break;
            }
        }
        assert!(last > first);
    }

    #[test]
    fn episodes_truncate() {
        let mut cfg = ReachConfig::default();
        cfg.episode_len = 3;
        let mut env = ReachEnv::new(cfg, 1).unwrap();
        env.reset().unwrap();
        let act = alloc::vec![0.0, 0.0];
        assert!(!env.step(&act).unwrap().done());
        assert!(!env.step(&act).unwrap().done());
        assert!(env.step(&act).unwrap().truncated);
    }
}
