//! On-policy actor-critic training.
//!
//! The trainer owns a set of independent environments, collects fixed-length
//! rollout segments with per-slot action-noise streams (so results do not
//! depend on stepping order), computes advantages piecewise across episode
//! boundaries, and applies clipped-surrogate updates with a linearly decayed
//! entropy coefficient. Everything is deterministic given the seed.

pub mod adam;
pub mod checkpoint;
pub mod fdcheck;
pub mod gae;
pub mod ppo;

pub use adam::{clip_grad_norm, Adam};
pub use checkpoint::{
    decode_checkpoint, decode_summary, encode_checkpoint, Checkpoint, CheckpointSummary, Dtype,
};
pub use fdcheck::finite_diff_check;
pub use gae::gae;
pub use ppo::{ppo_loss_and_grad, ppo_update, PpoStats, RolloutBatch};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::env::Environment;
use crate::error::CoreError;
use crate::policy::{log_prob_tanh, sample_raw, squash, ArchDesc, PolicyParams};
use crate::reward::RewardBreakdown;
use crate::rng::{derive_seed, rng_from_seed, DetRng};

/// Training hyperparameters and network architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    /// Entropy coefficient decays linearly from start to end over
    /// `total_env_steps`.
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
    /// Initial log standard deviation of the action distribution.
    pub init_log_std: f64,
    /// Digest of the resolved run configuration, embedded in checkpoints.
    pub config_digest: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            epochs: 5,
            minibatches: 4,
            learning_rate: 3e-4,
            entropy_coef_start: 0.01,
            entropy_coef_end: 0.001,
            value_coef: 0.5,
            grad_clip: 1.0,
            total_env_steps: 1_000_000,
            num_envs: 256,
            rollout_len: 24,
            hidden: vec![64, 64],
            recurrent: false,
            rec_hidden: 32,
            seed: 0,
            init_log_std: -0.5,
            config_digest: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        for (name, ok) in [
            ("gamma", self.gamma > 0.0 && self.gamma <= 1.0),
            ("gae_lambda", self.gae_lambda > 0.0 && self.gae_lambda <= 1.0),
            ("clip", self.clip > 0.0),
            ("learning_rate", self.learning_rate > 0.0),
            ("epochs", self.epochs >= 1),
            ("rollout_len", self.rollout_len >= 1),
            ("total_env_steps", self.total_env_steps >= 1),
            ("minibatches", self.minibatches >= 1),
            (
                "num_envs",
                self.num_envs >= self.minibatches && self.num_envs >= 1,
            ),
        ] {
            if !ok {
                return Err(CoreError::Config(format!("invalid {name}")));
            }
        }
        Ok(())
    }
}

/// Linear interpolation of the entropy coefficient, clamped at the ends.
pub fn entropy_schedule(step: u64, cfg: &TrainConfig) -> f64 {
    let frac = step as f64 / cfg.total_env_steps as f64;
    if frac >= 1.0 {
        cfg.entropy_coef_end
    } else if frac <= 0.0 {
        cfg.entropy_coef_start
    } else {
        cfg.entropy_coef_start + (cfg.entropy_coef_end - cfg.entropy_coef_start) * frac
    }
}

/// Per-iteration diagnostics, one row of the training log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationStats {
    pub global_step: u64,
    /// Mean per-step reward over the rollout.
    pub mean_step_reward: f64,
    /// Mean per-step reward terms over the rollout.
    pub breakdown: RewardBreakdown,
    pub entropy_coef: f64,
    pub ppo: PpoStats,
    pub episodes_finished: usize,
    /// Mean return of episodes that finished inside this rollout.
    pub mean_episode_return: Option<f64>,
}

/// The training driver.
pub struct Trainer<E: Environment> {
    cfg: TrainConfig,
    envs: Vec<E>,
    params: PolicyParams,
    adam: Adam,
    obs: Vec<Vec<f64>>,
    hidden: Vec<Vec<f64>>,
    fresh: Vec<bool>,
    action_rngs: Vec<DetRng>,
    shuffle_rng: DetRng,
    global_step: u64,
    episode_return: Vec<f64>,
}

impl<E: Environment> Trainer<E> {
    pub fn new(envs: Vec<E>, cfg: TrainConfig) -> Result<Self, CoreError> {
        cfg.validate()?;
        if envs.len() != cfg.num_envs {
            return Err(CoreError::Config(format!(
                "{} environments provided, config expects {}",
                envs.len(),
                cfg.num_envs
            )));
        }
        let desc = ArchDesc {
            obs_dim: envs[0].obs_dim(),
            act_dim: envs[0].action_dim(),
            hidden: cfg.hidden.clone(),
            recurrent: cfg.recurrent,
            rec_hidden: cfg.rec_hidden,
            layout_hash: envs[0].layout_hash(),
        };
        let mut params =
            PolicyParams::init(desc, &mut rng_from_seed(derive_seed(cfg.seed, 0xA11)))?;
        params.tensor_mut("actor.log_std")?.fill(cfg.init_log_std);
        let adam = Adam::new(params.num_params());
        Self::with_state(envs, cfg, params, adam, 0)
    }

    /// Resume from existing parameters and optimizer state.
    pub fn with_state(
        mut envs: Vec<E>,
        cfg: TrainConfig,
        params: PolicyParams,
        adam: Adam,
        global_step: u64,
    ) -> Result<Self, CoreError> {
        cfg.validate()?;
        let layout = envs[0].layout_hash();
        if envs.iter().any(|e| e.layout_hash() != layout) {
            return Err(CoreError::Config(String::from(
                "environments disagree on observation layout",
            )));
        }
        if params.desc().layout_hash != layout {
            return Err(CoreError::Checkpoint(format!(
                "checkpoint layout hash {:#x} does not match environment {:#x}",
                params.desc().layout_hash,
                layout
            )));
        }
        if params.desc().obs_dim != envs[0].obs_dim()
            || params.desc().act_dim != envs[0].action_dim()
        {
            return Err(CoreError::Checkpoint(String::from(
                "checkpoint dimensions do not match environment",
            )));
        }
        let n = envs.len();
        let mut obs = Vec::with_capacity(n);
        for e in envs.iter_mut() {
            obs.push(e.reset()?);
        }
        let h = params.desc().hidden_state_dim();
        let action_rngs = (0..n)
            .map(|i| rng_from_seed(derive_seed(cfg.seed, 0x1000 + i as u64)))
            .collect();
        let shuffle_rng = rng_from_seed(derive_seed(cfg.seed, 0x5FF));
        Ok(Trainer {
            cfg,
            envs,
            params,
            adam,
            obs,
            hidden: vec![vec![0.0; h]; n],
            fresh: vec![true; n],
            action_rngs,
            shuffle_rng,
            global_step,
            episode_return: vec![0.0; n],
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn optimizer(&self) -> &Adam {
        &self.adam
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn cfg(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Collect one rollout segment and run one PPO update.
    pub fn iterate(&mut self) -> Result<IterationStats, CoreError> {
        let n = self.envs.len();
        let t_len = self.cfg.rollout_len;
        let obs_dim = self.params.desc().obs_dim;
        let act_dim = self.params.desc().act_dim;
        let hidden_dim = self.params.desc().hidden_state_dim();
        let eff_log_std = self.params.effective_log_std();

        let mut batch = RolloutBatch {
            num_envs: n,
            steps: t_len,
            obs_dim,
            act_dim,
            hidden_dim,
            obs: vec![0.0; n * t_len * obs_dim],
            raw_actions: vec![0.0; n * t_len * act_dim],
            log_probs: vec![0.0; n * t_len],
            advantages: vec![0.0; n * t_len],
            returns: vec![0.0; n * t_len],
            episode_starts: vec![false; n * t_len],
            start_hidden: self.hidden.concat(),
        };
        let mut rewards = vec![0.0; n * t_len];
        let mut values = vec![0.0; n * t_len];
        let mut cuts = vec![false; n * t_len];
        let mut cut_bootstrap = vec![0.0; n * t_len];
        let mut breakdown_sum = RewardBreakdown::default();
        let mut reward_sum = 0.0;
        let mut finished = Vec::new();

        for t in 0..t_len {
            for i in 0..n {
                let flat = i * t_len + t;
                batch.episode_starts[flat] = self.fresh[i];
                self.fresh[i] = false;
                batch.obs[flat * obs_dim..(flat + 1) * obs_dim].copy_from_slice(&self.obs[i]);
                let out = self.params.forward(&self.obs[i], &self.hidden[i])?;
                values[flat] = out.value;
                let raw = sample_raw(&out.mean, &eff_log_std, &mut self.action_rngs[i]);
                let lp = log_prob_tanh(&out.mean, &eff_log_std, &raw);
                batch.raw_actions[flat * act_dim..(flat + 1) * act_dim].copy_from_slice(&raw);
                batch.log_probs[flat] = lp;
                let action = squash(&raw);
                let res = self.envs[i].step(&action)?;
                if !res.reward.is_finite() {
                    return Err(CoreError::TrainingAbort(format!(
                        "non-finite reward from environment {i}"
                    )));
                }
                rewards[flat] = res.reward;
                reward_sum += res.reward;
                let b = &res.info.breakdown;
                breakdown_sum.reach += b.reach;
                breakdown_sum.hold += b.hold;
                breakdown_sum.detach += b.detach;
                breakdown_sum.pose += b.pose;
                breakdown_sum.bonus += b.bonus;
                breakdown_sum.penalty += b.penalty;
                self.episode_return[i] += res.reward;
                self.hidden[i] = out.hidden_next;
                if res.done() {
                    cuts[flat] = true;
                    cut_bootstrap[flat] = if res.truncated {
                        self.params.forward(&res.obs, &self.hidden[i])?.value
                    } else {
                        0.0
                    };
                    finished.push(self.episode_return[i]);
                    self.episode_return[i] = 0.0;
                    self.obs[i] = self.envs[i].reset()?;
                    self.hidden[i] = vec![0.0; hidden_dim];
                    self.fresh[i] = true;
                } else {
                    self.obs[i] = res.obs;
                }
            }
        }

        // advantages, piecewise between episode cuts
        for i in 0..n {
            let base = i * t_len;
            let mut t0 = 0;
            while t0 < t_len {
                let mut t1 = t0;
                while t1 < t_len && !cuts[base + t1] {
                    t1 += 1;
                }
                let end = t1.min(t_len - 1);
                let bootstrap = if t1 < t_len {
                    cut_bootstrap[base + t1]
                } else {
                    // segment ended mid-episode: bootstrap from the live state
                    self.params.forward(&self.obs[i], &self.hidden[i])?.value
                };
                let piece = t0..=end;
                let r: Vec<f64> = piece.clone().map(|t| rewards[base + t]).collect();
                let mut v: Vec<f64> = piece.clone().map(|t| values[base + t]).collect();
                v.push(bootstrap);
                let dones = vec![false; r.len()];
                let (adv, ret) = gae(&r, &v, &dones, self.cfg.gamma, self.cfg.gae_lambda)?;
                for (k, t) in piece.enumerate() {
                    batch.advantages[base + t] = adv[k];
                    batch.returns[base + t] = ret[k];
                }
                t0 = end + 1;
            }
        }

        let entropy_coef = entropy_schedule(self.global_step, &self.cfg);
        let stats = ppo_update(
            &mut self.params,
            &mut self.adam,
            &batch,
            &self.cfg,
            entropy_coef,
            &mut self.shuffle_rng,
        )?;
        self.global_step += (n * t_len) as u64;

        let samples = (n * t_len) as f64;
        let mean_breakdown = RewardBreakdown {
            reach: breakdown_sum.reach / samples,
            hold: breakdown_sum.hold / samples,
            detach: breakdown_sum.detach / samples,
            pose: breakdown_sum.pose / samples,
            bonus: breakdown_sum.bonus / samples,
            penalty: breakdown_sum.penalty / samples,
        };
        Ok(IterationStats {
            global_step: self.global_step,
            mean_step_reward: reward_sum / samples,
            breakdown: mean_breakdown,
            entropy_coef,
            ppo: stats,
            episodes_finished: finished.len(),
            mean_episode_return: if finished.is_empty() {
                None
            } else {
                Some(finished.iter().sum::<f64>() / finished.len() as f64)
            },
        })
    }

    /// Run until the configured step budget, invoking `on_iter` per update.
    pub fn train_with<F>(&mut self, mut on_iter: F) -> Result<Vec<IterationStats>, CoreError>
    where
        F: FnMut(&IterationStats) -> Result<(), CoreError>,
    {
        let mut all = Vec::new();
        while self.global_step < self.cfg.total_env_steps {
            let stats = self.iterate()?;
            on_iter(&stats)?;
            all.push(stats);
        }
        Ok(all)
    }

    pub fn train(&mut self) -> Result<Vec<IterationStats>, CoreError> {
        self.train_with(|_| Ok(()))
    }

    /// Deterministic greedy action for evaluation: the squashed mean.
    pub fn greedy_action(
        params: &PolicyParams,
        obs: &[f64],
        hidden: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
        let out = params.forward(obs, hidden)?;
        Ok((squash(&out.mean), out.hidden_next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ReachConfig, ReachEnv};

    fn small_cfg() -> TrainConfig {
        let mut cfg = TrainConfig::default();
        cfg.num_envs = 8;
        cfg.rollout_len = 16;
        cfg.total_env_steps = 8 * 16 * 3;
        cfg.hidden = vec![16];
        cfg.seed = 7;
        cfg
    }

    fn reach_envs(n: usize, seed: u64) -> Vec<ReachEnv> {
        (0..n)
            .map(|i| {
                ReachEnv::new(ReachConfig::default(), derive_seed(seed, i as u64)).unwrap()
            })
            .collect()
    }

    #[test]
    fn entropy_schedule_endpoints() {
        let cfg = TrainConfig::default();
        assert_eq!(entropy_schedule(0, &cfg), 0.01);
        assert_eq!(entropy_schedule(cfg.total_env_steps, &cfg), 0.001);
        let mid = entropy_schedule(cfg.total_env_steps / 2, &cfg);
        assert!((mid - 0.0055).abs() < 1e-12);
        // clamped beyond the end
        assert_eq!(entropy_schedule(cfg.total_env_steps * 2, &cfg), 0.001);
    }

    #[test]
    fn training_runs_and_counts_steps() {
        let cfg = small_cfg();
        let mut tr = Trainer::new(reach_envs(cfg.num_envs, 1), cfg.clone()).unwrap();
        let stats = tr.train().unwrap();
        assert_eq!(stats.len(), 3);
        assert_eq!(tr.global_step(), cfg.total_env_steps);
        assert!(stats.iter().all(|s| s.mean_step_reward.is_finite()));
    }

    #[test]
    fn identical_seeds_identical_stat_streams() {
        let cfg = small_cfg();
        let run = || {
            let mut tr = Trainer::new(reach_envs(cfg.num_envs, 1), cfg.clone()).unwrap();
            tr.train().unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn recurrent_training_runs() {
        let mut cfg = small_cfg();
        cfg.recurrent = true;
        cfg.rec_hidden = 8;
        cfg.total_env_steps = 8 * 16 * 2;
        let mut tr = Trainer::new(reach_envs(cfg.num_envs, 2), cfg).unwrap();
        let stats = tr.train().unwrap();
        assert_eq!(stats.len(), 2);
    }

    #[test]
    fn resume_continues_step_count() {
        let cfg = small_cfg();
        let mut tr = Trainer::new(reach_envs(cfg.num_envs, 1), cfg.clone()).unwrap();
        tr.iterate().unwrap();
        let step = tr.global_step();
        let params = tr.params().clone();
        let adam = tr.optimizer().clone();
        let tr2 =
            Trainer::with_state(reach_envs(cfg.num_envs, 1), cfg, params, adam, step).unwrap();
        assert_eq!(tr2.global_step(), step);
    }

    #[test]
    fn layout_mismatch_rejected() {
        let cfg = small_cfg();
        let params = {
            let tr = Trainer::new(reach_envs(cfg.num_envs, 1), cfg.clone()).unwrap();
            let mut desc = tr.params().desc().clone();
            desc.layout_hash ^= 1;
            PolicyParams::zeros(desc).unwrap()
        };
        let n = params.num_params();
        let err = Trainer::with_state(reach_envs(cfg.num_envs, 1), cfg, params, Adam::new(n), 0);
        assert!(matches!(err, Err(CoreError::Checkpoint(_))));
    }
}
