//! Clipped-surrogate policy optimization over rollout batches.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math::{exp, log, sqrt};
use crate::policy::{
    d_log_prob, gaussian_entropy, log_prob_tanh, PolicyParams, LOG_STD_MAX, LOG_STD_MIN,
};
use crate::rng::{DetRng, Rng};
use crate::trainer::adam::{clip_grad_norm, Adam};
use crate::trainer::TrainConfig;

/// On-policy experience, stored as one sequence per environment slot.
#[derive(Clone, Debug)]
pub struct RolloutBatch {
    pub num_envs: usize,
    pub steps: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden_dim: usize,
    /// `[env][step][obs_dim]`
    pub obs: Vec<f64>,
    /// `[env][step][act_dim]`, pre-squash actions
    pub raw_actions: Vec<f64>,
    /// `[env][step]`
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// True where a new episode begins (the recurrent state resets before
    /// this step and gradients do not flow across the boundary).
    pub episode_starts: Vec<bool>,
    /// Recurrent state at the start of each sequence, `[env][hidden_dim]`.
    pub start_hidden: Vec<f64>,
}

impl RolloutBatch {
    pub fn validate(&self) -> Result<(), CoreError> {
        let n = self.num_envs * self.steps;
        if self.obs.len() != n * self.obs_dim
            || self.raw_actions.len() != n * self.act_dim
            || self.log_probs.len() != n
            || self.advantages.len() != n
            || self.returns.len() != n
            || self.episode_starts.len() != n
            || self.start_hidden.len() != self.num_envs * self.hidden_dim
        {
            return Err(CoreError::ShapeMismatch(String::from(
                "rollout batch arrays disagree with its dimensions",
            )));
        }
        Ok(())
    }

    pub fn obs_at(&self, env: usize, step: usize) -> &[f64] {
        let i = (env * self.steps + step) * self.obs_dim;
        &self.obs[i..i + self.obs_dim]
    }

    pub fn action_at(&self, env: usize, step: usize) -> &[f64] {
        let i = (env * self.steps + step) * self.act_dim;
        &self.raw_actions[i..i + self.act_dim]
    }

    pub fn flat_index(&self, env: usize, step: usize) -> usize {
        env * self.steps + step
    }
}

/// Loss values and diagnostics for one pass.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PpoStats {
    pub total_loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Mean PPO loss and its gradient over the given environment sequences.
///
/// The loss is `-min(ratio * A, clip(ratio) * A) + value_coef * (V - R)^2 -
/// entropy_coef * H` averaged over samples, with advantages normalized by
/// `adv_norm` (mean, std) when provided. Recurrent sequences backpropagate
/// through time within the batch segment only, stopping at episode starts.
pub fn ppo_loss_and_grad(
    params: &PolicyParams,
    batch: &RolloutBatch,
    env_indices: &[usize],
    cfg: &TrainConfig,
    entropy_coef: f64,
    adv_norm: Option<(f64, f64)>,
) -> Result<(PpoStats, Vec<f64>), CoreError> {
    batch.validate()?;
    if env_indices.is_empty() {
        return Err(CoreError::InvalidArgument(String::from(
            "loss needs at least one sequence",
        )));
    }
    let n_samples = (env_indices.len() * batch.steps) as f64;
    let inv_n = 1.0 / n_samples;
    let eff_log_std = params.effective_log_std();
    let raw_log_std = params.raw_log_std();
    let log_std_off = params.log_std_offset();
    let entropy = gaussian_entropy(&eff_log_std);
    let hidden_dim = params.desc().hidden_state_dim();

    let mut grads = vec![0.0; params.num_params()];
    let mut stats = PpoStats {
        entropy,
        ..PpoStats::default()
    };

    for &env in env_indices {
        // forward pass through the sequence, caching activations
        let mut hidden: Vec<f64> = if hidden_dim == 0 {
            Vec::new()
        } else {
            batch.start_hidden[env * hidden_dim..(env + 1) * hidden_dim].to_vec()
        };
        let mut outs = Vec::with_capacity(batch.steps);
        for t in 0..batch.steps {
            if batch.episode_starts[batch.flat_index(env, t)] && hidden_dim > 0 {
                hidden.iter_mut().for_each(|h| *h = 0.0);
            }
            let out = params.forward(batch.obs_at(env, t), &hidden)?;
            hidden = out.hidden_next.clone();
            outs.push(out);
        }
        // per-step head gradients
        let mut d_means = Vec::with_capacity(batch.steps);
        let mut d_values = Vec::with_capacity(batch.steps);
        for (t, out) in outs.iter().enumerate() {
            let flat = batch.flat_index(env, t);
            let raw = batch.action_at(env, t);
            let lp_new = log_prob_tanh(&out.mean, &eff_log_std, raw);
            let ratio = exp(lp_new - batch.log_probs[flat]);
            let mut adv = batch.advantages[flat];
            if let Some((m, s)) = adv_norm {
                adv = (adv - m) / (s + 1e-8);
            }
            let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
            let s1 = ratio * adv;
            let s2 = clipped * adv;
            let unclipped_active = s1 <= s2;
            stats.policy_loss += -s1.min(s2) * inv_n;
            if (ratio - 1.0).abs() > cfg.clip {
                stats.clip_fraction += inv_n;
            }
            stats.approx_kl += ((ratio - 1.0) - log(ratio)) * inv_n;

            // d loss / d lp, zero when the clipped branch is saturated
            let d_lp = if unclipped_active || (ratio - 1.0).abs() < cfg.clip {
                -adv * ratio * inv_n
            } else {
                0.0
            };
            let (mut d_mean, d_log_std) = d_log_prob(&out.mean, &eff_log_std, raw);
            for (j, dm) in d_mean.iter_mut().enumerate() {
                *dm *= d_lp;
                // entropy bonus and log-prob gradients reach the raw
                // parameter only inside the clamp range
                if raw_log_std[j] > LOG_STD_MIN && raw_log_std[j] < LOG_STD_MAX {
                    grads[log_std_off + j] +=
                        d_lp * d_log_std[j] - entropy_coef * inv_n;
                }
            }
            let v_err = out.value - batch.returns[flat];
            stats.value_loss += cfg.value_coef * v_err * v_err * inv_n;
            d_values.push(2.0 * cfg.value_coef * v_err * inv_n);
            d_means.push(d_mean);
        }
        // backward sweep with truncated backpropagation through time
        let mut d_hidden = vec![0.0; hidden_dim];
        for t in (0..batch.steps).rev() {
            let flat = batch.flat_index(env, t);
            let d_h_prev = params.backward(
                &outs[t].cache,
                &d_means[t],
                d_values[t],
                &d_hidden,
                &mut grads,
            );
            d_hidden = if batch.episode_starts[flat] {
                vec![0.0; hidden_dim]
            } else {
                d_h_prev
            };
        }
    }
    stats.total_loss = stats.policy_loss + stats.value_loss - entropy_coef * entropy;
    Ok((stats, grads))
}

/// One PPO update: several epochs of minibatched clipped-surrogate ascent
/// with per-minibatch advantage normalization and gradient-norm clipping.
/// Deterministic given the shuffle stream.
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut Adam,
    batch: &RolloutBatch,
    cfg: &TrainConfig,
    entropy_coef: f64,
    shuffle_rng: &mut DetRng,
) -> Result<PpoStats, CoreError> {
    batch.validate()?;
    if batch.num_envs < cfg.minibatches {
        return Err(CoreError::InvalidArgument(format!(
            "{} environments cannot fill {} minibatches",
            batch.num_envs, cfg.minibatches
        )));
    }
    let mut agg = PpoStats::default();
    let mut passes = 0.0;
    for _ in 0..cfg.epochs {
        // Fisher-Yates over environment sequences
        let mut order: Vec<usize> = (0..batch.num_envs).collect();
        for i in (1..order.len()).rev() {
            let j = shuffle_rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let chunk = batch.num_envs.div_ceil(cfg.minibatches);
        for mb in order.chunks(chunk) {
            // normalize advantages within the minibatch
            let mut mean = 0.0;
            let mut count = 0.0;
            for &e in mb {
                for t in 0..batch.steps {
                    mean += batch.advantages[batch.flat_index(e, t)];
                    count += 1.0;
                }
            }
            mean /= count;
            let mut var = 0.0;
            for &e in mb {
                for t in 0..batch.steps {
                    let d = batch.advantages[batch.flat_index(e, t)] - mean;
                    var += d * d;
                }
            }
            let std = sqrt(var / count);
            let (stats, mut grads) =
                ppo_loss_and_grad(params, batch, mb, cfg, entropy_coef, Some((mean, std)))?;
            if !stats.total_loss.is_finite() {
                return Err(CoreError::TrainingAbort(format!(
                    "non-finite loss {} (policy {}, value {})",
                    stats.total_loss, stats.policy_loss, stats.value_loss
                )));
            }
            clip_grad_norm(&mut grads, cfg.grad_clip);
            adam.step(params.data_mut(), &grads, cfg.learning_rate);
            agg.total_loss += stats.total_loss;
            agg.policy_loss += stats.policy_loss;
            agg.value_loss += stats.value_loss;
            agg.entropy += stats.entropy;
            agg.clip_fraction += stats.clip_fraction;
            agg.approx_kl += stats.approx_kl;
            passes += 1.0;
        }
    }
    if params.data().iter().any(|p| !p.is_finite()) {
        return Err(CoreError::TrainingAbort(String::from(
            "non-finite parameter after update",
        )));
    }
    agg.total_loss /= passes;
    agg.policy_loss /= passes;
    agg.value_loss /= passes;
    agg.entropy /= passes;
    agg.clip_fraction /= passes;
    agg.approx_kl /= passes;
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{sample_raw, ArchDesc};
    use crate::rng::rng_from_seed;

    pub(crate) fn synthetic_batch(
        params: &PolicyParams,
        num_envs: usize,
        steps: usize,
        seed: u64,
        stale: f64,
    ) -> RolloutBatch {
        let desc = params.desc().clone();
        let mut rng = rng_from_seed(seed);
        let hidden_dim = desc.hidden_state_dim();
        let mut batch = RolloutBatch {
            num_envs,
            steps,
            obs_dim: desc.obs_dim,
            act_dim: desc.act_dim,
            hidden_dim,
            obs: Vec::new(),
            raw_actions: Vec::new(),
            log_probs: Vec::new(),
            advantages: Vec::new(),
            returns: Vec::new(),
            episode_starts: Vec::new(),
            start_hidden: vec![0.0; num_envs * hidden_dim],
        };
        // a slightly perturbed behavior policy keeps ratios near one
        let mut behavior = params.clone();
        for p in behavior.data_mut() {
            *p += stale * crate::rng::standard_normal(&mut rng);
        }
        for e in 0..num_envs {
            let mut hidden = vec![0.0; hidden_dim];
            for t in 0..steps {
                let obs: Vec<f64> = (0..desc.obs_dim)
                    .map(|_| crate::rng::uniform(&mut rng, -1.0, 1.0))
                    .collect();
                let out = behavior.forward(&obs, &hidden).unwrap();
                hidden = out.hidden_next.clone();
                let ls = behavior.effective_log_std();
                let raw = sample_raw(&out.mean, &ls, &mut rng);
                let lp = log_prob_tanh(&out.mean, &ls, &raw);
                batch.obs.extend_from_slice(&obs);
                batch.raw_actions.extend_from_slice(&raw);
                batch.log_probs.push(lp);
                batch
                    .advantages
                    .push(crate::rng::uniform(&mut rng, -1.0, 1.0));
                batch.returns.push(crate::rng::uniform(&mut rng, -1.0, 1.0));
                batch.episode_starts.push(t == 0 && e % 2 == 0);
            }
        }
        batch
    }

    fn tiny_params(recurrent: bool, seed: u64) -> PolicyParams {
        let desc = ArchDesc {
            obs_dim: 3,
            act_dim: 2,
            hidden: vec![4],
            recurrent,
            rec_hidden: 3,
            layout_hash: 1,
        };
        PolicyParams::init(desc, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn identical_params_ratio_one() {
        let params = tiny_params(false, 3);
        let batch = synthetic_batch(&params, 4, 6, 9, 0.0);
        let cfg = TrainConfig::default();
        let (stats, _) = ppo_loss_and_grad(&params, &batch, &[0, 1, 2, 3], &cfg, 0.01, None)
            .unwrap();
        assert_eq!(stats.clip_fraction, 0.0);
        assert!(stats.approx_kl.abs() < 1e-12);
    }

    #[test]
    fn zero_advantages_leave_policy_head_unmoved() {
        let params = tiny_params(false, 4);
        let mut batch = synthetic_batch(&params, 4, 5, 11, 0.0);
        for a in &mut batch.advantages {
            *a = 0.0;
        }
        let cfg = TrainConfig::default();
        // no normalization so the zeros stay exact
        let (_, grads) =
            ppo_loss_and_grad(&params, &batch, &[0, 1, 2, 3], &cfg, 0.0, None).unwrap();
        // mean head receives gradient only through the policy term
        let spec = params
            .specs()
            .iter()
            .find(|s| s.name == "actor.mean.w")
            .unwrap()
            .clone();
        for g in &grads[spec.offset..spec.offset + spec.len()] {
            assert_eq!(*g, 0.0);
        }
        // value head still learns
        let vspec = params
            .specs()
            .iter()
            .find(|s| s.name == "critic.value.w")
            .unwrap()
            .clone();
        assert!(grads[vspec.offset..vspec.offset + vspec.len()]
            .iter()
            .any(|g| *g != 0.0));
    }

    /// Closed-form check: one parameter (the mean bias of a 1-D linear
    /// policy), one sample. The unclipped surrogate is
    /// `-(exp(lp(b) - lp_old) * A)`; its derivative at `b` is
    /// `-A * ratio * z / sigma`.
    #[test]
    fn single_sample_closed_form_gradient() {
        let desc = ArchDesc {
            obs_dim: 1,
            act_dim: 1,
            hidden: vec![],
            recurrent: false,
            rec_hidden: 0,
            layout_hash: 0,
        };
        let mut params = PolicyParams::zeros(desc).unwrap();
        params.tensor_mut("actor.mean.b").unwrap()[0] = 0.2;
        params.tensor_mut("actor.log_std").unwrap()[0] = -0.3;
        let raw = 0.7;
        let adv = 0.9;
        let lp_old = log_prob_tanh(&[0.15], &[-0.3], &[raw]);
        let batch = RolloutBatch {
            num_envs: 1,
            steps: 1,
            obs_dim: 1,
            act_dim: 1,
            hidden_dim: 0,
            obs: vec![0.0],
            raw_actions: vec![raw],
            log_probs: vec![lp_old],
            advantages: vec![adv],
            returns: vec![0.0],
            episode_starts: vec![true],
            start_hidden: vec![],
        };
        let mut cfg = TrainConfig::default();
        cfg.value_coef = 0.0;
        let (_, grads) = ppo_loss_and_grad(&params, &batch, &[0], &cfg, 0.0, None).unwrap();
        let spec = params
            .specs()
            .iter()
            .find(|s| s.name == "actor.mean.b")
            .unwrap()
            .clone();
        let sigma = exp(-0.3);
        let z = (raw - 0.2) / sigma;
        let lp_new = log_prob_tanh(&[0.2], &[-0.3], &[raw]);
        let ratio = exp(lp_new - lp_old);
        let expected = -adv * ratio * z / sigma;
        assert!(
            (grads[spec.offset] - expected).abs() < 1e-10,
            "grad {} vs {}",
            grads[spec.offset],
            expected
        );
    }

    #[test]
    fn update_is_deterministic() {
        for recurrent in [false, true] {
            let run = || {
                let mut params = tiny_params(recurrent, 5);
                let batch = synthetic_batch(&params, 8, 6, 13, 1e-3);
                let mut adam = Adam::new(params.num_params());
                let mut rng = rng_from_seed(99);
                let cfg = TrainConfig::default();
                let stats =
                    ppo_update(&mut params, &mut adam, &batch, &cfg, 0.01, &mut rng).unwrap();
                (params, stats)
            };
            let (p1, s1) = run();
            let (p2, s2) = run();
            assert_eq!(p1.data(), p2.data());
            assert_eq!(s1, s2);
        }
    }
}
