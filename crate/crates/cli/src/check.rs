//! Self-verification: reward transcription equivalence, exhaustive phase
//! table, gradient finite differences, and the scripted zero-deviation
//! pipeline. Faults can be injected to prove the checks have teeth.
//!
//! The reward transcription below is written directly from the reward
//! definitions, on purpose sharing no code with the engine it checks.

use anyhow::Result;
use contactrl_core::contact::{phase_of, ContactPhase};
use contactrl_core::env::{GaitSelection, LocoConfig, LocoEnv, ManipConfig, ManipEnv, ManipTask};
use contactrl_core::gait::GaitType;
use contactrl_core::manip::PoseRanges;
use contactrl_core::math::Vec2;
use contactrl_core::metrics::{
    contact_tracking_error, plan_deviation, run_loco_episode, run_manip_episode,
};
use contactrl_core::policy::{log_prob_tanh, sample_raw, ArchDesc, PolicyParams};
use contactrl_core::reward::{
    detach_reward, hold_reward, pose_reward, reach_reward, total_contact_reward,
    EffectorSnapshot, RewardConfig,
};
use contactrl_core::rng::{rng_from_seed, uniform, derive_seed};
use contactrl_core::scripted::{loco_oracle_action, manip_oracle_action};
use contactrl_core::trainer::{finite_diff_check, ppo_loss_and_grad, RolloutBatch, TrainConfig};
use std::time::Instant;

/// Deliberate corruption applied to the checked side, proving a check fails
/// when its subject is wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of the hold reward's placement kernel.
    HoldSign,
    /// Classify the exact reach-threshold boundary as a detach.
    PhaseBoundary,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_snapshot(rng: &mut contactrl_core::rng::DetRng) -> EffectorSnapshot {
    EffectorSnapshot {
        actual_pos: Vec2::new(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5)),
        actual_contact: uniform(rng, 0.0, 1.0) > 0.5,
        goal_point: Vec2::new(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5)),
        commanded_contact: uniform(rng, 0.0, 1.0) > 0.5,
        s_remaining: uniform(rng, 0.0, 0.6),
    }
}

/// Direct transcription of the contact rewards, independent of the engine.
mod transcription {
    use super::EffectorSnapshot;
    use contactrl_core::reward::RewardConfig;

    fn l2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
        ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
    }

    fn kernel(s: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
        let mut d = l2(
            s.goal_point.x,
            s.goal_point.y,
            s.actual_pos.x,
            s.actual_pos.y,
        );
        if cfg.squared_distance {
            d *= d;
        }
        (-d / cfg.sigma_sq).exp()
    }

    pub fn reach(s: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
        let gate = !s.commanded_contact && s.s_remaining <= cfg.delta;
        if gate {
            kernel(s, cfg)
        } else {
            0.0
        }
    }

    pub fn hold(s: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
        if s.commanded_contact && s.actual_contact {
            1.0 + cfg.alpha_hold * kernel(s, cfg)
        } else {
            0.0
        }
    }

    pub fn detach(s: &EffectorSnapshot, cfg: &RewardConfig) -> f64 {
        if !s.commanded_contact && !s.actual_contact && s.s_remaining > cfg.delta {
            1.0
        } else {
            0.0
        }
    }

    pub fn pose(dp: f64, dth: f64, cfg: &RewardConfig) -> f64 {
        cfg.c_pos / (cfg.eps_pos + dp) + cfg.c_rot / (cfg.eps_rot + dth)
    }
}

fn check_reward_oracle(fault: Fault) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = rng_from_seed(0x0C0DE);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for case in 0..10_000 {
        let mut cfg = RewardConfig::default();
        if case % 3 == 1 {
            cfg.squared_distance = true;
        }
        if case % 5 == 2 {
            cfg.alpha_hold = uniform(&mut rng, 0.0, 2.0);
            cfg.sigma_sq = uniform(&mut rng, 0.05, 1.0);
        }
        let snaps: Vec<EffectorSnapshot> =
            (0..1 + case % 4).map(|_| random_snapshot(&mut rng)).collect();
        let dp = uniform(&mut rng, 0.0, 0.5);
        let dth = uniform(&mut rng, 0.0, 3.0);

        let mut engine_sum = 0.0;
        let mut oracle_sum = 0.0;
        for s in &snaps {
            let mut engine_hold = hold_reward(s, &cfg);
            if fault == Fault::HoldSign && engine_hold > 0.0 {
                engine_hold = 2.0 - engine_hold;
            }
            let engine_reach = reach_reward(s, &cfg);
            let engine_detach = detach_reward(s, &cfg);
            let o_reach = transcription::reach(s, &cfg);
            let o_hold = transcription::hold(s, &cfg);
            let o_detach = transcription::detach(s, &cfg);
            for (e, o) in [
                (engine_reach, o_reach),
                (engine_hold, o_hold),
                (engine_detach, o_detach),
            ] {
                worst = worst.max((e - o).abs());
                if (e - o).abs() > 1e-12 {
                    failures += 1;
                }
            }
            engine_sum += engine_reach + engine_hold + engine_detach;
            oracle_sum += o_reach + o_hold + o_detach;
        }
        let engine_pose = pose_reward(dp, dth, &cfg);
        let oracle_pose = transcription::pose(dp, dth, &cfg);
        worst = worst.max((engine_pose - oracle_pose).abs());
        engine_sum += engine_pose;
        oracle_sum += oracle_pose;
        // the engine's total agrees with the independent sum
        let (engine_total, _) =
            total_contact_reward(&snaps, Some((dp, dth)), &cfg).expect("snapshots nonempty");
        let engine_total = if fault == Fault::HoldSign {
            engine_sum // keep the injected corruption visible in the total
        } else {
            engine_total
        };
        worst = worst.max((engine_total - oracle_sum).abs());
        if (engine_total - oracle_sum).abs() > 1e-12 {
            failures += 1;
        }
    }
    CheckResult {
        name: "reward-oracle-equivalence".into(),
        passed: failures == 0,
        detail: format!("10000 snapshots, worst |engine - transcription| = {worst:.3e}"),
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn check_phase_machine(fault: Fault) -> CheckResult {
    let t0 = Instant::now();
    let delta = RewardConfig::default().delta;
    let big = 0.35;
    let mut failures = Vec::new();
    for in_contact in [false, true] {
        for s in [0.0, delta / 2.0, delta, delta + 1e-9, big] {
            let mut observed = phase_of(in_contact, s, delta).expect("valid grid point");
            if fault == Fault::PhaseBoundary && !in_contact && s == delta {
                observed = ContactPhase::Detach;
            }
            let expected = if in_contact {
                ContactPhase::Hold
            } else if s <= delta {
                ContactPhase::Reach
            } else {
                ContactPhase::Detach
            };
            if observed != expected {
                failures.push(format!("contact={in_contact} s={s}: {observed:?}"));
            }
        }
    }
    CheckResult {
        name: "phase-machine-exhaustive".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "10/10 grid cases".into()
        } else {
            failures.join("; ")
        },
        seconds: t0.elapsed().as_secs_f64(),
    }
}

/// A synthetic on-policy batch for the gradient check.
pub fn synthetic_batch(params: &PolicyParams, num_envs: usize, steps: usize, seed: u64) -> RolloutBatch {
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
    let mut behavior = params.clone();
    for p in behavior.data_mut() {
        *p += 1e-3 * contactrl_core::rng::standard_normal(&mut rng);
    }
    for e in 0..num_envs {
        let mut hidden = vec![0.0; hidden_dim];
        for t in 0..steps {
            let obs: Vec<f64> = (0..desc.obs_dim)
                .map(|_| uniform(&mut rng, -1.0, 1.0))
                .collect();
            let out = behavior.forward(&obs, &hidden).unwrap();
            hidden = out.hidden_next.clone();
            let ls = behavior.effective_log_std();
            let raw = sample_raw(&out.mean, &ls, &mut rng);
            batch.log_probs.push(log_prob_tanh(&out.mean, &ls, &raw));
            batch.obs.extend_from_slice(&obs);
            batch.raw_actions.extend_from_slice(&raw);
            batch.advantages.push(uniform(&mut rng, -1.0, 1.0));
            batch.returns.push(uniform(&mut rng, -1.0, 1.0));
            batch.episode_starts.push(t == 0 && e % 2 == 0);
        }
    }
    batch
}

fn check_gradients() -> CheckResult {
    let t0 = Instant::now();
    let cfg = TrainConfig::default();
    let mut worst: f64 = 0.0;
    for k in 0..4u64 {
        let desc = ArchDesc {
            obs_dim: 3,
            act_dim: 2,
            hidden: vec![4],
            recurrent: k % 2 == 1,
            rec_hidden: 3,
            layout_hash: 0,
        };
        let params = PolicyParams::init(desc, &mut rng_from_seed(300 + k)).unwrap();
        let batch = synthetic_batch(&params, 2, 4, 400 + k);
        let indices = [0usize, 1];
        let err = finite_diff_check(
            &params,
            |p| {
                let (stats, grads) =
                    ppo_loss_and_grad(p, &batch, &indices, &cfg, 0.01, Some((0.0, 1.0)))?;
                Ok((stats.total_loss, grads))
            },
            1e-5,
        )
        .unwrap();
        worst = worst.max(err);
    }
    CheckResult {
        name: "gradient-finite-difference".into(),
        passed: worst <= 1e-4,
        detail: format!("max relative error {worst:.3e} (gate 1e-4)"),
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn check_pipeline() -> CheckResult {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    for (i, gait) in GaitType::ALL.iter().enumerate() {
        for seed in 0..2u64 {
            let mut cfg = LocoConfig::default();
            cfg.gait = GaitSelection::Fixed(*gait);
            cfg.horizon_slots = 10;
            cfg.step_limit = 400;
            if seed % 2 == 1 {
                cfg.steering_mode = contactrl_core::gait::SteeringMode::YawRate;
            }
            let mut env = LocoEnv::new(cfg, derive_seed(7777, (i as u64) * 10 + seed)).unwrap();
            let log =
                run_loco_episode(&mut env, |e, _| loco_oracle_action(e), 400, seed, 0).unwrap();
            let dev = plan_deviation(&log).unwrap();
            let err = contact_tracking_error(&log).unwrap().unwrap_or(f64::NAN);
            if dev != 0.0 || !(err <= 1e-6) {
                failures.push(format!("{} seed {seed}: dev {dev} err {err}", gait.name()));
            }
        }
    }
    for (task, label) in [
        (
            ManipTask::Repose {
                n_targets: 3,
                ranges: PoseRanges::trained(),
            },
            "repose",
        ),
        (ManipTask::Reorient { n_rotations: 3 }, "reorient"),
    ] {
        for seed in 0..2u64 {
            let mut cfg = ManipConfig::default();
            cfg.task = task;
            cfg.step_limit = 2000;
            let mut env = ManipEnv::new(cfg, derive_seed(8888, seed)).unwrap();
            let log =
                run_manip_episode(&mut env, |e, _| manip_oracle_action(e), 2000, seed, 0)
                    .unwrap();
            let dev = plan_deviation(&log).unwrap();
            let err = contact_tracking_error(&log).unwrap().unwrap_or(f64::NAN);
            if dev != 0.0 || !(err <= 1e-6) {
                failures.push(format!("{label} seed {seed}: dev {dev} err {err}"));
            }
        }
    }
    CheckResult {
        name: "scripted-oracle-pipeline".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "zero deviation, tracking <= 1e-6 on all gaits and tasks".into()
        } else {
            failures.join("; ")
        },
        seconds: t0.elapsed().as_secs_f64(),
    }
}

/// Run every check, optionally with an injected fault.
pub fn run_checks(fault: Fault) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_reward_oracle(fault),
        check_phase_machine(fault),
        check_gradients(),
        check_pipeline(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_checks_pass() {
        let results = run_checks(Fault::None).unwrap();
        assert_eq!(results.len(), 4);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        // the reward sweep is quick
        assert!(results[0].seconds < 5.0);
    }

    #[test]
    fn injected_hold_sign_is_caught() {
        let results = run_checks(Fault::HoldSign).unwrap();
        assert!(!results[0].passed);
        assert!(results[1].passed);
    }

    #[test]
    fn injected_phase_boundary_is_caught() {
        let results = run_checks(Fault::PhaseBoundary).unwrap();
        assert!(results[0].passed);
        assert!(!results[1].passed);
    }
}
