//! Episode-log persistence. Every reported metric recomputes exactly from a
//! persisted log, so evaluation results can be audited offline.

use anyhow::{Context, Result};
use contactrl_core::math::{Pose2, Vec2};
use contactrl_core::metrics::{EpisodeLog, StepRecord};
use contactrl_core::reward::RewardBreakdown;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct BreakdownDoc {
    reach: f64,
    hold: f64,
    detach: f64,
    pose: f64,
    bonus: f64,
    penalty: f64,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    effector_pos: Vec<[f64; 2]>,
    actual_contact: Vec<bool>,
    commanded_contact: Vec<bool>,
    commanded_point: Vec<[f64; 2]>,
    pose: [f64; 3],
    s_remaining: f64,
    reward: f64,
    breakdown: BreakdownDoc,
    advanced: bool,
    bonus_fired: bool,
}

#[derive(Serialize, Deserialize)]
struct EpisodeDoc {
    seed: u64,
    config_digest: u64,
    initial_contact: Vec<bool>,
    steps: Vec<StepDoc>,
}

pub fn to_json(log: &EpisodeLog) -> Result<String> {
    let doc = EpisodeDoc {
        seed: log.seed,
        config_digest: log.config_digest,
        initial_contact: log.initial_contact.clone(),
        steps: log
            .steps
            .iter()
            .map(|r| StepDoc {
                effector_pos: r.effector_pos.iter().map(|p| [p.x, p.y]).collect(),
                actual_contact: r.actual_contact.clone(),
                commanded_contact: r.commanded_contact.clone(),
                commanded_point: r.commanded_point.iter().map(|p| [p.x, p.y]).collect(),
                pose: [r.pose.pos.x, r.pose.pos.y, r.pose.theta],
                s_remaining: r.s_remaining,
                reward: r.reward,
                breakdown: BreakdownDoc {
                    reach: r.breakdown.reach,
                    hold: r.breakdown.hold,
                    detach: r.breakdown.detach,
                    pose: r.breakdown.pose,
                    bonus: r.breakdown.bonus,
                    penalty: r.breakdown.penalty,
                },
                advanced: r.advanced,
                bonus_fired: r.bonus_fired,
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn from_json(text: &str) -> Result<EpisodeLog> {
    let doc: EpisodeDoc = serde_json::from_str(text).context("malformed episode log")?;
    Ok(EpisodeLog {
        seed: doc.seed,
        config_digest: doc.config_digest,
        initial_contact: doc.initial_contact,
        steps: doc
            .steps
            .into_iter()
            .map(|s| StepRecord {
                effector_pos: s.effector_pos.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
                actual_contact: s.actual_contact,
                commanded_contact: s.commanded_contact,
                commanded_point: s
                    .commanded_point
                    .iter()
                    .map(|p| Vec2::new(p[0], p[1]))
                    .collect(),
                pose: Pose2::new(s.pose[0], s.pose[1], s.pose[2]),
                s_remaining: s.s_remaining,
                reward: s.reward,
                breakdown: RewardBreakdown {
                    reach: s.breakdown.reach,
                    hold: s.breakdown.hold,
                    detach: s.breakdown.detach,
                    pose: s.breakdown.pose,
                    bonus: s.breakdown.bonus,
                    penalty: s.breakdown.penalty,
                },
                advanced: s.advanced,
                bonus_fired: s.bonus_fired,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use contactrl_core::env::{GaitSelection, LocoConfig, LocoEnv};
    use contactrl_core::gait::GaitType;
    use contactrl_core::metrics::{contact_tracking_error, plan_deviation, run_loco_episode};
    use contactrl_core::scripted::loco_oracle_action;

    #[test]
    fn persisted_log_recomputes_identically() {
        let mut cfg = LocoConfig::default();
        cfg.gait = GaitSelection::Fixed(GaitType::Bound);
        cfg.step_limit = 120;
        let mut env = LocoEnv::new(cfg, 7).unwrap();
        let log = run_loco_episode(&mut env, |e, _| loco_oracle_action(e), 120, 7, 99).unwrap();
        let online_dev = plan_deviation(&log).unwrap();
        let online_err = contact_tracking_error(&log).unwrap();
        let text = to_json(&log).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(plan_deviation(&back).unwrap(), online_dev);
        assert_eq!(contact_tracking_error(&back).unwrap(), online_err);
        assert_eq!(back.config_digest, 99);
    }
}
