//! Training and evaluation runners wired to the file formats.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use contactrl_core::env::{Environment, LocoEnv, ManipEnv, ManipTask, ReachEnv};
use contactrl_core::gait::GaitType;
use contactrl_core::metrics::{
    duration_sweep, pose_error_eval, velocity_grid_eval, MetricTable, SweepPolicy,
};
use contactrl_core::policy::PolicyParams;
use contactrl_core::rng::derive_seed;
use contactrl_core::trainer::Trainer;
use contactrl_core::CoreError;

use crate::formats::checkpoint_io;
use crate::formats::config::{parse_pose_ranges, RunConfig};
use crate::formats::table;

/// Artifacts a training run leaves behind.
pub struct TrainArtifacts {
    pub final_checkpoint: PathBuf,
    pub log_path: PathBuf,
    pub resolved_config: PathBuf,
    pub final_step: u64,
}

fn env_seed(cfg: &RunConfig, index: usize) -> u64 {
    derive_seed(derive_seed(cfg.train.seed, 0xE27), index as u64)
}

pub fn build_loco_envs(cfg: &RunConfig, n: usize) -> Result<Vec<LocoEnv>> {
    let core = cfg.env.to_loco(&cfg.reward, &cfg.plan)?;
    (0..n)
        .map(|i| LocoEnv::new(core.clone(), env_seed(cfg, i)).map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

pub fn build_manip_envs(cfg: &RunConfig, n: usize) -> Result<Vec<ManipEnv>> {
    let core = cfg.env.to_manip(&cfg.reward)?;
    (0..n)
        .map(|i| ManipEnv::new(core.clone(), env_seed(cfg, i)).map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

pub fn build_reach_envs(cfg: &RunConfig, n: usize) -> Result<Vec<ReachEnv>> {
    let core = cfg.env.to_reach(&cfg.reward)?;
    (0..n)
        .map(|i| ReachEnv::new(core.clone(), env_seed(cfg, i)).map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

fn run_training<E: Environment>(
    envs: Vec<E>,
    cfg: &RunConfig,
    out_dir: &Path,
    resume: Option<&Path>,
) -> Result<TrainArtifacts> {
    let digest = cfg.digest();
    fs::create_dir_all(out_dir)?;
    let resolved = out_dir.join("config.resolved.json");
    fs::write(&resolved, cfg.resolved_json())?;

    let train_cfg = cfg.train.to_core(digest);
    let mut trainer = match resume {
        None => Trainer::new(envs, train_cfg).map_err(anyhow::Error::new)?,
        Some(path) => {
            let ck = checkpoint_io::load(path)?;
            let optimizer = ck.optimizer.clone().unwrap_or_else(|| {
                contactrl_core::trainer::Adam::new(ck.params.num_params())
            });
            Trainer::with_state(envs, train_cfg, ck.params, optimizer, ck.global_step)
                .map_err(anyhow::Error::new)?
        }
    };

    let log_path = out_dir.join("train_log.csv");
    let fresh_log = resume.is_none() || !log_path.exists();
    let mut log = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)?;
    if fresh_log {
        writeln!(log, "{}", table::TRAIN_LOG_HEADER)?;
    }

    let every = cfg.train.checkpoint_every.max(1);
    let mut iter_count = 0usize;
    while trainer.global_step() < cfg.train.total_env_steps {
        match trainer.iterate() {
            Ok(stats) => {
                writeln!(log, "{}", table::train_log_row(&stats))?;
                iter_count += 1;
                if iter_count % every == 0 {
                    checkpoint_io::save(
                        &out_dir.join("latest.ckpt"),
                        trainer.params(),
                        Some(trainer.optimizer()),
                        trainer.global_step(),
                        digest,
                    )?;
                }
            }
            Err(e @ CoreError::TrainingAbort(_)) => {
                let dump = out_dir.join("abort_diagnostics.json");
                let _ = fs::write(
                    &dump,
                    serde_json::json!({
                        "error": e.to_string(),
                        "global_step": trainer.global_step(),
                    })
                    .to_string(),
                );
                return Err(anyhow::Error::new(e)).context("training aborted; diagnostics dumped");
            }
            Err(e) => return Err(anyhow::Error::new(e)),
        }
    }
    let final_checkpoint = out_dir.join("final.ckpt");
    checkpoint_io::save(
        &final_checkpoint,
        trainer.params(),
        Some(trainer.optimizer()),
        trainer.global_step(),
        digest,
    )?;
    Ok(TrainArtifacts {
        final_checkpoint,
        log_path,
        resolved_config: resolved,
        final_step: trainer.global_step(),
    })
}

/// Train per the config's `env.kind`.
pub fn cmd_train(cfg: &RunConfig, out_dir: &Path, resume: Option<&Path>) -> Result<TrainArtifacts> {
    let n = cfg.train.num_envs;
    match cfg.env.kind.as_str() {
        "loco" => run_training(build_loco_envs(cfg, n)?, cfg, out_dir, resume),
        "manip" => run_training(build_manip_envs(cfg, n)?, cfg, out_dir, resume),
        "reach" => run_training(build_reach_envs(cfg, n)?, cfg, out_dir, resume),
        other => bail!("unknown environment kind {other:?}"),
    }
}

/// Load a checkpoint and confirm it matches an environment layout.
pub fn load_policy_for(cfg: &RunConfig, path: &Path) -> Result<PolicyParams> {
    let ck = checkpoint_io::load(path)?;
    let expected = match cfg.env.kind.as_str() {
        "loco" => build_loco_envs(cfg, 1)?[0].layout_hash(),
        "manip" => build_manip_envs(cfg, 1)?[0].layout_hash(),
        "reach" => build_reach_envs(cfg, 1)?[0].layout_hash(),
        other => bail!("unknown environment kind {other:?}"),
    };
    if ck.params.desc().layout_hash != expected {
        return Err(anyhow::Error::new(CoreError::Checkpoint(format!(
            "checkpoint layout {:#x} does not match the configured environment {:#x}",
            ck.params.desc().layout_hash,
            expected
        ))));
    }
    Ok(ck.params)
}

fn write_table(
    table_data: &MetricTable,
    out_dir: &Path,
    stem: &str,
    config_digest: u64,
    checkpoint_hash: u64,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let base = format!("{stem}_c{config_digest:016x}_k{checkpoint_hash:016x}");
    let csv_path = out_dir.join(format!("{base}.csv"));
    let json_path = out_dir.join(format!("{base}.json"));
    fs::write(&csv_path, table::to_csv(table_data))?;
    fs::write(&json_path, table::to_json_summary(table_data)?)?;
    Ok((csv_path, json_path))
}

pub fn cmd_eval_velocity_grid(
    cfg: &RunConfig,
    checkpoint: &Path,
    gait: GaitType,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let params = load_policy_for(cfg, checkpoint)?;
    let base = cfg.env.to_loco(&cfg.reward, &cfg.plan)?;
    let axis = cfg.eval.velocity_axis();
    let table_data = velocity_grid_eval(
        &params,
        &base,
        gait,
        &axis,
        cfg.eval.episodes_per_cell,
        cfg.eval.episode_steps,
        cfg.eval.seed,
    )
    .map_err(anyhow::Error::new)?;
    write_table(
        &table_data,
        out_dir,
        "velocity_grid",
        cfg.digest(),
        checkpoint_io::file_hash(checkpoint)?,
    )
}

/// Duration sweep over a multi-gait checkpoint and per-gait single
/// checkpoints; missing checkpoints yield absent rows.
pub fn cmd_eval_duration_sweep(
    cfg: &RunConfig,
    multi: Option<&Path>,
    singles: &[(GaitType, Option<PathBuf>)],
    out_dir: &Path,
) -> Result<Vec<(PathBuf, PathBuf)>> {
    let base = cfg.env.to_loco(&cfg.reward, &cfg.plan)?;
    let mut policies = Vec::new();
    let mut hash = 0u64;
    if let Some(path) = multi {
        hash ^= checkpoint_io::file_hash(path)?;
        policies.push(SweepPolicy {
            name: "multi".into(),
            params: Some(load_policy_for(cfg, path)?),
            gaits: GaitType::ALL.to_vec(),
        });
    }
    for (gait, path) in singles {
        let params = match path {
            Some(p) => {
                hash ^= checkpoint_io::file_hash(p)?;
                Some(load_policy_for(cfg, p)?)
            }
            None => None,
        };
        policies.push(SweepPolicy {
            name: format!("single_{}", gait.name()),
            params,
            gaits: vec![*gait],
        });
    }
    if policies.is_empty() {
        bail!("duration sweep needs at least one checkpoint");
    }
    let (l2, ham) = duration_sweep(
        &policies,
        &base,
        &cfg.eval.durations,
        cfg.eval.episodes_per_cell,
        cfg.eval.episode_steps,
        cfg.eval.seed,
    )
    .map_err(anyhow::Error::new)?;
    let digest = cfg.digest();
    let mut out = Vec::new();
    out.push(write_table(&l2, out_dir, "duration_sweep_l2", digest, hash)?);
    out.push(write_table(
        &ham,
        out_dir,
        "duration_sweep_hamming",
        digest,
        hash,
    )?);
    Ok(out)
}

pub fn cmd_eval_pose(
    cfg: &RunConfig,
    checkpoint: &Path,
    ranges_label: &str,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let params = load_policy_for(cfg, checkpoint)?;
    let base = cfg.env.to_manip(&cfg.reward)?;
    let ranges = parse_pose_ranges(ranges_label)?;
    let task = match base.task {
        ManipTask::Repose { n_targets, .. } => ManipTask::Repose { n_targets, ranges },
        reorient @ ManipTask::Reorient { .. } => reorient,
    };
    let table_data = pose_error_eval(
        &params,
        &base,
        task,
        ranges_label,
        cfg.eval.episodes_per_cell,
        cfg.eval.seed,
    )
    .map_err(anyhow::Error::new)?;
    write_table(
        &table_data,
        out_dir,
        "pose_error",
        cfg.digest(),
        checkpoint_io::file_hash(checkpoint)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_reach_config() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.env.kind = "reach".into();
        cfg.train.num_envs = 4;
        cfg.train.rollout_len = 8;
        cfg.train.total_env_steps = 64;
        cfg.train.hidden = vec![8];
        cfg
    }

    #[test]
    fn train_writes_artifacts_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_reach_config();
        let arts = cmd_train(&cfg, dir.path(), None).unwrap();
        assert!(arts.final_checkpoint.exists());
        assert!(arts.log_path.exists());
        assert!(arts.resolved_config.exists());
        assert_eq!(arts.final_step, 64);
        let log = fs::read_to_string(&arts.log_path).unwrap();
        assert!(log.starts_with(table::TRAIN_LOG_HEADER));
        assert_eq!(log.lines().count(), 3); // header + 2 iterations

        // resume continues the step count
        let mut cfg2 = cfg.clone();
        cfg2.train.total_env_steps = 128;
        let arts2 = cmd_train(&cfg2, dir.path(), Some(&arts.final_checkpoint)).unwrap();
        assert_eq!(arts2.final_step, 128);
    }

    #[test]
    fn layout_mismatch_is_a_checkpoint_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_reach_config();
        let arts = cmd_train(&cfg, dir.path(), None).unwrap();
        let mut loco_cfg = RunConfig::default();
        loco_cfg.env.kind = "loco".into();
        let err = load_policy_for(&loco_cfg, &arts.final_checkpoint).unwrap_err();
        let core = err.downcast_ref::<CoreError>();
        assert!(matches!(core, Some(CoreError::Checkpoint(_))), "{err}");
    }
}
