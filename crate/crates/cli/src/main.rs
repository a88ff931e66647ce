//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 check failure or generic error, 2 usage error,
//! 3 training abort (non-finite loss), 4 artifact mismatch (checkpoint or
//! layout incompatible with the configured environment).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use contactrl_core::env::ManipTask;
use contactrl_core::gait::{build_plan, velocity_to_params, GaitType, Steering};
use contactrl_core::manip::{reorient_plan, repose_plan};
use contactrl_core::math::Pose2;
use contactrl_core::CoreError;

use contactrl_cli::check::{run_checks, Fault};
use contactrl_cli::formats::config::{parse_pose_ranges, RunConfig};
use contactrl_cli::formats::{checkpoint_io, plan_json};
use contactrl_cli::run;

#[derive(Parser)]
#[command(name = "contactrl", version, about = "Contact-goal planning, training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a contact plan and emit it as JSON.
    Plan(PlanArgs),
    /// Train a policy from a run configuration.
    Train(TrainArgs),
    /// Evaluate a trained policy.
    Eval(EvalArgs),
    /// Run the self-verification suite.
    Check(CheckArgs),
    /// Print a checkpoint's header and tensor table.
    InspectCheckpoint { path: PathBuf },
}

#[derive(Args)]
struct PlanArgs {
    /// Locomotion gait (trot, pace, bound, jump, crawl).
    #[arg(long, conflicts_with = "task")]
    gait: Option<String>,
    /// Manipulation task (repose, reorient).
    #[arg(long)]
    task: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plan length in slots (locomotion).
    #[arg(long, default_value_t = 8)]
    horizon: usize,
    /// Command duration in seconds.
    #[arg(long, default_value_t = 0.35)]
    duration: f64,
    /// Commanded x velocity (locomotion, heading mode).
    #[arg(long)]
    vx: Option<f64>,
    /// Commanded y velocity (locomotion, heading mode).
    #[arg(long)]
    vy: Option<f64>,
    /// Travel heading in radians, relative to the base frame.
    #[arg(long, conflicts_with_all = ["vx", "vy"])]
    heading: Option<f64>,
    /// Constant yaw rate in rad/s.
    #[arg(long, conflicts_with_all = ["vx", "vy", "heading"])]
    yaw_rate: Option<f64>,
    /// Number of 45-degree rotations (reorient).
    #[arg(long, default_value_t = 4)]
    rotations: usize,
    /// Number of pose targets (repose).
    #[arg(long, default_value_t = 4)]
    targets: usize,
    /// Pose-target sampling ranges (trained, evaluated).
    #[arg(long, default_value = "trained")]
    ranges: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Resume from a checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(subcommand)]
    protocol: EvalProtocol,
}

#[derive(Subcommand)]
enum EvalProtocol {
    /// Commanded-vs-realized velocity over a planar grid.
    VelocityGrid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "trot")]
        gait: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tracking error and plan deviation across command durations.
    DurationSweep {
        #[arg(long)]
        config: PathBuf,
        /// Multi-gait checkpoint.
        #[arg(long)]
        multi: Option<PathBuf>,
        /// Single-gait checkpoints as gait=path pairs.
        #[arg(long = "single", value_parser = parse_single)]
        singles: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Terminal object-pose errors under a sampling range.
    Pose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// trained or evaluated
        #[arg(long, default_value = "trained")]
        ranges: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Corrupt a checked subsystem to demonstrate the check catches it.
    #[arg(long, value_enum, default_value_t = Fault::None)]
    inject_fault: Fault,
}

fn parse_single(s: &str) -> Result<(String, PathBuf), String> {
    let (gait, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected gait=path, got {s:?}"))?;
    Ok((gait.to_string(), PathBuf::from(path)))
}

fn load_config(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    RunConfig::from_json(&text)
}

fn parse_gait(name: &str) -> Result<GaitType> {
    GaitType::from_name(name).with_context(|| format!("unknown gait {name:?}"))
}

fn cmd_plan(args: &PlanArgs) -> Result<()> {
    let json = if let Some(task) = &args.task {
        let object = contactrl_core::manip::ObjectSpec::Box {
            half_extents: contactrl_core::math::Vec2::new(0.1, 0.1),
        };
        let bundle = match task.as_str() {
            "repose" => repose_plan(
                &object,
                Pose2::IDENTITY,
                args.targets,
                &parse_pose_ranges(&args.ranges)?,
                args.seed,
            ),
            "reorient" => reorient_plan(&object, Pose2::IDENTITY, args.rotations, args.seed),
            other => bail!("unknown task {other:?}"),
        }
        .map_err(anyhow::Error::new)?;
        plan_json::to_json(&bundle.plan, Some(&bundle.pose_goals))?
    } else {
        let gait = parse_gait(args.gait.as_deref().unwrap_or("trot"))?;
        let ranges = contactrl_core::gait::GaitRanges::default();
        let mut params = if let (Some(vx), Some(vy)) = (args.vx, args.vy) {
            let (p, info) = velocity_to_params(vx, vy, args.duration, gait.period())
                .map_err(anyhow::Error::new)?;
            if info.capped {
                eprintln!(
                    "note: requested stride {:.3} m exceeds the {:.1} m range; capped \
                     (achievable speed {:.3} m/s; a longer cycle restores the command)",
                    info.requested_stride,
                    ranges.stride.1,
                    info.achievable_speed
                );
            }
            p
        } else {
            let mode = if args.yaw_rate.is_some() {
                contactrl_core::gait::SteeringMode::YawRate
            } else {
                contactrl_core::gait::SteeringMode::Heading
            };
            let mut p = contactrl_core::gait::sample_gait_params(args.seed, mode, &ranges);
            if let Some(h) = args.heading {
                p.steering = Steering::Heading(h);
            }
            if let Some(w) = args.yaw_rate {
                p.steering = Steering::YawRate(w);
            }
            p.duration = args.duration;
            p
        };
        if args.vx.is_some() != args.vy.is_some() {
            bail!("--vx and --vy go together");
        }
        params.duration = args.duration;
        let layout = contactrl_core::gait::FootLayout::default();
        let plan = build_plan(gait, &params, &layout, args.horizon, Pose2::IDENTITY)
            .map_err(anyhow::Error::new)?;
        plan_json::to_json(&plan, None)?
    };
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<bool> {
    let results = run_checks(args.inject_fault)?;
    let mut all_passed = true;
    for r in &results {
        println!(
            "[{}] {} ({:.2}s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        );
        all_passed &= r.passed;
    }
    Ok(all_passed)
}

fn cmd_inspect(path: &PathBuf) -> Result<()> {
    let (s, hash) = checkpoint_io::summary(path)?;
    println!("version: {}", s.version);
    println!("layout_hash: {:#018x}", s.layout_hash);
    println!("config_digest: {:#018x}", s.config_digest);
    println!("file_hash: {hash:#018x}");
    println!("global_step: {}", s.global_step);
    println!(
        "architecture: obs {} act {} hidden {:?} recurrent {} cell {}",
        s.arch.obs_dim, s.arch.act_dim, s.arch.hidden, s.arch.recurrent, s.arch.rec_hidden
    );
    println!("optimizer_state: {}", s.has_optimizer);
    println!("parameters: {}", s.total_params);
    for (name, shape, dtype) in &s.tensors {
        println!("  {name}: {shape:?} {dtype:?}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plan(args) => {
            cmd_plan(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Train(args) => {
            let cfg = load_config(&args.config)?;
            let arts = run::cmd_train(&cfg, &args.out, args.resume.as_deref())?;
            println!(
                "trained to step {}; checkpoint {}",
                arts.final_step,
                arts.final_checkpoint.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval(args) => {
            match args.protocol {
                EvalProtocol::VelocityGrid {
                    config,
                    checkpoint,
                    gait,
                    out,
                } => {
                    let cfg = load_config(&config)?;
                    let (csv, _) =
                        run::cmd_eval_velocity_grid(&cfg, &checkpoint, parse_gait(&gait)?, &out)?;
                    println!("{}", csv.display());
                }
                EvalProtocol::DurationSweep {
                    config,
                    multi,
                    singles,
                    out,
                } => {
                    let cfg = load_config(&config)?;
                    let mut pairs = Vec::new();
                    for (gait, path) in &singles {
                        pairs.push((parse_gait(gait)?, Some(path.clone())));
                    }
                    let written =
                        run::cmd_eval_duration_sweep(&cfg, multi.as_deref(), &pairs, &out)?;
                    for (csv, _) in written {
                        println!("{}", csv.display());
                    }
                }
                EvalProtocol::Pose {
                    config,
                    checkpoint,
                    ranges,
                    out,
                } => {
                    let mut cfg = load_config(&config)?;
                    if cfg.env.kind != "manip" {
                        bail!("pose evaluation needs a manipulation config");
                    }
                    // the range label also selects repose sampling
                    cfg.env.pose_ranges = ranges.clone();
                    let task = cfg.env.to_manip(&cfg.reward)?.task;
                    if matches!(task, ManipTask::Repose { .. }) {
                        parse_pose_ranges(&ranges)?;
                    }
                    let (csv, _) = run::cmd_eval_pose(&cfg, &checkpoint, &ranges, &out)?;
                    println!("{}", csv.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check(args) => {
            if cmd_check(&args)? {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::InspectCheckpoint { path } => {
            cmd_inspect(&path)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::TrainingAbort(_)) => ExitCode::from(3),
        Some(CoreError::Checkpoint(_)) => ExitCode::from(4),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}
