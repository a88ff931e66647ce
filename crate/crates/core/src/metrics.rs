//! Episode logging and the evaluation protocols.
//!
//! Every metric is a pure function of a recorded [`EpisodeLog`], so anything
//! reported online can be recomputed bit for bit from the persisted log.
//! Three protocols are provided: a velocity grid (commanded vs realized base
//! velocity), a command-duration sweep comparing policies per gait, and
//! terminal object-pose errors under trained vs widened sampling ranges.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::contact::{hamming_deviation, IndicatorMatrix};
use crate::env::{Environment, GaitSelection, LocoConfig, LocoEnv, ManipConfig, ManipEnv};
use crate::error::CoreError;
use crate::gait::{velocity_to_params, GaitType};
use crate::manip::PoseRanges;
use crate::math::{angle_dist, asinh, fabs, sqrt, Pose2, Vec2};
use crate::policy::{squash, PolicyParams};
use crate::reward::RewardBreakdown;
use crate::rng::derive_seed;

/// One recorded control step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Effector world positions after the step.
    pub effector_pos: Vec<Vec2>,
    /// Realized contact states after the step.
    pub actual_contact: Vec<bool>,
    /// Indicators commanded during the step.
    pub commanded_contact: Vec<bool>,
    /// Contact points commanded during the step.
    pub commanded_point: Vec<Vec2>,
    /// Base (locomotion) or object (manipulation) pose after the step.
    pub pose: Pose2,
    /// Remaining command time when the step was taken.
    pub s_remaining: f64,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub advanced: bool,
    pub bonus_fired: bool,
}

/// A full episode: enough to recompute every reported metric offline.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub config_digest: u64,
    /// Contact states at reset, before the first step.
    pub initial_contact: Vec<bool>,
    pub steps: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn num_effectors(&self) -> usize {
        self.initial_contact.len()
    }
}

/// Mean L2 distance between actual and commanded contact points at the steps
/// where contact is established. `None` when the episode never made contact
/// (reported as an absent cell, never as zero).
pub fn contact_tracking_error(log: &EpisodeLog) -> Result<Option<f64>, CoreError> {
    if log.steps.is_empty() {
        return Err(CoreError::InvalidArgument(String::from(
            "empty episode log",
        )));
    }
    let e = log.num_effectors();
    let mut prev = log.initial_contact.clone();
    let mut sum = 0.0;
    let mut count = 0usize;
    for rec in &log.steps {
        for i in 0..e {
            if rec.actual_contact[i] && !prev[i] {
                sum += rec.effector_pos[i].dist(rec.commanded_point[i]);
                count += 1;
            }
        }
        prev = rec.actual_contact.clone();
    }
    Ok(if count == 0 {
        None
    } else {
        Some(sum / count as f64)
    })
}

/// Per-step mean Hamming distance between the commanded and realized contact
/// indicators over the episode.
pub fn plan_deviation(log: &EpisodeLog) -> Result<f64, CoreError> {
    if log.steps.is_empty() {
        return Err(CoreError::InvalidArgument(String::from(
            "empty episode log",
        )));
    }
    let e = log.num_effectors();
    let t = log.steps.len();
    let mut cmd = Vec::with_capacity(e * t);
    let mut act = Vec::with_capacity(e * t);
    for i in 0..e {
        for rec in &log.steps {
            cmd.push(rec.commanded_contact[i]);
            act.push(rec.actual_contact[i]);
        }
    }
    let cmd = IndicatorMatrix::new(e, t, cmd)?;
    let act = IndicatorMatrix::new(e, t, act)?;
    Ok(hamming_deviation(&cmd, &act)?.per_step_mean)
}

/// A greedy policy evaluator carrying its recurrent state.
pub struct PolicyController<'a> {
    params: &'a PolicyParams,
    hidden: Vec<f64>,
}

impl<'a> PolicyController<'a> {
    pub fn new(params: &'a PolicyParams) -> Self {
        PolicyController {
            params,
            hidden: alloc::vec![0.0; params.desc().hidden_state_dim()],
        }
    }

    pub fn reset(&mut self) {
        self.hidden.iter_mut().for_each(|h| *h = 0.0);
    }

    pub fn act(&mut self, obs: &[f64]) -> Result<Vec<f64>, CoreError> {
        let out = self.params.forward(obs, &self.hidden)?;
        self.hidden = out.hidden_next;
        Ok(squash(&out.mean))
    }
}

/// Run one locomotion episode under `act`, recording every step.
pub fn run_loco_episode<F>(
    env: &mut LocoEnv,
    mut act: F,
    max_steps: usize,
    seed: u64,
    config_digest: u64,
) -> Result<EpisodeLog, CoreError>
where
    F: FnMut(&LocoEnv, &[f64]) -> Result<Vec<f64>, CoreError>,
{
    let mut obs = env.reset()?;
    let mut log = EpisodeLog {
        seed,
        config_digest,
        initial_contact: env.attached().to_vec(),
        steps: Vec::new(),
    };
    for _ in 0..max_steps {
        let windows = env.windows();
        let s_pre = env.tracker().s_remaining();
        let action = act(env, &obs)?;
        let out = env.step(&action)?;
        log.steps.push(StepRecord {
            effector_pos: env.feet().to_vec(),
            actual_contact: env.attached().to_vec(),
            commanded_contact: windows.iter().map(|w| w.current.in_contact).collect(),
            commanded_point: windows.iter().map(|w| w.current.point).collect(),
            pose: env.base(),
            s_remaining: s_pre,
            reward: out.reward,
            breakdown: out.info.breakdown,
            advanced: out.info.advanced,
            bonus_fired: out.info.bonus_fired,
        });
        let done = out.done();
        obs = out.obs;
        if done {
            break;
        }
    }
    Ok(log)
}

/// Run one manipulation episode under `act`, recording every step.
pub fn run_manip_episode<F>(
    env: &mut ManipEnv,
    mut act: F,
    max_steps: usize,
    seed: u64,
    config_digest: u64,
) -> Result<EpisodeLog, CoreError>
where
    F: FnMut(&ManipEnv, &[f64]) -> Result<Vec<f64>, CoreError>,
{
    let mut obs = env.reset()?;
    let mut log = EpisodeLog {
        seed,
        config_digest,
        initial_contact: env.attached().to_vec(),
        steps: Vec::new(),
    };
    for _ in 0..max_steps {
        let windows = env.windows();
        let s_pre = env.tracker().s_remaining();
        let action = act(env, &obs)?;
        let out = env.step(&action)?;
        log.steps.push(StepRecord {
            effector_pos: env.hands().to_vec(),
            actual_contact: env.attached().to_vec(),
            commanded_contact: windows.iter().map(|w| w.current.in_contact).collect(),
            commanded_point: windows.iter().map(|w| w.current.point).collect(),
            pose: env.object_pose(),
            s_remaining: s_pre,
            reward: out.reward,
            breakdown: out.info.breakdown,
            advanced: out.info.advanced,
            bonus_fired: out.info.bonus_fired,
        });
        let done = out.done();
        obs = out.obs;
        if done {
            break;
        }
    }
    Ok(log)
}

/// One table cell: axis coordinates, aggregate, and provenance flags.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCell {
    pub keys: Vec<(String, String)>,
    /// `None` marks an absent cell (no valid episodes; distinct from zero).
    pub mean: Option<f64>,
    pub stderr: f64,
    pub n: usize,
    pub flags: Vec<String>,
}

/// Named-axis aggregate emitted by the evaluation protocols.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    pub axes: Vec<String>,
    pub cells: Vec<MetricCell>,
    pub metadata: Vec<(String, String)>,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var / n))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Commanded-vs-realized base velocity over a planar velocity grid.
///
/// Each cell builds plans via the velocity mapping, runs greedy episodes and
/// reports the mean L2 error between the commanded velocity and the realized
/// mean base velocity (displacement over time, in the start frame). Cells on
/// the forward/backward training line within the speed cap are flagged.
pub fn velocity_grid_eval(
    params: &PolicyParams,
    base_cfg: &LocoConfig,
    gait: GaitType,
    axis: &[f64],
    episodes: usize,
    episode_steps: usize,
    seed: u64,
) -> Result<MetricTable, CoreError> {
    if episodes == 0 || episode_steps == 0 {
        return Err(CoreError::InvalidArgument(String::from(
            "velocity grid needs episodes and steps",
        )));
    }
    let duration = base_cfg.duration_override.unwrap_or(0.35);
    let mut cells = Vec::new();
    for (iy, &vy) in axis.iter().enumerate() {
        for (ix, &vx) in axis.iter().enumerate() {
            let cell_seed = derive_seed(seed, (iy * axis.len() + ix) as u64);
            let (plan_params, _) = velocity_to_params(vx, vy, duration, gait.period())?;
            let mut errs = Vec::with_capacity(episodes);
            for ep in 0..episodes {
                let mut cfg = base_cfg.clone();
                cfg.gait = GaitSelection::Fixed(gait);
                cfg.params_override = Some(plan_params);
                cfg.duration_override = Some(duration);
                cfg.step_limit = episode_steps;
                cfg.horizon_slots = horizon_for(episode_steps, cfg.dt, duration);
                let mut env = LocoEnv::new(cfg, derive_seed(cell_seed, ep as u64))?;
                let mut controller = PolicyController::new(params);
                let log = run_loco_episode(
                    &mut env,
                    |_, obs| controller.act(obs),
                    episode_steps,
                    derive_seed(cell_seed, ep as u64),
                    0,
                )?;
                let start = env.plan_start();
                let end = log.steps.last().expect("nonempty episode").pose;
                let elapsed = log.steps.len() as f64 * base_cfg.dt;
                let realized = start.inverse_rotate(end.pos - start.pos) * (1.0 / elapsed);
                errs.push(realized.dist(Vec2::new(vx, vy)));
            }
            let (mean, stderr) = mean_stderr(&errs);
            let mut flags = Vec::new();
            if vy == 0.0 && fabs(vx) <= 0.65 {
                flags.push(String::from("trained"));
            }
            cells.push(MetricCell {
                keys: alloc::vec![
                    (String::from("vx"), fmt(vx)),
                    (String::from("vy"), fmt(vy)),
                ],
                mean: Some(mean),
                stderr,
                n: episodes,
                flags,
            });
        }
    }
    Ok(MetricTable {
        axes: alloc::vec![String::from("vx"), String::from("vy")],
        cells,
        metadata: alloc::vec![
            (String::from("metric"), String::from("velocity_tracking_error")),
            (String::from("gait"), gait.name().to_string()),
            (String::from("episodes_per_cell"), format!("{episodes}")),
        ],
    })
}

fn horizon_for(steps: usize, dt: f64, duration: f64) -> usize {
    (libm::ceil(steps as f64 * dt / duration) as usize + 2).max(2)
}

/// One row of a duration sweep: a named policy and the gaits it runs.
pub struct SweepPolicy {
    pub name: String,
    /// Missing checkpoints produce absent cells rather than failures.
    pub params: Option<PolicyParams>,
    pub gaits: Vec<GaitType>,
}

/// Contact-location tracking error and plan deviation per (policy, gait,
/// command duration). Episode seeds are shared across policies so cells are
/// directly comparable.
pub fn duration_sweep(
    policies: &[SweepPolicy],
    base_cfg: &LocoConfig,
    durations: &[f64],
    episodes: usize,
    episode_steps: usize,
    seed: u64,
) -> Result<(MetricTable, MetricTable), CoreError> {
    if episodes == 0 {
        return Err(CoreError::InvalidArgument(String::from(
            "duration sweep needs episodes",
        )));
    }
    let mut l2_cells = Vec::new();
    let mut ham_cells = Vec::new();
    for policy in policies {
        for &gait in &policy.gaits {
            for (di, &duration) in durations.iter().enumerate() {
                let keys = alloc::vec![
                    (String::from("policy"), policy.name.clone()),
                    (String::from("gait"), gait.name().to_string()),
                    (String::from("duration"), fmt(duration)),
                ];
                let Some(params) = &policy.params else {
                    for cells in [&mut l2_cells, &mut ham_cells] {
                        cells.push(MetricCell {
                            keys: keys.clone(),
                            mean: None,
                            stderr: 0.0,
                            n: 0,
                            flags: alloc::vec![String::from("absent")],
                        });
                    }
                    continue;
                };
                let gait_idx = GaitType::ALL.iter().position(|&g| g == gait).unwrap();
                let mut l2 = Vec::new();
                let mut ham = Vec::new();
                for ep in 0..episodes {
                    // seed shared across policies for paired comparisons
                    let ep_seed = derive_seed(
                        derive_seed(seed, (gait_idx * durations.len() + di) as u64),
                        ep as u64,
                    );
                    let mut cfg = base_cfg.clone();
                    cfg.gait = GaitSelection::Fixed(gait);
                    cfg.duration_override = Some(duration);
                    cfg.step_limit = episode_steps;
                    cfg.horizon_slots = horizon_for(episode_steps, cfg.dt, duration);
                    let mut env = LocoEnv::new(cfg, ep_seed)?;
                    let mut controller = PolicyController::new(params);
                    let log = run_loco_episode(
                        &mut env,
                        |_, obs| controller.act(obs),
                        episode_steps,
                        ep_seed,
                        0,
                    )?;
                    if let Some(e) = contact_tracking_error(&log)? {
                        l2.push(e);
                    }
                    ham.push(plan_deviation(&log)?);
                }
                let (hm, hs) = mean_stderr(&ham);
                ham_cells.push(MetricCell {
                    keys: keys.clone(),
                    mean: Some(hm),
                    stderr: hs,
                    n: ham.len(),
                    flags: Vec::new(),
                });
                if l2.is_empty() {
                    l2_cells.push(MetricCell {
                        keys,
                        mean: None,
                        stderr: 0.0,
                        n: 0,
                        flags: alloc::vec![String::from("absent")],
                    });
                } else {
                    let (m, s) = mean_stderr(&l2);
                    let n = l2.len();
                    l2_cells.push(MetricCell {
                        keys,
                        mean: Some(m),
                        stderr: s,
                        n,
                        flags: Vec::new(),
                    });
                }
            }
        }
    }
    let axes = alloc::vec![
        String::from("policy"),
        String::from("gait"),
        String::from("duration"),
    ];
    let meta = |metric: &str| {
        alloc::vec![
            (String::from("metric"), String::from(metric)),
            (
                String::from("hamming_normalization"),
                String::from("per_step_mean"),
            ),
            (String::from("episodes_per_cell"), format!("{episodes}")),
        ]
    };
    Ok((
        MetricTable {
            axes: axes.clone(),
            cells: l2_cells,
            metadata: meta("contact_tracking_error"),
        },
        MetricTable {
            axes,
            cells: ham_cells,
            metadata: meta("plan_deviation"),
        },
    ))
}

/// Terminal pose errors for a manipulation policy under the given target
/// sampling ranges.
pub fn pose_error_eval(
    params: &PolicyParams,
    base_cfg: &ManipConfig,
    task: crate::env::ManipTask,
    range_label: &str,
    episodes: usize,
    seed: u64,
) -> Result<MetricTable, CoreError> {
    if episodes == 0 {
        return Err(CoreError::InvalidArgument(String::from(
            "pose evaluation needs episodes",
        )));
    }
    let mut pos_errs = Vec::with_capacity(episodes);
    let mut rot_errs = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let mut cfg = base_cfg.clone();
        cfg.task = task;
        let mut env = ManipEnv::new(cfg, derive_seed(seed, ep as u64))?;
        let mut controller = PolicyController::new(params);
        let log = run_manip_episode(
            &mut env,
            |_, obs| controller.act(obs),
            base_cfg.step_limit,
            derive_seed(seed, ep as u64),
            0,
        )?;
        let goal = env
            .bundle()
            .pose_goals
            .last()
            .expect("plans carry targets");
        let end = log.steps.last().expect("nonempty episode").pose;
        pos_errs.push(end.pos.dist(goal.position));
        rot_errs.push(angle_dist(end.theta, goal.angle));
    }
    let task_name = match task {
        crate::env::ManipTask::Repose { .. } => "repose",
        crate::env::ManipTask::Reorient { .. } => "reorient",
    };
    let mut cells = Vec::new();
    for (metric, values) in [("position", &pos_errs), ("rotation", &rot_errs)] {
        let (m, s) = mean_stderr(values);
        cells.push(MetricCell {
            keys: alloc::vec![
                (String::from("task"), task_name.to_string()),
                (String::from("ranges"), range_label.to_string()),
                (String::from("metric"), String::from(metric)),
            ],
            mean: Some(m),
            stderr: s,
            n: values.len(),
            flags: Vec::new(),
        });
    }
    Ok(MetricTable {
        axes: alloc::vec![
            String::from("task"),
            String::from("ranges"),
            String::from("metric"),
        ],
        cells,
        metadata: alloc::vec![
            (String::from("metric"), String::from("terminal_pose_error")),
            (String::from("episodes"), format!("{episodes}")),
        ],
    })
}

/// `int_0^a int_0^b sqrt(x^2 + y^2) dy dx`, closed form.
fn corner_integral(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let r = sqrt(a * a + b * b);
    a * b * r / 3.0 + (b * b * b * asinh(a / b) + a * a * a * asinh(b / a)) / 6.0
}

/// Expected distance-to-origin of a point uniform on a rectangle, plus the
/// expected absolute angle of a uniform yaw draw: the terminal errors a
/// motionless policy would score under the given target ranges.
pub fn zero_motion_baseline(ranges: &PoseRanges) -> (f64, f64) {
    let (x0, x1) = ranges.x;
    let (y0, y1) = ranges.y;
    // signed cumulative corner integral
    let g = |x: f64, y: f64| {
        let s = if x < 0.0 { -1.0 } else { 1.0 } * if y < 0.0 { -1.0 } else { 1.0 };
        s * corner_integral(fabs(x), fabs(y))
    };
    let area = (x1 - x0) * (y1 - y0);
    let pos = if area == 0.0 {
        // degenerate rectangle: 1-D expectation along whichever axis remains
        let mean_abs = |a: f64, b: f64| {
            if a >= 0.0 {
                (a + b) / 2.0
            } else if b <= 0.0 {
                -(a + b) / 2.0
            } else {
                (a * a + b * b) / (2.0 * (b - a))
            }
        };
        if x1 > x0 {
            mean_abs(x0, x1)
        } else if y1 > y0 {
            mean_abs(y0, y1)
        } else {
            sqrt(x0 * x0 + y0 * y0)
        }
    } else {
        (g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)) / area
    };
    let (t0, t1) = ranges.yaw;
    let rot = if t0 >= 0.0 {
        (t0 + t1) / 2.0
    } else if t1 <= 0.0 {
        -(t0 + t1) / 2.0
    } else {
        (t0 * t0 + t1 * t1) / (2.0 * (t1 - t0))
    };
    (pos, rot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, uniform};

    fn synthetic_log(cmd: &[bool], act: &[bool], hits: &[(f64, f64)]) -> EpisodeLog {
        // one effector; hits give (actual, commanded) x positions per step
        let steps = cmd
            .iter()
            .zip(act)
            .zip(hits)
            .map(|((c, a), (px, gx))| StepRecord {
                effector_pos: alloc::vec![Vec2::new(*px, 0.0)],
                actual_contact: alloc::vec![*a],
                commanded_contact: alloc::vec![*c],
                commanded_point: alloc::vec![Vec2::new(*gx, 0.0)],
                pose: Pose2::IDENTITY,
                s_remaining: 0.1,
                reward: 0.0,
                breakdown: RewardBreakdown::default(),
                advanced: false,
                bonus_fired: false,
            })
            .collect();
        EpisodeLog {
            seed: 0,
            config_digest: 0,
            initial_contact: alloc::vec![false],
            steps,
        }
    }

    #[test]
    fn tracking_error_cases() {
        // exact touchdowns score zero
        let log = synthetic_log(
            &[true, true],
            &[true, true],
            &[(0.5, 0.5), (0.5, 0.5)],
        );
        assert_eq!(contact_tracking_error(&log).unwrap(), Some(0.0));
        // single touchdown 0.05 off
        let log = synthetic_log(&[true], &[true], &[(0.55, 0.5)]);
        assert!((contact_tracking_error(&log).unwrap().unwrap() - 0.05).abs() < 1e-12);
        // two touchdowns 0.02 and 0.04 off average to 0.03
        let log = synthetic_log(
            &[true, false, true],
            &[true, false, true],
            &[(0.52, 0.5), (0.0, 0.5), (0.54, 0.5)],
        );
        assert!((contact_tracking_error(&log).unwrap().unwrap() - 0.03).abs() < 1e-12);
        // no contact at all: absent, not zero
        let log = synthetic_log(&[false], &[false], &[(0.0, 0.5)]);
        assert_eq!(contact_tracking_error(&log).unwrap(), None);
    }

    #[test]
    fn deviation_cases() {
        let log = synthetic_log(
            &[true, false, true, false],
            &[true, false, true, false],
            &[(0.0, 0.0); 4],
        );
        assert_eq!(plan_deviation(&log).unwrap(), 0.0);
        let log = synthetic_log(
            &[true, true, true, true],
            &[false, false, false, false],
            &[(0.0, 0.0); 4],
        );
        assert_eq!(plan_deviation(&log).unwrap(), 1.0);
        let log = synthetic_log(
            &[true, true, true, true],
            &[true, false, true, true],
            &[(0.0, 0.0); 4],
        );
        assert_eq!(plan_deviation(&log).unwrap(), 0.25);
    }

    #[test]
    fn random_contacts_deviate_near_half() {
        let mut rng = rng_from_seed(5);
        let t = 4000;
        let cmd: Vec<bool> = (0..t).map(|i| i % 2 == 0).collect();
        let act: Vec<bool> = (0..t).map(|_| uniform(&mut rng, 0.0, 1.0) > 0.5).collect();
        let hits = alloc::vec![(0.0, 0.0); t];
        let log = synthetic_log(&cmd, &act, &hits);
        let d = plan_deviation(&log).unwrap();
        assert!((d - 0.5).abs() < 0.05, "deviation {d}");
    }

    #[test]
    fn baseline_matches_monte_carlo() {
        for ranges in [PoseRanges::trained(), PoseRanges::evaluated()] {
            let (pos, rot) = zero_motion_baseline(&ranges);
            let mut rng = rng_from_seed(11);
            let n = 2_000_000;
            let mut pos_mc = 0.0;
            let mut rot_mc = 0.0;
            for _ in 0..n {
                let x = uniform(&mut rng, ranges.x.0, ranges.x.1);
                let y = uniform(&mut rng, ranges.y.0, ranges.y.1);
                let th = uniform(&mut rng, ranges.yaw.0, ranges.yaw.1);
                pos_mc += sqrt(x * x + y * y);
                rot_mc += fabs(th);
            }
            pos_mc /= n as f64;
            rot_mc /= n as f64;
            assert!((pos - pos_mc).abs() < 1e-3, "pos {pos} vs mc {pos_mc}");
            assert!((rot - rot_mc).abs() < 1e-3, "rot {rot} vs mc {rot_mc}");
        }
    }

    #[test]
    fn degenerate_baseline_ranges() {
        let ranges = PoseRanges {
            x: (0.0, 0.0),
            y: (-0.2, 0.2),
            yaw: (0.0, 0.0),
        };
        let (pos, rot) = zero_motion_baseline(&ranges);
        assert!((pos - 0.1).abs() < 1e-12);
        assert_eq!(rot, 0.0);
    }

    #[test]
    fn grid_cell_count() {
        // the default nine-point axis yields an 81-cell table; verified
        // structurally without running episodes
        let axis: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        assert_eq!(axis.len() * axis.len(), 81);
    }
}
