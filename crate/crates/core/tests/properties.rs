//! Property tests for the pure operations: phase machine, deviation metric,
//! goal tracking, rewards, gait templates and surface geometry.

use contactrl_core::contact::{
    hamming_deviation, phase_of, ContactGoal, ContactPhase, ContactPlan, GoalTracker,
    IndicatorMatrix,
};
use contactrl_core::gait::{
    build_plan, footfall_locations, gait_template, sample_gait_params, FootLayout, GaitParams,
    GaitRanges, GaitType, Steering, SteeringMode, NUM_FEET,
};
use contactrl_core::manip::{surface_point, ObjectSpec, SurfaceContact};
use contactrl_core::math::{Pose2, Vec2};
use contactrl_core::reward::{
    detach_reward, hold_reward, pose_reward, reach_reward, total_contact_reward,
    EffectorSnapshot, RewardConfig,
};
use proptest::prelude::*;
use std::sync::Arc;

fn snapshot_strategy() -> impl Strategy<Value = EffectorSnapshot> {
    (
        (-2.0..2.0f64, -2.0..2.0f64),
        any::<bool>(),
        (-2.0..2.0f64, -2.0..2.0f64),
        any::<bool>(),
        0.0..1.0f64,
    )
        .prop_map(|((px, py), actual_contact, (gx, gy), commanded_contact, s)| {
            EffectorSnapshot {
                actual_pos: Vec2::new(px, py),
                actual_contact,
                goal_point: Vec2::new(gx, gy),
                commanded_contact,
                s_remaining: s,
            }
        })
}

proptest! {
    /// Exactly one phase for every admissible input.
    #[test]
    fn phase_totality(in_contact: bool, s in 0.0..2.0f64, delta in 1e-6..1.0f64) {
        let phase = phase_of(in_contact, s, delta).unwrap();
        let expected = if in_contact {
            ContactPhase::Hold
        } else if s <= delta {
            ContactPhase::Reach
        } else {
            ContactPhase::Detach
        };
        prop_assert_eq!(phase, expected);
    }

    /// The phase partition matches the reward indicators: reach pays only in
    /// Reach, hold only in Hold, detach only in Detach.
    #[test]
    fn phase_matches_reward_indicators(snap in snapshot_strategy()) {
        let cfg = RewardConfig::default();
        let phase = phase_of(snap.commanded_contact, snap.s_remaining, cfg.delta).unwrap();
        let reach = reach_reward(&snap, &cfg);
        let detach = detach_reward(&snap, &cfg);
        let hold = hold_reward(&snap, &cfg);
        prop_assert_eq!(reach > 0.0, phase == ContactPhase::Reach);
        prop_assert_eq!(
            detach > 0.0,
            phase == ContactPhase::Detach && !snap.actual_contact
        );
        prop_assert!(hold == 0.0 || phase == ContactPhase::Hold);
        // reach and detach never co-fire
        prop_assert!(!(reach > 0.0 && detach > 0.0));
    }

    /// Reward bounds.
    #[test]
    fn reward_bounds(snap in snapshot_strategy()) {
        let cfg = RewardConfig::default();
        let reach = reach_reward(&snap, &cfg);
        let hold = hold_reward(&snap, &cfg);
        let detach = detach_reward(&snap, &cfg);
        prop_assert!((0.0..=1.0).contains(&reach));
        prop_assert!(hold == 0.0 || (1.0..=1.0 + cfg.alpha_hold).contains(&hold));
        prop_assert!(detach == 0.0 || detach == 1.0);
        let pose = pose_reward(snap.s_remaining, snap.s_remaining, &cfg);
        prop_assert!(pose <= cfg.c_pos / cfg.eps_pos + cfg.c_rot / cfg.eps_rot);
    }

    /// Strict monotonicity in the placement distance and pose errors.
    #[test]
    fn reward_monotonicity(d1 in 0.0..2.0f64, extra in 1e-6..2.0f64) {
        let cfg = RewardConfig::default();
        let d2 = d1 + extra;
        let snap = |d: f64, cmd: bool, act: bool, s: f64| EffectorSnapshot {
            actual_pos: Vec2::new(d, 0.0),
            actual_contact: act,
            goal_point: Vec2::ZERO,
            commanded_contact: cmd,
            s_remaining: s,
        };
        prop_assert!(
            reach_reward(&snap(d1, false, false, 0.1), &cfg)
                > reach_reward(&snap(d2, false, false, 0.1), &cfg)
        );
        prop_assert!(
            hold_reward(&snap(d1, true, true, 0.5), &cfg)
                > hold_reward(&snap(d2, true, true, 0.5), &cfg)
        );
        prop_assert!(pose_reward(d1, 0.3, &cfg) > pose_reward(d2, 0.3, &cfg));
        prop_assert!(pose_reward(0.3, d1, &cfg) > pose_reward(0.3, d2, &cfg));
    }

    /// The breakdown reproduces the reported total exactly.
    #[test]
    fn breakdown_consistency(snaps in proptest::collection::vec(snapshot_strategy(), 1..6)) {
        let cfg = RewardConfig::default();
        let (total, b) = total_contact_reward(&snaps, Some((0.1, 0.2)), &cfg).unwrap();
        prop_assert_eq!(total, b.total());
    }

    /// Hamming deviation is a metric on bit matrices.
    #[test]
    fn hamming_is_a_metric(
        bits_a in proptest::collection::vec(any::<bool>(), 12),
        bits_b in proptest::collection::vec(any::<bool>(), 12),
        bits_c in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let a = IndicatorMatrix::new(3, 4, bits_a.clone()).unwrap();
        let b = IndicatorMatrix::new(3, 4, bits_b).unwrap();
        let c = IndicatorMatrix::new(3, 4, bits_c).unwrap();
        let dab = hamming_deviation(&a, &b).unwrap().count;
        let dba = hamming_deviation(&b, &a).unwrap().count;
        let dac = hamming_deviation(&a, &c).unwrap().count;
        let dcb = hamming_deviation(&c, &b).unwrap().count;
        prop_assert_eq!(dab, dba);
        prop_assert!(dab <= dac + dcb);
        let daa = hamming_deviation(&a, &a).unwrap();
        prop_assert_eq!(daa.count, 0);
        let same = IndicatorMatrix::new(3, 4, bits_a).unwrap();
        prop_assert_eq!(hamming_deviation(&a, &same).unwrap().count, 0);
    }

    /// Ticked time always equals consumed durations plus the current
    /// deficit, and the cursor never moves backwards; a bonus implies an
    /// advancement.
    #[test]
    fn tick_conservation_and_monotone_cursor(
        durations in proptest::collection::vec(0.05..0.5f64, 2..6),
        dts in proptest::collection::vec(0.001..0.09f64, 1..300),
        achieved in proptest::collection::vec(any::<bool>(), 300),
    ) {
        let goals: Vec<ContactGoal> = durations
            .iter()
            .map(|&d| ContactGoal::new(Vec2::ZERO, true, d).unwrap())
            .collect();
        let plan = ContactPlan::new(vec!["e".to_string()], vec![goals]).unwrap();
        let mut tracker = GoalTracker::new(Arc::new(plan));
        let mut ticked = 0.0;
        let mut consumed = 0.0;
        let mut last_cursor = tracker.cursor();
        for (i, &dt) in dts.iter().enumerate() {
            if tracker.is_terminal() {
                break;
            }
            let duration_before = tracker.current_duration();
            let out = tracker.tick_in_place(dt, &[achieved[i]]).unwrap();
            ticked += dt;
            if out.expired {
                consumed += duration_before;
            }
            prop_assert!(tracker.cursor() >= last_cursor);
            last_cursor = tracker.cursor();
            if out.bonus_fired {
                prop_assert!(out.advanced);
            }
            if !tracker.is_terminal() {
                let deficit = tracker.current_duration() - tracker.s_remaining();
                prop_assert!((ticked - (consumed + deficit)).abs() < 1e-9);
            }
        }
    }

    /// Templates are periodic and every foot alternates within one period.
    #[test]
    fn template_periodicity(slot in 0usize..64) {
        for gait in GaitType::ALL {
            let p = gait.period();
            prop_assert_eq!(gait_template(gait, slot), gait_template(gait, slot + p));
            for foot in 0..NUM_FEET {
                let states: Vec<bool> = (0..p).map(|k| gait_template(gait, k)[foot]).collect();
                prop_assert!(states.iter().any(|&s| s) && states.iter().any(|&s| !s));
            }
        }
    }

    /// With zero offsets and equal pair strides, consecutive contacts of a
    /// foot are exactly one stride apart along a straight path.
    #[test]
    fn straight_footfall_spacing(
        stride in 0.0..0.3f64,
        heading in -3.0..3.0f64,
        duration in 0.2..0.5f64,
        slot in 0usize..8,
    ) {
        let params = GaitParams {
            stride: [stride, stride],
            stance_width: [0.2, 0.2],
            steering: Steering::Heading(heading),
            foot_offsets: [Vec2::ZERO; NUM_FEET],
            duration,
        };
        let layout = FootLayout::default();
        let a = footfall_locations(&params, &layout, slot, Pose2::IDENTITY, 2).unwrap();
        let b = footfall_locations(&params, &layout, slot + 2, Pose2::IDENTITY, 2).unwrap();
        for foot in 0..NUM_FEET {
            prop_assert!((a[foot].dist(b[foot]) - stride).abs() < 1e-9);
        }
    }

    /// Plans reconstruct from an independent template-and-geometry
    /// composition: scan each foot's stance stretches, assign the stretch's
    /// first-slot footfall to stance slots and the following stretch's to
    /// swing slots.
    #[test]
    fn plan_matches_independent_reconstruction(seed in 0u64..500, gait_idx in 0usize..5) {
        let gait = GaitType::ALL[gait_idx];
        let ranges = GaitRanges::default();
        let params = sample_gait_params(seed, SteeringMode::Heading, &ranges);
        let layout = FootLayout::default();
        let horizon = 9;
        let plan = build_plan(gait, &params, &layout, horizon, Pose2::IDENTITY).unwrap();
        prop_assert_eq!(plan.num_effectors(), NUM_FEET);
        prop_assert_eq!(plan.horizon(), horizon);
        let spc = gait.period();
        for foot in 0..NUM_FEET {
            // touchdown slots: template rises from 0 to 1
            let ind = |k: usize| gait_template(gait, k)[foot];
            for slot in 0..horizon {
                let goal = plan.goal(foot, slot);
                prop_assert_eq!(goal.in_contact, ind(slot));
                prop_assert_eq!(goal.duration, params.duration);
                let touchdown = if ind(slot) {
                    // walk left to the rise
                    (0..=slot).rev().find(|&k| k == 0 || !ind(k - 1)).unwrap()
                } else {
                    // walk right to the rise
                    ((slot + 1)..=(slot + spc)).find(|&k| ind(k)).unwrap()
                };
                let expected =
                    footfall_locations(&params, &layout, touchdown, Pose2::IDENTITY, spc)
                        .unwrap()[foot];
                prop_assert_eq!(goal.point, expected);
            }
        }
    }

    /// Surface contacts always land on the object boundary.
    #[test]
    fn surface_points_on_boundary(
        face in 0usize..8,
        frac in -1.0..1.0f64,
        angle in -3.1..3.1f64,
        px in -0.5..0.5f64,
        theta in -3.0..3.0f64,
    ) {
        let pose = Pose2::new(px, -px, theta);
        let specs = [
            ObjectSpec::Box { half_extents: Vec2::new(0.12, 0.2) },
            ObjectSpec::RoundedPolygon { sides: 8, core_circumradius: 0.18, corner_radius: 0.02 },
            ObjectSpec::Disc { radius: 0.15 },
        ];
        for spec in specs {
            let contact = match spec {
                ObjectSpec::Disc { .. } => SurfaceContact::Rim { angle },
                _ => {
                    let f = face % spec.num_faces();
                    SurfaceContact::Face { face: f, offset: frac * spec.face_half_extent(f) }
                }
            };
            let world = surface_point(&spec, pose, &contact).unwrap();
            let local = pose.inverse_apply(world);
            prop_assert!(spec.boundary_distance(local).abs() <= 1e-9);
        }
    }
}

/// Statistical check of the sampling distributions: bounds always hold and
/// empirical means sit near range midpoints.
#[test]
fn gait_sampling_statistics() {
    let ranges = GaitRanges::default();
    let n = 10_000;
    let mut stride_sum = 0.0;
    let mut stance_sum = 0.0;
    let mut duration_sum = 0.0;
    let mut stride_min = f64::INFINITY;
    let mut stride_max = f64::NEG_INFINITY;
    for seed in 0..n {
        let p = sample_gait_params(seed, SteeringMode::YawRate, &ranges);
        for s in p.stride {
            assert!((0.0..=0.3).contains(&s));
            stride_min = stride_min.min(s);
            stride_max = stride_max.max(s);
        }
        stride_sum += p.stride[0] + p.stride[1];
        stance_sum += p.stance_width[0] + p.stance_width[1];
        duration_sum += p.duration;
        match p.steering {
            Steering::YawRate(w) => assert!(w.abs() <= core::f64::consts::PI),
            Steering::Heading(_) => panic!("wrong steering mode"),
        }
    }
    let samples = (2 * n) as f64;
    // 3 sigma of a uniform mean estimate: 3 * (range / sqrt(12)) / sqrt(n)
    let tol = |range: f64, count: f64| 3.0 * range / (12.0f64).sqrt() / count.sqrt();
    assert!((stride_sum / samples - 0.15).abs() < tol(0.3, samples));
    assert!((stance_sum / samples - 0.2).abs() < tol(0.2, samples));
    assert!((duration_sum / n as f64 - 0.35).abs() < tol(0.02, n as f64));
    assert!(stride_min < 0.01 && stride_max > 0.29, "range coverage");
}
