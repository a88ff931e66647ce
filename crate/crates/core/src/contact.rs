//! Contact goals, plans, the reach/hold/detach phase machine and goal
//! advancement.
//!
//! A contact goal commands one end-effector: touch (or stay clear of) a world
//! point for a fixed duration.  Plans stack one goal per effector per slot;
//! a [`GoalTracker`] walks the slot axis at runtime, re-arming unachieved
//! slots and granting a discovery bonus on advancement.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math::Vec2;

/// One commanded contact: world point, contact indicator, command duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactGoal {
    /// Commanded contact location in world coordinates (meters).
    pub point: Vec2,
    /// Whether the effector should be in contact during this goal.
    pub in_contact: bool,
    /// Command duration in seconds; strictly positive.
    pub duration: f64,
}

impl ContactGoal {
    pub fn new(point: Vec2, in_contact: bool, duration: f64) -> Result<Self, CoreError> {
        if !point.is_finite() {
            return Err(CoreError::InvalidArgument(String::from(
                "contact goal point must be finite",
            )));
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "contact goal duration must be > 0, got {duration}"
            )));
        }
        Ok(ContactGoal {
            point,
            in_contact,
            duration,
        })
    }
}

/// The two upcoming contact switches for one effector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalWindow {
    pub current: ContactGoal,
    pub next: ContactGoal,
}

/// Contact phase of an end-effector at one control tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactPhase {
    /// Guide the effector to the commanded point (no-contact command about to
    /// flip: remaining duration at or below the reach threshold).
    Reach,
    /// Maintain the commanded contact.
    Hold,
    /// Stay clear of contact (no-contact command, plenty of time left).
    Detach,
}

/// Phase rule: contact commanded -> Hold; otherwise Reach when the remaining
/// duration is at or below `delta`, Detach when above.
///
/// The boundary `s == delta` is classified Reach.
pub fn phase_of(in_contact: bool, s_remaining: f64, delta: f64) -> Result<ContactPhase, CoreError> {
    if !(s_remaining >= 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "remaining duration must be >= 0, got {s_remaining}"
        )));
    }
    if !(delta > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "reach threshold must be > 0, got {delta}"
        )));
    }
    Ok(if in_contact {
        ContactPhase::Hold
    } else if s_remaining <= delta {
        ContactPhase::Reach
    } else {
        ContactPhase::Detach
    })
}

/// Per-effector goal sequences over a shared slot axis.
///
/// All effectors have the same number of slots and, within a slot, the same
/// command duration; stacking the indicators yields the plan's contact
/// sequence bit matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactPlan {
    effectors: Vec<String>,
    goals: Vec<Vec<ContactGoal>>,
}

impl ContactPlan {
    pub fn new(effectors: Vec<String>, goals: Vec<Vec<ContactGoal>>) -> Result<Self, CoreError> {
        if effectors.is_empty() || effectors.len() != goals.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} effector names vs {} goal sequences",
                effectors.len(),
                goals.len()
            )));
        }
        let horizon = goals[0].len();
        if horizon == 0 {
            return Err(CoreError::InvalidArgument(String::from(
                "plan must have at least one slot",
            )));
        }
        for seq in &goals {
            if seq.len() != horizon {
                return Err(CoreError::ShapeMismatch(format!(
                    "goal sequences of unequal length ({} vs {horizon})",
                    seq.len()
                )));
            }
        }
        for slot in 0..horizon {
            let d = goals[0][slot].duration;
            for seq in &goals {
                let g = &seq[slot];
                if !g.point.is_finite() || !(g.duration > 0.0) {
                    return Err(CoreError::InvalidArgument(format!(
                        "malformed goal at slot {slot}"
                    )));
                }
                if g.duration != d {
                    return Err(CoreError::InvalidArgument(format!(
                        "slot {slot} durations differ across effectors"
                    )));
                }
            }
        }
        Ok(ContactPlan { effectors, goals })
    }

    pub fn num_effectors(&self) -> usize {
        self.effectors.len()
    }

    pub fn horizon(&self) -> usize {
        self.goals[0].len()
    }

    pub fn effector_names(&self) -> &[String] {
        &self.effectors
    }

    pub fn goal(&self, effector: usize, slot: usize) -> &ContactGoal {
        &self.goals[effector][slot]
    }

    pub fn goals_of(&self, effector: usize) -> &[ContactGoal] {
        &self.goals[effector]
    }

    /// Shared command duration of a slot.
    pub fn slot_duration(&self, slot: usize) -> f64 {
        self.goals[0][slot].duration
    }

    /// Stack the indicators into the plan's contact-sequence bit matrix.
    pub fn indicator_matrix(&self) -> IndicatorMatrix {
        let e = self.num_effectors();
        let t = self.horizon();
        let mut bits = Vec::with_capacity(e * t);
        for seq in &self.goals {
            for g in seq {
                bits.push(g.in_contact);
            }
        }
        IndicatorMatrix { e, t, bits }
    }
}

/// Dense row-major bit matrix: effectors by time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorMatrix {
    e: usize,
    t: usize,
    bits: Vec<bool>,
}

impl IndicatorMatrix {
    pub fn new(e: usize, t: usize, bits: Vec<bool>) -> Result<Self, CoreError> {
        if bits.len() != e * t {
            return Err(CoreError::ShapeMismatch(format!(
                "{e}x{t} matrix needs {} bits, got {}",
                e * t,
                bits.len()
            )));
        }
        Ok(IndicatorMatrix { e, t, bits })
    }

    /// Build column by column (one row per effector, one column per step).
    pub fn from_columns(e: usize, columns: &[Vec<bool>]) -> Result<Self, CoreError> {
        let t = columns.len();
        let mut bits = alloc::vec![false; e * t];
        for (step, col) in columns.iter().enumerate() {
            if col.len() != e {
                return Err(CoreError::ShapeMismatch(format!(
                    "column {step} has {} entries, expected {e}",
                    col.len()
                )));
            }
            for (eff, &b) in col.iter().enumerate() {
                bits[eff * t + step] = b;
            }
        }
        Ok(IndicatorMatrix { e, t, bits })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.e, self.t)
    }

    pub fn get(&self, effector: usize, step: usize) -> bool {
        self.bits[effector * self.t + step]
    }
}

/// Mismatch count and per-entry mean between two equally shaped bit matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HammingDeviation {
    pub count: usize,
    pub per_step_mean: f64,
}

/// Hamming distance between a commanded indicator matrix and the realized
/// contact states, plus its per-entry mean.
pub fn hamming_deviation(
    plan_bits: &IndicatorMatrix,
    actual_bits: &IndicatorMatrix,
) -> Result<HammingDeviation, CoreError> {
    if plan_bits.shape() != actual_bits.shape() {
        return Err(CoreError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            plan_bits.shape(),
            actual_bits.shape()
        )));
    }
    let count = plan_bits
        .bits
        .iter()
        .zip(&actual_bits.bits)
        .filter(|(a, b)| a != b)
        .count();
    let total = plan_bits.bits.len();
    Ok(HammingDeviation {
        count,
        per_step_mean: count as f64 / total as f64,
    })
}

/// Locomotion goal-achievement test: the base projected to the ground must be
/// within `tau_base` of the centroid of the active goal points.
pub fn achieved_locomotion(
    base_xy: Vec2,
    active_goal_points: &[Vec2],
    tau_base: f64,
) -> Result<bool, CoreError> {
    if active_goal_points.is_empty() {
        return Err(CoreError::InvalidArgument(String::from(
            "achievement test needs at least one active goal point",
        )));
    }
    let mut centroid = Vec2::ZERO;
    for p in active_goal_points {
        centroid += *p;
    }
    let centroid = centroid * (1.0 / active_goal_points.len() as f64);
    Ok(base_xy.dist(centroid) <= tau_base)
}

/// Manipulation goal-achievement test: positional error within `tau_p` and
/// wrapped angular error within `tau_th`.
pub fn achieved_manipulation(
    pose: crate::math::Pose2,
    goal_pose: crate::math::Pose2,
    tau_p: f64,
    tau_th: f64,
) -> bool {
    let dp = pose.pos.dist(goal_pose.pos);
    let dth = crate::math::angle_dist(pose.theta, goal_pose.theta);
    dp <= tau_p && dth <= tau_th
}

/// What a tracker tick did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TickOutcome {
    /// The current command duration expired this tick.
    pub expired: bool,
    /// The cursor moved to the next contact switch.
    pub advanced: bool,
    /// A discovery bonus should be paid (fires exactly when advancing).
    pub bonus_fired: bool,
    /// The cursor moved past the end of the plan.
    pub terminal: bool,
}

/// Runtime cursor over a [`ContactPlan`].
///
/// All effectors advance in lockstep: a slot's duration is shared, and the
/// cursor moves only when the achievement test passes for every effector at
/// expiry.  An unachieved slot is re-armed with its own duration.  Expiry
/// overshoot carries into the next arming, so cumulative ticked time always
/// equals consumed durations plus the current deficit.
#[derive(Clone, Debug)]
pub struct GoalTracker {
    plan: Arc<ContactPlan>,
    slot: usize,
    s_remaining: f64,
    terminal: bool,
}

impl GoalTracker {
    pub fn new(plan: Arc<ContactPlan>) -> Self {
        let s = plan.slot_duration(0);
        GoalTracker {
            plan,
            slot: 0,
            s_remaining: s,
            terminal: false,
        }
    }

    pub fn plan(&self) -> &ContactPlan {
        &self.plan
    }

    /// Slot index of the current contact switch (shared by all effectors);
    /// reports one past the end once the plan is exhausted.
    pub fn cursor(&self) -> usize {
        if self.terminal {
            self.plan.horizon()
        } else {
            self.slot
        }
    }

    pub fn s_remaining(&self) -> f64 {
        self.s_remaining
    }

    /// Command duration of the current slot (the final slot's once
    /// terminal).
    pub fn current_duration(&self) -> f64 {
        self.plan.slot_duration(self.slot)
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Two-switch lookahead for one effector. At the last slot the window
    /// repeats the final goal.
    pub fn window(&self, effector: usize) -> GoalWindow {
        let cur = *self.plan.goal(effector, self.slot);
        let next_slot = (self.slot + 1).min(self.plan.horizon() - 1);
        let next = *self.plan.goal(effector, next_slot);
        GoalWindow { current: cur, next }
    }

    /// Advance time by `dt`; on expiry, advance the cursor when every
    /// effector's achievement flag is set, otherwise re-arm the same slot.
    pub fn tick_in_place(&mut self, dt: f64, achieved: &[bool]) -> Result<TickOutcome, CoreError> {
        if !(dt > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "tick dt must be > 0, got {dt}"
            )));
        }
        if achieved.len() != self.plan.num_effectors() {
            return Err(CoreError::ShapeMismatch(format!(
                "{} achievement flags for {} effectors",
                achieved.len(),
                self.plan.num_effectors()
            )));
        }
        let mut out = TickOutcome::default();
        if self.terminal {
            out.terminal = true;
            return Ok(out);
        }
        self.s_remaining -= dt;
        if self.s_remaining > 0.0 {
            return Ok(out);
        }
        out.expired = true;
        let deficit = -self.s_remaining;
        if achieved.iter().all(|&a| a) {
            out.advanced = true;
            out.bonus_fired = true;
            if self.slot + 1 >= self.plan.horizon() {
                // the slot index stays on the final goal for lookups
                self.terminal = true;
                out.terminal = true;
                self.s_remaining = 0.0;
            } else {
                self.slot += 1;
                self.s_remaining = self.plan.slot_duration(self.slot) - deficit;
            }
        } else {
            self.s_remaining = self.plan.slot_duration(self.slot) - deficit;
        }
        Ok(out)
    }

    /// Pure variant of [`Self::tick_in_place`]: returns the advanced tracker.
    pub fn ticked(&self, dt: f64, achieved: &[bool]) -> Result<(Self, TickOutcome), CoreError> {
        let mut next = self.clone();
        let out = next.tick_in_place(dt, achieved)?;
        Ok((next, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn goal(x: f64, y: f64, contact: bool, dur: f64) -> ContactGoal {
        ContactGoal::new(Vec2::new(x, y), contact, dur).unwrap()
    }

    fn three_slot_plan() -> Arc<ContactPlan> {
        let goals = vec![vec![
            goal(0.0, 0.0, true, 0.3),
            goal(0.1, 0.0, false, 0.4),
            goal(0.2, 0.0, true, 0.5),
        ]];
        Arc::new(ContactPlan::new(vec!["ee".to_string()], goals).unwrap())
    }

    #[test]
    fn phase_rules() {
        assert_eq!(phase_of(true, 0.30, 0.15).unwrap(), ContactPhase::Hold);
        assert_eq!(phase_of(false, 0.10, 0.15).unwrap(), ContactPhase::Reach);
        // boundary s == delta is Reach
        assert_eq!(phase_of(false, 0.15, 0.15).unwrap(), ContactPhase::Reach);
        assert_eq!(phase_of(false, 0.50, 0.15).unwrap(), ContactPhase::Detach);
    }

    #[test]
    fn phase_rejects_bad_arguments() {
        assert!(phase_of(false, -0.1, 0.15).is_err());
        assert!(phase_of(false, 0.1, 0.0).is_err());
        assert!(phase_of(false, f64::NAN, 0.15).is_err());
    }

    #[test]
    fn phase_exhaustive_grid() {
        let delta = 0.15;
        let big = 0.35;
        for &in_contact in &[false, true] {
            for &s in &[0.0, delta / 2.0, delta, delta + 1e-9, big] {
                let phase = phase_of(in_contact, s, delta).unwrap();
                let expected = if in_contact {
                    ContactPhase::Hold
                } else if s <= delta {
                    ContactPhase::Reach
                } else {
                    ContactPhase::Detach
                };
                assert_eq!(phase, expected, "contact={in_contact} s={s}");
            }
        }
    }

    #[test]
    fn tick_decrements_without_expiry() {
        let mut t = GoalTracker::new(three_slot_plan());
        let out = t.tick_in_place(0.02, &[true]).unwrap();
        assert!(!out.expired && !out.advanced && !out.bonus_fired);
        assert!((t.s_remaining() - 0.28).abs() < 1e-12);
        assert_eq!(t.cursor(), 0);
    }

    #[test]
    fn tick_advances_on_achieved_expiry() {
        let mut t = GoalTracker::new(three_slot_plan());
        t.s_remaining = 0.02;
        let out = t.tick_in_place(0.02, &[true]).unwrap();
        assert!(out.expired && out.advanced && out.bonus_fired);
        assert_eq!(t.cursor(), 1);
        assert!((t.s_remaining() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn tick_rearms_on_unachieved_expiry() {
        let mut t = GoalTracker::new(three_slot_plan());
        t.s_remaining = 0.01;
        let out = t.tick_in_place(0.02, &[false]).unwrap();
        assert!(out.expired && !out.advanced && !out.bonus_fired);
        assert_eq!(t.cursor(), 0);
        // re-armed with its own duration, minus the expiry overshoot
        assert!((t.s_remaining() - (0.3 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn scripted_cursor_trace() {
        // Step a 3-goal plan with alternating achievement and check the
        // cursor trace: re-arm, advance, advance, terminal.
        let mut t = GoalTracker::new(three_slot_plan());
        let dt = 0.1;
        let mut trace = vec![t.cursor()];
        let script = [
            (3, false), // expire slot 0 unachieved -> re-arm
            (3, true),  // expire slot 0 achieved -> slot 1
            (4, true),  // expire slot 1 achieved -> slot 2
            (5, true),  // expire slot 2 achieved -> terminal
        ];
        for &(ticks, achieved) in &script {
            for _ in 0..ticks {
                t.tick_in_place(dt, &[achieved]).unwrap();
            }
            trace.push(t.cursor());
        }
        assert_eq!(trace, vec![0, 0, 1, 2, 3]);
        assert!(t.is_terminal());
        // ticking a terminal tracker only reports terminal
        let out = t.tick_in_place(dt, &[true]).unwrap();
        assert!(out.terminal && !out.advanced);
    }

    #[test]
    fn window_lookahead_and_terminal_repeat() {
        let mut t = GoalTracker::new(three_slot_plan());
        let w = t.window(0);
        assert_eq!(w.current.point, Vec2::new(0.0, 0.0));
        assert_eq!(w.next.point, Vec2::new(0.1, 0.0));
        t.slot = 2;
        let w = t.window(0);
        assert_eq!(w.current.point, Vec2::new(0.2, 0.0));
        assert_eq!(w.next.point, Vec2::new(0.2, 0.0));
    }

    #[test]
    fn achieved_locomotion_cases() {
        let pts = [Vec2::new(0.1, 0.1), Vec2::new(-0.1, -0.1)];
        assert!(achieved_locomotion(Vec2::ZERO, &pts, 0.2).unwrap());
        assert!(!achieved_locomotion(Vec2::new(1.0, 0.0), &[Vec2::ZERO], 0.2).unwrap());
        assert!(achieved_locomotion(Vec2::new(0.19, 0.0), &[Vec2::ZERO], 0.2).unwrap());
        assert!(achieved_locomotion(Vec2::ZERO, &[], 0.2).is_err());
    }

    #[test]
    fn achieved_manipulation_cases() {
        use crate::math::Pose2;
        let goal = Pose2::new(0.0, 0.0, 0.0);
        assert!(achieved_manipulation(goal, goal, 0.05, 0.1));
        let near = Pose2::new(0.04, 0.0, 0.05);
        assert!(achieved_manipulation(near, goal, 0.05, 0.1));
        // wrapped seam: 3.1 vs -3.1 differ by ~0.083 < 0.2
        let a = Pose2::new(0.0, 0.0, 3.1);
        let b = Pose2::new(0.0, 0.0, -3.1);
        assert!(achieved_manipulation(a, b, 0.05, 0.2));
        let far = Pose2::new(0.06, 0.0, 0.0);
        assert!(!achieved_manipulation(far, goal, 0.05, 0.1));
    }

    #[test]
    fn hamming_cases() {
        let a = IndicatorMatrix::new(1, 4, vec![true, false, true, false]).unwrap();
        assert_eq!(hamming_deviation(&a, &a).unwrap().count, 0);
        let b = IndicatorMatrix::new(1, 4, vec![true, true, true, false]).unwrap();
        let h = hamming_deviation(&a, &b).unwrap();
        assert_eq!(h.count, 1);
        assert!((h.per_step_mean - 0.25).abs() < 1e-15);
        let ones = IndicatorMatrix::new(4, 4, vec![true; 16]).unwrap();
        let zeros = IndicatorMatrix::new(4, 4, vec![false; 16]).unwrap();
        let h = hamming_deviation(&ones, &zeros).unwrap();
        assert_eq!(h.count, 16);
        assert_eq!(h.per_step_mean, 1.0);
        let other = IndicatorMatrix::new(2, 4, vec![false; 8]).unwrap();
        assert!(hamming_deviation(&ones, &other).is_err());
    }

    #[test]
    fn plan_validation() {
        assert!(ContactPlan::new(vec![], vec![]).is_err());
        let uneven = ContactPlan::new(
            vec!["a".to_string(), "b".to_string()],
            vec![
                vec![goal(0.0, 0.0, true, 0.3)],
                vec![goal(0.0, 0.0, true, 0.3), goal(0.0, 0.0, false, 0.3)],
            ],
        );
        assert!(uneven.is_err());
        let mixed_durations = ContactPlan::new(
            vec!["a".to_string(), "b".to_string()],
            vec![
                vec![goal(0.0, 0.0, true, 0.3)],
                vec![goal(0.0, 0.0, true, 0.4)],
            ],
        );
        assert!(mixed_durations.is_err());
    }

    #[test]
    fn goal_validation() {
        assert!(ContactGoal::new(Vec2::new(f64::NAN, 0.0), true, 0.3).is_err());
        assert!(ContactGoal::new(Vec2::ZERO, true, 0.0).is_err());
        assert!(ContactGoal::new(Vec2::ZERO, true, -1.0).is_err());
    }
}
