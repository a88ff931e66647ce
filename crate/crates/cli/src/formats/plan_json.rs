//! Contact-plan JSON: `{"end_effectors": [...], "goals": [[{"p": [x, y],
//! "i": 0|1, "S": seconds}, ...] per effector]}` plus an optional
//! `pose_goals` array for manipulation plans.
//!
//! Indicators round-trip bit-exactly; floats round-trip exactly through the
//! shortest-representation encoder.

use anyhow::{bail, Context, Result};
use contactrl_core::contact::{ContactGoal, ContactPlan};
use contactrl_core::manip::PoseGoal;
use contactrl_core::math::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct GoalDoc {
    p: [f64; 2],
    i: u8,
    #[serde(rename = "S")]
    duration: f64,
}

#[derive(Serialize, Deserialize)]
struct PoseGoalDoc {
    p: [f64; 2],
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    end_effectors: Vec<String>,
    goals: Vec<Vec<GoalDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pose_goals: Option<Vec<PoseGoalDoc>>,
}

/// Serialize a plan (and optional pose goals) to pretty JSON.
pub fn to_json(plan: &ContactPlan, pose_goals: Option<&[PoseGoal]>) -> Result<String> {
    let doc = PlanDoc {
        end_effectors: plan.effector_names().to_vec(),
        goals: (0..plan.num_effectors())
            .map(|e| {
                plan.goals_of(e)
                    .iter()
                    .map(|g| GoalDoc {
                        p: [g.point.x, g.point.y],
                        i: u8::from(g.in_contact),
                        duration: g.duration,
                    })
                    .collect()
            })
            .collect(),
        pose_goals: pose_goals.map(|goals| {
            goals
                .iter()
                .map(|g| PoseGoalDoc {
                    p: [g.position.x, g.position.y],
                    theta: g.angle,
                })
                .collect()
        }),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse a plan document; indicators outside {0, 1} are rejected.
pub fn from_json(text: &str) -> Result<(ContactPlan, Option<Vec<PoseGoal>>)> {
    let doc: PlanDoc = serde_json::from_str(text).context("malformed plan JSON")?;
    let mut goals = Vec::with_capacity(doc.goals.len());
    for row in &doc.goals {
        let mut seq = Vec::with_capacity(row.len());
        for g in row {
            if g.i > 1 {
                bail!("contact indicator must be 0 or 1, got {}", g.i);
            }
            seq.push(
                ContactGoal::new(Vec2::new(g.p[0], g.p[1]), g.i == 1, g.duration)
                    .map_err(|e| anyhow::anyhow!("{e}"))?,
            );
        }
        goals.push(seq);
    }
    let plan = ContactPlan::new(doc.end_effectors, goals).map_err(|e| anyhow::anyhow!("{e}"))?;
    let pose_goals = doc.pose_goals.map(|pg| {
        pg.into_iter()
            .map(|g| PoseGoal::new(Vec2::new(g.p[0], g.p[1]), g.theta))
            .collect()
    });
    Ok((plan, pose_goals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use contactrl_core::gait::{build_plan, FootLayout, GaitParams, GaitType, Steering};
    use contactrl_core::math::Pose2;

    #[test]
    fn round_trip_is_exact() {
        let params = GaitParams {
            stride: [0.2173000000001, 0.11234999999999],
            stance_width: [0.2, 0.25],
            steering: Steering::YawRate(1.7),
            foot_offsets: [Vec2::new(0.01, -0.02); 4],
            duration: 0.347,
        };
        let plan = build_plan(
            GaitType::Crawl,
            &params,
            &FootLayout::default(),
            8,
            Pose2::new(0.1, -0.2, 0.3),
        )
        .unwrap();
        let json = to_json(&plan, None).unwrap();
        let (back, _) = from_json(&json).unwrap();
        assert_eq!(plan, back);
        // and a second encode is byte-stable
        assert_eq!(json, to_json(&back, None).unwrap());
    }

    #[test]
    fn rejects_non_binary_indicator() {
        let text = r#"{"end_effectors": ["a"], "goals": [[{"p": [0.0, 0.0], "i": 2, "S": 0.3}]]}"#;
        assert!(from_json(text).is_err());
    }

    #[test]
    fn rejects_bad_duration() {
        let text = r#"{"end_effectors": ["a"], "goals": [[{"p": [0.0, 0.0], "i": 1, "S": 0.0}]]}"#;
        assert!(from_json(text).is_err());
    }
}
