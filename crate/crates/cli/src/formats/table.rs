//! Metric-table emission: one CSV row per cell (axes, mean, stderr, n,
//! flags) plus a JSON summary carrying the table metadata.

use anyhow::Result;
use contactrl_core::metrics::MetricTable;
use serde_json::json;
use std::fmt::Write as _;

/// Render the table as CSV. Absent cells leave the mean empty and carry an
/// `absent` flag.
pub fn to_csv(table: &MetricTable) -> String {
    let mut out = String::new();
    for axis in &table.axes {
        let _ = write!(out, "{axis},");
    }
    out.push_str("mean,stderr,n,flags\n");
    for cell in &table.cells {
        for axis in &table.axes {
            let v = cell
                .keys
                .iter()
                .find(|(k, _)| k == axis)
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            let _ = write!(out, "{v},");
        }
        match cell.mean {
            Some(m) => {
                let _ = write!(out, "{m},{},{},", cell.stderr, cell.n);
            }
            None => {
                let _ = write!(out, ",,0,");
            }
        }
        out.push_str(&cell.flags.join(";"));
        out.push('\n');
    }
    out
}

/// JSON summary: metadata plus every cell.
pub fn to_json_summary(table: &MetricTable) -> Result<String> {
    let cells: Vec<serde_json::Value> = table
        .cells
        .iter()
        .map(|c| {
            json!({
                "keys": c.keys.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
                "mean": c.mean,
                "stderr": c.stderr,
                "n": c.n,
                "flags": c.flags,
            })
        })
        .collect();
    let doc = json!({
        "axes": table.axes,
        "metadata": table.metadata.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
        "cells": cells,
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Training-log CSV header.
pub const TRAIN_LOG_HEADER: &str =
    "step,mean_reward,reach,hold,detach,pose,bonus,penalty,entropy_coef,clip_fraction,approx_kl";

/// One training-log row.
pub fn train_log_row(s: &contactrl_core::trainer::IterationStats) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        s.global_step,
        s.mean_step_reward,
        s.breakdown.reach,
        s.breakdown.hold,
        s.breakdown.detach,
        s.breakdown.pose,
        s.breakdown.bonus,
        s.breakdown.penalty,
        s.entropy_coef,
        s.ppo.clip_fraction,
        s.ppo.approx_kl
    )
}
