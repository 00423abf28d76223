use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use super::memory::MemoryPoint;
use super::scaling::ScalingStudy;
use crate::error::Result;

/// Serializes `value` as a JSON object tagged with `paper_metric`.
pub fn tagged_json<T: Serialize>(metric: &str, value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    match &mut v {
        Value::Object(map) => {
            map.insert("paper_metric".into(), Value::String(metric.into()));
        }
        other => {
            let inner = std::mem::take(other);
            *other = serde_json::json!({ "paper_metric": metric, "value": inner });
        }
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

/// One row per state and cycle count.
pub fn write_memory_csv<W: Write>(mut out: W, points: &[MemoryPoint]) -> Result<()> {
    writeln!(out, "state,n,expectation,expectation_se,raw_expectation,logical_error,retained_fraction,mean_syndrome,retained")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.state,
            p.n,
            p.expectation,
            p.expectation_se,
            p.raw_expectation,
            p.logical_error,
            p.retained_fraction,
            p.mean_syndrome,
            p.retained
        )?;
    }
    Ok(())
}

/// One row per improvement factor.
pub fn write_scaling_csv<W: Write>(mut out: W, study: &ScalingStudy) -> Result<()> {
    writeln!(out, "x,epsilon_l,epsilon_l_se")?;
    for p in &study.points {
        writeln!(out, "{},{},{}", p.x, p.epsilon_l, p.epsilon_l_se)?;
    }
    Ok(())
}
