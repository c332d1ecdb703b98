//! Trajectory log: one space-separated record per line,
//! `index scale rotation tx ty confidence accepted`, `#` starts a comment.
//!
//! Rotation, scale and confidence are written with 6 decimals, pixel
//! translations with 3, `accepted` as `1`/`0`. Parsing a written log yields
//! the records rounded to that precision.

use std::fmt::Write as _;

use thiserror::Error;

use crate::photomap::{MapPose, TrajectoryRecord};

pub const HEADER: &str = "# index scale rotation tx ty confidence accepted";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("trajectory line {line}: {message}")]
pub struct LogError {
    pub line: usize,
    pub message: String,
}

/// Fixed-precision decimal without a negative zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let p = 10f64.powi(decimals as i32);
    let mut r = (v * p).round() / p;
    if r == 0.0 {
        r = 0.0;
    }
    format!("{r:.decimals$}")
}

pub fn format_record(r: &TrajectoryRecord) -> String {
    format!(
        "{} {} {} {} {} {} {}",
        r.frame_index,
        fixed(r.pose.scale, 6),
        fixed(r.pose.rotation, 6),
        fixed(r.pose.tx, 3),
        fixed(r.pose.ty, 3),
        fixed(r.confidence, 6),
        u8::from(r.accepted)
    )
}

pub fn write_log(records: &[TrajectoryRecord]) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    for r in records {
        writeln!(s, "{}", format_record(r)).unwrap();
    }
    s
}

/// The record as it reads back after a write.
pub fn quantized(r: &TrajectoryRecord) -> TrajectoryRecord {
    parse_log(&format_record(r)).expect("formatted record parses")[0]
}

pub fn parse_log(text: &str) -> Result<Vec<TrajectoryRecord>, LogError> {
    let mut out: Vec<TrajectoryRecord> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| LogError { line, message };
        let f: Vec<&str> = content.split_whitespace().collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let frame_index: usize = f[0]
            .parse()
            .map_err(|_| err(format!("invalid index '{}'", f[0])))?;
        let mut nums = [0.0f64; 5];
        for (n, s) in nums.iter_mut().zip(&f[1..6]) {
            *n = s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("invalid number '{s}'")))?;
        }
        let accepted = match f[6] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(err(format!("invalid accepted flag '{other}'"))),
        };
        if let Some(prev) = out.last() {
            if frame_index <= prev.frame_index {
                return Err(err(format!("index {frame_index} is not increasing")));
            }
        }
        if !(nums[0] > 0.0) {
            return Err(err(format!("scale {} must be positive", nums[0])));
        }
        out.push(TrajectoryRecord {
            frame_index,
            pose: MapPose {
                scale: nums[0],
                rotation: nums[1],
                tx: nums[2],
                ty: nums[3],
            },
            confidence: nums[4],
            accepted,
        });
    }
    Ok(out)
}
