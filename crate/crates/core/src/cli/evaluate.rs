use std::fmt::Write as _;

use super::trajectory::fixed;
use crate::photomap::TrajectoryRecord;
use crate::registration::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameError {
    pub frame_index: usize,
    pub position: f64,
    pub rotation: f64,
    /// `|s_est / s_true - 1|`
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub frames: Vec<FrameError>,
    pub mean_position: f64,
    pub max_position: f64,
    pub final_position: f64,
    pub max_rotation: f64,
    /// Summed frame-to-frame displacement of the ground truth, in map pixels.
    pub path_length: f64,
    /// Final position error as a percentage of `path_length`.
    pub final_error_pct: f64,
}

/// Compares two logs record by record. Returns `None` on a count mismatch.
pub fn evaluate(estimated: &[TrajectoryRecord], truth: &[TrajectoryRecord]) -> Option<EvaluationReport> {
    if estimated.len() != truth.len() || truth.is_empty() {
        return None;
    }
    let frames: Vec<FrameError> = estimated
        .iter()
        .zip(truth)
        .map(|(e, t)| FrameError {
            frame_index: t.frame_index,
            position: (e.pose.tx - t.pose.tx).hypot(e.pose.ty - t.pose.ty),
            rotation: wrap_angle(e.pose.rotation - t.pose.rotation).abs(),
            scale: (e.pose.scale / t.pose.scale - 1.0).abs(),
        })
        .collect();
    let path_length: f64 = truth
        .windows(2)
        .map(|w| (w[1].pose.tx - w[0].pose.tx).hypot(w[1].pose.ty - w[0].pose.ty))
        .sum();
    let n = frames.len() as f64;
    let final_position = frames.last().map_or(0.0, |f| f.position);
    let final_error_pct = if path_length > 0.0 {
        100.0 * final_position / path_length
    } else if final_position == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Some(EvaluationReport {
        mean_position: frames.iter().map(|f| f.position).sum::<f64>() / n,
        max_position: frames.iter().map(|f| f.position).fold(0.0, f64::max),
        max_rotation: frames.iter().map(|f| f.rotation).fold(0.0, f64::max),
        final_position,
        path_length,
        final_error_pct,
        frames,
    })
}

impl EvaluationReport {
    pub fn render(&self) -> String {
        let mut s = String::from("# index position_error_px rotation_error_rad scale_ratio_error\n");
        for f in &self.frames {
            writeln!(
                s,
                "{} {} {} {}",
                f.frame_index,
                fixed(f.position, 3),
                fixed(f.rotation, 6),
                fixed(f.scale, 6)
            )
            .unwrap();
        }
        writeln!(s, "mean_position_error={}", fixed(self.mean_position, 3)).unwrap();
        writeln!(s, "max_position_error={}", fixed(self.max_position, 3)).unwrap();
        writeln!(s, "final_position_error={}", fixed(self.final_position, 3)).unwrap();
        writeln!(s, "max_rotation_error={}", fixed(self.max_rotation, 6)).unwrap();
        writeln!(s, "path_length={}", fixed(self.path_length, 3)).unwrap();
        if self.final_error_pct.is_finite() {
            writeln!(s, "final_error_pct={}", fixed(self.final_error_pct, 3)).unwrap();
        } else {
            writeln!(s, "final_error_pct=inf").unwrap();
        }
        s
    }
}
