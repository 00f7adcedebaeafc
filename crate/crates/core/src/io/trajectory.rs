//! Device trajectories: one `t tx ty tz qw qx qy qz` record per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::FormatError;
use crate::model::Pose;
use crate::Vec3;

/// Quaternions whose norm is off by more than this are rejected rather than
/// renormalized.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub timestamp: f64,
    pub pose: Pose,
}

/// Parses trajectory text. Blank lines and `#` comments are skipped;
/// timestamps must be strictly increasing.
pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectorySample>, FormatError> {
    let mut out: Vec<TrajectorySample> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v: Vec<f64> = content
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| FormatError::parse(line, "expected decimal numbers"))?;
        let [t, tx, ty, tz, qw, qx, qy, qz] = v[..] else {
            return Err(FormatError::parse(
                line,
                format!("expected 8 fields (t tx ty tz qw qx qy qz), found {}", v.len()),
            ));
        };
        if !t.is_finite() {
            return Err(FormatError::parse(line, "timestamp is not finite"));
        }
        let pose = Pose::from_wxyz(qw, qx, qy, qz, Vec3::new(tx, ty, tz), QUATERNION_NORM_TOLERANCE)
            .map_err(|e| FormatError::InvalidRotation {
                line,
                message: e.to_string(),
            })?;
        if out.last().is_some_and(|prev| t <= prev.timestamp) {
            return Err(FormatError::NonMonotonicTime { line });
        }
        out.push(TrajectorySample { timestamp: t, pose });
    }
    Ok(out)
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Vec<TrajectorySample>, FormatError> {
    parse_trajectory(&fs::read_to_string(path)?)
}

pub fn format_trajectory(samples: &[TrajectorySample]) -> String {
    let mut s = String::new();
    for sample in samples {
        let t = sample.pose.translation;
        let q = sample.pose.rotation.quaternion();
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {}",
            sample.timestamp, t.x, t.y, t.z, q.w, q.i, q.j, q.k
        );
    }
    s
}

pub fn write_trajectory(samples: &[TrajectorySample], path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, format_trajectory(samples))?;
    Ok(())
}
