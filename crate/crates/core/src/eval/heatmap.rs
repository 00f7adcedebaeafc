use super::{DistanceReport, EvalError};
use crate::model::{Point, PointCloud};

/// Linear-interpolated percentile of `values` (`q` in [0, 100]).
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q.clamp(0.0, 100.0) / 100.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64))
}

/// Blue at zero, green halfway, red at `saturation` and beyond.
pub fn ramp_color(distance: f64, saturation: f64) -> [u8; 3] {
    let s = if saturation > 0.0 {
        (distance / saturation).clamp(0.0, 1.0)
    } else if distance > 0.0 {
        1.0
    } else {
        0.0
    };
    let to_byte = |v: f64| (v * 255.0).round() as u8;
    if s <= 0.5 {
        let f = s * 2.0;
        [0, to_byte(f), to_byte(1.0 - f)]
    } else {
        let f = (s - 0.5) * 2.0;
        [to_byte(f), to_byte(1.0 - f), 0]
    }
}

/// Recolors `cloud` by distance. The ramp saturates at `saturation`, or at
/// the 99th percentile of the distances when `None`.
pub fn colorize_heatmap(
    cloud: &PointCloud,
    report: &DistanceReport,
    saturation: Option<f64>,
) -> Result<PointCloud, EvalError> {
    if cloud.len() != report.ids.len()
        || cloud.iter().zip(&report.ids).any(|(p, id)| p.id != *id)
    {
        return Err(EvalError::MismatchedReport);
    }
    let sat = match saturation {
        Some(s) if s.is_finite() && s > 0.0 => s,
        Some(s) => return Err(EvalError::InvalidConfig(format!("saturation must be positive, got {s}"))),
        None => percentile(&report.distances, 99.0).unwrap_or(0.0),
    };
    let points = cloud
        .iter()
        .zip(&report.distances)
        .map(|(p, &d)| Point::new(p.id, p.position, ramp_color(d, sat)))
        .collect();
    Ok(PointCloud::from_points_unchecked(points))
}
