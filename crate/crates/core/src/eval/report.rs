//! JSON evaluation report with fixed 9-decimal formatting so reports from
//! identical inputs compare byte-for-byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DistanceReport, IcpResult};

fn num(v: f64) -> String {
    format!("{v:.9}")
}

pub fn format_report(report: &DistanceReport, icp: Option<&IcpResult>, per_point: bool) -> String {
    let s = &report.summary;
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"count\": {},", s.count);
    let _ = writeln!(out, "  \"mean\": {},", num(s.mean));
    let _ = writeln!(out, "  \"median\": {},", num(s.median));
    let _ = writeln!(out, "  \"std\": {},", num(s.std));
    let _ = writeln!(out, "  \"min\": {},", num(s.min));
    let _ = write!(out, "  \"max\": {}", num(s.max));
    if let Some(icp) = icp {
        let t = icp.pose.translation;
        let q = icp.pose.rotation.quaternion();
        let _ = write!(
            out,
            ",\n  \"icp\": {{\"rmse\": {}, \"iterations\": {}, \"converged\": {}, \"translation\": [{}, {}, {}], \"rotation\": [{}, {}, {}, {}]}}",
            num(icp.rmse),
            icp.iterations,
            icp.converged,
            num(t.x),
            num(t.y),
            num(t.z),
            num(q.w),
            num(q.i),
            num(q.j),
            num(q.k),
        );
    }
    if per_point {
        out.push_str(",\n  \"distances\": [");
        for (i, (id, d)) in report.ids.iter().zip(&report.distances).enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "\n    {{\"id\": {id}, \"distance\": {}}}", num(*d));
        }
        out.push_str("\n  ]");
    }
    out.push_str("\n}\n");
    out
}

pub fn write_report(
    path: impl AsRef<Path>,
    report: &DistanceReport,
    icp: Option<&IcpResult>,
    per_point: bool,
) -> std::io::Result<()> {
    fs::write(path, format_report(report, icp, per_point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::DistanceSummary;

    #[test]
    fn report_is_valid_json() {
        let r = DistanceReport {
            ids: vec![3, 4],
            distances: vec![0.001, 0.0025],
            summary: DistanceSummary::from_distances(&[0.001, 0.0025]).unwrap(),
        };
        let text = format_report(&r, None, true);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["count"], 2);
        assert_eq!(v["distances"][1]["id"], 4);
        assert!(text.contains("\"mean\": 0.001750000"));
        let short: serde_json::Value = serde_json::from_str(&format_report(&r, None, false)).unwrap();
        assert!(short.get("distances").is_none());
    }
}
