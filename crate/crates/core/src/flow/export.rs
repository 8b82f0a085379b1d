//! Trajectory export as JSONL or CSV.

use std::io::Write;

use serde_json::json;

use super::GeodesicSolution;
use crate::error::Result;

/// One `{t, x, v}` record per sample and a trailing `{summary}` record.
pub fn write_jsonl(sol: &GeodesicSolution, out: &mut dyn Write) -> Result<()> {
    for s in &sol.samples {
        serde_json::to_writer(&mut *out, &json!({"t": s.t, "x": s.x, "v": s.v}))?;
        out.write_all(b"\n")?;
    }
    let summary = json!({
        "summary": {
            "termination": sol.termination,
            "boundary_hit": sol.boundary_hit,
            "lagrangian_drift": sol.lagrangian_drift,
            "direction": sol.direction,
            "inextendible": sol.inextendible,
            "samples": sol.samples.len(),
            "level_crossings": sol.level_crossings,
        }
    });
    serde_json::to_writer(&mut *out, &summary)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Columns `t, x0..x{n-1}, v0..v{n-1}`.
pub fn write_csv(sol: &GeodesicSolution, out: &mut dyn Write) -> Result<()> {
    let n = sol.samples.first().map_or(0, |s| s.x.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("v{i}")));
    writeln!(out, "{}", header.join(","))?;
    for s in &sol.samples {
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.x.iter().copied())
            .chain(s.v.iter().copied())
            .map(|c| format!("{c:.17e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate_geodesic, IntegrateOptions};
    use crate::models::minkowski;

    #[test]
    fn jsonl_has_summary_and_csv_has_header() {
        let m = minkowski::make_minkowski(1, minkowski::Region::Full);
        let sol = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 1.0], &IntegrateOptions::new(1.0)).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), sol.samples.len() + 1);
        assert!(lines.last().unwrap().contains("parameter_end"));
        let mut buf = Vec::new();
        write_csv(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x0,x1,v0,v1\n"));
    }
}
