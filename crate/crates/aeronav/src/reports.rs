//! CSV and JSON outputs for `eval`, `analyze` and `stats`.

use std::path::Path;

use aeronav_core::episode::EpisodeLog;
use aeronav_core::metrics::{detect_cdb, progress_curve, DatasetStats, GroupMetrics, MetricError, MetricReport};

use crate::store::{write_atomic, StoreError};

/// Distance changes smaller than this are treated as no change by the CDB
/// detector.
pub const CDB_TOLERANCE: f64 = 1e-6;

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Rows short, middle, long, average with SR, SPL and DTG in that order.
/// Empty groups leave their metric cells blank.
pub fn metrics_csv(report: &MetricReport) -> String {
    let mut rows = vec![vec!["group", "episodes", "sr", "spl", "dtg"]
        .into_iter()
        .map(String::from)
        .collect()];
    for (name, m) in report.rows() {
        let GroupMetrics { episodes, sr, spl, dtg } = m;
        rows.push(vec![name.to_string(), episodes.to_string(), cell(*sr), cell(*spl), cell(*dtg)]);
    }
    csv_string(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdbRow {
    pub scenario_id: String,
    pub outcome: String,
    pub steps: usize,
    pub final_distance: f64,
    pub found: bool,
    pub t_star: Option<usize>,
    pub pre_slope: f64,
    pub post_slope: f64,
}

pub fn cdb_rows(logs: &[EpisodeLog], tol: f64) -> Vec<CdbRow> {
    logs.iter()
        .filter_map(|log| {
            let d = log.distances();
            let r = detect_cdb(&d, !log.is_success(), tol).ok()?;
            Some(CdbRow {
                scenario_id: log.scenario_id.clone(),
                outcome: log.outcome.map_or("unfinished", |o| o.name()).to_string(),
                steps: log.steps.len(),
                final_distance: log.final_distance,
                found: r.found,
                t_star: r.t_star,
                pre_slope: r.pre_slope,
                post_slope: r.post_slope,
            })
        })
        .collect()
}

pub fn cdb_csv(rows: &[CdbRow]) -> String {
    let mut out = vec![[
        "scenario_id",
        "outcome",
        "steps",
        "final_distance",
        "cdb_found",
        "t_star",
        "pre_slope",
        "post_slope",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        out.push(vec![
            r.scenario_id.clone(),
            r.outcome.clone(),
            r.steps.to_string(),
            format!("{:.4}", r.final_distance),
            r.found.to_string(),
            r.t_star.map(|t| t.to_string()).unwrap_or_default(),
            format!("{:.6}", r.pre_slope),
            format!("{:.6}", r.post_slope),
        ]);
    }
    csv_string(out)
}

/// Per-step progress: the ratio `r_t = d_t / d_0` and the completion
/// percentage `100 (1 - r_t)`.
pub fn progress_csv(log: &EpisodeLog) -> Result<String, MetricError> {
    let ratios = progress_curve(log)?;
    let mut rows = vec![["step", "r_t", "completion_pct"].map(String::from).to_vec()];
    for (t, r) in ratios.iter().enumerate() {
        rows.push(vec![t.to_string(), format!("{r:.6}"), format!("{:.4}", 100.0 * (1.0 - r))]);
    }
    Ok(csv_string(rows))
}

/// Writes `cdb.csv` and `progress/<scenario_id>.csv` under `out`. Returns
/// the ids whose progress curve is undefined because they started inside
/// the success radius.
pub fn write_analysis(out: &Path, logs: &[EpisodeLog]) -> Result<Vec<String>, StoreError> {
    write_atomic(&out.join("cdb.csv"), cdb_csv(&cdb_rows(logs, CDB_TOLERANCE)).as_bytes())?;
    let mut skipped = Vec::new();
    for log in logs {
        match progress_csv(log) {
            Ok(text) => write_atomic(&out.join("progress").join(format!("{}.csv", log.scenario_id)), text.as_bytes())?,
            Err(_) => skipped.push(log.scenario_id.clone()),
        }
    }
    Ok(skipped)
}

pub fn histogram_csv(stats: &DatasetStats) -> String {
    let mut rows = vec![["lo_m", "hi_m", "count"].map(String::from).to_vec()];
    for b in &stats.length_histogram {
        rows.push(vec![format!("{}", b.lo), format!("{}", b.hi), b.count.to_string()]);
    }
    csv_string(rows)
}

pub fn displacements_csv(stats: &DatasetStats) -> String {
    let mut rows = vec![["dx", "dy", "dz"].map(String::from).to_vec()];
    for d in &stats.displacements {
        rows.push(vec![format!("{:.3}", d.x), format!("{:.3}", d.y), format!("{:.3}", d.z)]);
    }
    csv_string(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use aeronav_core::metrics::GroupMode;

    #[test]
    fn metrics_csv_has_table_shape() {
        let report = MetricReport::compute(&[], GroupMode::Trisect);
        let text = metrics_csv(&report);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "group,episodes,sr,spl,dtg");
        assert_eq!(lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect::<Vec<_>>(), ["short", "middle", "long", "average"]);
        assert_eq!(lines[4], "average,0,,,");
    }
}
