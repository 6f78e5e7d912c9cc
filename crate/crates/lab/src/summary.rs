//! Console digest of a results directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use d2d_core::simkit::summarize;
use d2d_core::tiebreak::jain_index;

use crate::error::LabError;
use crate::output::{read_table, ReadTable};

/// Numeric columns that identify a row rather than measure something.
const ID_COLUMNS: [&str; 9] = ["replication", "instance", "seed", "frame", "user", "cluster", "coalition", "served_connection", "size"];
/// Text columns that describe a row without naming a group.
const NOTE_COLUMNS: [&str; 3] = ["modes", "exact", "lp_feasible"];
/// Numeric columns that still split rows into groups.
const KEY_COLUMNS: [&str; 1] = ["axis_value"];

/// One summarized metric of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub table: String,
    pub group: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub half_width: Option<f64>,
}

/// Means and 95% intervals per group, plus Jain indexes of per-user means.
pub fn summarize_dir(dir: &Path) -> Result<Vec<SummaryRow>, LabError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| LabError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in &files {
        // distributions and traces are inputs for plots, not metrics
        let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if stem.ends_with("_cdf") || stem.ends_with("_trace") {
            continue;
        }
        out.extend(summarize_table(&read_table(f)?));
    }
    if out.is_empty() {
        return Err(LabError::NoData(dir.display().to_string()));
    }
    Ok(out)
}

fn summarize_table(t: &ReadTable) -> Vec<SummaryRow> {
    if t.rows.is_empty() {
        return Vec::new();
    }
    let numeric: Vec<bool> =
        (0..t.header.len()).map(|c| t.rows.iter().all(|r| r[c].is_empty() || r[c].parse::<f64>().is_ok())).collect();
    let name = |c: usize| t.header[c].as_str();
    let is_key = |c: usize| (!numeric[c] && !NOTE_COLUMNS.contains(&name(c))) || KEY_COLUMNS.contains(&name(c));
    let keys: Vec<usize> = (0..t.header.len()).filter(|&c| is_key(c)).collect();
    let metrics: Vec<usize> =
        (0..t.header.len()).filter(|&c| numeric[c] && !is_key(c) && !ID_COLUMNS.contains(&name(c))).collect();
    let mut groups: BTreeMap<String, Vec<&Vec<String>>> = BTreeMap::new();
    for r in &t.rows {
        let g = keys.iter().map(|&c| format!("{}={}", t.header[c], r[c])).collect::<Vec<_>>().join(",");
        groups.entry(g).or_default().push(r);
    }
    let user_col = t.header.iter().position(|h| h == "user");
    let thr_col = t.header.iter().position(|h| h == "throughput_mbps");
    let mut out = Vec::new();
    for (g, rows) in &groups {
        for &c in &metrics {
            let xs: Vec<f64> = rows.iter().filter_map(|r| r[c].parse::<f64>().ok()).collect();
            if let Ok(s) = summarize(&xs) {
                out.push(SummaryRow {
                    table: t.name.clone(),
                    group: g.clone(),
                    metric: t.header[c].clone(),
                    n: s.n,
                    mean: s.mean,
                    half_width: s.ci.map(|i| i.half_width),
                });
            }
        }
        if let (Some(u), Some(th)) = (user_col, thr_col) {
            let mut per: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for r in rows {
                if let (Ok(id), Ok(x)) = (r[u].parse::<usize>(), r[th].parse::<f64>()) {
                    let e = per.entry(id).or_default();
                    e.0 += x;
                    e.1 += 1;
                }
            }
            let means: Vec<f64> = per.values().map(|(s, k)| s / *k as f64).collect();
            if let Ok(j) = jain_index(&means) {
                out.push(SummaryRow {
                    table: t.name.clone(),
                    group: g.clone(),
                    metric: "jain(throughput_mbps by user)".into(),
                    n: means.len(),
                    mean: j,
                    half_width: None,
                });
            }
        }
    }
    out
}

/// Fixed-width console table.
pub fn render(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:<36} {:<32} {:>6} {:>14} {:>12}", "table", "group", "metric", "n", "mean", "ci95");
    for r in rows {
        let ci = r.half_width.map(|h| format!("±{h:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:<22} {:<36} {:<32} {:>6} {:>14.6} {:>12}", r.table, r.group, r.metric, r.n, r.mean, ci);
    }
    s
}
