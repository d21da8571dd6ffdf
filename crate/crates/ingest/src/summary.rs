use std::collections::BTreeMap;
use std::io::Write;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::FeatureRow;

pub const MONTHLY_HEADER: [&str; 8] = ["month", "rows", "cr_mean", "cr_std", "rh_mean", "rh_std", "temp_mean", "temp_std"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySummary {
    /// `YYYY-MM`
    pub month: String,
    pub rows: usize,
    pub cr_mean: f64,
    pub cr_std: f64,
    pub rh_mean: f64,
    pub rh_std: f64,
    pub temp_mean: f64,
    pub temp_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Population statistics per calendar month, all stations pooled.
pub fn monthly_summary(rows: &[FeatureRow]) -> Vec<MonthlySummary> {
    let mut groups: BTreeMap<(i32, u32), [Vec<f64>; 3]> = BTreeMap::new();
    for r in rows {
        let g = groups.entry((r.timestamp.year(), r.timestamp.month())).or_default();
        g[0].push(r.target_cr);
        g[1].push(r.rh_pct);
        g[2].push(r.temp_c);
    }
    groups
        .into_iter()
        .map(|((y, m), [cr, rh, t])| {
            let (cr_mean, cr_std) = mean_std(&cr);
            let (rh_mean, rh_std) = mean_std(&rh);
            let (temp_mean, temp_std) = mean_std(&t);
            MonthlySummary {
                month: format!("{y:04}-{m:02}"),
                rows: cr.len(),
                cr_mean,
                cr_std,
                rh_mean,
                rh_std,
                temp_mean,
                temp_std,
            }
        })
        .collect()
}

pub fn write_monthly_summary<W: Write>(writer: W, summary: &[MonthlySummary]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(MONTHLY_HEADER)?;
    for s in summary {
        wtr.write_record([
            s.month.clone(),
            s.rows.to_string(),
            s.cr_mean.to_string(),
            s.cr_std.to_string(),
            s.rh_mean.to_string(),
            s.rh_std.to_string(),
            s.temp_mean.to_string(),
            s.temp_std.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
