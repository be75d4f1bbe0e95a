//! Report emission: JSON at full precision, rate tables in the familiar
//! one-decimal-percent style, ROC points as two-column CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::crossval::EvalReport;

/// Rate table with one row per fold plus the relation means, percentages
/// at one decimal.
pub fn human_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "fold");
    for rel in &report.relations {
        let _ = write!(out, "{rel:>8}");
    }
    let _ = writeln!(out, "{:>8}", "mean");
    for fold in &report.per_fold {
        let _ = write!(out, "{:<6}", fold.fold);
        for cell in &fold.rates {
            match cell {
                Some(r) => {
                    let _ = write!(out, "{:>8.1}", 100.0 * r);
                }
                None => {
                    let _ = write!(out, "{:>8}", "-");
                }
            }
        }
        let _ = writeln!(out, "{:>8.1}", 100.0 * fold.mean);
    }
    let _ = write!(out, "{:<6}", "mean");
    for m in &report.relation_means {
        let _ = write!(out, "{:>8.1}", 100.0 * m);
    }
    let _ = writeln!(out, "{:>8.1}", 100.0 * report.overall_mean);
    let _ = writeln!(out, "AUC {:.4}", report.auc);
    out
}

fn rates_csv(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fold,{},mean", report.relations.join(","));
    for fold in &report.per_fold {
        let _ = write!(out, "{}", fold.fold);
        for cell in &fold.rates {
            match cell {
                Some(r) => {
                    let _ = write!(out, ",{:.1}", 100.0 * r);
                }
                None => out.push(','),
            }
        }
        let _ = writeln!(out, ",{:.1}", 100.0 * fold.mean);
    }
    let _ = write!(out, "mean");
    for m in &report.relation_means {
        let _ = write!(out, ",{:.1}", 100.0 * m);
    }
    let _ = writeln!(out, ",{:.1}", 100.0 * report.overall_mean);
    out
}

fn roc_csv(report: &EvalReport) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in &report.roc {
        let _ = writeln!(out, "{fpr},{tpr}");
    }
    out
}

/// Write `report.json`, `rates.csv`, and `roc.csv` into `out_dir`.
pub fn write_files(report: &EvalReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::data(format!("report serialization: {e}")))?;
    fs::write(out_dir.join("report.json"), json)?;
    fs::write(out_dir.join("rates.csv"), rates_csv(report))?;
    fs::write(out_dir.join("roc.csv"), roc_csv(report))?;
    Ok(())
}
