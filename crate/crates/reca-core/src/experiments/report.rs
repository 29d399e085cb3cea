//! Cross-run summaries: per-function accuracy statistics and median
//! per-epoch curves for plotting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::train::RunReport;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Summary of a finite, nonempty sample. Median of an even count is the
/// mean of the two middle values.
pub fn summarize(values: &[f64]) -> Result<Stats> {
    if values.is_empty() {
        return Err(Error::Domain("summary of an empty sample".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("summary of a non-finite value {bad}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok(Stats {
        mean: sorted.iter().sum::<f64>() / n as f64,
        median,
        min: sorted[0],
        max: sorted[n - 1],
    })
}

/// Final-epoch accuracies of every run of one activation function, plus the
/// full per-epoch test curves behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionRuns {
    pub function: String,
    /// Final test top-1 per run, percent.
    pub top1: Vec<f64>,
    /// Final test top-5 per run, percent.
    pub top5: Vec<f64>,
    /// Per-run test top-1 curve over epochs, percent.
    pub top1_curves: Vec<Vec<f64>>,
    /// Per-run test top-5 curve over epochs, percent.
    pub top5_curves: Vec<Vec<f64>>,
}

/// Collapse a function's run reports into final accuracies and curves.
/// Accuracies are scaled to percent here, once, at the reporting boundary.
pub fn function_runs(function: &str, reports: &[RunReport]) -> Result<FunctionRuns> {
    if reports.is_empty() {
        return Err(Error::Domain(format!("no runs recorded for {function}")));
    }
    let mut out = FunctionRuns {
        function: function.into(),
        top1: Vec::new(),
        top5: Vec::new(),
        top1_curves: Vec::new(),
        top5_curves: Vec::new(),
    };
    for report in reports {
        let last = report
            .epochs
            .last()
            .ok_or_else(|| Error::Domain(format!("a run of {function} has no epochs")))?;
        out.top1.push(last.test.top1 * 100.0);
        out.top5.push(last.test.top5 * 100.0);
        out.top1_curves.push(report.epochs.iter().map(|e| e.test.top1 * 100.0).collect());
        out.top5_curves.push(report.epochs.iter().map(|e| e.test.top5 * 100.0).collect());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub function: String,
    pub metric: String,
    pub stats: Stats,
}

/// Per-function statistics of final accuracies. Every function must carry
/// the same number of runs, otherwise means are not comparable.
pub fn compare_report(entries: &[FunctionRuns]) -> Result<Vec<CompareRow>> {
    let Some(first) = entries.first() else {
        return Err(Error::Domain("comparison of zero functions".into()));
    };
    let runs = first.top1.len();
    let mut rows = Vec::with_capacity(entries.len() * 2);
    for entry in entries {
        if entry.top1.len() != runs || entry.top5.len() != runs {
            return Err(Error::Config(format!(
                "{} has {} runs, {} has {}: comparisons need equal seed counts",
                first.function,
                runs,
                entry.function,
                entry.top1.len()
            )));
        }
        for (metric, values) in [("top1", &entry.top1), ("top5", &entry.top5)] {
            rows.push(CompareRow {
                function: entry.function.clone(),
                metric: metric.into(),
                stats: summarize(values)?,
            });
        }
    }
    Ok(rows)
}

/// Elementwise median across curves of equal length.
pub fn median_curve(curves: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = curves.first() else {
        return Err(Error::Domain("median of zero curves".into()));
    };
    let len = first.len();
    if let Some(bad) = curves.iter().find(|c| c.len() != len) {
        return Err(Error::Config(format!(
            "curve lengths differ: {} vs {}",
            len,
            bad.len()
        )));
    }
    (0..len)
        .map(|i| {
            let column: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            Ok(summarize(&column)?.median)
        })
        .collect()
}
