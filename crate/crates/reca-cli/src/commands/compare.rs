//! `reca compare`: the train command repeated over a list of activations
//! with shared seeds, summarized per function.

use std::path::Path;

use reca_core::experiments::report::{compare_report, function_runs, median_curve};
use reca_core::experiments::train::train_experiment;
use reca_core::{Error, Result};

use crate::commands::train::{epoch_csv, final_top1, train_config_from};
use crate::config::Config;
use crate::outdir::{cell, write_manifest, Csv, OutDir};

pub fn run(config_path: &Path, overrides: &[String], out_path: &Path) -> Result<()> {
    let mut cfg = Config::load(config_path, overrides)?;
    // Semicolon-separated because function specs carry their own commas,
    // e.g. `activations = relu; reca:0.5,1,1`.
    let specs: Vec<String> = cfg
        .take("activations")
        .unwrap_or_default()
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if specs.len() < 2 {
        return Err(Error::Config(
            "compare needs a config key \"activations\" listing at least two functions \
             separated by semicolons"
                .into(),
        ));
    }
    let labels: Vec<String> = specs.iter().map(|s| label(s)).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Config(format!("duplicate activation {l:?} in comparison")));
        }
    }
    let train_cfg = train_config_from(&mut cfg, Some(&specs[0]))?;
    let echo = cfg.echo();
    cfg.finish()?;

    let out = OutDir::create(out_path)?;
    write_manifest(
        &out,
        "compare",
        serde_json::json!({
            "config_file": config_path.display().to_string(),
            "config": echo,
            "activations": &specs,
            "seeds": &train_cfg.seeds,
            "precision": &train_cfg.precision,
        }),
    )?;

    let mut functions = Vec::with_capacity(specs.len());
    for (spec, label) in specs.iter().zip(&labels) {
        let mut one = train_cfg.clone();
        one.activation = reca_core::activations::parse_kind(spec)?;
        let reports = train_experiment(&one)?;
        for report in &reports {
            out.write_text(
                &format!("run-{label}-{}.csv", report.seed),
                &epoch_csv(&report.epochs),
            )?;
            println!(
                "{label} seed {}: final test top1 {:.4} ({:.1}s)",
                report.seed,
                final_top1(report),
                report.wall_seconds
            );
        }
        functions.push(function_runs(label, &reports)?);
    }

    let rows = compare_report(&functions)?;
    let mut csv = Csv::new("function,metric,mean,median,min,max");
    for r in &rows {
        csv.row(&[
            r.function.clone(),
            r.metric.clone(),
            cell(Some(r.stats.mean)),
            cell(Some(r.stats.median)),
            cell(Some(r.stats.min)),
            cell(Some(r.stats.max)),
        ]);
    }
    out.write_text("compare.csv", &csv.into_text())?;

    let mut curves = Csv::new("function,epoch,top1_median,top5_median");
    for f in &functions {
        let top1 = median_curve(&f.top1_curves)?;
        let top5 = median_curve(&f.top5_curves)?;
        for (i, (t1, t5)) in top1.iter().zip(&top5).enumerate() {
            curves.row(&[
                f.function.clone(),
                (i + 1).to_string(),
                cell(Some(*t1)),
                cell(Some(*t5)),
            ]);
        }
    }
    out.write_text("median_curves.csv", &curves.into_text())?;

    println!("{:<16} {:>8} {:>8} {:>8} {:>8}  metric", "function", "mean", "median", "min", "max");
    for r in &rows {
        println!(
            "{:<16} {:>8.2} {:>8.2} {:>8.2} {:>8.2}  {}",
            r.function, r.stats.mean, r.stats.median, r.stats.min, r.stats.max, r.metric
        );
    }
    println!("results written to {}", out.path().display());
    Ok(())
}

/// CSV- and filename-safe function label: the spec with separators dashed.
fn label(spec: &str) -> String {
    spec.chars()
        .map(|c| if c == ':' || c == ',' || c.is_whitespace() { '-' } else { c })
        .collect()
}
