//! `reca resources`: parameter and step-time cost of one activation
//! against another on the same preset.

use std::path::Path;

use reca_core::activations::parse_kind;
use reca_core::experiments::train::resource_report;
use reca_core::{Error, Result};

use crate::outdir::{cell, write_manifest, Csv, OutDir};

#[allow(clippy::too_many_arguments)]
pub fn run(
    preset: &str,
    input: &str,
    classes: usize,
    base: &str,
    variant: &str,
    steps: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let shape = parse_shape(input)?;
    let report = resource_report(
        preset,
        &shape,
        classes,
        &parse_kind(base)?,
        &parse_kind(variant)?,
        steps,
        seed,
    )?;

    println!("preset {preset}, input {input}, {classes} classes, {} activation sites", report.activation_sites);
    println!(
        "  {:<10} {:>10} parameters, {:>8.3}s for {} steps",
        report.base, report.base_params.total, report.base_seconds, report.steps
    );
    println!(
        "  {:<10} {:>10} parameters, {:>8.3}s for {} steps",
        report.variant, report.variant_params.total, report.variant_seconds, report.steps
    );
    println!(
        "  parameter delta {:+}, measured step-time ratio {:.3} (informational, machine-dependent)",
        report.param_delta, report.time_ratio
    );

    if let Some(dir) = out {
        let out = OutDir::create(dir)?;
        write_manifest(
            &out,
            "resources",
            serde_json::json!({
                "preset": preset, "input": input, "classes": classes,
                "base": base, "variant": variant, "steps": steps, "seed": seed,
            }),
        )?;
        let mut csv = Csv::new("activation,total_params,activation_params,seconds,steps");
        for (name, params, seconds) in [
            (&report.base, &report.base_params, report.base_seconds),
            (&report.variant, &report.variant_params, report.variant_seconds),
        ] {
            csv.row(&[
                name.clone(),
                params.total.to_string(),
                params.activation.to_string(),
                cell(Some(seconds)),
                report.steps.to_string(),
            ]);
        }
        out.write_text("resources.csv", &csv.into_text())?;
        out.write_json("resources.json", &report)?;
        println!("report written to {}", out.path().display());
    }
    Ok(())
}

/// `CxHxW` or a single flat extent, e.g. `3x32x32` or `2`.
fn parse_shape(input: &str) -> Result<Vec<usize>> {
    let dims: Result<Vec<usize>> = input
        .split('x')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::Config(format!("bad input shape {input:?}")))
        })
        .collect();
    dims
}
