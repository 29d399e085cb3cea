//! `reca sweep`: activation curve tables over preset parameter grids.

use std::path::Path;

use reca_core::experiments::sweep::{
    figure1_params, figure2_params, sweep_curves, DEFAULT_X,
};
use reca_core::{Error, Result};

use crate::outdir::{cell, write_manifest, Csv, OutDir};

pub fn run(preset: &str, alpha: f64, out_path: &Path) -> Result<()> {
    let params = match preset {
        "figure-1" => figure1_params(),
        "figure-2" => figure2_params(),
        other => {
            return Err(Error::Config(format!(
                "unknown sweep preset {other:?}; known: figure-1, figure-2"
            )))
        }
    };

    let out = OutDir::create(out_path)?;
    write_manifest(
        &out,
        "sweep",
        serde_json::json!({
            "preset": preset,
            "alpha": alpha,
            "x": { "lo": DEFAULT_X.0, "hi": DEFAULT_X.1, "step": DEFAULT_X.2 },
            "parameter_rows": params.len(),
        }),
    )?;

    let rows = sweep_curves(&params, alpha, DEFAULT_X)?;
    let mut csv = Csv::new("x,beta,delta,f,f1,f2");
    for r in &rows {
        csv.row(&[
            cell(Some(r.x)),
            cell(Some(r.beta)),
            cell(Some(r.delta)),
            cell(Some(r.f)),
            cell(Some(r.f1)),
            cell(Some(r.f2)),
        ]);
    }
    let path = out.write_text("sweep.csv", &csv.into_text())?;
    println!(
        "{} rows ({} parameter settings x {} grid points) written to {}",
        rows.len(),
        params.len(),
        rows.len() / params.len(),
        path.display()
    );
    Ok(())
}
