//! `reca landscape`: a fixed random network's output surface over a 2-D
//! input lattice, for comparing smoothness across activations.

use std::path::Path;

use reca_core::experiments::landscape::{
    landscape, max_second_difference, LandscapeActivation,
};
use reca_core::Result;

use crate::outdir::{cell, write_manifest, Csv, OutDir};

pub fn run(activation: &str, seed: u64, out_path: &Path) -> Result<()> {
    let act = LandscapeActivation::parse(activation)?;
    let out = OutDir::create(out_path)?;
    write_manifest(
        &out,
        "landscape",
        serde_json::json!({ "activation": act.name(), "seed": seed }),
    )?;

    let land = landscape(&act, seed)?;
    let mut csv = Csv::new("x1,x2,output,activation,seed");
    for i in 0..land.len() {
        csv.row(&[
            cell(Some(land.x1[i])),
            cell(Some(land.x2[i])),
            cell(Some(land.output[i])),
            land.activation.clone(),
            seed.to_string(),
        ]);
    }
    let path = out.write_text("landscape.csv", &csv.into_text())?;
    println!(
        "{} lattice points written to {}; max |second difference| {}",
        land.len(),
        path.display(),
        max_second_difference(&land)
    );
    Ok(())
}
