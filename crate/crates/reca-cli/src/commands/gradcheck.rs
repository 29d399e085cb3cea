//! `reca gradcheck`: analytic gradients against finite differences.

use std::path::Path;

use reca_core::experiments::gradcheck::run_gradcheck;
use reca_core::Result;

use crate::outdir::{cell, write_manifest, Csv, OutDir};

pub fn run(trials: usize, seed: u64, erratum: bool, out: Option<&Path>) -> Result<()> {
    let report = run_gradcheck(seed, trials, erratum)?;

    println!("gradient check: {} trials, seed {}", report.trials, report.seed);
    println!("  {:<24} {:>12} {:>10}  status", "component", "max rel err", "tolerance");
    for c in &report.components {
        let status = if c.passed() { "ok" } else { "FAIL" };
        println!(
            "  {:<24} {:>12.3e} {:>10.0e}  {status}",
            c.component, c.max_rel_err, c.tolerance
        );
        if !c.passed() {
            println!("    worst: {}", c.worst);
        }
    }
    if let Some(e) = &report.erratum {
        let (a, b, d) = e.params;
        println!("derivative forms at x = {} with (alpha, beta, delta) = ({a}, {b}, {d}):", e.x);
        println!("  finite difference  {}", e.fd);
        println!("  corrected form     {}  rel err {:.3e}", e.corrected, e.corrected_rel_err);
        println!("  printed form       {}  rel err {:.3e}", e.literal, e.literal_rel_err);
    }

    if let Some(dir) = out {
        let out = OutDir::create(dir)?;
        write_manifest(
            &out,
            "gradcheck",
            serde_json::json!({ "trials": trials, "seed": seed, "erratum": erratum }),
        )?;
        let mut csv = Csv::new("component,max_rel_err,tolerance,status");
        for c in &report.components {
            let status = if c.passed() { "ok" } else { "fail" };
            csv.row(&[
                c.component.clone(),
                cell(Some(c.max_rel_err)),
                cell(Some(c.tolerance)),
                status.to_string(),
            ]);
        }
        out.write_text("gradcheck.csv", &csv.into_text())?;
        out.write_json("gradcheck.json", &report)?;
        println!("report written to {}", out.path().display());
    }

    report.verify()
}
