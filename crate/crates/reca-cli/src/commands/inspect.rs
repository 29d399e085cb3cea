//! `reca inspect-data`: sanity-check an image dataset directory without
//! training anything.

use std::path::PathBuf;

use reca_core::data::cifar::{load_cifar10, load_cifar100};
use reca_core::data::{channel_stats, Dataset};
use reca_core::{Error, Result};

use crate::commands::train::DATA_DIR_ENV;

pub fn run(dataset: &str, data_dir: Option<PathBuf>) -> Result<()> {
    let dir = match data_dir.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)) {
        Some(d) => d,
        None => {
            return Err(Error::Config(format!(
                "pass --data-dir or set {DATA_DIR_ENV}"
            )))
        }
    };
    let ds: Dataset = match dataset {
        "cifar10" => load_cifar10(&dir)?,
        "cifar100" => load_cifar100(&dir)?,
        other => {
            return Err(Error::Config(format!(
                "unknown dataset {other:?}; known: cifar10, cifar100"
            )))
        }
    };

    let [c, h, w] = ds.image_shape();
    println!("{}: {} records of {c}x{h}x{w}, {} classes", ds.name(), ds.len(), ds.class_count());

    let mut counts = vec![0usize; ds.class_count()];
    for &l in ds.labels() {
        counts[l as usize] += 1;
    }
    let lo = counts.iter().min().expect("nonempty");
    let hi = counts.iter().max().expect("nonempty");
    println!("  records per class: min {lo}, max {hi}");

    let stats = channel_stats(&ds)?;
    for (ch, (mean, std)) in stats.mean.iter().zip(&stats.std).enumerate() {
        println!("  channel {ch}: mean {mean:.4}, std {std:.4} (of intensity / 255)");
    }
    Ok(())
}
