//! `reca train`: seeded training runs from a flat config file, one
//! per-epoch CSV per seed plus a JSON summary.

use std::path::{Path, PathBuf};

use reca_core::activations::parse_kind;
use reca_core::element::Precision;
use reca_core::experiments::train::{
    train_experiment, DatasetSpec, EpochRecord, RunReport, TrainConfig,
};
use reca_core::nn::Granularity;
use reca_core::optim::OptimizerKind;
use reca_core::{Error, Result};

use crate::config::Config;
use crate::outdir::{cell, write_manifest, Csv, OutDir};

/// Environment fallback for the image dataset root when the config does not
/// set `data_dir`.
pub const DATA_DIR_ENV: &str = "RECA_DATA_DIR";

/// Builds a [`TrainConfig`] from config keys, consuming everything it reads.
/// The `activation` key stays untouched when `activation_spec` is given, so
/// `compare` can reuse the same keys with its own activation list.
pub fn train_config_from(cfg: &mut Config, activation_spec: Option<&str>) -> Result<TrainConfig> {
    let dataset = match cfg.take("dataset") {
        None => return Err(Error::Config("config needs a dataset (spirals, cifar10, cifar100)".into())),
        Some(name) => match name.as_str() {
            "spirals" => DatasetSpec::Spirals {
                n: cfg.take_parse_or("spiral_points", 2000)?,
                noise: cfg.take_parse_or("spiral_noise", 0.08)?,
            },
            "cifar10" => DatasetSpec::Cifar10 { dir: data_dir(cfg)? },
            "cifar100" => DatasetSpec::Cifar100 { dir: data_dir(cfg)? },
            other => {
                return Err(Error::Config(format!(
                    "unknown dataset {other:?}; known: spirals, cifar10, cifar100"
                )))
            }
        },
    };

    let activation = match activation_spec {
        Some(spec) => parse_kind(spec)?,
        None => parse_kind(&cfg.take_or("activation", "reca"))?,
    };
    let mut seeds = Vec::new();
    for s in cfg.take_list("seeds") {
        seeds.push(s.parse::<u64>().map_err(|_| {
            Error::Config(format!("bad seed {s:?} in config key \"seeds\""))
        })?);
    }
    if seeds.is_empty() {
        seeds.push(1);
    }

    let config = TrainConfig {
        dataset,
        split_seed: cfg.take_parse_or("split_seed", 0)?,
        seeds,
        model: cfg.take_or("model", "mlp"),
        activation,
        granularity: cfg.take_parse_or("granularity", Granularity::PerChannel)?,
        epochs: cfg.take_parse_or("epochs", 10)?,
        batch_size: cfg.take_parse_or("batch_size", 128)?,
        optimizer: cfg.take_parse_or("optimizer", OptimizerKind::Sgd)?,
        lr0: cfg.take_parse_or("lr0", 0.05)?,
        eta_min: cfg.take_parse_or("eta_min", 1e-4)?,
        l2: cfg.take_parse_or("l2", 1e-7)?,
        act_lr_scale: cfg.take_parse_or("act_lr_scale", 1.0)?,
        precision: cfg.take_parse_or("precision", Precision::F32)?,
        train_limit: cfg.take_parse_or("train_limit", 0)?,
        test_limit: cfg.take_parse_or("test_limit", 0)?,
    };
    config.validate()?;
    Ok(config)
}

fn data_dir(cfg: &mut Config) -> Result<PathBuf> {
    if let Some(dir) = cfg.take("data_dir") {
        return Ok(PathBuf::from(dir));
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => Ok(PathBuf::from(dir)),
        _ => Err(Error::Config(format!(
            "image datasets need a config key \"data_dir\" or the {DATA_DIR_ENV} environment variable"
        ))),
    }
}

pub fn run(config_path: &Path, overrides: &[String], out_path: &Path) -> Result<()> {
    let mut cfg = Config::load(config_path, overrides)?;
    let train_cfg = train_config_from(&mut cfg, None)?;
    let echo = cfg.echo();
    cfg.finish()?;

    let out = OutDir::create(out_path)?;
    write_manifest(
        &out,
        "train",
        serde_json::json!({
            "config_file": config_path.display().to_string(),
            "config": echo,
            "resolved": &train_cfg,
            "seeds": &train_cfg.seeds,
            "precision": &train_cfg.precision,
        }),
    )?;

    let reports = train_experiment(&train_cfg)?;
    for report in &reports {
        out.write_text(&format!("run-{}.csv", report.seed), &epoch_csv(&report.epochs))?;
    }
    out.write_json("summary.json", &reports)?;

    for report in &reports {
        let last = report.epochs.last().expect("validated epochs >= 1");
        println!(
            "seed {}: {} epochs in {:.1}s, final train loss {:.4}, test top1 {:.4}, \
             max activation-parameter move {:.2e}",
            report.seed,
            report.epochs.len(),
            report.wall_seconds,
            last.train.loss,
            last.test.top1,
            report.activation_param_delta_max,
        );
    }
    println!("results written to {}", out.path().display());
    Ok(())
}

/// Per-epoch CSV, two rows per epoch (train then test). The activation
/// parameter columns are filled by parameter name; activations without a
/// given parameter leave its cells empty.
pub fn epoch_csv(epochs: &[EpochRecord]) -> String {
    let mut csv = Csv::new(
        "epoch,split,loss,top1,top5,lr,alpha_min,alpha_mean,alpha_max,beta_mean,delta_mean",
    );
    for e in epochs {
        let stat = |name: &str| e.activation_stats.iter().find(|s| s.name == name);
        let alpha = stat("alpha");
        let params = [
            cell(alpha.map(|s| s.min)),
            cell(alpha.map(|s| s.mean)),
            cell(alpha.map(|s| s.max)),
            cell(stat("beta").map(|s| s.mean)),
            cell(stat("delta").map(|s| s.mean)),
        ];
        for (split, m) in [("train", &e.train), ("test", &e.test)] {
            let mut row = vec![
                e.epoch.to_string(),
                split.to_string(),
                cell(Some(m.loss)),
                cell(Some(m.top1)),
                cell(Some(m.top5)),
                cell(Some(e.lr)),
            ];
            row.extend(params.iter().cloned());
            csv.row(&row);
        }
    }
    csv.into_text()
}

/// Shared by `train` and `compare` printouts.
pub fn final_top1(report: &RunReport) -> f64 {
    report.epochs.last().map(|e| e.test.top1).unwrap_or(f64::NAN)
}
