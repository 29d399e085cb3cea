//! Seeded training runs with per-epoch metrics, top-k accuracy, and
//! resource accounting against an activation twin.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::activations::ActivationKind;
use crate::data::cifar::{load_cifar10, load_cifar100};
use crate::data::synth::spirals;
use crate::data::{batch_indices, channel_stats, normalize, Dataset, SampleSet, SplitSpec};
use crate::element::{Element, Precision};
use crate::error::{Error, Result};
use crate::experiments::presets::model_preset;
use crate::nn::{softmax_cross_entropy, Granularity, Mode, Model, ParamClass, ParamCounts};
use crate::optim::{activation_l2, cosine_lr, Optimizer, OptimizerKind, ScheduleSpec};
use crate::rng::seeded;
use crate::tensor::Tensor;

/// Which samples a run trains and evaluates on.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum DatasetSpec {
    Cifar10 { dir: PathBuf },
    Cifar100 { dir: PathBuf },
    Spirals { n: usize, noise: f64 },
}

/// Everything a training run depends on. Serialized verbatim into the run
/// manifest so outputs are reproducible from the manifest alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub dataset: DatasetSpec,
    /// Base seed for the 80/20 split; each run splits with
    /// `split_seed + run_seed` so runs see different splits.
    pub split_seed: u64,
    /// One training run per seed.
    pub seeds: Vec<u64>,
    /// Model preset name.
    pub model: String,
    pub activation: ActivationKind,
    pub granularity: Granularity,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub lr0: f64,
    pub eta_min: f64,
    /// L2 strength on activation parameters only.
    pub l2: f64,
    /// Multiplier on the learning rate of activation parameters; 0 freezes
    /// them, which turns a ReCA model into its fixed-activation twin.
    pub act_lr_scale: f64,
    pub precision: Precision,
    /// 0 keeps the whole split; otherwise the first n samples of it.
    pub train_limit: usize,
    pub test_limit: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one run seed is required".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::Config(format!("l2 strength {} must be finite and >= 0", self.l2)));
        }
        if !(self.act_lr_scale.is_finite() && self.act_lr_scale >= 0.0) {
            return Err(Error::Config(format!(
                "activation lr scale {} must be finite and >= 0",
                self.act_lr_scale
            )));
        }
        ScheduleSpec::new(self.lr0, self.eta_min, self.epochs)?;
        model_preset(&self.model)?;
        Ok(())
    }
}

/// Min, mean, max of one named activation parameter across all sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamStat {
    pub name: String,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Loss and accuracy over one split. Accuracies are fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitMetrics {
    pub loss: f64,
    pub top1: f64,
    pub top5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub lr: f64,
    /// Measured over the epoch's training batches before each update; loss
    /// is the data term only, the activation L2 penalty shapes gradients
    /// but is not folded into reporting.
    pub train: SplitMetrics,
    /// Measured over the full test split after the epoch.
    pub test: SplitMetrics,
    pub activation_stats: Vec<ParamStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub split_seed: u64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub epochs: Vec<EpochRecord>,
    pub wall_seconds: f64,
    pub params: ParamCounts,
    pub activation_sites: usize,
    /// Largest |final - initial| over every activation parameter scalar.
    pub activation_param_delta_max: f64,
}

/// Train once per configured seed, sequentially, and report each run.
pub fn train_experiment(cfg: &TrainConfig) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    let source = load_source(&cfg.dataset, cfg.split_seed)?;
    match cfg.precision {
        Precision::F32 => cfg.seeds.iter().map(|&s| run_one::<f32>(cfg, &source, s)).collect(),
        Precision::F64 => cfg.seeds.iter().map(|&s| run_one::<f64>(cfg, &source, s)).collect(),
    }
}

enum Source {
    Images(Dataset),
    Points(SampleSet<f64>),
}

fn load_source(spec: &DatasetSpec, data_seed: u64) -> Result<Source> {
    match spec {
        DatasetSpec::Cifar10 { dir } => Ok(Source::Images(load_cifar10(dir)?)),
        DatasetSpec::Cifar100 { dir } => Ok(Source::Images(load_cifar100(dir)?)),
        DatasetSpec::Spirals { n, noise } => Ok(Source::Points(spirals(*n, *noise, data_seed)?)),
    }
}

fn prepare<E: Element>(
    source: &Source,
    cfg: &TrainConfig,
    run_seed: u64,
) -> Result<(SampleSet<E>, SampleSet<E>)> {
    let split = SplitSpec {
        train_fraction: 0.8,
        seed: cfg.split_seed.wrapping_add(run_seed),
    };
    let (mut train, mut test) = match source {
        Source::Images(ds) => {
            let (tr, te) = ds.split(&split)?;
            // Test data reuses the train statistics by contract.
            let stats = channel_stats(&tr)?;
            (normalize::<E>(&tr, &stats)?, normalize::<E>(&te, &stats)?)
        }
        Source::Points(set) => {
            let (tr, te) = set.split(&split)?;
            (tr.cast::<E>(), te.cast::<E>())
        }
    };
    if cfg.train_limit > 0 {
        train = train.take_prefix(cfg.train_limit)?;
    }
    if cfg.test_limit > 0 {
        test = test.take_prefix(cfg.test_limit)?;
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Domain(format!(
            "split left {} train / {} test samples",
            train.len(),
            test.len()
        )));
    }
    Ok((train, test))
}

fn run_one<E: Element>(cfg: &TrainConfig, source: &Source, run_seed: u64) -> Result<RunReport> {
    let start = Instant::now();
    let (train, test) = prepare::<E>(source, cfg, run_seed)?;
    let preset = model_preset(&cfg.model)?;
    let spec = preset.spec(
        train.sample_shape(),
        train.class_count(),
        &cfg.activation,
        cfg.granularity,
    )?;
    let mut model: Model<E> = Model::build(&spec, &mut seeded(run_seed))?;
    let schedule = ScheduleSpec::new(cfg.lr0, cfg.eta_min, cfg.epochs)?;
    let mut opt = Optimizer::standard(cfg.optimizer);
    let k_top = 5.min(train.class_count());
    let initial = activation_param_snapshot(&mut model);

    let mut records = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let lr = cosine_lr(epoch - 1, &schedule)?;
        let batches = batch_indices(train.len(), cfg.batch_size, run_seed, epoch as u64, true)?;
        let mut loss_sum = 0.0;
        let (mut hit1, mut hit5) = (0usize, 0usize);
        for idx in &batches {
            let (x, labels) = train.gather(idx)?;
            model.zero_grads();
            let logits = model.forward(&x, Mode::Train)?;
            let out = softmax_cross_entropy(&logits, &labels)?;
            if !out.loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "training loss {} at epoch {epoch} under seed {run_seed}",
                    out.loss
                )));
            }
            loss_sum += out.loss * labels.len() as f64;
            hit1 += topk_hits(&logits, &labels, 1)?;
            hit5 += topk_hits(&logits, &labels, k_top)?;
            model.backward(&out.grad)?;
            {
                let mut params = model.params_mut();
                activation_l2(&mut params, cfg.l2)?;
                opt.step(&mut params, lr, cfg.act_lr_scale)?;
            }
            model.project_activation_params();
        }
        let n = train.len() as f64;
        let train_metrics = SplitMetrics {
            loss: loss_sum / n,
            top1: hit1 as f64 / n,
            top5: hit5 as f64 / n,
        };
        let test_metrics = evaluate(&mut model, &test, cfg.batch_size, k_top)?;
        records.push(EpochRecord {
            epoch,
            lr,
            train: train_metrics,
            test: test_metrics,
            activation_stats: activation_param_stats(&mut model),
        });
    }

    let moved = activation_param_snapshot(&mut model)
        .iter()
        .zip(&initial)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RunReport {
        seed: run_seed,
        split_seed: cfg.split_seed.wrapping_add(run_seed),
        train_samples: train.len(),
        test_samples: test.len(),
        epochs: records,
        wall_seconds: start.elapsed().as_secs_f64(),
        params: model.parameter_counts(),
        activation_sites: model.activation_sites(),
        activation_param_delta_max: moved,
    })
}

/// Loss and top-k accuracy over a whole set, in fixed order, without
/// touching training state.
pub fn evaluate<E: Element>(
    model: &mut Model<E>,
    set: &SampleSet<E>,
    batch_size: usize,
    k_top: usize,
) -> Result<SplitMetrics> {
    let batches = batch_indices(set.len(), batch_size, 0, 0, false)?;
    let mut loss_sum = 0.0;
    let (mut hit1, mut hitk) = (0usize, 0usize);
    for idx in &batches {
        let (x, labels) = set.gather(idx)?;
        let logits = model.forward(&x, Mode::Eval)?;
        let out = softmax_cross_entropy(&logits, &labels)?;
        loss_sum += out.loss * labels.len() as f64;
        hit1 += topk_hits(&logits, &labels, 1)?;
        hitk += topk_hits(&logits, &labels, k_top)?;
    }
    let n = set.len() as f64;
    Ok(SplitMetrics { loss: loss_sum / n, top1: hit1 as f64 / n, top5: hitk as f64 / n })
}

/// Rows whose true label ranks inside the top k logits. A label's rank
/// counts every class with a strictly larger logit plus every earlier class
/// with an equal logit, so ties resolve toward lower class indices.
pub fn topk_hits<E: Element>(logits: &Tensor<E>, labels: &[u32], k: usize) -> Result<usize> {
    if logits.rank() != 2 {
        return Err(Error::Shape(format!("top-k needs [N, classes] logits, got {:?}", logits.shape())));
    }
    let classes = logits.dim(1);
    if k == 0 || k > classes {
        return Err(Error::Config(format!("top-k {k} outside 1..={classes}")));
    }
    if labels.len() != logits.dim(0) {
        return Err(Error::Shape(format!(
            "{} logit rows but {} labels",
            logits.dim(0),
            labels.len()
        )));
    }
    let mut hits = 0;
    for (row, &label) in labels.iter().enumerate() {
        let row = &logits.data()[row * classes..(row + 1) * classes];
        let own = row[label as usize].widen();
        let mut rank = 0;
        for (c, v) in row.iter().enumerate() {
            let v = v.widen();
            if v > own || (v == own && c < label as usize) {
                rank += 1;
            }
        }
        if rank < k {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Fraction of rows whose true label ranks inside the top k logits.
pub fn topk_accuracy<E: Element>(logits: &Tensor<E>, labels: &[u32], k: usize) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Domain("top-k accuracy of an empty batch".into()));
    }
    Ok(topk_hits(logits, labels, k)? as f64 / labels.len() as f64)
}

fn activation_param_snapshot<E: Element>(model: &mut Model<E>) -> Vec<f64> {
    model
        .params_mut()
        .iter()
        .filter(|p| p.class == ParamClass::Activation)
        .flat_map(|p| p.value.iter().map(|v| v.widen()))
        .collect()
}

/// Per-name min/mean/max over every activation site in the model; the mean
/// weights each layer by its site count.
pub fn activation_param_stats<E: Element>(model: &mut Model<E>) -> Vec<ParamStat> {
    struct Acc {
        name: &'static str,
        min: f64,
        sum: f64,
        sites: usize,
        max: f64,
    }
    let mut accs: Vec<Acc> = Vec::new();
    model.visit_activation_layers(|layer| {
        let sites = layer.sites();
        for (name, min, mean, max) in layer.param_stats() {
            match accs.iter_mut().find(|a| a.name == name) {
                Some(a) => {
                    a.min = a.min.min(min);
                    a.sum += mean * sites as f64;
                    a.sites += sites;
                    a.max = a.max.max(max);
                }
                None => accs.push(Acc { name, min, sum: mean * sites as f64, sites, max }),
            }
        }
    });
    accs.into_iter()
        .map(|a| ParamStat {
            name: a.name.into(),
            min: a.min,
            mean: a.sum / a.sites as f64,
            max: a.max,
        })
        .collect()
}

/// Space and time of an activation variant against a baseline twin of the
/// same preset: exact parameter delta, measured step-time ratio.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    pub base: String,
    pub variant: String,
    pub base_params: ParamCounts,
    pub variant_params: ParamCounts,
    pub activation_sites: usize,
    pub param_delta: i64,
    pub base_seconds: f64,
    pub variant_seconds: f64,
    pub time_ratio: f64,
    pub steps: usize,
}

pub fn resource_report(
    preset_name: &str,
    input_shape: &[usize],
    class_count: usize,
    base: &ActivationKind,
    variant: &ActivationKind,
    steps: usize,
    seed: u64,
) -> Result<ResourceReport> {
    if steps == 0 {
        return Err(Error::Config("resource accounting needs at least one step".into()));
    }
    let mut measured = Vec::new();
    for kind in [base, variant] {
        measured.push(timed_steps(preset_name, input_shape, class_count, kind, steps, seed)?);
    }
    let (base_params, base_seconds, sites) = measured[0];
    let (variant_params, variant_seconds, _) = measured[1];
    Ok(ResourceReport {
        base: base.name().to_string(),
        variant: variant.name().to_string(),
        base_params,
        variant_params,
        activation_sites: sites,
        param_delta: variant_params.total as i64 - base_params.total as i64,
        base_seconds,
        variant_seconds,
        time_ratio: variant_seconds / base_seconds,
        steps,
    })
}

fn timed_steps(
    preset_name: &str,
    input_shape: &[usize],
    class_count: usize,
    kind: &ActivationKind,
    steps: usize,
    seed: u64,
) -> Result<(ParamCounts, f64, usize)> {
    let batch = 8;
    let spec = model_preset(preset_name)?.spec(
        input_shape,
        class_count,
        kind,
        Granularity::PerChannel,
    )?;
    let mut model: Model<f32> = Model::build(&spec, &mut seeded(seed))?;
    let mut rng = seeded(seed ^ 0x7e5);
    let mut shape = vec![batch];
    shape.extend_from_slice(input_shape);
    let data = (0..shape.iter().product::<usize>()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = Tensor::from_vec(&shape, data)?;
    let labels: Vec<u32> = (0..batch).map(|_| rng.gen_range(0..class_count as u32)).collect();
    let mut opt = Optimizer::standard(OptimizerKind::Sgd);

    let start = Instant::now();
    for _ in 0..steps {
        model.zero_grads();
        let logits = model.forward(&x, Mode::Train)?;
        let out = softmax_cross_entropy(&logits, &labels)?;
        model.backward(&out.grad)?;
        let mut params = model.params_mut();
        opt.step(&mut params, 0.01, 1.0)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok((model.parameter_counts(), seconds, model.activation_sites()))
}
