//! Acceptance checklist: one pass/fail line per criterion, all eleven run
//! in order by a single test so the output reads top to bottom.
//!
//!  1. exact bitwise reduction to relu at (0.5, 0, 0)
//!  2. gradient tolerances, scalar f64 and composed f32
//!  3. the binary demonstrates both derivative forms under --erratum
//!  4. monotonicity under random valid parameters
//!  5. the sigma(2x) identity and the 2 alpha tail asymptote
//!  6. exact cosine schedule endpoints
//!  7. parameter accounting: three parameters per activation site
//!  8. compare_report reproduces the published benchmark means
//!  9. landscape smoothness against the relu twin
//! 10. desk-scale training through the shipped binary
//! 11. bitwise-identical CSVs when criterion 10 is rerun
//!
//! Criteria 10 and 11 train twelve small models and dominate the runtime
//! (about twenty minutes); run with `--nocapture` to watch progress.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use reca_core::activations::{ActivationKind, RecaParams, ALPHA_MIN};
use reca_core::data::synth::write_synthetic_cifar10;
use reca_core::experiments::gradcheck::run_gradcheck;
use reca_core::experiments::landscape::{landscape, max_second_difference, LandscapeActivation};
use reca_core::experiments::presets::{ModelPreset, MODEL_PRESETS};
use reca_core::experiments::report::{compare_report, summarize, CompareRow, FunctionRuns};
use reca_core::math::sigmoid;
use reca_core::nn::{Granularity, LayerSpec, Model, ModelSpec};
use reca_core::optim::{cosine_lr, ScheduleSpec};
use reca_core::rng::seeded;
use serde_json::Value;
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn s(e: impl Display) -> String {
    e.to_string()
}

#[test]
fn acceptance() {
    let mut failures = Vec::new();
    let mut check = |number: u32, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {number:>2}: PASS  {detail}"),
        Err(detail) => {
            println!("criterion {number:>2}: FAIL  {detail}");
            failures.push(number);
        }
    };

    check(1, relu_reduction());
    check(2, gradient_tolerances());
    check(3, erratum_printout());
    check(4, monotonicity());
    check(5, identity_and_asymptote());
    check(6, schedule_endpoints());
    check(7, parameter_accounting());
    check(8, reporting_fidelity());
    check(9, landscape_smoothness());
    let (outcome, runs) = desk_scale_training();
    check(10, outcome);
    let rerun = match &runs {
        Some(runs) => rerun_determinism(runs),
        None => Err("skipped: criterion 10 produced no runs to replay".into()),
    };
    check(11, rerun);

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

/// f at (0.5, 0, 0) must equal max(0, x) bit for bit across a dense grid.
fn relu_reduction() -> Outcome {
    const POINTS: usize = 1_000_000;
    let frozen = RecaParams::relu();
    let started = Instant::now();
    for i in 0..POINTS {
        let x = -20.0 + 40.0 * i as f64 / (POINTS - 1) as f64;
        let f = frozen.value(x).map_err(s)?;
        if f.to_bits() != x.max(0.0).to_bits() {
            return Err(format!("f({x}) = {f} is not max(0, x) at (0.5, 0, 0)"));
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    if seconds >= 1.0 {
        return Err(format!("grid took {seconds:.2}s, budget is 1s"));
    }
    Ok(format!("{POINTS} grid points on [-20, 20] match max(0, x) bitwise in {seconds:.2}s"))
}

/// Analytic gradients against central differences: the scalar f64 suites
/// within 1e-6, the composed-layer f32 suites within 1e-4.
fn gradient_tolerances() -> Outcome {
    let report = run_gradcheck(0, 1000, false).map_err(s)?;
    let required = [
        ("reca-input-grad", 1e-6),
        ("reca-param-grads", 1e-6),
        ("composed-dense-f32", 1e-4),
        ("composed-conv-f32", 1e-4),
    ];
    let mut seen = Vec::new();
    for (name, bound) in required {
        let component = report
            .components
            .iter()
            .find(|c| c.component == name)
            .ok_or_else(|| format!("gradcheck has no component {name}"))?;
        if component.max_rel_err >= bound {
            return Err(format!(
                "{name}: max rel err {:.3e} is not under {bound:e} ({})",
                component.max_rel_err, component.worst
            ));
        }
        seen.push(format!("{name} {:.1e}", component.max_rel_err));
    }
    report.verify().map_err(s)?;
    Ok(format!("1000 trials, every suite within tolerance: {}", seen.join(", ")))
}

/// The shipped binary prints both derivative forms at (1, (0.5, 1, 1));
/// the literal first-term form must miss the finite difference by more
/// than 10% while the corrected form agrees to 1e-6.
fn erratum_printout() -> Outcome {
    let output = Command::new(env!("CARGO_BIN_EXE_reca"))
        .args(["gradcheck", "--trials", "10", "--erratum"])
        .output()
        .map_err(|e| format!("failed to spawn the binary: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "gradcheck exited with {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr).trim()
        ));
    }
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let corrected = printed_rel_err(&stdout, "corrected form")?;
    let literal = printed_rel_err(&stdout, "printed form")?;
    if corrected >= 1e-6 {
        return Err(format!("corrected form rel err {corrected:e}, expected under 1e-6"));
    }
    if literal <= 0.1 {
        return Err(format!("literal form rel err {literal:e}, expected over 10%"));
    }
    Ok(format!(
        "binary prints both forms: literal off by {:.1}%, corrected within {corrected:.1e}",
        literal * 100.0
    ))
}

fn printed_rel_err(stdout: &str, label: &str) -> Result<f64, String> {
    let line = stdout
        .lines()
        .find(|l| l.trim_start().starts_with(label))
        .ok_or_else(|| format!("gradcheck output has no {label:?} line"))?;
    let tail = line
        .rsplit("rel err ")
        .next()
        .ok_or_else(|| format!("no rel err field in {line:?}"))?;
    tail.trim().parse().map_err(|e| format!("bad rel err in {line:?}: {e}"))
}

/// Nondecreasing on every ordered pair under random valid parameters.
fn monotonicity() -> Outcome {
    const PAIRS: usize = 100_000;
    let mut rng = seeded(4);
    let mut worst_step = f64::INFINITY;
    for _ in 0..PAIRS {
        let params = RecaParams::new(
            rng.gen_range(0.1..=2.0),
            rng.gen_range(0.0..=5.0),
            rng.gen_range(0.0..=5.0),
        )
        .map_err(s)?;
        let a: f64 = rng.gen_range(-20.0..=20.0);
        let b: f64 = rng.gen_range(-20.0..=20.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let step = params.value(hi).map_err(s)? - params.value(lo).map_err(s)?;
        if step < -1e-12 {
            return Err(format!(
                "f fell by {:.3e} from x = {lo} to x = {hi} at {params:?}",
                -step
            ));
        }
        worst_step = worst_step.min(step);
    }
    Ok(format!("{PAIRS} ordered pairs, zero decreases beyond 1e-12 (worst step {worst_step:.1e})"))
}

/// sigma(2x) must match (1 + tanh x)/2 to 1e-12 across [-40, 40], and
/// f(x)/x must sit on the 2 alpha asymptote by x = 40.
fn identity_and_asymptote() -> Outcome {
    const POINTS: usize = 80_001;
    let mut identity_gap = 0.0f64;
    for i in 0..POINTS {
        let x = -40.0 + 80.0 * i as f64 / (POINTS - 1) as f64;
        let gap = (sigmoid(2.0 * x) - (1.0 + x.tanh()) / 2.0).abs();
        identity_gap = identity_gap.max(gap);
    }
    if identity_gap > 1e-12 {
        return Err(format!("|sigma(2x) - (1 + tanh x)/2| reaches {identity_gap:.3e}"));
    }
    let mut rng = seeded(5);
    let mut tail_gap = 0.0f64;
    for _ in 0..200 {
        let alpha = rng.gen_range(0.1..=2.0);
        let params =
            RecaParams::new(alpha, rng.gen_range(0.0..=5.0), rng.gen_range(0.0..=5.0))
                .map_err(s)?;
        let gap = (params.value(40.0).map_err(s)? / 40.0 - 2.0 * alpha).abs();
        tail_gap = tail_gap.max(gap);
    }
    if tail_gap >= 1e-6 {
        return Err(format!("|f(40)/40 - 2 alpha| reaches {tail_gap:.3e}"));
    }
    Ok(format!(
        "identity gap {identity_gap:.1e} over {POINTS} points; |f(40)/40 - 2 alpha| at most \
         {tail_gap:.1e} over 200 parameter draws"
    ))
}

/// Cosine schedule endpoints are exact, not approximate.
fn schedule_endpoints() -> Outcome {
    for epochs in [15usize, 200] {
        let spec = ScheduleSpec::new(0.05, 1e-4, epochs).map_err(s)?;
        let first = cosine_lr(0, &spec).map_err(s)?;
        let last = cosine_lr(epochs, &spec).map_err(s)?;
        if first != 0.05 {
            return Err(format!("cosine_lr(0) = {first} over {epochs} epochs, want exactly 0.05"));
        }
        if last != 1e-4 {
            return Err(format!("cosine_lr({epochs}) = {last}, want exactly 1e-4"));
        }
    }
    Ok("cosine_lr(0) = 0.05 and cosine_lr(T) = 1e-4 exactly for T in {15, 200}".into())
}

/// Swapping relu for reca adds exactly three parameters per activation
/// site in every preset, and a 1356-channel stack reproduces the published
/// gap of 4068 = 544950 - 540882.
fn parameter_accounting() -> Outcome {
    let mut per_preset = Vec::new();
    for preset in MODEL_PRESETS {
        let (reca_total, sites) = preset_counts(preset, &ActivationKind::reca_default())?;
        let (relu_total, _) = preset_counts(preset, &ActivationKind::Relu)?;
        let delta = reca_total - relu_total;
        if delta != 3 * sites {
            return Err(format!(
                "{}: reca adds {delta} parameters over {sites} sites, want {}",
                preset.name,
                3 * sites
            ));
        }
        per_preset.push(format!("{} {sites}", preset.name));
    }

    let (reca_total, sites) = dense_tower_counts(&ActivationKind::reca_default())?;
    let (relu_total, _) = dense_tower_counts(&ActivationKind::Relu)?;
    if sites != 1356 {
        return Err(format!("dense tower has {sites} sites, want 1356"));
    }
    let delta = reca_total - relu_total;
    if delta != 4068 {
        return Err(format!("1356 channels add {delta} parameters, want 544950 - 540882 = 4068"));
    }
    Ok(format!(
        "3 parameters per site across presets (sites: {}); 1356 channels add exactly \
         4068 = 544950 - 540882",
        per_preset.join(", ")
    ))
}

fn preset_counts(preset: &ModelPreset, kind: &ActivationKind) -> Result<(usize, usize), String> {
    let spec =
        preset.spec(&[3, 32, 32], 10, kind, Granularity::PerChannel).map_err(s)?;
    let mut model: Model<f64> = Model::build(&spec, &mut seeded(0)).map_err(s)?;
    Ok((model.parameter_counts().total, model.activation_sites()))
}

/// Three dense blocks of widths 339, 678, 339: one activation parameter
/// set per feature puts 1356 sites in the model.
fn dense_tower_counts(kind: &ActivationKind) -> Result<(usize, usize), String> {
    let mut layers = Vec::new();
    for width in [339usize, 678, 339] {
        layers.push(LayerSpec::Dense { out_features: width, bias: true });
        layers.push(LayerSpec::Activation { kind: *kind, granularity: Granularity::PerChannel });
    }
    layers.push(LayerSpec::Dense { out_features: 10, bias: true });
    let spec = ModelSpec { input_shape: vec![32], layers, class_count: 10 };
    let mut model: Model<f64> = Model::build(&spec, &mut seeded(0)).map_err(s)?;
    Ok((model.parameter_counts().total, model.activation_sites()))
}

/// compare_report on the published per-run accuracies must reproduce every
/// quoted mean to 0.01. One quoted number is misattributed at the source:
/// the 51.11 quoted for swish on the resnet56 rows is the prelu mean, and
/// swish's own mean there is 51.77. The checks pin the actual arithmetic.
fn reporting_fidelity() -> Outcome {
    let resnet20 = accuracy_table(&[
        ("relu", [83.96, 84.11, 83.27]),
        ("prelu", [83.02, 83.39, 82.52]),
        ("swish", [82.24, 81.85, 82.22]),
        ("reca", [85.07, 86.21, 86.41]),
    ])?;
    let wrn168 = accuracy_table(&[
        ("relu", [88.69, 86.83, 86.71]),
        ("prelu", [87.30, 86.04, 86.00]),
        ("swish", [88.49, 88.48, 81.56]),
        ("reca", [88.70, 88.52, 88.73]),
    ])?;
    let resnet32 = accuracy_table(&[
        ("relu", [47.90, 51.29, 51.34]),
        ("prelu", [46.68, 52.00, 53.49]),
        ("swish", [45.84, 45.57, 46.47]),
        ("reca", [53.65, 55.54, 56.76]),
    ])?;
    let resnet56 = accuracy_table(&[
        ("relu", [47.17, 48.05, 51.99]),
        ("prelu", [46.81, 54.68, 51.84]),
        ("swish", [49.02, 51.20, 55.09]),
        ("reca", [54.70, 56.90, 57.31]),
    ])?;

    let checks = [
        ("resnet20 relu mean", top1_mean(&resnet20, "relu")?, 83.78),
        ("resnet20 prelu mean", top1_mean(&resnet20, "prelu")?, 82.97),
        ("resnet20 swish mean", top1_mean(&resnet20, "swish")?, 82.10),
        ("resnet20 reca mean", top1_mean(&resnet20, "reca")?, 85.90),
        ("wrn16-8 reca mean", top1_mean(&wrn168, "reca")?, 88.65),
        (
            "resnet32 reca - prelu gap",
            top1_mean(&resnet32, "reca")? - top1_mean(&resnet32, "prelu")?,
            4.59,
        ),
        ("resnet56 prelu mean", top1_mean(&resnet56, "prelu")?, 51.11),
        ("resnet56 swish mean", top1_mean(&resnet56, "swish")?, 51.77),
        ("resnet56 reca mean", top1_mean(&resnet56, "reca")?, 56.30),
    ];
    for (what, got, want) in checks {
        if (got - want).abs() > 0.01 {
            return Err(format!("{what} is {got:.4}, not within 0.01 of {want}"));
        }
    }
    Ok("every quoted mean reproduced to 0.01; note: the 51.11 quoted for swish on the \
        resnet56 runs is the prelu mean, swish's own mean is 51.77"
        .into())
}

fn accuracy_table(rows: &[(&str, [f64; 3])]) -> Result<Vec<CompareRow>, String> {
    let entries: Vec<FunctionRuns> = rows
        .iter()
        .map(|(function, top1)| FunctionRuns {
            function: (*function).into(),
            top1: top1.to_vec(),
            top5: vec![100.0; 3],
            top1_curves: Vec::new(),
            top5_curves: Vec::new(),
        })
        .collect();
    compare_report(&entries).map_err(s)
}

fn top1_mean(rows: &[CompareRow], function: &str) -> Result<f64, String> {
    rows.iter()
        .find(|r| r.function == function && r.metric == "top1")
        .map(|r| r.stats.mean)
        .ok_or_else(|| format!("no top1 row for {function}"))
}

/// The linear probe grid is affine, reca at (0.5, 1, 1) has strictly
/// smaller maximum second differences than its same-seed relu twin, and
/// freezing reca at (0.5, 0, 0) reproduces the relu grid exactly.
fn landscape_smoothness() -> Outcome {
    let started = Instant::now();
    let linear = landscape(&LandscapeActivation::Linear, 3).map_err(s)?;
    let linear_d2 = max_second_difference(&linear);
    if linear_d2 > 1e-6 {
        return Err(format!("linear grid second difference {linear_d2:.3e}, tolerance 1e-6"));
    }
    let smooth_params = RecaParams::new(0.5, 1.0, 1.0).map_err(s)?;
    let mut smallest_ratio = f64::INFINITY;
    for seed in [3u64, 5, 11] {
        let relu = landscape(&LandscapeActivation::Relu, seed).map_err(s)?;
        let smooth = landscape(&LandscapeActivation::Reca(smooth_params), seed).map_err(s)?;
        let relu_d2 = max_second_difference(&relu);
        let reca_d2 = max_second_difference(&smooth);
        if reca_d2 >= relu_d2 {
            return Err(format!(
                "seed {seed}: reca second difference {reca_d2:.3e} not below relu {relu_d2:.3e}"
            ));
        }
        let frozen = landscape(&LandscapeActivation::Reca(RecaParams::relu()), seed).map_err(s)?;
        if frozen.output != relu.output {
            return Err(format!("seed {seed}: frozen reca grid differs from the relu grid"));
        }
        smallest_ratio = smallest_ratio.min(relu_d2 / reca_d2);
    }
    let seconds = started.elapsed().as_secs_f64();
    if seconds >= 10.0 {
        return Err(format!("took {seconds:.1}s, budget is 10s"));
    }
    Ok(format!(
        "linear grid affine ({linear_d2:.1e}); reca second differences at least \
         {smallest_ratio:.1}x below relu over seeds 3, 5, 11; frozen reca matches relu \
         bitwise; {seconds:.2}s"
    ))
}

/// Everything criterion 11 needs to replay criterion 10: the dataset and
/// config live in `dir`, the first pass's CSV payloads in `csvs`.
struct TrainRuns {
    dir: TempDir,
    config: PathBuf,
    csvs: BTreeMap<String, String>,
}

/// mini-cnn at 5000 train / 1000 test samples, 15 epochs, batch 128, sgd
/// at 0.05 with the cosine floor 1e-4, seeds 1, 2, 3, run once with reca
/// and once with relu through the shipped binary. Every run must converge
/// (train loss down by half), reca's parameters must stay in domain yet
/// move, and the reca top-1 median may not trail relu's by more than one
/// point. The sign of the median gap is reported, not asserted.
fn desk_scale_training() -> (Outcome, Option<TrainRuns>) {
    match desk_scale_inner() {
        Ok((detail, runs)) => (Ok(detail), Some(runs)),
        Err(e) => (Err(e), None),
    }
}

fn desk_scale_inner() -> Result<(String, TrainRuns), String> {
    let started = Instant::now();
    let dir = TempDir::new().map_err(s)?;
    let data = dir.path().join("cifar10");
    write_synthetic_cifar10(&data, 1250, 7).map_err(s)?;
    let config = dir.path().join("train.cfg");
    fs::write(
        &config,
        format!(
            "dataset = cifar10\n\
             data_dir = {}\n\
             model = mini-cnn\n\
             granularity = per-channel\n\
             epochs = 15\n\
             batch_size = 128\n\
             optimizer = sgd\n\
             lr0 = 0.05\n\
             eta_min = 1e-4\n\
             precision = f32\n\
             seeds = 1,2,3\n\
             train_limit = 5000\n\
             test_limit = 1000\n",
            data.display()
        ),
    )
    .map_err(s)?;

    let mut csvs = BTreeMap::new();
    let reca = train_side(&config, &dir.path().join("first-reca"), "reca", &mut csvs)?;
    let relu = train_side(&config, &dir.path().join("first-relu"), "relu", &mut csvs)?;

    if reca.median_top1 < relu.median_top1 - 0.01 {
        return Err(format!(
            "median top1 {:.4} (reca) trails {:.4} (relu) by more than one point",
            reca.median_top1, relu.median_top1
        ));
    }
    let minutes = started.elapsed().as_secs_f64() / 60.0;
    if minutes >= 45.0 {
        return Err(format!("took {minutes:.1} min, budget is 45 min"));
    }
    let detail = format!(
        "6 runs converged (worst train-loss drop {:.0}%); reca parameters stayed in domain \
         and moved (smallest max move {:.1e}); median top1 reca {:.3} vs relu {:.3}, gap \
         {:+.2} points (direction reported, only the -1.0 floor is asserted); {:.1} min",
        reca.worst_drop.min(relu.worst_drop) * 100.0,
        reca.smallest_move,
        reca.median_top1,
        relu.median_top1,
        (reca.median_top1 - relu.median_top1) * 100.0,
        minutes
    );
    Ok((detail, TrainRuns { dir, config, csvs }))
}

/// Identical seeds must reproduce the six per-epoch CSVs byte for byte.
fn rerun_determinism(first: &TrainRuns) -> Outcome {
    let mut compared = 0;
    for activation in ["reca", "relu"] {
        let out = first.dir.path().join(format!("second-{activation}"));
        run_train(&first.config, activation, &out)?;
        for seed in [1, 2, 3] {
            let name = format!("run-{seed}.csv");
            let again = fs::read_to_string(out.join(&name))
                .map_err(|e| format!("{activation} rerun {name}: {e}"))?;
            let before = first
                .csvs
                .get(&format!("{activation}/{name}"))
                .ok_or_else(|| format!("first pass kept no {activation}/{name}"))?;
            if &again != before {
                return Err(format!("{activation} {name} differs between identical runs"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} per-epoch CSVs bitwise identical across a full rerun"))
}

struct SideFacts {
    median_top1: f64,
    /// Smallest relative train-loss drop across the three seeds.
    worst_drop: f64,
    /// Smallest per-run max activation-parameter move across the seeds.
    smallest_move: f64,
}

fn train_side(
    config: &Path,
    out: &Path,
    activation: &str,
    csvs: &mut BTreeMap<String, String>,
) -> Result<SideFacts, String> {
    run_train(config, activation, out)?;
    let reports = read_summary(out)?;
    if reports.len() != 3 {
        return Err(format!("{activation}: {} runs in summary.json, expected 3", reports.len()));
    }
    let mut finals = Vec::new();
    let mut worst_drop = f64::INFINITY;
    let mut smallest_move = f64::INFINITY;
    for report in &reports {
        let facts = check_run(report, activation)?;
        finals.push(facts.final_top1);
        worst_drop = worst_drop.min(facts.loss_drop);
        smallest_move = smallest_move.min(facts.param_move);
    }
    for seed in [1, 2, 3] {
        let name = format!("run-{seed}.csv");
        let text =
            fs::read_to_string(out.join(&name)).map_err(|e| format!("{activation} {name}: {e}"))?;
        csvs.insert(format!("{activation}/{name}"), text);
    }
    let median_top1 = summarize(&finals).map_err(s)?.median;
    Ok(SideFacts { median_top1, worst_drop, smallest_move })
}

fn run_train(config: &Path, activation: &str, out: &Path) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_reca"))
        .arg("train")
        .arg("--config")
        .arg(config)
        .arg("--set")
        .arg(format!("activation={activation}"))
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| format!("failed to spawn the binary: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "train with {activation} exited with {:?}: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr).trim()
        ));
    }
    Ok(())
}

fn read_summary(out: &Path) -> Result<Vec<Value>, String> {
    let text = fs::read_to_string(out.join("summary.json"))
        .map_err(|e| format!("summary.json: {e}"))?;
    match serde_json::from_str(&text).map_err(s)? {
        Value::Array(reports) => Ok(reports),
        _ => Err("summary.json is not an array of run reports".into()),
    }
}

struct RunFacts {
    final_top1: f64,
    loss_drop: f64,
    param_move: f64,
}

/// One run report: 15 epochs, train loss at least halved, activation
/// parameters inside their domain every epoch, and for reca a visible
/// move away from initialization.
fn check_run(report: &Value, activation: &str) -> Result<RunFacts, String> {
    let seed = number(report, "seed")?;
    let context = format!("{activation} seed {seed}");
    let epochs = report
        .get("epochs")
        .and_then(Value::as_array)
        .ok_or_else(|| format!("{context}: no epochs array"))?;
    if epochs.len() != 15 {
        return Err(format!("{context}: {} epochs, expected 15", epochs.len()));
    }
    let initial = number(&epochs[0]["train"], "loss")?;
    let last = &epochs[epochs.len() - 1];
    let final_loss = number(&last["train"], "loss")?;
    let loss_drop = (initial - final_loss) / initial;
    if !loss_drop.is_finite() || loss_drop < 0.5 {
        return Err(format!(
            "{context}: train loss fell only {:.0}% ({initial:.4} to {final_loss:.4})",
            loss_drop * 100.0
        ));
    }
    if activation == "reca" {
        for epoch in epochs {
            let stats = epoch
                .get("activation_stats")
                .and_then(Value::as_array)
                .ok_or_else(|| format!("{context}: no activation stats"))?;
            for (name, floor) in [("alpha", ALPHA_MIN), ("beta", 0.0), ("delta", 0.0)] {
                let stat = stats
                    .iter()
                    .find(|s| s.get("name").and_then(Value::as_str) == Some(name))
                    .ok_or_else(|| format!("{context}: no {name} stat"))?;
                let min = number(stat, "min")?;
                let max = number(stat, "max")?;
                if min < floor || !min.is_finite() || !max.is_finite() {
                    return Err(format!(
                        "{context}: {name} left its domain (min {min}, max {max})"
                    ));
                }
            }
        }
    }
    let param_move = number(report, "activation_param_delta_max")?;
    if activation == "reca" && param_move <= 1e-3 {
        return Err(format!("{context}: activation parameters moved only {param_move:.1e}"));
    }
    let final_top1 = number(&last["test"], "top1")?;
    Ok(RunFacts { final_top1, loss_drop, param_move })
}

fn number(value: &Value, key: &str) -> Result<f64, String> {
    value
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("missing number {key:?} in run report"))
}
