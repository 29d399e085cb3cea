//! Gradient verification: analytic derivatives against central finite
//! differences, for every zoo activation as a scalar function and for
//! composed models in both precisions.

use rand::Rng;
use serde::Serialize;

use crate::activations::{self, RecaParams};
use crate::element::{Element, Precision};
use crate::error::{Error, Result};
use crate::nn::{softmax_cross_entropy, Granularity, LayerSpec, Mode, Model, ModelSpec};
use crate::rng::seeded;
use crate::tensor::Tensor;

/// Central-difference probe step.
pub const FD_STEP: f64 = 1e-6;

/// Tolerance for scalar 64-bit checks.
pub const SCALAR_TOL: f64 = 1e-6;

/// Tolerance for composed-model checks where the analytic side runs in f32.
pub const COMPOSED_F32_TOL: f64 = 1e-4;

/// Relative error with a unit floor: `|a - n| / max(|a|, |n|, 1)`. The floor
/// keeps near-zero gradients from dividing rounding noise by itself.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Worst case seen by one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub component: String,
    pub max_rel_err: f64,
    pub tolerance: f64,
    /// Offending input and both gradient values, empty when nothing failed
    /// to get near the tolerance.
    pub worst: String,
}

impl ComponentReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.tolerance
    }
}

/// The printed derivative's first term uses f(x) where the chain rule needs
/// g(x); this report holds both forms against the same finite difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErratumReport {
    pub x: f64,
    pub params: (f64, f64, f64),
    pub fd: f64,
    pub corrected: f64,
    pub literal: f64,
    pub corrected_rel_err: f64,
    pub literal_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub seed: u64,
    pub trials: usize,
    pub components: Vec<ComponentReport>,
    pub erratum: Option<ErratumReport>,
}

impl GradcheckReport {
    /// Error listing every component over tolerance; `Ok` when all passed.
    pub fn verify(&self) -> Result<()> {
        let mut failures: Vec<String> = self
            .components
            .iter()
            .filter(|c| !c.passed())
            .map(|c| {
                format!(
                    "{}: max rel err {:.3e} > {:.0e} ({})",
                    c.component, c.max_rel_err, c.tolerance, c.worst
                )
            })
            .collect();
        if let Some(e) = &self.erratum {
            if e.corrected_rel_err >= SCALAR_TOL {
                failures.push(format!(
                    "corrected derivative drifted from the finite difference: {:.3e}",
                    e.corrected_rel_err
                ));
            }
            if e.literal_rel_err <= 0.1 {
                failures.push(format!(
                    "literal derivative form unexpectedly agrees ({:.3e}); \
                     the demonstration relies on it disagreeing",
                    e.literal_rel_err
                ));
            }
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Verification(format!("gradcheck failed: {}", failures.join("; "))))
        }
    }
}

/// Run every suite. Scalar suites draw `trials` cases each; composed suites
/// check every scalar of two fixed small models in both precisions.
pub fn run_gradcheck(seed: u64, trials: usize, with_erratum: bool) -> Result<GradcheckReport> {
    if trials == 0 {
        return Err(Error::Config("gradcheck needs at least one trial".into()));
    }
    let mut components = Vec::new();
    components.push(reca_random_suite(seed, trials, Part::Input)?);
    components.push(reca_random_suite(seed, trials, Part::Params)?);
    components.push(relu_reduction_suite(seed, trials)?);
    for name in activations::names() {
        components.push(zoo_suite(name, seed, trials)?);
    }
    let (dense, conv) = (dense_spec(), conv_spec());
    components.push(composed_component::<f64>("composed-dense-f64", &dense, seed)?);
    components.push(composed_component::<f64>("composed-conv-f64", &conv, seed)?);
    components.push(composed_component::<f32>("composed-dense-f32", &dense, seed)?);
    components.push(composed_component::<f32>("composed-conv-f32", &conv, seed)?);
    let erratum = if with_erratum { Some(erratum_demo()?) } else { None };
    Ok(GradcheckReport { seed, trials, components, erratum })
}

/// Both derivative forms at (x=1, params (0.5, 1, 1)) against one central
/// finite difference of the forward value.
pub fn erratum_demo() -> Result<ErratumReport> {
    let p = RecaParams::new(0.5, 1.0, 1.0)?;
    let (x, h) = (1.0, FD_STEP);
    let fd = (p.value(x + h)? - p.value(x - h)?) / (2.0 * h);
    let corrected = p.input_grad(x)?;
    let literal = p.input_grad_uncorrected(x)?;
    Ok(ErratumReport {
        x,
        params: (p.alpha(), p.beta(), p.delta()),
        fd,
        corrected,
        literal,
        corrected_rel_err: (corrected - fd).abs() / fd.abs(),
        literal_rel_err: (literal - fd).abs() / fd.abs(),
    })
}

enum Part {
    Input,
    Params,
}

/// Draw x away from the kink so both probe points stay on one branch.
fn draw_x(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.gen_range(-5.0..=5.0);
        if x.abs() >= 1e-3 {
            return x;
        }
    }
}

/// Running maximum with a description of the case that set it.
struct Tracker {
    max: f64,
    worst: String,
}

impl Tracker {
    fn new() -> Self {
        Self { max: 0.0, worst: String::new() }
    }

    fn observe(&mut self, err: f64, detail: impl FnOnce() -> String) {
        if err > self.max {
            self.max = err;
            self.worst = detail();
        }
    }

    fn into_report(self, component: &str, tolerance: f64) -> ComponentReport {
        ComponentReport {
            component: component.into(),
            max_rel_err: self.max,
            tolerance,
            worst: self.worst,
        }
    }
}

fn case(what: &str, x: f64, params: &[f64], analytic: f64, numeric: f64) -> String {
    format!(
        "{what} at x={x:.6} params={params:?}: analytic {analytic:.12e} \
         vs numeric {numeric:.12e}"
    )
}

/// ReCA gradients under random parameters drawn over the full domain,
/// alpha in [0.1, 2], beta and delta in [0, 5].
///
/// Finite differences go through the raw parameter slice, which extends the
/// formula smoothly below zero, so the central difference is valid even when
/// an exponent sits exactly on its domain boundary.
fn reca_random_suite(seed: u64, trials: usize, part: Part) -> Result<ComponentReport> {
    let act = activations::ActivationKind::reca_default().build();
    let mut rng = seeded(seed);
    let h = FD_STEP;
    let mut track = Tracker::new();
    for trial in 0..trials {
        let x = draw_x(&mut rng);
        // The first trial pins both exponents to the boundary on purpose.
        let mut params = if trial == 0 {
            vec![0.5, 0.0, 0.0]
        } else {
            vec![
                rng.gen_range(0.1..=2.0),
                rng.gen_range(0.0..=5.0),
                rng.gen_range(0.0..=5.0),
            ]
        };
        match part {
            Part::Input => {
                let analytic = act.input_grad(x, &params);
                let numeric = (act.value(x + h, &params) - act.value(x - h, &params)) / (2.0 * h);
                track.observe(rel_err(analytic, numeric), || {
                    case("df/dx", x, &params, analytic, numeric)
                });
            }
            Part::Params => {
                let mut grads = vec![0.0; 3];
                act.param_grads(x, &params, &mut grads);
                for (i, name) in ["alpha", "beta", "delta"].iter().enumerate() {
                    let orig = params[i];
                    params[i] = orig + h;
                    let plus = act.value(x, &params);
                    params[i] = orig - h;
                    let minus = act.value(x, &params);
                    params[i] = orig;
                    let numeric = (plus - minus) / (2.0 * h);
                    track.observe(rel_err(grads[i], numeric), || {
                        case(&format!("df/d{name}"), x, &params, grads[i], numeric)
                    });
                }
            }
        }
    }
    let component = match part {
        Part::Input => "reca-input-grad",
        Part::Params => "reca-param-grads",
    };
    Ok(track.into_report(component, SCALAR_TOL))
}

/// At (0.5, 0, 0) the analytic slope must be exactly 1 on the positive axis.
fn relu_reduction_suite(seed: u64, trials: usize) -> Result<ComponentReport> {
    let act = activations::ActivationKind::reca_default().build();
    let params = [0.5, 0.0, 0.0];
    let mut rng = seeded(seed);
    let mut track = Tracker::new();
    for _ in 0..trials {
        let x: f64 = rng.gen_range(1e-6..=20.0);
        let g = act.input_grad(x, &params);
        track.observe((g - 1.0).abs(), || case("reduction slope", x, &params, g, 1.0));
    }
    Ok(track.into_report("reca-relu-reduction", 0.0))
}

/// Default-parameter check of one zoo member, input and parameter gradients.
fn zoo_suite(name: &str, seed: u64, trials: usize) -> Result<ComponentReport> {
    let act = activations::parse_kind(name)?.build();
    let mut params = act.init_params();
    let mut rng = seeded(seed ^ 0x5eed);
    let h = FD_STEP;
    let mut track = Tracker::new();
    for _ in 0..trials {
        let x = draw_x(&mut rng);
        let analytic = act.input_grad(x, &params);
        let numeric = (act.value(x + h, &params) - act.value(x - h, &params)) / (2.0 * h);
        track.observe(rel_err(analytic, numeric), || {
            case("df/dx", x, &params, analytic, numeric)
        });
        let mut grads = vec![0.0; act.param_count()];
        act.param_grads(x, &params, &mut grads);
        for i in 0..act.param_count() {
            let orig = params[i];
            params[i] = orig + h;
            let plus = act.value(x, &params);
            params[i] = orig - h;
            let minus = act.value(x, &params);
            params[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            track.observe(rel_err(grads[i], numeric), || {
                case(&format!("df/d{}", act.param_names()[i]), x, &params, grads[i], numeric)
            });
        }
    }
    Ok(track.into_report(&format!("scalar-{name}"), SCALAR_TOL))
}

fn dense_spec() -> ModelSpec {
    let kind = activations::ActivationKind::reca_default();
    ModelSpec {
        input_shape: vec![6],
        layers: vec![
            LayerSpec::Dense { out_features: 8, bias: true },
            LayerSpec::Activation { kind, granularity: Granularity::PerNeuron },
            LayerSpec::Dense { out_features: 4, bias: true },
            LayerSpec::Activation { kind, granularity: Granularity::PerChannel },
            LayerSpec::Dense { out_features: 3, bias: true },
        ],
        class_count: 3,
    }
}

fn conv_spec() -> ModelSpec {
    let kind = activations::ActivationKind::reca_default();
    ModelSpec {
        input_shape: vec![2, 6, 6],
        layers: vec![
            LayerSpec::Conv2d { out_channels: 4, kernel: 3, stride: 1, pad: 1, bias: false },
            LayerSpec::BatchNorm,
            LayerSpec::MaxPool { kernel: 2, stride: 2 },
            LayerSpec::Activation { kind, granularity: Granularity::PerChannel },
            LayerSpec::GlobalAvgPool,
            LayerSpec::Dense { out_features: 3, bias: true },
        ],
        class_count: 3,
    }
}

fn batch_loss<E: Element>(model: &mut Model<E>, x: &Tensor<E>, labels: &[u32]) -> Result<f64> {
    let logits = model.forward(x, Mode::Train)?;
    Ok(softmax_cross_entropy(&logits, labels)?.loss)
}

/// Check every parameter scalar and every input scalar of one model.
///
/// Analytic gradients come from the model in precision `E`; finite
/// differences always run in an f64 twin carrying bitwise copies of the
/// parameters (widening is exact), so probe arithmetic never drowns in f32
/// rounding. For `E = f64` the twin is simply an equal model.
fn composed_component<E: Element>(
    name: &str,
    spec: &ModelSpec,
    seed: u64,
) -> Result<ComponentReport> {
    let batch = 4;
    let mut model: Model<E> = Model::build(spec, &mut seeded(seed))?;
    let mut twin: Model<f64> = Model::build(spec, &mut seeded(seed))?;
    for (src, dst) in model.params_mut().iter().zip(twin.params_mut()) {
        for (s, d) in src.value.iter().zip(&mut dst.value) {
            *d = s.widen();
        }
    }

    let mut shape = vec![batch];
    shape.extend_from_slice(spec.input_shape.as_slice());
    let mut rng = seeded(seed ^ 0xfd);
    // Round the draws through E first so model and twin see the same points.
    let x64: Vec<f64> = (0..shape.iter().product::<usize>())
        .map(|_| E::narrow(rng.gen_range(-1.0..=1.0)).widen())
        .collect();
    let labels: Vec<u32> =
        (0..batch).map(|_| rng.gen_range(0..spec.class_count as u32)).collect();
    let x: Tensor<E> = Tensor::from_vec(&shape, x64.iter().map(|&v| E::narrow(v)).collect())?;
    let mut tx: Tensor<f64> = Tensor::from_vec(&shape, x64)?;

    model.zero_grads();
    let logits = model.forward(&x, Mode::Train)?;
    let out = softmax_cross_entropy(&logits, &labels)?;
    let d_input = model.backward(&out.grad)?;
    let analytic_params: Vec<Vec<f64>> = model
        .params_mut()
        .iter()
        .map(|p| p.grad.iter().map(|g| g.widen()).collect())
        .collect();

    let h = FD_STEP;
    let tol = if E::PRECISION == Precision::F32 { COMPOSED_F32_TOL } else { SCALAR_TOL };
    let mut track = Tracker::new();
    for (t, grads) in analytic_params.iter().enumerate() {
        for (i, &analytic) in grads.iter().enumerate() {
            let orig = twin.params_mut()[t].value[i];
            twin.params_mut()[t].value[i] = orig + h;
            let plus = batch_loss(&mut twin, &tx, &labels)?;
            twin.params_mut()[t].value[i] = orig - h;
            let minus = batch_loss(&mut twin, &tx, &labels)?;
            twin.params_mut()[t].value[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            track.observe(rel_err(analytic, numeric), || {
                format!(
                    "d loss/d param[{t}][{i}]: analytic {analytic:.12e} \
                     vs numeric {numeric:.12e}"
                )
            });
        }
    }
    for i in 0..tx.len() {
        let orig = tx.data()[i];
        tx.data_mut()[i] = orig + h;
        let plus = batch_loss(&mut twin, &tx, &labels)?;
        tx.data_mut()[i] = orig - h;
        let minus = batch_loss(&mut twin, &tx, &labels)?;
        tx.data_mut()[i] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        let analytic = d_input.data()[i].widen();
        track.observe(rel_err(analytic, numeric), || {
            format!(
                "d loss/d input[{i}] at {orig:.6}: analytic {analytic:.12e} \
                 vs numeric {numeric:.12e}"
            )
        });
    }
    Ok(track.into_report(name, tol))
}
