//! Numerical ground truth for the activation zoo.
//!
//! Reference values were computed independently with 40-digit arithmetic
//! and are frozen here; the analytic code must reproduce them, and finite
//! differences must agree with the analytic gradients. If an edit to the
//! activation math changes any of these, the edit is wrong.

use rand::Rng;
use reca_core::activations::{
    parse_kind, ActivationKind, RecaParams, ALPHA_MIN, REGISTRY, SELU_ALPHA, SELU_LAMBDA,
};
use reca_core::rng::seeded;

/// f(1) at (α, β, δ) = (0.5, 1, 1).
const RECA_F_AT_1: f64 = 0.8059278283039437;
/// df/dx at the same point.
const RECA_F1_AT_1: f64 = 1.009227380328191;
/// The uncorrected derivative variant at the same point.
const RECA_F1_UNCORRECTED_AT_1: f64 = 0.6062634661762193;
/// (df/dα, df/dβ, df/dδ) at the same point.
const RECA_DA_AT_1: f64 = 1.6118556566078873;
const RECA_DB_AT_1: f64 = -0.05589891062009728;
const RECA_DD_AT_1: f64 = -0.11450632200815436;
/// ELU(-1) = e^{-1} - 1.
const ELU_AT_NEG_1: f64 = -0.6321205588285577;
/// d/dx x·σ(x) at x = 1.
const SWISH_GRAD_AT_1: f64 = 0.9276705118714867;

/// Relative error with a unit floor: |a - n| / max(|a|, |n|, 1). The floor
/// keeps the metric meaningful where the true gradient is near zero and
/// finite differences bottom out in rounding noise.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Central finite difference with step 1e-6.
fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn reca(alpha: f64, beta: f64, delta: f64) -> RecaParams {
    RecaParams::new(alpha, beta, delta).unwrap()
}

#[test]
fn forward_matches_frozen_oracle() {
    let p = reca(0.5, 1.0, 1.0);
    assert!((p.value(1.0).unwrap() - RECA_F_AT_1).abs() < 1e-15);
    assert_eq!(p.value(-3.0).unwrap(), 0.0);
    assert_eq!(p.value(0.0).unwrap(), 0.0);
}

#[test]
fn forward_rejects_non_finite_input() {
    let p = RecaParams::default();
    assert!(p.value(f64::NAN).is_err());
    assert!(p.value(f64::INFINITY).is_err());
    assert!(p.input_grad(f64::NAN).is_err());
    assert!(p.param_grads(f64::NEG_INFINITY).is_err());
}

#[test]
fn invalid_params_are_rejected_at_construction() {
    assert!(RecaParams::new(0.0, 0.0, 0.0).is_err());
    assert!(RecaParams::new(ALPHA_MIN / 2.0, 1.0, 1.0).is_err());
    assert!(RecaParams::new(0.5, -0.01, 0.0).is_err());
    assert!(RecaParams::new(0.5, 0.0, -0.01).is_err());
    assert!(RecaParams::new(f64::NAN, 0.0, 0.0).is_err());
    assert!(RecaParams::new(ALPHA_MIN, 0.0, 0.0).is_ok());
}

#[test]
fn reduces_to_relu_bitwise_at_the_relu_point() {
    let p = RecaParams::relu();
    assert_eq!(p.value(2.0).unwrap(), 2.0);
    assert_eq!(p.value(1e-300).unwrap(), 1e-300);
    assert_eq!(p.value(12345.6789).unwrap(), 12345.6789);
    let mut rng = seeded(11);
    for _ in 0..100_000 {
        let x: f64 = rng.gen_range(-20.0..20.0);
        let expect = if x > 0.0 { x } else { 0.0 };
        let got = p.value(x).unwrap();
        assert!(
            got == expect && got.to_bits() == expect.to_bits(),
            "relu reduction broke at x = {x}: got {got:e}"
        );
    }
}

#[test]
fn output_is_nonnegative_and_zero_on_the_negative_axis() {
    let mut rng = seeded(12);
    for _ in 0..50_000 {
        let p = reca(
            rng.gen_range(ALPHA_MIN..2.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
        );
        let x: f64 = rng.gen_range(-30.0..30.0);
        let v = p.value(x).unwrap();
        if x <= 0.0 {
            assert_eq!(v, 0.0, "nonzero output {v} at x = {x} with {p:?}");
        } else {
            assert!(v >= 0.0, "negative output {v} at x = {x} with {p:?}");
        }
    }
}

#[test]
fn monotone_nondecreasing_for_valid_params() {
    let mut rng = seeded(13);
    for _ in 0..100_000 {
        let p = reca(
            rng.gen_range(ALPHA_MIN..3.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
        );
        let a: f64 = rng.gen_range(-10.0..10.0);
        let b: f64 = rng.gen_range(-10.0..10.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (flo, fhi) = (p.value(lo).unwrap(), p.value(hi).unwrap());
        assert!(
            fhi >= flo,
            "monotonicity broke: f({hi}) = {fhi} < f({lo}) = {flo} with {p:?}"
        );
    }
}

#[test]
fn input_grad_matches_frozen_oracle() {
    let p = reca(0.5, 1.0, 1.0);
    assert!((p.input_grad(1.0).unwrap() - RECA_F1_AT_1).abs() < 1e-15);
    // At the ReLU point the slope is exactly 1 on the positive branch.
    assert_eq!(RecaParams::relu().input_grad(5.0).unwrap(), 1.0);
    assert_eq!(RecaParams::relu().input_grad(0.0).unwrap(), 0.0);
    assert_eq!(p.input_grad(-2.0).unwrap(), 0.0);
}

#[test]
fn input_grad_agrees_with_finite_differences() {
    let mut rng = seeded(14);
    let mut worst = 0.0f64;
    for _ in 0..20_000 {
        let p = reca(
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
        );
        let mut x: f64 = rng.gen_range(-5.0..5.0);
        if x.abs() < 1e-3 {
            x = x.signum() * 1e-3; // keep the difference stencil off the kink
        }
        let analytic = p.input_grad(x).unwrap();
        let numeric = central_diff(|t| p.value(t).unwrap(), x);
        worst = worst.max(rel_err(analytic, numeric));
    }
    assert!(worst < 1e-6, "worst input-grad relative error {worst:e}");
}

#[test]
fn param_grads_match_frozen_oracle() {
    let g = reca(0.5, 1.0, 1.0).param_grads(1.0).unwrap();
    assert!((g.alpha - RECA_DA_AT_1).abs() < 1e-15);
    assert!((g.beta - RECA_DB_AT_1).abs() < 1e-15);
    assert!((g.delta - RECA_DD_AT_1).abs() < 1e-15);
    // Cross-check df/dβ against its closed form α·x·σ(2x)^β·ln σ(2x) built
    // from library functions only.
    let s2 = 1.0 / (1.0 + (-2.0f64).exp());
    let by_hand = 0.5 * 1.0 * s2 * s2.ln();
    assert!((g.beta - by_hand).abs() < 1e-12);

    let zero = reca(0.5, 1.0, 1.0).param_grads(-1.0).unwrap();
    assert_eq!((zero.alpha, zero.beta, zero.delta), (0.0, 0.0, 0.0));
}

#[test]
fn param_grads_agree_with_finite_differences() {
    let mut rng = seeded(15);
    let mut worst = 0.0f64;
    for _ in 0..20_000 {
        let (a, b, d) = (
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.01..5.0),
            rng.gen_range(0.01..5.0),
        );
        let x: f64 = rng.gen_range(1e-3..5.0);
        let g = reca(a, b, d).param_grads(x).unwrap();
        let na = central_diff(|t| reca(t, b, d).value(x).unwrap(), a);
        let nb = central_diff(|t| reca(a, t, d).value(x).unwrap(), b);
        let nd = central_diff(|t| reca(a, b, t).value(x).unwrap(), d);
        worst = worst
            .max(rel_err(g.alpha, na))
            .max(rel_err(g.beta, nb))
            .max(rel_err(g.delta, nd));
    }
    assert!(worst < 1e-6, "worst param-grad relative error {worst:e}");
}

#[test]
fn uncorrected_derivative_variant_fails_finite_differences() {
    let p = reca(0.5, 1.0, 1.0);
    let bad = p.input_grad_uncorrected(1.0).unwrap();
    assert!((bad - RECA_F1_UNCORRECTED_AT_1).abs() < 1e-15);
    let numeric = central_diff(|t| p.value(t).unwrap(), 1.0);
    assert!(
        rel_err(bad, numeric) > 0.10,
        "the uncorrected variant should be visibly wrong, rel err {:e}",
        rel_err(bad, numeric)
    );
    assert!(rel_err(p.input_grad(1.0).unwrap(), numeric) < 1e-6);
}

#[test]
fn slope_approaches_2_alpha_far_from_the_origin() {
    for &alpha in &[0.25, 0.5, 1.0, 2.0] {
        for &beta in &[0.0, 0.5, 1.0, 5.0] {
            for &delta in &[0.0, 0.5, 1.0, 5.0] {
                let p = reca(alpha, beta, delta);
                let secant = p.value(40.0).unwrap() / 40.0;
                assert!(
                    (secant - 2.0 * alpha).abs() < 1e-6,
                    "secant slope {secant} vs {} for {p:?}",
                    2.0 * alpha
                );
                let grad = p.input_grad(40.0).unwrap();
                assert!((grad - 2.0 * alpha).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn tanh_component_saturates_twice_as_fast_as_sigmoid() {
    // Residuals r2 = 1 - σ(2x) and r1 = 1 - σ(x) measured over unit steps
    // of x must shrink at log-rates -2 and -1 respectively.
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    for x in 5..15 {
        let x = x as f64;
        let rate2 = ((1.0 - sig(2.0 * (x + 1.0))) / (1.0 - sig(2.0 * x))).ln();
        let rate1 = ((1.0 - sig(x + 1.0)) / (1.0 - sig(x))).ln();
        // Second-order corrections are O(e^{-x}), so 0.01 is loose enough
        // at x = 5 yet still cleanly separates rate -2 from rate -1.
        assert!((rate2 + 2.0).abs() < 0.01, "σ(2x) residual log-rate {rate2} at x = {x}");
        assert!((rate1 + 1.0).abs() < 0.01, "σ(x) residual log-rate {rate1} at x = {x}");
    }
}

#[test]
fn baseline_values_match_frozen_points() {
    assert_eq!(ActivationKind::Relu.value(-3.0).unwrap(), 0.0);
    assert_eq!(ActivationKind::Relu.value(2.5).unwrap(), 2.5);
    let lrelu = parse_kind("lrelu").unwrap();
    assert!((lrelu.value(-2.0).unwrap() + 0.02).abs() < 1e-18);
    assert_eq!(lrelu.value(3.0).unwrap(), 3.0);
    assert_eq!(ActivationKind::Swish.value(0.0).unwrap(), 0.0);
    let elu = parse_kind("elu").unwrap();
    assert!((elu.value(-1.0).unwrap() - ELU_AT_NEG_1).abs() < 1e-15);
    assert_eq!(parse_kind("selu").unwrap().value(1.0).unwrap(), SELU_LAMBDA);
    assert!((parse_kind("selu").unwrap().value(-30.0).unwrap() + SELU_LAMBDA * SELU_ALPHA).abs() < 1e-10);
    assert_eq!(ActivationKind::Sigmoid.value(0.0).unwrap(), 0.5);
    assert_eq!(ActivationKind::Tanh.value(0.0).unwrap(), 0.0);
}

#[test]
fn baseline_grads_use_the_left_branch_at_kinks() {
    assert_eq!(ActivationKind::Relu.input_grad(3.0).unwrap(), 1.0);
    assert_eq!(ActivationKind::Relu.input_grad(0.0).unwrap(), 0.0);
    assert_eq!(parse_kind("lrelu:0.2").unwrap().input_grad(0.0).unwrap(), 0.2);
    assert_eq!(parse_kind("prelu:0.25").unwrap().input_grad(0.0).unwrap(), 0.25);
    // ELU and SELU at 0 take the x ≤ 0 branch too: slope α (resp. λα).
    assert_eq!(parse_kind("elu:0.7").unwrap().input_grad(0.0).unwrap(), 0.7);
    assert_eq!(parse_kind("selu").unwrap().input_grad(0.0).unwrap(), SELU_LAMBDA * SELU_ALPHA);
    assert!((ActivationKind::Swish.input_grad(1.0).unwrap() - SWISH_GRAD_AT_1).abs() < 1e-15);
}

#[test]
fn prelu_slope_gradient_is_x_on_the_negative_branch() {
    let prelu = parse_kind("prelu").unwrap().build();
    let params = prelu.init_params();
    let mut g = [0.0];
    prelu.param_grads(-2.0, &params, &mut g);
    assert_eq!(g[0], -2.0);
    prelu.param_grads(3.0, &params, &mut g);
    assert_eq!(g[0], 0.0);
    prelu.param_grads(0.0, &params, &mut g);
    assert_eq!(g[0], 0.0);
}

#[test]
fn every_baseline_gradient_agrees_with_finite_differences() {
    let mut rng = seeded(16);
    for entry in REGISTRY {
        let kind = parse_kind(entry.name).unwrap();
        let act = kind.build();
        let params = act.init_params();
        let mut worst = 0.0f64;
        for _ in 0..2_000 {
            let mut x: f64 = rng.gen_range(-5.0..5.0);
            if x.abs() < 1e-3 {
                x = x.signum() * 1e-3;
            }
            let analytic = act.input_grad(x, &params);
            let numeric = central_diff(|t| act.value(t, &params), x);
            worst = worst.max(rel_err(analytic, numeric));
        }
        assert!(worst < 1e-6, "{}: worst input-grad rel err {worst:e}", entry.name);

        // Learnable parameters, where present.
        let k = act.param_count();
        if k > 0 {
            let mut g = vec![0.0; k];
            for _ in 0..2_000 {
                let mut x: f64 = rng.gen_range(-5.0..5.0);
                if x.abs() < 1e-3 {
                    x = x.signum() * 1e-3;
                }
                act.param_grads(x, &params, &mut g);
                for i in 0..k {
                    let numeric = central_diff(
                        |t| {
                            let mut shifted = params.clone();
                            shifted[i] = t;
                            act.value(x, &shifted)
                        },
                        params[i],
                    );
                    worst = worst.max(rel_err(g[i], numeric));
                }
            }
            assert!(worst < 1e-6, "{}: worst param-grad rel err {worst:e}", entry.name);
        }
    }
}

#[test]
fn fused_backward_matches_the_separate_entry_points() {
    let mut rng = seeded(17);
    for entry in REGISTRY {
        let act = parse_kind(entry.name).unwrap().build();
        let params = act.init_params();
        let k = act.param_count();
        for _ in 0..5_000 {
            let x: f64 = rng.gen_range(-6.0..6.0);
            let mut fused = vec![0.0; k];
            let mut separate = vec![0.0; k];
            let dx = act.backward(x, &params, &mut fused);
            act.param_grads(x, &params, &mut separate);
            assert_eq!(dx, act.input_grad(x, &params), "{} at x = {x}", entry.name);
            assert_eq!(fused, separate, "{} at x = {x}", entry.name);
        }
    }
}
