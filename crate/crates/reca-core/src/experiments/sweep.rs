//! Curve tables of f, f', and f'' over an input range for parameter grids.

use crate::activations::RecaParams;
use crate::error::{Error, Result};

/// Probe step for the numerical second derivative.
pub const SECOND_DIFF_STEP: f64 = 1e-4;

/// Default input grid: [-5, 5] sampled every 0.05.
pub const DEFAULT_X: (f64, f64, f64) = (-5.0, 5.0, 0.05);

/// One sampled point of one parameter curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub beta: f64,
    pub delta: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Parameter grid varying one exponent at a time: beta over 0..=5 in halves
/// with delta 0, then delta over 0.5..=5 with beta 0 (the origin row is
/// shared).
pub fn figure1_params() -> Vec<(f64, f64)> {
    let mut rows: Vec<(f64, f64)> = (0..=10).map(|i| (f64::from(i) * 0.5, 0.0)).collect();
    rows.extend((1..=10).map(|i| (0.0, f64::from(i) * 0.5)));
    rows
}

/// Parameter grid moving both exponents together: beta = delta over
/// 0.25..=2.00 in quarter steps, 8 rows.
pub fn figure2_params() -> Vec<(f64, f64)> {
    (1..=8).map(|i| (f64::from(i) * 0.25, f64::from(i) * 0.25)).collect()
}

/// Curve table over the cross product of `params` rows and the `x` grid.
///
/// `f` and `f'` are analytic; `f''` is a central difference of `f'` with
/// step [`SECOND_DIFF_STEP`] since only plotting data needs it.
pub fn sweep_curves(
    params: &[(f64, f64)],
    alpha: f64,
    x: (f64, f64, f64),
) -> Result<Vec<SweepRow>> {
    let (lo, hi, step) = x;
    if params.is_empty() {
        return Err(Error::Config("sweep needs at least one parameter row".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && lo <= hi) {
        return Err(Error::Config(format!("bad sweep grid ({lo}, {hi}, {step})")));
    }
    let count = ((hi - lo) / step).round() as usize + 1;
    let mut rows = Vec::with_capacity(params.len() * count);
    for &(beta, delta) in params {
        let p = RecaParams::new(alpha, beta, delta)?;
        for i in 0..count {
            let xi = lo + i as f64 * step;
            let h = SECOND_DIFF_STEP;
            let f2 = (p.input_grad(xi + h)? - p.input_grad(xi - h)?) / (2.0 * h);
            rows.push(SweepRow {
                x: xi,
                beta,
                delta,
                f: p.value(xi)?,
                f1: p.input_grad(xi)?,
                f2,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_grids_have_documented_sizes() {
        let fig1 = figure1_params();
        assert_eq!(fig1.len(), 21);
        assert_eq!(fig1[0], (0.0, 0.0));
        assert_eq!(fig1[10], (5.0, 0.0));
        assert_eq!(fig1[20], (0.0, 5.0));

        let fig2 = figure2_params();
        assert_eq!(fig2.len(), 8);
        assert_eq!(fig2[0], (0.25, 0.25));
        assert_eq!(fig2[7], (2.0, 2.0));
    }

    #[test]
    fn default_grid_hits_zero_exactly_and_gates_there() {
        let rows = sweep_curves(&figure1_params(), 0.5, DEFAULT_X).unwrap();
        assert_eq!(rows.len(), 21 * 201);
        let zeros: Vec<&SweepRow> = rows.iter().filter(|r| r.x == 0.0).collect();
        assert_eq!(zeros.len(), 21, "every parameter row owns one exact x=0 sample");
        for r in zeros {
            assert_eq!(r.f, 0.0);
        }
    }

    #[test]
    fn unit_exponent_cell_matches_frozen_values() {
        let rows = sweep_curves(&[(1.0, 1.0)], 0.5, (1.0, 1.0, 1.0)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].f - 0.8059278283039437).abs() < 1e-12);
        assert!((rows[0].f1 - 1.009227380328191).abs() < 1e-12);
        assert!(rows[0].f2.is_finite());
    }

    #[test]
    fn zero_exponents_have_zero_curvature_on_the_positive_axis() {
        let rows = sweep_curves(&[(0.0, 0.0)], 0.5, (0.1, 4.9, 0.2)).unwrap();
        for r in &rows {
            assert_eq!(r.f1, 1.0, "slope is the ReLU slope at x={}", r.x);
            assert_eq!(r.f2, 0.0, "flat slope differences cancel exactly");
        }
    }

    #[test]
    fn second_difference_tracks_the_analytic_trend() {
        // f' of (0.5, 1, 1) climbs through the transition, peaks near
        // x = 2.1, and decays toward the 2*alpha asymptote, so f'' is
        // positive before the peak and negative after it.
        let rows = sweep_curves(&[(1.0, 1.0)], 0.5, (0.5, 1.5, 0.5)).unwrap();
        for r in rows {
            assert!(r.f2 > 0.0, "x={} f2={}", r.x, r.f2);
        }
        let past_peak = sweep_curves(&[(1.0, 1.0)], 0.5, (3.0, 3.0, 1.0)).unwrap();
        assert!(past_peak[0].f2 < 0.0, "f2={}", past_peak[0].f2);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(sweep_curves(&[], 0.5, DEFAULT_X).is_err());
        assert!(sweep_curves(&[(1.0, 1.0)], 0.5, (1.0, -1.0, 0.05)).is_err());
        assert!(sweep_curves(&[(1.0, 1.0)], 0.5, (0.0, 1.0, 0.0)).is_err());
        assert!(sweep_curves(&[(-1.0, 0.0)], 0.5, DEFAULT_X).is_err());
    }
}
