//! Peeling exponential terms `a e^{-α t}` off sampled magnitude values.
//!
//! Each round fits the slowest remaining decay on the largest-`t` window in
//! which the residual still sits well above the accumulated error of the
//! terms removed so far, then subtracts the fitted term everywhere.

use crate::error::{MagnitudeError, Result};
use crate::numeric::Real;

#[derive(Clone, Debug)]
pub struct ExtractionOptions {
    pub max_terms: usize,
    /// Stop once every residual is at most this in absolute value.
    pub tol: f64,
    /// Largest tolerated difference between the slopes fitted on the two
    /// halves of a window.
    pub slope_tol: f64,
    /// Points per fitting window.
    pub window: usize,
    /// A residual is usable only when it exceeds the error floor by this factor.
    pub safety: f64,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions { max_terms: 8, tol: 1e-30, slope_tol: 1e-6, window: 8, safety: 1e6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    /// `(α_k, a_k)` in order of discovery, i.e. increasing `α`.
    pub pairs: Vec<(f64, f64)>,
    /// Largest absolute residual left over the schedule.
    pub residual: f64,
    /// The same quantity right after each peel.
    pub step_residuals: Vec<f64>,
}

impl ExtractionResult {
    /// `alpha<TAB>a<TAB>residual` lines with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("alpha\ta\tresidual\n");
        for ((a, c), r) in self.pairs.iter().zip(&self.step_residuals) {
            out.push_str(&format!("{a:.12}\t{c:.12}\t{r:e}\n"));
        }
        out
    }
}

/// `t_min, t_min·ratio, …` up to `t_max`, with `t_max` itself as the last point.
pub fn geometric_schedule(t_min: f64, t_max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && ratio > 1.0) {
        return Err(MagnitudeError::InvalidInput(format!(
            "need 0 < t_min < t_max and ratio > 1, got {t_min}, {t_max}, {ratio}"
        )));
    }
    let mut out = Vec::new();
    let mut t = t_min;
    while t < t_max {
        out.push(t);
        t *= ratio;
    }
    out.push(t_max);
    Ok(out)
}

struct Fitted<R> {
    alpha: R,
    a: R,
    rel_err: f64,
    slope_err: f64,
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit<R: Real>(x: &[R], y: &[R]) -> (R, R) {
    let zero = x[0].zero_like();
    let k = x[0].from_f64_like(x.len() as f64);
    let mx = x.iter().fold(zero.clone(), |a, v| a.plus(v)).divide(&k);
    let my = y.iter().fold(zero.clone(), |a, v| a.plus(v)).divide(&k);
    let (mut sxy, mut sxx) = (zero.clone(), zero);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi.minus(&mx);
        sxy = sxy.plus(&dx.times(&yi.minus(&my)));
        sxx = sxx.plus(&dx.times(&dx));
    }
    let slope = sxy.divide(&sxx);
    let icpt = my.minus(&slope.times(&mx));
    (slope, icpt)
}

/// Recovers `M(t) ≈ Σ a_k e^{-α_k t}` from `sampler` evaluated on `schedule`.
///
/// Each fitted term is only accurate to the contamination by the next term at
/// the low end of its window, so the usable range for the following term ends
/// roughly where the previous window began. With ratio 1.15 and 8-point
/// windows the range shrinks about threefold per term: separating `m` terms
/// with unit gaps needs `t_max` near `3^m · 20`, and enough bits to resolve
/// `e^{-α t_max}` against the sample values.
pub fn extract_series_from_samples<R, F>(
    sampler: F,
    schedule: &[R],
    options: &ExtractionOptions,
) -> Result<ExtractionResult>
where
    R: Real,
    F: Fn(&R) -> Result<R>,
{
    let w = options.window;
    if w < 4 || schedule.len() < w {
        return Err(MagnitudeError::InvalidInput(format!(
            "need a window of at least 4 points and at least that many samples (window {w}, {} samples)",
            schedule.len()
        )));
    }
    let values: Vec<R> = schedule.iter().map(&sampler).collect::<Result<_>>()?;
    let eps = values[0].epsilon_like().to_f64().max(f64::MIN_POSITIVE);
    let ts: Vec<f64> = schedule.iter().map(Real::to_f64).collect();
    // noise floor in log space: ln of the absolute error bound at each point
    let base: Vec<f64> = values.iter().map(|v| ln_abs(v) + (1e3 * eps).ln()).collect();
    let mut residual = values.clone();
    let mut fitted: Vec<Fitted<R>> = Vec::new();
    let mut pairs = Vec::new();
    let mut step_residuals = Vec::new();
    while pairs.len() < options.max_terms {
        if residual.iter().all(|r| r.abs().to_f64() <= options.tol) {
            break;
        }
        let usable: Vec<usize> = (0..schedule.len())
            .filter(|&i| {
                let floor = log_floor(base[i], ts[i], &fitted);
                ln_abs(&residual[i]) > floor + options.safety.ln()
            })
            .collect();
        if usable.len() < w {
            break;
        }
        let idx = &usable[usable.len() - w..];
        let sign = residual[idx[0]] > residual[idx[0]].zero_like();
        if idx.iter().any(|&i| (residual[i] > residual[i].zero_like()) != sign) {
            return Err(MagnitudeError::NonConvergence(format!(
                "residual changes sign inside the window at term {}",
                pairs.len()
            )));
        }
        let xs: Vec<R> = idx.iter().map(|&i| schedule[i].clone()).collect();
        let ys: Vec<R> = idx.iter().map(|&i| residual[i].abs().ln().negate()).collect();
        let (alpha, _) = linear_fit(&xs, &ys);
        let half = w / 2;
        let (lo, _) = linear_fit(&xs[..half + 1], &ys[..half + 1]);
        let (hi, _) = linear_fit(&xs[half - 1..], &ys[half - 1..]);
        let slope_err = lo.minus(&hi).abs().to_f64();
        if slope_err > options.slope_tol {
            return Err(MagnitudeError::NonConvergence(format!(
                "decay rate of term {} is not stable across the window (half-window slopes differ by {slope_err:e})",
                pairs.len()
            )));
        }
        let scaled: Vec<R> = idx
            .iter()
            .map(|&i| schedule[i].times(&alpha).exp().times(&residual[i]))
            .collect();
        let k = alpha.from_f64_like(w as f64);
        let a = scaled.iter().fold(alpha.zero_like(), |s, v| s.plus(v)).divide(&k);
        let spread = scaled
            .iter()
            .map(|v| v.minus(&a).abs().to_f64())
            .fold(0.0f64, f64::max);
        let rel_err = spread / a.abs().to_f64().max(f64::MIN_POSITIVE) + 1e3 * eps;
        for (r, t) in residual.iter_mut().zip(schedule) {
            *r = r.minus(&a.times(&t.times(&alpha).negate().exp()));
        }
        pairs.push((alpha.to_f64(), a.to_f64()));
        step_residuals.push(max_abs(&residual));
        fitted.push(Fitted { alpha, a, rel_err, slope_err: slope_err + 1e3 * eps });
    }
    Ok(ExtractionResult { pairs, residual: max_abs(&residual), step_residuals })
}

fn max_abs<R: Real>(v: &[R]) -> f64 {
    v.iter().map(|r| r.abs().to_f64()).fold(0.0, f64::max)
}

fn ln_abs<R: Real>(v: &R) -> f64 {
    if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        v.abs().ln().to_f64()
    }
}

/// `ln(noise + Σ |a_j| e^{-α_j t} (rel_err_j + t·slope_err_j))`, computed in
/// log space so that it stays finite far below the `f64` range.
fn log_floor<R: Real>(base: f64, t: f64, fitted: &[Fitted<R>]) -> f64 {
    let mut logs = vec![base];
    for f in fitted {
        let err = f.rel_err + t * f.slope_err;
        logs.push(ln_abs(&f.a) - f.alpha.to_f64() * t + err.ln());
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::complete_space;
    use crate::numeric::{magnitude_value, BigReal};
    use crate::rational::int;

    fn schedule(bits: usize, t_max: f64) -> Vec<BigReal> {
        geometric_schedule(0.5, t_max, 1.15)
            .unwrap()
            .into_iter()
            .map(|t| BigReal::from_f64(t, bits))
            .collect()
    }

    fn close(got: &[(f64, f64)], want: &[(f64, f64)], da: f64, dc: f64) {
        assert!(got.len() >= want.len(), "{got:?}");
        for ((a, c), (wa, wc)) in got.iter().zip(want) {
            assert!((a - wa).abs() < da && (c - wc).abs() < dc, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn two_points_from_magnitude() {
        let s = complete_space(2, &int(1)).unwrap();
        let opts = ExtractionOptions { max_terms: 3, ..Default::default() };
        let r = extract_series_from_samples(
            |t: &BigReal| magnitude_value(&s, t).map(|v| v.0),
            &schedule(4096, 1500.0),
            &opts,
        )
        .unwrap();
        assert_eq!(r.pairs.len(), 3);
        close(&r.pairs, &[(0.0, 2.0), (1.0, -2.0), (2.0, 2.0)], 1e-6, 1e-4);
    }

    #[test]
    fn equilateral_triangle_from_magnitude() {
        let s = complete_space(3, &int(1)).unwrap();
        let opts = ExtractionOptions { max_terms: 3, ..Default::default() };
        let r = extract_series_from_samples(
            |t: &BigReal| magnitude_value(&s, t).map(|v| v.0),
            &schedule(4096, 1500.0),
            &opts,
        )
        .unwrap();
        close(&r.pairs, &[(0.0, 3.0), (1.0, -6.0), (2.0, 12.0)], 1e-6, 1e-4);
    }

    #[test]
    fn constant_sampler_stops_after_one_term() {
        let r = extract_series_from_samples(
            |t: &BigReal| Ok(t.from_f64_like(4.0)),
            &schedule(256, 100.0),
            &ExtractionOptions::default(),
        )
        .unwrap();
        assert_eq!(r.pairs, vec![(0.0, 4.0)]);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.to_tsv(), "alpha\ta\tresidual\n0.000000000000\t4.000000000000\t0e0\n");
    }

    #[test]
    fn close_exponents_are_separated() {
        // 1 − 3 e^{-t} + 5 e^{-1.25 t}
        let f = |t: &BigReal| {
            let e1 = t.negate().exp();
            let e2 = t.times(&t.from_f64_like(-1.25)).exp();
            Ok(t.one_like().minus(&e1.times(&t.from_f64_like(3.0))).plus(&e2.times(&t.from_f64_like(5.0))))
        };
        let opts = ExtractionOptions { max_terms: 3, ..Default::default() };
        let r = extract_series_from_samples(f, &schedule(8192, 4000.0), &opts).unwrap();
        close(&r.pairs, &[(0.0, 1.0), (1.0, -3.0), (1.25, 5.0)], 1e-6, 1e-4);
    }

    #[test]
    fn double_precision_separates_only_the_first_term() {
        let s = complete_space(2, &int(1)).unwrap();
        let ts: Vec<f64> = geometric_schedule(0.5, 40.0, 1.15).unwrap();
        let sampler = |t: &f64| magnitude_value(&s, t).map(|v| v.0);
        let one = ExtractionOptions { max_terms: 1, ..Default::default() };
        let r = extract_series_from_samples(sampler, &ts, &one).unwrap();
        close(&r.pairs, &[(0.0, 2.0)], 1e-6, 1e-6);
        // the second decay is not resolvable in doubles: reported, not guessed
        let more = extract_series_from_samples(sampler, &ts, &ExtractionOptions::default());
        assert!(matches!(more, Err(MagnitudeError::NonConvergence(_))) || more.unwrap().pairs.len() < 3);
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(geometric_schedule(0.0, 1.0, 1.1).is_err());
        assert!(geometric_schedule(1.0, 2.0, 1.0).is_err());
        assert!(extract_series_from_samples(|t: &f64| Ok(*t), &[1.0, 2.0], &ExtractionOptions::default()).is_err());
    }
}
