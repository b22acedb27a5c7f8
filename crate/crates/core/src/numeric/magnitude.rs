use std::fmt::Write as _;

use crate::error::{MagnitudeError, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::Q;

use super::real::{BigReal, Real};

/// Precisions at or below this use hardware doubles.
pub const DOUBLE_BITS: usize = 53;

#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeSample {
    pub t: f64,
    pub value: f64,
    /// 1-norm condition number of the similarity matrix.
    pub condition_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Samples sorted by `t`; scales where the similarity matrix was numerically
/// singular are listed separately rather than interpolated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleGrid {
    pub samples: Vec<MagnitudeSample>,
    pub singular: Vec<f64>,
}

/// `M(t)` and the condition estimate, in the arithmetic of `t`.
///
/// Solves `Z w = 1` by Gaussian elimination with partial pivoting and returns
/// `Σ w_i`. Fails with a singularity error when the condition number exceeds
/// the inverse rounding unit.
pub fn magnitude_value<R: Real>(space: &FiniteMetricSpace, t: &R) -> Result<(R, f64)> {
    let n = space.n();
    let z: Vec<Vec<R>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| t.from_q_like(space.d(i, j)).times(t).negate().exp())
                .collect()
        })
        .collect();
    let singular = || MagnitudeError::Singular { t: t.to_f64() };
    let lu = Lu::factor(z.clone()).ok_or_else(singular)?;
    let ones = vec![t.one_like(); n];
    let w = lu.solve(&ones);
    let value = w.iter().fold(t.zero_like(), |acc, x| acc.plus(x));

    // ||Z||_1 * ||Z^-1||_1 from the explicit inverse; n is small.
    let col_norm = |m: &dyn Fn(usize, usize) -> R| {
        (0..n)
            .map(|j| (0..n).fold(t.zero_like(), |acc, i| acc.plus(&m(i, j).abs())))
            .fold(t.zero_like(), |a, b| if b > a { b } else { a })
    };
    let z_norm = col_norm(&|i, j| z[i][j].clone());
    let inv_cols: Vec<Vec<R>> = (0..n)
        .map(|j| {
            let mut e = vec![t.zero_like(); n];
            e[j] = t.one_like();
            lu.solve(&e)
        })
        .collect();
    let inv_norm = col_norm(&|i, j| inv_cols[j][i].clone());
    let cond = z_norm.times(&inv_norm);
    if cond.times(&t.epsilon_like()) >= t.one_like() {
        return Err(singular());
    }
    Ok((value, cond.to_f64()))
}

/// The weighting `w` with `Z w = 1`, so that `M(t) = Σ w_i`.
pub fn magnitude_weights<R: Real>(space: &FiniteMetricSpace, t: &R) -> Result<Vec<R>> {
    let n = space.n();
    let z: Vec<Vec<R>> = (0..n)
        .map(|i| (0..n).map(|j| t.from_q_like(space.d(i, j)).times(t).negate().exp()).collect())
        .collect();
    let lu = Lu::factor(z).ok_or(MagnitudeError::Singular { t: t.to_f64() })?;
    Ok(lu.solve(&vec![t.one_like(); n]))
}

struct Lu<R> {
    a: Vec<Vec<R>>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    fn factor(mut a: Vec<Vec<R>>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).expect("finite entries"))?;
            if a[p][k].is_zero() {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k].divide(&a[k][k]);
                for j in k + 1..n {
                    let v = a[i][j].minus(&f.times(&a[k][j]));
                    a[i][j] = v;
                }
                a[i][k] = f;
            }
        }
        Some(Lu { a, perm })
    }

    fn solve(&self, b: &[R]) -> Vec<R> {
        let n = self.a.len();
        let mut y: Vec<R> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i].minus(&self.a[i][j].times(&y[j]));
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i].minus(&self.a[i][j].times(&y[j]));
            }
            y[i] = y[i].divide(&self.a[i][i]);
        }
        y
    }
}

/// `M(t)` at the requested mantissa width (doubles up to 53 bits).
pub fn magnitude_at(space: &FiniteMetricSpace, t: f64, precision_bits: usize) -> Result<MagnitudeSample> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(MagnitudeError::InvalidInput(format!("scale must be positive, got {t}")));
    }
    let (value, condition_estimate) = if precision_bits <= DOUBLE_BITS {
        magnitude_value(space, &t)?
    } else {
        let (v, c) = magnitude_value(space, &BigReal::from_f64(t, precision_bits))?;
        (v.to_f64(), c)
    };
    Ok(MagnitudeSample { t, value, condition_estimate })
}

/// The deterministic scale grid used by [`magnitude_grid`].
pub fn grid_points(t_min: f64, t_max: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(MagnitudeError::InvalidInput(format!(
            "need 0 < t_min < t_max, got {t_min} and {t_max}"
        )));
    }
    if count < 2 {
        return Err(MagnitudeError::InvalidInput("a grid needs at least two points".into()));
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                return t_min;
            }
            if i == count - 1 {
                return t_max;
            }
            let s = i as f64 / last;
            match spacing {
                Spacing::Linear => t_min + (t_max - t_min) * s,
                Spacing::Geometric => t_min * (t_max / t_min).powf(s),
            }
        })
        .collect())
}

pub fn magnitude_grid(
    space: &FiniteMetricSpace,
    t_min: f64,
    t_max: f64,
    count: usize,
    spacing: Spacing,
    precision_bits: usize,
) -> Result<SampleGrid> {
    let mut grid = SampleGrid::default();
    for t in grid_points(t_min, t_max, count, spacing)? {
        match magnitude_at(space, t, precision_bits) {
            Ok(s) => grid.samples.push(s),
            Err(MagnitudeError::Singular { t }) => grid.singular.push(t),
            Err(e) => return Err(e),
        }
    }
    Ok(grid)
}

/// `n / (1 + (n-1) e^{-t a})`, the magnitude of `n` points at mutual distance `a`.
pub fn magnitude_complete_graph(n: usize, a: &Q, t: f64) -> f64 {
    magnitude_complete_graph_real(n, a, &t)
}

pub fn magnitude_complete_graph_real<R: Real>(n: usize, a: &Q, t: &R) -> R {
    let q = t.times(&t.from_q_like(a)).negate().exp();
    let denom = t.one_like().plus(&t.from_f64_like((n - 1) as f64).times(&q));
    t.from_f64_like(n as f64).divide(&denom)
}

impl SampleGrid {
    /// `t,M,cond` rows with `decimals` digits after the point.
    pub fn to_csv(&self, decimals: usize) -> String {
        let mut out = String::from("t,M,cond\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.*},{:.*},{:.*e}",
                decimals, s.t, decimals, s.value, decimals.min(6), s.condition_estimate
            );
        }
        out
    }

    /// Parses the output of [`SampleGrid::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "t,M,cond" => {}
            Some((i, _)) => return Err(MagnitudeError::parse(i + 1, 1, "expected header 't,M,cond'")),
            None => return Err(MagnitudeError::parse(1, 1, "empty sample file")),
        }
        let mut samples: Vec<MagnitudeSample> = Vec::new();
        for (i, line) in lines {
            let mut vals = [0.0; 3];
            let mut col = 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(MagnitudeError::parse(i + 1, 1, "expected three comma-separated fields"));
            }
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f
                    .trim()
                    .parse()
                    .map_err(|_| MagnitudeError::parse(i + 1, col, format!("invalid number {f:?}")))?;
                col += f.len() + 1;
            }
            if vals[0] <= 0.0 || samples.last().is_some_and(|s| s.t >= vals[0]) {
                return Err(MagnitudeError::parse(i + 1, 1, "t must be positive and strictly increasing"));
            }
            samples.push(MagnitudeSample { t: vals[0], value: vals[1], condition_estimate: vals[2] });
        }
        Ok(SampleGrid { samples, singular: Vec::new() })
    }
}
