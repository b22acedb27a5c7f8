use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{MagnitudeError, Result};
use crate::rational::{factorial, Q};

/// Largest matrix handled by [`taylor_matrix_det_and_cofactor_sum`]; the
/// subset recursion needs `2^n` partial determinants.
pub const MAX_SERIES_MATRIX: usize = 16;

/// `c_0 + c_1 t + ... + c_K t^K + O(t^{K+1})` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorSeries {
    coeffs: Vec<Q>,
}

impl TaylorSeries {
    /// Series with the given coefficients; the order is `coeffs.len() - 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn new(coeffs: Vec<Q>) -> Self {
        assert!(!coeffs.is_empty(), "a Taylor series needs at least one coefficient");
        TaylorSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TaylorSeries { coeffs: vec![Q::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Q::one(), order)
    }

    pub fn constant(c: Q, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `exp(-d t)` to order `K`: coefficients `(-d)^k / k!`.
    pub fn exp_neg(d: &Q, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut power = Q::one();
        for k in 0..=order {
            coeffs.push(&power / Q::from_integer(factorial(k)));
            power = -(&power * d);
        }
        TaylorSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Q> {
        self.coeffs
    }

    /// Coefficient of `t^k`, zero beyond the order.
    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    /// Index of the first non-zero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Q::zero());
        TaylorSeries { coeffs }
    }

    pub fn scale(&self, c: &Q) -> Self {
        TaylorSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Divides by `t^k`; the order drops by `k`.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order() {
            return Err(MagnitudeError::Degenerate(format!(
                "cannot divide an order-{} series by t^{k}",
                self.order()
            )));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(MagnitudeError::Degenerate(format!("series is not divisible by t^{k}")));
        }
        Ok(TaylorSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    /// Quotient `self / other`, which needs a non-zero constant term in `other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let b0 = &other.coeffs[0];
        if b0.is_zero() {
            return Err(MagnitudeError::Degenerate(
                "series division by a series with zero constant term".into(),
            ));
        }
        let order = self.order().min(other.order());
        let mut out: Vec<Q> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc -= &other.coeffs[j] * &out[k - j];
            }
            out.push(acc / b0);
        }
        Ok(TaylorSeries { coeffs: out })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Q, &Q) -> Q) -> Self {
        let order = self.order().min(other.order());
        TaylorSeries {
            coeffs: (0..=order).map(|k| f(&self.coeffs[k], &other.coeffs[k])).collect(),
        }
    }
}

impl Add for &TaylorSeries {
    type Output = TaylorSeries;
    fn add(self, rhs: &TaylorSeries) -> TaylorSeries {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TaylorSeries {
    type Output = TaylorSeries;
    fn sub(self, rhs: &TaylorSeries) -> TaylorSeries {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &TaylorSeries {
    type Output = TaylorSeries;
    fn mul(self, rhs: &TaylorSeries) -> TaylorSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![Q::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        TaylorSeries { coeffs: out }
    }
}

impl Neg for &TaylorSeries {
    type Output = TaylorSeries;
    fn neg(self) -> TaylorSeries {
        TaylorSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.order() + 1)
    }
}

/// Determinant and sum of all cofactors of a square matrix of series.
///
/// The determinant uses division-free Laplace expansion memoised over column
/// subsets, so it never needs an invertible pivot (the similarity matrix at
/// `t = 0` is the all-ones matrix). The cofactor sum comes from the rank-one
/// update `det(M + 11ᵀ) = det(M) + Σ_ij cof_ij(M)`.
pub fn taylor_matrix_det_and_cofactor_sum(m: &[Vec<TaylorSeries>]) -> Result<(TaylorSeries, TaylorSeries)> {
    let n = m.len();
    if n == 0 {
        return Err(MagnitudeError::InvalidInput("empty matrix".into()));
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(MagnitudeError::InvalidInput("matrix is not square".into()));
    }
    let order = m.iter().flatten().map(TaylorSeries::order).min().unwrap_or(0);
    let m: Vec<Vec<TaylorSeries>> = m
        .iter()
        .map(|row| row.iter().map(|e| e.truncate(order)).collect())
        .collect();
    let det = series_det(&m)?;
    let one = TaylorSeries::one(order);
    let shifted: Vec<Vec<TaylorSeries>> =
        m.iter().map(|row| row.iter().map(|e| e + &one).collect()).collect();
    let cofactor_sum = &series_det(&shifted)? - &det;
    Ok((det, cofactor_sum))
}

/// Determinant of a square matrix of equal-order series.
pub fn series_det(m: &[Vec<TaylorSeries>]) -> Result<TaylorSeries> {
    let n = m.len();
    if n > MAX_SERIES_MATRIX {
        return Err(MagnitudeError::Capacity(format!(
            "series determinants are limited to {MAX_SERIES_MATRIX}x{MAX_SERIES_MATRIX}"
        )));
    }
    let order = m[0][0].order();
    // partial[mask] = determinant of rows 0..|mask| restricted to the columns in mask.
    let mut partial: Vec<Option<TaylorSeries>> = vec![None; 1 << n];
    partial[0] = Some(TaylorSeries::one(order));
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = TaylorSeries::zero(order);
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let rest = partial[mask & !(1 << col)].as_ref().expect("subsets are visited first");
            if rest.valuation().is_none() {
                continue;
            }
            let term = &m[row][col] * rest;
            // Sign of placing `row` at `col` after earlier rows took the larger columns.
            let inversions = (mask >> (col + 1)).count_ones();
            acc = if inversions % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        partial[mask] = Some(acc);
    }
    Ok(partial.pop().flatten().expect("full mask computed"))
}
