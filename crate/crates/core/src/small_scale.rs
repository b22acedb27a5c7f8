//! Exact small-`t` asymptotics of the magnitude function.
//!
//! `M(t) = Mu(t) / Md(t)` where `Md = det Z(t)` and `Mu` is the sum of the
//! cofactors of `Z(t)`. Both vanish to order `n - 1` at `t = 0` with equal
//! leading coefficients, which makes the derivatives of `M` at `0+` exact
//! rationals.

use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{MagnitudeError, Result};
use crate::fixtures::k32_space;
use crate::metric::{enumerate_index_sets, FiniteMetricSpace, IndexSetKind};
use crate::rational::{factorial, int, Q};
use crate::series::{taylor_matrix_det_and_cofactor_sum, TaylorSeries};

/// Taylor coefficients `ν_k` of the cofactor sum and `δ_k` of the determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorCoefficients {
    pub nu: Vec<Q>,
    pub delta: Vec<Q>,
    pub order: usize,
}

impl TaylorCoefficients {
    /// `ν_0..ν_{n-2}` and `δ_0..δ_{n-2}` vanish and `ν_{n-1} = δ_{n-1}`.
    pub fn satisfies_leading_identities(&self, n: usize) -> bool {
        let k = (n - 1).min(self.order + 1);
        self.nu[..k].iter().all(Zero::is_zero)
            && self.delta[..k].iter().all(Zero::is_zero)
            && (n - 1 > self.order || self.nu[n - 1] == self.delta[n - 1])
    }

    /// `k<TAB>nu<TAB>delta` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("k\tnu\tdelta\n");
        for k in 0..=self.order {
            let _ = writeln!(out, "{k}\t{}\t{}", self.nu[k], self.delta[k]);
        }
        out
    }
}

/// Limits at `0+` of the first three derivatives of `M(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsymptoticDerivatives {
    pub m1: Q,
    pub m2: Q,
    pub m3: Q,
}

/// Default truncation order for `n` points.
pub fn default_order(n: usize) -> usize {
    n + 3
}

fn similarity_series(space: &FiniteMetricSpace, order: usize) -> Vec<Vec<TaylorSeries>> {
    let n = space.n();
    (0..n)
        .map(|i| (0..n).map(|j| TaylorSeries::exp_neg(space.d(i, j), order)).collect())
        .collect()
}

pub fn compute_nu_delta(space: &FiniteMetricSpace, order: usize) -> Result<TaylorCoefficients> {
    let (det, cof) = taylor_matrix_det_and_cofactor_sum(&similarity_series(space, order))?;
    Ok(TaylorCoefficients { nu: cof.into_coeffs(), delta: det.into_coeffs(), order })
}

/// Exact `M_1, M_2, M_3` from the quotient `Mu / Md` after removing the common
/// factor `t^{n-1}`: `M_λ = λ! [t^λ] (Mu / Md)`.
pub fn derivative_limits(space: &FiniteMetricSpace) -> Result<AsymptoticDerivatives> {
    let n = space.n();
    let c = compute_nu_delta(space, default_order(n))?;
    derivative_limits_from(&c, n)
}

pub fn derivative_limits_from(c: &TaylorCoefficients, n: usize) -> Result<AsymptoticDerivatives> {
    if c.order < n + 2 {
        return Err(MagnitudeError::InvalidInput(format!(
            "order {} is too small for three derivatives of a {n}-point space",
            c.order
        )));
    }
    if c.delta[n - 1].is_zero() {
        return Err(MagnitudeError::Degenerate(format!(
            "delta_{} vanishes, so the small-scale limits are not determined",
            n - 1
        )));
    }
    let u = TaylorSeries::new(c.nu.clone()).shift_down(n - 1)?;
    let d = TaylorSeries::new(c.delta.clone()).shift_down(n - 1)?;
    let m = u.div(&d)?;
    let derivative = |k: usize| m.coeff(k) * Q::from_integer(factorial(k));
    Ok(AsymptoticDerivatives { m1: derivative(1), m2: derivative(2), m3: derivative(3) })
}

fn expect_n(space: &FiniteMetricSpace, n: usize) -> Result<()> {
    if space.n() != n {
        return Err(MagnitudeError::WrongSize { expected: n, got: space.n() });
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `δ_2 = ½ Σ (d_jk + d_ik − d_ij)(d_ik + d_ij − d_jk)` over the orderings of three points.
pub fn delta2_closed(space: &FiniteMetricSpace) -> Result<Q> {
    expect_n(space, 3)?;
    let d = |a: usize, b: usize| space.d(a, b).clone();
    let sum = permutations(3).into_iter().fold(Q::zero(), |acc, p| {
        let (i, j, k) = (p[0], p[1], p[2]);
        acc + (d(j, k) + d(i, k) - d(i, j)) * (d(i, k) + d(i, j) - d(j, k))
    });
    Ok(sum / int(2))
}

/// `δ_3 = (1/6) Σ (d_ik + d_jk − d_ij)(d_il + d_kl − d_ik)(d_ij + d_jl − d_il)`
/// over the orderings of four points.
pub fn delta3_closed(space: &FiniteMetricSpace) -> Result<Q> {
    expect_n(space, 4)?;
    let d = |a: usize, b: usize| space.d(a, b).clone();
    let sum = permutations(4).into_iter().fold(Q::zero(), |acc, p| {
        let (i, j, k, l) = (p[0], p[1], p[2], p[3]);
        acc + (d(i, k) + d(j, k) - d(i, j)) * (d(i, l) + d(k, l) - d(i, k)) * (d(i, j) + d(j, l) - d(i, l))
    });
    Ok(sum / int(6))
}

/// `δ_3` as the sum over disjoint pairs, triangles and simple open 3-paths.
pub fn delta3_by_index_sets(space: &FiniteMetricSpace) -> Result<Q> {
    expect_n(space, 4)?;
    let d = |a: usize, b: usize| space.d(a, b).clone();
    let mut acc = Q::zero();
    for t in enumerate_index_sets(4, IndexSetKind::OppositePairs) {
        let (x, y) = (d(t[0], t[1]), d(t[2], t[3]));
        acc -= int(2) * (&x * &x * &y + &x * &y * &y);
    }
    for t in enumerate_index_sets(4, IndexSetKind::Triangles) {
        acc -= int(2) * d(t[0], t[1]) * d(t[1], t[2]) * d(t[0], t[2]);
    }
    for t in enumerate_index_sets(4, IndexSetKind::SimpleOpen3Paths) {
        acc += int(2) * d(t[0], t[1]) * d(t[1], t[2]) * d(t[2], t[3]);
    }
    Ok(acc)
}

/// Numerator of the four-point closed form for `M_1`; symmetric under `d14 ↔ d23`.
pub fn m1_n4_numerator(space: &FiniteMetricSpace) -> Result<Q> {
    expect_n(space, 4)?;
    let d = |a: usize, b: usize| space.d(a - 1, b - 1).clone();
    let (d12, d13, d14, d23, d24, d34) = (d(1, 2), d(1, 3), d(1, 4), d(2, 3), d(2, 4), d(3, 4));
    Ok(-(&d12 * &d12 * &d34 * &d34) - &d13 * &d13 * &d24 * &d24 - &d14 * &d14 * &d23 * &d23
        + int(2) * &d13 * &d14 * &d23 * &d24
        + int(2) * &d12 * &d14 * &d23 * &d34
        + int(2) * &d12 * &d13 * &d24 * &d34)
}

/// Closed form of `M_1` for four points (numerator over `δ_3`).
///
/// The numerator is positive under the strict virtual triangle inequality;
/// outside it only a vanishing `δ_3` is reported as an error.
pub fn m1_n4_closed(space: &FiniteMetricSpace) -> Result<Q> {
    let num = m1_n4_numerator(space)?;
    let den = delta3_by_index_sets(space)?;
    if den.is_zero() {
        return Err(MagnitudeError::Degenerate("delta_3 vanishes".into()));
    }
    Ok(num / den)
}

/// The space with `d14` and `d23` exchanged (1-based labels). The result may
/// fail the triangle inequality, so it is built without validation.
pub fn swap_d14_d23(space: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    expect_n(space, 4)?;
    let mut rows = space.rows().to_vec();
    let (a, b) = (space.d(0, 3).clone(), space.d(1, 2).clone());
    rows[0][3] = b.clone();
    rows[3][0] = b;
    rows[1][2] = a.clone();
    rows[2][1] = a;
    FiniteMetricSpace::from_rows(rows)
}

/// `2(d12 − d34)(d13 − d24)(d14 − d23)`.
pub fn delta3_swap_product(space: &FiniteMetricSpace) -> Result<Q> {
    expect_n(space, 4)?;
    let d = |a: usize, b: usize| space.d(a - 1, b - 1).clone();
    Ok(int(2) * (d(1, 2) - d(3, 4)) * (d(1, 3) - d(2, 4)) * (d(1, 4) - d(2, 3)))
}

/// `δ_3(X) − δ_3(X with d14 ↔ d23)`, computed from the series of both spaces
/// and checked against [`delta3_swap_product`].
pub fn delta3_swap_difference(space: &FiniteMetricSpace) -> Result<Q> {
    let swapped = swap_d14_d23(space)?;
    let direct = compute_nu_delta(space, 3)?.delta[3].clone() - compute_nu_delta(&swapped, 3)?.delta[3].clone();
    let product = delta3_swap_product(space)?;
    if direct != product {
        return Err(MagnitudeError::Inconsistency(format!(
            "delta_3 swap difference {direct} disagrees with the product formula {product}"
        )));
    }
    Ok(direct)
}

/// `δ_4` of `K_{3,2}` plus an edge of length `ell`, checked against `−4ℓ(3ℓ − 4)`.
pub fn delta4_k32(ell: &Q) -> Result<Q> {
    let space = k32_space(ell)?;
    let delta4 = compute_nu_delta(&space, 4)?.delta[4].clone();
    let expected = -int(4) * ell * (int(3) * ell - int(4));
    if delta4 != expected {
        return Err(MagnitudeError::Inconsistency(format!(
            "delta_4 = {delta4}, expected {expected}"
        )));
    }
    Ok(delta4)
}

/// `−a² − b² − c² + 2ab + 2bc + 2ca`, which equals `δ_2` of the triangle.
fn triangle_denominator(a: &Q, b: &Q, c: &Q) -> Q {
    -(a * a) - b * b - c * c + int(2) * (a * b + b * c + c * a)
}

/// `M_1 = 2abc / δ_2` for a triangle with sides `a, b, c`.
pub fn triangle_m1_closed(a: &Q, b: &Q, c: &Q) -> Q {
    int(2) * a * b * c / triangle_denominator(a, b, c)
}

/// `M_2 = 2abc(b + c − a)(c + a − b)(a + b − c) / δ_2²`.
pub fn triangle_m2_closed(a: &Q, b: &Q, c: &Q) -> Q {
    let den = triangle_denominator(a, b, c);
    int(2) * a * b * c * (b + c - a) * (c + a - b) * (a + b - c) / (&den * &den)
}

/// `M_0 = ν_{n-1} / δ_{n-1}`, which is 1 whenever `δ_{n-1} ≠ 0`.
pub fn m0(c: &TaylorCoefficients, n: usize) -> Option<Q> {
    let d = &c.delta[n - 1];
    (!d.is_zero()).then(|| &c.nu[n - 1] / d)
}

/// Convenience: exact `M_1 = (ν_n − δ_n) / δ_{n−1}`.
pub fn m1_from_coefficients(c: &TaylorCoefficients, n: usize) -> Result<Q> {
    if c.order < n {
        return Err(MagnitudeError::InvalidInput("order too small for M1".into()));
    }
    let d = &c.delta[n - 1];
    if d.is_zero() {
        return Err(MagnitudeError::Degenerate(format!("delta_{} vanishes", n - 1)));
    }
    Ok((&c.nu[n] - &c.delta[n]) / d)
}
