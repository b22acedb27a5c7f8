use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{MagnitudeError, Result};
use crate::metric::{enumerate_index_sets, FiniteMetricSpace, IndexSetKind};
use crate::rational::{int, Q};
use crate::series::{GeneralizedSeries, SeriesTerm, Threshold};

/// Largest walk count `n (n-1)^K` accepted by [`path_expansion`].
pub const MAX_WALKS: u128 = 100_000_000;

/// Truncation of `m_X(q) = Σ_k (-1)^k Σ_{walks of k steps} q^{length}`.
#[derive(Clone, Debug)]
pub struct PathExpansion {
    /// All walk terms with exponent below `(K+1) ℓ_min`, which is exactly the
    /// part of `m_X` below that threshold.
    pub series: GeneralizedSeries,
    pub d_index_cutoff: usize,
    /// Exact signed contribution of the walks with exactly `k` steps, `k = 0..=K`.
    pub per_d_index: Vec<GeneralizedSeries>,
    n: usize,
}

impl PathExpansion {
    /// `Σ_{k ≤ K}` of the exact parts: every term of d-index at most `K`,
    /// regardless of exponent.
    pub fn polynomial(&self) -> GeneralizedSeries {
        self.restricted(self.d_index_cutoff)
    }

    /// Exact sum of the parts with d-index at most `k`.
    pub fn restricted(&self, k: usize) -> GeneralizedSeries {
        self.per_d_index
            .iter()
            .take(k + 1)
            .fold(GeneralizedSeries::zero(), |acc, p| acc.add(p))
    }

    /// Coefficient budget `3 n (n-1)^{K+1}` for the truncation error
    /// `budget · q^{(K+1) ℓ_min}`.
    ///
    /// `M(t) − m_{X,K}(q) = ±1ᵀ A^{K+1} w` with `A = Z − I` and `w` the
    /// magnitude weights, and the terms of `m_{X,K}` dropped at the threshold
    /// number fewer than `n (n-1)^{K+1}`; the bound therefore holds whenever
    /// every weight satisfies `|w_i| ≤ 2`.
    pub fn tail_budget(&self) -> f64 {
        3.0 * self.n as f64 * ((self.n - 1) as f64).powi(self.d_index_cutoff as i32 + 1)
    }
}

/// Walk expansion with d-index cutoff `K`.
///
/// Walk lengths are accumulated by dynamic programming over the walk end
/// point, which enumerates the same multiset of exponents as listing every
/// walk with consecutive points distinct.
pub fn path_expansion(space: &FiniteMetricSpace, k_max: usize) -> Result<PathExpansion> {
    let n = space.n();
    let walks = (n as u128).saturating_mul(((n - 1) as u128).saturating_pow(k_max as u32));
    if walks > MAX_WALKS {
        return Err(MagnitudeError::Capacity(format!(
            "{walks} walks exceed the limit of {MAX_WALKS}"
        )));
    }
    let mut level: Vec<BTreeMap<Q, BigInt>> = (0..n)
        .map(|_| BTreeMap::from([(Q::zero(), BigInt::one())]))
        .collect();
    let mut parts = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            let mut next: Vec<BTreeMap<Q, BigInt>> = vec![BTreeMap::new(); n];
            for (v, ends) in level.iter().enumerate() {
                for (u, slot) in next.iter_mut().enumerate() {
                    if u == v {
                        continue;
                    }
                    let step = space.d(v, u);
                    for (len, count) in ends {
                        *slot.entry(len + step).or_insert_with(BigInt::zero) += count;
                    }
                }
            }
            level = next;
        }
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let terms = level.iter().flat_map(|m| {
            m.iter()
                .map(|(e, c)| SeriesTerm::tagged(e.clone(), Q::from_integer(c * &sign), k))
        });
        parts.push(GeneralizedSeries::from_terms(terms.collect::<Vec<_>>(), Threshold::Infinite));
    }
    let threshold = Threshold::Finite(int(k_max as i64 + 1) * space.min_distance());
    let series = GeneralizedSeries::from_terms(
        parts.iter().flat_map(|p| p.terms().iter().cloned()).collect::<Vec<_>>(),
        threshold,
    );
    Ok(PathExpansion { series, d_index_cutoff: k_max, per_d_index: parts, n })
}

/// The six groups of terms of d-index at most 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct M3Parts {
    /// `n`
    pub constant: GeneralizedSeries,
    /// `-2 Σ_{i<j} q^{d_ij}`
    pub single: GeneralizedSeries,
    /// `2 Σ_{i<j} q^{2 d_ij}`
    pub double: GeneralizedSeries,
    /// `2 Σ` over open 2-paths
    pub open2path: GeneralizedSeries,
    /// `-6 Σ` over triangles
    pub triangle: GeneralizedSeries,
    /// `-2 Σ` over open 3-paths
    pub open3path: GeneralizedSeries,
}

impl M3Parts {
    pub fn sum(&self) -> GeneralizedSeries {
        [&self.single, &self.double, &self.open2path, &self.triangle, &self.open3path]
            .into_iter()
            .fold(self.constant.clone(), |acc, p| acc.add(p))
    }
}

/// `coef · Σ q^{Σ_edges d}` over index tuples, where `edges` lists which
/// consecutive index positions form an edge.
pub(crate) fn index_sum(
    space: &FiniteMetricSpace,
    kind: IndexSetKind,
    edges: &[(usize, usize)],
    coef: i64,
) -> GeneralizedSeries {
    let terms: Vec<SeriesTerm> = enumerate_index_sets(space.n(), kind)
        .into_iter()
        .map(|t| {
            let e = edges.iter().fold(Q::zero(), |acc, &(a, b)| acc + space.d(t[a], t[b]));
            SeriesTerm::tagged(e, int(coef), edges.len())
        })
        .collect();
    GeneralizedSeries::from_terms(terms, Threshold::Infinite)
}

/// `coef · Σ_{i<j} q^{p d_ij}`.
pub(crate) fn edge_power_sum(space: &FiniteMetricSpace, p: usize, coef: i64) -> GeneralizedSeries {
    let terms: Vec<SeriesTerm> = space
        .edge_vector()
        .into_iter()
        .map(|d| SeriesTerm::tagged(d * int(p as i64), int(coef), p))
        .collect();
    GeneralizedSeries::from_terms(terms, Threshold::Infinite)
}

pub fn m3_parts(space: &FiniteMetricSpace) -> Result<M3Parts> {
    if space.n() < 3 {
        return Err(MagnitudeError::WrongSize { expected: 3, got: space.n() });
    }
    Ok(M3Parts {
        constant: GeneralizedSeries::from_terms(
            [SeriesTerm::tagged(Q::zero(), int(space.n() as i64), 0)],
            Threshold::Infinite,
        ),
        single: edge_power_sum(space, 1, -2),
        double: edge_power_sum(space, 2, 2),
        open2path: index_sum(space, IndexSetKind::Open2Paths, &[(0, 1), (1, 2)], 2),
        triangle: index_sum(space, IndexSetKind::Triangles, &[(0, 1), (1, 2), (0, 2)], -6),
        open3path: index_sum(space, IndexSetKind::Open3Paths, &[(0, 1), (1, 2), (2, 3)], -2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::complete_space;
    use crate::metric::{random_metric_space, RandomSpaceOptions};
    use crate::rational::frac;

    #[test]
    fn two_points() {
        let s = FiniteMetricSpace::from_edge_lengths(2, &[int(1)]).unwrap();
        let p = path_expansion(&s, 4).unwrap();
        let want = GeneralizedSeries::from_pairs(
            [(0, 2), (1, -2), (2, 2), (3, -2), (4, 2)].map(|(e, c)| (int(e), int(c))),
            Threshold::Finite(int(5)),
        );
        assert_eq!(p.series, want);
        assert_eq!(p.polynomial(), GeneralizedSeries::polynomial(want.terms().iter().map(|t| (t.exponent.clone(), t.coefficient.clone()))));
    }

    #[test]
    fn cutoff_zero_is_cardinality() {
        let s = complete_space(5, &int(2)).unwrap();
        let p = path_expansion(&s, 0).unwrap();
        assert_eq!(p.series, GeneralizedSeries::from_pairs([(int(0), int(5))], Threshold::Finite(int(2))));
    }

    #[test]
    fn equilateral_within_tail_bound() {
        let s = complete_space(3, &int(1)).unwrap();
        let p = path_expansion(&s, 3).unwrap();
        let (v, bound) = p.series.eval_with_bound(&0.5f64, p.tail_budget());
        assert!((v - 1.5).abs() <= bound, "{v} vs 1.5, bound {bound}");
    }

    #[test]
    fn m3_examples() {
        let tri = complete_space(3, &int(1)).unwrap();
        let parts = m3_parts(&tri).unwrap();
        assert_eq!(parts.triangle, GeneralizedSeries::polynomial([(int(3), int(-6))]));
        let k4 = complete_space(4, &int(1)).unwrap();
        assert_eq!(m3_parts(&k4).unwrap().single, GeneralizedSeries::polynomial([(int(1), int(-12))]));
    }

    #[test]
    fn m3_parts_match_walks() {
        for seed in 0..10 {
            let n = 3 + (seed % 3) as usize;
            let s = random_metric_space(n, seed, &RandomSpaceOptions::default()).unwrap();
            let p = path_expansion(&s, 3).unwrap();
            assert_eq!(m3_parts(&s).unwrap().sum(), p.restricted(3));
        }
    }

    #[test]
    fn single_edge_coefficients_count_multiplicity() {
        let s = FiniteMetricSpace::from_edge_lengths(4, &[5, 5, 6, 7, 7, 7].map(int)).unwrap();
        let p = path_expansion(&s, 1).unwrap();
        assert_eq!(p.per_d_index[1].coefficient_at(&int(5)), int(-4));
        assert_eq!(p.per_d_index[1].coefficient_at(&int(7)), int(-6));
        assert!(p.per_d_index[1].terms().iter().all(|t| t.d_index == Some(1)));
    }

    #[test]
    fn threshold_uses_minimum_distance() {
        let s = FiniteMetricSpace::from_edge_lengths(3, &[frac(3, 2), int(2), int(2)]).unwrap();
        let p = path_expansion(&s, 2).unwrap();
        assert_eq!(p.series.exact_below(), &Threshold::Finite(frac(9, 2)));
        assert!(p.series.terms().iter().all(|t| t.exponent < frac(9, 2)));
    }

    #[test]
    fn capacity_guard() {
        let s = complete_space(8, &int(1)).unwrap();
        assert!(matches!(path_expansion(&s, 12), Err(MagnitudeError::Capacity(_))));
    }
}
