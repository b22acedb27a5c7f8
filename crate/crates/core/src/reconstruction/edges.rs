//! Edge lengths from the low-order terms of the formal magnitude.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{MagnitudeError, Result};
use crate::metric::EdgeLengthMultiset;
use crate::rational::{int, Q};
use crate::series::GeneralizedSeries;

/// Search nodes allowed per membership test.
const KNAPSACK_BUDGET: usize = 2_000_000;

/// The `n_edges` smallest positive exponents, each with multiplicity
/// `coefficient / −2`. Valid when every edge is shorter than twice every other,
/// so that no sum of two or more edges precedes the longest edge.
pub fn edges_from_series_svti(series: &GeneralizedSeries, n_edges: usize) -> Result<EdgeLengthMultiset> {
    let mut out: Vec<Q> = Vec::with_capacity(n_edges);
    for t in series.positive_terms() {
        if out.len() == n_edges {
            break;
        }
        let bad = || MagnitudeError::Multiplicity {
            exponent: t.exponent.to_string(),
            coefficient: t.coefficient.to_string(),
        };
        let c = &t.coefficient;
        if !c.is_integer() || !c.is_negative() || c.to_integer().is_odd() {
            return Err(bad());
        }
        let m = (-c.to_integer() / BigInt::from(2)).to_usize().ok_or_else(bad)?;
        if out.len() + m > n_edges {
            return Err(bad());
        }
        out.extend(std::iter::repeat_n(t.exponent.clone(), m));
    }
    if out.len() < n_edges {
        return Err(MagnitudeError::Exhaustion { found: out.len(), needed: n_edges });
    }
    let edges = EdgeLengthMultiset::new(out);
    if !edges.satisfies_svti() {
        return Err(MagnitudeError::SvtiViolation(format!(
            "recovered lengths span [{}, {}]",
            edges.min().expect("non-empty"),
            edges.max().expect("non-empty")
        )));
    }
    Ok(edges)
}

/// Generators of the exponent semigroup: `ℓ_1` is the smallest positive
/// exponent and `ℓ_{k+1}` the smallest exponent outside the ℕ-span of
/// `ℓ_1, …, ℓ_k`. Correct for rationally independent lengths, where every edge
/// is such a generator and no two edges coincide.
pub fn edges_from_series_ri(series: &GeneralizedSeries, n_edges: usize) -> Result<EdgeLengthMultiset> {
    let mut gens: Vec<Q> = Vec::with_capacity(n_edges);
    for t in series.positive_terms() {
        if gens.len() == n_edges {
            break;
        }
        if !in_span(&t.exponent, &gens)? {
            gens.push(t.exponent.clone());
        }
    }
    if gens.len() < n_edges {
        return Err(MagnitudeError::Exhaustion { found: gens.len(), needed: n_edges });
    }
    Ok(EdgeLengthMultiset::new(gens))
}

/// Whether `e = Σ k_i g_i` with non-negative integers `k_i`, by exhaustive
/// search over multipliers `k_i ≤ e / g_i`.
pub fn in_span(e: &Q, gens: &[Q]) -> Result<bool> {
    if e.is_zero() {
        return Ok(true);
    }
    if gens.is_empty() || e.is_negative() {
        return Ok(false);
    }
    let l = gens.iter().fold(e.denom().clone(), |acc, g| acc.lcm(g.denom()));
    let scale = |x: &Q| (x * Q::from_integer(l.clone())).to_integer();
    let mut g: Vec<BigInt> = gens.iter().map(scale).collect();
    g.sort_by(|a, b| b.cmp(a));
    let target = scale(e);
    let mut budget = KNAPSACK_BUDGET;
    let found = search(&target, &g, &mut budget);
    if budget == 0 {
        return Err(MagnitudeError::Capacity(format!(
            "membership test for {e} exceeded {KNAPSACK_BUDGET} search nodes"
        )));
    }
    Ok(found)
}

fn search(rem: &BigInt, g: &[BigInt], budget: &mut usize) -> bool {
    if rem.is_zero() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let Some((first, rest)) = g.split_first() else {
        return false;
    };
    if rest.is_empty() {
        return (rem % first).is_zero();
    }
    let mut k = rem / first;
    loop {
        if search(&(rem - &k * first), rest, budget) {
            return true;
        }
        if k.is_zero() || *budget == 0 {
            return false;
        }
        k -= BigInt::one();
    }
}

/// Smallest length iff it accounts for every edge, i.e. the first positive
/// term has coefficient `−2·C(n, 2)`.
pub fn detect_complete_graph(series: &GeneralizedSeries, n: usize) -> Option<Q> {
    let first = series.positive_terms().next()?;
    let edges = (n * n.saturating_sub(1) / 2) as i64;
    (first.coefficient == int(-2 * edges)).then(|| first.exponent.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{complete_space, tetrahedron};
    use crate::formal::path_expansion;
    use crate::metric::FiniteMetricSpace;
    use crate::rational::frac;
    use crate::series::Threshold;

    fn two_point_series() -> GeneralizedSeries {
        GeneralizedSeries::from_pairs(
            [(0, 2), (1, -2), (2, 2), (3, -2), (4, 2)].map(|(e, c)| (int(e), int(c))),
            Threshold::Finite(int(5)),
        )
    }

    #[test]
    fn svti_edges() {
        let s = tetrahedron(&(7..=12).map(int).collect::<Vec<_>>()).unwrap();
        let series = path_expansion(&s, 3).unwrap().series;
        let e = edges_from_series_svti(&series, 6).unwrap();
        assert_eq!(e.lengths(), (7..=12).map(int).collect::<Vec<_>>().as_slice());
        let k4 = path_expansion(&complete_space(4, &int(1)).unwrap(), 3).unwrap().series;
        assert_eq!(edges_from_series_svti(&k4, 6).unwrap().lengths(), vec![int(1); 6].as_slice());
    }

    #[test]
    fn svti_errors() {
        let odd = GeneralizedSeries::polynomial([(int(0), int(4)), (int(1), int(-3))]);
        assert!(matches!(edges_from_series_svti(&odd, 1), Err(MagnitudeError::Multiplicity { .. })));
        let wide = FiniteMetricSpace::from_edge_lengths(3, &[int(1), int(2), int(2)]).unwrap();
        let series = path_expansion(&wide, 3).unwrap().series;
        // 2 = 2·1 so the coefficient at 2 mixes lengths with a double step
        assert!(edges_from_series_svti(&series, 3).is_err());
        assert!(matches!(
            edges_from_series_svti(&two_point_series(), 3),
            Err(MagnitudeError::Multiplicity { .. })
        ));
    }

    #[test]
    fn ri_edges() {
        assert_eq!(edges_from_series_ri(&two_point_series(), 1).unwrap().lengths(), &[int(1)]);
        let l = int(1_000_000);
        let lengths: Vec<Q> = [1, 10, 100, 1000, 10000, 100000].iter().map(|d| &l + int(*d)).collect();
        let s = tetrahedron(&lengths).unwrap();
        let series = path_expansion(&s, 3).unwrap().series;
        assert_eq!(edges_from_series_ri(&series, 6).unwrap().lengths(), lengths.as_slice());
    }

    #[test]
    fn ri_exhaustion() {
        assert!(matches!(
            edges_from_series_ri(&two_point_series(), 2),
            Err(MagnitudeError::Exhaustion { found: 1, needed: 2 })
        ));
    }

    #[test]
    fn span_membership() {
        let g = [int(3), int(5)];
        assert!(in_span(&int(8), &g).unwrap());
        assert!(in_span(&int(9), &g).unwrap());
        assert!(!in_span(&int(7), &g).unwrap());
        assert!(in_span(&frac(7, 2), &[frac(1, 2)]).unwrap());
        assert!(!in_span(&frac(7, 3), &[frac(1, 2)]).unwrap());
    }

    #[test]
    fn complete_graph_detection() {
        let k4 = path_expansion(&complete_space(4, &int(1)).unwrap(), 2).unwrap().series;
        assert_eq!(detect_complete_graph(&k4, 4), Some(int(1)));
        let t = tetrahedron(&(7..=12).map(int).collect::<Vec<_>>()).unwrap();
        assert_eq!(detect_complete_graph(&path_expansion(&t, 2).unwrap().series, 4), None);
        let k2 = path_expansion(&complete_space(2, &int(5)).unwrap(), 2).unwrap().series;
        assert_eq!(detect_complete_graph(&k2, 2), Some(int(5)));
        assert_eq!(detect_complete_graph(&GeneralizedSeries::constant(int(3)), 3), None);
    }
}
