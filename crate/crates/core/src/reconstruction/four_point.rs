//! Four points under the strict virtual triangle inequality.
//!
//! Edge lengths come from the d-index-1 terms; the three sums of opposite
//! edges from the first negative terms of `f`; the pairing of opposite edges
//! from the sums (and, when two pairings realise them, from the low exponents
//! of `g`); and the last binary choice, exchanging `d14` and `d23`, from `M_1`.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{MagnitudeError, Result};
use crate::formal::{f_series, g_series, path_expansion};
use crate::metric::{are_isometric, EdgeLengthMultiset, FiniteMetricSpace};
use crate::rational::{int, Q};
use crate::series::{GeneralizedSeries, Threshold};
use crate::small_scale::{delta3_swap_product, m1_n4_closed};

use super::edges::edges_from_series_svti;

/// Which of the two situations produced the opposite sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OppositeCase {
    /// At most one opposite sum coincides with a `2a + b` exponent.
    Case1,
    /// Two do; the sums are `a+b, 2a+b, a+2b` for the first pair.
    Case2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OppositeSums {
    /// Sorted.
    pub sums: Vec<Q>,
    pub case: OppositeCase,
}

/// How the pairing of opposite edges was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CombChoice {
    Unique,
    Comb1,
    Comb2,
    /// Forward comparison of every candidate configuration.
    BruteForce,
}

impl fmt::Display for CombChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombChoice::Unique => "unique",
            CombChoice::Comb1 => "comb1",
            CombChoice::Comb2 => "comb2",
            CombChoice::BruteForce => "case2-bruteforce",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OppositePairing {
    /// Each pair sorted, pairs sorted.
    pub pairs: [(Q, Q); 3],
    pub sums: Vec<Q>,
    /// `2a + b` and `a + 2b` for every pair, sorted.
    pub cubic_sums: Vec<Q>,
    pub comb_choice: CombChoice,
}

impl OppositePairing {
    fn new(pairs: [(Q, Q); 3], comb_choice: CombChoice) -> Self {
        let mut sums: Vec<Q> = pairs.iter().map(|(a, b)| a + b).collect();
        sums.sort();
        let mut cubic_sums: Vec<Q> = pairs
            .iter()
            .flat_map(|(a, b)| [a * int(2) + b, a + b * int(2)])
            .collect();
        cubic_sums.sort();
        OppositePairing { pairs, sums, cubic_sums, comb_choice }
    }

    /// The two configurations with this pairing: `d12, d34` from the first
    /// pair, `d13, d24` from the second, `d14, d23` from the third in either order.
    pub fn configurations(&self) -> Result<[FiniteMetricSpace; 2]> {
        let [(a, b), (c, d), (e, f)] = &self.pairs;
        let build = |d14: &Q, d23: &Q| {
            FiniteMetricSpace::from_edge_lengths(4, &[a.clone(), c.clone(), d14.clone(), d23.clone(), d.clone(), b.clone()])
        };
        Ok([build(e, f)?, build(f, e)?])
    }
}

fn canonical(mut pairs: Vec<(Q, Q)>) -> [(Q, Q); 3] {
    for p in pairs.iter_mut() {
        if p.0 > p.1 {
            std::mem::swap(&mut p.0, &mut p.1);
        }
    }
    pairs.sort();
    [pairs[0].clone(), pairs[1].clone(), pairs[2].clone()]
}

fn lengths6(edges: &EdgeLengthMultiset) -> Result<&[Q]> {
    match edges.len() {
        6 => Ok(edges.lengths()),
        got => Err(MagnitudeError::WrongSize { expected: 6, got }),
    }
}

fn coefficient_if_known(s: &GeneralizedSeries, e: &Q) -> Option<Q> {
    s.exact_below().covers(e).then(|| s.coefficient_at(e))
}

/// The three sums `d_ij + d_kl` over pairs of opposite edges, read off `f`.
pub fn n4_opposite_sums(f: &GeneralizedSeries, edges: &EdgeLengthMultiset) -> Result<OppositeSums> {
    let l = lengths6(edges)?;
    let total = l.iter().fold(Q::zero(), |a, x| a + x);
    let first = f
        .terms()
        .first()
        .ok_or_else(|| MagnitudeError::CaseResolution("f has no terms below its threshold".into()))?;

    if first.coefficient == int(-2) {
        for i in 0..6 {
            for j in 0..6 {
                if i == j || &l[i] + &l[j] != first.exponent {
                    continue;
                }
                let (a, b) = (&l[i], &l[j]);
                let rest: Vec<usize> = (0..6).filter(|&k| k != i && k != j).collect();
                for (g, d, la, mu) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2), (2, 3, 0, 1), (1, 3, 0, 2), (1, 2, 0, 3)] {
                    let (g, d, la, mu) = (&l[rest[g]], &l[rest[d]], &l[rest[la]], &l[rest[mu]]);
                    if g + d != a * int(2) + b || la + mu != a + b * int(2) {
                        continue;
                    }
                    let blocked = [g + la, g + mu, d + la, d + mu].iter().any(|x| {
                        coefficient_if_known(f, x).is_none_or(|c| c == int(-2) || c == int(-4))
                    });
                    if !blocked {
                        let mut sums = vec![a + b, a * int(2) + b, a + b * int(2)];
                        sums.sort();
                        return Ok(OppositeSums { sums, case: OppositeCase::Case2 });
                    }
                }
            }
        }
    }

    let mut found: Vec<Q> = Vec::with_capacity(2);
    for t in f.terms().iter().filter(|t| t.coefficient.is_negative()) {
        let copies = (-&t.coefficient / int(2)).floor().to_integer().to_usize().unwrap_or(0);
        for _ in 0..copies {
            if found.len() < 2 {
                found.push(t.exponent.clone());
            }
        }
        if found.len() == 2 {
            break;
        }
    }
    if found.len() < 2 {
        return Err(MagnitudeError::CaseResolution(
            "fewer than two opposite sums survive in f below its threshold".into(),
        ));
    }
    let third = total - &found[0] - &found[1];
    if !third.is_positive() {
        return Err(MagnitudeError::CaseResolution(format!("derived third opposite sum {third} is not positive")));
    }
    found.push(third);
    found.sort();
    Ok(OppositeSums { sums: found, case: OppositeCase::Case1 })
}

/// The 15 perfect matchings of six positions.
fn matchings() -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::with_capacity(15);
    for a in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != a).collect();
        for b in 1..4 {
            let r: Vec<usize> = (1..4).filter(|&x| x != b).collect();
            out.push([(0, a), (rest[0], rest[b]), (rest[r[0]], rest[r[1]])]);
        }
    }
    out
}

/// Distinct pairings (as multisets of length pairs) whose sums are `sums`.
pub fn realising_pairings(edges: &EdgeLengthMultiset, sums: &[Q]) -> Result<Vec<[(Q, Q); 3]>> {
    let l = lengths6(edges)?;
    let mut want = sums.to_vec();
    want.sort();
    let mut out: Vec<[(Q, Q); 3]> = Vec::new();
    for m in matchings() {
        let pairs = canonical(m.iter().map(|&(i, j)| (l[i].clone(), l[j].clone())).collect());
        let mut s: Vec<Q> = pairs.iter().map(|(a, b)| a + b).collect();
        s.sort();
        if s == want && !out.contains(&pairs) {
            out.push(pairs);
        }
    }
    Ok(out)
}

/// Smallest d-index cutoff whose exponent threshold reaches `t`.
fn cutoff_reaching(t: &Threshold, l_min: &Q) -> usize {
    match t.finite() {
        None => 3,
        Some(t) => ((t / l_min).ceil().to_integer().to_usize().unwrap_or(3)).max(4) - 1,
    }
}

fn forward_g(space: &FiniteMetricSpace, sums: &[Q], threshold: &Threshold) -> Result<GeneralizedSeries> {
    let k = cutoff_reaching(threshold, &space.min_distance());
    let m = path_expansion(space, k)?.series;
    Ok(g_series(&f_series(&m, &space.edge_vector())?, sums))
}

/// Decides which pairing of opposite edges realises `sums`.
pub fn n4_opposite_combination(
    g: &GeneralizedSeries,
    edges: &EdgeLengthMultiset,
    sums: &[Q],
) -> Result<OppositePairing> {
    let l = lengths6(edges)?;
    let cands = realising_pairings(edges, sums)?;
    match cands.len() {
        0 => return Err(MagnitudeError::CaseResolution("no pairing of the edges realises the opposite sums".into())),
        1 => return Ok(OppositePairing::new(cands[0].clone(), CombChoice::Unique)),
        _ => {}
    }
    let pair = |i: usize, j: usize| (l[i].clone(), l[j].clone());
    let comb1 = canonical(vec![pair(0, 4), pair(2, 3), pair(1, 5)]);
    let comb2 = canonical(vec![pair(1, 3), pair(0, 5), pair(2, 4)]);
    if cands.len() == 2 && cands.contains(&comb1) && cands.contains(&comb2) {
        let base = &l[0] + &l[1] + &l[2];
        let u = &l[3] - &l[2];
        let is_comb1 = if u.is_positive() {
            let next = g
                .terms()
                .iter()
                .find(|t| t.exponent > base)
                .ok_or_else(|| MagnitudeError::Undecided("g has no exponent above l1+l2+l3 below its threshold".into()))?;
            next.exponent == &l[0] * int(2) + &l[4]
        } else {
            coefficient_if_known(g, &base)
                .ok_or_else(|| MagnitudeError::Undecided("g is not exact at l1+l2+l3".into()))?
                .is_zero()
        };
        return Ok(if is_comb1 {
            OppositePairing::new(comb1, CombChoice::Comb1)
        } else {
            OppositePairing::new(comb2, CombChoice::Comb2)
        });
    }
    brute_force(g, cands, sums)
}

fn brute_force(g: &GeneralizedSeries, cands: Vec<[(Q, Q); 3]>, sums: &[Q]) -> Result<OppositePairing> {
    let mut hits: Vec<(OppositePairing, FiniteMetricSpace)> = Vec::new();
    for c in cands {
        let p = OppositePairing::new(c, CombChoice::BruteForce);
        for space in p.configurations()? {
            if forward_g(&space, sums, g.exact_below())?.agrees_with(g) {
                hits.push((p.clone(), space));
            }
        }
    }
    let Some((first, space)) = hits.first() else {
        return Err(MagnitudeError::Mismatch("no candidate configuration reproduces g".into()));
    };
    for (_, other) in &hits[1..] {
        if are_isometric(space, other)?.is_none() {
            return Err(MagnitudeError::Undecided(
                "non-isometric configurations reproduce g below its threshold".into(),
            ));
        }
    }
    Ok(first.clone())
}

/// Picks between the two configurations of `pairing`.
///
/// They differ by exchanging `d14` and `d23`; when
/// `2(d12 − d34)(d13 − d24)(d14 − d23)` vanishes they are isometric, and
/// otherwise exactly one has the given `M_1`. Returns the space and whether
/// the product vanished.
pub fn n4_resolve_swap(pairing: &OppositePairing, m1: &Q) -> Result<(FiniteMetricSpace, bool)> {
    let [a, b] = pairing.configurations()?;
    if delta3_swap_product(&a)?.is_zero() {
        return Ok((a, true));
    }
    let (ma, mb) = (m1_n4_closed(&a)?, m1_n4_closed(&b)?);
    if &ma == m1 {
        Ok((a, false))
    } else if &mb == m1 {
        Ok((b, false))
    } else {
        Err(MagnitudeError::Mismatch(format!(
            "M1 = {m1} matches neither configuration ({ma} or {mb})"
        )))
    }
}

/// Without `M_1`: the configuration whose truncated series matches, when only one does.
fn resolve_swap_by_series(pairing: &OppositePairing, series: &GeneralizedSeries) -> Result<(FiniteMetricSpace, bool)> {
    let [a, b] = pairing.configurations()?;
    if delta3_swap_product(&a)?.is_zero() {
        return Ok((a, true));
    }
    let k = cutoff_reaching(series.exact_below(), &a.min_distance());
    let fa = path_expansion(&a, k)?.series.agrees_with(series);
    let fb = path_expansion(&b, k)?.series.agrees_with(series);
    match (fa, fb) {
        (true, false) => Ok((a, false)),
        (false, true) => Ok((b, false)),
        (false, false) => Err(MagnitudeError::Mismatch("neither configuration reproduces the series".into())),
        (true, true) => Err(MagnitudeError::Undecided(
            "both configurations share the truncated series; M1 is needed".into(),
        )),
    }
}

/// Trace of the four-point pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N4Trace {
    pub edges: EdgeLengthMultiset,
    pub opposite: OppositeSums,
    pub pairing: OppositePairing,
    pub swap_product_vanished: bool,
}

/// Full pipeline from a truncated series (exact below at least `4 ℓ_min`) and,
/// optionally, the exact `M_1`.
pub fn reconstruct_n4_svti(series: &GeneralizedSeries, m1: Option<&Q>) -> Result<(FiniteMetricSpace, N4Trace)> {
    let edges = edges_from_series_svti(series, 6)?;
    let need = Threshold::Finite(edges.min().expect("six edges") * int(4));
    if series.exact_below() < &need {
        return Err(MagnitudeError::InvalidInput(format!(
            "the series must be exact below 4·l_min = {need}, got {}",
            series.exact_below()
        )));
    }
    let f = f_series(series, edges.lengths())?;
    let opposite = n4_opposite_sums(&f, &edges)?;
    let g = g_series(&f, &opposite.sums);
    let pairing = n4_opposite_combination(&g, &edges, &opposite.sums)?;
    let (space, vanished) = match m1 {
        Some(m1) => n4_resolve_swap(&pairing, m1)?,
        None => resolve_swap_by_series(&pairing, series)?,
    };
    Ok((space, N4Trace { edges, opposite, pairing, swap_product_vanished: vanished }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{complete_space, tetrahedron};
    use crate::metric::{random_metric_space, RandomSpaceOptions};

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn run(space: &FiniteMetricSpace) -> (FiniteMetricSpace, N4Trace) {
        let series = path_expansion(space, 3).unwrap().series;
        let m1 = m1_n4_closed(space).unwrap();
        reconstruct_n4_svti(&series, Some(&m1)).unwrap()
    }

    #[test]
    fn matchings_are_perfect_and_distinct() {
        let m = matchings();
        assert_eq!(m.len(), 15);
        for x in &m {
            let mut all: Vec<usize> = x.iter().flat_map(|&(a, b)| [a, b]).collect();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn balanced_labelling() {
        // d12 = 7, d34 = 12, d13 = 8, d24 = 11, d14 = 9, d23 = 10
        let s = tetrahedron(&ints(&[7, 8, 9, 10, 11, 12])).unwrap();
        let series = path_expansion(&s, 3).unwrap().series;
        let edges = edges_from_series_svti(&series, 6).unwrap();
        let f = f_series(&series, edges.lengths()).unwrap();
        assert_eq!(f.terms()[0].coefficient, int(-6));
        let opp = n4_opposite_sums(&f, &edges).unwrap();
        assert_eq!(opp, OppositeSums { sums: ints(&[19, 19, 19]), case: OppositeCase::Case1 });
        let (back, trace) = run(&s);
        assert!(are_isometric(&s, &back).unwrap().is_some());
        assert!(!trace.swap_product_vanished);
    }

    #[test]
    fn swap_candidates_have_different_m1() {
        let s = tetrahedron(&ints(&[7, 8, 9, 10, 11, 12])).unwrap();
        let p = OppositePairing::new(canonical(vec![(int(7), int(12)), (int(8), int(11)), (int(9), int(10))]), CombChoice::Unique);
        let [a, b] = p.configurations().unwrap();
        assert_ne!(m1_n4_closed(&a).unwrap(), m1_n4_closed(&b).unwrap());
        let (got, vanished) = n4_resolve_swap(&p, &m1_n4_closed(&s).unwrap()).unwrap();
        assert!(!vanished);
        assert!(are_isometric(&got, &s).unwrap().is_some());
        let other = crate::small_scale::swap_d14_d23(&got).unwrap();
        let rejected = if got == a { &b } else { &a };
        assert_eq!(m1_n4_closed(&other).unwrap(), m1_n4_closed(rejected).unwrap());
        assert!(matches!(n4_resolve_swap(&p, &int(1)), Err(MagnitudeError::Mismatch(_))));
    }

    #[test]
    fn vanishing_swap_product() {
        let p = OppositePairing::new(canonical(vec![(int(10), int(10)), (int(8), int(11)), (int(9), int(12))]), CombChoice::Unique);
        let (_, vanished) = n4_resolve_swap(&p, &int(0)).unwrap();
        assert!(vanished);
    }

    #[test]
    fn regular_tetrahedron() {
        let s = complete_space(4, &int(1)).unwrap();
        let (back, trace) = run(&s);
        assert_eq!(back, s);
        assert!(trace.swap_product_vanished);
    }

    #[test]
    fn case_two_space() {
        // α, β = 4, 5 with γ+δ = 13, λ+μ = 14 and total 4·9
        let s = tetrahedron(&ints(&[4, 6, 7, 7, 7, 5])).unwrap();
        assert!(s.edge_lengths().satisfies_svti());
        let series = path_expansion(&s, 3).unwrap().series;
        let edges = edges_from_series_svti(&series, 6).unwrap();
        let f = f_series(&series, edges.lengths()).unwrap();
        let opp = n4_opposite_sums(&f, &edges).unwrap();
        let mut brute: Vec<Q> = vec![int(4) + int(5), int(6) + int(7), int(7) + int(7)];
        brute.sort();
        assert_eq!(opp.sums, brute);
        assert_eq!(opp.sums.iter().fold(Q::zero(), |a, x| a + x), edges.total());
        let (back, _) = run(&s);
        assert!(are_isometric(&s, &back).unwrap().is_some());
    }

    #[test]
    fn random_svti_roundtrip() {
        for seed in 0..40 {
            let opts = RandomSpaceOptions { denominator: 6, ..RandomSpaceOptions::svti() };
            let s = random_metric_space(4, seed, &opts).unwrap();
            let (back, trace) = run(&s);
            assert!(are_isometric(&s, &back).unwrap().is_some(), "seed {seed}: {trace:?}");
            assert_eq!(trace.opposite.sums.iter().fold(Q::zero(), |a, x| a + x), trace.edges.total());
        }
    }

    #[test]
    fn without_m1_the_series_may_suffice() {
        let s = tetrahedron(&ints(&[7, 8, 9, 10, 11, 12])).unwrap();
        let series = path_expansion(&s, 5).unwrap().series;
        match reconstruct_n4_svti(&series, None) {
            Ok((back, _)) => assert!(are_isometric(&s, &back).unwrap().is_some()),
            Err(e) => assert!(matches!(e, MagnitudeError::Undecided(_)), "{e}"),
        }
    }

    #[test]
    fn short_series_rejected() {
        let s = tetrahedron(&ints(&[7, 8, 9, 10, 11, 12])).unwrap();
        let series = path_expansion(&s, 2).unwrap().series;
        assert!(matches!(reconstruct_n4_svti(&series, None), Err(MagnitudeError::InvalidInput(_))));
    }
}
