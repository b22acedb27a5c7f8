//! Triangles and open 3-paths from the d-index-3 part of the formal magnitude,
//! and the space they determine.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{MagnitudeError, Result};
use crate::metric::{enumerate_index_sets, EdgeLengthMultiset, FiniteMetricSpace, IndexSetKind};
use crate::rational::{int, Q};
use crate::series::GeneralizedSeries;

/// Length triples, each sorted ascending; lists sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleSumData {
    pub triangles: Vec<[Q; 3]>,
    /// Every open 3-path `(i, j, k, l)`, `i < l`, including those that revisit a point.
    pub open3paths: Vec<[Q; 3]>,
}

impl TripleSumData {
    pub fn triangle_sums(&self) -> Vec<Q> {
        sums(&self.triangles)
    }

    pub fn open3path_sums(&self) -> Vec<Q> {
        sums(&self.open3paths)
    }

    /// The data read directly off a space.
    pub fn of_space(space: &FiniteMetricSpace) -> Self {
        let triple = |t: &[usize], e: [(usize, usize); 3]| {
            let mut x = e.map(|(a, b)| space.d(t[a], t[b]).clone());
            x.sort();
            x
        };
        let mut triangles: Vec<[Q; 3]> = enumerate_index_sets(space.n(), IndexSetKind::Triangles)
            .iter()
            .map(|t| triple(t, [(0, 1), (1, 2), (0, 2)]))
            .collect();
        let mut open3paths: Vec<[Q; 3]> = enumerate_index_sets(space.n(), IndexSetKind::Open3Paths)
            .iter()
            .map(|t| triple(t, [(0, 1), (1, 2), (2, 3)]))
            .collect();
        triangles.sort();
        open3paths.sort();
        TripleSumData { triangles, open3paths }
    }
}

fn sums(v: &[[Q; 3]]) -> Vec<Q> {
    let mut s: Vec<Q> = v.iter().map(|t| &t[0] + &t[1] + &t[2]).collect();
    s.sort();
    s
}

/// Every multiset of `size` indices into `0..n`, in lexicographic order.
fn multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, size, &mut Vec::new(), &mut out);
    out
}

/// Contributions a 3-edge multiset can make at its sum: a triangle (−6), a
/// simple open 3-path (−2) or nothing; a repeated edge can only come from a
/// backtracking 3-path, and `{a, a, a}` always does.
fn options(m: &[usize]) -> &'static [i64] {
    if m[0] == m[1] && m[1] == m[2] {
        &[-2]
    } else if m[0] == m[1] || m[1] == m[2] {
        &[0, -2]
    } else {
        &[0, -2, -6]
    }
}

/// Unique choice of one option per candidate with total `target`, if any.
/// `Err(())` when several choices work.
fn unique_split(cands: &[Vec<usize>], target: i64) -> std::result::Result<Option<Vec<i64>>, ()> {
    // sum -> (number of ways capped at 2, first assignment)
    let mut states: BTreeMap<i64, (u8, Vec<i64>)> = BTreeMap::from([(0, (1, Vec::new()))]);
    for c in cands {
        let mut next: BTreeMap<i64, (u8, Vec<i64>)> = BTreeMap::new();
        for (s, (ways, choice)) in &states {
            for &o in options(c) {
                let e = next.entry(s + o).or_insert_with(|| (0, {
                    let mut v = choice.clone();
                    v.push(o);
                    v
                }));
                e.0 = (e.0 + ways).min(2);
            }
        }
        states = next;
    }
    match states.remove(&target) {
        None => Ok(None),
        Some((1, choice)) => Ok(Some(choice)),
        Some(_) => Err(()),
    }
}

/// Splits the coefficient at every 3-edge sum into triangle (−6) and open
/// 3-path (−2) contributions.
///
/// Sums of 1, 2, 4 or 5 edges landing on the same exponent contribute
/// unknown amounts, so such a collision is an ambiguity unless the term there
/// is tagged as pure d-index 3 (or the whole input is a d-index-3 part).
pub fn triple_sums_from_series(series: &GeneralizedSeries, edges: &EdgeLengthMultiset) -> Result<TripleSumData> {
    let lengths = edges.lengths();
    let n = lengths.len();
    if n == 0 {
        return Err(MagnitudeError::InvalidInput("no edges".into()));
    }
    let (lo, hi) = (edges.min().expect("non-empty").clone(), edges.max().expect("non-empty").clone());
    let sum_of = |m: &[usize]| m.iter().fold(Q::zero(), |a, &i| a + &lengths[i]);
    let mut by_sum: BTreeMap<Q, (Vec<Vec<usize>>, bool)> = BTreeMap::new();
    for m in multisets(n, 3) {
        by_sum.entry(sum_of(&m)).or_default().0.push(m);
    }
    let (low3, high3) = (&lo * int(3), &hi * int(3));
    for size in [1usize, 2, 4, 5] {
        let s = int(size as i64);
        if &s * &hi < low3 || &s * &lo > high3 {
            continue;
        }
        for m in multisets(n, size) {
            if let Some(entry) = by_sum.get_mut(&sum_of(&m)) {
                entry.1 = true;
            }
        }
    }
    let pure = !series.is_empty() && series.terms().iter().all(|t| t.d_index == Some(3));
    let mut triangles = Vec::new();
    let mut open3paths = Vec::new();
    for (e, (cands, foreign)) in &by_sum {
        if !series.exact_below().covers(e) {
            return Err(MagnitudeError::InvalidInput(format!(
                "the series is exact only below {}, but 3-edge sums reach {e}",
                series.exact_below()
            )));
        }
        let term = series.terms().iter().find(|t| &t.exponent == e);
        if *foreign && !pure && !term.is_some_and(|t| t.d_index == Some(3)) {
            return Err(MagnitudeError::Ambiguity(format!("{e} (also a sum of a different number of edges)")));
        }
        let c = series.coefficient_at(e);
        if !c.is_integer() {
            return Err(MagnitudeError::Inconsistency(format!("coefficient {c} at {e} is not an integer")));
        }
        let target = c.to_integer().try_into().map_err(|_| {
            MagnitudeError::Inconsistency(format!("coefficient {c} at {e} is out of range"))
        })?;
        let choice = unique_split(cands, target)
            .map_err(|_| MagnitudeError::Ambiguity(e.to_string()))?
            .ok_or_else(|| {
                MagnitudeError::Inconsistency(format!("coefficient {c} at {e} is not a sum of triangle and 3-path terms"))
            })?;
        for (m, o) in cands.iter().zip(choice) {
            let t = [lengths[m[0]].clone(), lengths[m[1]].clone(), lengths[m[2]].clone()];
            match o {
                -6 => triangles.push(t),
                -2 => open3paths.push(t),
                _ => {}
            }
        }
    }
    triangles.sort();
    open3paths.sort();
    Ok(TripleSumData { triangles, open3paths })
}

fn is_simple(t: &[Q; 3]) -> bool {
    t[0] != t[1] && t[1] != t[2]
}

fn sorted3(a: &Q, b: &Q, c: &Q) -> [Q; 3] {
    let mut t = [a.clone(), b.clone(), c.clone()];
    t.sort();
    t
}

/// Rebuilds a space with pairwise distinct edge lengths from its triangle and
/// open 3-path triples.
///
/// Two edges share a point exactly when some triangle contains both, so the
/// middle edge of a simple open 3-path is the one adjacent to both others.
/// A base triangle `P1 P2 P3` on the shortest edge fixes labels; every other
/// triangle on `P1 P2` adds a point `Pk`, oriented by which of the paths
/// `Pk P1 P2 P3` or `Pk P2 P1 P3` exists; the remaining distances are the
/// unique third sides of the triangles `P1 Pi Pj`.
pub fn assemble_from_triples(triangles: &[[Q; 3]], open3paths: &[[Q; 3]]) -> Result<FiniteMetricSpace> {
    let n = (3..=64)
        .find(|&n| n * (n - 1) * (n - 2) / 6 == triangles.len())
        .ok_or_else(|| MagnitudeError::Inconsistency(format!("{} triangles is not C(n, 3)", triangles.len())))?;
    if n == 3 {
        return FiniteMetricSpace::from_edge_lengths(3, &triangles[0]);
    }
    let mut lengths: Vec<Q> = triangles.iter().flat_map(|t| t.iter().cloned()).collect();
    lengths.sort();
    lengths.dedup();
    if lengths.len() != n * (n - 1) / 2 {
        return Err(MagnitudeError::Hypothesis(format!(
            "assembly needs {} distinct edge lengths, found {}",
            n * (n - 1) / 2,
            lengths.len()
        )));
    }
    let inc = |t: &[Q; 3], x: &Q| t.contains(x);
    let adjacent = |x: &Q, y: &Q| triangles.iter().any(|t| inc(t, x) && inc(t, y));
    let simple: Vec<&[Q; 3]> = open3paths.iter().filter(|t| is_simple(t)).collect();
    let middle = |t: &[Q; 3]| -> Result<Q> {
        let mids: Vec<&Q> = (0..3)
            .filter(|&i| !adjacent(&t[(i + 1) % 3], &t[(i + 2) % 3]))
            .map(|i| &t[i])
            .collect();
        match mids.as_slice() {
            [m] => Ok((*m).clone()),
            _ => Err(MagnitudeError::Inconsistency(format!(
                "open 3-path {}, {}, {} has no unique middle edge",
                t[0], t[1], t[2]
            ))),
        }
    };
    let has_path = |a: &Q, mid: &Q, c: &Q| -> Result<bool> {
        let t = sorted3(a, mid, c);
        for p in &simple {
            if **p == t {
                return Ok(&middle(p)? == mid);
            }
        }
        Ok(false)
    };

    let x = &lengths[0];
    let on_x: Vec<&[Q; 3]> = triangles.iter().filter(|t| inc(t, x)).collect();
    if on_x.len() != n - 2 {
        return Err(MagnitudeError::Inconsistency(format!(
            "the shortest edge lies in {} triangles, expected {}",
            on_x.len(),
            n - 2
        )));
    }
    let others = |t: &[Q; 3]| -> (Q, Q) {
        let v: Vec<&Q> = t.iter().filter(|e| *e != x).collect();
        (v[0].clone(), v[1].clone())
    };
    let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    let set = |d: &mut Vec<Vec<Option<Q>>>, i: usize, j: usize, v: Q| {
        d[i][j] = Some(v.clone());
        d[j][i] = Some(v);
    };
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Q::zero());
    }
    let (y, z) = others(on_x[0]);
    set(&mut d, 0, 1, x.clone());
    set(&mut d, 0, 2, y.clone());
    set(&mut d, 1, 2, z.clone());
    for (k, t) in on_x.iter().enumerate().skip(1) {
        let k = k + 2;
        let (u, v) = others(t);
        let via_p1 = has_path(&u, x, &z)?;
        let via_p2 = has_path(&u, x, &y)?;
        let (to_p1, to_p2) = match (via_p1, via_p2) {
            (true, false) => (u, v),
            (false, true) => (v, u),
            _ => {
                return Err(MagnitudeError::Inconsistency(format!(
                    "cannot orient the triangle {x}, {u}, {v} on the base edge"
                )))
            }
        };
        set(&mut d, 0, k, to_p1);
        set(&mut d, 1, k, to_p2);
    }
    for i in 2..n {
        for j in i + 1..n {
            let (a, b) = (d[0][i].clone().expect("set"), d[0][j].clone().expect("set"));
            let thirds: Vec<Q> = triangles
                .iter()
                .filter(|t| inc(t, &a) && inc(t, &b))
                .map(|t| t.iter().find(|e| **e != a && **e != b).expect("three distinct lengths").clone())
                .collect();
            match thirds.as_slice() {
                [w] => set(&mut d, i, j, w.clone()),
                _ => {
                    return Err(MagnitudeError::Inconsistency(format!(
                        "{} triangles contain both {a} and {b}",
                        thirds.len()
                    )))
                }
            }
        }
    }
    let rows: Vec<Vec<Q>> = d.into_iter().map(|r| r.into_iter().map(|v| v.expect("filled")).collect()).collect();
    let space = FiniteMetricSpace::new(rows)?;
    let check = TripleSumData::of_space(&space);
    let mut want: Vec<[Q; 3]> = simple.into_iter().cloned().collect();
    want.sort();
    let got: Vec<[Q; 3]> = check.open3paths.iter().filter(|t| is_simple(t)).cloned().collect();
    let mut tri = triangles.to_vec();
    tri.sort();
    if check.triangles != tri || got != want {
        return Err(MagnitudeError::Inconsistency(
            "the assembled space does not reproduce the given triples".into(),
        ));
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::path_expansion;
    use crate::metric::{are_isometric, random_metric_space, RandomSpaceOptions};

    fn digit_space(n: usize) -> FiniteMetricSpace {
        let base = int(10).pow(n as i32 * (n as i32 - 1) / 2);
        let lengths: Vec<Q> = (0..n * (n - 1) / 2).map(|k| &base + int(10).pow(k as i32)).collect();
        FiniteMetricSpace::from_edge_lengths(n, &lengths).unwrap()
    }

    #[test]
    fn right_triangle_split() {
        let s = FiniteMetricSpace::from_edge_lengths(3, &[int(3), int(4), int(5)]).unwrap();
        let p = path_expansion(&s, 3).unwrap();
        // 10 = 3+3+4 = 5+5, so only the d-index-3 part splits cleanly
        assert!(triple_sums_from_series(&p.polynomial(), &s.edge_lengths()).is_err());
        let data = triple_sums_from_series(&p.per_d_index[3], &s.edge_lengths()).unwrap();
        assert_eq!(data.triangle_sums(), vec![int(12)]);
        assert_eq!(data, TripleSumData::of_space(&s));
        assert_eq!(data.open3paths.len(), 9);
        assert_eq!(assemble_from_triples(&data.triangles, &data.open3paths).unwrap(), s);
    }

    #[test]
    fn digit_separated_four_points() {
        let s = digit_space(4);
        let series = path_expansion(&s, 3).unwrap().series;
        let data = triple_sums_from_series(&series, &s.edge_lengths()).unwrap();
        assert_eq!(data.triangles.len(), 4);
        assert_eq!(data, TripleSumData::of_space(&s));
        let back = assemble_from_triples(&data.triangles, &data.open3paths).unwrap();
        assert!(are_isometric(&s, &back).unwrap().is_some());
    }

    #[test]
    fn random_generic_five_points_roundtrip() {
        let mut done = 0;
        for seed in 0..200u64 {
            let opts = RandomSpaceOptions { denominator: 1_000_000_000, ..Default::default() };
            let s = random_metric_space(5, seed, &opts).unwrap();
            if !s.edge_lengths().is_p_generic(3).unwrap() {
                continue;
            }
            let data = TripleSumData::of_space(&s);
            let back = assemble_from_triples(&data.triangles, &data.open3paths).unwrap();
            assert!(are_isometric(&s, &back).unwrap().is_some(), "seed {seed}");
            done += 1;
            if done == 10 {
                break;
            }
        }
        assert_eq!(done, 10);
    }

    #[test]
    fn colliding_triangle_and_path_is_ambiguous() {
        // the triangle 0-1-2 (10, 13, 16) and the star at 3 (9, 12, 18) both sum to 39
        let s = FiniteMetricSpace::from_edge_lengths(4, &[10, 13, 9, 16, 12, 18].map(int)).unwrap();
        assert!(!s.edge_lengths().is_p_generic(3).unwrap());
        let series = path_expansion(&s, 3).unwrap().polynomial();
        let r = triple_sums_from_series(&series, &s.edge_lengths());
        assert!(matches!(r, Err(MagnitudeError::Ambiguity(_))), "{r:?}");
    }

    #[test]
    fn assembly_rejects_repeated_lengths_and_bad_counts() {
        let t = [[int(1), int(1), int(1)]];
        assert_eq!(assemble_from_triples(&t, &[]).unwrap(), crate::fixtures::complete_space(3, &int(1)).unwrap());
        assert!(matches!(
            assemble_from_triples(&[[int(1), int(2), int(3)], [int(1), int(2), int(3)]], &[]),
            Err(MagnitudeError::Inconsistency(_))
        ));
        let s = digit_space(4);
        let mut data = TripleSumData::of_space(&s);
        data.open3paths.retain(|p| !is_simple(p));
        assert!(assemble_from_triples(&data.triangles, &data.open3paths).is_err());
    }

    #[test]
    fn multiset_enumeration() {
        assert_eq!(multisets(3, 2).len(), 6);
        assert_eq!(multisets(10, 5).len(), 2002);
    }
}
