//! Named example spaces used by the experiments, the CLI and the tests.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MagnitudeError, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub space: FiniteMetricSpace,
    pub provenance: String,
}

impl Fixture {
    fn new(name: &str, space: FiniteMetricSpace, provenance: &str) -> Self {
        Fixture { name: name.into(), space, provenance: provenance.into() }
    }
}

/// Shortest-path metric of a connected weighted graph (Floyd–Warshall).
pub fn graph_metric(n: usize, edges: &[(usize, usize, Q)]) -> Result<FiniteMetricSpace> {
    let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Q::zero());
    }
    for (a, b, w) in edges {
        if *a >= n || *b >= n || a == b {
            return Err(MagnitudeError::InvalidInput(format!("bad edge ({a}, {b})")));
        }
        let better = d[*a][*b].as_ref().is_none_or(|x| w < x);
        if better {
            d[*a][*b] = Some(w.clone());
            d[*b][*a] = Some(w.clone());
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (&d[i][k], &d[k][j]) {
                    let via = x + y;
                    if d[i][j].as_ref().is_none_or(|c| &via < c) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    let rows = d
        .into_iter()
        .map(|r| r.into_iter().collect::<Option<Vec<Q>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| MagnitudeError::InvalidInput("graph is not connected".into()))?;
    FiniteMetricSpace::new(rows)
}

/// The tree `0 - 1 - 2 - 3` with the given edge lengths.
pub fn path_tree(a: Q, b: Q, c: Q) -> FiniteMetricSpace {
    graph_metric(4, &[(0, 1, a), (1, 2, b), (2, 3, c)]).expect("a path is connected")
}

/// The tree with centre `0` and leaves `1, 2, 3`.
pub fn star_tree(a: Q, b: Q, c: Q) -> FiniteMetricSpace {
    graph_metric(4, &[(0, 1, a), (0, 2, b), (0, 3, c)]).expect("a star is connected")
}

/// The two 4-vertex trees with unit edges; both have magnitude `(4 - 2q)/(1 + q)`.
pub fn leinster_pair() -> (Fixture, Fixture) {
    (
        Fixture::new("path4", path_tree(int(1), int(1), int(1)), "4-vertex path, unit edges"),
        Fixture::new("star4", star_tree(int(1), int(1), int(1)), "4-vertex star, unit edges"),
    )
}

/// Paths with edge lengths `(1, 2, 3)` and `(2, 1, 3)`: equal magnitude, not isometric.
pub fn reordered_path_pair() -> (Fixture, Fixture) {
    (
        Fixture::new("path-123", path_tree(int(1), int(2), int(3)), "path with lengths 1,2,3"),
        Fixture::new("path-213", path_tree(int(2), int(1), int(3)), "path with lengths 2,1,3"),
    )
}

/// `K_{3,2}` with an extra edge of length `ell` joining the two-point side:
/// points `A1..A3 = 0..3`, `B1, B2 = 3, 4`.
pub fn k32_space(ell: &Q) -> Result<FiniteMetricSpace> {
    if !(ell > &Q::zero() && ell <= &int(2)) {
        return Err(MagnitudeError::Range(format!("ell must lie in (0, 2], got {ell}")));
    }
    let mut edges = Vec::new();
    for a in 0..3 {
        for b in 3..5 {
            edges.push((a, b, int(1)));
        }
    }
    edges.push((3, 4, ell.clone()));
    graph_metric(5, &edges)
}

/// `n` points at mutual distance `a`.
pub fn complete_space(n: usize, a: &Q) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_edge_lengths(n, &vec![a.clone(); n * n.saturating_sub(1) / 2])
}

/// Four points with `(d12, d13, d14, d23, d24, d34)` in that order.
pub fn tetrahedron(edges: &[Q]) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_edge_lengths(4, edges)
}

/// Four collinear points at `0, 1, 2, 3`.
pub fn collinear4() -> FiniteMetricSpace {
    path_tree(int(1), int(1), int(1))
}

/// The 4-cycle with graph metric.
pub fn square_graph() -> FiniteMetricSpace {
    graph_metric(4, &[(0, 1, int(1)), (1, 2, int(1)), (2, 3, int(1)), (3, 0, int(1))]).expect("connected")
}

/// A matrix violating the triangle inequality at `(0, 2)`.
pub fn broken_triangle() -> FiniteMetricSpace {
    FiniteMetricSpace::from_rows(vec![
        vec![int(0), int(1), int(3)],
        vec![int(1), int(0), int(1)],
        vec![int(3), int(1), int(0)],
    ])
    .expect("square matrix")
}

/// `n` points whose `N = C(n, 2)` edges are `10^N + 10^k` for a seeded
/// permutation of `k = 0..N`. Sums of fewer than ten edges are distinct
/// digit patterns, and every length lies in `(10^N, 1.1·10^N]`, so the space
/// is generic to depth 9 and satisfies the strict virtual triangle inequality.
pub fn digit_separated_space(n: usize, seed: u64) -> Result<FiniteMetricSpace> {
    let edges = n * n.saturating_sub(1) / 2;
    if !(2..=10).contains(&n) {
        return Err(MagnitudeError::Range(format!("digit-separated spaces need 2 <= n <= 10, got {n}")));
    }
    let mut digits: Vec<usize> = (0..edges).collect();
    digits.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let ten = BigInt::from(10);
    let base = num_traits::pow(ten.clone(), edges);
    let lengths: Vec<Q> = digits
        .into_iter()
        .map(|k| Q::from_integer(&base + num_traits::pow(ten.clone(), k)))
        .collect();
    FiniteMetricSpace::from_edge_lengths(n, &lengths)
}

/// Every valid named fixture.
pub fn all_fixtures() -> Vec<Fixture> {
    let (p, s) = leinster_pair();
    let (p1, p2) = reordered_path_pair();
    let mut out = vec![p, s, p1, p2];
    out.push(Fixture::new(
        "triangle-345",
        FiniteMetricSpace::from_edge_lengths(3, &[int(3), int(4), int(5)]).expect("metric"),
        "right triangle",
    ));
    out.push(Fixture::new(
        "tetrahedron-7-12",
        tetrahedron(&(7..=12).map(int).collect::<Vec<_>>()).expect("metric"),
        "edges 7..12 in lexicographic order",
    ));
    out.push(Fixture::new("square-graph", square_graph(), "4-cycle graph metric"));
    for (name, ell) in [("k32-1", int(1)), ("k32-3/2", Q::new(3.into(), 2.into()))] {
        out.push(Fixture::new(name, k32_space(&ell).expect("in range"), "K_{3,2} plus an edge"));
    }
    for n in 2..=6 {
        out.push(Fixture::new(
            &format!("complete-{n}"),
            complete_space(n, &int(1)).expect("metric"),
            "equilateral",
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn trees_have_expected_distances() {
        let (p, s) = leinster_pair();
        assert_eq!(p.space.edge_vector(), [1, 2, 3, 1, 2, 1].map(int).to_vec());
        assert_eq!(s.space.edge_vector(), [1, 1, 1, 2, 2, 2].map(int).to_vec());
    }

    #[test]
    fn digit_separated_spaces_are_generic() {
        let s = digit_separated_space(5, 3).unwrap();
        let e = s.edge_lengths();
        assert!(e.satisfies_svti());
        assert!(e.is_p_generic(5).unwrap());
        assert_eq!(e.min().unwrap(), &int(10_000_000_001));
        assert_ne!(s, digit_separated_space(5, 4).unwrap());
        assert_eq!(s, digit_separated_space(5, 3).unwrap());
        assert!(digit_separated_space(11, 0).is_err());
    }

    #[test]
    fn k32_distances() {
        let x = k32_space(&frac(3, 2)).unwrap();
        assert_eq!(x.d(0, 1), &int(2));
        assert_eq!(x.d(0, 3), &int(1));
        assert_eq!(x.d(3, 4), &frac(3, 2));
        assert!(k32_space(&int(3)).is_err());
        assert!(k32_space(&int(0)).is_err());
    }

    #[test]
    fn fixtures_are_metrics() {
        for f in all_fixtures() {
            assert!(f.space.validate().ok, "{}", f.name);
        }
        assert!(!broken_triangle().validate().ok);
    }

    #[test]
    fn disconnected_graph_rejected() {
        assert!(graph_metric(3, &[(0, 1, int(1))]).is_err());
    }
}
