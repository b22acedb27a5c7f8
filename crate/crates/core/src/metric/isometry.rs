use super::FiniteMetricSpace;
use crate::error::{MagnitudeError, Result};
use crate::rational::Q;

/// Largest point count accepted by [`are_isometric`].
pub const MAX_ISOMETRY_POINTS: usize = 8;

/// Finds `sigma` with `a.d(i, j) == b.d(sigma[i], sigma[j])` for all `i, j`.
///
/// Backtracking over point assignments; candidates for each point are limited
/// to points of `b` whose sorted distance row matches.
pub fn are_isometric(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> Result<Option<Vec<usize>>> {
    let n = a.n();
    if n > MAX_ISOMETRY_POINTS || b.n() > MAX_ISOMETRY_POINTS {
        return Err(MagnitudeError::Capacity(format!(
            "isometry search is limited to {MAX_ISOMETRY_POINTS} points"
        )));
    }
    if b.n() != n || a.edge_lengths() != b.edge_lengths() {
        return Ok(None);
    }
    let sig_a: Vec<Vec<Q>> = (0..n).map(|i| row_signature(a, i)).collect();
    let sig_b: Vec<Vec<Q>> = (0..n).map(|i| row_signature(b, i)).collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| sig_a[i] == sig_b[j]).collect())
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    let mut sigma = Vec::with_capacity(n);
    let mut used = vec![false; n];
    Ok(search(a, b, &candidates, &mut sigma, &mut used).then_some(sigma))
}

fn row_signature(s: &FiniteMetricSpace, i: usize) -> Vec<Q> {
    let mut row = s.rows()[i].clone();
    row.sort();
    row
}

fn search(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    candidates: &[Vec<usize>],
    sigma: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let i = sigma.len();
    if i == a.n() {
        return true;
    }
    for &c in &candidates[i] {
        if used[c] {
            continue;
        }
        if (0..i).all(|k| a.d(i, k) == b.d(c, sigma[k])) {
            used[c] = true;
            sigma.push(c);
            if search(a, b, candidates, sigma, used) {
                return true;
            }
            sigma.pop();
            used[c] = false;
        }
    }
    false
}

/// Inverse of a permutation.
pub fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn tri(a: i64, b: i64, c: i64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_edge_lengths(3, &[int(a), int(b), int(c)]).unwrap()
    }

    #[test]
    fn identity_on_itself() {
        let s = tri(3, 4, 5);
        assert_eq!(are_isometric(&s, &s).unwrap(), Some(vec![0, 1, 2]));
    }

    #[test]
    fn relabelled_triangle() {
        let a = tri(3, 4, 5);
        let b = tri(4, 5, 3);
        let sigma = are_isometric(&a, &b).unwrap().expect("isometric");
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.d(i, j), b.d(sigma[i], sigma[j]));
            }
        }
    }

    #[test]
    fn path_lengths_in_different_order_are_not_isometric() {
        // Shortest-path metrics of the paths with edge lengths (1,2,3) and (2,1,3).
        let p = FiniteMetricSpace::from_edge_lengths(4, &[1, 3, 6, 2, 5, 3].map(int)).unwrap();
        let q = FiniteMetricSpace::from_edge_lengths(4, &[2, 3, 6, 1, 4, 3].map(int)).unwrap();
        assert_eq!(are_isometric(&p, &q).unwrap(), None);
    }

    #[test]
    fn capacity_guard() {
        let n = 9;
        let d = (0..n)
            .map(|i| (0..n).map(|j| if i == j { int(0) } else { int(1) }).collect())
            .collect();
        let s = FiniteMetricSpace::new(d).unwrap();
        assert!(matches!(are_isometric(&s, &s), Err(MagnitudeError::Capacity(_))));
    }
}
