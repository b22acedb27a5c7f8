//! Index tuples for the path and subgraph sums that appear in the formal magnitude.
//!
//! All indices are zero based and every set is returned in lexicographic order.

/// Which family of index tuples to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexSetKind {
    /// `(i, j, k)` with `i < j < k`.
    Triangles,
    /// `(i, j, k)` with `i != j != k` and `i < k`.
    Open2Paths,
    /// `(i, j, k, l)` with consecutive indices distinct and `i < l`.
    Open3Paths,
    /// `(i, j, k, l)` pairwise distinct with `i < l`.
    SimpleOpen3Paths,
    /// Disjoint edge pairs `(i, j, k, l)`: `i < j`, `k < l`, `{i,j} ∩ {k,l} = ∅`, `i < k`.
    /// For four points these are the three pairs of opposite edges.
    OppositePairs,
    /// Vertex stars `(i, j, k, l)`: centre `i` and leaves `j < k < l`, all distinct.
    VertexStars,
    /// Walks `(i_0, ..., i_k)` with consecutive indices distinct.
    KStepPaths(usize),
}

pub fn enumerate_index_sets(n: usize, kind: IndexSetKind) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match kind {
        IndexSetKind::Triangles => {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        out.push(vec![i, j, k]);
                    }
                }
            }
        }
        IndexSetKind::Open2Paths => {
            for i in 0..n {
                for j in 0..n {
                    for k in i + 1..n {
                        if j != i && j != k {
                            out.push(vec![i, j, k]);
                        }
                    }
                }
            }
        }
        IndexSetKind::Open3Paths | IndexSetKind::SimpleOpen3Paths => {
            let simple = kind == IndexSetKind::SimpleOpen3Paths;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in i + 1..n {
                            if i == j || j == k || k == l {
                                continue;
                            }
                            if simple && (i == k || j == l) {
                                continue;
                            }
                            out.push(vec![i, j, k, l]);
                        }
                    }
                }
            }
        }
        IndexSetKind::OppositePairs => {
            for i in 0..n {
                for j in i + 1..n {
                    for k in i + 1..n {
                        for l in k + 1..n {
                            if k != j && l != j {
                                out.push(vec![i, j, k, l]);
                            }
                        }
                    }
                }
            }
        }
        IndexSetKind::VertexStars => {
            for i in 0..n {
                for j in 0..n {
                    for k in j + 1..n {
                        for l in k + 1..n {
                            if i != j && i != k && i != l {
                                out.push(vec![i, j, k, l]);
                            }
                        }
                    }
                }
            }
        }
        IndexSetKind::KStepPaths(k) => {
            let mut walk = Vec::with_capacity(k + 1);
            for start in 0..n {
                walk.push(start);
                extend_walks(n, k, &mut walk, &mut out);
                walk.pop();
            }
        }
    }
    out
}

fn extend_walks(n: usize, k: usize, walk: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if walk.len() == k + 1 {
        out.push(walk.clone());
        return;
    }
    let last = *walk.last().expect("walk is non-empty");
    for next in 0..n {
        if next != last {
            walk.push(next);
            extend_walks(n, k, walk, out);
            walk.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_counts() {
        assert_eq!(enumerate_index_sets(4, IndexSetKind::Triangles).len(), 4);
        assert_eq!(enumerate_index_sets(4, IndexSetKind::OppositePairs).len(), 3);
        assert_eq!(enumerate_index_sets(4, IndexSetKind::VertexStars).len(), 4);
        assert_eq!(enumerate_index_sets(4, IndexSetKind::SimpleOpen3Paths).len(), 12);
        // 4 * 3^3 walks, minus the 24 closed ones, halved by i < l.
        assert_eq!(enumerate_index_sets(4, IndexSetKind::Open3Paths).len(), 42);
        // 4 * 3 * 3 walks of two steps minus 12 closed, halved.
        assert_eq!(enumerate_index_sets(4, IndexSetKind::Open2Paths).len(), 12);
    }

    #[test]
    fn opposite_pairs_are_the_three_perfect_matchings() {
        assert_eq!(
            enumerate_index_sets(4, IndexSetKind::OppositePairs),
            vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3], vec![0, 3, 1, 2]]
        );
    }

    #[test]
    fn two_points_have_no_triangles() {
        assert!(enumerate_index_sets(2, IndexSetKind::Triangles).is_empty());
        assert!(enumerate_index_sets(2, IndexSetKind::OppositePairs).is_empty());
    }

    #[test]
    fn kstep_counts() {
        for n in 2..=5 {
            for k in 0..=4 {
                let walks = enumerate_index_sets(n, IndexSetKind::KStepPaths(k));
                assert_eq!(walks.len(), n * (n - 1).pow(k as u32));
                assert!(walks.iter().all(|w| w.windows(2).all(|p| p[0] != p[1])));
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        for kind in [
            IndexSetKind::Triangles,
            IndexSetKind::Open3Paths,
            IndexSetKind::OppositePairs,
            IndexSetKind::KStepPaths(2),
        ] {
            let v = enumerate_index_sets(5, kind);
            assert!(v.windows(2).all(|w| w[0] < w[1]), "{kind:?}");
        }
    }
}
