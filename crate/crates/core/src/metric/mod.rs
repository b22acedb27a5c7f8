//! Finite metric spaces with exact rational distances.
//!
//! A [`FiniteMetricSpace`] stores the full symmetric distance matrix. It can
//! hold matrices that violate the metric axioms so that [`FiniteMetricSpace::validate`]
//! can report what is wrong; constructors that need a genuine metric use
//! [`FiniteMetricSpace::new`].

mod index_sets;
mod isometry;
mod random;

pub use index_sets::{enumerate_index_sets, IndexSetKind};
pub use isometry::{are_isometric, invert_permutation};
pub use random::{random_metric_space, RandomSpaceOptions};

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{MagnitudeError, Result};
use crate::rational::{int, Q};

/// Largest `p` accepted by [`FiniteMetricSpace::is_p_generic`].
pub const MAX_GENERICITY_DEPTH: usize = 6;
/// Largest edge count accepted by [`FiniteMetricSpace::is_p_generic`].
pub const MAX_GENERICITY_EDGES: usize = 45;

/// `n` labelled points together with an exact distance matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Option<Vec<String>>,
    d: Vec<Vec<Q>>,
}

/// Which metric axiom a [`Violation`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Diagonal,
    Symmetry,
    Positivity,
    Triangle,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Diagonal => "diagonal",
            Constraint::Symmetry => "symmetry",
            Constraint::Positivity => "positivity",
            Constraint::Triangle => "triangle",
        })
    }
}

/// One failed axiom. For triangle violations `pair = (i, k)` and `via = Some(j)`
/// with `d[i][j] + d[j][k] < d[i][k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub pair: (usize, usize),
    pub via: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Sorted multiset of the `n(n-1)/2` edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLengthMultiset {
    lengths: Vec<Q>,
}

impl EdgeLengthMultiset {
    pub fn new(mut lengths: Vec<Q>) -> Self {
        lengths.sort();
        EdgeLengthMultiset { lengths }
    }

    pub fn lengths(&self) -> &[Q] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn min(&self) -> Option<&Q> {
        self.lengths.first()
    }

    pub fn max(&self) -> Option<&Q> {
        self.lengths.last()
    }

    pub fn total(&self) -> Q {
        self.lengths.iter().fold(Q::zero(), |acc, l| acc + l)
    }

    /// `max < 2 * min` on the lengths themselves.
    pub fn satisfies_svti(&self) -> bool {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => hi < &(lo * int(2)),
            _ => true,
        }
    }

    /// Distinct multisets of at most `p` lengths (lengths indexed by position,
    /// so repeated values count as different edges) have distinct sums.
    pub fn is_p_generic(&self, p: usize) -> Result<bool> {
        if p > MAX_GENERICITY_DEPTH || self.lengths.len() > MAX_GENERICITY_EDGES {
            return Err(MagnitudeError::Capacity(format!(
                "genericity check limited to p <= {MAX_GENERICITY_DEPTH} and N <= {MAX_GENERICITY_EDGES} (got p = {p}, N = {})",
                self.lengths.len()
            )));
        }
        let mut seen = HashSet::new();
        let mut ok = true;
        for_each_multiset_sum(&self.lengths, p, &mut |sum| {
            if !seen.insert(sum.clone()) {
                ok = false;
            }
            ok
        });
        Ok(ok)
    }
}

/// Calls `visit` with the sum of every multiset of 1..=p elements of `values`
/// (elements chosen by index, with repetition). Stops when `visit` returns false.
pub(crate) fn for_each_multiset_sum(values: &[Q], p: usize, visit: &mut dyn FnMut(&Q) -> bool) {
    fn rec(
        values: &[Q],
        start: usize,
        left: usize,
        acc: &Q,
        visit: &mut dyn FnMut(&Q) -> bool,
    ) -> bool {
        for i in start..values.len() {
            let s = acc + &values[i];
            if !visit(&s) {
                return false;
            }
            if left > 1 && !rec(values, i, left - 1, &s, visit) {
                return false;
            }
        }
        true
    }
    if p > 0 {
        rec(values, 0, p, &Q::zero(), visit);
    }
}

/// Assignment of lengths to labelled edges `{i, j}` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialData {
    pub assignment: BTreeMap<(usize, usize), Q>,
}

impl FiniteMetricSpace {
    /// Builds a space and rejects anything that is not a metric.
    pub fn new(d: Vec<Vec<Q>>) -> Result<Self> {
        let space = Self::from_rows(d)?;
        let report = space.validate();
        if !report.ok {
            let v = &report.violations[0];
            return Err(MagnitudeError::InvalidInput(format!(
                "not a metric: {} violated at {:?}{}",
                v.constraint,
                v.pair,
                v.via.map(|j| format!(" via {j}")).unwrap_or_default()
            )));
        }
        Ok(space)
    }

    /// Builds a space checking only the matrix shape (square, `n >= 2`).
    pub fn from_rows(d: Vec<Vec<Q>>) -> Result<Self> {
        let n = d.len();
        if n < 2 {
            return Err(MagnitudeError::InvalidInput(format!(
                "a space needs at least 2 points, got {n}"
            )));
        }
        if let Some((i, row)) = d.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(MagnitudeError::InvalidInput(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(FiniteMetricSpace { labels: None, d })
    }

    /// Builds a metric space from edge lengths listed in lexicographic edge
    /// order `(0,1), (0,2), ..., (n-2,n-1)`.
    pub fn from_edge_lengths(n: usize, lengths: &[Q]) -> Result<Self> {
        if lengths.len() != n * n.saturating_sub(1) / 2 {
            return Err(MagnitudeError::InvalidInput(format!(
                "{n} points need {} edge lengths, got {}",
                n * n.saturating_sub(1) / 2,
                lengths.len()
            )));
        }
        let mut d = vec![vec![Q::zero(); n]; n];
        for ((i, j), l) in edge_pairs(n).into_iter().zip(lengths) {
            d[i][j] = l.clone();
            d[j][i] = l.clone();
        }
        Self::new(d)
    }

    pub fn from_integer_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(MagnitudeError::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self, i: usize, j: usize) -> &Q {
        &self.d[i][j]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.d
    }

    /// Number of edges `N = n(n-1)/2`.
    pub fn edge_count(&self) -> usize {
        self.n() * (self.n() - 1) / 2
    }

    pub fn edge_lengths(&self) -> EdgeLengthMultiset {
        EdgeLengthMultiset::new(
            edge_pairs(self.n())
                .into_iter()
                .map(|(i, j)| self.d[i][j].clone())
                .collect(),
        )
    }

    /// Edge lengths in lexicographic edge order.
    pub fn edge_vector(&self) -> Vec<Q> {
        edge_pairs(self.n())
            .into_iter()
            .map(|(i, j)| self.d[i][j].clone())
            .collect()
    }

    pub fn combinatorial_data(&self) -> CombinatorialData {
        CombinatorialData {
            assignment: edge_pairs(self.n())
                .into_iter()
                .map(|(i, j)| ((i, j), self.d[i][j].clone()))
                .collect(),
        }
    }

    pub fn min_distance(&self) -> Q {
        self.edge_lengths().min().cloned().unwrap_or_else(Q::zero)
    }

    pub fn diameter(&self) -> Q {
        self.edge_lengths().max().cloned().unwrap_or_else(Q::zero)
    }

    /// The relabelled space with `d'[i][j] = d[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let d = (0..n)
            .map(|i| (0..n).map(|j| self.d[perm[i]][perm[j]].clone()).collect())
            .collect();
        FiniteMetricSpace {
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&p| l[p].clone()).collect()),
            d,
        }
    }

    /// The space with every distance multiplied by `factor`.
    pub fn scaled(&self, factor: &Q) -> Self {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            d: self
                .d
                .iter()
                .map(|r| r.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }

    /// Reports every violated diagonal, symmetry, positivity and triangle constraint.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n();
        let mut violations = Vec::new();
        for i in 0..n {
            if !self.d[i][i].is_zero() {
                violations.push(Violation {
                    constraint: Constraint::Diagonal,
                    pair: (i, i),
                    via: None,
                });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.d[i][j] != self.d[j][i] {
                    violations.push(Violation {
                        constraint: Constraint::Symmetry,
                        pair: (i, j),
                        via: None,
                    });
                }
                if !self.d[i][j].is_positive() || !self.d[j][i].is_positive() {
                    violations.push(Violation {
                        constraint: Constraint::Positivity,
                        pair: (i, j),
                        via: None,
                    });
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                if i == k {
                    continue;
                }
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    if &self.d[i][j] + &self.d[j][k] < self.d[i][k] {
                        violations.push(Violation {
                            constraint: Constraint::Triangle,
                            pair: (i, k),
                            via: Some(j),
                        });
                    }
                }
            }
        }
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    /// `max d_ij < 2 min d_kl`.
    pub fn satisfies_svti(&self) -> bool {
        self.edge_lengths().satisfies_svti()
    }

    /// Every triangle inequality among distinct points holds strictly.
    pub fn has_strict_triangles(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                (0..n).all(|k| {
                    i == j || j == k || i == k || &self.d[i][j] + &self.d[j][k] > self.d[i][k]
                })
            })
        })
    }

    /// Smallest slack `d_ij + d_jk - d_ik` over distinct triples (zero for n = 2).
    pub fn triangle_slack(&self) -> Q {
        let n = self.n();
        let mut best: Option<Q> = None;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let s = &self.d[i][j] + &self.d[j][k] - &self.d[i][k];
                    if best.as_ref().is_none_or(|b| &s < b) {
                        best = Some(s);
                    }
                }
            }
        }
        best.unwrap_or_else(Q::zero)
    }

    /// Distinct multisets of at most `p` edges have distinct length sums.
    pub fn is_p_generic(&self, p: usize) -> Result<bool> {
        self.edge_lengths().is_p_generic(p)
    }
}

/// Unordered point pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn space(rows: &[&[i64]]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_metric_is_valid() {
        assert!(space(&[&[0, 1], &[1, 0]]).validate().ok);
    }

    #[test]
    fn broken_triangle_is_reported() {
        let report = space(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]).validate();
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.constraint == Constraint::Triangle
            && v.pair == (0, 2)
            && v.via == Some(1)));
    }

    #[test]
    fn seven_to_twelve_tetrahedron_is_valid() {
        let s = space(&[&[0, 7, 8, 9], &[7, 0, 10, 11], &[8, 10, 0, 12], &[9, 11, 12, 0]]);
        assert!(s.validate().ok);
        assert!(s.satisfies_svti());
    }

    #[test]
    fn asymmetric_and_nonpositive_entries_are_reported() {
        let s = space(&[&[0, 1, 1], &[2, 0, 1], &[1, 1, 0]]);
        let r = s.validate();
        assert!(r.violations.iter().any(|v| v.constraint == Constraint::Symmetry));
        let s = space(&[&[1, 0], &[0, 0]]);
        let r = s.validate();
        assert!(r.violations.iter().any(|v| v.constraint == Constraint::Diagonal));
        assert!(r.violations.iter().any(|v| v.constraint == Constraint::Positivity));
    }

    #[test]
    fn new_rejects_non_metrics() {
        assert!(FiniteMetricSpace::from_integer_rows(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]).is_err());
        assert!(FiniteMetricSpace::from_rows(vec![vec![int(0)]]).is_err());
        assert!(FiniteMetricSpace::from_rows(vec![vec![int(0), int(1)], vec![int(1)]]).is_err());
    }

    #[test]
    fn svti_examples() {
        let eq = FiniteMetricSpace::from_edge_lengths(3, &[int(1), int(1), int(1)]).unwrap();
        assert!(eq.satisfies_svti());
        // Path 0-1-2-3 with unit edges under the shortest-path metric.
        let path = FiniteMetricSpace::from_edge_lengths(
            4,
            &[int(1), int(2), int(3), int(1), int(2), int(1)],
        )
        .unwrap();
        assert!(!path.satisfies_svti());
    }

    #[test]
    fn genericity_examples() {
        let tet = FiniteMetricSpace::from_edge_lengths(4, &(7..=12).map(int).collect::<Vec<_>>()).unwrap();
        assert!(!tet.is_p_generic(2).unwrap());
        assert!(tet.is_p_generic(1).unwrap());
        let lens = EdgeLengthMultiset::new([1, 10, 100, 1000, 10000, 100000].map(int).to_vec());
        assert!(lens.is_p_generic(5).unwrap());
        let two = FiniteMetricSpace::from_edge_lengths(2, &[frac(7, 3)]).unwrap();
        for p in 1..=6 {
            assert!(two.is_p_generic(p).unwrap());
        }
        assert!(matches!(two.is_p_generic(7), Err(MagnitudeError::Capacity(_))));
        let many = EdgeLengthMultiset::new((1..=46).map(int).collect());
        assert!(matches!(many.is_p_generic(1), Err(MagnitudeError::Capacity(_))));
    }

    #[test]
    fn repeated_lengths_are_not_generic() {
        let lens = EdgeLengthMultiset::new(vec![int(1), int(1), int(5)]);
        assert!(!lens.is_p_generic(1).unwrap());
    }

    #[test]
    fn multiset_sum_enumeration_counts() {
        let vals: Vec<Q> = (1..=4).map(int).collect();
        let mut count = 0;
        for_each_multiset_sum(&vals, 3, &mut |_| {
            count += 1;
            true
        });
        // C(4,1) + C(5,2) + C(6,3)
        assert_eq!(count, 4 + 10 + 20);
    }

    #[test]
    fn permuted_and_scaled() {
        let s = FiniteMetricSpace::from_edge_lengths(3, &[int(3), int(4), int(5)]).unwrap();
        let p = s.permuted(&[2, 0, 1]);
        assert_eq!(p.d(0, 1), s.d(2, 0));
        assert_eq!(s.scaled(&int(2)).diameter(), int(10));
        assert_eq!(s.triangle_slack(), int(2));
    }
}
