//! The auxiliary series used to read a four-point space off its formal magnitude.

use crate::error::{MagnitudeError, Result};
use crate::metric::{enumerate_index_sets, FiniteMetricSpace, IndexSetKind};
use crate::rational::{frac, int, Q};
use crate::series::{GeneralizedSeries, SeriesTerm, Threshold};

use super::path::{edge_power_sum, index_sum, path_expansion};

/// `σ_p = Σ q^{p ℓ}` over the given edge lengths.
pub fn sigma_from_lengths(lengths: &[Q], p: usize) -> GeneralizedSeries {
    GeneralizedSeries::from_terms(
        lengths.iter().map(|l| SeriesTerm::tagged(l * int(p as i64), int(1), p)).collect::<Vec<_>>(),
        Threshold::Infinite,
    )
}

/// `σ_p(q) = Σ_{i<j} q^{p d_ij}`.
pub fn sigma_series(space: &FiniteMetricSpace, p: usize) -> GeneralizedSeries {
    edge_power_sum(space, p, 1)
}

/// `m − 4 + 2σ1 − σ1² − σ2 + σ1σ2 + σ1³/3 + 2σ3/3` from a (truncated) formal
/// magnitude and the six edge lengths. Exact below the threshold of `m`.
pub fn f_series(m: &GeneralizedSeries, lengths: &[Q]) -> Result<GeneralizedSeries> {
    if lengths.len() != 6 {
        return Err(MagnitudeError::WrongSize { expected: 6, got: lengths.len() });
    }
    let s1 = sigma_from_lengths(lengths, 1);
    let s2 = sigma_from_lengths(lengths, 2);
    let s3 = sigma_from_lengths(lengths, 3);
    let s1sq = s1.mul(&s1);
    Ok(m.sub(&GeneralizedSeries::constant(int(4)))
        .add(&s1.scale(&int(2)))
        .sub(&s1sq)
        .sub(&s2)
        .add(&s1.mul(&s2))
        .add(&s1sq.mul(&s1).scale(&frac(1, 3)))
        .add(&s3.scale(&frac(2, 3))))
}

/// `f` split by d-index for a four-point space: entry `k` holds the exact
/// d-index-`k` part for `k = 0..=K`. Entries 0 and 1 vanish identically and
/// entry 2 is `−2 Σ_opp q^{d_ij + d_kl}`.
pub fn f_parts(space: &FiniteMetricSpace, k_max: usize) -> Result<Vec<GeneralizedSeries>> {
    if space.n() != 4 {
        return Err(MagnitudeError::WrongSize { expected: 4, got: space.n() });
    }
    let m = path_expansion(space, k_max.max(3))?;
    let s1 = sigma_series(space, 1);
    let s2 = sigma_series(space, 2);
    let s3 = sigma_series(space, 3);
    let s1sq = s1.mul(&s1);
    let mut parts = m.per_d_index;
    parts.truncate(k_max + 1);
    let corrections = [
        GeneralizedSeries::constant(int(-4)),
        s1.scale(&int(2)),
        s1sq.add(&s2).neg(),
        s1.mul(&s2).add(&s1sq.mul(&s1).scale(&frac(1, 3))).add(&s3.scale(&frac(2, 3))),
    ];
    for (p, c) in parts.iter_mut().zip(corrections) {
        *p = p.add(&c);
    }
    Ok(parts)
}

/// Closed form of the d-index-3 part of `f`:
/// `−2 Σ_opp q^{d_ij+d_kl} − 4 Σ_△ q^{d_ij+d_jk+d_ik} + 2 Σ_vtx q^{d_ij+d_ik+d_il}
///  + 2 Σ_opp (q^{2d_ij+d_kl} + q^{d_ij+2d_kl})`.
///
/// The first sum has d-index 2 and is included because it is what survives
/// from the lower parts; see [`f_parts`].
pub fn f3_part(space: &FiniteMetricSpace) -> Result<GeneralizedSeries> {
    if space.n() != 4 {
        return Err(MagnitudeError::WrongSize { expected: 4, got: space.n() });
    }
    let opp = index_sum(space, IndexSetKind::OppositePairs, &[(0, 1), (2, 3)], -2);
    let tri = index_sum(space, IndexSetKind::Triangles, &[(0, 1), (1, 2), (0, 2)], -4);
    let vtx = index_sum(space, IndexSetKind::VertexStars, &[(0, 1), (0, 2), (0, 3)], 2);
    let opp3: Vec<SeriesTerm> = enumerate_index_sets(4, IndexSetKind::OppositePairs)
        .into_iter()
        .flat_map(|t| {
            let (a, b) = (space.d(t[0], t[1]), space.d(t[2], t[3]));
            [
                SeriesTerm::tagged(a * int(2) + b, int(2), 3),
                SeriesTerm::tagged(a + b * int(2), int(2), 3),
            ]
        })
        .collect();
    Ok(opp
        .add(&tri)
        .add(&vtx)
        .add(&GeneralizedSeries::from_terms(opp3, Threshold::Infinite)))
}

/// `g = f + 2 Σ q^{s}` over the opposite sums `s`.
pub fn g_series(f: &GeneralizedSeries, opposite_sums: &[Q]) -> GeneralizedSeries {
    let extra = GeneralizedSeries::from_terms(
        opposite_sums.iter().map(|s| SeriesTerm::tagged(s.clone(), int(2), 2)).collect::<Vec<_>>(),
        Threshold::Infinite,
    );
    f.add(&extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{complete_space, tetrahedron};
    use crate::metric::{random_metric_space, RandomSpaceOptions};

    #[test]
    fn regular_tetrahedron() {
        let s = complete_space(4, &int(1)).unwrap();
        let f3 = f3_part(&s).unwrap();
        assert_eq!(f3, GeneralizedSeries::polynomial([(int(2), int(-6)), (int(3), int(4))]));
        let g3 = g_series(&f3, &[int(2), int(2), int(2)]);
        assert_eq!(g3, GeneralizedSeries::polynomial([(int(3), int(4))]));
    }

    #[test]
    fn low_parts_vanish() {
        for seed in 0..8 {
            let s = random_metric_space(4, seed, &RandomSpaceOptions::default()).unwrap();
            let parts = f_parts(&s, 4).unwrap();
            assert!(parts[0].is_empty());
            assert!(parts[1].is_empty());
            let opp = index_sum(&s, IndexSetKind::OppositePairs, &[(0, 1), (2, 3)], -2);
            assert_eq!(parts[2], opp);
            assert_eq!(parts[2].add(&parts[3]), f3_part(&s).unwrap());
        }
    }

    #[test]
    fn f_from_series_agrees_with_parts() {
        let s = tetrahedron(&(7..=12).map(int).collect::<Vec<_>>()).unwrap();
        let m = path_expansion(&s, 3).unwrap().series;
        let f = f_series(&m, &s.edge_vector()).unwrap();
        let parts = f_parts(&s, 3).unwrap();
        let by_index = parts.iter().fold(GeneralizedSeries::zero(), |a, p| a.add(p));
        // below 4 ℓ_min = 28 only d-index ≤ 3 terms appear
        assert!(f.agrees_with(&by_index.truncated(f.exact_below())));
        assert_eq!(f.exact_below(), &Threshold::Finite(int(28)));
    }

    #[test]
    fn sigma_counts_edges() {
        let s = complete_space(3, &int(2)).unwrap();
        assert_eq!(sigma_series(&s, 2), GeneralizedSeries::polynomial([(int(4), int(3))]));
        assert!(f_series(&GeneralizedSeries::zero(), &[int(1)]).is_err());
    }
}
