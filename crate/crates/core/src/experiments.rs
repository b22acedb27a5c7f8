//! Deterministic experiments with pass/fail reports.
//!
//! Reports serialise without their runtime so that the JSON is byte-stable
//! for fixed seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::fixtures::{digit_separated_space, k32_space, leinster_pair, reordered_path_pair, tetrahedron};
use crate::formal::path_expansion;
use crate::metric::{are_isometric, edge_pairs, random_metric_space, FiniteMetricSpace, RandomSpaceOptions};
use crate::numeric::{grid_points, magnitude_at, magnitude_grid, Spacing, DOUBLE_BITS};
use crate::rational::{frac, int, Q};
use crate::reconstruction::{reconstruct, Check, Mode, ReconstructionInput};
use crate::series::GeneralizedSeries;
use crate::small_scale::{
    compute_nu_delta, delta2_closed, delta3_by_index_sets, delta3_closed, delta3_swap_difference, delta4_k32,
    derivative_limits, triangle_m1_closed, triangle_m2_closed,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip)]
    pub runtime: Duration,
    /// Named plot-ready CSV outputs.
    #[serde(skip)]
    pub artifacts: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json(self)
    }

    /// One `name<TAB>status` line per check.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("check\tstatus\tdetail\n");
        for c in &self.checks {
            out += &format!("{}\t{}\t{}\n", c.name, if c.passed { "pass" } else { "fail" }, c.detail);
        }
        out
    }
}

struct Builder {
    name: String,
    start: Instant,
    checks: Vec<Check>,
    metrics: BTreeMap<String, Value>,
    artifacts: BTreeMap<String, String>,
}

impl Builder {
    fn new(name: &str) -> Self {
        Builder {
            name: name.into(),
            start: Instant::now(),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    fn metric(&mut self, name: &str, v: impl Into<Value>) {
        self.metrics.insert(name.into(), v.into());
    }

    fn finish(self) -> ExperimentReport {
        let status = if self.checks.iter().all(|c| c.passed) { Status::Pass } else { Status::Fail };
        ExperimentReport {
            name: self.name,
            status,
            checks: self.checks,
            metrics: self.metrics,
            runtime: self.start.elapsed(),
            artifacts: self.artifacts,
        }
    }
}

/// `4 − 6q + 6q² − …`, the expansion of `(4 − 2q)/(1 + q)`, below `q^{k+1}`.
fn tree_series(k: usize) -> GeneralizedSeries {
    let terms = (0..=k as i64).map(|j| (int(j), int(if j == 0 { 4 } else if j % 2 == 1 { -6 } else { 6 })));
    GeneralizedSeries::from_pairs(terms, crate::series::Threshold::Finite(int(k as i64 + 1)))
}

fn tree_magnitude(t: f64) -> f64 {
    let q = (-t).exp();
    (4.0 - 2.0 * q) / (1.0 + q)
}

/// Two non-isometric trees with equal magnitude, and the reordered-lengths variant.
pub fn leinster_pair_experiment() -> Result<ExperimentReport> {
    const DINDEX: usize = 6;
    let mut b = Builder::new("leinster-pair");
    let (path, star) = leinster_pair();
    let sp = path_expansion(&path.space, DINDEX)?.series;
    let ss = path_expansion(&star.space, DINDEX)?.series;
    b.check("series agree below the common threshold", sp.agrees_with(&ss), format!("d-index ≤ {DINDEX}"));
    b.check("series match (4 − 2q)/(1 + q)", sp.agrees_with(&tree_series(DINDEX)), sp.exact_below().to_string());

    let ts = grid_points(0.1, 10.0, 50, Spacing::Linear)?;
    let mut worst: f64 = 0.0;
    for &t in &ts {
        let want = tree_magnitude(t);
        for s in [&path.space, &star.space] {
            worst = worst.max((magnitude_at(s, t, DOUBLE_BITS)?.value - want).abs());
        }
    }
    b.metric("max_abs_error", worst);
    b.check("magnitudes match the closed form to 1e-10", worst <= 1e-10, format!("{worst:e} over 50 points in [0.1, 10]"));

    let at_ln2 = magnitude_at(&path.space, std::f64::consts::LN_2, DOUBLE_BITS)?.value;
    b.metric("value_at_q_half", at_ln2);
    b.check("M(ln 2) = 2", (at_ln2 - 2.0).abs() <= 1e-12, format!("{at_ln2}"));
    b.check("path and star are not isometric", are_isometric(&path.space, &star.space)?.is_none(), "");

    let (p1, p2) = reordered_path_pair();
    let s1 = path_expansion(&p1.space, DINDEX)?.series;
    let s2 = path_expansion(&p2.space, DINDEX)?.series;
    b.check("reordered paths: equal series", s1.agrees_with(&s2), format!("{} vs {}", p1.name, p2.name));
    b.check("reordered paths: not isometric", are_isometric(&p1.space, &p2.space)?.is_none(), "");
    Ok(b.finish())
}

/// Edge vectors (lexicographic edge order) of the isometry classes of
/// assignments of `lengths` to the edges of `K_4`, sorted.
pub fn tetrahedron_classes(lengths: &[Q]) -> Vec<Vec<Q>> {
    let edges = edge_pairs(4);
    let vertex_perms = permutations(4);
    let mut classes = BTreeSet::new();
    for p in permutations(edges.len()) {
        let e: Vec<&Q> = p.iter().map(|&i| &lengths[i]).collect();
        let key = vertex_perms
            .iter()
            .map(|s| {
                edges
                    .iter()
                    .map(|&(a, b)| {
                        let pair = (s[a].min(s[b]), s[a].max(s[b]));
                        e[edges.iter().position(|&x| x == pair).expect("an edge")].clone()
                    })
                    .collect::<Vec<Q>>()
            })
            .min()
            .expect("24 relabellings");
        classes.insert(key);
    }
    classes.into_iter().collect()
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

/// The tetrahedra with edges `{7, …, 12}`: class count, pairwise
/// distinguishability by series and by value, and reconstruction of each.
pub fn tetrahedra_experiment() -> Result<ExperimentReport> {
    const DINDEX: usize = 3;
    let mut b = Builder::new("tetrahedra");
    let lengths: Vec<Q> = (7..=12).map(int).collect();
    let classes = tetrahedron_classes(&lengths);
    b.metric("classes", classes.len());
    b.check("30 isometry classes", classes.len() == 30, classes.len().to_string());

    let mut spaces = Vec::new();
    let mut invalid = 0;
    for c in &classes {
        match tetrahedron(c) {
            Ok(s) if s.satisfies_svti() => spaces.push(s),
            _ => invalid += 1,
        }
    }
    b.check("every class is a metric with the strict virtual triangle inequality", invalid == 0, format!("{invalid} failures"));

    let series: Vec<GeneralizedSeries> =
        spaces.iter().map(|s| path_expansion(s, DINDEX).map(|p| p.series)).collect::<Result<_>>()?;
    let ts = grid_points(0.01, 1.0, 100, Spacing::Geometric)?;
    let values: Vec<Vec<f64>> = spaces
        .iter()
        .map(|s| ts.iter().map(|&t| magnitude_at(s, t, DOUBLE_BITS).map(|m| m.value)).collect())
        .collect::<Result<_>>()?;
    let (mut pairs, mut by_series, mut by_value) = (0, 0, 0);
    let mut min_gap = f64::INFINITY;
    for i in 0..spaces.len() {
        for j in i + 1..spaces.len() {
            pairs += 1;
            if !series[i].agrees_with(&series[j]) {
                by_series += 1;
            }
            let gap = values[i].iter().zip(&values[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            min_gap = min_gap.min(gap);
            if gap > 1e-6 {
                by_value += 1;
            }
        }
    }
    b.metric("pairs", pairs);
    b.metric("pairs_distinguished_by_series", by_series);
    b.metric("pairs_distinguished_by_value", by_value);
    b.metric("min_value_gap", min_gap);
    b.check("435 pairs", pairs == 435, pairs.to_string());
    b.check("series distinguish every pair", by_series == pairs, format!("{by_series}/{pairs} at d-index ≤ {DINDEX}"));
    b.check(
        "values distinguish every pair by more than 1e-6",
        by_value == pairs,
        format!("{by_value}/{pairs}, smallest gap {min_gap:e} on 100 points in [0.01, 1]"),
    );

    let mut rebuilt = 0;
    let mut failures = Vec::new();
    for (k, s) in spaces.iter().enumerate() {
        let input = ReconstructionInput::of_space(s, Mode::N4Svti, DINDEX)?;
        match reconstruct(&input, Mode::N4Svti) {
            Ok(r) if are_isometric(s, &r.space)?.is_some() => rebuilt += 1,
            Ok(_) => failures.push(format!("class {k}: wrong space")),
            Err(e) => failures.push(format!("class {k}: {e}")),
        }
    }
    b.metric("reconstructed", rebuilt);
    b.check("every class reconstructs", rebuilt == spaces.len() && !spaces.is_empty(), failures.join("; "));
    Ok(b.finish())
}

/// `δ_4` of `K_{3,2}` plus an edge of length `ℓ`, against `−4ℓ(3ℓ − 4)`, and
/// the magnitude curve at `ℓ = 3/2`.
pub fn k32_experiment(ells: &[Q]) -> Result<ExperimentReport> {
    let mut b = Builder::new("k32");
    for ell in ells {
        let expected = -int(4) * ell * (int(3) * ell - int(4));
        let (ok, detail) = match delta4_k32(ell) {
            Ok(d) => (d == expected, d.to_string()),
            Err(e) => (false, e.to_string()),
        };
        b.metric(&format!("delta4[{ell}]"), detail.clone());
        b.check(&format!("delta4 at ell = {ell} equals {expected}"), ok, detail);
    }
    let curve = magnitude_grid(&k32_space(&frac(3, 2))?, 0.01, 10.0, 200, Spacing::Geometric, DOUBLE_BITS)?;
    b.metric("curve_points", curve.samples.len());
    b.artifacts.insert("k32_curve_3_2.csv".into(), curve.to_csv(12));
    Ok(b.finish())
}

pub fn default_k32_lengths() -> Vec<Q> {
    vec![frac(1, 2), int(1), frac(4, 3), frac(3, 2), int(2)]
}

/// The exact small-scale identities over seeded random spaces.
pub fn identities_experiment(seed: u64) -> Result<ExperimentReport> {
    let mut b = Builder::new("identities");
    let opts = RandomSpaceOptions::default();
    let (mut leading, mut d2, mut d3, mut total) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for n in 3..=6 {
        for k in 0..50 {
            let s = random_metric_space(n, sample_seed(seed, (n * 1000 + k) as u64), &opts)?;
            total += 1;
            let c = compute_nu_delta(&s, n - 1)?;
            if c.satisfies_leading_identities(n) {
                leading += 1;
            } else {
                bad.push(format!("leading identity n={n} k={k}"));
            }
            if n == 3 {
                let closed = delta2_closed(&s)?;
                if closed == c.delta[2] && closed > Q::from_integer(0.into()) {
                    d2 += 1;
                } else {
                    bad.push(format!("delta2 n=3 k={k}: {closed} vs {}", c.delta[2]));
                }
            }
            if n == 4 {
                let (closed, sets) = (delta3_closed(&s)?, delta3_by_index_sets(&s)?);
                if closed == c.delta[3] && sets == closed && closed >= Q::from_integer(0.into()) {
                    d3 += 1;
                } else {
                    bad.push(format!("delta3 k={k}: {closed}, {sets} vs {}", c.delta[3]));
                }
            }
        }
    }
    b.metric("spaces", total);
    b.check("leading coefficients vanish and nu = delta at order n−1", leading == total, format!("{leading}/{total}"));
    b.check("delta2 closed form equals the coefficient and is positive", d2 == 50, format!("{d2}/50"));
    b.check("delta3 closed forms equal the coefficient and are non-negative", d3 == 50, format!("{d3}/50"));

    let mut swaps = 0;
    for k in 0..100 {
        let s = random_metric_space(4, sample_seed(seed, 10_000 + k), &opts)?;
        match delta3_swap_difference(&s) {
            Ok(_) => swaps += 1,
            Err(e) => bad.push(e.to_string()),
        }
    }
    b.check("swap product formula matches the recomputed difference", swaps == 100, format!("{swaps}/100"));

    let mut triangles = 0;
    for k in 0..100 {
        let s = random_metric_space(3, sample_seed(seed, 20_000 + k), &opts)?;
        let m = derivative_limits(&s)?;
        let (a, bb, c) = (s.d(0, 1), s.d(0, 2), s.d(1, 2));
        if m.m1 == triangle_m1_closed(a, bb, c) && m.m2 == triangle_m2_closed(a, bb, c) {
            triangles += 1;
        } else {
            bad.push(format!("triangle closed forms k={k}"));
        }
    }
    b.check("triangle M1, M2 closed forms match the series quotient", triangles == 100, format!("{triangles}/100"));
    bad.truncate(10);
    b.metric("first_failures", bad);
    Ok(b.finish())
}

fn sample_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
}

/// The space family used for a reconstruction mode.
pub fn roundtrip_space(n: usize, mode: Mode, seed: u64) -> Result<FiniteMetricSpace> {
    match mode {
        Mode::N3 => random_metric_space(n, seed, &RandomSpaceOptions::default()),
        Mode::N4Svti => random_metric_space(n, seed, &RandomSpaceOptions::svti()),
        Mode::Ri | Mode::SvtiGeneric | Mode::Auto => digit_separated_space(n, seed),
    }
}

/// d-index cutoff handed to each mode: 3 suffices for four points and for
/// lengths within a factor 4/3, 5 leaves room for the generic routes' checks.
pub fn roundtrip_dindex(n: usize, mode: Mode) -> usize {
    match mode {
        Mode::N3 => 0,
        Mode::N4Svti => 3,
        _ if n <= 5 => 5,
        _ => 3,
    }
}

/// Reconstructs `count` seeded spaces from their own data and compares.
pub fn roundtrip_experiment(n: usize, count: usize, mode: Mode, seed: u64) -> Result<ExperimentReport> {
    let mut b = Builder::new(&format!("roundtrip-{mode}-n{n}"));
    let k = roundtrip_dindex(n, mode);
    let mut ok = 0;
    let mut failures = Vec::new();
    for i in 0..count {
        let s = roundtrip_space(n, mode, sample_seed(seed, i as u64))?;
        let input = ReconstructionInput::of_space(&s, mode, k)?;
        match reconstruct(&input, mode) {
            Ok(r) if r.space.n() == s.n() && are_isometric(&s, &r.space)?.is_some() && r.certificate.all_passed() => ok += 1,
            Ok(r) => failures.push(format!("sample {i}: mismatch ({:?})", r.certificate.checks)),
            Err(e) => failures.push(format!("sample {i}: {e}")),
        }
    }
    b.metric("samples", count);
    b.metric("reconstructed", ok);
    b.metric("dindex", k);
    failures.truncate(10);
    b.check("every sample reconstructs to an isometric space", ok == count, failures.join("; "));
    Ok(b.finish())
}

pub fn all_experiments(seed: u64) -> Result<Vec<ExperimentReport>> {
    Ok(vec![
        leinster_pair_experiment()?,
        tetrahedra_experiment()?,
        k32_experiment(&default_k32_lengths())?,
        identities_experiment(seed)?,
    ])
}

/// A stable summary of several reports.
pub fn summary_json(reports: &[ExperimentReport]) -> String {
    crate::io::to_json(&json!({
        "status": if reports.iter().all(ExperimentReport::passed) { "pass" } else { "fail" },
        "experiments": reports,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_count_and_canonical_forms() {
        let c = tetrahedron_classes(&(7..=12).map(int).collect::<Vec<_>>());
        assert_eq!(c.len(), 30);
        assert_eq!(tetrahedron_classes(&vec![int(1); 6]).len(), 1);
        // two equal lengths: adjacent or opposite
        assert_eq!(tetrahedron_classes(&[1, 1, 2, 2, 2, 2].map(int)).len(), 2);
    }

    #[test]
    fn leinster_pair_passes() {
        let r = leinster_pair_experiment().unwrap();
        assert!(r.passed(), "{}", r.to_tsv());
    }

    #[test]
    fn k32_values() {
        let r = k32_experiment(&default_k32_lengths()).unwrap();
        assert!(r.passed(), "{}", r.to_tsv());
        assert_eq!(r.metrics["delta4[3/2]"], json!("-3"));
        assert_eq!(r.metrics["delta4[4/3]"], json!("0"));
        assert_eq!(r.metrics["delta4[1]"], json!("4"));
        assert!(r.artifacts["k32_curve_3_2.csv"].starts_with("t,M,cond\n"));
    }

    #[test]
    fn reports_are_byte_stable() {
        let a = roundtrip_experiment(3, 5, Mode::N3, 1).unwrap();
        let b = roundtrip_experiment(3, 5, Mode::N3, 1).unwrap();
        assert!(a.passed());
        assert_eq!(a.to_json(), b.to_json());
        assert!(!a.to_json().contains("runtime"));
    }

    #[test]
    fn small_roundtrips() {
        for (n, mode) in [(4, Mode::N4Svti), (5, Mode::Ri), (5, Mode::SvtiGeneric), (4, Mode::Auto)] {
            let r = roundtrip_experiment(n, 2, mode, 9).unwrap();
            assert!(r.passed(), "{mode}: {}", r.to_tsv());
        }
    }
}
