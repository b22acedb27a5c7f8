//! Recovering a finite metric space, up to isometry, from magnitude data.
//!
//! Three routes:
//! - three points from the exact limits `M'(0+), M''(0+), M'''(0+)`;
//! - generic lengths (rationally independent, or the strict virtual triangle
//!   inequality plus low-order genericity) from the formal series: edges,
//!   then triangle and open 3-path sums, then assembly;
//! - four points under the strict virtual triangle inequality from the
//!   series through d-index 3 and `M_1`.
//!
//! Every route finishes with a forward check and reports failures instead of
//! guessing.

mod cubic;
mod edges;
mod four_point;
mod triples;

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::Serialize;

pub use cubic::{n3_side_lengths, reconstruct_n3, N3Invariants, SideLengths};
pub use edges::{detect_complete_graph, edges_from_series_ri, edges_from_series_svti, in_span};
pub use four_point::{
    n4_opposite_combination, n4_opposite_sums, n4_resolve_swap, realising_pairings, reconstruct_n4_svti,
    CombChoice, N4Trace, OppositeCase, OppositePairing, OppositeSums,
};
pub use triples::{assemble_from_triples, triple_sums_from_series, TripleSumData};

use crate::error::{MagnitudeError, Result};
use crate::formal::{path_expansion, MAX_WALKS};
use crate::metric::{EdgeLengthMultiset, FiniteMetricSpace};
use crate::rational::Q;
use crate::series::{GeneralizedSeries, Threshold};
use crate::small_scale::{derivative_limits, m1_n4_closed, AsymptoticDerivatives};

/// Deepest genericity level reported in certificates.
const GENERICITY_DEPTH: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    N3,
    Ri,
    SvtiGeneric,
    N4Svti,
    Auto,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::N3 => "n3",
            Mode::Ri => "ri",
            Mode::SvtiGeneric => "svti_generic",
            Mode::N4Svti => "n4_svti",
            Mode::Auto => "auto",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = MagnitudeError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "n3" => Mode::N3,
            "ri" => Mode::Ri,
            "svti_generic" | "svti-generic" => Mode::SvtiGeneric,
            "n4_svti" | "n4-svti" => Mode::N4Svti,
            "auto" => Mode::Auto,
            other => return Err(MagnitudeError::InvalidInput(format!("unknown reconstruction mode {other:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub enum ReconstructionInput {
    /// A truncated formal series; its constant term is the number of points.
    Series { series: GeneralizedSeries, m1: Option<Q> },
    Derivatives(AsymptoticDerivatives),
}

impl ReconstructionInput {
    pub fn series(series: GeneralizedSeries) -> Self {
        ReconstructionInput::Series { series, m1: None }
    }

    /// The data a space would hand to `mode`: derivative limits for three
    /// points, the series exact below `(k+1)·ℓ_min` otherwise (plus `M_1`
    /// for four points).
    pub fn of_space(space: &FiniteMetricSpace, mode: Mode, k_max: usize) -> Result<Self> {
        Ok(match mode {
            Mode::N3 => ReconstructionInput::Derivatives(derivative_limits(space)?),
            Mode::N4Svti => ReconstructionInput::Series {
                series: path_expansion(space, k_max)?.series,
                m1: Some(m1_n4_closed(space)?),
            },
            _ => ReconstructionInput::series(path_expansion(space, k_max)?.series),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// The route that produced the space.
    pub applied: String,
    pub checks: Vec<Check>,
    /// Decisions taken along the way, and routes tried before `applied`.
    pub case_path: Vec<String>,
}

impl Certificate {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub space: FiniteMetricSpace,
    pub certificate: Certificate,
}

pub fn reconstruct(input: &ReconstructionInput, mode: Mode) -> Result<ReconstructionResult> {
    match (input, mode) {
        (ReconstructionInput::Derivatives(m), Mode::N3 | Mode::Auto) => n3_route(m),
        (ReconstructionInput::Derivatives(_), _) => Err(MagnitudeError::InvalidInput(format!(
            "mode {mode} needs a series, not derivative limits"
        ))),
        (ReconstructionInput::Series { .. }, Mode::N3) => Err(MagnitudeError::InvalidInput(
            "mode n3 needs the derivative limits M1, M2, M3".into(),
        )),
        (ReconstructionInput::Series { series, .. }, Mode::Ri) => generic_route(series, Route::Ri),
        (ReconstructionInput::Series { series, .. }, Mode::SvtiGeneric) => generic_route(series, Route::Svti),
        (ReconstructionInput::Series { series, m1 }, Mode::N4Svti) => n4_route(series, m1.as_ref()),
        (ReconstructionInput::Series { series, m1 }, Mode::Auto) => auto_route(series, m1.as_ref()),
    }
}

fn point_count(series: &GeneralizedSeries) -> Result<usize> {
    let c = series.coefficient_at(&Q::from_integer(0.into()));
    c.is_integer()
        .then(|| c.to_integer().to_usize())
        .flatten()
        .filter(|&n| n >= 2)
        .ok_or_else(|| MagnitudeError::InvalidInput(format!("constant term {c} is not a point count ≥ 2")))
}

fn n3_route(m: &AsymptoticDerivatives) -> Result<ReconstructionResult> {
    let space = reconstruct_n3(m)?;
    let back = derivative_limits(&space)?;
    let checks = vec![Check::new(
        "derivative limits reproduced",
        &back == m,
        format!("M1 = {}, M2 = {}, M3 = {}", back.m1, back.m2, back.m3),
    )];
    finish(space, Mode::N3, checks, vec!["side lengths from the cubic".into()])
}

#[derive(Clone, Copy)]
enum Route {
    Ri,
    Svti,
}

fn generic_route(series: &GeneralizedSeries, route: Route) -> Result<ReconstructionResult> {
    let n = point_count(series)?;
    let n_edges = n * (n - 1) / 2;
    let (edges, mode) = match route {
        Route::Ri => (edges_from_series_ri(series, n_edges)?, Mode::Ri),
        Route::Svti => (edges_from_series_svti(series, n_edges)?, Mode::SvtiGeneric),
    };
    let mut case_path = vec![format!("edges: {}", join(edges.lengths()))];
    let space = if n == 2 {
        FiniteMetricSpace::from_edge_lengths(2, edges.lengths())?
    } else {
        let triples = triple_sums_from_series(series, &edges)?;
        case_path.push(format!(
            "{} triangle sums, {} open 3-path sums",
            triples.triangles.len(),
            triples.open3paths.len()
        ));
        assemble_from_triples(&triples.triangles, &triples.open3paths)?
    };
    let mut checks = vec![genericity_check(&space.edge_lengths())];
    if let Route::Svti = route {
        checks.push(Check::new("strict virtual triangle inequality", space.satisfies_svti(), ""));
    }
    checks.push(forward_check(&space, series)?);
    finish(space, mode, checks, case_path)
}

fn n4_route(series: &GeneralizedSeries, m1: Option<&Q>) -> Result<ReconstructionResult> {
    let n = point_count(series)?;
    if n != 4 {
        return Err(MagnitudeError::WrongSize { expected: 4, got: n });
    }
    let (space, trace) = reconstruct_n4_svti(series, m1)?;
    let case_path = vec![
        format!("edges: {}", join(trace.edges.lengths())),
        format!("opposite sums {:?}: {}", trace.opposite.case, join(&trace.opposite.sums)),
        format!("pairing: {}", trace.pairing.comb_choice),
        if trace.swap_product_vanished {
            "swap: candidates isometric".into()
        } else if m1.is_some() {
            "swap: decided by M1".into()
        } else {
            "swap: decided by the series".into()
        },
    ];
    let mut checks = vec![Check::new("strict virtual triangle inequality", space.satisfies_svti(), "")];
    if let Some(m1) = m1 {
        let got = m1_n4_closed(&space)?;
        checks.push(Check::new("M1 reproduced", &got == m1, format!("M1 = {got}")));
    }
    checks.push(forward_check(&space, series)?);
    finish(space, Mode::N4Svti, checks, case_path)
}

fn auto_route(series: &GeneralizedSeries, m1: Option<&Q>) -> Result<ReconstructionResult> {
    let n = point_count(series)?;
    let mut tried = Vec::new();
    type Attempt<'a> = Box<dyn Fn() -> Result<ReconstructionResult> + 'a>;
    let mut attempts: Vec<(Mode, Attempt)> = Vec::new();
    if n == 4 && edges_from_series_svti(series, 6).is_ok() {
        attempts.push((Mode::N4Svti, Box::new(move || n4_route(series, m1))));
    }
    attempts.push((Mode::Ri, Box::new(|| generic_route(series, Route::Ri))));
    attempts.push((Mode::SvtiGeneric, Box::new(|| generic_route(series, Route::Svti))));
    let mut last = None;
    for (mode, attempt) in attempts {
        match attempt() {
            Ok(mut r) if r.certificate.all_passed() => {
                tried.append(&mut r.certificate.case_path);
                r.certificate.case_path = tried;
                return Ok(r);
            }
            Ok(r) => tried.push(format!("{mode}: failed checks {:?}", failed(&r.certificate))),
            Err(e) => {
                tried.push(format!("{mode}: {e}"));
                last = Some(e);
            }
        }
    }
    Err(last.unwrap_or_else(|| MagnitudeError::Undecided(format!("no route passed its checks: {}", tried.join("; ")))))
}

fn failed(c: &Certificate) -> Vec<&str> {
    c.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
}

fn finish(space: FiniteMetricSpace, mode: Mode, checks: Vec<Check>, case_path: Vec<String>) -> Result<ReconstructionResult> {
    Ok(ReconstructionResult { space, certificate: Certificate { applied: mode.name().into(), checks, case_path } })
}

fn join(v: &[Q]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Largest `p ≤ 5` for which the lengths are `p`-generic.
fn genericity_check(edges: &EdgeLengthMultiset) -> Check {
    let mut depth = 0;
    for p in 1..=GENERICITY_DEPTH {
        match edges.is_p_generic(p) {
            Ok(true) => depth = p,
            Ok(false) => break,
            Err(e) => return Check::new("genericity depth", depth >= 1, format!("{depth} (stopped: {e})")),
        }
    }
    Check::new("genericity depth", depth >= 1, depth.to_string())
}

/// Recomputes the series of `space` to the input's threshold and compares.
fn forward_check(space: &FiniteMetricSpace, series: &GeneralizedSeries) -> Result<Check> {
    let l_min = space.min_distance();
    let n = space.n() as f64;
    let cap = |k: usize| n * (n - 1.0).powi(k as i32) <= MAX_WALKS as f64;
    let k = match series.exact_below() {
        Threshold::Finite(t) => (t / &l_min).ceil().to_integer().to_usize().unwrap_or(usize::MAX).saturating_sub(1),
        Threshold::Infinite => match series.terms().iter().map(|t| t.d_index).collect::<Option<Vec<_>>>() {
            Some(tags) => tags.into_iter().max().unwrap_or(0),
            None => return Ok(Check::new("forward series", false, "untagged polynomial input cannot be compared")),
        },
    };
    if !cap(k) {
        return Ok(Check::new("forward series", false, format!("d-index cutoff {k} exceeds the walk capacity")));
    }
    let p = path_expansion(space, k)?;
    let ok = match series.exact_below() {
        Threshold::Infinite => p.polynomial() == *series,
        Threshold::Finite(_) => p.series.agrees_with(series),
    };
    Ok(Check::new("forward series", ok, format!("d-index cutoff {k}")))
}
