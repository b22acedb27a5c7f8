//! File formats: space JSON, series text (see [`GeneralizedSeries`]'s
//! `Display`/`FromStr`) and sample CSV (see `SampleGrid`).
//!
//! A space file is either a distance matrix
//! `{"n": 3, "labels": ["a", "b", "c"], "d": [["0", "3", "4"], ...]}`
//! or a point cloud `{"points": [["0", "0"], ["3", "4"]], "metric": "euclidean-squared-rational"}`.
//! Numbers are strings holding `p/q` or an exact decimal; plain JSON integers
//! are accepted too.

use std::fmt;
use std::path::Path;

use num_traits::Zero;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::{MagnitudeError, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::{exact_sqrt, parse_rational, Q};

pub const POINT_CLOUD_METRIC: &str = "euclidean-squared-rational";

struct Rational(Q);

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string such as \"3/4\" or \"0.75\", or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                parse_rational(v).map(Rational).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational(Q::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational(Q::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
                Err(E::custom(format!("floating-point literal {v}; quote it as a string to parse it exactly")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDoc {
    n: Option<usize>,
    labels: Option<Vec<String>>,
    d: Option<Vec<Vec<Rational>>>,
    points: Option<Vec<Vec<Rational>>>,
    metric: Option<String>,
}

#[derive(Serialize)]
struct SpaceOut<'a> {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
    d: Vec<Vec<String>>,
}

fn json_error(e: serde_json::Error) -> MagnitudeError {
    MagnitudeError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses a space file. Only the matrix shape is checked; call
/// [`FiniteMetricSpace::validate`] for the metric axioms.
pub fn parse_space_json(text: &str) -> Result<FiniteMetricSpace> {
    let doc: SpaceDoc = serde_json::from_str(text).map_err(json_error)?;
    let rows = match (doc.d, doc.points) {
        (Some(d), None) => {
            if doc.metric.is_some() {
                return Err(MagnitudeError::InvalidInput("\"metric\" only applies to point clouds".into()));
            }
            d.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect()
        }
        (None, Some(points)) => {
            match doc.metric.as_deref() {
                Some(POINT_CLOUD_METRIC) => {}
                other => {
                    return Err(MagnitudeError::InvalidInput(format!(
                        "point clouds need \"metric\": \"{POINT_CLOUD_METRIC}\", got {other:?}"
                    )))
                }
            }
            let points: Vec<Vec<Q>> = points.into_iter().map(|p| p.into_iter().map(|x| x.0).collect()).collect();
            point_cloud_distances(&points)?
        }
        (Some(_), Some(_)) => return Err(MagnitudeError::InvalidInput("give either \"d\" or \"points\", not both".into())),
        (None, None) => return Err(MagnitudeError::InvalidInput("missing \"d\" or \"points\"".into())),
    };
    let space = FiniteMetricSpace::from_rows(rows)?;
    if let Some(n) = doc.n {
        if n != space.n() {
            return Err(MagnitudeError::WrongSize { expected: n, got: space.n() });
        }
    }
    match doc.labels {
        Some(l) => space.with_labels(l),
        None => Ok(space),
    }
}

/// Euclidean distances, kept only when every squared distance is a perfect square.
fn point_cloud_distances(points: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let dim = points.first().map_or(0, Vec::len);
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(MagnitudeError::InvalidInput(format!("point {i} has {} coordinates, expected {dim}", points[i].len())));
    }
    let n = points.len();
    let mut d = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let sq = points[i].iter().zip(&points[j]).fold(Q::zero(), |acc, (a, b)| {
                let x = a - b;
                acc + &x * &x
            });
            let dist = exact_sqrt(&sq).ok_or_else(|| {
                MagnitudeError::InvalidInput(format!(
                    "distance between points {i} and {j} is √({sq}), not rational; irrational distances are rejected"
                ))
            })?;
            d[i][j] = dist.clone();
            d[j][i] = dist;
        }
    }
    Ok(d)
}

pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    let out = SpaceOut {
        n: space.n(),
        labels: space.labels(),
        d: space.rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("plain data serialises");
    s.push('\n');
    s
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| MagnitudeError::Io(format!("{}: {e}", path.display())))
}

pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    parse_space_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{all_fixtures, broken_triangle};
    use crate::rational::{frac, int};

    #[test]
    fn fixtures_roundtrip_bit_exactly() {
        for f in all_fixtures() {
            let text = space_to_json(&f.space);
            let back = parse_space_json(&text).unwrap();
            assert_eq!(back, f.space, "{}", f.name);
            assert_eq!(space_to_json(&back), text);
        }
        let b = broken_triangle();
        let back = parse_space_json(&space_to_json(&b)).unwrap();
        assert!(!back.validate().ok);
    }

    #[test]
    fn labels_and_number_forms() {
        let s = parse_space_json(r#"{"n": 2, "labels": ["x", "y"], "d": [[0, "1.25"], ["5/4", "0"]]}"#).unwrap();
        assert_eq!(s.d(0, 1), &frac(5, 4));
        assert_eq!(s.labels().unwrap(), ["x", "y"]);
        assert_eq!(parse_space_json(&space_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn point_clouds() {
        let s = parse_space_json(r#"{"points": [["0", "0"], ["3", "0"], ["0", "4"]], "metric": "euclidean-squared-rational"}"#)
            .unwrap();
        assert_eq!(s.d(1, 2), &int(5));
        let e = parse_space_json(r#"{"points": [["0", "0"], ["1", "1"]], "metric": "euclidean-squared-rational"}"#);
        assert!(matches!(e, Err(MagnitudeError::InvalidInput(m)) if m.contains("√(2)")));
        assert!(parse_space_json(r#"{"points": [["0"], ["1"]]}"#).is_err());
    }

    #[test]
    fn diagnostics_carry_positions() {
        match parse_space_json("{\n  \"d\": [[\"0\", \"1/0\"],\n  [\"1\", \"0\"]]\n}") {
            Err(MagnitudeError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("zero denominator"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_space_json("{\"d\": [[0, 0.5]]}"), Err(MagnitudeError::Parse { .. })));
        assert!(matches!(parse_space_json("{\"d\": [[0, 1], [1, 0]], \"x\": 1}"), Err(MagnitudeError::Parse { .. })));
        assert!(matches!(
            parse_space_json("{\"n\": 3, \"d\": [[0, 1], [1, 0]]}"),
            Err(MagnitudeError::WrongSize { expected: 3, got: 2 })
        ));
    }
}
