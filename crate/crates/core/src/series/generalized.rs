use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{MagnitudeError, Result};
use crate::numeric::Real;
use crate::rational::{parse_rational, Q};

/// Exponent below which a truncated series is known to be complete.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Threshold {
    Finite(Q),
    /// The stored terms are the whole series.
    Infinite,
}

impl Threshold {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Threshold::Finite(q) => Some(q),
            Threshold::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Threshold::Infinite)
    }

    /// Whether exponent `e` lies strictly below the threshold.
    pub fn covers(&self, e: &Q) -> bool {
        match self {
            Threshold::Finite(t) => e < t,
            Threshold::Infinite => true,
        }
    }

    pub fn shifted(&self, by: &Q) -> Threshold {
        match self {
            Threshold::Finite(t) => Threshold::Finite(t + by),
            Threshold::Infinite => Threshold::Infinite,
        }
    }

    fn plus(&self, other: &Threshold) -> Threshold {
        match other {
            Threshold::Finite(q) => self.shifted(q),
            Threshold::Infinite => Threshold::Infinite,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(q) => write!(f, "{q}"),
            Threshold::Infinite => write!(f, "inf"),
        }
    }
}

/// One term `coefficient · q^exponent`, optionally tagged with its d-index
/// (the number of edge lengths summed in the exponent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTerm {
    pub exponent: Q,
    pub coefficient: Q,
    pub d_index: Option<usize>,
}

impl SeriesTerm {
    pub fn new(exponent: Q, coefficient: Q) -> Self {
        SeriesTerm { exponent, coefficient, d_index: None }
    }

    pub fn tagged(exponent: Q, coefficient: Q, d_index: usize) -> Self {
        SeriesTerm { exponent, coefficient, d_index: Some(d_index) }
    }
}

/// Binary operations accepted by [`GeneralizedSeries::combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
}

/// A finite sum `Σ a_i q^{e_i}` with rational exponents, exact below a threshold.
///
/// Terms are kept sorted by strictly increasing exponent with non-zero
/// coefficients, and every exponent lies below `exact_below`. Equality ignores
/// d-index tags.
#[derive(Clone, Debug)]
pub struct GeneralizedSeries {
    terms: Vec<SeriesTerm>,
    exact_below: Threshold,
}

impl PartialEq for GeneralizedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.exact_below == other.exact_below
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|(a, b)| a.exponent == b.exponent && a.coefficient == b.coefficient)
    }
}

impl Eq for GeneralizedSeries {}

fn merge_tag(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) if x == y => Some(x),
        _ => None,
    }
}

impl GeneralizedSeries {
    /// Normalises arbitrary terms: merges equal exponents, drops zero
    /// coefficients and anything at or above the threshold.
    pub fn from_terms(terms: impl IntoIterator<Item = SeriesTerm>, exact_below: Threshold) -> Self {
        let mut merged: BTreeMap<Q, (Q, Option<usize>)> = BTreeMap::new();
        for t in terms {
            if !exact_below.covers(&t.exponent) {
                continue;
            }
            match merged.get_mut(&t.exponent) {
                Some((c, tag)) => {
                    *c += &t.coefficient;
                    *tag = merge_tag(*tag, t.d_index);
                }
                None => {
                    merged.insert(t.exponent, (t.coefficient, t.d_index));
                }
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, (c, _))| !c.is_zero())
            .map(|(exponent, (coefficient, d_index))| SeriesTerm { exponent, coefficient, d_index })
            .collect();
        GeneralizedSeries { terms, exact_below }
    }

    /// Untagged `(exponent, coefficient)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Q, Q)>, exact_below: Threshold) -> Self {
        Self::from_terms(pairs.into_iter().map(|(e, c)| SeriesTerm::new(e, c)), exact_below)
    }

    /// An exact finite sum.
    pub fn polynomial(pairs: impl IntoIterator<Item = (Q, Q)>) -> Self {
        Self::from_pairs(pairs, Threshold::Infinite)
    }

    /// The exact zero series.
    pub fn zero() -> Self {
        GeneralizedSeries { terms: Vec::new(), exact_below: Threshold::Infinite }
    }

    pub fn constant(c: Q) -> Self {
        Self::polynomial([(Q::zero(), c)])
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn exact_below(&self) -> &Threshold {
        &self.exact_below
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of `q^e`; zero when absent.
    ///
    /// # Panics
    /// If `e` is not covered by the threshold, since the answer is unknown.
    pub fn coefficient_at(&self, e: &Q) -> Q {
        assert!(self.exact_below.covers(e), "exponent {e} is at or beyond the exactness threshold");
        match self.terms.binary_search_by(|t| t.exponent.cmp(e)) {
            Ok(i) => self.terms[i].coefficient.clone(),
            Err(_) => Q::zero(),
        }
    }

    /// Smallest exponent known to carry the first non-zero term, or the
    /// threshold when none is stored.
    fn valuation(&self) -> Threshold {
        match self.terms.first() {
            Some(t) => Threshold::Finite(t.exponent.clone()).min(self.exact_below.clone()),
            None => self.exact_below.clone(),
        }
    }

    /// Terms with positive exponent.
    pub fn positive_terms(&self) -> impl Iterator<Item = &SeriesTerm> {
        self.terms.iter().filter(|t| t.exponent.is_positive())
    }

    /// Same series with a lower exactness threshold.
    pub fn truncated(&self, below: &Threshold) -> Self {
        let t = below.clone().min(self.exact_below.clone());
        GeneralizedSeries {
            terms: self.terms.iter().filter(|x| t.covers(&x.exponent)).cloned().collect(),
            exact_below: t,
        }
    }

    /// Whether both series agree on every exponent below both thresholds.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let t = self.exact_below.clone().min(other.exact_below.clone());
        self.truncated(&t) == other.truncated(&t)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return GeneralizedSeries { terms: Vec::new(), exact_below: self.exact_below.clone() };
        }
        GeneralizedSeries {
            terms: self
                .terms
                .iter()
                .map(|t| SeriesTerm { coefficient: &t.coefficient * c, ..t.clone() })
                .collect(),
            exact_below: self.exact_below.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn add(&self, other: &Self) -> Self {
        let t = self.exact_below.clone().min(other.exact_below.clone());
        Self::from_terms(self.terms.iter().chain(&other.terms).cloned(), t)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product, exact below `min(T_a + v_b, T_b + v_a)` where `v` is the
    /// smallest exponent that can carry a term.
    pub fn mul(&self, other: &Self) -> Self {
        let t = self
            .exact_below
            .plus(&other.valuation())
            .min(other.exact_below.plus(&self.valuation()));
        let mut products = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                products.push(SeriesTerm {
                    exponent: &a.exponent + &b.exponent,
                    coefficient: &a.coefficient * &b.coefficient,
                    d_index: match (a.d_index, b.d_index) {
                        (Some(x), Some(y)) => Some(x + y),
                        _ => None,
                    },
                });
            }
        }
        Self::from_terms(products, t)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = GeneralizedSeries::constant(Q::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn combine(&self, other: &Self, op: SeriesOp) -> Self {
        match op {
            SeriesOp::Add => self.add(other),
            SeriesOp::Sub => self.sub(other),
            SeriesOp::Mul => self.mul(other),
        }
    }

    /// `Σ a_i q^{e_i}` over the stored terms.
    pub fn eval<R: Real>(&self, q: &R) -> R {
        let ln_q = q.ln();
        self.terms.iter().fold(q.zero_like(), |acc, t| {
            let power = if t.exponent.is_zero() {
                q.one_like()
            } else {
                ln_q.times(&q.from_q_like(&t.exponent)).exp()
            };
            acc.plus(&power.times(&q.from_q_like(&t.coefficient)))
        })
    }

    /// Value together with the truncation estimate `budget · q^{exact_below}`
    /// (zero for an exact series).
    pub fn eval_with_bound<R: Real>(&self, q: &R, budget: f64) -> (R, f64) {
        let bound = match &self.exact_below {
            Threshold::Infinite => 0.0,
            Threshold::Finite(t) => budget * q.ln().times(&q.from_q_like(t)).exp().to_f64(),
        };
        (self.eval(q), bound)
    }
}

impl fmt::Display for GeneralizedSeries {
    /// The text format: a `# exact_below:` header, then one
    /// `exponent<TAB>coefficient` line per term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# exact_below: {}", self.exact_below)?;
        for t in &self.terms {
            writeln!(f, "{}\t{}", t.exponent, t.coefficient)?;
        }
        Ok(())
    }
}

impl FromStr for GeneralizedSeries {
    type Err = MagnitudeError;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| MagnitudeError::parse(1, 1, "missing '# exact_below:' header"))?;
        let value = header
            .trim()
            .strip_prefix('#')
            .map(str::trim_start)
            .and_then(|h| h.strip_prefix("exact_below:"))
            .ok_or_else(|| MagnitudeError::parse(hline + 1, 1, "expected '# exact_below: <rational|inf>'"))?
            .trim();
        let exact_below = if value == "inf" {
            Threshold::Infinite
        } else {
            let col = header.find(value).unwrap_or(0) + 1;
            Threshold::Finite(parse_rational(value).map_err(|m| MagnitudeError::parse(hline + 1, col, m))?)
        };
        let mut terms: Vec<SeriesTerm> = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<(usize, &str)> = split_fields(line);
            if fields.len() != 2 {
                return Err(MagnitudeError::parse(
                    lineno,
                    1,
                    format!("expected 'exponent<TAB>coefficient', found {} fields", fields.len()),
                ));
            }
            let e = parse_rational(fields[0].1).map_err(|m| MagnitudeError::parse(lineno, fields[0].0, m))?;
            let c = parse_rational(fields[1].1).map_err(|m| MagnitudeError::parse(lineno, fields[1].0, m))?;
            if e.is_negative() {
                return Err(MagnitudeError::parse(lineno, fields[0].0, "negative exponent"));
            }
            if c.is_zero() {
                return Err(MagnitudeError::parse(lineno, fields[1].0, "zero coefficient"));
            }
            if !exact_below.covers(&e) {
                return Err(MagnitudeError::parse(lineno, fields[0].0, "exponent is not below exact_below"));
            }
            if let Some(prev) = terms.last() {
                if prev.exponent.cmp(&e) != Ordering::Less {
                    return Err(MagnitudeError::parse(lineno, fields[0].0, "exponents must strictly increase"));
                }
            }
            terms.push(SeriesTerm::new(e, c));
        }
        Ok(GeneralizedSeries { terms, exact_below })
    }
}

/// Whitespace-separated fields with their 1-based columns.
fn split_fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    fn poly(terms: &[(i64, i64)]) -> GeneralizedSeries {
        GeneralizedSeries::polynomial(terms.iter().map(|&(e, c)| (int(e), int(c))))
    }

    #[test]
    fn adding_zero_is_identity() {
        let a = poly(&[(0, 2), (1, -2)]);
        assert_eq!(a.add(&GeneralizedSeries::zero()), a);
    }

    #[test]
    fn polynomial_product() {
        let a = poly(&[(0, 2), (1, -2)]);
        let b = poly(&[(0, 1), (1, 1)]);
        assert_eq!(a.combine(&b, SeriesOp::Mul), poly(&[(0, 2), (2, -2)]));
    }

    #[test]
    fn self_difference_is_empty() {
        let a = GeneralizedSeries::from_pairs([(int(1), int(3))], Threshold::Finite(int(2)));
        let d = a.sub(&a);
        assert!(d.is_empty());
        assert_eq!(d.exact_below(), &Threshold::Finite(int(2)));
    }

    #[test]
    fn product_threshold() {
        // (1 - q + O(q^2)) * (q^3 + O(q^5)): exact below min(2 + 3, 5 + 0) = 5.
        let a = GeneralizedSeries::from_pairs([(int(0), int(1)), (int(1), int(-1))], Threshold::Finite(int(2)));
        let b = GeneralizedSeries::from_pairs([(int(3), int(1))], Threshold::Finite(int(5)));
        let p = a.mul(&b);
        assert_eq!(p.exact_below(), &Threshold::Finite(int(5)));
        assert_eq!(p, GeneralizedSeries::from_pairs([(int(3), int(1)), (int(4), int(-1))], Threshold::Finite(int(5))));
    }

    #[test]
    fn evaluation() {
        assert_eq!(poly(&[(0, 4)]).eval(&0.3f64), 4.0);
        assert!((poly(&[(0, 2), (1, -2), (2, 2)]).eval(&0.5f64) - 1.5).abs() < 1e-15);
        assert_eq!(GeneralizedSeries::zero().eval(&0.5f64), 0.0);
        let s = GeneralizedSeries::from_pairs([(frac(1, 2), int(1))], Threshold::Finite(int(3)));
        let (v, bound) = s.eval_with_bound(&0.25f64, 2.0);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((bound - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let s = GeneralizedSeries::from_pairs(
            [(int(0), int(4)), (frac(7, 3), frac(-5, 2)), (int(3), int(12))],
            Threshold::Finite(frac(10, 3)),
        );
        let text = s.to_string();
        assert_eq!(text, "# exact_below: 10/3\n0\t4\n7/3\t-5/2\n3\t12\n");
        let back: GeneralizedSeries = text.parse().unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_string(), text);
        let p: GeneralizedSeries = "# exact_below: inf\n".parse().unwrap();
        assert_eq!(p, GeneralizedSeries::zero());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = "# exact_below: 5\n1\t2\n3\tx\n".parse::<GeneralizedSeries>().unwrap_err();
        assert!(matches!(err, MagnitudeError::Parse { line: 3, column: 3, .. }), "{err:?}");
        let err = "# exact_below: 2\n3\t1\n".parse::<GeneralizedSeries>().unwrap_err();
        assert!(matches!(err, MagnitudeError::Parse { line: 2, .. }));
        let err = "1\t2\n".parse::<GeneralizedSeries>().unwrap_err();
        assert!(matches!(err, MagnitudeError::Parse { line: 1, .. }));
        let err = "# exact_below: inf\n2\t1\n1\t1\n".parse::<GeneralizedSeries>().unwrap_err();
        assert!(matches!(err, MagnitudeError::Parse { line: 3, .. }));
    }

    #[test]
    fn tags_survive_products() {
        let a = GeneralizedSeries::from_terms([SeriesTerm::tagged(int(2), int(1), 1)], Threshold::Infinite);
        let sq = a.mul(&a);
        assert_eq!(sq.terms()[0].d_index, Some(2));
    }

    fn series_strategy() -> impl Strategy<Value = GeneralizedSeries> {
        (
            prop::collection::vec(((0i64..12, 1i64..4), -5i64..=5), 0..6),
            prop::option::of(3i64..15),
        )
            .prop_map(|(terms, t)| {
                GeneralizedSeries::from_pairs(
                    terms.into_iter().map(|((n, d), c)| (frac(n, d), int(c))),
                    t.map_or(Threshold::Infinite, |t| Threshold::Finite(int(t))),
                )
            })
    }

    proptest! {
        #[test]
        fn addition_is_commutative_and_associative(a in series_strategy(), b in series_strategy(), c in series_strategy()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn multiplication_is_commutative(a in series_strategy(), b in series_strategy()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn text_format_round_trips(a in series_strategy()) {
            let text = a.to_string();
            let back: GeneralizedSeries = text.parse().unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, a);
        }
    }
}
