//! Three points from the asymptotic derivatives `M_1, M_2, M_3`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{MagnitudeError, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, Q};
use crate::small_scale::AsymptoticDerivatives;

/// `s1, s2, s3`: elementary symmetric functions of `x = b+c−a`, `y = c+a−b`,
/// `z = a+b−c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N3Invariants {
    pub s1: Q,
    pub s2: Q,
    pub s3: Q,
}

impl N3Invariants {
    pub fn from_derivatives(m: &AsymptoticDerivatives) -> Result<Self> {
        if !m.m1.is_positive() {
            return Err(MagnitudeError::Hypothesis(format!("M1 must be positive, got {}", m.m1)));
        }
        let (m1, m2, m3) = (&m.m1, &m.m2, &m.m3);
        let m1sq = m1 * m1;
        let core = int(16) * &m1sq * &m1sq + int(24) * &m1sq * m2 + int(8) * m1 * m3 - int(7) * m2 * m2;
        Ok(N3Invariants {
            s1: (int(4) * &m1sq + m2) / m1,
            s2: &core / (int(3) * &m1sq),
            s3: m2 * &core / (int(3) * &m1sq * m1),
        })
    }

    pub fn from_sides(a: &Q, b: &Q, c: &Q) -> Self {
        let (x, y, z) = (b + c - a, c + a - b, a + b - c);
        N3Invariants {
            s1: &x + &y + &z,
            s2: &x * &y + &y * &z + &z * &x,
            s3: x * y * z,
        }
    }

    /// `(a+b+c, ab+bc+ca, abc)`.
    pub fn side_symmetric_functions(&self) -> (Q, Q, Q) {
        let s1 = &self.s1;
        (
            s1.clone(),
            (s1 * s1 + &self.s2) / int(4),
            (s1 * &self.s2 - &self.s3) / int(8),
        )
    }
}

/// Sorted side lengths, exact when rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SideLengths {
    Exact([Q; 3]),
    /// Isolating intervals `[lo, hi]` of width below `10^-30`, for irrational sides.
    Certified([(Q, Q); 3]),
}

/// Coefficients, lowest degree first.
type Poly = Vec<Q>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[Q]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect()
}

fn divrem(a: &[Q], b: &[Q]) -> (Poly, Poly) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lead = b.last().expect("division by the zero polynomial").clone();
    let mut q = vec![Q::zero(); r.len().saturating_sub(b.len()) + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().expect("non-empty") / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &c * bc;
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn gcd(a: &[Q], b: &[Q]) -> Poly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().cloned().unwrap_or_else(Q::one);
    a.iter().map(|c| c / &lead).collect()
}

fn sturm_chain(p: &[Q]) -> Vec<Poly> {
    let mut chain = vec![trim(p.to_vec()), trim(derivative(p))];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            break;
        }
        let (_, r) = divrem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &Q) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| eval(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Roots of a square-free polynomial in `(lo, hi]`, each as an isolating
/// interval `(lo, hi]` containing exactly one root.
fn isolate(chain: &[Poly], lo: Q, hi: Q, out: &mut Vec<(Q, Q)>) {
    let count = sign_changes(chain, &lo) - sign_changes(chain, &hi);
    match count {
        0 => {}
        1 => out.push((lo, hi)),
        _ => {
            let mid = (&lo + &hi) / int(2);
            isolate(chain, lo, mid.clone(), out);
            isolate(chain, mid, hi, out);
        }
    }
}

/// Leading coefficient of the primitive integer multiple of `p`: every
/// rational root has a denominator dividing it.
fn denominator_bound(p: &[Q]) -> BigInt {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    (ints.last().expect("non-constant") / g).abs()
}

enum Root {
    Exact(Q),
    Interval(Q, Q),
}

fn refine(p: &[Q], lo: Q, hi: Q, den: &BigInt) -> Root {
    let (mut lo, mut hi) = (lo, hi);
    if eval(p, &hi).is_zero() {
        return Root::Exact(hi);
    }
    let width_for_test = Q::new(BigInt::one(), den.clone());
    let certified = Q::new(BigInt::one(), BigInt::from(10u32).pow(30));
    // the root is simple and `p(hi) != 0`, so the sign flips exactly at it
    let hi_sign = eval(p, &hi).is_positive();
    let mut tested = false;
    loop {
        let width = &hi - &lo;
        if !tested && width < width_for_test {
            tested = true;
            let d = Q::from_integer(den.clone());
            let k_lo = (&lo * &d).ceil().to_integer();
            let k_hi = (&hi * &d).floor().to_integer();
            let mut k = k_lo;
            while k <= k_hi {
                let x = Q::new(k.clone(), den.clone());
                if eval(p, &x).is_zero() {
                    return Root::Exact(x);
                }
                k += 1;
            }
        }
        if tested && width < certified {
            return Root::Interval(lo, hi);
        }
        let mid = (&lo + &hi) / int(2);
        let v = eval(p, &mid);
        if v.is_zero() {
            return Root::Exact(mid);
        }
        if v.is_positive() == hi_sign {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

fn multiplicity(p: &[Q], r: &Q) -> usize {
    let mut q = trim(p.to_vec());
    let mut m = 0;
    while !q.is_empty() && eval(&q, r).is_zero() {
        m += 1;
        q = derivative(&q);
    }
    m
}

/// Real roots of `x³ − e1 x² + e2 x − e3`, with multiplicity, in increasing order.
fn cubic_roots(e1: &Q, e2: &Q, e3: &Q) -> Result<Vec<Root>> {
    let p: Poly = vec![-e3.clone(), e2.clone(), -e1.clone(), Q::one()];
    let g = gcd(&p, &derivative(&p));
    let square_free = if g.len() > 1 { divrem(&p, &g).0 } else { p.clone() };
    let bound = int(1) + p.iter().take(3).map(|c| c.abs()).max().unwrap_or_else(Q::zero);
    let chain = sturm_chain(&square_free);
    let mut intervals = Vec::new();
    isolate(&chain, -bound.clone(), bound, &mut intervals);
    let den = denominator_bound(&square_free);
    let mut roots = Vec::new();
    for (lo, hi) in intervals {
        match refine(&square_free, lo, hi, &den) {
            Root::Exact(r) => {
                for _ in 0..multiplicity(&p, &r) {
                    roots.push(Root::Exact(r.clone()));
                }
            }
            iv => roots.push(iv),
        }
    }
    if roots.len() != 3 {
        return Err(MagnitudeError::Degenerate(format!(
            "the side-length cubic has {} real roots counted with multiplicity",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Solves for the sides of a triangle with the given asymptotic derivatives.
pub fn n3_side_lengths(m: &AsymptoticDerivatives) -> Result<SideLengths> {
    let (e1, e2, e3) = N3Invariants::from_derivatives(m)?.side_symmetric_functions();
    sides_from_symmetric(&e1, &e2, &e3)
}

fn sides_from_symmetric(e1: &Q, e2: &Q, e3: &Q) -> Result<SideLengths> {
    let roots = cubic_roots(e1, e2, e3)?;
    let lower = |r: &Root| match r {
        Root::Exact(x) => x.clone(),
        Root::Interval(lo, _) => lo.clone(),
    };
    if roots.iter().any(|r| !lower(r).is_positive()) {
        return Err(MagnitudeError::Degenerate("a side length is not positive".into()));
    }
    if roots.iter().all(|r| matches!(r, Root::Exact(_))) {
        let s: Vec<Q> = roots.iter().map(lower).collect();
        if &s[0] + &s[1] < s[2] {
            return Err(MagnitudeError::Degenerate(format!(
                "sides {}, {}, {} violate the triangle inequality",
                s[0], s[1], s[2]
            )));
        }
        return Ok(SideLengths::Exact([s[0].clone(), s[1].clone(), s[2].clone()]));
    }
    let iv: Vec<(Q, Q)> = roots
        .into_iter()
        .map(|r| match r {
            Root::Exact(x) => (x.clone(), x),
            Root::Interval(lo, hi) => (lo, hi),
        })
        .collect();
    if &iv[0].1 + &iv[1].1 < iv[2].0 {
        return Err(MagnitudeError::Degenerate("sides violate the triangle inequality".into()));
    }
    Ok(SideLengths::Certified([iv[0].clone(), iv[1].clone(), iv[2].clone()]))
}

/// The triangle with the given derivatives, when its sides are rational.
pub fn reconstruct_n3(m: &AsymptoticDerivatives) -> Result<FiniteMetricSpace> {
    match n3_side_lengths(m)? {
        SideLengths::Exact(s) => FiniteMetricSpace::from_edge_lengths(3, &s),
        SideLengths::Certified(iv) => Err(MagnitudeError::Hypothesis(format!(
            "side lengths are irrational; certified to within 1e-30 near {:.6}, {:.6}, {:.6}",
            crate::rational::to_f64(&iv[0].0),
            crate::rational::to_f64(&iv[1].0),
            crate::rational::to_f64(&iv[2].0)
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::fixtures::complete_space;
    use crate::metric::{are_isometric, random_metric_space, RandomSpaceOptions};
    use crate::small_scale::derivative_limits;

    fn derivs(m1: Q, m2: Q, m3: Q) -> AsymptoticDerivatives {
        AsymptoticDerivatives { m1, m2, m3 }
    }

    #[test]
    fn right_triangle() {
        let m = derivs(frac(30, 11), frac(360, 121), frac(-22725, 1331));
        assert_eq!(N3Invariants::from_derivatives(&m).unwrap(), N3Invariants::from_sides(&int(3), &int(4), &int(5)));
        assert_eq!(n3_side_lengths(&m).unwrap(), SideLengths::Exact([int(3), int(4), int(5)]));
    }

    #[test]
    fn equilateral_has_a_triple_root() {
        let m = derivs(frac(2, 3), frac(2, 9), frac(-2, 9));
        assert_eq!(n3_side_lengths(&m).unwrap(), SideLengths::Exact([int(1), int(1), int(1)]));
        let s = reconstruct_n3(&derivative_limits(&complete_space(3, &int(1)).unwrap()).unwrap()).unwrap();
        assert_eq!(s, complete_space(3, &int(1)).unwrap());
    }

    #[test]
    fn isosceles_has_a_double_root() {
        let x = FiniteMetricSpace::from_edge_lengths(3, &[int(2), int(2), int(3)]).unwrap();
        let y = reconstruct_n3(&derivative_limits(&x).unwrap()).unwrap();
        assert!(are_isometric(&x, &y).unwrap().is_some());
    }

    #[test]
    fn random_triangles_roundtrip() {
        for seed in 0..25 {
            let x = random_metric_space(3, seed, &RandomSpaceOptions::default()).unwrap();
            let y = reconstruct_n3(&derivative_limits(&x).unwrap()).unwrap();
            assert!(are_isometric(&x, &y).unwrap().is_some(), "seed {seed}");
        }
    }

    #[test]
    fn irrational_sides_are_certified() {
        // s = (1, 1, 1) gives e = (1, 1/2, 1/8): roots of x³ − x² + x/2 − 1/8 are not rational
        let inv = N3Invariants { s1: int(1), s2: int(1), s3: int(1) };
        let (e1, e2, e3) = inv.side_symmetric_functions();
        let roots = cubic_roots(&e1, &e2, &e3);
        // one real root and a complex pair
        assert!(matches!(roots, Err(MagnitudeError::Degenerate(_))));
        // x³ − 6x² + 9x − 3: discriminant 81, no rational roots
        let roots = cubic_roots(&int(6), &int(9), &int(3)).unwrap();
        assert_eq!(roots.len(), 3);
        for r in &roots {
            match r {
                Root::Interval(lo, hi) => assert!(hi - lo < frac(1, 1_000_000_000_000_000_000)),
                Root::Exact(_) => panic!("no rational roots expected"),
            }
        }
    }

    #[test]
    fn rejects_inconsistent_input() {
        assert!(matches!(
            n3_side_lengths(&derivs(int(-1), int(0), int(0))),
            Err(MagnitudeError::Hypothesis(_))
        ));
        // roots 1, 1, 3
        assert!(matches!(sides_from_symmetric(&int(5), &int(7), &int(3)), Err(MagnitudeError::Degenerate(_))));
        // roots −1, 2, 3
        assert!(matches!(sides_from_symmetric(&int(4), &int(1), &int(-6)), Err(MagnitudeError::Degenerate(_))));
    }

    #[test]
    fn polynomial_helpers() {
        let p = vec![int(-6), int(11), int(-6), int(1)]; // (x-1)(x-2)(x-3)
        let (q, r) = divrem(&p, &[int(-1), int(1)]);
        assert!(r.is_empty());
        assert_eq!(q, vec![int(6), int(-5), int(1)]);
        assert_eq!(gcd(&p, &derivative(&p)), vec![int(1)]);
        assert_eq!(sign_changes(&sturm_chain(&p), &int(0)) - sign_changes(&sturm_chain(&p), &int(4)), 3);
    }
}
