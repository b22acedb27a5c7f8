use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::rational::{to_f64, Q};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

/// Minimal real-number interface shared by `f64` and [`BigReal`].
///
/// Constructors take `&self` so that values inherit the working precision of
/// an existing value.
pub trait Real: Clone + fmt::Debug + PartialOrd {
    fn from_f64_like(&self, v: f64) -> Self;
    fn from_q_like(&self, q: &Q) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn divide(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Mantissa bits.
    fn precision(&self) -> usize;

    fn zero_like(&self) -> Self {
        self.from_f64_like(0.0)
    }

    fn one_like(&self) -> Self {
        self.from_f64_like(1.0)
    }

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0 && *self == self.zero_like()
    }

    /// Relative rounding unit `2^-precision` at this value's precision.
    fn epsilon_like(&self) -> Self {
        let two = self.from_f64_like(2.0);
        two.ln().times(&self.from_f64_like(-(self.precision() as f64))).exp()
    }
}

impl Real for f64 {
    fn from_f64_like(&self, v: f64) -> Self {
        v
    }
    fn from_q_like(&self, q: &Q) -> Self {
        to_f64(q)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn divide(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn precision(&self) -> usize {
        53
    }
    fn epsilon_like(&self) -> Self {
        f64::EPSILON / 2.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Software floating point with a fixed mantissa width.
#[derive(Clone)]
pub struct BigReal {
    value: BigFloat,
    bits: usize,
}

impl BigReal {
    pub fn from_f64(v: f64, bits: usize) -> Self {
        BigReal { value: BigFloat::from_f64(v, bits), bits }
    }

    /// Correctly rounded (to `bits`) image of an exact rational.
    pub fn from_q(q: &Q, bits: usize) -> Self {
        let n = parse_decimal(&q.numer().to_string(), bits + 64);
        let d = parse_decimal(&q.denom().to_string(), bits + 64);
        BigReal { value: n.div(&d, bits, RM), bits }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn wrap(&self, value: BigFloat) -> Self {
        BigReal { value, bits: self.bits }
    }

    fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
        CONSTS.with(|c| f(&mut c.borrow_mut()))
    }

    /// Decimal rendering with the full working precision.
    pub fn to_decimal_string(&self) -> String {
        Self::with_consts(|cc| self.value.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

fn parse_decimal(s: &str, bits: usize) -> BigFloat {
    CONSTS.with(|c| BigFloat::parse(s, Radix::Dec, bits, RM, &mut c.borrow_mut()))
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {} bits)", self.to_decimal_string(), self.bits)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl Real for BigReal {
    fn from_f64_like(&self, v: f64) -> Self {
        BigReal::from_f64(v, self.bits)
    }
    fn from_q_like(&self, q: &Q) -> Self {
        BigReal::from_q(q, self.bits)
    }
    fn plus(&self, o: &Self) -> Self {
        self.wrap(self.value.add(&o.value, self.bits, RM))
    }
    fn minus(&self, o: &Self) -> Self {
        self.wrap(self.value.sub(&o.value, self.bits, RM))
    }
    fn times(&self, o: &Self) -> Self {
        self.wrap(self.value.mul(&o.value, self.bits, RM))
    }
    fn divide(&self, o: &Self) -> Self {
        self.wrap(self.value.div(&o.value, self.bits, RM))
    }
    fn negate(&self) -> Self {
        self.wrap(self.value.neg())
    }
    fn abs(&self) -> Self {
        self.wrap(self.value.abs())
    }
    fn exp(&self) -> Self {
        self.wrap(Self::with_consts(|cc| self.value.exp(self.bits, RM, cc)))
    }
    fn ln(&self) -> Self {
        self.wrap(Self::with_consts(|cc| self.value.ln(self.bits, RM, cc)))
    }
    fn sqrt(&self) -> Self {
        self.wrap(self.value.sqrt(self.bits, RM))
    }
    fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf() {
            return if self.value.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let s = format!("{}", self.value);
        s.parse::<f64>().unwrap_or(f64::NAN)
    }
    fn precision(&self) -> usize {
        self.bits
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn arithmetic_matches_f64() {
        let a = BigReal::from_f64(1.5, 200);
        let b = a.from_f64_like(0.25);
        assert_eq!(a.plus(&b).to_f64(), 1.75);
        assert_eq!(a.times(&b).to_f64(), 0.375);
        assert_eq!(a.divide(&b).to_f64(), 6.0);
        assert!((a.exp().to_f64() - 1.5f64.exp()).abs() < 1e-15);
        assert!((a.ln().to_f64() - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rationals_are_rounded_at_full_precision() {
        let third = BigReal::from_q(&frac(1, 3), 300);
        let back = third.times(&third.from_f64_like(3.0)).minus(&third.one_like()).abs();
        assert!(back.to_f64() < 1e-85);
    }

    #[test]
    fn tiny_values_survive() {
        let x = BigReal::from_f64(-3000.0, 256).exp();
        assert!(!x.is_zero());
        assert!((x.ln().to_f64() + 3000.0).abs() < 1e-12);
        assert_eq!(x.to_f64(), 0.0);
    }

    #[test]
    fn f64_is_a_real() {
        let x = 2.0f64;
        assert_eq!(Real::sqrt(&x), std::f64::consts::SQRT_2);
        assert_eq!(x.precision(), 53);
        assert!(Real::is_zero(&x.zero_like()));
    }

    #[test]
    fn epsilon_tracks_precision() {
        let e = BigReal::from_f64(1.0, 2048).epsilon_like();
        assert!(!e.is_zero());
        assert!((e.ln().to_f64() + 2048.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
