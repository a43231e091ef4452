//! Continued-fraction words, convergents, cylinders and the Gauss map.

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// A single digit. Most digits fit in 64 bits; the Liouville construction
/// produces digits with millions of bits, which are kept behind an `Arc`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Digit {
    Small(u64),
    Big(Arc<BigUint>),
}

impl Digit {
    pub fn from_big(n: BigUint) -> Digit {
        match n.to_u64() {
            Some(v) => Digit::Small(v),
            None => Digit::Big(Arc::new(n)),
        }
    }

    pub fn to_big(&self) -> BigUint {
        match self {
            Digit::Small(v) => BigUint::from(*v),
            Digit::Big(b) => (**b).clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Digit::Small(v) => Some(*v),
            Digit::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Digit::Small(0))
    }

    /// `ln(self)`, accurate to a few ulps for any size.
    pub fn ln(&self) -> f64 {
        match self {
            Digit::Small(v) => (*v as f64).ln(),
            Digit::Big(b) => ln_big(b),
        }
    }

    /// `ln(1 + self)`.
    pub fn eta(&self) -> f64 {
        match self {
            Digit::Small(v) => (*v as f64).ln_1p(),
            Digit::Big(b) => ln_big(b),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Digit::Small(v) => *v as f64,
            Digit::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

impl From<u64> for Digit {
    fn from(v: u64) -> Self {
        Digit::Small(v)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Digit::Small(v) => write!(f, "{v}"),
            Digit::Big(b) => {
                let bits = b.bits();
                if bits <= 256 {
                    write!(f, "{b}")
                } else {
                    write!(f, "~2^{bits}")
                }
            }
        }
    }
}

impl Serialize for Digit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Digit::Small(v) => s.serialize_u64(*v),
            Digit::Big(b) => s.serialize_str(&format!("2^{:.6}", ln_big(b) / std::f64::consts::LN_2)),
        }
    }
}

/// Natural log of a big integer via its top 64 bits.
pub fn ln_big(b: &BigUint) -> f64 {
    ln_big_bracket(b).mid()
}

/// Certified enclosure of `ln b` for `b >= 1`.
pub fn ln_big_bracket(b: &BigUint) -> Bracket {
    let bits = b.bits();
    if bits <= 64 {
        let v = b.to_u64().unwrap();
        if v < (1u64 << 53) {
            return Bracket::point(v as f64).ln();
        }
        return Bracket::new((v as f64).next_down(), (v as f64).next_up()).ln();
    }
    let shift = bits - 64;
    let top = (b >> shift).to_u64().unwrap();
    let lo = Bracket::point((top as f64).next_down()).ln();
    let hi = Bracket::point(((top as f64) + 1.0).next_up()).ln();
    let s = Bracket::point(shift as f64).mul(Bracket::new(
        std::f64::consts::LN_2.next_down(),
        std::f64::consts::LN_2.next_up(),
    ));
    lo.hull(&hi).add(s)
}

/// A finite digit string together with its convergent matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitWord {
    digits: Vec<BigUint>,
    p_prev: BigUint,
    p_cur: BigUint,
    q_prev: BigUint,
    q_cur: BigUint,
}

impl Default for DigitWord {
    fn default() -> Self {
        Self::new()
    }
}

impl DigitWord {
    pub fn new() -> Self {
        DigitWord {
            digits: Vec::new(),
            p_prev: BigUint::one(),
            p_cur: BigUint::zero(),
            q_prev: BigUint::zero(),
            q_cur: BigUint::one(),
        }
    }

    pub fn from_digits<I, D>(digits: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: Into<BigUint>,
    {
        let mut w = Self::new();
        for d in digits {
            w.push(d.into())?;
        }
        Ok(w)
    }

    pub fn from_digit_seq(digits: &[Digit]) -> Result<Self> {
        let mut w = Self::new();
        for d in digits {
            w.push(d.to_big())?;
        }
        Ok(w)
    }

    pub fn push(&mut self, i: BigUint) -> Result<()> {
        if i.is_zero() {
            return Err(Error::InvalidDigit("0".into()));
        }
        let p_new = &i * &self.p_cur + &self.p_prev;
        let q_new = &i * &self.q_cur + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p_cur, p_new);
        self.q_prev = std::mem::replace(&mut self.q_cur, q_new);
        self.digits.push(i);
        Ok(())
    }

    pub fn append_digit(&self, i: impl Into<BigUint>) -> Result<Self> {
        let mut w = self.clone();
        w.push(i.into())?;
        Ok(w)
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn p_prev(&self) -> &BigUint {
        &self.p_prev
    }
    pub fn p_cur(&self) -> &BigUint {
        &self.p_cur
    }
    pub fn q_prev(&self) -> &BigUint {
        &self.q_prev
    }
    pub fn q_cur(&self) -> &BigUint {
        &self.q_cur
    }

    /// The convergent `p_n / q_n`.
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p_cur.clone().into(), self.q_cur.clone().into())
    }

    /// `p_cur·q_prev − p_prev·q_cur`, which is always ±1.
    pub fn determinant(&self) -> i8 {
        let a = &self.p_cur * &self.q_prev;
        let b = &self.p_prev * &self.q_cur;
        if a > b {
            assert!(a - b == BigUint::one());
            1
        } else {
            assert!(b - a == BigUint::one());
            -1
        }
    }

    /// The cylinder `g_w([0,1])` as `(lo, hi)`. The empty word gives `[0,1]`.
    pub fn cylinder_interval(&self) -> (BigRational, BigRational) {
        let a = self.value();
        let b = BigRational::new(
            (&self.p_prev + &self.p_cur).into(),
            (&self.q_prev + &self.q_cur).into(),
        );
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn cylinder_length(&self) -> BigRational {
        BigRational::new(
            1.into(),
            (&self.q_cur * (&self.q_cur + &self.q_prev)).into(),
        )
    }

    /// `‖g_w'‖_∞ = 1/q_n²`.
    pub fn sup_derivative(&self) -> BigRational {
        BigRational::new(1.into(), (&self.q_cur * &self.q_cur).into())
    }

    /// `max|g_w'| / min|g_w'|` on `[0,1]`, equal to `((q_{n-1}+q_n)/q_n)²`.
    pub fn distortion_ratio(&self) -> BigRational {
        let s = &self.q_prev + &self.q_cur;
        BigRational::new((&s * &s).into(), (&self.q_cur * &self.q_cur).into())
    }

    pub fn eta_sum(&self) -> Bracket {
        let mut acc = Bracket::ZERO;
        for d in &self.digits {
            acc = acc.add(ln_big_bracket(&(d + 1u32)));
        }
        acc
    }

    /// Slacks of `½Σηⱼ − ln√2 ≤ ln q_n ≤ Σηⱼ`. Both are nonnegative up to
    /// the rounding carried by the returned brackets.
    pub fn log_q_bounds_check(&self) -> (Bracket, Bracket) {
        let lq = ln_big_bracket(&self.q_cur);
        let eta = self.eta_sum();
        let half_ln2 = Bracket::point(2.0).ln().scale(0.5);
        let lower = lq.sub(eta.scale(0.5).sub(half_ln2));
        let upper = eta.sub(lq);
        (lower, upper)
    }

    /// The same inequalities decided exactly in integers:
    /// `2·q_n² ≥ Π(1+ωⱼ)` and `q_n ≤ Π(1+ωⱼ)`.
    pub fn log_q_bounds_exact(&self) -> (bool, bool) {
        let mut prod = BigUint::one();
        for d in &self.digits {
            prod *= d + 1u32;
        }
        let lower = BigUint::from(2u32) * &self.q_cur * &self.q_cur >= prod;
        let upper = self.q_cur <= prod;
        (lower, upper)
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, d) in self.digits.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

fn unit_interval_check(x: &BigRational) -> Result<()> {
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(Error::Domain(format!("{x} is outside [0,1]")));
    }
    Ok(())
}

/// One step of the Gauss map: `x ↦ (⌊1/x⌋, 1/x − ⌊1/x⌋)`. Zero is the
/// digitless fixed point and yields `None` for the digit.
pub fn gauss_step(x: &BigRational) -> Result<(Option<BigUint>, BigRational)> {
    unit_interval_check(x)?;
    if x.is_zero() {
        return Ok((None, BigRational::zero()));
    }
    let inv = x.recip();
    let (d, r) = inv.numer().div_rem(inv.denom());
    let digit = d.to_biguint().expect("positive");
    Ok((Some(digit), BigRational::new(r, inv.denom().clone())))
}

/// First digit `ξ(x)` and `η(x) = ln(1+ξ(x))`.
pub fn xi_eta(x: &BigRational) -> Result<(BigUint, f64)> {
    unit_interval_check(x)?;
    match gauss_step(x)? {
        (Some(d), _) => {
            let eta = ln_big(&(&d + 1u32));
            Ok((d, eta))
        }
        (None, _) => Err(Error::Domain("x = 0 has no first digit".into())),
    }
}

/// A point of `[0,1]`: either an exact rational, or a finite realized prefix
/// of a digit stream.
#[derive(Clone, Debug, PartialEq)]
pub enum CFPoint {
    Rational(BigRational),
    Prefix(Vec<BigUint>),
}

impl CFPoint {
    /// Digits of the point, at most `limit` of them. For rationals the
    /// expansion terminates.
    pub fn digits(&self, limit: usize) -> Vec<BigUint> {
        match self {
            CFPoint::Prefix(d) => d.iter().take(limit).cloned().collect(),
            CFPoint::Rational(x) => {
                let mut out = Vec::new();
                let mut y = x.clone();
                while out.len() < limit {
                    match gauss_step(&y) {
                        Ok((Some(d), r)) => {
                            out.push(d);
                            y = r;
                        }
                        _ => break,
                    }
                }
                out
            }
        }
    }

    /// Exact value of the realized part.
    pub fn value(&self) -> BigRational {
        match self {
            CFPoint::Rational(x) => x.clone(),
            CFPoint::Prefix(d) => rational_from_digits(d),
        }
    }
}

/// `[0; d_0, d_1, …]` evaluated exactly.
pub fn rational_from_digits(d: &[BigUint]) -> BigRational {
    let mut x = BigRational::zero();
    for di in d.iter().rev() {
        x = (BigRational::from_integer(di.clone().into()) + x).recip();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn w(d: &[u64]) -> DigitWord {
        DigitWord::from_digits(d.iter().copied()).unwrap()
    }

    #[test]
    fn append_examples() {
        let a = DigitWord::new().append_digit(2u32).unwrap();
        assert_eq!(a.q_cur(), &BigUint::from(2u32));
        assert_eq!(a.p_cur(), &BigUint::from(1u32));
        let b = w(&[1]).append_digit(1u32).unwrap();
        assert_eq!(b.q_cur(), &BigUint::from(2u32));
        let c = w(&[1, 1, 1, 1, 1]);
        assert_eq!(c.value(), rational_from_digits(c.digits()));
        assert_eq!((c.p_cur().clone(), c.q_cur().clone()), (5u32.into(), 8u32.into()));
        assert!(DigitWord::new().append_digit(0u32).is_err());
    }

    #[test]
    fn empty_word_convention() {
        let e = DigitWord::new();
        assert_eq!(e.cylinder_interval(), (r(0, 1), r(1, 1)));
        assert_eq!(e.determinant(), -1);
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_step(&r(1, 2)).unwrap(), (Some(2u32.into()), r(0, 1)));
        assert_eq!(gauss_step(&r(2, 5)).unwrap(), (Some(2u32.into()), r(1, 2)));
        assert_eq!(gauss_step(&r(0, 1)).unwrap(), (None, r(0, 1)));
        assert!(gauss_step(&r(3, 2)).is_err());
    }

    #[test]
    fn xi_eta_examples() {
        let (xi, eta) = xi_eta(&r(2, 5)).unwrap();
        assert_eq!(xi, 2u32.into());
        assert!((eta - 3f64.ln()).abs() < 1e-15);
        assert_eq!(xi_eta(&r(1, 3)).unwrap().0, 3u32.into());
        let (xi, eta) = xi_eta(&r(1, 1)).unwrap();
        assert_eq!(xi, 1u32.into());
        assert!((eta - 2f64.ln()).abs() < 1e-15);
        assert!(xi_eta(&r(0, 1)).is_err());
    }

    #[test]
    fn cylinder_examples() {
        assert_eq!(w(&[2]).cylinder_interval(), (r(1, 3), r(1, 2)));
        assert_eq!(w(&[1]).cylinder_interval(), (r(1, 2), r(1, 1)));
        let c = w(&[1, 2]);
        assert_eq!(c.cylinder_interval(), (r(2, 3), r(3, 4)));
        assert_eq!(c.cylinder_length(), r(1, 12));
    }

    #[test]
    fn derivative_and_distortion() {
        assert_eq!(w(&[1]).sup_derivative(), r(1, 1));
        assert_eq!(w(&[2]).sup_derivative(), r(1, 4));
        assert_eq!(w(&[1, 2]).sup_derivative(), r(1, 9));
        assert_eq!(w(&[1]).distortion_ratio(), r(4, 1));
        assert_eq!(w(&[5]).distortion_ratio(), r(36, 25));
        let g = w(&[1; 20]).distortion_ratio();
        let golden_sq = ((1.0 + 5f64.sqrt()) / 2.0).powi(2);
        assert!((g.to_f64().unwrap() - golden_sq).abs() < 1e-7);
    }

    #[test]
    fn log_q_slacks() {
        for d in [&[1u64][..], &[3, 7]] {
            let word = w(d);
            let (lo, hi) = word.log_q_bounds_check();
            assert!(lo.hi >= 0.0 && hi.hi >= 0.0);
            assert_eq!(word.log_q_bounds_exact(), (true, true));
        }
        assert_eq!(w(&[3, 7]).q_cur(), &BigUint::from(22u32));
    }

    #[test]
    fn ln_big_matches_small() {
        let b = BigUint::from(10u32).pow(40);
        let br = ln_big_bracket(&b);
        assert!(br.contains(40.0 * 10f64.ln()) || (br.mid() - 40.0 * 10f64.ln()).abs() < 1e-12);
        assert!(br.width() < 1e-12);
    }

    #[test]
    fn rational_point_digits() {
        let p = CFPoint::Rational(r(8, 13));
        let d = p.digits(10);
        assert_eq!(rational_from_digits(&d), r(8, 13));
    }
}
