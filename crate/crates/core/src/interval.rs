//! Exact rational arithmetic on `[0, 1]`.
//!
//! Everything here is exact: fractions are arbitrary-precision rationals and
//! intervals are half-open `[lo, hi)`. Two interval representations exist:
//!
//! * [`Interval`] holds canonical (reduced) endpoints and is what callers see.
//! * [`ScaledInterval`] keeps `lo`, `width` and a shared denominator without
//!   reducing after every step. Arithmetic coders narrow it `n` times and only
//!   normalise at the end, which keeps the gcd cost out of the inner loop.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A non-negative exact rational number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigFraction(Ratio<BigUint>);

impl BigFraction {
    /// Builds `numer / denom` in canonical form. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigUint>, denom: impl Into<BigUint>) -> Self {
        BigFraction(Ratio::new(numer.into(), denom.into()))
    }

    pub fn zero() -> Self {
        BigFraction(Ratio::zero())
    }

    pub fn one() -> Self {
        BigFraction(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Nearest `f64`, for display and analysis only.
    pub fn to_f64(&self) -> f64 {
        let r = Ratio::new(BigInt::from(self.numer().clone()), BigInt::from(self.denom().clone()));
        r.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }
}

impl From<Ratio<BigUint>> for BigFraction {
    fn from(r: Ratio<BigUint>) -> Self {
        BigFraction(r)
    }
}

impl fmt::Display for BigFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl<'a> Add<&'a BigFraction> for &'a BigFraction {
    type Output = BigFraction;
    fn add(self, rhs: &'a BigFraction) -> BigFraction {
        BigFraction(&self.0 + &rhs.0)
    }
}

/// Panics if the result would be negative.
impl<'a> Sub<&'a BigFraction> for &'a BigFraction {
    type Output = BigFraction;
    fn sub(self, rhs: &'a BigFraction) -> BigFraction {
        BigFraction(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a BigFraction> for &'a BigFraction {
    type Output = BigFraction;
    fn mul(self, rhs: &'a BigFraction) -> BigFraction {
        BigFraction(&self.0 * &rhs.0)
    }
}

/// Half-open interval `[lo, hi)` with `0 <= lo < hi <= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigFraction,
    hi: BigFraction,
}

impl Interval {
    pub fn new(lo: BigFraction, hi: BigFraction) -> Result<Self> {
        if lo < hi && hi <= BigFraction::one() {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval)
        }
    }

    /// `[0, 1)`.
    pub fn unit() -> Self {
        Interval { lo: BigFraction::zero(), hi: BigFraction::one() }
    }

    pub fn lo(&self) -> &BigFraction {
        &self.lo
    }

    pub fn hi(&self) -> &BigFraction {
        &self.hi
    }

    pub fn length(&self) -> BigFraction {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigFraction) -> bool {
        &self.lo <= x && x < &self.hi
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn to_scaled(&self) -> ScaledInterval {
        let den = self.lo.denom() * self.hi.denom();
        let lo = self.lo.numer() * self.hi.denom();
        let hi = self.hi.numer() * self.lo.denom();
        ScaledInterval { width: hi - &lo, lo, den }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// Splits `interval` into `[lo, lo + p|I|)` and `[lo + p|I|, hi)`.
///
/// `p` must lie strictly inside `(0, 1)`.
pub fn split_binary(interval: &Interval, p: &BigFraction) -> (Interval, Interval) {
    debug_assert!(!p.is_zero() && p < &BigFraction::one());
    let mid = &interval.lo + &(p * &interval.length());
    (
        Interval { lo: interval.lo.clone(), hi: mid.clone() },
        Interval { lo: mid, hi: interval.hi.clone() },
    )
}

/// Splits `interval` into `q` contiguous pieces: the first `q/2` of length
/// `2p/q * |I|`, the last `q/2` of length `2(1-p)/q * |I|`.
///
/// `q` must be even and `p` strictly inside `(0, 1)`.
pub fn split_qary(interval: &Interval, p: &BigFraction, q: u8) -> Vec<Interval> {
    debug_assert!(q >= 2 && q.is_multiple_of(2));
    debug_assert!(!p.is_zero() && p < &BigFraction::one());
    let len = interval.length();
    let two_over_q = BigFraction::new(2u32, q);
    let low = &(&two_over_q * p) * &len;
    let high = &(&two_over_q * &(&BigFraction::one() - p)) * &len;

    let mut out = Vec::with_capacity(q as usize);
    let mut lo = interval.lo.clone();
    for k in 0..q {
        let width = if k < q / 2 { &low } else { &high };
        let hi = if k + 1 == q { interval.hi.clone() } else { &lo + width };
        out.push(Interval { lo: lo.clone(), hi: hi.clone() });
        lo = hi;
    }
    debug_assert_eq!(&(&out[q as usize - 1].lo + &high), &interval.hi);
    out
}

/// Finite base-`b` expansion `0.d1 d2 ... dk`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitString {
    base: u32,
    digits: Vec<u8>,
}

impl DigitString {
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self> {
        if !(2..=256).contains(&base) {
            return Err(Error::UnsupportedAlphabet { q: base.min(255) as u8, mode: "digit-string" });
        }
        if let Some(position) = digits.iter().position(|&d| u32::from(d) >= base) {
            return Err(Error::InvalidSymbol {
                symbol: u32::from(digits[position]),
                position,
                q: base.min(255) as u8,
            });
        }
        Ok(DigitString { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    /// Appends zero digits up to `len`. Fails if the string is already longer.
    pub fn padded(mut self, len: usize) -> Result<Self> {
        if self.digits.len() > len {
            return Err(Error::OutputTooLong { needed: self.digits.len(), target_len: len });
        }
        self.digits.resize(len, 0);
        Ok(self)
    }

    /// The value as the unreduced pair `(m, base^k)`.
    pub(crate) fn scaled_value(&self) -> (BigUint, BigUint) {
        scaled_digits_value(self.base, &self.digits)
    }

    pub fn value(&self) -> BigFraction {
        digits_to_fraction(self)
    }
}

pub(crate) fn scaled_digits_value(base: u32, digits: &[u8]) -> (BigUint, BigUint) {
    let numer = if digits.is_empty() {
        BigUint::zero()
    } else {
        BigUint::from_radix_be(digits, base).expect("digits validated against base")
    };
    (numer, BigUint::from(base).pow(digits.len() as u32))
}

/// Exact value `sum_j d_j * base^-(j+1)`.
pub fn digits_to_fraction(d: &DigitString) -> BigFraction {
    let (m, den) = d.scaled_value();
    BigFraction::new(m, den)
}

/// Shortest base-`base` fraction inside `interval`, leftmost among ties.
pub fn shortest_fraction(interval: &Interval, base: u32) -> DigitString {
    interval.to_scaled().shortest_fraction(base)
}

/// The interval `[lo/den, (lo + width)/den)` over an unreduced common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInterval {
    lo: BigUint,
    width: BigUint,
    den: BigUint,
}

impl ScaledInterval {
    pub fn unit() -> Self {
        ScaledInterval { lo: BigUint::zero(), width: BigUint::one(), den: BigUint::one() }
    }

    /// Restricts to the piece that starts `start/total` of the way into the
    /// current interval and spans `width/total` of it.
    pub fn narrow(&mut self, start: &BigUint, width: &BigUint, total: &BigUint) {
        self.lo = &self.lo * total + &self.width * start;
        self.width = &self.width * width;
        self.den = &self.den * total;
    }

    pub fn to_interval(&self) -> Interval {
        Interval {
            lo: BigFraction::new(self.lo.clone(), self.den.clone()),
            hi: BigFraction::new(&self.lo + &self.width, self.den.clone()),
        }
    }

    /// Length as an exact (reduced) fraction.
    pub fn length(&self) -> BigFraction {
        BigFraction::new(self.width.clone(), self.den.clone())
    }

    /// True when some multiple of `base^-k` lies in the interval.
    fn holds_multiple(&self, base: &BigUint, k: u32) -> Option<BigUint> {
        let pw = base.pow(k);
        let scaled_lo = &self.lo * &pw;
        let m = (&scaled_lo + &self.den - 1u32) / &self.den;
        if &m * &self.den < (&self.lo + &self.width) * &pw {
            Some(m)
        } else {
            None
        }
    }

    /// Shortest base-`base` fraction in the interval; the leftmost one when
    /// several share the minimal length.
    ///
    /// Membership of a multiple of `base^-k` is monotone in `k`, so the
    /// minimal `k` is found by bisection below the guaranteed bound
    /// `width * base^k >= den`.
    pub fn shortest_fraction(&self, base: u32) -> DigitString {
        assert!((2..=256).contains(&base), "base out of range");
        let b = BigUint::from(base);

        let log2_base = f64::from(base).log2();
        let gap = self.den.bits().saturating_sub(self.width.bits() + 1);
        let mut k_hi = (gap as f64 / log2_base).floor() as u32;
        while &self.width * b.pow(k_hi) < self.den {
            k_hi += 1;
        }

        let (mut lo, mut hi) = (0u32, k_hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.holds_multiple(&b, mid).is_some() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let k = lo;
        let m = self.holds_multiple(&b, k).expect("bound guarantees a multiple");

        let mut digits = Vec::with_capacity(k as usize);
        if k > 0 {
            let body = m.to_radix_be(base);
            let body: &[u8] = if m.is_zero() { &[] } else { &body };
            digits.resize(k as usize - body.len(), 0);
            digits.extend_from_slice(body);
        }
        DigitString { base, digits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: u64, d: u64) -> BigFraction {
        BigFraction::new(n, d)
    }

    fn iv(a: (u64, u64), b: (u64, u64)) -> Interval {
        Interval::new(frac(a.0, a.1), frac(b.0, b.1)).unwrap()
    }

    #[test]
    fn split_binary_unit() {
        let (l, r) = split_binary(&Interval::unit(), &frac(3, 4));
        assert_eq!(l, iv((0, 1), (3, 4)));
        assert_eq!(r, iv((3, 4), (1, 1)));

        let (l, r) = split_binary(&Interval::unit(), &frac(1, 2));
        assert_eq!(l, iv((0, 1), (1, 2)));
        assert_eq!(r, iv((1, 2), (1, 1)));
    }

    #[test]
    fn split_walk_of_00010() {
        let p = frac(3, 4);
        let mut i = Interval::unit();
        for bit in [0, 0, 0, 1, 0] {
            let (l, r) = split_binary(&i, &p);
            i = if bit == 0 { l } else { r };
        }
        assert_eq!(i, iv((81, 256), (405, 1024)));
        let d = shortest_fraction(&i, 2);
        assert_eq!(d.digits(), &[0, 1, 1]);
        assert_eq!(d.value(), frac(3, 8));
    }

    #[test]
    fn split_qary_lengths() {
        let parts = split_qary(&Interval::unit(), &frac(1, 2), 4);
        assert!(parts.iter().all(|p| p.length() == frac(1, 4)));

        let parts = split_qary(&Interval::unit(), &frac(3, 4), 4);
        let lens: Vec<_> = parts.iter().map(Interval::length).collect();
        assert_eq!(lens, vec![frac(3, 8), frac(3, 8), frac(1, 8), frac(1, 8)]);
    }

    #[test]
    fn split_qary_two_matches_binary() {
        let i = iv((1, 7), (5, 9));
        let p = frac(5, 16);
        let parts = split_qary(&i, &p, 2);
        let (l, r) = split_binary(&i, &p);
        assert_eq!(parts, vec![l, r]);
    }

    #[test]
    fn shortest_of_unit_is_empty() {
        let d = shortest_fraction(&Interval::unit(), 2);
        assert!(d.is_empty());
        assert!(d.value().is_zero());
    }

    #[test]
    fn shortest_in_right_half() {
        let d = shortest_fraction(&iv((1, 2), (1, 1)), 2);
        assert_eq!(d.digits(), &[1]);
        let d = shortest_fraction(&iv((1, 3), (1, 2)), 2);
        assert_eq!(d.digits(), &[0, 1, 1]);
        let d = shortest_fraction(&iv((1, 3), (2, 5)), 4);
        // 6/16
        assert_eq!(d.digits(), &[1, 2]);
    }

    #[test]
    fn digits_values() {
        let d = DigitString::new(2, vec![0, 1, 1]).unwrap();
        assert_eq!(digits_to_fraction(&d), frac(3, 8));
        let d = DigitString::new(2, vec![]).unwrap();
        assert_eq!(digits_to_fraction(&d), frac(0, 1));
        let d = DigitString::new(2, vec![1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(digits_to_fraction(&d), frac(1, 2));
    }

    #[test]
    fn digit_string_rejects_bad_digits() {
        assert!(DigitString::new(2, vec![0, 2]).is_err());
        assert!(DigitString::new(1, vec![]).is_err());
    }

    #[test]
    fn padding_errors_when_too_long() {
        let d = DigitString::new(2, vec![1, 1, 1]).unwrap();
        assert_eq!(d.clone().padded(5).unwrap().digits(), &[1, 1, 1, 0, 0]);
        assert_eq!(
            d.padded(2),
            Err(Error::OutputTooLong { needed: 3, target_len: 2 })
        );
    }

    #[test]
    fn interval_rejects_empty() {
        assert!(Interval::new(frac(1, 2), frac(1, 2)).is_err());
        assert!(Interval::new(frac(1, 2), frac(3, 2)).is_err());
    }
}
