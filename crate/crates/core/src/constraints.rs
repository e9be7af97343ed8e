//! Membership tests for the almost-balanced constraint families.
//!
//! Thresholds of the form `n/c +- s*alpha*sqrt(n)` are irrational in general.
//! They are decided exactly by squaring: `v` lies in the closed band iff
//! `(c*v - n)^2 <= c^2 * s^2 * alpha^2 * n`, cross-multiplied to integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Symbol = u8;

/// A sequence over the alphabet `{0, .., q-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSequence {
    q: u8,
    symbols: Vec<Symbol>,
}

impl SymbolSequence {
    pub fn new(q: u8, symbols: Vec<Symbol>) -> Result<Self> {
        if q < 2 {
            return Err(Error::UnsupportedAlphabet { q, mode: "sequence" });
        }
        if let Some(position) = symbols.iter().position(|&s| s >= q) {
            return Err(Error::InvalidSymbol { symbol: u32::from(symbols[position]), position, q });
        }
        Ok(SymbolSequence { q, symbols })
    }

    /// Parses one digit per symbol (`0-9`, then `a-z`).
    pub fn parse(q: u8, text: &str) -> Result<Self> {
        let symbols = text
            .chars()
            .enumerate()
            .map(|(position, c)| match c.to_digit(36) {
                Some(d) if d < u32::from(q) => Ok(d as u8),
                _ => Err(Error::InvalidSymbol { symbol: c as u32, position, q }),
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolSequence::new(q, symbols)
    }

    pub(crate) fn from_raw(q: u8, symbols: Vec<Symbol>) -> Self {
        debug_assert!(symbols.iter().all(|&s| s < q));
        SymbolSequence { q, symbols }
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn last(&self) -> Option<Symbol> {
        self.symbols.last().copied()
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            let c = std::char::from_digit(u32::from(s), 36).expect("q <= 36 for display");
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The positive rational `alpha^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlphaSq(Ratio<u64>);

impl AlphaSq {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidAlpha(format!("{num}/{den} must be positive")));
        }
        Ok(AlphaSq(Ratio::new(num, den)))
    }

    pub fn num(&self) -> u64 {
        *self.0.numer()
    }

    pub fn den(&self) -> u64 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.num() as f64 / self.den() as f64
    }

    /// `alpha` itself, for display.
    pub fn alpha(&self) -> f64 {
        self.to_f64().sqrt()
    }
}

impl From<AlphaSq> for Ratio<u64> {
    fn from(a: AlphaSq) -> Self {
        a.0
    }
}

impl FromStr for AlphaSq {
    type Err = Error;

    /// Accepts `NUM/DEN` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidAlpha(format!("cannot parse {s:?} as NUM/DEN"));
        let (num, den) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        AlphaSq::new(num, den)
    }
}

impl fmt::Display for AlphaSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num(), self.den())
    }
}

/// Length, alphabet and `alpha^2` of a constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BalanceSpec {
    pub n: usize,
    pub q: u8,
    pub alpha_sq: AlphaSq,
}

impl BalanceSpec {
    pub fn new(n: usize, q: u8, alpha_sq: AlphaSq) -> Self {
        BalanceSpec { n, q, alpha_sq }
    }
}

/// Exact test `v in [n/c - s*alpha*sqrt(n), n/c + s*alpha*sqrt(n)]`.
pub fn in_band(v: usize, n: usize, center_div: u32, alpha_sq: AlphaSq, scale: Ratio<u64>) -> bool {
    let c = BigUint::from(center_div);
    let lhs_abs = {
        let cv = &c * v;
        if cv >= BigUint::from(n) { cv - n } else { BigUint::from(n) - cv }
    };
    let (s_num, s_den) = (BigUint::from(*scale.numer()), BigUint::from(*scale.denom()));
    let lhs = &lhs_abs * &lhs_abs * &s_den * &s_den * alpha_sq.den();
    let rhs = &c * &c * &s_num * &s_num * alpha_sq.num() * n;
    lhs <= rhs
}

/// The integer range of `v` accepted by [`in_band`], or `None` if it is empty.
///
/// `|c*v - n| <= R` with `R` real is equivalent to `|c*v - n| <= floor(R)`, and
/// `floor(sqrt(x)) == isqrt(floor(x))`, so the bounds come from one integer root.
pub fn band_range(
    n: usize,
    center_div: u32,
    alpha_sq: AlphaSq,
    scale: Ratio<u64>,
) -> Option<(usize, usize)> {
    let c = u128::from(center_div);
    let (s_num, s_den) = (u128::from(*scale.numer()), u128::from(*scale.denom()));
    let numer = BigUint::from(c * c * s_num * s_num) * alpha_sq.num() * n;
    let denom = BigUint::from(s_den * s_den) * alpha_sq.den();
    let radius = (numer / denom).sqrt();
    let n_big = BigUint::from(n);
    let c_big = BigUint::from(c);
    // v >= ceil((n - R)/c), v <= floor((n + R)/c)
    let lo = if radius >= n_big { BigUint::from(0u8) } else { (&n_big - &radius + &c_big - 1u8) / &c_big };
    let hi = ((&n_big + &radius) / &c_big).min(n_big);
    let lo: usize = lo.try_into().expect("bounded by n");
    let hi: usize = hi.try_into().expect("bounded by n");
    (lo <= hi).then_some((lo, hi))
}

const ONE: Ratio<u64> = Ratio::new_raw(1, 1);
const HALF: Ratio<u64> = Ratio::new_raw(1, 2);

/// Number of non-zero symbols.
pub fn weight(x: &SymbolSequence) -> usize {
    x.symbols.iter().filter(|&&s| s != 0).count()
}

/// Occurrences of `sigma` in `x`.
pub fn count_symbol(x: &SymbolSequence, sigma: Symbol) -> usize {
    x.symbols.iter().filter(|&&s| s == sigma).count()
}

/// Occurrences of the low half `{0, .., q/2 - 1}` of the alphabet.
pub fn polarity_low_count(x: &SymbolSequence) -> usize {
    let half = x.q / 2;
    x.symbols.iter().filter(|&&s| s < half).count()
}

/// `#_0(x) + #_i(x)`.
pub fn pair_count(x: &SymbolSequence, i: Symbol) -> usize {
    x.symbols.iter().filter(|&&s| s == 0 || s == i).count()
}

fn hi_ok(v: usize, n: usize, c: u32, alpha_sq: AlphaSq, scale: Ratio<u64>) -> bool {
    // v <= n/c + s*alpha*sqrt(n)
    v * c as usize <= n || in_band(v, n, c, alpha_sq, scale)
}

fn lo_ok(v: usize, n: usize, c: u32, alpha_sq: AlphaSq, scale: Ratio<u64>) -> bool {
    // v >= n/c - s*alpha*sqrt(n)
    v * c as usize >= n || in_band(v, n, c, alpha_sq, scale)
}

/// `w(x) in [n/2 - alpha sqrt(n), n/2 + alpha sqrt(n)]`.
pub fn in_c(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    in_band(weight(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// `w(x) <= n/2 + alpha sqrt(n)`.
pub fn in_c_low(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    hi_ok(weight(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// `w(x) >= n/2 - alpha sqrt(n)`.
pub fn in_c_high(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    lo_ok(weight(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// Low-half count within `n/2 +- alpha sqrt(n)`.
pub fn in_c_pb(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    in_band(polarity_low_count(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// Low-half count `<= n/2 + alpha sqrt(n)`.
pub fn in_c_pb_low(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    hi_ok(polarity_low_count(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// Low-half count `>= n/2 - alpha sqrt(n)`.
pub fn in_c_pb_high(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    lo_ok(polarity_low_count(x), spec.n, 2, spec.alpha_sq, ONE)
}

/// Every symbol count of a 4-ary sequence within `n/4 +- alpha sqrt(n)`.
pub fn in_c_sb4(x: &SymbolSequence, spec: &BalanceSpec) -> bool {
    let mut counts = [0usize; 4];
    for &s in &x.symbols {
        counts[s as usize] += 1;
    }
    counts.iter().all(|&v| in_band(v, spec.n, 4, spec.alpha_sq, ONE))
}

/// `#_0(x) + #_i(x)` within `n/2 +- alpha sqrt(n) / 2`.
pub fn in_c0i(x: &SymbolSequence, spec: &BalanceSpec, i: Symbol) -> bool {
    in_band(pair_count(x, i), spec.n, 2, spec.alpha_sq, HALF)
}

/// `#_0(x) + #_i(x) <= n/2 + alpha sqrt(n) / 2`.
pub fn in_c0i_low(x: &SymbolSequence, spec: &BalanceSpec, i: Symbol) -> bool {
    hi_ok(pair_count(x, i), spec.n, 2, spec.alpha_sq, HALF)
}

/// `#_0(x) + #_i(x) >= n/2 - alpha sqrt(n) / 2`.
pub fn in_c0i_high(x: &SymbolSequence, spec: &BalanceSpec, i: Symbol) -> bool {
    lo_ok(pair_count(x, i), spec.n, 2, spec.alpha_sq, HALF)
}
