//! Fixed-length biased arithmetic coders.
//!
//! A coder maps a length-`n` sequence to a nested interval by `n` exact
//! splits, then emits the shortest base-`q` fraction inside it, padded with
//! trailing zeros to `target_len` digits. Each split gives the first `q/2`
//! sub-intervals length `2p/q` and the last `q/2` length `2(1-p)/q`. With
//! `q = 2` this is the plain binary coder with `P(0) = p`.
//!
//! The remapped 4-ary variant places `0` and `i` in the first two slots and
//! the remaining two symbols, in ascending order, in the last two.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::constraints::{Symbol, SymbolSequence};
use crate::error::{Error, Result};
use crate::interval::{scaled_digits_value, BigFraction, DigitString, Interval, ScaledInterval};

/// Parameters of one coder instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoderParams {
    pub n: usize,
    pub q: u8,
    pub p: BigFraction,
    pub target_len: usize,
    pub remap: Option<Symbol>,
}

impl CoderParams {
    pub fn binary(n: usize, p: BigFraction, target_len: usize) -> Self {
        CoderParams { n, q: 2, p, target_len, remap: None }
    }

    pub fn polarity(n: usize, q: u8, p: BigFraction, target_len: usize) -> Self {
        CoderParams { n, q, p, target_len, remap: None }
    }

    pub fn remapped(n: usize, p: BigFraction, target_len: usize, i: Symbol) -> Self {
        CoderParams { n, q: 4, p, target_len, remap: Some(i) }
    }
}

/// Sub-interval order `(0, i, a, b)` with `a < b` the two remaining symbols.
pub fn remap_order(i: Symbol) -> [Symbol; 4] {
    assert!((1..=3).contains(&i), "remap symbol must be 1, 2 or 3");
    let mut rest = (1..4).filter(|&s| s != i);
    let a = rest.next().unwrap();
    let b = rest.next().unwrap();
    [0, i, a, b]
}

/// A validated coder with its split weights precomputed as integers.
#[derive(Clone, Debug)]
pub struct ArithmeticCoder {
    params: CoderParams,
    /// slot -> symbol
    order: Vec<Symbol>,
    /// symbol -> slot
    slot_of: Vec<usize>,
    /// cumulative slot starts, `cum[q] == total`
    cum: Vec<BigUint>,
    widths: Vec<BigUint>,
    total: BigUint,
}

impl ArithmeticCoder {
    pub fn new(params: CoderParams) -> Result<Self> {
        let q = params.q;
        if q < 2 || !q.is_multiple_of(2) {
            return Err(Error::UnsupportedAlphabet { q, mode: "arithmetic coder" });
        }
        if params.p.is_zero() || params.p >= BigFraction::one() {
            return Err(Error::InvalidProbability { n: params.n, p_low: params.p.to_string() });
        }
        if params.target_len >= params.n {
            return Err(Error::LengthTooShort { n: params.n, mode: "arithmetic coder" });
        }

        let order: Vec<Symbol> = match params.remap {
            None => (0..q).collect(),
            Some(i) => {
                if q != 4 || !(1..=3).contains(&i) {
                    return Err(Error::UnsupportedAlphabet { q, mode: "remapped coder" });
                }
                remap_order(i).to_vec()
            }
        };
        let mut slot_of = vec![0; q as usize];
        for (slot, &s) in order.iter().enumerate() {
            slot_of[s as usize] = slot;
        }

        // p = a/b: low slots get 2a, high slots 2(b - a), out of q*b.
        let a = params.p.numer().clone();
        let b = params.p.denom().clone();
        let low = &a * 2u32;
        let high = (&b - &a) * 2u32;
        let total = &b * u32::from(q);
        let widths: Vec<BigUint> =
            (0..q).map(|slot| if slot < q / 2 { low.clone() } else { high.clone() }).collect();
        let mut cum = Vec::with_capacity(q as usize + 1);
        let mut acc = BigUint::zero();
        cum.push(acc.clone());
        for w in &widths {
            acc += w;
            cum.push(acc.clone());
        }
        debug_assert_eq!(acc, total);

        Ok(ArithmeticCoder { params, order, slot_of, cum, widths, total })
    }

    pub fn params(&self) -> &CoderParams {
        &self.params
    }

    /// Sub-interval order used at every split (slot -> symbol).
    pub fn order(&self) -> &[Symbol] {
        &self.order
    }

    fn check_input(&self, x: &SymbolSequence) -> Result<()> {
        if x.q() != self.params.q {
            return Err(Error::AlphabetMismatch { expected: self.params.q, actual: x.q() });
        }
        if x.len() != self.params.n {
            return Err(Error::WrongLength { expected: self.params.n, actual: x.len() });
        }
        Ok(())
    }

    fn walk(&self, symbols: &[Symbol]) -> ScaledInterval {
        let mut interval = ScaledInterval::unit();
        for &s in symbols {
            let slot = self.slot_of[s as usize];
            interval.narrow(&self.cum[slot], &self.widths[slot], &self.total);
        }
        interval
    }

    pub fn map_to_interval(&self, x: &SymbolSequence) -> Result<Interval> {
        self.check_input(x)?;
        Ok(self.walk(x.symbols()).to_interval())
    }

    /// The unpadded shortest fraction for `x`.
    pub fn shortest(&self, x: &SymbolSequence) -> Result<DigitString> {
        self.check_input(x)?;
        Ok(self.walk(x.symbols()).shortest_fraction(u32::from(self.params.q)))
    }

    /// Shortest fraction of `x`'s interval, padded to `target_len` digits.
    pub fn encode(&self, x: &SymbolSequence) -> Result<SymbolSequence> {
        let digits = self.shortest(x)?.padded(self.params.target_len)?;
        Ok(SymbolSequence::from_raw(self.params.q, digits.into_digits()))
    }

    /// Replays `n` splits from `[0, 1)`, following the fraction `0.d`.
    ///
    /// Any digit count is accepted; trailing zeros do not change the result.
    pub fn decode(&self, d: &SymbolSequence) -> Result<SymbolSequence> {
        if d.q() != self.params.q {
            return Err(Error::AlphabetMismatch { expected: self.params.q, actual: d.q() });
        }
        Ok(self.decode_digits(d.symbols()))
    }

    pub(crate) fn decode_digits(&self, digits: &[Symbol]) -> SymbolSequence {
        // Track the fraction in local coordinates: r = numer / denom in [0, 1).
        let (mut numer, mut denom) = scaled_digits_value(u32::from(self.params.q), digits);
        let q = self.params.q as usize;
        let mut out = Vec::with_capacity(self.params.n);
        for _ in 0..self.params.n {
            let scaled = &numer * &self.total;
            let mut slot = q - 1;
            for k in 1..q {
                if scaled < &self.cum[k] * &denom {
                    slot = k - 1;
                    break;
                }
            }
            numer = scaled - &self.cum[slot] * &denom;
            denom *= &self.widths[slot];
            out.push(self.order[slot]);
        }
        SymbolSequence::from_raw(self.params.q, out)
    }
}

pub fn map_to_interval(x: &SymbolSequence, params: &CoderParams) -> Result<Interval> {
    ArithmeticCoder::new(params.clone())?.map_to_interval(x)
}

pub fn encode(x: &SymbolSequence, params: &CoderParams) -> Result<SymbolSequence> {
    ArithmeticCoder::new(params.clone())?.encode(x)
}

pub fn decode(d: &SymbolSequence, params: &CoderParams) -> Result<SymbolSequence> {
    ArithmeticCoder::new(params.clone())?.decode(d)
}

/// `p^lows * (1-p)^highs` generalised to `q` slots: `(2p/q)^lows * (2(1-p)/q)^highs`.
pub fn interval_length_closed_form(p: &BigFraction, q: u8, lows: usize, highs: usize) -> BigFraction {
    let two_over_q = BigFraction::new(2u32, q);
    let low = &two_over_q * p;
    let high = &two_over_q * &(&BigFraction::one() - p);
    let pow = |base: &BigFraction, e: usize| {
        BigFraction::new(base.numer().pow(e as u32), base.denom().pow(e as u32))
    };
    &pow(&low, lows) * &pow(&high, highs)
}
