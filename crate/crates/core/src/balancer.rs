//! Iterative single-redundancy-symbol balancing.
//!
//! Every mode starts from `y = x ∘ 0` and, while `y` violates the target
//! constraint, replaces it by one arithmetic-coder output plus a flag suffix
//! that tells the decoder which coder to invert. The coder outputs are
//! shorter than `n` by exactly the flag length, so `|y| = n` throughout.
//!
//! | mode       | q        | coder output | L flag  | H flag  |
//! |------------|----------|--------------|---------|---------|
//! | `binary`   | 2        | `n - 2`      | `11`    | `01`    |
//! | `polarity` | even ≥ 4 | `n - 1`      | `1`     | `2`     |
//! | `symbol4`  | 4        | `n - 2`      | `1 i`   | `0 i`   |
//!
//! The L coder favours the first-half symbols and is used when the balance
//! statistic (zeros, low-half symbols, or `#0 + #i`) sits above the band;
//! the H coder is used when it sits below.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;

use crate::codec::{ArithmeticCoder, CoderParams};
use crate::constraints::{
    self, band_range, AlphaSq, BalanceSpec, Symbol, SymbolSequence,
};
use crate::error::{Error, Result};
use crate::interval::BigFraction;

pub const DEFAULT_PRECISION_BITS: u32 = 96;

/// Guard bits used while rounding `p_L` to `precision_bits`.
const GUARD_BITS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Binary,
    Polarity,
    Symbol4,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Binary => "binary",
            Mode::Polarity => "polarity",
            Mode::Symbol4 => "symbol4",
        }
    }

    pub fn default_q(self) -> u8 {
        match self {
            Mode::Binary => 2,
            Mode::Polarity | Mode::Symbol4 => 4,
        }
    }

    fn flag_len(self) -> usize {
        match self {
            Mode::Binary | Mode::Symbol4 => 2,
            Mode::Polarity => 1,
        }
    }

    /// Band half-width multiplier on `alpha sqrt(n)` for the balance statistic.
    fn band_scale(self) -> Ratio<u64> {
        match self {
            Mode::Binary | Mode::Polarity => Ratio::new(1, 1),
            Mode::Symbol4 => Ratio::new(1, 2),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary" => Ok(Mode::Binary),
            "polarity" => Ok(Mode::Polarity),
            "symbol4" => Ok(Mode::Symbol4),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Parameters of a balancing code. Run [`validate_config`] (or build a
/// [`Balancer`], which does) before encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodecConfig {
    pub mode: Mode,
    pub n: usize,
    pub q: u8,
    pub alpha_sq: AlphaSq,
    pub precision_bits: u32,
    pub max_iterations: usize,
}

impl CodecConfig {
    pub fn new(mode: Mode, n: usize, q: u8, alpha_sq: AlphaSq) -> Self {
        CodecConfig {
            mode,
            n,
            q,
            alpha_sq,
            precision_bits: DEFAULT_PRECISION_BITS,
            max_iterations: 10 * n,
        }
    }

    pub fn binary(n: usize, alpha_sq: AlphaSq) -> Self {
        Self::new(Mode::Binary, n, 2, alpha_sq)
    }

    pub fn polarity(n: usize, q: u8, alpha_sq: AlphaSq) -> Self {
        Self::new(Mode::Polarity, n, q, alpha_sq)
    }

    pub fn symbol4(n: usize, alpha_sq: AlphaSq) -> Self {
        Self::new(Mode::Symbol4, n, 4, alpha_sq)
    }

    pub fn with_precision_bits(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    pub fn with_max_iterations(mut self, limit: usize) -> Self {
        self.max_iterations = limit;
        self
    }

    /// Length of each inner coder output.
    pub fn target_len(&self) -> usize {
        self.n.saturating_sub(self.mode.flag_len())
    }

    pub fn spec(&self) -> BalanceSpec {
        BalanceSpec::new(self.n, self.q, self.alpha_sq)
    }

    /// `p_L` rounded to a dyadic rational with `precision_bits` fractional bits.
    ///
    /// Binary and polarity: `1/2 + alpha/sqrt(n) + 1/n`.
    /// Symbol4: `1/2 + alpha/(2 sqrt(n)) + 1/n`.
    pub fn p_low(&self) -> BigFraction {
        let numer = dyadic_p_low(self.n, self.alpha_sq, self.mode.band_scale(), self.precision_bits);
        BigFraction::new(numer, BigUint::one() << self.precision_bits)
    }

    /// `1 - p_L`, exactly.
    pub fn p_high(&self) -> BigFraction {
        &BigFraction::one() - &self.p_low()
    }
}

fn dyadic_p_low(n: usize, alpha_sq: AlphaSq, scale: Ratio<u64>, bits: u32) -> BigUint {
    let s = bits + GUARD_BITS;
    // floor(2^s * sqrt(alpha^2 scale^2 / n)) == isqrt(floor(4^s alpha^2 scale^2 / n))
    let num = (BigUint::from(alpha_sq.num()) * scale.numer() * scale.numer()) << (2 * s);
    let den = BigUint::from(alpha_sq.den()) * scale.denom() * scale.denom() * n;
    let root = (num / den).sqrt();
    let one = BigUint::one() << s;
    let total = (&one >> 1u32) + &one / n + root;
    (total + (BigUint::one() << (GUARD_BITS - 1))) >> GUARD_BITS
}

/// Balance statistic range accepted by the target band, `None` if empty.
fn statistic_band(cfg: &CodecConfig) -> Option<(usize, usize)> {
    band_range(cfg.n, 2, cfg.alpha_sq, cfg.mode.band_scale())
}

/// Checks that `cfg` yields a terminating, injective code.
///
/// Beyond the alphabet and length checks this verifies, with exact
/// rationals, that `p_L` lies in `(1/2, 1)` and that every out-of-band word
/// maps to an interval of length at least `q^-target_len`, so the coder
/// output always fits.
pub fn validate_config(cfg: &CodecConfig) -> Result<()> {
    let mode = cfg.mode.name();
    match cfg.mode {
        Mode::Binary if cfg.q != 2 => return Err(Error::UnsupportedAlphabet { q: cfg.q, mode }),
        Mode::Polarity if cfg.q < 4 || !cfg.q.is_multiple_of(2) || cfg.q > 36 => {
            return Err(Error::UnsupportedAlphabet { q: cfg.q, mode })
        }
        Mode::Symbol4 if cfg.q != 4 => return Err(Error::UnsupportedAlphabet { q: cfg.q, mode }),
        _ => {}
    }
    if cfg.n < cfg.mode.flag_len() + 1 || cfg.precision_bits == 0 {
        return Err(Error::LengthTooShort { n: cfg.n, mode });
    }

    let p_low = cfg.p_low();
    let invalid = || Error::InvalidProbability { n: cfg.n, p_low: format!("{:.6}", p_low.to_f64()) };
    // Exact: 1/2 + k alpha / sqrt(n) + 1/n < 1  <=>  n > 2 and 4 k^2 alpha^2 n < (n - 2)^2.
    if cfg.n <= 2 {
        return Err(invalid());
    }
    let scale = cfg.mode.band_scale();
    let lhs = BigUint::from(4u32) * cfg.alpha_sq.num() * scale.numer() * scale.numer() * cfg.n;
    let rhs = BigUint::from(cfg.n - 2).pow(2) * cfg.alpha_sq.den() * scale.denom() * scale.denom();
    if lhs >= rhs {
        return Err(invalid());
    }
    let half = BigFraction::new(1u32, 2u32);
    if p_low <= half || p_low >= BigFraction::one() {
        return Err(invalid());
    }

    let n = cfg.n;
    let (l_worst, h_worst) = match statistic_band(cfg) {
        Some((lo, hi)) => ((hi < n).then_some(hi + 1), lo.checked_sub(1)),
        // only odd n with a tiny alpha: every word is out of band
        None => (Some(n / 2 + 1).filter(|&v| v <= n), Some((n - 1) / 2)),
    };

    let a = p_low.numer();
    let b = p_low.denom();
    let low_w = a * 2u32;
    let high_w = (b - a) * 2u32;
    let q = BigUint::from(cfg.q);
    let full = (&q * b).pow(n as u32);
    let target = q.pow(cfg.target_len() as u32);
    // (low_w/qb)^lows (high_w/qb)^highs >= q^-T  <=>  low_w^lows high_w^highs q^T >= (qb)^n
    let fits = |lows: usize, favoured: &BigUint, other: &BigUint| {
        favoured.pow(lows as u32) * other.pow((n - lows) as u32) * &target >= full
    };
    if let Some(v) = l_worst {
        if !fits(v, &low_w, &high_w) {
            return Err(Error::InsufficientCompression { branch: "L", statistic: v, target_len: cfg.target_len() });
        }
    }
    if let Some(v) = h_worst {
        if !fits(v, &high_w, &low_w) {
            return Err(Error::InsufficientCompression { branch: "H", statistic: v, target_len: cfg.target_len() });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coder {
    Low,
    High,
}

/// Which coder one loop iteration applied, and for `symbol4` the pair index `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BranchTag {
    pub coder: Coder,
    pub pair: Option<Symbol>,
}

impl BranchTag {
    pub const L: BranchTag = BranchTag { coder: Coder::Low, pair: None };
    pub const H: BranchTag = BranchTag { coder: Coder::High, pair: None };
}

impl fmt::Display for BranchTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.coder {
            Coder::Low => 'L',
            Coder::High => 'H',
        };
        match self.pair {
            Some(i) => write!(f, "{c}{i}"),
            None => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodeReport {
    pub codeword: SymbolSequence,
    pub iterations: usize,
    pub branch_trace: Vec<BranchTag>,
}

/// A validated code: the config plus its prepared coders.
#[derive(Clone, Debug)]
pub struct Balancer {
    config: CodecConfig,
    spec: BalanceSpec,
    /// One coder per remap index for `symbol4`, a single one otherwise.
    low: Vec<ArithmeticCoder>,
    high: Vec<ArithmeticCoder>,
}

impl Balancer {
    pub fn new(config: CodecConfig) -> Result<Self> {
        validate_config(&config)?;
        let (n, t) = (config.n, config.target_len());
        let (p_low, p_high) = (config.p_low(), config.p_high());
        let params = |p: &BigFraction| -> Vec<CoderParams> {
            match config.mode {
                Mode::Binary => vec![CoderParams::binary(n, p.clone(), t)],
                Mode::Polarity => vec![CoderParams::polarity(n, config.q, p.clone(), t)],
                Mode::Symbol4 => (1..=3).map(|i| CoderParams::remapped(n, p.clone(), t, i)).collect(),
            }
        };
        let build = |ps: Vec<CoderParams>| ps.into_iter().map(ArithmeticCoder::new).collect::<Result<Vec<_>>>();
        let low = build(params(&p_low))?;
        let high = build(params(&p_high))?;
        Ok(Balancer { spec: config.spec(), config, low, high })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    fn check(&self, x: &SymbolSequence, len: usize) -> Result<()> {
        if x.q() != self.config.q {
            return Err(Error::AlphabetMismatch { expected: self.config.q, actual: x.q() });
        }
        if x.len() != len {
            return Err(Error::WrongLength { expected: len, actual: x.len() });
        }
        Ok(())
    }

    /// Membership in the mode's target constraint.
    pub fn is_member(&self, y: &SymbolSequence) -> bool {
        match self.config.mode {
            Mode::Binary => constraints::in_c(y, &self.spec),
            Mode::Polarity => constraints::in_c_pb(y, &self.spec),
            Mode::Symbol4 => constraints::in_c_sb4(y, &self.spec),
        }
    }

    fn coder(&self, coder: Coder, pair: Option<Symbol>) -> &ArithmeticCoder {
        let idx = pair.map_or(0, |i| i as usize - 1);
        match coder {
            Coder::Low => &self.low[idx],
            Coder::High => &self.high[idx],
        }
    }

    /// Picks the branch for a non-member `y`.
    fn branch(&self, y: &SymbolSequence) -> Result<BranchTag> {
        let spec = &self.spec;
        let tag = match self.config.mode {
            // y in C_L \ C: too few ones, i.e. too many zeros
            Mode::Binary if constraints::in_c_low(y, spec) => BranchTag::L,
            Mode::Binary => BranchTag::H,
            // low-half count above the band
            Mode::Polarity if constraints::in_c_pb_high(y, spec) => BranchTag::L,
            Mode::Polarity => BranchTag::H,
            Mode::Symbol4 => {
                let i = (1..=3)
                    .find(|&i| !constraints::in_c0i(y, spec, i))
                    // unreachable: the three pair bands together imply symbol balance
                    .ok_or(Error::AlreadyBalanced)?;
                let coder = if constraints::in_c0i_low(y, spec, i) { Coder::High } else { Coder::Low };
                BranchTag { coder, pair: Some(i) }
            }
        };
        Ok(tag)
    }

    fn flag(&self, tag: BranchTag) -> Vec<Symbol> {
        match (self.config.mode, tag.coder) {
            (Mode::Binary, Coder::Low) => vec![1, 1],
            (Mode::Binary, Coder::High) => vec![0, 1],
            (Mode::Polarity, Coder::Low) => vec![1],
            (Mode::Polarity, Coder::High) => vec![2],
            (Mode::Symbol4, c) => {
                let i = tag.pair.expect("symbol4 tags carry a pair index");
                vec![if c == Coder::Low { 1 } else { 0 }, i]
            }
        }
    }

    fn apply(&self, y: &SymbolSequence) -> Result<(SymbolSequence, BranchTag)> {
        let tag = self.branch(y)?;
        let mut body = self.coder(tag.coder, tag.pair).encode(y)?.into_symbols();
        body.extend(self.flag(tag));
        Ok((SymbolSequence::from_raw(self.config.q, body), tag))
    }

    /// One iteration of the encoder loop on a non-member `y` of length `n`.
    pub fn step_map(&self, y: &SymbolSequence) -> Result<SymbolSequence> {
        self.check(y, self.config.n)?;
        if self.is_member(y) {
            return Err(Error::AlreadyBalanced);
        }
        Ok(self.apply(y)?.0)
    }

    /// Encodes `x` of length `n - 1` into a member of the target constraint.
    pub fn encode(&self, x: &SymbolSequence) -> Result<EncodeReport> {
        self.check(x, self.config.n - 1)?;
        let mut symbols = x.symbols().to_vec();
        symbols.push(0);
        let mut y = SymbolSequence::from_raw(self.config.q, symbols);
        let mut trace = Vec::new();
        while !self.is_member(&y) {
            if trace.len() >= self.config.max_iterations {
                return Err(Error::IterationGuardExceeded { limit: self.config.max_iterations });
            }
            let (next, tag) = self.apply(&y)?;
            y = next;
            trace.push(tag);
        }
        Ok(EncodeReport { codeword: y, iterations: trace.len(), branch_trace: trace })
    }

    /// Inverts [`Balancer::encode`].
    pub fn decode(&self, y: &SymbolSequence) -> Result<SymbolSequence> {
        let n = self.config.n;
        self.check(y, n)?;
        let mut y = y.clone();
        let mut rounds = 0;
        while let Some(last) = y.last().filter(|&s| s != 0) {
            if rounds >= self.config.max_iterations {
                return Err(Error::IterationGuardExceeded { limit: self.config.max_iterations });
            }
            rounds += 1;
            let s = y.symbols();
            let invalid = || Error::InvalidCodeword { suffix: s[n - self.config.mode.flag_len()..].to_vec() };
            let (coder, body) = match self.config.mode {
                Mode::Binary => {
                    let c = if s[n - 2] == 1 { Coder::Low } else { Coder::High };
                    (self.coder(c, None), &s[..n - 2])
                }
                Mode::Polarity => {
                    let c = match last {
                        1 => Coder::Low,
                        2 => Coder::High,
                        _ => return Err(invalid()),
                    };
                    (self.coder(c, None), &s[..n - 1])
                }
                Mode::Symbol4 => {
                    let c = match s[n - 2] {
                        1 => Coder::Low,
                        0 => Coder::High,
                        _ => return Err(invalid()),
                    };
                    (self.coder(c, Some(last)), &s[..n - 2])
                }
            };
            y = coder.decode_digits(body);
        }
        let mut symbols = y.into_symbols();
        symbols.truncate(n - 1);
        Ok(SymbolSequence::from_raw(self.config.q, symbols))
    }
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;

    fn a2(n: u64, d: u64) -> AlphaSq {
        AlphaSq::new(n, d).unwrap()
    }

    fn seq(q: u8, s: &str) -> SymbolSequence {
        SymbolSequence::parse(q, s).unwrap()
    }

    #[test]
    fn p_low_is_close_to_real_value() {
        let cfg = CodecConfig::binary(8, a2(1, 1));
        let real = 0.5 + 1.0 / 8f64.sqrt() + 0.125;
        assert!((cfg.p_low().to_f64() - real).abs() < 1e-15);
        assert_eq!(&cfg.p_low() + &cfg.p_high(), BigFraction::one());
        assert!(((BigUint::one() << 96u32) % cfg.p_low().denom()).is_zero());

        let cfg = CodecConfig::symbol4(100, a2(6, 1));
        let real = 0.5 + 6f64.sqrt() / 20.0 + 0.01;
        assert!((cfg.p_low().to_f64() - real).abs() < 1e-15);
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_config(&CodecConfig::binary(8, a2(1, 1))), Ok(()));
        assert!(matches!(
            validate_config(&CodecConfig::binary(5, a2(1, 1))),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            validate_config(&CodecConfig::binary(8, a2(1, 100))),
            Err(Error::InsufficientCompression { .. })
        ));
        assert!(matches!(
            validate_config(&CodecConfig::symbol4(100, a2(1, 1))),
            Err(Error::InsufficientCompression { .. })
        ));
        assert_eq!(validate_config(&CodecConfig::symbol4(100, a2(6, 1))), Ok(()));
        assert_eq!(validate_config(&CodecConfig::polarity(12, 4, a2(1, 1))), Ok(()));
    }

    #[test]
    fn validation_rejects_alphabets() {
        let bad = [
            CodecConfig::new(Mode::Binary, 8, 4, a2(1, 1)),
            CodecConfig::new(Mode::Polarity, 8, 2, a2(1, 1)),
            CodecConfig::new(Mode::Polarity, 8, 5, a2(1, 1)),
            CodecConfig::new(Mode::Symbol4, 8, 6, a2(1, 1)),
        ];
        for cfg in bad {
            assert!(matches!(validate_config(&cfg), Err(Error::UnsupportedAlphabet { .. })), "{cfg:?}");
        }
    }

    #[test]
    fn worked_example_n8() {
        let b = Balancer::new(CodecConfig::binary(8, a2(1, 1))).unwrap();
        let y1 = b.step_map(&seq(2, "10000000")).unwrap();
        assert_eq!(y1.to_string(), "11111111");
        let y2 = b.step_map(&y1).unwrap();
        assert_eq!(y2.to_string(), "10000001");
        assert_eq!(b.step_map(&y2), Err(Error::AlreadyBalanced));

        let report = b.encode(&seq(2, "1000000")).unwrap();
        assert_eq!(report.codeword.to_string(), "10000001");
        assert_eq!(report.iterations, 2);
        assert_eq!(report.branch_trace, vec![BranchTag::L, BranchTag::H]);
        assert_eq!(b.decode(&report.codeword).unwrap().to_string(), "1000000");
    }

    #[test]
    fn zero_iteration_cases() {
        let b = Balancer::new(CodecConfig::binary(8, a2(1, 1))).unwrap();
        let r = b.encode(&seq(2, "1100100")).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.codeword.to_string(), "11001000");
        assert_eq!(b.decode(&seq(2, "10110110")).unwrap().to_string(), "1011011");

        let p = Balancer::new(CodecConfig::polarity(12, 4, a2(1, 1))).unwrap();
        let r = p.encode(&seq(4, "01230123012")).unwrap();
        assert_eq!(r.iterations, 0);

        let s = Balancer::new(CodecConfig::symbol4(100, a2(6, 1))).unwrap();
        let x: String = "0123".repeat(25)[..99].to_string();
        let r = s.encode(&seq(4, &x)).unwrap();
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn polarity_and_symbol4_extremes_roundtrip() {
        let p = Balancer::new(CodecConfig::polarity(12, 4, a2(1, 1))).unwrap();
        for x in ["00000000000", "33333333333", "01010101010", "32323232323"] {
            let r = p.encode(&seq(4, x)).unwrap();
            assert!(p.is_member(&r.codeword));
            assert_eq!(p.decode(&r.codeword).unwrap().to_string(), x);
        }

        let s = Balancer::new(CodecConfig::symbol4(100, a2(6, 1))).unwrap();
        for d in ['0', '1', '2', '3'] {
            let x: String = std::iter::repeat_n(d, 99).collect();
            let r = s.encode(&seq(4, &x)).unwrap();
            assert!(s.is_member(&r.codeword), "{x}");
            assert!(r.branch_trace.iter().all(|t| t.pair.is_some()));
            assert_eq!(s.decode(&r.codeword).unwrap().to_string(), x);
        }
    }

    #[test]
    fn decode_rejects_bad_flags() {
        let p = Balancer::new(CodecConfig::polarity(12, 4, a2(1, 1))).unwrap();
        assert!(matches!(p.decode(&seq(4, "000000000003")), Err(Error::InvalidCodeword { .. })));
        let s = Balancer::new(CodecConfig::symbol4(100, a2(6, 1))).unwrap();
        let mut y = vec![0u8; 98];
        y.extend([2, 1]);
        assert!(matches!(
            s.decode(&SymbolSequence::new(4, y).unwrap()),
            Err(Error::InvalidCodeword { .. })
        ));
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        let b = Balancer::new(CodecConfig::binary(8, a2(1, 1))).unwrap();
        assert!(matches!(b.encode(&seq(2, "10000000")), Err(Error::WrongLength { .. })));
        assert!(matches!(b.decode(&seq(2, "1000000")), Err(Error::WrongLength { .. })));
    }

    #[test]
    fn iteration_guard_fires() {
        let cfg = CodecConfig::binary(8, a2(1, 1)).with_max_iterations(1);
        let b = Balancer::new(cfg).unwrap();
        assert_eq!(
            b.encode(&seq(2, "1000000")),
            Err(Error::IterationGuardExceeded { limit: 1 })
        );
    }
}
