use std::collections::HashSet;

use almost_balanced::bounds::{density_f, limiting_density};
use almost_balanced::codec::{interval_length_closed_form, ArithmeticCoder, CoderParams};
use almost_balanced::constraints::{
    self, band_range, count_symbol, in_band, in_c, in_c_high, in_c_low, weight, BalanceSpec,
};
use almost_balanced::interval::{shortest_fraction, split_qary, BigFraction, Interval};
use almost_balanced::{AlphaSq, Balancer, CodecConfig, Mode, SymbolSequence};
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::sample::select;

fn a2(n: u64, d: u64) -> AlphaSq {
    AlphaSq::new(n, d).unwrap()
}

fn frac(n: u64, d: u64) -> BigFraction {
    BigFraction::new(n, d)
}

prop_compose! {
    fn interval()(d in 1u64..400)(a in 0..d, b in 0..d, d in Just(d), hi_end in any::<bool>()) -> Interval {
        let (lo, hi) = if a == b { (a, a + 1) } else { (a.min(b), a.max(b)) };
        let hi = if hi_end { d } else { hi };
        Interval::new(frac(lo, d), frac(hi, d)).unwrap()
    }
}

prop_compose! {
    fn probability()(d in 2u64..200)(a in 1..d, d in Just(d)) -> BigFraction {
        frac(a, d)
    }
}

fn word(q: u8, len: usize) -> impl Strategy<Value = SymbolSequence> {
    prop::collection::vec(0..q, len).prop_map(move |s| SymbolSequence::new(q, s).unwrap())
}

/// Smallest-k, then smallest-m search for `m / base^k` in the interval.
fn brute_shortest(i: &Interval, base: u32) -> (usize, BigFraction) {
    for k in 0..64usize {
        let scale = (base as u64).pow(k as u32);
        for m in 0..scale {
            let x = frac(m, scale);
            if i.contains(&x) {
                return (k, x);
            }
        }
    }
    unreachable!()
}

proptest! {
    #[test]
    fn qary_split_tiles_the_parent(i in interval(), p in probability(), half in 1u8..4) {
        let q = 2 * half;
        let parts = split_qary(&i, &p, q);
        prop_assert_eq!(parts.len(), q as usize);
        prop_assert_eq!(parts[0].lo(), i.lo());
        prop_assert_eq!(parts[q as usize - 1].hi(), i.hi());
        let low = &(&frac(2, q as u64) * &p) * &i.length();
        let high = &(&frac(2, q as u64) * &(&BigFraction::one() - &p)) * &i.length();
        for (k, part) in parts.iter().enumerate() {
            prop_assert!(i.contains_interval(part));
            prop_assert_eq!(part.length(), if k < half as usize { low.clone() } else { high.clone() });
            if k > 0 {
                prop_assert_eq!(parts[k - 1].hi(), part.lo());
            }
        }
    }

    #[test]
    fn shortest_fraction_is_minimal(i in interval(), base in 2u32..6) {
        let d = shortest_fraction(&i, base);
        let (k, x) = brute_shortest(&i, base);
        prop_assert!(i.contains(&d.value()));
        prop_assert_eq!(d.len(), k);
        prop_assert_eq!(d.value(), x);
    }

    #[test]
    fn shortest_fraction_length_bound(i in interval(), base in 2u32..6) {
        let d = shortest_fraction(&i, base);
        // a grid of spacing base^-k no wider than the interval always hits it
        let mut k = 0;
        let mut w = i.length();
        while w < BigFraction::one() {
            w = &w * &frac(base as u64, 1);
            k += 1;
        }
        prop_assert!(d.len() <= k);
    }

    #[test]
    fn band_range_agrees_with_in_band(n in 1usize..300, num in 1u64..40, den in 1u64..40, div in select(vec![2u32, 4]), half in any::<bool>()) {
        let alpha_sq = a2(num, den);
        let scale = if half { Ratio::new(1, 2) } else { Ratio::from_integer(1) };
        let range = band_range(n, div, alpha_sq, scale);
        for v in 0..=n {
            let inside = range.is_some_and(|(lo, hi)| lo <= v && v <= hi);
            prop_assert_eq!(inside, in_band(v, n, div, alpha_sq, scale), "v = {}", v);
        }
    }

    #[test]
    fn membership_splits_into_sides(x in (1usize..40).prop_flat_map(|n| word(2, n)), num in 1u64..10, den in 1u64..10) {
        let spec = BalanceSpec::new(x.len(), 2, a2(num, den));
        prop_assert_eq!(in_c(&x, &spec), in_c_low(&x, &spec) && in_c_high(&x, &spec));
        prop_assert_eq!(weight(&x) + count_symbol(&x, 0), x.len());
    }

    #[test]
    fn membership_is_permutation_invariant(
        s in (1usize..30).prop_flat_map(|n| prop::collection::vec(0u8..4, n)).prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
    ) {
        let (x, y) = (SymbolSequence::new(4, s.0).unwrap(), SymbolSequence::new(4, s.1).unwrap());
        let spec = BalanceSpec::new(x.len(), 4, a2(1, 1));
        prop_assert_eq!(constraints::in_c_pb(&x, &spec), constraints::in_c_pb(&y, &spec));
        prop_assert_eq!(constraints::in_c_sb4(&x, &spec), constraints::in_c_sb4(&y, &spec));
        for i in 1..=3 {
            prop_assert_eq!(constraints::in_c0i(&x, &spec, i), constraints::in_c0i(&y, &spec, i));
        }
    }

    #[test]
    fn interval_length_matches_closed_form(half in 1u8..4, p in probability(), raw in prop::collection::vec(0u8..6, 1..20)) {
        let q = 2 * half;
        let symbols: Vec<u8> = raw.iter().map(|s| s % q).collect();
        let n = symbols.len();
        let lows = symbols.iter().filter(|&&s| s < half).count();
        let x = SymbolSequence::new(q, symbols).unwrap();
        let coder = ArithmeticCoder::new(CoderParams::polarity(n + 1, q, p.clone(), n)).unwrap();
        let mut padded = x.symbols().to_vec();
        padded.push(0);
        let i = coder.map_to_interval(&SymbolSequence::new(q, padded).unwrap()).unwrap();
        prop_assert_eq!(i.length(), interval_length_closed_form(&p, q, lows + 1, n - lows));
    }

    #[test]
    fn coder_roundtrip_ignores_padding(x in word(4, 10), p in probability(), remap in 0u8..4, extra in 0usize..6) {
        let params = match remap {
            0 => CoderParams::polarity(10, 4, p, 9),
            i => CoderParams::remapped(10, p, 9, i),
        };
        let coder = ArithmeticCoder::new(params).unwrap();
        let mut digits = coder.shortest(&x).unwrap().into_digits();
        digits.extend(std::iter::repeat_n(0, extra));
        prop_assert_eq!(coder.decode(&SymbolSequence::new(4, digits).unwrap()).unwrap(), x);
    }

    #[test]
    fn density_is_monotone_in_alpha(n in 1usize..400, a in 1u64..50, b in 1u64..50) {
        let (lo, hi) = (a.min(b), a.max(b));
        let f_lo = density_f(n, a2(lo, 16)).fraction;
        let f_hi = density_f(n, a2(hi, 16)).fraction;
        prop_assert!(0.0 <= f_lo && f_lo <= f_hi && f_hi <= 1.0);
    }

    #[test]
    fn limiting_density_is_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(limiting_density(lo) <= limiting_density(hi));
        prop_assert!((limiting_density(-a) + limiting_density(a)).abs() < 1e-15);
    }
}

fn check_encoding(balancer: &Balancer, x: &SymbolSequence) -> Result<(), TestCaseError> {
    let cfg = balancer.config();
    let report = balancer.encode(x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let y = &report.codeword;
    prop_assert!(balancer.is_member(y));
    prop_assert_eq!(&balancer.decode(y).unwrap(), x);

    // flag discipline: an untouched word keeps its trailing 0, a mapped one carries a flag
    if report.iterations == 0 {
        prop_assert_eq!(y.last(), Some(0));
    } else {
        let s = y.symbols();
        let n = cfg.n;
        match cfg.mode {
            Mode::Binary => prop_assert_eq!(s[n - 1], 1),
            Mode::Polarity => prop_assert!(matches!(s[n - 1], 1 | 2)),
            Mode::Symbol4 => prop_assert!(s[n - 2] <= 1 && s[n - 1] >= 1),
        }
    }

    // replay the loop with step_map: no intermediate word repeats
    let mut y = SymbolSequence::new(cfg.q, x.symbols().iter().copied().chain([0]).collect()).unwrap();
    let mut seen = HashSet::new();
    while !balancer.is_member(&y) {
        prop_assert!(seen.insert(y.clone()), "revisited {}", y);
        y = balancer.step_map(&y).unwrap();
    }
    prop_assert_eq!(seen.len(), report.iterations);
    Ok(())
}

/// Words with symbol `0` drawn with probability `bias / 16`, so encoding takes several iterations.
fn skewed(q: u8, len: usize) -> impl Strategy<Value = SymbolSequence> {
    (0u32..=16).prop_flat_map(move |bias| {
        prop::collection::vec((0u32..16, 1..q), len).prop_map(move |draws| {
            let s = draws.into_iter().map(|(r, other)| if r < bias { 0 } else { other }).collect();
            SymbolSequence::new(q, s).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_encoding(n in (4usize..16).prop_map(|h| 2 * h), bias in any::<u64>()) {
        let balancer = Balancer::new(CodecConfig::binary(n, a2(1, 1))).unwrap();
        let len = n - 1;
        let x = SymbolSequence::new(2, (0..len).map(|k| ((bias >> k) & 1) as u8).collect()).unwrap();
        check_encoding(&balancer, &x)?;
    }

    #[test]
    fn polarity_encoding(q in select(vec![4u8, 6]), x in skewed(6, 11)) {
        let balancer = Balancer::new(CodecConfig::polarity(12, q, a2(1, 1))).unwrap();
        let x = SymbolSequence::new(q, x.symbols().iter().map(|s| s % q).collect()).unwrap();
        check_encoding(&balancer, &x)?;
    }

    #[test]
    fn symbol4_encoding(x in skewed(4, 99)) {
        let balancer = Balancer::new(CodecConfig::symbol4(100, a2(6, 1))).unwrap();
        check_encoding(&balancer, &x)?;
    }
}

#[test]
fn polarity_encoder_is_injective() {
    let (n, q) = (10, 4);
    let balancer = Balancer::new(CodecConfig::polarity(n, q, a2(1, 1))).unwrap();
    let mut codewords = HashSet::new();
    for v in 0..4u32.pow(n as u32 - 1) {
        let x = SymbolSequence::new(q, (0..n - 1).map(|k| ((v >> (2 * k)) & 3) as u8).collect()).unwrap();
        let y = balancer.encode(&x).unwrap().codeword;
        assert!(codewords.insert(y), "collision for {x}");
    }
}

#[test]
fn symbol4_iterates_on_skewed_input() {
    let balancer = Balancer::new(CodecConfig::symbol4(100, a2(6, 1))).unwrap();
    let x = SymbolSequence::new(4, vec![0; 99]).unwrap();
    let report = balancer.encode(&x).unwrap();
    assert!(report.iterations > 0);
    assert_eq!(balancer.decode(&report.codeword).unwrap(), x);
}
