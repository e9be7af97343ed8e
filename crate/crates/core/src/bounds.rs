//! Densities and thresholds for the almost-balanced sets.
//!
//! This is analysis code and the only place floating point appears. Nothing
//! here feeds a coder.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use statrs::function::erf::erf;

use crate::constraints::{self, band_range, AlphaSq, BalanceSpec, SymbolSequence};

/// Largest `n` for which [`density_f`] sums exact big-integer binomials.
pub const EXACT_LIMIT: usize = 10_000;

/// `F(n, alpha) = |C(n, alpha sqrt n)| / 2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityResult {
    pub n: usize,
    pub alpha_sq: AlphaSq,
    /// Exact member count; `None` when the log-space path was used.
    pub count: Option<BigUint>,
    pub fraction: f64,
}

fn ratio_to_f64(numer: &BigUint, denom: &BigUint) -> f64 {
    Ratio::new(BigInt::from(numer.clone()), BigInt::from(denom.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

/// Exact count below [`EXACT_LIMIT`], log-space evaluation above.
pub fn density_f(n: usize, alpha_sq: AlphaSq) -> DensityResult {
    if n <= EXACT_LIMIT {
        density_f_exact(n, alpha_sq)
    } else {
        DensityResult { n, alpha_sq, count: None, fraction: density_f_log(n, alpha_sq) }
    }
}

/// Sums `C(n, w)` over the weight band with big integers.
pub fn density_f_exact(n: usize, alpha_sq: AlphaSq) -> DensityResult {
    let mut count = BigUint::zero();
    if let Some((lo, hi)) = band_range(n, 2, alpha_sq, Ratio::from_integer(1)) {
        let mut binom = BigUint::from(1u8);
        for w in 0..=hi {
            if w >= lo {
                count += &binom;
            }
            binom = binom * (n - w) / (w + 1);
        }
    }
    let fraction = ratio_to_f64(&count, &(BigUint::from(1u8) << n));
    DensityResult { n, alpha_sq, count: Some(count), fraction }
}

/// `C(2m, m) / 4^m`.
fn central_term(m: usize) -> f64 {
    if m < 1024 {
        let c = (0..m).fold(BigUint::from(1u8), |acc, k| acc * (2 * m - k) / (k + 1));
        return ratio_to_f64(&c, &(BigUint::from(1u8) << (2 * m)));
    }
    let m = m as f64;
    let series = 1.0 - 1.0 / (8.0 * m) + 1.0 / (128.0 * m * m) + 5.0 / (1024.0 * m.powi(3))
        - 21.0 / (32768.0 * m.powi(4));
    series / (PI * m).sqrt()
}

/// Band sum of `C(n, w) / 2^n`, walking outward from the centre with the
/// ratio `C(n, w+1) / C(n, w) = (n - w) / (w + 1)`. The centre term comes from
/// the asymptotic series for the central binomial coefficient, so no huge
/// intermediate appears and the relative error stays near machine precision.
pub fn density_f_log(n: usize, alpha_sq: AlphaSq) -> f64 {
    let Some((lo, hi)) = band_range(n, 2, alpha_sq, Ratio::from_integer(1)) else {
        return 0.0;
    };
    let m = n / 2;
    let centre = if n.is_multiple_of(2) {
        central_term(m)
    } else {
        // C(2m+1, m) / 2^(2m+1) = C(2m, m)/4^m * (2m+1) / (2(m+1))
        central_term(m) * (2 * m + 1) as f64 / (2 * (m + 1)) as f64
    };
    let (nf, mut sum) = (n as f64, 0.0);
    let mut t = centre;
    for w in m..=hi {
        if w >= lo {
            sum += t;
        }
        t *= (nf - w as f64) / (w as f64 + 1.0);
    }
    let mut t = centre;
    for w in (lo..m).rev() {
        t *= (w as f64 + 1.0) / (nf - w as f64);
        sum += t;
    }
    sum
}

/// `F^(pb)(n, alpha)`: equal to `F(n, alpha)` for every even `q`.
pub fn density_f_pb(n: usize, q: u8, alpha_sq: AlphaSq) -> DensityResult {
    debug_assert!(q.is_multiple_of(2));
    density_f(n, alpha_sq)
}

/// Counts polarity-band members of `Σ_q^n` one sequence at a time.
pub fn density_f_pb_brute(n: usize, q: u8, alpha_sq: AlphaSq) -> DensityResult {
    assert!(q.is_multiple_of(2) && q >= 2, "polarity needs an even alphabet");
    let total = (q as u64).checked_pow(n as u32).expect("enumeration too large");
    let spec = BalanceSpec::new(n, q, alpha_sq);
    let mut digits = vec![0u8; n];
    let mut count = 0u64;
    for _ in 0..total {
        let x = SymbolSequence::new(q, digits.clone()).expect("digits < q");
        if constraints::in_c_pb(&x, &spec) {
            count += 1;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    DensityResult {
        n,
        alpha_sq,
        count: Some(BigUint::from(count)),
        fraction: count as f64 / total as f64,
    }
}

/// Limiting density `2 Phi(2 alpha) - 1 = erf(sqrt(2) alpha)`.
pub fn limiting_density(alpha: f64) -> f64 {
    erf(SQRT_2 * alpha)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / SQRT_2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCheck {
    pub n: usize,
    /// `None` when the lower grid point is zero.
    pub lower_density: Option<f64>,
    pub upper_density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub q: u32,
    pub lower: Ratio<u64>,
    pub upper: Ratio<u64>,
    pub limit_lower: f64,
    pub limit_upper: f64,
    pub finite: Option<FiniteCheck>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsTable {
    pub grid_step: Ratio<u64>,
    pub rows: Vec<BoundsRow>,
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// For each `q`, the adjacent grid points between which the limiting density
/// crosses `1/q`.
pub fn table_bounds(qs: RangeInclusive<u32>, grid_step: Ratio<u64>) -> BoundsTable {
    assert!(*grid_step.numer() > 0, "grid step must be positive");
    let rows = qs
        .map(|q| {
            assert!(q >= 2, "alphabet size must be at least 2");
            let target = 1.0 / q as f64;
            let mut k = 1u64;
            while limiting_density(ratio_f64(grid_step * k)) < target {
                k += 1;
            }
            let lower = grid_step * (k - 1);
            let upper = grid_step * k;
            BoundsRow {
                q,
                lower,
                upper,
                limit_lower: limiting_density(ratio_f64(lower)),
                limit_upper: limiting_density(ratio_f64(upper)),
                finite: None,
            }
        })
        .collect();
    BoundsTable { grid_step, rows }
}

fn squared(r: Ratio<u64>) -> Option<AlphaSq> {
    AlphaSq::new(r.numer().checked_mul(*r.numer())?, r.denom().checked_mul(*r.denom())?).ok()
}

impl BoundsTable {
    /// Attaches `F(n, lower)` and `F(n, upper)` to every row.
    pub fn with_finite_check(mut self, n: usize) -> Self {
        for row in &mut self.rows {
            let upper = squared(row.upper).expect("grid point fits in u64");
            row.finite = Some(FiniteCheck {
                n,
                lower_density: squared(row.lower).map(|a| density_f(n, a).fraction),
                upper_density: density_f(n, upper).fraction,
            });
        }
        self
    }
}

/// `2^(n-2) (1/2 - d)^(n/2 - alpha sqrt n) (1/2 + d)^(n/2 + alpha sqrt n)` with
/// `d = alpha/sqrt(n) + 1/n`, evaluated in log space. `None` if `1/2 + d >= 1`.
pub fn limit_ratio(n: f64, alpha: f64) -> Option<f64> {
    let d = alpha / n.sqrt() + 1.0 / n;
    if 2.0 * d >= 1.0 {
        return None;
    }
    let shift = alpha * n.sqrt();
    let log = -2.0 * LN_2 + (n / 2.0 - shift) * (-2.0 * d).ln_1p() + (n / 2.0 + shift) * (2.0 * d).ln_1p();
    Some(log.exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    pub holds: bool,
    /// Sequences lying in all three pair bands.
    pub checked: u64,
    pub counterexample: Option<SymbolSequence>,
}

/// Checks over all of `Σ_4^n` that the three pair bands together imply symbol balance.
pub fn verify_containment(n: usize, alpha_sq: AlphaSq) -> ContainmentReport {
    assert!(n <= 10, "enumeration of 4^n sequences limited to n <= 10");
    let spec = BalanceSpec::new(n, 4, alpha_sq);
    let mut digits = vec![0u8; n];
    let mut checked = 0;
    for _ in 0..4u64.pow(n as u32) {
        let x = SymbolSequence::new(4, digits.clone()).expect("digits < 4");
        if (1..=3).all(|i| constraints::in_c0i(&x, &spec, i)) {
            checked += 1;
            if !constraints::in_c_sb4(&x, &spec) {
                return ContainmentReport { holds: false, checked, counterexample: Some(x) };
            }
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < 4 {
                break;
            }
            *d = 0;
        }
    }
    ContainmentReport { holds: true, checked, counterexample: None }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZScoreReport {
    pub phi_068: f64,
    pub phi_067: f64,
    /// `2 Phi(0.68) - 1`
    pub mass_068: f64,
    /// `2 Phi(0.67) - 1`
    pub mass_067: f64,
    pub holds: bool,
}

/// `[mu - 0.68 sigma, mu + 0.68 sigma]` holds at least half the normal mass;
/// `0.67 sigma` holds strictly less.
pub fn zscore_sanity() -> ZScoreReport {
    let phi_068 = normal_cdf(0.68);
    let phi_067 = normal_cdf(0.67);
    let mass_068 = 2.0 * phi_068 - 1.0;
    let mass_067 = 2.0 * phi_067 - 1.0;
    ZScoreReport { phi_068, phi_067, mass_068, mass_067, holds: mass_068 >= 0.5 && mass_067 < 0.5 }
}
