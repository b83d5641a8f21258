//! Tail probabilities of `N(0, sigma^2)` and of the fair binomial `B(n, 1/2)`,
//! exact and lower-bounded.
//!
//! The binomial probability mass is evaluated in log space as
//! `stirlerr(n) - stirlerr(k) - stirlerr(n-k) - n D(k/n || 1/2) - ln sqrt(2 pi k (n-k)/n)`,
//! where `stirlerr` is the error of Stirling's formula. This keeps the
//! relative error near machine precision for any `n`, where the plain
//! log-gamma difference loses digits to cancellation once `n` is large.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::error::{domain, finite, Result};
use crate::special::{kl_from_half, mills_ratio, psi, MillsMode, SQRT_2PI};
#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

/// `ln n! - ln(sqrt(2 pi n) (n/e)^n)` for `n = 0..=35` (mpmath, 50 digits; 0 at n = 0 by convention).
const STIRLERR_SMALL: [f64; 36] = [
    0.0,
    0.08106146679532726,
    0.0413406959554093,
    0.02767792568499834,
    0.020790672103765093,
    0.016644691189821193,
    0.013876128823070748,
    0.01189670994589177,
    0.010411265261972096,
    0.009255462182712733,
    0.00833056343336287,
    0.007573675487951841,
    0.00694284010720953,
    0.006408994188004207,
    0.0059513701127588475,
    0.005554733551962801,
    0.0052076559196096404,
    0.004901395948434738,
    0.004629153749334028,
    0.004385560249232324,
    0.004166319691996922,
    0.00396795421864086,
    0.0037876180684444346,
    0.0036229602246830948,
    0.003472021382978767,
    0.003333155636728093,
    0.003204970228055038,
    0.0030862786826087773,
    0.002976063983550409,
    0.0028734493623524663,
    0.0027776749297526936,
    0.002688078828531143,
    0.0026040819192516564,
    0.0025251752497567844,
    0.002450909735438118,
    0.002380887608234112,
];

fn stirlerr(n: u64) -> f64 {
    if n < 36 {
        return STIRLERR_SMALL[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    }
}

/// Natural log of `Pr[B_n = k]` for `B_n ~ B(n, 1/2)`; `-inf` outside `0..=n`.
pub fn ln_binomial_pmf(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if k == 0 || k == n {
        return -nf * LN_2;
    }
    let kf = k as f64;
    let x = kf / nf - 0.5;
    let exponent = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - nf * kl_from_half(x);
    let ln_base = 0.5 * ((2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p());
    exponent - ln_base
}

pub fn binomial_pmf(n: u64, k: u64) -> f64 {
    ln_binomial_pmf(n, k).exp()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `ln(exp(a) + exp(b))`
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Largest `n` whose tail counts `sum_j C(n, j)` are summed in `u128`; the
/// running product `C(n, j) (n - j)` stays below `2^123`.
const EXACT_COUNT_MAX_N: u64 = 120;

/// `2^-n sum_{j >= k} C(n, j)`, correctly rounded: the count converts to the
/// nearest `f64` and the power of two scales it exactly.
fn tail_from_counts(n: u64, k: u64) -> f64 {
    let mut c: u128 = 1;
    let mut total: u128 = 0;
    for j in 0..=n {
        if j >= k {
            total += c;
        }
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    total as f64 * f64::from_bits((1023 - n) << 52)
}

/// Exact `Pr[B_n >= k]` for `B_n ~ B(n, 1/2)`. Returns 1 for `k <= 0` and 0
/// for `k > n`.
pub fn binomial_tail_exact(n: u64, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    let k = k as u64;
    if k > n {
        return 0.0;
    }
    if n <= EXACT_COUNT_MAX_N {
        return tail_from_counts(n, k);
    }
    // Ascending order of magnitude: from the far end of the tail inwards.
    let mut acc = CompensatedSum::default();
    for i in (k..=n).rev() {
        acc.add(binomial_pmf(n, i));
    }
    acc.value().min(1.0)
}

/// `ln Pr[B_n >= k]`, usable when the tail itself underflows.
pub fn ln_binomial_tail_exact(n: u64, k: i64) -> f64 {
    if k <= 0 {
        return 0.0;
    }
    let k = k as u64;
    if k > n {
        return f64::NEG_INFINITY;
    }
    (k..=n)
        .rev()
        .map(|i| ln_binomial_pmf(n, i))
        .fold(f64::NEG_INFINITY, ln_add_exp)
        .min(0.0)
}

/// Upper-tail cumulative table: entry `j` holds `ln Pr[B_n >= j]` for
/// `j = 0..=n+1` (the last entry is `-inf`).
pub(crate) fn ln_upper_tails(n: u64) -> Vec<f64> {
    let len = n as usize + 2;
    let mut out = alloc::vec![f64::NEG_INFINITY; len];
    let mut acc = f64::NEG_INFINITY;
    for j in (0..=n).rev() {
        acc = ln_add_exp(acc, ln_binomial_pmf(n, j));
        out[j as usize] = acc;
    }
    // ln Pr[B_n >= 0] is exactly 0.
    out[0] = 0.0;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTailQuery {
    pub x: f64,
    pub sigma: f64,
}

impl GaussianTailQuery {
    pub fn new(x: f64, sigma: f64) -> Result<Self> {
        finite("x", x)?;
        finite("sigma", sigma)?;
        if x < 0.0 {
            return Err(domain("x", x, "[0, inf)"));
        }
        if sigma <= 0.0 {
            return Err(domain("sigma", sigma, "(0, inf)"));
        }
        Ok(Self { x, sigma })
    }

    pub fn standardized(&self) -> f64 {
        self.x / self.sigma
    }
}

/// Lower bound `exp(-x^2 / (2 sigma^2)) / (sqrt(2 pi) x / sigma + 2)` on
/// `Pr[X >= x]` for `X ~ N(0, sigma^2)`. Depends on the query only through
/// `x / sigma`.
pub fn gaussian_tail_lower(q: GaussianTailQuery) -> f64 {
    let r = q.standardized();
    (-0.5 * r * r).exp() / (SQRT_2PI * r + 2.0)
}

/// Exact `Pr[X >= x]` for the same query.
pub fn gaussian_tail_exact(q: GaussianTailQuery) -> f64 {
    crate::special::std_normal_survival(q.standardized()).expect("validated query")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinomialBound {
    /// `sqrt(n) C(n-1, k-1) 2^-n R(x)` with `R` the exact Mill's ratio.
    McKay,
    /// `exp(-n D(k/n || 1/2)) / (exp(1/6) sqrt(2 pi)) R(x)`.
    Stirling,
}

impl BinomialBound {
    pub const ALL: [BinomialBound; 2] = [BinomialBound::McKay, BinomialBound::Stirling];

    pub fn name(self) -> &'static str {
        match self {
            BinomialBound::McKay => "mckay",
            BinomialBound::Stirling => "stirling",
        }
    }
}

/// Threshold query `Pr[B_n >= k]` with `n/2 <= k <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialTailQuery {
    pub n: u64,
    pub k: u64,
}

impl BinomialTailQuery {
    pub fn new(n: u64, k: i64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, "[1, inf)"));
        }
        // real comparison: k >= n/2
        if 2 * k < n as i64 || k > n as i64 {
            return Err(domain("k", k as f64, "[n/2, n]"));
        }
        Ok(Self { n, k: k as u64 })
    }

    /// Standardized threshold `(2k - n) / sqrt(n)`.
    pub fn standardized(&self) -> f64 {
        (2.0 * self.k as f64 - self.n as f64) / (self.n as f64).sqrt()
    }
}

pub fn binomial_tail_lower(n: u64, k: i64, bound: BinomialBound) -> Result<f64> {
    let q = BinomialTailQuery::new(n, k)?;
    let mills = mills_ratio(q.standardized(), MillsMode::Exact)?;
    let nf = n as f64;
    let value = match bound {
        BinomialBound::McKay => {
            // C(n-1, k-1) 2^-n = Pr[B_{n-1} = k-1] / 2
            let ln_coeff = ln_binomial_pmf(n - 1, q.k - 1) - LN_2;
            nf.sqrt() * ln_coeff.exp() * mills
        }
        BinomialBound::Stirling => {
            let x = q.k as f64 / nf - 0.5;
            (-nf * kl_from_half(x) - 1.0 / 6.0).exp() / SQRT_2PI * mills
        }
    };
    Ok(value)
}

/// Lower bound on `Pr[B_n >= n/2 + t - 1]` for real `t` in `[1, n/2 + 1]`:
/// `exp(-1/6) exp(-2 psi(t/n) t^2 / n) / (sqrt(2 pi) 2t / sqrt(n) + 2)`.
///
/// `psi` is only defined on `[-1/2, 1/2]`, but `t / n` exceeds `1/2` for
/// `t > n/2`; there its argument is capped at `1/2`, where `psi` attains its
/// maximum `2 ln 2`. The bound stays below the exact tail (which is `2^-n` in
/// that range).
pub fn binomial_tail_corollary(n: u64, t: f64) -> Result<f64> {
    finite("t", t)?;
    if n == 0 {
        return Err(domain("n", 0.0, "[1, inf)"));
    }
    let nf = n as f64;
    if !(1.0..=0.5 * nf + 1.0).contains(&t) {
        return Err(domain("t", t, "[1, n/2 + 1]"));
    }
    let correction = psi((t / nf).min(0.5))?;
    let value = (-1.0 / 6.0 - 2.0 * correction * t * t / nf).exp() / (SQRT_2PI * 2.0 * t / nf.sqrt() + 2.0);
    Ok(value)
}

/// Integer threshold `ceil(n/2 + t - 1)` whose exact tail the corollary bounds.
pub fn corollary_threshold(n: u64, t: f64) -> i64 {
    (0.5 * n as f64 + t - 1.0).ceil() as i64
}

/// Exact tail together with every applicable lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TailResult {
    pub exact: f64,
    pub bounds: Vec<(&'static str, f64)>,
}

impl TailResult {
    /// Every bound is at most `exact + slack`.
    pub fn dominated(&self, slack: f64) -> bool {
        self.bounds.iter().all(|&(_, b)| b <= self.exact + slack)
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

/// Exact `Pr[B_n >= k]` with both threshold bounds and, when `k >= n/2 + ...`
/// admits a real offset `t = k - n/2 + 1` in range, the corollary bound.
pub fn binomial_tail(n: u64, k: i64) -> Result<TailResult> {
    let q = BinomialTailQuery::new(n, k)?;
    let mut bounds = Vec::with_capacity(3);
    for b in BinomialBound::ALL {
        bounds.push((b.name(), binomial_tail_lower(n, k, b)?));
    }
    let t = q.k as f64 - 0.5 * n as f64 + 1.0;
    if t >= 1.0 {
        bounds.push(("corollary", binomial_tail_corollary(n, t)?));
    }
    Ok(TailResult {
        exact: binomial_tail_exact(n, k),
        bounds,
    })
}

pub fn gaussian_tail(q: GaussianTailQuery) -> TailResult {
    TailResult {
        exact: gaussian_tail_exact(q),
        bounds: alloc::vec![("gaussian_lower", gaussian_tail_lower(q))],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn stirlerr_series_matches_table_boundary() {
        // mpmath: stirlerr(36), stirlerr(81), stirlerr(501)
        let cases = [
            (36, 0.002_314_755_290_514_683_9),
            (81, 0.001_028_801_357_710_777_5),
            (501, 0.000_166_333_976_579_932_71),
        ];
        for (n, want) in cases {
            // absolute error is what enters the log-pmf
            assert!((stirlerr(n) - want).abs() < 1e-16, "n = {n}: {}", stirlerr(n) - want);
        }
    }

    #[test]
    fn exact_tail_examples() {
        assert_eq!(binomial_tail_exact(1, 1), 0.5);
        assert!((binomial_tail_exact(4, 3) - 0.3125).abs() < 1e-15);
        assert!((binomial_tail_exact(2, 1) - 0.75).abs() < 1e-15);
        assert_eq!(binomial_tail_exact(5, 0), 1.0);
        assert_eq!(binomial_tail_exact(5, -3), 1.0);
        assert_eq!(binomial_tail_exact(5, 6), 0.0);
    }

    #[test]
    fn pmf_large_n() {
        // mpmath: log(binomial(10^6, 500500)) - 10^6 log 2
        let got = ln_binomial_pmf(1_000_000, 500_500);
        assert!((got - -7.633_546_464_960_314_5).abs() < 1e-12, "{got}");
    }

    #[test]
    fn threshold_bound_examples() {
        let m = binomial_tail_lower(4, 3, BinomialBound::McKay).unwrap();
        let s = binomial_tail_lower(4, 3, BinomialBound::Stirling).unwrap();
        assert!(rel(m, 0.245_879_828_407_049_43) < 1e-13);
        assert!(rel(s, 0.131_212_588_854_477_11) < 1e-13);
        let s33 = binomial_tail_lower(3, 3, BinomialBound::Stirling).unwrap();
        assert!(rel(s33, 0.019_742_370_227_051_476) < 1e-13);
        assert!(s33 <= 0.125);
        // n/2 <= k is a real comparison
        assert!(binomial_tail_lower(5, 2, BinomialBound::McKay).is_err());
        assert!(binomial_tail_lower(5, 3, BinomialBound::McKay).is_ok());
        assert!(binomial_tail_lower(4, 5, BinomialBound::McKay).is_err());
    }

    #[test]
    fn corollary_examples() {
        let c41 = binomial_tail_corollary(4, 1.0).unwrap();
        assert!(rel(c41, 0.111_306_894_948_252_84) < 1e-13);
        assert!(c41 <= 0.6875);
        let c43 = binomial_tail_corollary(4, 3.0).unwrap();
        assert!(rel(c43, 0.000_173_666_451_801_766_32) < 1e-12);
        assert!(c43 <= 1.0 / 16.0);
        assert!(rel(binomial_tail_corollary(7, 1.0).unwrap(), 0.162_666_730_098_764_08) < 1e-13);
        assert!(rel(binomial_tail_corollary(8, 1.0).unwrap(), 0.174_284_913_596_284_19) < 1e-13);
        assert!(binomial_tail_corollary(7, 1.0).unwrap() <= binomial_tail_exact(7, 4));
        assert!(binomial_tail_corollary(8, 1.0).unwrap() <= binomial_tail_exact(8, 4));
        assert!(binomial_tail_corollary(4, 0.5).is_err());
        assert!(binomial_tail_corollary(4, 3.01).is_err());
        assert_eq!(corollary_threshold(4, 3.0), 4);
        assert_eq!(corollary_threshold(7, 1.5), 4);
    }

    #[test]
    fn gaussian_tail_examples() {
        let q0 = GaussianTailQuery::new(0.0, 1.0).unwrap();
        assert_eq!(gaussian_tail_lower(q0), 0.5);
        assert_eq!(gaussian_tail_exact(q0), 0.5);
        let q1 = GaussianTailQuery::new(1.0, 1.0).unwrap();
        assert!(rel(gaussian_tail_lower(q1), 0.134_586_352_090_975_54) < 1e-14);
        assert!(gaussian_tail_lower(q1) <= gaussian_tail_exact(q1));
        let q2 = GaussianTailQuery::new(2.0, 2.0).unwrap();
        assert_eq!(gaussian_tail_lower(q2), gaussian_tail_lower(q1));
        assert!(GaussianTailQuery::new(-1.0, 1.0).is_err());
        assert!(GaussianTailQuery::new(1.0, 0.0).is_err());
    }

    #[test]
    fn tail_result_collects_bounds() {
        let r = binomial_tail(4, 3).unwrap();
        assert_eq!(r.bounds.len(), 3);
        assert!(r.dominated(1e-12));
        assert!(r.bound("mckay").is_some());
        let r1 = binomial_tail(1, 1).unwrap();
        assert_eq!(r1.exact, 0.5);
    }
}
