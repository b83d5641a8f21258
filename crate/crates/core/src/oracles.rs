//! Reference values for `E[max]`: exact (quadrature for Gaussians, CDF
//! powers for walks) and seeded Monte Carlo.
//!
//! Powers `F^d` are formed as `exp(-exp(ln d + ln(-ln F)))`. When `F` is
//! close to 1, `-ln F` is computed from the survival `S = 1 - F` as
//! `-ln_1p(-S)` (or `S` itself once it is tiny), never from `F`. This is what
//! keeps `d = 1e12` and `d = e^30` accurate.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::extreme::{make_bracket, BoundBracket, EnsembleSize, EnsembleSpec, Tolerance};
use crate::quadrature::integrate_pieces;
use crate::special::{ln_std_normal_survival, std_normal_pdf, std_normal_survival};
use crate::tails::ln_upper_tails;
#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

/// Largest ensemble that [`max_monte_carlo`] will simulate.
pub const MAX_SIMULATED_COUNT: u64 = 1_000_000;

/// `ln(-ln F)` given `ln S` with `S = 1 - F`.
fn ln_neg_ln_from_survival(ln_s: f64) -> f64 {
    if ln_s < -40.0 {
        // -ln(1 - S) = S (1 + S/2 + ...) and S < 5e-18
        ln_s
    } else {
        (-(-ln_s.exp()).ln_1p()).ln()
    }
}

/// `1 - F^d` from `ln(-ln F)`.
fn one_minus_power(ln_d: f64, ln_neg_ln_f: f64) -> f64 {
    -(-(ln_d + ln_neg_ln_f).exp()).exp_m1()
}

/// `F^d` from `ln(-ln F)`.
fn power(ln_d: f64, ln_neg_ln_f: f64) -> f64 {
    (-(ln_d + ln_neg_ln_f).exp()).exp()
}

/// Distribution function of one symmetric random walk `Z` of length `n`,
/// stored on the support `-n, -n + 2, ..., n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkMaxDistribution {
    n: u64,
    /// `ln Pr[Z <= z]`, aligned with [`Self::support`].
    log_cdf: Vec<f64>,
    /// `ln(-ln Pr[Z <= z])`; `-inf` at the top of the support.
    ln_neg_log_cdf: Vec<f64>,
}

impl WalkMaxDistribution {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, "[1, inf)"));
        }
        // upper[j] = ln Pr[B >= j] for B = (Z + n) / 2 ~ B(n, 1/2)
        let upper = ln_upper_tails(n);
        let half = -core::f64::consts::LN_2;
        let len = n as usize + 1;
        let mut log_cdf = Vec::with_capacity(len);
        let mut ln_neg_log_cdf = Vec::with_capacity(len);
        for j in 0..len {
            // Pr[B <= j] = Pr[B >= n - j] by symmetry; its complement is Pr[B >= j + 1].
            let ln_s = upper[j + 1];
            if ln_s == f64::NEG_INFINITY {
                log_cdf.push(0.0);
                ln_neg_log_cdf.push(f64::NEG_INFINITY);
            } else if ln_s < half {
                log_cdf.push((-ln_s.exp()).ln_1p());
                ln_neg_log_cdf.push(ln_neg_ln_from_survival(ln_s));
            } else {
                let ln_f = upper[len - 1 - j];
                log_cdf.push(ln_f);
                ln_neg_log_cdf.push((-ln_f).ln());
            }
        }
        Ok(Self {
            n,
            log_cdf,
            ln_neg_log_cdf,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.n as i64;
        (0..=n).map(move |j| 2 * j - n)
    }

    pub fn log_cdf(&self) -> &[f64] {
        &self.log_cdf
    }

    /// `E[max of d independent copies]`, via
    /// `E[max] = -n + 2 sum_{z < n} Pr[max > z]` on the even lattice.
    pub fn expected_max(&self, d: EnsembleSize) -> f64 {
        let ln_d = d.ln();
        let mut acc = crate::tails::CompensatedSum::default();
        for &l in &self.ln_neg_log_cdf[..self.n as usize] {
            acc.add(one_minus_power(ln_d, l));
        }
        2.0 * acc.value() - self.n as f64
    }

    /// `Pr[max of d copies <= z]` for each support point.
    pub fn max_cdf(&self, d: EnsembleSize) -> Vec<f64> {
        self.ln_neg_log_cdf.iter().map(|&l| power(d.ln(), l)).collect()
    }
}

/// Exact `E[max_i Z_i]` for `d` independent symmetric random walks of length
/// `n`. Real `d` is accepted.
pub fn walk_max_exact(n: u64, d: EnsembleSize) -> Result<f64> {
    Ok(WalkMaxDistribution::new(n)?.expected_max(d))
}

/// Quadrature result for the Gaussian oracle, with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMaxExact {
    pub value: f64,
    /// Estimated quadrature error (scaled by sigma).
    pub quadrature_error: f64,
    /// Analytic bound on the mass dropped outside the integration window
    /// (scaled by sigma).
    pub truncation_bound: f64,
    /// Right end of the integration window; the left end is `-12`.
    pub upper_limit: f64,
}

/// `int_x^inf S(t) dt = phi(x) - x S(x)`
fn integrated_survival(x: f64) -> f64 {
    let v = std_normal_pdf(x).expect("finite") - x * std_normal_survival(x).expect("finite");
    v.max(0.0)
}

const GAUSSIAN_WINDOW: f64 = 12.0;

/// Exact `E[max_i X_i]` for `d` i.i.d. `N(0, sigma^2)`:
/// `sigma (int_0^inf (1 - Phi^d) - int_-inf^0 Phi^d)`.
pub fn gaussian_max_exact_detailed(d: EnsembleSize, sigma: f64) -> Result<GaussianMaxExact> {
    crate::error::finite("sigma", sigma)?;
    if sigma <= 0.0 {
        return Err(domain("sigma", sigma, "(0, inf)"));
    }
    let ln_d = d.ln();
    // Dropped right tail: int_U^inf (1 - Phi^d) <= d int_U^inf S. Widen the
    // window past 12 only when d is so large that this matters.
    let mut upper = GAUSSIAN_WINDOW;
    let mut right_tail = (ln_d + integrated_survival(upper).ln()).exp();
    while right_tail > 1e-13 {
        upper += 4.0;
        right_tail = (ln_d + integrated_survival(upper).ln()).exp();
    }
    let left_tail = integrated_survival(GAUSSIAN_WINDOW);

    let positive = |x: f64| {
        let ln_s = ln_std_normal_survival(x).expect("finite");
        one_minus_power(ln_d, ln_neg_ln_from_survival(ln_s))
    };
    let negative = |x: f64| {
        let ln_phi = ln_std_normal_survival(-x).expect("finite");
        power(ln_d, (-ln_phi).ln())
    };
    let right_breaks: Vec<f64> = (0..=upper as usize).map(|i| i as f64).collect();
    let left_breaks: Vec<f64> = (0..=GAUSSIAN_WINDOW as usize)
        .map(|i| i as f64 - GAUSSIAN_WINDOW)
        .collect();
    let pos = integrate_pieces(&positive, &right_breaks, 1e-12, 1e-14);
    let neg = integrate_pieces(&negative, &left_breaks, 1e-12, 1e-14);
    Ok(GaussianMaxExact {
        value: sigma * (pos.value - neg.value),
        quadrature_error: sigma * (pos.error + neg.error),
        truncation_bound: sigma * (right_tail + left_tail),
        upper_limit: upper,
    })
}

pub fn gaussian_max_exact(d: EnsembleSize, sigma: f64) -> Result<f64> {
    Ok(gaussian_max_exact_detailed(d, sigma)?.value)
}

/// Exact `E[max]` for either family.
pub fn exact_expected_max(spec: &EnsembleSpec) -> Result<f64> {
    match *spec {
        EnsembleSpec::Gaussian { d, sigma } => gaussian_max_exact(d, sigma),
        EnsembleSpec::Walk { d, n } => walk_max_exact(n, d),
    }
}

/// Exact value plus all closed-form bounds for `spec`.
pub fn bracket(spec: EnsembleSpec, tol: Tolerance) -> Result<BoundBracket> {
    make_bracket(spec, exact_expected_max(&spec)?, tol)
}

/// Generator for replicate `index` under `seed`: ChaCha8 keyed by
/// `seed_from_u64(seed)`, on stream `index`. Replicates are therefore
/// independent of evaluation order.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicates)`.
    pub std_error: f64,
    pub replicates: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// `|mean - target|` in units of the standard error; 0 when both the
    /// error and the standard error vanish.
    pub fn gap_in_std_errors(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Welford mean/variance accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, seed: u64) -> MonteCarloEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean: self.mean,
            std_error: (var / self.count as f64).sqrt(),
            replicates: self.count,
            seed,
        }
    }
}

/// Endpoint of one symmetric walk of length `n`.
pub(crate) fn sample_walk<R: RngCore>(rng: &mut R, n: u64) -> i64 {
    let mut ups = 0u64;
    let mut left = n;
    while left >= 64 {
        ups += u64::from(rng.next_u64().count_ones());
        left -= 64;
    }
    if left > 0 {
        ups += u64::from((rng.next_u64() & ((1u64 << left) - 1)).count_ones());
    }
    2 * ups as i64 - n as i64
}

pub(crate) fn check_replicates(replicates: u64) -> Result<()> {
    if replicates < 2 {
        return Err(domain("replicates", replicates as f64, "[2, inf)"));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[max]`; deterministic in `(spec, replicates, seed)`.
pub fn max_monte_carlo(spec: &EnsembleSpec, replicates: u64, seed: u64) -> Result<MonteCarloEstimate> {
    check_replicates(replicates)?;
    let size = spec.size();
    let d = match size.as_integer() {
        Some(d) if d <= MAX_SIMULATED_COUNT => d,
        _ => {
            return Err(Error::NotSimulable {
                d: size.count(),
                max: MAX_SIMULATED_COUNT,
            })
        }
    };
    let mut acc = MeanAccumulator::default();
    for i in 0..replicates {
        let mut rng = replicate_rng(seed, i);
        let sample = match *spec {
            EnsembleSpec::Gaussian { sigma, .. } => {
                let m = (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .fold(f64::NEG_INFINITY, f64::max);
                sigma * m
            }
            EnsembleSpec::Walk { n, .. } => (0..d).map(|_| sample_walk(&mut rng, n)).max().unwrap_or(0) as f64,
        };
        acc.push(sample);
    }
    Ok(acc.finish(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(d: f64) -> EnsembleSize {
        EnsembleSize::new(d).unwrap()
    }

    #[test]
    fn walk_examples() {
        assert!(walk_max_exact(1, size(1.0)).unwrap().abs() < 1e-15);
        assert!((walk_max_exact(1, size(2.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((walk_max_exact(2, size(2.0)).unwrap() - 0.75).abs() < 1e-15);
        assert!(walk_max_exact(0, size(2.0)).is_err());
    }

    #[test]
    fn walk_distribution_shape() {
        let w = WalkMaxDistribution::new(9).unwrap();
        assert_eq!(w.support().count(), 10);
        assert_eq!(w.support().next(), Some(-9));
        assert_eq!(*w.log_cdf().last().unwrap(), 0.0);
        assert!(w.log_cdf().windows(2).all(|p| p[0] <= p[1]));
        let cdf = w.max_cdf(size(3.0));
        assert!((cdf[9] - 1.0).abs() < 1e-15);
        assert!((cdf[0] - (1.0f64 / 512.0).powi(3)).abs() < 1e-20);
    }

    #[test]
    fn gaussian_examples() {
        assert!(gaussian_max_exact(size(1.0), 2.5).unwrap().abs() < 1e-10);
        let two = gaussian_max_exact(size(2.0), 1.0).unwrap();
        assert!((two - 1.0 / core::f64::consts::PI.sqrt()).abs() < 1e-9);
        let three = gaussian_max_exact(size(2.0), 3.0).unwrap();
        assert!((three - 1.692_568_750_643_268_9).abs() < 3e-8);
        let det = gaussian_max_exact_detailed(size(1e12), 1.0).unwrap();
        assert_eq!(det.upper_limit, 12.0);
        assert!(det.truncation_bound < 1e-13);
        assert!(det.quadrature_error < 1e-9);
    }

    #[test]
    fn monte_carlo_basics() {
        let g1 = EnsembleSpec::gaussian(size(1.0), 1.0).unwrap();
        let est = max_monte_carlo(&g1, 10_000, 7).unwrap();
        assert!(est.mean.abs() <= 5.0 * est.std_error);
        assert_eq!(est, max_monte_carlo(&g1, 10_000, 7).unwrap());
        assert_ne!(est, max_monte_carlo(&g1, 10_000, 8).unwrap());

        let big = EnsembleSpec::gaussian(size(2e6), 1.0).unwrap();
        assert!(matches!(max_monte_carlo(&big, 10, 0), Err(Error::NotSimulable { .. })));
        let real = EnsembleSpec::gaussian(size(2.5), 1.0).unwrap();
        assert!(matches!(max_monte_carlo(&real, 10, 0), Err(Error::NotSimulable { .. })));
        assert!(max_monte_carlo(&g1, 1, 0).is_err());
    }

    #[test]
    fn walk_sampler_parity_and_range() {
        let mut rng = replicate_rng(3, 0);
        for n in [1u64, 7, 63, 64, 65, 200] {
            for _ in 0..50 {
                let z = sample_walk(&mut rng, n);
                assert!(z.unsigned_abs() <= n);
                assert_eq!((z + n as i64) % 2, 0);
            }
        }
    }
}
