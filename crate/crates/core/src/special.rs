//! Special functions and elementary analytic ingredients.
//!
//! All functions are pure and total over their documented domains; anything
//! outside the domain is reported as an [`Error`] rather than a NaN.

use core::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

use crate::error::{domain, finite, Error, Result};

/// `1 / sqrt(2 pi)`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `sqrt(2 pi)`
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
/// `sqrt(pi / 2)`
pub const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;
/// `1 / sqrt(pi)`
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    finite("x", x)?;
    Ok(INV_SQRT_2PI * (-0.5 * x * x).exp())
}

/// Upper tail `1 - Phi(x)` of the standard normal, evaluated through the
/// complementary error function so that it keeps full relative precision in
/// the far right tail.
pub fn std_normal_survival(x: f64) -> Result<f64> {
    finite("x", x)?;
    Ok(0.5 * libm::erfc(x * FRAC_1_SQRT_2))
}

/// `ln(1 - Phi(x))`. Stays finite where the survival itself underflows.
pub fn ln_std_normal_survival(x: f64) -> Result<f64> {
    finite("x", x)?;
    if x < 5.0 {
        Ok((0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln())
    } else {
        // 1 - Phi(x) = phi(x) * R(x), with R the Mill's ratio.
        Ok(-0.5 * x * x + INV_SQRT_2PI.ln() + mills_exact(x).ln())
    }
}

/// Scaled complementary error function `exp(t^2) erfc(t)` for `t >= 0`.
fn erfcx(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t < 5.0 {
        libm::erfc(t) * (t * t).exp()
    } else {
        // Continued fraction erfc(t) = exp(-t^2)/sqrt(pi) / (t + (1/2)/(t + 1/(t + (3/2)/(t + ...)))),
        // evaluated bottom-up; 60 levels are far past convergence for t >= 5.
        let mut tail = t;
        for k in (1..=60).rev() {
            tail = t + (0.5 * k as f64) / tail;
        }
        INV_SQRT_PI / tail
    }
}

fn mills_exact(x: f64) -> f64 {
    SQRT_PI_OVER_2 * erfcx(x * FRAC_1_SQRT_2)
}

/// Which Mill's ratio value to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MillsMode {
    /// `(1 - Phi(x)) / phi(x)`.
    Exact,
    /// Boyd's lower bound `pi / ((pi - 1) x + sqrt(x^2 + 2 pi))`.
    Boyd,
    /// The weaker `pi / (pi x + sqrt(2 pi))`.
    BoydSimplified,
}

impl MillsMode {
    pub const ALL: [MillsMode; 3] = [MillsMode::Exact, MillsMode::Boyd, MillsMode::BoydSimplified];
}

/// Mill's ratio of the standard normal at `x >= 0`, or one of its lower bounds.
///
/// For every `x >= 0`: `BoydSimplified <= Boyd <= Exact`, with equality of
/// all three at `x = 0`.
pub fn mills_ratio(x: f64, mode: MillsMode) -> Result<f64> {
    finite("x", x)?;
    if x < 0.0 {
        return Err(domain("x", x, "[0, inf)"));
    }
    Ok(match mode {
        MillsMode::Exact => mills_exact(x),
        MillsMode::Boyd => PI / ((PI - 1.0) * x + (x * x + 2.0 * PI).sqrt()),
        MillsMode::BoydSimplified => PI / (PI * x + SQRT_2PI),
    })
}

/// Robbins' two-sided Stirling bracket around `n!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialBracket {
    pub n: u64,
    /// `sqrt(2 pi n) (n/e)^n`
    pub lower: f64,
    /// `exp(1/12) sqrt(2 pi n) (n/e)^n`
    pub upper: f64,
}

impl FactorialBracket {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn factorial_bounds(n: u64) -> Result<FactorialBracket> {
    if n == 0 {
        return Err(domain("n", 0.0, "[1, inf)"));
    }
    let nf = n as f64;
    let lower = (0.5 * (2.0 * PI * nf).ln() + nf * nf.ln() - nf).exp();
    Ok(FactorialBracket {
        n,
        lower,
        upper: (1.0 / 12.0).exp() * lower,
    })
}

/// `a ln(a / b)` with the convention `0 ln 0 = 0`.
fn xlogy_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / b).ln()
    }
}

/// KL divergence between `Bernoulli(p)` and `Bernoulli(q)`, in nats.
///
/// `q` on the boundary `{0, 1}` is allowed only when `p == q`; otherwise the
/// divergence is infinite and [`Error::InfiniteDivergence`] is returned.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    finite("p", p)?;
    finite("q", q)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "[0, 1]"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(domain("q", q, "[0, 1]"));
    }
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Err(Error::InfiniteDivergence { p, q });
    }
    let d = xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q);
    Ok(d.max(0.0))
}

/// `D(1/2 + x || 1/2)` written with `log1p` so that it stays accurate for
/// small `|x|`.
pub(crate) fn kl_from_half(x: f64) -> f64 {
    let up = if x == -0.5 { 0.0 } else { (0.5 + x) * (2.0 * x).ln_1p() };
    let down = if x == 0.5 { 0.0 } else { (0.5 - x) * (-2.0 * x).ln_1p() };
    (up + down).max(0.0)
}

/// Below this `|x|` the series branch of [`psi`] is used.
pub const PSI_SERIES_CUTOFF: f64 = 1e-3;

/// Ratio `D(1/2 + x || 1/2) / (2 x^2)` between the KL exponent of a fair coin
/// and its quadratic approximation; `psi(0) = 1` by continuity.
///
/// Even, increasing in `|x|`, with range `[1, 2 ln 2]` on `[-1/2, 1/2]`.
pub fn psi(x: f64) -> Result<f64> {
    finite("x", x)?;
    if x.abs() > 0.5 {
        return Err(domain("x", x, "[-1/2, 1/2]"));
    }
    if x.abs() < PSI_SERIES_CUTOFF {
        // sum_{k>=1} (4x^2)^(k-1) / (k (2k - 1))
        let u = x * x;
        return Ok(1.0 + u * (2.0 / 3.0 + u * (16.0 / 15.0 + u * (64.0 / 28.0))));
    }
    if x.abs() == 0.5 {
        return Ok(2.0 * LN_2);
    }
    Ok(kl_from_half(x) / (2.0 * x * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubGaussianKind {
    /// Fair `+-1` variable, variance proxy 1.
    Rademacher,
    /// `N(0, sigma^2)`, variance proxy `sigma^2`.
    Gaussian,
}

/// `exp(sigma^2 s^2 / 2) - E[exp(s X)]`: non-negative exactly when `X` obeys
/// the sub-Gaussian MGF condition at `s`.
///
/// The Rademacher MGF is `cosh(s)` and `sigma` is ignored. The Gaussian MGF is
/// obtained by integrating `phi(z) exp(s sigma z)` numerically, so the margin
/// is a genuine check rather than an identity; it is zero up to quadrature
/// error.
pub fn sub_gaussian_mgf_margin(kind: SubGaussianKind, s: f64, sigma: f64) -> Result<f64> {
    finite("s", s)?;
    match kind {
        SubGaussianKind::Rademacher => Ok((0.5 * s * s).exp() - s.cosh()),
        SubGaussianKind::Gaussian => {
            finite("sigma", sigma)?;
            if sigma <= 0.0 {
                return Err(domain("sigma", sigma, "(0, inf)"));
            }
            let log_envelope = 0.5 * sigma * sigma * s * s;
            if log_envelope > 700.0 {
                return Err(domain("s * sigma", s * sigma, "|s sigma| <= 37 (MGF overflows)"));
            }
            let envelope = log_envelope.exp();
            // The integrand peaks at z = s sigma; integrate +-40 around it,
            // divided by the envelope so nothing overflows.
            let centre = s * sigma;
            let scaled = |z: f64| (-0.5 * z * z + centre * z - log_envelope).exp() * INV_SQRT_2PI;
            let ratio = crate::quadrature::integrate(scaled, centre - 40.0, centre + 40.0, 1e-15, 1e-14).value;
            Ok(envelope * (1.0 - ratio))
        }
    }
}
