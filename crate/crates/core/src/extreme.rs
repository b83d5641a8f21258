//! Closed-form bounds on the expected maximum of `d` i.i.d. variables.
//!
//! Lower bounds carry explicit hypotheses (`d >= 2`; for walks also `n >= 7`
//! and `d <= exp(n/3)`). Violations are reported as [`Error::Hypothesis`]
//! rather than extrapolated. Lower bounds can be negative; they are returned
//! unclamped.
//!
//! Ensemble sizes only enter through `ln d` and `ln ln d`, so [`EnsembleSize`]
//! stores the logarithm and can represent sizes such as `e^30` exactly.

use core::f64::consts::FRAC_2_PI;

use crate::error::{domain, finite, Error, Hypothesis, Result};
use crate::special::{psi, SQRT_2PI};
#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

/// Number `d >= 1` of i.i.d. variables, kept together with `ln d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSize {
    count: f64,
    ln: f64,
}

impl EnsembleSize {
    pub fn new(d: f64) -> Result<Self> {
        finite("d", d)?;
        if d < 1.0 {
            return Err(domain("d", d, "[1, inf)"));
        }
        Ok(Self { count: d, ln: d.ln() })
    }

    /// `d = exp(ln_d)`; `count()` may be `+inf` when `ln_d > 709`.
    pub fn from_ln(ln_d: f64) -> Result<Self> {
        finite("ln d", ln_d)?;
        if ln_d < 0.0 {
            return Err(domain("ln d", ln_d, "[0, inf)"));
        }
        Ok(Self {
            count: ln_d.exp(),
            ln: ln_d,
        })
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    /// The size as an integer, when it is one (and fits in 2^53).
    pub fn as_integer(&self) -> Option<u64> {
        let d = self.count;
        (d.is_finite() && d.fract() == 0.0 && d <= 9_007_199_254_740_992.0).then_some(d as u64)
    }

    fn at_least_two(&self) -> bool {
        self.count >= 2.0
    }
}

impl TryFrom<f64> for EnsembleSize {
    type Error = Error;
    fn try_from(d: f64) -> Result<Self> {
        Self::new(d)
    }
}

impl TryFrom<u64> for EnsembleSize {
    type Error = Error;
    fn try_from(d: u64) -> Result<Self> {
        Self::new(d as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gaussian,
    Walk,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Walk => "walk",
        }
    }
}

/// A maximum-of-i.i.d. problem: `d` copies of `N(0, sigma^2)` or `d`
/// independent symmetric random walks of length `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    Gaussian { d: EnsembleSize, sigma: f64 },
    Walk { d: EnsembleSize, n: u64 },
}

impl EnsembleSpec {
    pub fn gaussian(d: EnsembleSize, sigma: f64) -> Result<Self> {
        finite("sigma", sigma)?;
        if sigma <= 0.0 {
            return Err(domain("sigma", sigma, "(0, inf)"));
        }
        Ok(Self::Gaussian { d, sigma })
    }

    pub fn walk(d: EnsembleSize, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, "[1, inf)"));
        }
        Ok(Self::Walk { d, n })
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Gaussian { .. } => Family::Gaussian,
            Self::Walk { .. } => Family::Walk,
        }
    }

    pub fn size(&self) -> EnsembleSize {
        match *self {
            Self::Gaussian { d, .. } | Self::Walk { d, .. } => d,
        }
    }

    /// Variance of a single member: `sigma^2` or `n`.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma, .. } => sigma * sigma,
            Self::Walk { n, .. } => n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundForm {
    Primary,
    Simplified,
}

/// `E[max_i X_i] <= sqrt(variance) sqrt(2 ln d)` for `d` variables that are
/// each sub-Gaussian with the given variance proxy.
pub fn subgaussian_max_upper(d: EnsembleSize, variance: f64) -> Result<f64> {
    finite("variance", variance)?;
    if variance < 0.0 {
        return Err(domain("variance", variance, "[0, inf)"));
    }
    Ok(variance.sqrt() * (2.0 * d.ln()).sqrt())
}

/// `f(d) = sqrt(2 - 2 ln ln d / ln d)`. Decreasing on `(1, e^e]`, increasing
/// afterwards, tending to `sqrt(2)`.
pub fn threshold_f(d: EnsembleSize) -> Result<f64> {
    if !d.at_least_two() {
        return Err(Error::Hypothesis(Hypothesis::CountAtLeastTwo));
    }
    let l = d.ln();
    Ok((2.0 - 2.0 * l.ln() / l).sqrt())
}

/// Thresholds defining the "some variable is large" events behind the lower
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstants {
    pub f: f64,
    /// `C(d) = f(d)`; within `[1.1243, 1.75]` for `d >= 2`.
    pub c_gaussian: f64,
    /// `C(d, n) = f(d) / sqrt(psi(psi_arg))`; within `[0.95, 1.6]` when `n >= ln d`.
    pub c_walk: Option<f64>,
    /// `1.6 sqrt(ln d) / (2 sqrt(n))`.
    pub psi_arg: Option<f64>,
}

fn walk_psi_arg(n: u64, d: EnsembleSize) -> f64 {
    1.6 * d.ln().sqrt() / (2.0 * (n as f64).sqrt())
}

pub fn threshold_constants(spec: &EnsembleSpec) -> Result<ThresholdConstants> {
    let f = threshold_f(spec.size())?;
    let (c_walk, psi_arg) = match *spec {
        EnsembleSpec::Gaussian { .. } => (None, None),
        EnsembleSpec::Walk { d, n } => {
            let arg = walk_psi_arg(n, d);
            if arg > 0.5 {
                return Err(Error::Hypothesis(Hypothesis::PsiArgument));
            }
            (Some(f / psi(arg)?.sqrt()), Some(arg))
        }
    };
    Ok(ThresholdConstants {
        f,
        c_gaussian: f,
        c_walk,
        psi_arg,
    })
}

/// Lower bound on `E[max]` of `d >= 2` i.i.d. `N(0, sigma^2)` variables.
///
/// Primary: `sigma (1 - exp(-sqrt(ln d)/6.35)) (sqrt(2 ln d - 2 ln ln d) + sqrt(2/pi)) - sqrt(2/pi) sigma`.
/// Simplified: `0.13 sigma sqrt(ln d) - 0.7 sigma`.
pub fn gaussian_max_lower(d: EnsembleSize, sigma: f64, form: BoundForm) -> Result<f64> {
    finite("sigma", sigma)?;
    if sigma <= 0.0 {
        return Err(domain("sigma", sigma, "(0, inf)"));
    }
    if !d.at_least_two() {
        return Err(Error::Hypothesis(Hypothesis::CountAtLeastTwo));
    }
    let l = d.ln();
    Ok(match form {
        BoundForm::Primary => {
            let root_2_over_pi = FRAC_2_PI.sqrt();
            let hit = -(-l.sqrt() / 6.35).exp_m1();
            sigma * hit * ((2.0 * l - 2.0 * l.ln()).sqrt() + root_2_over_pi) - root_2_over_pi * sigma
        }
        BoundForm::Simplified => 0.13 * sigma * l.sqrt() - 0.7 * sigma,
    })
}

/// Checks `n >= 7` and `2 <= d <= exp(n/3)`.
pub fn walk_hypotheses(n: u64, d: EnsembleSize) -> Result<()> {
    if n < 7 {
        return Err(Error::Hypothesis(Hypothesis::LengthAtLeastSeven));
    }
    if !d.at_least_two() {
        return Err(Error::Hypothesis(Hypothesis::CountAtLeastTwo));
    }
    if d.ln() > n as f64 / 3.0 {
        return Err(Error::Hypothesis(Hypothesis::CountAtMostExpThird));
    }
    Ok(())
}

/// Shared factor `(1 - exp(-sqrt(ln d) / (3.1 sqrt(2 pi)))) / sqrt(psi(1.6 sqrt(ln d) / (2 sqrt n)))`.
fn walk_leading_factor(n: u64, d: EnsembleSize) -> Result<f64> {
    let l = d.ln();
    let hit = -(-l.sqrt() / (3.1 * SQRT_2PI)).exp_m1();
    Ok(hit / psi(walk_psi_arg(n, d))?.sqrt())
}

/// Lower bound on `E[max]` of `d` independent symmetric random walks of
/// length `n`, for `n >= 7` and `2 <= d <= exp(n/3)`.
///
/// Primary: `factor * sqrt(n) (sqrt(2 ln d - 2 ln ln d) - 1) - sqrt(n)`.
/// Simplified: `0.09 sqrt(n ln d) - 2 sqrt(n)`.
pub fn walk_max_lower(n: u64, d: EnsembleSize, form: BoundForm) -> Result<f64> {
    walk_hypotheses(n, d)?;
    let l = d.ln();
    let root_n = (n as f64).sqrt();
    Ok(match form {
        BoundForm::Primary => walk_leading_factor(n, d)? * root_n * ((2.0 * l - 2.0 * l.ln()).sqrt() - 1.0) - root_n,
        BoundForm::Simplified => 0.09 * (n as f64 * l).sqrt() - 2.0 * root_n,
    })
}

/// Minimax regret lower bound for `n` rounds and `d` experts, written out
/// directly with the `sqrt(n)/2` scaling. Numerically equal to half of
/// [`walk_max_lower`] in primary form.
pub fn regret_lower_bound(n: u64, d: EnsembleSize) -> Result<f64> {
    walk_hypotheses(n, d)?;
    let l = d.ln();
    let half_root_n = (n as f64).sqrt() / 2.0;
    Ok(walk_leading_factor(n, d)? * half_root_n * ((2.0 * l - 2.0 * l.ln()).sqrt() - 1.0) - half_root_n)
}

/// `sqrt((n/2) ln d)`, the regret achievable by a learner tuned for horizon `n`.
pub fn regret_upper_bound(n: u64, d: EnsembleSize) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", 0.0, "[1, inf)"));
    }
    Ok((0.5 * n as f64 * d.ln()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn experts_regret_bounds(n: u64, d: EnsembleSize) -> Result<RegretBounds> {
    Ok(RegretBounds {
        lower: regret_lower_bound(n, d)?,
        upper: regret_upper_bound(n, d)?,
    })
}

/// Slack used when comparing bounds with exact values:
/// `lower <= exact + max(abs, rel |exact|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-6 }
    }
}

impl Tolerance {
    pub fn slack(&self, exact: f64) -> f64 {
        self.abs.max(self.rel * exact.abs())
    }

    /// `lower <= exact` within slack.
    pub fn below(&self, lower: f64, exact: f64) -> bool {
        lower <= exact + self.slack(exact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketStatus {
    Pass,
    /// A bracket inequality is violated beyond tolerance.
    Fail,
    /// All inequalities hold but every lower bound is negative.
    Vacuous,
    /// The lower-bound hypotheses do not hold; only `exact <= upper` was checked.
    OutOfScope,
}

impl BracketStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BracketStatus::Pass => "pass",
            BracketStatus::Fail => "fail",
            BracketStatus::Vacuous => "vacuous",
            BracketStatus::OutOfScope => "out_of_scope",
        }
    }
}

/// Lower bounds, exact value and upper bound for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBracket {
    pub spec: EnsembleSpec,
    pub lower_primary: Option<f64>,
    pub lower_simplified: Option<f64>,
    pub exact: f64,
    pub upper: f64,
    /// Why the lower bounds are absent.
    pub out_of_scope: Option<Hypothesis>,
    pub lower_violated: bool,
    pub upper_violated: bool,
}

impl BoundBracket {
    /// Recompute the violation flags, e.g. after editing a bound.
    pub fn evaluate(&mut self, tol: Tolerance) {
        self.lower_violated = [self.lower_primary, self.lower_simplified]
            .into_iter()
            .flatten()
            .any(|l| !tol.below(l, self.exact));
        self.upper_violated = !tol.below(self.exact, self.upper);
    }

    pub fn status(&self) -> BracketStatus {
        if self.lower_violated || self.upper_violated {
            BracketStatus::Fail
        } else if self.out_of_scope.is_some() {
            BracketStatus::OutOfScope
        } else if [self.lower_primary, self.lower_simplified]
            .into_iter()
            .flatten()
            .all(|l| l < 0.0)
        {
            BracketStatus::Vacuous
        } else {
            BracketStatus::Pass
        }
    }
}

/// Assemble a bracket around an exact value computed for the same `spec`.
pub fn make_bracket(spec: EnsembleSpec, exact: f64, tol: Tolerance) -> Result<BoundBracket> {
    finite("exact", exact)?;
    let lowers = match spec {
        EnsembleSpec::Gaussian { d, sigma } => gaussian_max_lower(d, sigma, BoundForm::Primary)
            .and_then(|p| Ok((p, gaussian_max_lower(d, sigma, BoundForm::Simplified)?))),
        EnsembleSpec::Walk { d, n } => {
            walk_max_lower(n, d, BoundForm::Primary).and_then(|p| Ok((p, walk_max_lower(n, d, BoundForm::Simplified)?)))
        }
    };
    let (lower_primary, lower_simplified, out_of_scope) = match lowers {
        Ok((p, s)) => (Some(p), Some(s), None),
        Err(Error::Hypothesis(h)) => (None, None, Some(h)),
        Err(e) => return Err(e),
    };
    let mut bracket = BoundBracket {
        spec,
        lower_primary,
        lower_simplified,
        exact,
        upper: subgaussian_max_upper(spec.size(), spec.variance())?,
        out_of_scope,
        lower_violated: false,
        upper_violated: false,
    };
    bracket.evaluate(tol);
    Ok(bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    fn size(d: f64) -> EnsembleSize {
        EnsembleSize::new(d).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn upper_examples() {
        assert_eq!(subgaussian_max_upper(size(1.0), 4.0).unwrap(), 0.0);
        assert!(rel(subgaussian_max_upper(size(2.0), 1.0).unwrap(), 1.177_410_022_515_474_7) < 1e-15);
        assert!(rel(subgaussian_max_upper(size(2.0), 4.0).unwrap(), 2.354_820_045_030_949_4) < 1e-15);
        assert!(EnsembleSize::new(0.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let g2 = threshold_constants(&EnsembleSpec::gaussian(size(2.0), 1.0).unwrap()).unwrap();
        assert!(rel(g2.c_gaussian, 1.748_580_208_594_903_2) < 1e-14);
        assert!(g2.c_gaussian <= 1.75);
        let gee =
            threshold_constants(&EnsembleSpec::gaussian(EnsembleSize::from_ln(E).unwrap(), 1.0).unwrap()).unwrap();
        assert!(rel(gee.c_gaussian, 1.124_384_772_956_800_3) < 1e-14);
        assert!(gee.c_gaussian >= 1.1243);
        let w = threshold_constants(&EnsembleSpec::walk(size(8.0), 100).unwrap()).unwrap();
        let c = w.c_walk.unwrap();
        assert!(rel(c, 1.133_236_718_531_092_9) < 1e-13);
        assert!((0.95..=1.6).contains(&c));
        assert!(matches!(
            threshold_constants(&EnsembleSpec::gaussian(size(1.5), 1.0).unwrap()),
            Err(Error::Hypothesis(Hypothesis::CountAtLeastTwo))
        ));
    }

    #[test]
    fn gaussian_lower_examples() {
        let s = gaussian_max_lower(size(2.0), 1.0, BoundForm::Simplified).unwrap();
        assert!(rel(s, -0.591_767_900_549_499_29) < 1e-14);
        let p = gaussian_max_lower(size(1e6), 1.0, BoundForm::Primary).unwrap();
        assert!(rel(p, 1.651_742_562_799_885) < 1e-13);
        assert!((p - 1.6515).abs() < 1e-3);
        for form in [BoundForm::Primary, BoundForm::Simplified] {
            for d in [2.0, 57.0, 1e9] {
                let one = gaussian_max_lower(size(d), 1.0, form).unwrap();
                let three = gaussian_max_lower(size(d), 3.0, form).unwrap();
                assert!((three - 3.0 * one).abs() <= 1e-14 * three.abs().max(1.0));
            }
        }
        assert!(gaussian_max_lower(size(1.9), 1.0, BoundForm::Primary).is_err());
    }

    #[test]
    fn walk_lower_examples() {
        let s = walk_max_lower(100, size(8.0), BoundForm::Simplified).unwrap();
        assert!(rel(s, -18.702_175_802_059_205) < 1e-14);
        let big = EnsembleSize::from_ln(30.0).unwrap();
        let p = walk_max_lower(90, big, BoundForm::Primary).unwrap();
        assert!(rel(p, 17.579_680_462_449_362) < 1e-13);
        let t = threshold_constants(&EnsembleSpec::walk(big, 90).unwrap()).unwrap();
        assert!((t.psi_arg.unwrap() - 0.461_880_215_351_700_61).abs() < 1e-15);
        assert_eq!(
            walk_max_lower(7, size(1.5), BoundForm::Primary),
            Err(Error::Hypothesis(Hypothesis::CountAtLeastTwo))
        );
        assert_eq!(
            walk_max_lower(6, size(2.0), BoundForm::Primary),
            Err(Error::Hypothesis(Hypothesis::LengthAtLeastSeven))
        );
        assert_eq!(
            walk_max_lower(9, size(21.0), BoundForm::Primary),
            Err(Error::Hypothesis(Hypothesis::CountAtMostExpThird))
        );
    }

    #[test]
    fn regret_examples() {
        let u = regret_upper_bound(100, size(10.0)).unwrap();
        assert!(rel(u, 10.729_830_131_446_736) < 1e-14);
        let big = EnsembleSize::from_ln(30.0).unwrap();
        let b = experts_regret_bounds(90, big).unwrap();
        assert!((b.lower - 8.79).abs() < 0.01);
        assert!(b.lower <= b.upper);
        let half = walk_max_lower(90, big, BoundForm::Primary).unwrap() / 2.0;
        assert!((b.lower - half).abs() <= 4.0 * f64::EPSILON * half.abs());
    }

    #[test]
    fn bracket_assembly() {
        let g = EnsembleSpec::gaussian(size(2.0), 1.0).unwrap();
        let b = make_bracket(g, 0.5642, Tolerance::default()).unwrap();
        assert!((b.upper - 1.1774).abs() < 1e-4);
        assert!(b.lower_primary.unwrap() < 0.0 && b.lower_simplified.unwrap() < 0.0);
        assert_eq!(b.status(), BracketStatus::Vacuous);

        let w = EnsembleSpec::walk(size(2.0), 2).unwrap();
        let b = make_bracket(w, 0.75, Tolerance::default()).unwrap();
        assert_eq!(b.lower_primary, None);
        assert_eq!(b.out_of_scope, Some(Hypothesis::LengthAtLeastSeven));
        assert_eq!(b.status(), BracketStatus::OutOfScope);

        let big = EnsembleSpec::walk(EnsembleSize::from_ln(30.0).unwrap(), 90).unwrap();
        let b = make_bracket(big, 40.0, Tolerance::default()).unwrap();
        assert!((b.lower_primary.unwrap() - 17.58).abs() < 0.01);
        assert!((b.upper - 73.48).abs() < 0.01);
        assert_eq!(b.status(), BracketStatus::Pass);

        let mut bad = make_bracket(big, 10.0, Tolerance::default()).unwrap();
        assert_eq!(bad.status(), BracketStatus::Fail);
        bad.exact = 100.0;
        bad.evaluate(Tolerance::default());
        assert!(bad.upper_violated);
    }
}
