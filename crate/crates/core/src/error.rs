use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("KL divergence D({p} || {q}) is infinite")]
    InfiniteDivergence { p: f64, q: f64 },

    /// The inputs are valid numbers but a theorem hypothesis does not hold.
    #[error("out of theorem scope: {0}")]
    Hypothesis(Hypothesis),

    #[error("shape mismatch: {0}")]
    Shape(&'static str),

    /// Monte Carlo needs an integer ensemble no larger than the simulation cap.
    #[error("ensemble size {d} cannot be simulated (integer d <= {max} required); use the exact oracle")]
    NotSimulable { d: f64, max: u64 },
}

/// Hypotheses carried by the closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Hypothesis {
    #[error("ensemble size d must be at least 2")]
    CountAtLeastTwo,
    #[error("walk length n must be at least 7")]
    LengthAtLeastSeven,
    #[error("ensemble size must satisfy d <= exp(n/3)")]
    CountAtMostExpThird,
    #[error("psi argument 1.6 sqrt(ln d) / (2 sqrt(n)) must lie in [0, 1/2]")]
    PsiArgument,
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain { name, value, domain }
}
