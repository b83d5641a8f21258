//! Prediction with expert advice under full-information feedback: loss
//! matrices, the exponential-weights learner, and regret.
//!
//! Under i.i.d. fair-coin losses every learner's expected loss per round is
//! exactly 1/2, so the expected regret equals `n/2 - E[min_i L_i]`, which is
//! half the expected maximum of `d` independent walks `Z_i = n - 2 L_i`.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{domain, finite, Error, Result};
use crate::extreme::{regret_upper_bound, EnsembleSize};
use crate::oracles::{check_replicates, replicate_rng, MeanAccumulator, MonteCarloEstimate};
#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

/// `n x d` losses in `[0, 1]`, row-major (one row per round).
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    rounds: usize,
    actions: usize,
    losses: Vec<f64>,
}

impl LossMatrix {
    pub fn new(rounds: usize, actions: usize, losses: Vec<f64>) -> Result<Self> {
        if rounds == 0 || actions == 0 {
            return Err(Error::Shape("loss matrix needs at least one round and one action"));
        }
        if losses.len() != rounds * actions {
            return Err(Error::Shape("loss count differs from rounds * actions"));
        }
        for &l in &losses {
            finite("loss", l)?;
            if !(0.0..=1.0).contains(&l) {
                return Err(domain("loss", l, "[0, 1]"));
            }
        }
        Ok(Self {
            rounds,
            actions,
            losses,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let actions = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != actions) {
            return Err(Error::Shape("rows have different lengths"));
        }
        let flat = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), actions, flat)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.losses[t * self.actions..(t + 1) * self.actions]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.losses.chunks_exact(self.actions)
    }

    /// Cumulative loss of each action over all rounds.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.actions];
        for row in self.rows() {
            for (s, &l) in sums.iter_mut().zip(row) {
                *s += l;
            }
        }
        sums
    }

    pub fn entries(&self) -> &[f64] {
        &self.losses
    }
}

fn fill_random_losses<R: RngCore>(rng: &mut R, n: usize, d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * d);
    let mut bits = 0u64;
    let mut left = 0u32;
    for _ in 0..n * d {
        if left == 0 {
            bits = rng.next_u64();
            left = 64;
        }
        out.push((bits & 1) as f64);
        bits >>= 1;
        left -= 1;
    }
    out
}

/// i.i.d. fair-coin losses in `{0, 1}`; deterministic per seed.
pub fn sample_random_losses(n: usize, d: usize, seed: u64) -> Result<LossMatrix> {
    let mut rng = replicate_rng(seed, 0);
    let losses = fill_random_losses(&mut rng, n, d);
    LossMatrix::new(n, d, losses)
}

/// Action distributions played by a learner, one row per round.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerTrace {
    rounds: usize,
    actions: usize,
    distributions: Vec<f64>,
    sampled_actions: Option<Vec<usize>>,
    eta: f64,
}

impl LearnerTrace {
    pub fn distribution(&self, t: usize) -> &[f64] {
        &self.distributions[t * self.actions..(t + 1) * self.actions]
    }

    pub fn distributions(&self) -> impl Iterator<Item = &[f64]> {
        self.distributions.chunks_exact(self.actions)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn sampled_actions(&self) -> Option<&[usize]> {
        self.sampled_actions.as_deref()
    }

    /// Draw `I_t` from each round's distribution.
    pub fn with_sampled_actions(mut self, seed: u64) -> Self {
        let mut rng = replicate_rng(seed, 0);
        let actions = self
            .distributions()
            .map(|p| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, &w) in p.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return i;
                    }
                }
                p.len() - 1
            })
            .collect();
        self.sampled_actions = Some(actions);
        self
    }
}

/// Exponential weights: the distribution at round `t` is proportional to
/// `exp(-eta * L_{t-1,i})` where `L_{t-1,i}` is the loss of action `i` over
/// rounds before `t`. Round 1 is uniform.
pub fn hedge_run(losses: &LossMatrix, eta: f64) -> Result<LearnerTrace> {
    finite("eta", eta)?;
    if eta <= 0.0 {
        return Err(domain("eta", eta, "(0, inf)"));
    }
    let d = losses.actions();
    let mut cumulative = alloc::vec![0.0; d];
    let mut distributions = Vec::with_capacity(losses.rounds() * d);
    let mut weights = alloc::vec![0.0; d];
    for row in losses.rows() {
        // log-weights -eta L, shifted by their maximum before exponentiating
        let best = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (w, &l) in weights.iter_mut().zip(&cumulative) {
            *w = (-eta * (l - best)).exp();
            total += *w;
        }
        distributions.extend(weights.iter().map(|w| w / total));
        for (c, &l) in cumulative.iter_mut().zip(row) {
            *c += l;
        }
    }
    Ok(LearnerTrace {
        rounds: losses.rounds(),
        actions: d,
        distributions,
        sampled_actions: None,
        eta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegretMode {
    /// Learner loss `sum_t <p_t, l_t>` (pseudo-regret).
    ExpectedLoss,
    /// Learner loss `sum_t l_{t, I_t}` of the sampled actions.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretSummary {
    pub algorithm_loss: f64,
    pub best_action_loss: f64,
    pub regret: f64,
    pub mode: RegretMode,
}

pub fn regret_summary(losses: &LossMatrix, trace: &LearnerTrace, mode: RegretMode) -> Result<RegretSummary> {
    if trace.rounds != losses.rounds() || trace.actions != losses.actions() {
        return Err(Error::Shape("trace does not match the loss matrix"));
    }
    let algorithm_loss = match mode {
        RegretMode::ExpectedLoss => losses
            .rows()
            .zip(trace.distributions())
            .map(|(l, p)| l.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
            .sum(),
        RegretMode::Sampled => {
            let picks = trace
                .sampled_actions()
                .ok_or(Error::Shape("sampled mode needs sampled actions"))?;
            losses.rows().zip(picks).map(|(l, &i)| l[i]).sum()
        }
    };
    let best_action_loss = losses.column_sums().into_iter().fold(f64::INFINITY, f64::min);
    Ok(RegretSummary {
        algorithm_loss,
        best_action_loss,
        regret: algorithm_loss - best_action_loss,
        mode,
    })
}

/// `sqrt(8 ln d / n)`, the horizon-tuned rate for which exponential weights
/// has regret at most `sqrt((n/2) ln d)` on every loss sequence.
pub fn default_eta(n: u64, d: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", 0.0, "[1, inf)"));
    }
    if d < 2 {
        return Err(domain("d", d as f64, "[2, inf)"));
    }
    Ok((8.0 * (d as f64).ln() / n as f64).sqrt())
}

/// Monte Carlo regret of exponential weights against random fair-coin losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretEstimate {
    pub estimate: MonteCarloEstimate,
    pub eta: f64,
    /// `sqrt((n/2) ln d)`.
    pub guarantee: f64,
    pub max_regret: f64,
    /// Replicates whose expected-loss regret exceeded `guarantee + 1e-9`.
    pub guarantee_violations: u64,
}

impl RegretEstimate {
    pub fn guarantee_held(&self) -> bool {
        self.guarantee_violations == 0
    }
}

/// Mean expected-loss regret of [`hedge_run`] over independent random loss
/// matrices; replicate `i` draws its matrix from stream `i` of `seed`.
pub fn estimate_expected_regret(n: usize, d: usize, eta: f64, replicates: u64, seed: u64) -> Result<RegretEstimate> {
    check_replicates(replicates)?;
    if n == 0 || d == 0 {
        return Err(Error::Shape("need at least one round and one action"));
    }
    let guarantee = regret_upper_bound(n as u64, EnsembleSize::new(d as f64)?)?;
    let mut acc = MeanAccumulator::default();
    let mut max_regret = f64::NEG_INFINITY;
    let mut violations = 0;
    for i in 0..replicates {
        let mut rng = replicate_rng(seed, i);
        let losses = LossMatrix::new(n, d, fill_random_losses(&mut rng, n, d))?;
        let trace = hedge_run(&losses, eta)?;
        let regret = regret_summary(&losses, &trace, RegretMode::ExpectedLoss)?.regret;
        if regret > guarantee + 1e-9 {
            violations += 1;
        }
        max_regret = max_regret.max(regret);
        acc.push(regret);
    }
    Ok(RegretEstimate {
        estimate: acc.finish(seed),
        eta,
        guarantee,
        max_regret,
        guarantee_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_losses_are_bits_and_deterministic() {
        let m = sample_random_losses(10_000, 10, 42).unwrap();
        assert!(m.entries().iter().all(|&l| l == 0.0 || l == 1.0));
        let mean = m.entries().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.015);
        assert_eq!(m, sample_random_losses(10_000, 10, 42).unwrap());
        assert_ne!(m, sample_random_losses(10_000, 10, 43).unwrap());
    }

    #[test]
    fn hedge_hand_examples() {
        let zeros = LossMatrix::new(5, 3, vec![0.0; 15]).unwrap();
        let t = hedge_run(&zeros, 0.7).unwrap();
        assert!(t
            .distributions()
            .all(|p| p.iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15)));
        for mode in [RegretMode::ExpectedLoss, RegretMode::Sampled] {
            let t = hedge_run(&zeros, 0.7).unwrap().with_sampled_actions(1);
            assert_eq!(regret_summary(&zeros, &t, mode).unwrap().regret, 0.0);
        }

        let one = LossMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let t = hedge_run(&one, 3.0).unwrap();
        assert_eq!(t.distribution(0), &[0.5, 0.5]);
        assert_eq!(regret_summary(&one, &t, RegretMode::ExpectedLoss).unwrap().regret, 0.5);

        let two = LossMatrix::from_rows(&[[0.0, 1.0], [0.0, 1.0]]).unwrap();
        let t = hedge_run(&two, core::f64::consts::LN_2).unwrap();
        assert!((t.distribution(1)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.distribution(1)[1] - 1.0 / 3.0).abs() < 1e-15);
        let s = regret_summary(&two, &t, RegretMode::ExpectedLoss).unwrap();
        assert!((s.regret - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.best_action_loss, 0.0);
    }

    #[test]
    fn single_action_has_no_regret() {
        let m = sample_random_losses(30, 1, 5).unwrap();
        let t = hedge_run(&m, 1.0).unwrap();
        assert_eq!(regret_summary(&m, &t, RegretMode::ExpectedLoss).unwrap().regret, 0.0);
        let e = estimate_expected_regret(30, 1, 1.0, 50, 2).unwrap();
        assert_eq!(e.estimate.mean, 0.0);
        assert_eq!(e.estimate.std_error, 0.0);
    }

    #[test]
    fn errors() {
        assert!(LossMatrix::new(2, 2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(LossMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(LossMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0]]).is_err());
        let m = sample_random_losses(3, 2, 0).unwrap();
        assert!(hedge_run(&m, f64::NAN).is_err());
        assert!(hedge_run(&m, 0.0).is_err());
        let t = hedge_run(&m, 1.0).unwrap();
        assert!(regret_summary(&m, &t, RegretMode::Sampled).is_err());
        let other = sample_random_losses(4, 2, 0).unwrap();
        assert!(regret_summary(&other, &t, RegretMode::ExpectedLoss).is_err());
        assert!(default_eta(10, 1).is_err());
    }

    #[test]
    fn eta_examples() {
        assert!((default_eta(100, 10).unwrap() - 0.4292).abs() < 1e-4);
        assert!((default_eta(6, 2).unwrap() - 0.96).abs() < 0.01);
        assert!(default_eta(200, 10).unwrap() < default_eta(100, 10).unwrap());
        assert!(default_eta(100, 20).unwrap() > default_eta(100, 10).unwrap());
    }
}
