//! The `experts` run: simulated regret of exponential weights against the
//! exact expectation it must match on random fair-coin losses.

use anyhow::{bail, Context, Result};
use maxbound_core::experts::estimate_expected_regret;
use maxbound_core::extreme::{regret_lower_bound, regret_upper_bound};
use maxbound_core::oracles::walk_max_exact;
use maxbound_core::{EnsembleSize, Error};
use serde_json::{json, Value};

use crate::config::SweepConfig;
use crate::report::json_f64;
use crate::verify::{eta_for, MAX_GAP};

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertsReport {
    pub n: u64,
    pub d: u64,
    pub replicates: u64,
    pub seed: u64,
    pub eta_used: f64,
    pub mean: f64,
    pub std_error: f64,
    pub half_walk_max_exact: f64,
    /// `None` when the lower bound's hypotheses fail.
    pub regret_lower_bound: Option<f64>,
    pub regret_upper_bound: f64,
    pub reduction_gap_in_std_errors: f64,
    pub max_regret: f64,
    pub guarantee_violations: u64,
}

impl ExpertsReport {
    pub fn passed(&self) -> bool {
        self.reduction_gap_in_std_errors <= MAX_GAP && self.guarantee_violations == 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "d": self.d,
            "replicates": self.replicates,
            "seed": self.seed,
            "eta_used": json_f64(self.eta_used),
            "mc_regret": {
                "mean": json_f64(self.mean),
                "std_error": json_f64(self.std_error),
            },
            "half_walk_max_exact": json_f64(self.half_walk_max_exact),
            "regret_lower_bound": self.regret_lower_bound.map_or(Value::from("out_of_scope"), json_f64),
            "regret_upper_bound": json_f64(self.regret_upper_bound),
            "reduction_gap_in_std_errors": json_f64(self.reduction_gap_in_std_errors),
            "max_regret": json_f64(self.max_regret),
            "guarantee_violations": self.guarantee_violations,
            "status": if self.passed() { "pass" } else { "fail" },
        })
    }
}

fn single<T: Copy>(grid: &[T], what: &str) -> Result<T> {
    match grid {
        [v] => Ok(*v),
        _ => bail!("experts takes a single {what}, got {} values", grid.len()),
    }
}

pub fn cmd_experts(config: &SweepConfig) -> Result<ExpertsReport> {
    let n = single(&config.n_grid, "n")?;
    let size = single(&config.d_grid, "d")?;
    let d = size
        .as_integer()
        .with_context(|| format!("experts needs an integer number of actions, got {}", size.count()))?;
    let eta = eta_for(config, n, d)?;
    let mc = estimate_expected_regret(
        usize::try_from(n)?,
        usize::try_from(d)?,
        eta,
        config.replicates,
        config.seed,
    )?;
    let d_size = EnsembleSize::try_from(d)?;
    let half = 0.5 * walk_max_exact(n, d_size)?;
    let lower = match regret_lower_bound(n, d_size) {
        Ok(l) => Some(config.inflate(l)),
        Err(Error::Hypothesis(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(ExpertsReport {
        n,
        d,
        replicates: config.replicates,
        seed: config.seed,
        eta_used: eta,
        mean: mc.estimate.mean,
        std_error: mc.estimate.std_error,
        half_walk_max_exact: half,
        regret_lower_bound: lower,
        regret_upper_bound: regret_upper_bound(n, d_size)?,
        reduction_gap_in_std_errors: mc.estimate.gap_in_std_errors(half),
        max_regret: mc.max_regret,
        guarantee_violations: mc.guarantee_violations,
    })
}
