//! The `verify` sweep: one bracket row per grid point.

use anyhow::{Context, Result};
use maxbound_core::experts::default_eta;
use maxbound_core::extreme::Tolerance;
use maxbound_core::extreme::{make_bracket, regret_lower_bound, regret_upper_bound, BoundBracket, BracketStatus};
use maxbound_core::oracles::{gaussian_max_exact, WalkMaxDistribution};
use maxbound_core::tails::{
    binomial_tail_corollary, binomial_tail_exact, binomial_tail_lower, corollary_threshold, gaussian_tail_exact,
    gaussian_tail_lower, BinomialBound, GaussianTailQuery,
};
use maxbound_core::{EnsembleSize, EnsembleSpec, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Suite, SweepConfig};
use crate::report::{Cell, Table};

pub const VERIFY_COLUMNS: &[&str] = &[
    "family",
    "d",
    "n",
    "sigma",
    "k",
    "t",
    "x",
    "lower_primary",
    "lower_simplified",
    "exact",
    "upper",
    "status",
];

/// Step of the corollary offset grid `t = 1, 1.25, ..., n/2 + 1`.
pub const T_STEP: f64 = 0.25;
/// Gaussian tail rows use `x / sigma = 0, 0.25, ..., 8`.
pub const Z_STEP: f64 = 0.25;
pub const Z_MAX: f64 = 8.0;
/// Allowed Monte Carlo discrepancy, in standard errors.
pub const MAX_GAP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub family: Suite,
    pub d: Option<EnsembleSize>,
    pub n: Option<u64>,
    pub sigma: Option<f64>,
    pub k: Option<u64>,
    pub t: Option<f64>,
    pub x: Option<f64>,
    pub lower_primary: Option<f64>,
    pub lower_simplified: Option<f64>,
    pub exact: f64,
    pub upper: Option<f64>,
    pub status: BracketStatus,
}

impl VerifyRow {
    fn new(family: Suite, exact: f64) -> Self {
        Self {
            family,
            d: None,
            n: None,
            sigma: None,
            k: None,
            t: None,
            x: None,
            lower_primary: None,
            lower_simplified: None,
            exact,
            upper: None,
            status: BracketStatus::Pass,
        }
    }

    fn from_bracket(family: Suite, b: &BoundBracket) -> Self {
        Self {
            d: Some(b.spec.size()),
            lower_primary: b.lower_primary,
            lower_simplified: b.lower_simplified,
            upper: Some(b.upper),
            status: b.status(),
            ..Self::new(family, b.exact)
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.family.name()),
            self.d.map_or(Cell::Empty, Cell::Size),
            self.n.map_or(Cell::Empty, Cell::Int),
            self.sigma.into(),
            self.k.map_or(Cell::Empty, Cell::Int),
            self.t.into(),
            self.x.into(),
            self.lower_primary.into(),
            self.lower_simplified.into(),
            Cell::Float(self.exact),
            self.upper.into(),
            Cell::Text(self.status.as_str()),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Summary {
    pub rows: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    pub vacuous_count: usize,
    pub out_of_scope_count: usize,
}

impl Summary {
    pub fn of(statuses: impl IntoIterator<Item = BracketStatus>) -> Self {
        let mut s = Summary::default();
        for status in statuses {
            s.rows += 1;
            match status {
                BracketStatus::Pass => s.pass_count += 1,
                BracketStatus::Fail => s.fail_count += 1,
                BracketStatus::Vacuous => s.vacuous_count += 1,
                BracketStatus::OutOfScope => s.out_of_scope_count += 1,
            }
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "vacuous_count": self.vacuous_count,
            "out_of_scope_count": self.out_of_scope_count,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn table(&self) -> Table {
        Table {
            columns: VERIFY_COLUMNS,
            rows: self.rows.iter().map(VerifyRow::cells).collect(),
        }
    }

    /// The summary object with the rows attached under `records`.
    pub fn to_json(&self) -> Value {
        let mut v = self.summary.to_json();
        v["records"] = self.table().json_records();
        v
    }

    pub fn passed(&self) -> bool {
        self.summary.fail_count == 0
    }
}

/// Evaluate every selected family over its grid. Rows come out in grid order
/// (family, then the outer grid, then the inner grid) whatever the thread
/// schedule.
pub fn cmd_verify(config: &SweepConfig) -> Result<VerifyReport> {
    let mut rows = Vec::new();
    for &suite in &config.families {
        let block = match suite {
            Suite::Gaussian => gaussian_rows(config),
            Suite::Walk => walk_rows(config),
            Suite::Tails => tail_rows(config),
            Suite::Experts => experts_rows(config),
        }
        .with_context(|| format!("{} sweep", suite.name()))?;
        rows.extend(block);
    }
    let summary = Summary::of(rows.iter().map(|r| r.status));
    Ok(VerifyReport { rows, summary })
}

fn inflate_bracket(config: &SweepConfig, mut b: BoundBracket) -> BoundBracket {
    if config.lower_inflation != 0.0 {
        b.lower_primary = b.lower_primary.map(|l| config.inflate(l));
        b.lower_simplified = b.lower_simplified.map(|l| config.inflate(l));
        b.evaluate(config.tolerance);
    }
    b
}

fn gaussian_rows(config: &SweepConfig) -> Result<Vec<VerifyRow>> {
    let points: Vec<_> = config
        .d_grid
        .iter()
        .flat_map(|&d| config.sigma_grid.iter().map(move |&s| (d, s)))
        .collect();
    points
        .par_iter()
        .map(|&(d, sigma)| {
            let exact = gaussian_max_exact(d, sigma)?;
            let bracket = make_bracket(EnsembleSpec::gaussian(d, sigma)?, exact, config.tolerance)?;
            let mut row = VerifyRow::from_bracket(Suite::Gaussian, &inflate_bracket(config, bracket));
            row.sigma = Some(sigma);
            Ok(row)
        })
        .collect()
}

fn walk_rows(config: &SweepConfig) -> Result<Vec<VerifyRow>> {
    let dists = config
        .n_grid
        .par_iter()
        .map(|&n| WalkMaxDistribution::new(n))
        .collect::<Result<Vec<_>, Error>>()?;
    let points: Vec<_> = dists
        .iter()
        .flat_map(|dist| config.d_grid.iter().map(move |&d| (dist, d)))
        .collect();
    points
        .par_iter()
        .map(|&(dist, d)| {
            let n = dist.n();
            let bracket = make_bracket(EnsembleSpec::walk(d, n)?, dist.expected_max(d), config.tolerance)?;
            let mut row = VerifyRow::from_bracket(Suite::Walk, &inflate_bracket(config, bracket));
            row.n = Some(n);
            Ok(row)
        })
        .collect()
}

/// Dominance for probabilities: relative slack only, since an absolute
/// slack would swamp tails far below it.
fn dominated(bound: f64, exact: f64, tol: Tolerance) -> bool {
    bound <= exact * (1.0 + tol.rel)
}

fn tail_status(bounds: &[Option<f64>], exact: f64, tol: Tolerance) -> BracketStatus {
    if bounds.iter().flatten().all(|&b| dominated(b, exact, tol)) {
        BracketStatus::Pass
    } else {
        BracketStatus::Fail
    }
}

/// Offsets `1, 1 + step, ...` up to `n/2 + 1`.
pub fn t_grid(n: u64) -> impl Iterator<Item = f64> {
    let top = 0.5 * n as f64 + 1.0;
    (0..).map(|i| 1.0 + i as f64 * T_STEP).take_while(move |&t| t <= top)
}

pub fn z_grid() -> impl Iterator<Item = f64> {
    (0..).map(|i| i as f64 * Z_STEP).take_while(|&z| z <= Z_MAX)
}

fn tail_rows(config: &SweepConfig) -> Result<Vec<VerifyRow>> {
    let tol = config.tolerance;
    let per_n = config
        .n_grid
        .par_iter()
        .map(|&n| {
            let mut rows = Vec::new();
            for k in n.div_ceil(2)..=n {
                let k = k as i64;
                let exact = binomial_tail_exact(n, k);
                let mckay = config.inflate(binomial_tail_lower(n, k, BinomialBound::McKay)?);
                let stirling = config.inflate(binomial_tail_lower(n, k, BinomialBound::Stirling)?);
                rows.push(VerifyRow {
                    n: Some(n),
                    k: Some(k as u64),
                    lower_primary: Some(mckay),
                    lower_simplified: Some(stirling),
                    status: tail_status(&[Some(mckay), Some(stirling)], exact, tol),
                    ..VerifyRow::new(Suite::Tails, exact)
                });
            }
            for t in t_grid(n) {
                let k = corollary_threshold(n, t);
                let exact = binomial_tail_exact(n, k);
                let bound = config.inflate(binomial_tail_corollary(n, t)?);
                rows.push(VerifyRow {
                    n: Some(n),
                    k: Some(k as u64),
                    t: Some(t),
                    lower_primary: Some(bound),
                    status: tail_status(&[Some(bound)], exact, tol),
                    ..VerifyRow::new(Suite::Tails, exact)
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows: Vec<_> = per_n.into_iter().flatten().collect();
    for &sigma in &config.sigma_grid {
        for z in z_grid() {
            let q = GaussianTailQuery::new(z * sigma, sigma)?;
            let exact = gaussian_tail_exact(q);
            let bound = config.inflate(gaussian_tail_lower(q));
            rows.push(VerifyRow {
                sigma: Some(sigma),
                x: Some(q.x),
                lower_primary: Some(bound),
                status: tail_status(&[Some(bound)], exact, tol),
                ..VerifyRow::new(Suite::Tails, exact)
            });
        }
    }
    Ok(rows)
}

/// Learning rate used for `n` rounds and `d` actions. With a single action
/// every rate gives zero regret; 1 is reported.
pub fn eta_for(config: &SweepConfig, n: u64, d: u64) -> Result<f64> {
    Ok(match (config.eta, d) {
        (Some(eta), _) => eta,
        (None, 1) => 1.0,
        (None, d) => default_eta(n, d)?,
    })
}

fn experts_rows(config: &SweepConfig) -> Result<Vec<VerifyRow>> {
    let dists = config
        .n_grid
        .par_iter()
        .map(|&n| WalkMaxDistribution::new(n))
        .collect::<Result<Vec<_>, Error>>()?;
    let points: Vec<_> = dists
        .iter()
        .flat_map(|dist| config.d_grid.iter().map(move |&d| (dist, d)))
        .collect();
    points
        .par_iter()
        .map(|&(dist, d)| -> Result<VerifyRow> {
            let n = dist.n();
            let exact = 0.5 * dist.expected_max(d);
            let (lower, out_of_scope) = match regret_lower_bound(n, d) {
                Ok(l) => (Some(config.inflate(l)), None),
                Err(Error::Hypothesis(h)) => (None, Some(h)),
                Err(e) => return Err(e.into()),
            };
            let mut bracket = BoundBracket {
                spec: EnsembleSpec::walk(d, n)?,
                lower_primary: lower,
                lower_simplified: None,
                exact,
                upper: regret_upper_bound(n, d)?,
                out_of_scope,
                lower_violated: false,
                upper_violated: false,
            };
            bracket.evaluate(config.tolerance);
            let mut row = VerifyRow::from_bracket(Suite::Experts, &bracket);
            row.n = Some(n);
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepArgs;

    fn config(families: &[Suite], d: &[&str], n: &[&str]) -> SweepConfig {
        SweepConfig::resolve(SweepArgs {
            family: Some(families.to_vec()),
            d_grid: Some(d.iter().map(|s| s.to_string()).collect()),
            n_grid: Some(n.iter().map(|s| s.to_string()).collect()),
            replicates: Some(400),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(
            t_grid(4).collect::<Vec<_>>(),
            [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]
        );
        assert_eq!(z_grid().count(), 33);
    }

    #[test]
    fn walk_sweep_passes_and_small_n_is_out_of_scope() {
        let report = cmd_verify(&config(&[Suite::Walk], &["2..64"], &["3", "7..40"])).unwrap();
        assert_eq!(report.summary.rows, 63 * 35);
        assert_eq!(report.summary.fail_count, 0);
        assert!(report.rows[..63].iter().all(|r| r.status == BracketStatus::OutOfScope));
    }

    #[test]
    fn gaussian_at_trillion_is_informative() {
        let report = cmd_verify(&config(&[Suite::Gaussian], &["1e12"], &["7"])).unwrap();
        assert!(report.passed());
        for row in &report.rows {
            assert!(row.lower_primary.unwrap() > 0.0);
            assert_eq!(row.status, BracketStatus::Pass);
        }
    }

    #[test]
    fn inflation_breaks_tight_rows() {
        let mut c = config(&[Suite::Tails], &["2"], &["4"]);
        assert!(cmd_verify(&c).unwrap().passed());
        c.lower_inflation = 0.1;
        let report = cmd_verify(&c).unwrap();
        assert!(!report.passed());
        let zero = report.rows.iter().find(|r| r.x == Some(0.0)).unwrap();
        assert_eq!(zero.status, BracketStatus::Fail);
    }

    #[test]
    fn experts_rows() {
        let c = config(&[Suite::Experts], &["1", "2", "4", "e^3", "1e12"], &["7", "20", "200"]);
        let report = cmd_verify(&c).unwrap();
        assert_eq!(report.summary.rows, 15);
        assert!(report.passed(), "{:?}", report.summary);
        assert_eq!(report.rows[0].status, BracketStatus::OutOfScope);
        assert_eq!(report.rows[0].exact, 0.0);
    }

    #[test]
    fn rows_are_deterministic() {
        let c = config(
            &[Suite::Gaussian, Suite::Walk, Suite::Tails, Suite::Experts],
            &["2..6", "1e6"],
            &["7..12"],
        );
        let a = cmd_verify(&c).unwrap();
        let b = cmd_verify(&c).unwrap();
        assert_eq!(a.rows, b.rows);
    }
}
